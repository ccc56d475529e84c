//! Domain types and configuration validation.
//!
//! Everything downstream operates on a [`ValidConfig`]: a [`NetworkConfig`]
//! that has passed [`validate`] and whose invariants (α > 2, positive
//! parameters, unique RAT ids, at least one channel) may be assumed.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use rand::Rng;

/// Identifier of one radio access technology within a scenario (e.g. `s`
/// for the small-cell subnetwork, `w` for WiFi).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatId(pub String);

impl fmt::Display for RatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RatId {
    fn from(s: &str) -> Self {
        RatId(String::from(s))
    }
}

/// Deployment parameters of one RAT subnetwork.
#[derive(Debug, Clone, PartialEq)]
pub struct RatParams {
    pub id: RatId,
    /// AP density λ, APs per square meter.
    pub density: f64,
    /// Transmit power P, watts.
    pub power: f64,
    /// CSMA sensing radius R, meters.
    pub sense_radius: f64,
    /// SIR decoding threshold θ, linear (not dB).
    pub sir_threshold: f64,
}

/// Fading/shadowing model for both serving (H) and interference (G) channel
/// power gains. Gains are unit mean by construction.
///
/// Only Rayleigh is implemented; the fractional-moment and Laplace-transform
/// hooks exist so further kinds can be wired in, and every closed-form path
/// errors loudly on an unsupported kind instead of approximating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[non_exhaustive]
pub enum FadingModel {
    /// Unit-mean exponential power gains.
    Rayleigh,
}

/// Requested operation needs a closed form this fading kind does not provide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnsupportedFading;

impl fmt::Display for UnsupportedFading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("fading kind has no implemented closed form")
    }
}

impl core::error::Error for UnsupportedFading {}

impl FadingModel {
    /// Draw one channel power gain (unit mean).
    pub fn sample_gain<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            // Exponential(1) by inversion; u in [0,1) keeps the log argument in (0,1].
            FadingModel::Rayleigh => {
                let u: f64 = rng.random();
                -libm::log(1.0 - u)
            }
        }
    }

    /// Fractional moment E[G^(2/α)] of the interference gain.
    pub fn fractional_moment(&self, alpha: f64) -> Result<f64, UnsupportedFading> {
        match self {
            FadingModel::Rayleigh => Ok(libm::tgamma(1.0 + 2.0 / alpha)),
            #[allow(unreachable_patterns)]
            _ => Err(UnsupportedFading),
        }
    }

    /// Laplace transform L_G(s) = E[exp(-s G)] of the interference gain.
    pub fn laplace(&self, s: f64) -> Result<f64, UnsupportedFading> {
        match self {
            FadingModel::Rayleigh => Ok(1.0 / (1.0 + s)),
            #[allow(unreachable_patterns)]
            _ => Err(UnsupportedFading),
        }
    }
}

/// Full scenario description: the RAT set, the shared channel count, the
/// path-loss exponent and the fading model.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Ordered RAT set; order fixes the index used throughout the crate.
    pub rats: Vec<RatParams>,
    /// Number of shared channels m ≥ 1.
    pub channels: u32,
    /// Path-loss exponent α > 2 (required for interference convergence).
    pub alpha: f64,
    pub fading: FadingModel,
}

impl NetworkConfig {
    /// Sum of all RAT densities.
    pub fn total_density(&self) -> f64 {
        self.rats.iter().map(|r| r.density).sum()
    }

    /// Index of the RAT with the given id, if present.
    pub fn rat_index(&self, id: &RatId) -> Option<usize> {
        self.rats.iter().position(|r| &r.id == id)
    }
}

/// Why a [`NetworkConfig`] failed validation.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationError {
    /// α must be finite and strictly greater than 2.
    AlphaOutOfRange {
        alpha: f64,
    },
    /// A per-RAT parameter must be finite and strictly positive.
    NonPositiveParameter {
        rat: RatId,
        field: &'static str,
        value: f64,
    },
    DuplicateRatId {
        id: RatId,
    },
    ZeroChannels,
    EmptyRatSet,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationError::AlphaOutOfRange { alpha } => {
                write!(f, "path-loss exponent alpha={alpha} must be finite and > 2")
            }
            ValidationError::NonPositiveParameter { rat, field, value } => {
                write!(f, "rat `{rat}`: {field}={value} must be finite and > 0")
            }
            ValidationError::DuplicateRatId { id } => write!(f, "duplicate rat id `{id}`"),
            ValidationError::ZeroChannels => f.write_str("channel count must be >= 1"),
            ValidationError::EmptyRatSet => f.write_str("scenario needs at least one rat"),
        }
    }
}

impl core::error::Error for ValidationError {}

/// A [`NetworkConfig`] whose invariants have been checked. Immutable; safe to
/// share across parallel workers.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidConfig(NetworkConfig);

impl Deref for ValidConfig {
    type Target = NetworkConfig;

    fn deref(&self) -> &NetworkConfig {
        &self.0
    }
}

impl ValidConfig {
    pub fn into_inner(self) -> NetworkConfig {
        self.0
    }

    pub fn as_config(&self) -> &NetworkConfig {
        &self.0
    }
}

/// Check every type invariant and wrap the config on success.
///
/// Idempotent: re-validating the inner config of a [`ValidConfig`] returns an
/// equal value.
pub fn validate(config: NetworkConfig) -> Result<ValidConfig, ValidationError> {
    if config.channels == 0 {
        return Err(ValidationError::ZeroChannels);
    }
    if !(config.alpha.is_finite() && config.alpha > 2.0) {
        return Err(ValidationError::AlphaOutOfRange {
            alpha: config.alpha,
        });
    }
    if config.rats.is_empty() {
        return Err(ValidationError::EmptyRatSet);
    }
    for rat in &config.rats {
        for (field, value) in [
            ("density", rat.density),
            ("power", rat.power),
            ("sense_radius", rat.sense_radius),
            ("sir_threshold", rat.sir_threshold),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ValidationError::NonPositiveParameter {
                    rat: rat.id.clone(),
                    field,
                    value,
                });
            }
        }
    }
    for (i, rat) in config.rats.iter().enumerate() {
        if config.rats[..i].iter().any(|other| other.id == rat.id) {
            return Err(ValidationError::DuplicateRatId { id: rat.id.clone() });
        }
    }
    Ok(ValidConfig(config))
}
