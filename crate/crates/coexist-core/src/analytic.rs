//! Closed-form evaluation of the coexistence model: transmit probability
//! under m-channel CSMA contention, SIR success probability for nearest-AP
//! association under Rayleigh fading, the coexisting success probability,
//! and the coexisting throughput.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};
use core::fmt;

use crate::model::{FadingModel, UnsupportedFading, ValidConfig};
use crate::numeric::{self, QuadratureError};

/// Errors from the closed-form paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticError {
    /// The fading kind has no implemented closed form.
    UnsupportedFading,
    /// Adaptive quadrature failed to reach its tolerance.
    Quadrature(QuadratureError),
    /// Operation defined only for a specific RAT count.
    WrongRatCount { expected: usize, got: usize },
}

impl fmt::Display for AnalyticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticError::UnsupportedFading => f.write_str("unsupported fading kind"),
            AnalyticError::Quadrature(e) => write!(f, "{e}"),
            AnalyticError::WrongRatCount { expected, got } => {
                write!(f, "operation needs {expected} rats, config has {got}")
            }
        }
    }
}

impl core::error::Error for AnalyticError {}

impl From<UnsupportedFading> for AnalyticError {
    fn from(_: UnsupportedFading) -> Self {
        AnalyticError::UnsupportedFading
    }
}

impl From<QuadratureError> for AnalyticError {
    fn from(e: QuadratureError) -> Self {
        AnalyticError::Quadrature(e)
    }
}

/// Probability that a RAT-`rat` AP wins at least one of the m channels in
/// its sensing disc.
///
/// With N = π R² Λ the mean contender count (Λ the total density over all
/// RATs), the per-channel win probability is p = (1 - exp(-N/m))/(N/m) and
/// the result is 1 - (1-p)^m. The removable singularity at N/m -> 0 is
/// replaced by the Taylor limit p = 1 - N/(2m).
pub fn transmit_probability(cfg: &ValidConfig, rat: usize) -> f64 {
    1.0 - contention_failure_probability(cfg, rat)
}

/// Probability that a RAT-`rat` AP loses the contention on all m channels,
/// i.e. (1-p)^m. Exact complement of [`transmit_probability`]; useful when
/// η is so close to one that 1 - η underflows the f64 resolution at 1.
pub fn contention_failure_probability(cfg: &ValidConfig, rat: usize) -> f64 {
    let r = cfg.rats[rat].sense_radius;
    let n = PI * r * r * cfg.total_density();
    let x = n / cfg.channels as f64;
    // q = 1 - p; expm1 keeps the small-x cancellation exact down to the branch
    let q = if x < 1e-12 {
        0.5 * x
    } else {
        1.0 + libm::expm1(-x) / x
    };
    numeric::powi(q, cfg.channels)
}

/// [`transmit_probability`] for every RAT in config order.
pub fn transmit_probabilities(cfg: &ValidConfig) -> Vec<f64> {
    (0..cfg.rats.len())
        .map(|r| transmit_probability(cfg, r))
        .collect()
}

/// Interference scaling constant τ_α = Γ(1 - 2/α) · E[G^(2/α)].
pub fn tau_alpha(alpha: f64, fading: FadingModel) -> Result<f64, AnalyticError> {
    let moment = fading.fractional_moment(alpha)?;
    Ok(libm::tgamma(1.0 - 2.0 / alpha) * moment)
}

/// Rayleigh closed form of τ_α: 2π csc(2π/α)/α. Equals [`tau_alpha`] for
/// [`FadingModel::Rayleigh`]; kept as a separate arithmetic route for
/// cross-checking.
pub fn tau_alpha_cosecant(alpha: f64) -> f64 {
    let x = 2.0 * PI / alpha;
    x / libm::sin(x)
}

/// Rayleigh integrand of ℓ: 1 - L_G(t^(-α/2)) = 1/(1 + t^(α/2)).
#[inline]
fn ell_integrand(t: f64, half_alpha: f64) -> f64 {
    1.0 / (1.0 + libm::pow(t, half_alpha))
}

/// ℓ(θ) = ∫₀^(θ^(-2/α)) (1 - L_G(t^(-α/2))) dt, the exclusion-region
/// correction to same-RAT interference. NaN on quadrature failure (used
/// inside integrands where Result cannot propagate).
fn ell_raw(theta: f64, alpha: f64) -> f64 {
    let upper = libm::pow(theta, -2.0 / alpha);
    let half_alpha = 0.5 * alpha;
    match numeric::integrate(|t| ell_integrand(t, half_alpha), 0.0, upper, 1e-9, 0.0) {
        Ok(r) => r.value,
        Err(_) => f64::NAN,
    }
}

/// ℓ(θ) by adaptive quadrature to relative tolerance 1e-9.
///
/// Monotone decreasing in θ, with 0 < ℓ(θ) < min(θ^(-2/α), τ_α).
pub fn ell(theta: f64, alpha: f64, fading: FadingModel) -> Result<f64, AnalyticError> {
    match fading {
        FadingModel::Rayleigh => {}
        #[allow(unreachable_patterns)]
        _ => return Err(AnalyticError::UnsupportedFading),
    }
    let upper = libm::pow(theta, -2.0 / alpha);
    let half_alpha = 0.5 * alpha;
    let r = numeric::integrate(|t| ell_integrand(t, half_alpha), 0.0, upper, 1e-9, 0.0)?;
    Ok(r.value)
}

/// Σ_t (η_t λ_t)/(η_r λ_r) · (P_t/P_r)^(2/α), the interferer-density weight
/// seen by RAT `rat`. The t = rat term contributes exactly 1.
fn interferer_weight(cfg: &ValidConfig, etas: &[f64], rat: usize) -> f64 {
    let own = etas[rat] * cfg.rats[rat].density;
    let own_power = cfg.rats[rat].power;
    let exponent = 2.0 / cfg.alpha;
    cfg.rats
        .iter()
        .enumerate()
        .map(|(t, params)| {
            (etas[t] * params.density) / own * libm::pow(params.power / own_power, exponent)
        })
        .sum()
}

/// Success probability ρ_r(θ) for an explicit interferer weight and
/// threshold; shared by the fixed-threshold path and the throughput
/// integrand, where θ is the integration variable.
#[inline]
fn success_probability_at(weight: f64, theta: f64, tau: f64, alpha: f64, m: f64) -> f64 {
    let bracket = tau * weight - ell_raw(theta, alpha);
    1.0 / (1.0 + libm::pow(theta, 2.0 / alpha) / m * bracket)
}

/// Success probability of the typical RAT-`rat` user at its configured SIR
/// threshold, with transmit probabilities supplied by the caller (test hook
/// for forcing η).
pub fn success_probability_with_etas(
    cfg: &ValidConfig,
    rat: usize,
    etas: &[f64],
) -> Result<f64, AnalyticError> {
    assert_eq!(etas.len(), cfg.rats.len(), "one eta per rat");
    let tau = tau_alpha(cfg.alpha, cfg.fading)?;
    let theta = cfg.rats[rat].sir_threshold;
    // route ell through the fallible path so failures surface as errors
    let l = ell(theta, cfg.alpha, cfg.fading)?;
    let weight = interferer_weight(cfg, etas, rat);
    let m = cfg.channels as f64;
    Ok(1.0 / (1.0 + libm::pow(theta, 2.0 / cfg.alpha) / m * (tau * weight - l)))
}

/// Success probability of the typical RAT-`rat` user (nearest transmitting
/// same-RAT AP, Rayleigh fading, interference from every RAT on the serving
/// channel).
pub fn success_probability(cfg: &ValidConfig, rat: usize) -> Result<f64, AnalyticError> {
    let etas = transmit_probabilities(cfg);
    success_probability_with_etas(cfg, rat, &etas)
}

/// Hand-specialized two-RAT success probabilities (first, second) — the
/// explicit pair form of the general expression. Kept as a separate
/// arithmetic route; must agree with [`success_probability`] to 1e-14.
pub fn success_probability_pair(cfg: &ValidConfig) -> Result<(f64, f64), AnalyticError> {
    let etas = transmit_probabilities(cfg);
    success_probability_pair_with_etas(cfg, &etas)
}

/// [`success_probability_pair`] with caller-supplied transmit probabilities.
pub fn success_probability_pair_with_etas(
    cfg: &ValidConfig,
    etas: &[f64],
) -> Result<(f64, f64), AnalyticError> {
    if cfg.rats.len() != 2 {
        return Err(AnalyticError::WrongRatCount {
            expected: 2,
            got: cfg.rats.len(),
        });
    }
    let tau = tau_alpha(cfg.alpha, cfg.fading)?;
    let m = cfg.channels as f64;
    let e = 2.0 / cfg.alpha;
    let (a, b) = (&cfg.rats[0], &cfg.rats[1]);

    let cross_ba = (etas[1] * b.density) / (etas[0] * a.density) * libm::pow(b.power / a.power, e);
    let l_a = ell(a.sir_threshold, cfg.alpha, cfg.fading)?;
    let rho_a = 1.0 / (1.0 + libm::pow(a.sir_threshold, e) / m * (tau * (1.0 + cross_ba) - l_a));

    let cross_ab = (etas[0] * a.density) / (etas[1] * b.density) * libm::pow(a.power / b.power, e);
    let l_b = ell(b.sir_threshold, cfg.alpha, cfg.fading)?;
    let rho_b = 1.0 / (1.0 + libm::pow(b.sir_threshold, e) / m * (tau * (1.0 + cross_ab) - l_b));

    Ok((rho_a, rho_b))
}

/// Coexisting success probability: the arithmetic mean of the per-RAT
/// success probabilities.
pub fn coexisting_success_probability(cfg: &ValidConfig) -> Result<f64, AnalyticError> {
    let etas = transmit_probabilities(cfg);
    coexisting_success_probability_with_etas(cfg, &etas)
}

/// [`coexisting_success_probability`] with caller-supplied η.
pub fn coexisting_success_probability_with_etas(
    cfg: &ValidConfig,
    etas: &[f64],
) -> Result<f64, AnalyticError> {
    let mut sum = 0.0;
    for rat in 0..cfg.rats.len() {
        sum += success_probability_with_etas(cfg, rat, etas)?;
    }
    Ok(sum / cfg.rats.len() as f64)
}

/// Per-channel spectral efficiency of one RAT: (1/m) ∫₀^∞ ρ(2^x - 1) dx,
/// where ρ re-evaluates the success probability at threshold 2^x - 1
/// (ℓ is threshold-dependent and re-integrated per quadrature node).
fn spectral_efficiency(weight: f64, tau: f64, alpha: f64, m: f64) -> Result<f64, AnalyticError> {
    const REL_TOL: f64 = 1e-6;
    const TAIL_FRACTION: f64 = 1e-10;
    const MAX_END: f64 = 1048576.0;

    let integrand = |x: f64| {
        let theta = libm::expm1(x * LN_2);
        if theta <= 0.0 {
            1.0
        } else {
            success_probability_at(weight, theta, tau, alpha, m)
        }
    };

    // For x >= 1 (theta >= 1): rho(theta) <= m·theta^(-2/α)/(τ·weight - 1),
    // theta = 2^x - 1 >= 2^(x-1), so the tail beyond X is bounded by
    // K·(α/(2 ln 2))·2^(-2X/α) with K = m·2^(2/α)/(τ·weight - 1).
    let k = m * libm::pow(2.0, 2.0 / alpha) / (tau * weight - 1.0);
    let tail_bound = |x: f64| k * alpha / (2.0 * LN_2) * libm::pow(2.0, -2.0 * x / alpha);

    let mut acc = 0.0;
    let mut a = 0.0;
    let mut b = 1.0;
    loop {
        let abs_tol = REL_TOL * 0.125 * acc;
        let r = numeric::integrate(integrand, a, b, REL_TOL, abs_tol)?;
        if !r.value.is_finite() {
            return Err(AnalyticError::Quadrature(QuadratureError {
                value: r.value,
                abs_error: r.abs_error,
                evaluations: r.evaluations,
            }));
        }
        acc += r.value;
        if k.is_finite() && tail_bound(b) <= TAIL_FRACTION * acc {
            return Ok(acc / m);
        }
        if b >= MAX_END {
            return Err(AnalyticError::Quadrature(QuadratureError {
                value: acc,
                abs_error: tail_bound(b),
                evaluations: r.evaluations,
            }));
        }
        a = b;
        b *= 2.0;
    }
}

/// Per-RAT contributions to the coexisting throughput, in config order
/// (bps/Hz/channel each). Their sum is the coexisting throughput.
pub fn coexisting_throughput_parts(cfg: &ValidConfig) -> Result<Vec<f64>, AnalyticError> {
    let etas = transmit_probabilities(cfg);
    coexisting_throughput_parts_with_etas(cfg, &etas)
}

/// [`coexisting_throughput_parts`] with caller-supplied η.
pub fn coexisting_throughput_parts_with_etas(
    cfg: &ValidConfig,
    etas: &[f64],
) -> Result<Vec<f64>, AnalyticError> {
    let tau = tau_alpha(cfg.alpha, cfg.fading)?;
    let m = cfg.channels as f64;
    (0..cfg.rats.len())
        .map(|rat| spectral_efficiency(interferer_weight(cfg, etas, rat), tau, cfg.alpha, m))
        .collect()
}

/// Coexisting throughput: per-channel sum of the spectrum efficiencies of
/// all RAT subnetworks, bps/Hz/channel.
pub fn coexisting_throughput(cfg: &ValidConfig) -> Result<f64, AnalyticError> {
    Ok(coexisting_throughput_parts(cfg)?.iter().sum())
}

/// Scalar summary of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticReport {
    /// Transmit probability per RAT, config order.
    pub eta: Vec<f64>,
    /// Success probability per RAT, config order.
    pub rho: Vec<f64>,
    /// Arithmetic mean of `rho` (exactly).
    pub rho_ce: f64,
    /// Coexisting throughput, bps/Hz/channel.
    pub c_ce: f64,
}

impl AnalyticReport {
    pub fn compute(cfg: &ValidConfig) -> Result<Self, AnalyticError> {
        let eta = transmit_probabilities(cfg);
        let rho: Vec<f64> = (0..cfg.rats.len())
            .map(|r| success_probability_with_etas(cfg, r, &eta))
            .collect::<Result<_, _>>()?;
        let rho_ce = rho.iter().sum::<f64>() / rho.len() as f64;
        let c_ce = coexisting_throughput_parts_with_etas(cfg, &eta)?
            .iter()
            .sum();
        Ok(AnalyticReport {
            eta,
            rho,
            rho_ce,
            c_ce,
        })
    }
}

/// The scalar quantities behind the density-ratio optimum: τ_α, per-RAT
/// ℓ(θ_r), the linearized coefficients c_r and d_r, and (for two-RAT
/// scenarios) the power-weighted density ratio y.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticIntermediates {
    pub tau_alpha: f64,
    /// ℓ(θ_r) per RAT, config order.
    pub ell: Vec<f64>,
    /// c_r = 1 + θ_r^(2/α) [τ_α - ℓ(θ_r)] / m.
    pub c: Vec<f64>,
    /// d_r = τ_α θ_r^(2/α) / m.
    pub d: Vec<f64>,
    /// (η_0 λ_0 / η_1 λ_1) (P_0/P_1)^(2/α); present only for |R| = 2.
    pub y: Option<f64>,
}

impl AnalyticIntermediates {
    pub fn compute(cfg: &ValidConfig) -> Result<Self, AnalyticError> {
        let etas = transmit_probabilities(cfg);
        Self::compute_with_etas(cfg, &etas)
    }

    pub fn compute_with_etas(cfg: &ValidConfig, etas: &[f64]) -> Result<Self, AnalyticError> {
        let tau = tau_alpha(cfg.alpha, cfg.fading)?;
        let m = cfg.channels as f64;
        let e = 2.0 / cfg.alpha;
        let mut ells = Vec::with_capacity(cfg.rats.len());
        let mut c = Vec::with_capacity(cfg.rats.len());
        let mut d = Vec::with_capacity(cfg.rats.len());
        for rat in &cfg.rats {
            let l = ell(rat.sir_threshold, cfg.alpha, cfg.fading)?;
            let te = libm::pow(rat.sir_threshold, e);
            ells.push(l);
            c.push(1.0 + te * (tau - l) / m);
            d.push(tau * te / m);
        }
        let y = (cfg.rats.len() == 2).then(|| {
            (etas[0] * cfg.rats[0].density) / (etas[1] * cfg.rats[1].density)
                * libm::pow(cfg.rats[0].power / cfg.rats[1].power, e)
        });
        Ok(AnalyticIntermediates {
            tau_alpha: tau,
            ell: ells,
            c,
            d,
            y,
        })
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::model::{validate, FadingModel, NetworkConfig, RatParams};
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    pub(crate) fn fig1_config(channels: u32) -> ValidConfig {
        validate(NetworkConfig {
            rats: alloc::vec![
                RatParams {
                    id: "s".into(),
                    density: 1e-4,
                    power: 1.0,
                    sense_radius: 50.0,
                    sir_threshold: 0.5,
                },
                RatParams {
                    id: "w".into(),
                    density: 3e-4,
                    power: 0.5,
                    sense_radius: 30.0,
                    sir_threshold: 0.5,
                },
            ],
            channels,
            alpha: 4.0,
            fading: FadingModel::Rayleigh,
        })
        .unwrap()
    }

    fn single_rat_config(density: f64, channels: u32) -> ValidConfig {
        validate(NetworkConfig {
            rats: alloc::vec![RatParams {
                id: "w".into(),
                density,
                power: 0.5,
                sense_radius: 30.0,
                sir_threshold: 0.5,
            }],
            channels,
            alpha: 4.0,
            fading: FadingModel::Rayleigh,
        })
        .unwrap()
    }

    // -- transmit probability -------------------------------------------

    #[test]
    fn eta_reference_values() {
        // independently computed with an arbitrary-precision calculator
        // (mpmath, 40 digits): N_s = pi*2500*4e-4, N_w = pi*900*4e-4, m=5
        let cfg = fig1_config(5);
        let eta_s = transmit_probability(&cfg, 0);
        let eta_w = transmit_probability(&cfg, 1);
        assert!((eta_s - 0.998_867_385_513_178_67).abs() < 1e-14, "{eta_s}");
        assert!((eta_w - 0.999_987_218_217_993_54).abs() < 1e-14, "{eta_w}");
    }

    #[test]
    fn eta_empty_contention_limit() {
        let mut raw = fig1_config(5).into_inner();
        raw.rats[0].density = 1e-300;
        raw.rats[1].density = 1e-300;
        let cfg = validate(raw).unwrap();
        assert_eq!(transmit_probability(&cfg, 0), 1.0);
        assert_eq!(transmit_probability(&cfg, 1), 1.0);
    }

    #[test]
    fn eta_taylor_branch_continuous() {
        // across the 1e-12 switch the two branches agree to ~1e-13 relative
        let mk = |density: f64| {
            let mut raw = fig1_config(1).into_inner();
            raw.rats[0].density = density;
            raw.rats[1].density = density;
            validate(raw).unwrap()
        };
        // N/m = pi*2500*2*rho; pick densities either side of 1e-12
        let lo = mk(6.2e-17);
        let hi = mk(6.4e-17);
        let e_lo = 1.0 - transmit_probability(&lo, 0);
        let e_hi = 1.0 - transmit_probability(&hi, 0);
        assert!(e_lo > 0.0 && e_hi > e_lo, "{e_lo} {e_hi}");
        assert!((e_hi / e_lo - 6.4 / 6.2).abs() < 1e-3);
    }

    #[test]
    fn eta_strictly_increasing_in_m_to_one() {
        // asserted on the failure probability: eta itself saturates to 1.0
        // at f64 resolution around m=15 for these densities
        let mut last = 1.0;
        for m in 1..=50 {
            let miss = contention_failure_probability(&fig1_config(m), 0);
            assert!(miss < last, "m={m}: {miss} >= {last}");
            assert_eq!(transmit_probability(&fig1_config(m), 0), 1.0 - miss);
            last = miss;
        }
        let eta = transmit_probability(&fig1_config(1_000_000), 0);
        assert!(eta > 1.0 - 1e-6, "{eta}");
    }

    // -- tau_alpha -------------------------------------------------------

    #[test]
    fn tau_4_is_half_pi() {
        let tau = tau_alpha(4.0, FadingModel::Rayleigh).unwrap();
        assert!((tau - FRAC_PI_2).abs() < 1e-12, "{tau}");
        assert!((tau_alpha_cosecant(4.0) - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn tau_dual_forms_agree() {
        for alpha in [2.1, 2.5, 3.0, 4.0, 6.0] {
            let gamma_form = tau_alpha(alpha, FadingModel::Rayleigh).unwrap();
            let csc_form = tau_alpha_cosecant(alpha);
            let scale = gamma_form.abs().max(1.0);
            assert!(
                (gamma_form - csc_form).abs() <= 1e-12 * scale,
                "alpha={alpha}: {gamma_form} vs {csc_form}"
            );
        }
    }

    #[test]
    fn tau_large_alpha_limit() {
        let tau = tau_alpha(1e8, FadingModel::Rayleigh).unwrap();
        assert!((tau - 1.0).abs() < 1e-6, "{tau}");
    }

    // -- ell ---------------------------------------------------------------

    #[test]
    fn ell_alpha4_closed_form() {
        // alpha=4 antiderivative is arctan(t), evaluated at theta^(-1/2);
        // computed here through std (different math backend than libm)
        let l = ell(0.5, 4.0, FadingModel::Rayleigh).unwrap();
        let want = 2.0_f64.sqrt().atan();
        assert!((l - want).abs() < 1e-9, "{l} vs {want}");

        let l1 = ell(1.0, 4.0, FadingModel::Rayleigh).unwrap();
        assert!((l1 - FRAC_PI_4).abs() < 1e-9, "{l1}");
    }

    #[test]
    fn ell_vanishes_for_huge_threshold() {
        let l = ell(1e12, 4.0, FadingModel::Rayleigh).unwrap();
        assert!(l > 0.0 && l < 1.1e-6, "{l}");
    }

    #[test]
    fn ell_approaches_tau_for_tiny_threshold() {
        let tau = tau_alpha(4.0, FadingModel::Rayleigh).unwrap();
        let l = ell(1e-8, 4.0, FadingModel::Rayleigh).unwrap();
        assert!(tau - l > 0.0 && tau - l < 1e-4, "tau-l = {}", tau - l);
    }

    #[test]
    fn ell_monotone_and_bounded() {
        for alpha in [2.2, 3.0, 4.0, 6.0] {
            let tau = tau_alpha(alpha, FadingModel::Rayleigh).unwrap();
            let mut last = f64::INFINITY;
            for exp in -6..=6 {
                let theta = libm::pow(10.0, exp as f64);
                let l = ell(theta, alpha, FadingModel::Rayleigh).unwrap();
                assert!(l > 0.0 && l < tau, "alpha={alpha} theta={theta}: {l}");
                assert!(l < libm::pow(theta, -2.0 / alpha) + 1e-12);
                assert!(l < last, "not decreasing at theta={theta}");
                last = l;
            }
        }
    }

    // -- success probability ---------------------------------------------

    #[test]
    fn rho_fig1_reference_values() {
        // frozen from the same arbitrary-precision evaluation as eta above
        let cfg = fig1_config(5);
        let rho_s = success_probability(&cfg, 0).unwrap();
        let rho_w = success_probability(&cfg, 1).unwrap();
        let rho_ce = coexisting_success_probability(&cfg).unwrap();
        assert!((rho_s - 0.641_515_339_180_066_8).abs() < 5e-9, "{rho_s}");
        assert!((rho_w - 0.839_176_477_078_935_4).abs() < 5e-9, "{rho_w}");
        assert!((rho_ce - 0.740_345_908_129_501_1).abs() < 5e-9, "{rho_ce}");
    }

    #[test]
    fn rho_ce_fig1_table() {
        // m=1..10 values, frozen from the independent evaluation
        let want = [
            0.376_255_772_911_786_5,
            0.536_158_788_086_006_5,
            0.634_966_346_793_209_1,
            0.697_293_039_952_593_4,
            0.740_345_908_129_501_1,
            0.772_343_739_683_629_9,
            0.797_220_099_198_044_9,
            0.817_153_273_871_256_5,
            0.833_495_205_679_573_6,
            0.847_141_468_276_587_1,
        ];
        for (i, expect) in want.iter().enumerate() {
            let got = coexisting_success_probability(&fig1_config(i as u32 + 1)).unwrap();
            assert!((got - expect).abs() < 5e-9, "m={}: {got}", i + 1);
        }
    }

    #[test]
    fn single_rat_bracket_reduction() {
        // |R|=1: bracket is theta^(2/a)[tau - ell]/m; closed-form cross-check
        let cfg = single_rat_config(3e-4, 5);
        let rho = success_probability(&cfg, 0).unwrap();
        let tau = tau_alpha(4.0, FadingModel::Rayleigh).unwrap();
        let l = ell(0.5, 4.0, FadingModel::Rayleigh).unwrap();
        let want = 1.0 / (1.0 + 0.5_f64.sqrt() / 5.0 * (tau - l));
        assert!((rho - want).abs() < 1e-15, "{rho} vs {want}");
        // m -> infinity drives rho to 1
        let rho_big = success_probability(&single_rat_config(3e-4, 1_000_000), 0).unwrap();
        assert!(rho_big > 1.0 - 1e-3, "{rho_big}");
    }

    #[test]
    fn symmetric_rats_have_equal_rho() {
        let mut raw = fig1_config(5).into_inner();
        raw.rats[1].density = raw.rats[0].density;
        raw.rats[1].power = raw.rats[0].power;
        raw.rats[1].sense_radius = raw.rats[0].sense_radius;
        let cfg = validate(raw).unwrap();
        let a = success_probability(&cfg, 0).unwrap();
        let b = success_probability(&cfg, 1).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn pair_specialization_matches_general() {
        let cfg = fig1_config(5);
        let (pa, pb) = success_probability_pair(&cfg).unwrap();
        let ga = success_probability(&cfg, 0).unwrap();
        let gb = success_probability(&cfg, 1).unwrap();
        assert!((pa - ga).abs() <= 1e-14 && (pb - gb).abs() <= 1e-14);
    }

    #[test]
    fn pair_requires_two_rats() {
        let cfg = single_rat_config(3e-4, 5);
        assert!(matches!(
            success_probability_pair(&cfg),
            Err(AnalyticError::WrongRatCount {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn rho_decreasing_in_threshold() {
        let mut last = 1.0;
        for theta in [0.01, 0.1, 0.5, 1.0, 5.0, 50.0] {
            let mut raw = fig1_config(5).into_inner();
            raw.rats[0].sir_threshold = theta;
            let rho = success_probability(&validate(raw).unwrap(), 0).unwrap();
            assert!(rho < last, "theta={theta}: {rho} >= {last}");
            last = rho;
        }
    }

    #[test]
    fn power_doubling_is_bit_identical() {
        let base = fig1_config(5);
        let mut raw = base.as_config().clone();
        for r in &mut raw.rats {
            r.power *= 2.0;
        }
        let scaled = validate(raw).unwrap();
        for rat in 0..2 {
            let a = success_probability(&base, rat).unwrap();
            let b = success_probability(&scaled, rat).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let ca = coexisting_throughput(&base).unwrap();
        let cb = coexisting_throughput(&scaled).unwrap();
        assert_eq!(ca.to_bits(), cb.to_bits());
    }

    #[test]
    fn density_scaling_with_unit_eta_is_invariant() {
        // with eta forced to one, rho depends on density ratios only
        let base = fig1_config(5);
        let mut raw = base.as_config().clone();
        for r in &mut raw.rats {
            r.density *= 2.0;
        }
        let scaled = validate(raw).unwrap();
        let ones = [1.0, 1.0];
        for rat in 0..2 {
            let a = success_probability_with_etas(&base, rat, &ones).unwrap();
            let b = success_probability_with_etas(&scaled, rat, &ones).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // arbitrary factor: identical to rounding
        let mut raw = base.as_config().clone();
        for r in &mut raw.rats {
            r.density *= 3.0;
        }
        let scaled = validate(raw).unwrap();
        for rat in 0..2 {
            let a = success_probability_with_etas(&base, rat, &ones).unwrap();
            let b = success_probability_with_etas(&scaled, rat, &ones).unwrap();
            assert!((a - b).abs() <= 1e-14 * a.abs());
        }
    }

    #[test]
    fn rho_ce_is_exact_mean() {
        let report = AnalyticReport::compute(&fig1_config(5)).unwrap();
        let mean = report.rho.iter().sum::<f64>() / report.rho.len() as f64;
        assert_eq!(report.rho_ce.to_bits(), mean.to_bits());
        for p in report.eta.iter().chain(&report.rho) {
            assert!((0.0..=1.0).contains(p));
        }
        assert!((0.0..=1.0).contains(&report.rho_ce));
        assert!(report.c_ce >= 0.0);
    }

    // -- throughput --------------------------------------------------------

    #[test]
    fn single_rat_throughput_reference() {
        // frozen from an independent scipy quadrature of the same integral;
        // lambda-independent for a single RAT (the weight sum is exactly 1)
        for density in [1e-4, 3e-4, 1e-3] {
            let c = coexisting_throughput(&single_rat_config(density, 5)).unwrap();
            assert!((c - 0.948_030_341_355_962_3).abs() < 5e-6, "{c}");
        }
    }

    #[test]
    fn fig3_throughput_reference_points() {
        // two-RAT coexisting throughput at ratio 3 (Fig. 3 parameters),
        // frozen from the independent scipy evaluation
        let c = coexisting_throughput(&fig1_config(5)).unwrap();
        assert!((c - 1.254_312_917_026_87).abs() < 2e-5, "{c}");
        let parts = coexisting_throughput_parts(&fig1_config(5)).unwrap();
        assert_eq!(parts.len(), 2);
        let sum: f64 = parts.iter().sum();
        assert_eq!(sum.to_bits(), c.to_bits());
    }

    #[test]
    fn overwhelming_interference_contributes_nothing() {
        // forcing the interferer weight up scales the threshold term; the
        // per-RAT spectral efficiency must collapse to ~0
        let tau = tau_alpha(4.0, FadingModel::Rayleigh).unwrap();
        let c = spectral_efficiency(1e30, tau, 4.0, 5.0).unwrap();
        assert!((0.0..1e-12).contains(&c), "{c}");
    }

    // -- intermediates -----------------------------------------------------

    #[test]
    fn intermediates_reference_values() {
        let cfg = fig1_config(5);
        let im = AnalyticIntermediates::compute(&cfg).unwrap();
        assert!((im.tau_alpha - FRAC_PI_2).abs() < 1e-12);
        // c = 1 + 0.5^0.5 (pi/2 - arctan(sqrt 2))/5, frozen independently
        assert!(
            (im.c[0] - 1.087_041_975_136_710_3).abs() < 1e-9,
            "{}",
            im.c[0]
        );
        assert_eq!(im.c[0].to_bits(), im.c[1].to_bits());
        assert!((im.d[0] - 0.222_144_146_907_918_3).abs() < 1e-12);
        assert!(im.tau_alpha > 0.0);
        for (l, c) in im.ell.iter().zip(&im.c) {
            assert!(*l > 0.0 && *l < im.tau_alpha);
            assert!(*c > 0.0);
        }
        let y = im.y.unwrap();
        // (eta_s lam_s)/(eta_w lam_w) * sqrt(2) with the frozen eta values
        assert!((y - 0.470_876_6).abs() < 1e-6, "{y}");
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn prop_ell_bounds(alpha in 2.05_f64..8.0, log_theta in -4.0_f64..4.0) {
            let theta = libm::pow(10.0, log_theta);
            let tau = tau_alpha(alpha, FadingModel::Rayleigh).unwrap();
            let l = ell(theta, alpha, FadingModel::Rayleigh).unwrap();
            proptest::prop_assert!(l > 0.0);
            proptest::prop_assert!(l < tau);
            proptest::prop_assert!(l <= libm::pow(theta, -2.0 / alpha) + 1e-12);
        }

        #[test]
        fn prop_eta_in_unit_interval(
            lam0 in 1e-6_f64..1e-3,
            lam1 in 1e-6_f64..1e-3,
            radius in 5.0_f64..200.0,
            m in 1_u32..40,
        ) {
            let mut raw = fig1_config(m).into_inner();
            raw.rats[0].density = lam0;
            raw.rats[1].density = lam1;
            raw.rats[0].sense_radius = radius;
            let cfg = validate(raw).unwrap();
            let eta = transmit_probability(&cfg, 0);
            proptest::prop_assert!(eta > 0.0 && eta <= 1.0);
        }

        #[test]
        fn prop_pair_matches_general(
            lam0 in 1e-6_f64..1e-3,
            lam1 in 1e-6_f64..1e-3,
            p0 in 0.01_f64..10.0,
            p1 in 0.01_f64..10.0,
            th0 in 0.01_f64..50.0,
            th1 in 0.01_f64..50.0,
            alpha in 2.1_f64..7.0,
            m in 1_u32..20,
        ) {
            let mut raw = fig1_config(m).into_inner();
            raw.rats[0].density = lam0;
            raw.rats[1].density = lam1;
            raw.rats[0].power = p0;
            raw.rats[1].power = p1;
            raw.rats[0].sir_threshold = th0;
            raw.rats[1].sir_threshold = th1;
            raw.alpha = alpha;
            let cfg = validate(raw).unwrap();
            let (pa, pb) = success_probability_pair(&cfg).unwrap();
            let ga = success_probability(&cfg, 0).unwrap();
            let gb = success_probability(&cfg, 1).unwrap();
            proptest::prop_assert!((pa - ga).abs() <= 1e-14);
            proptest::prop_assert!((pb - gb).abs() <= 1e-14);
            proptest::prop_assert!(pa > 0.0 && pa < 1.0);
            proptest::prop_assert!(pb > 0.0 && pb < 1.0);
        }
    }
}
