//! Experiment spec file: a single JSON document mirroring the run
//! parameters. Thresholds may be given linear (`sir_threshold`) or in dB
//! (`sir_threshold_db`); everything downstream works in linear units.

use std::path::Path;

use serde::{Deserialize, Serialize};

use coexist_core::montecarlo::{ContentionMode, McSettings, WindowPolicy};
use coexist_core::{validate, FadingModel, NetworkConfig, RatParams, ValidConfig};

use crate::runner::RunError;

/// Seed used when neither the spec nor `--seed` provides one.
pub const DEFAULT_SEED: u64 = 1729;

/// Default drop counts: probabilities vs the heavier-tailed throughput.
pub const DEFAULT_DROPS_PROBABILITY: u64 = 100_000;
pub const DEFAULT_DROPS_THROUGHPUT: u64 = 200_000;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RatSpec {
    pub id: String,
    pub lambda_per_m2: f64,
    pub power_w: f64,
    pub sense_radius_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sir_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sir_threshold_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingKind {
    Rayleigh,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub rats: Vec<RatSpec>,
    pub channels: u32,
    pub alpha: f64,
    pub fading: FadingKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Analytic,
    Simulate,
    SweepM,
    SweepRatio,
    Optimize,
    Throughput,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Analytic => "analytic",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::SweepM => "sweep-m",
            ExperimentKind::SweepRatio => "sweep-ratio",
            ExperimentKind::Optimize => "optimize",
            ExperimentKind::Throughput => "throughput",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Channel count m; start/stop are integers, step 1.
    M,
    /// λ_1/λ_0 with λ_0 fixed (two-RAT scenarios).
    DensityRatio,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSpec {
    Thinned,
    Matern,
}

impl From<ModeSpec> for ContentionMode {
    fn from(m: ModeSpec) -> ContentionMode {
        match m {
            ModeSpec::Thinned => ContentionMode::ThinnedPpp,
            ModeSpec::Matern => ContentionMode::MaternCsma,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drops: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeSpec>,
    /// Fixed square window side in meters; omitted = automatic sizing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_side_m: Option<f64>,
    /// Also run the other contention mode and emit the difference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_modes: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// CSV data plus a JSON summary (default).
    Csv,
    /// JSON summary only.
    Json,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output file stem; `<stem>.csv` / `<stem>.json` under `--out`.
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

/// The spec file as written on disk.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub scenario: ScenarioSpec,
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSpec>,
    pub output: OutputSpec,
}

/// Command-line overrides applied on top of the spec file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub drops: Option<u64>,
    pub mode: Option<ModeSpec>,
    pub format: Option<OutputFormat>,
}

/// A fully resolved, validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenario: ValidConfig,
    pub experiment: ExperimentKind,
    pub sweep: Option<SweepSpec>,
    pub drops: u64,
    pub seed: u64,
    pub mode: ContentionMode,
    pub window_side_m: Option<f64>,
    pub compare_modes: bool,
    pub stem: String,
    pub format: OutputFormat,
}

impl ExperimentSpec {
    /// Monte Carlo settings with this experiment's window policy.
    pub fn mc_settings(&self, drops: u64) -> McSettings {
        let mut settings = McSettings::new(drops, self.seed, self.mode);
        if let Some(side) = self.window_side_m {
            settings.window = WindowPolicy::Fixed(coexist_core::geometry::Window::square(side));
        }
        settings
    }
}

fn config_err(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

fn linear_threshold(rat: &RatSpec) -> Result<f64, RunError> {
    match (rat.sir_threshold, rat.sir_threshold_db) {
        (Some(linear), None) => Ok(linear),
        (None, Some(db)) => Ok(10f64.powf(db / 10.0)),
        (Some(_), Some(_)) => Err(config_err(format!(
            "rat `{}`: give sir_threshold or sir_threshold_db, not both",
            rat.id
        ))),
        (None, None) => Err(config_err(format!(
            "rat `{}`: missing sir_threshold (or sir_threshold_db)",
            rat.id
        ))),
    }
}

/// Parse a spec file from JSON text, reporting parse errors with their
/// line/column diagnostic.
pub fn parse_spec(text: &str) -> Result<SpecFile, RunError> {
    serde_json::from_str(text).map_err(|e| {
        config_err(format!(
            "config parse error at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

/// Load, parse, validate and resolve a spec file.
pub fn load_spec(path: &Path, overrides: &Overrides) -> Result<ExperimentSpec, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let file = parse_spec(&text)?;
    resolve_spec(file, overrides)
}

/// Validate the scenario, apply defaults and overrides.
pub fn resolve_spec(file: SpecFile, overrides: &Overrides) -> Result<ExperimentSpec, RunError> {
    let mut rats = Vec::with_capacity(file.scenario.rats.len());
    for rat in &file.scenario.rats {
        rats.push(RatParams {
            id: rat.id.as_str().into(),
            density: rat.lambda_per_m2,
            power: rat.power_w,
            sense_radius: rat.sense_radius_m,
            sir_threshold: linear_threshold(rat)?,
        });
    }
    let scenario = validate(NetworkConfig {
        rats,
        channels: file.scenario.channels,
        alpha: file.scenario.alpha,
        fading: match file.scenario.fading {
            FadingKind::Rayleigh => FadingModel::Rayleigh,
        },
    })
    .map_err(|e| config_err(format!("scenario: {e}")))?;

    match file.experiment {
        ExperimentKind::SweepM => {
            let sweep = file
                .sweep
                .ok_or_else(|| config_err("sweep-m requires a sweep section"))?;
            if sweep.variable != SweepVariable::M {
                return Err(config_err("sweep-m requires sweep.variable = \"m\""));
            }
            if sweep.start < 1.0 || sweep.stop < sweep.start {
                return Err(config_err("sweep-m needs 1 <= start <= stop"));
            }
        }
        ExperimentKind::SweepRatio => {
            let sweep = file
                .sweep
                .ok_or_else(|| config_err("sweep-ratio requires a sweep section"))?;
            if sweep.variable != SweepVariable::DensityRatio {
                return Err(config_err(
                    "sweep-ratio requires sweep.variable = \"density_ratio\"",
                ));
            }
            check_ratio_sweep(&sweep)?;
            if scenario.rats.len() != 2 {
                return Err(config_err("sweep-ratio needs exactly two rats"));
            }
        }
        ExperimentKind::Simulate | ExperimentKind::Throughput => {
            if file.mc.is_none() {
                return Err(config_err(format!(
                    "{} requires an mc section",
                    file.experiment.as_str()
                )));
            }
            if let Some(sweep) = &file.sweep {
                if file.experiment == ExperimentKind::Throughput {
                    if sweep.variable != SweepVariable::DensityRatio {
                        return Err(config_err(
                            "throughput sweeps support sweep.variable = \"density_ratio\"",
                        ));
                    }
                    check_ratio_sweep(sweep)?;
                    if scenario.rats.len() != 2 {
                        return Err(config_err(
                            "a throughput ratio sweep needs exactly two rats",
                        ));
                    }
                }
            }
        }
        ExperimentKind::Optimize => {
            if scenario.rats.len() != 2 {
                return Err(config_err("optimize needs exactly two rats"));
            }
            if let Some(sweep) = &file.sweep {
                if sweep.variable != SweepVariable::DensityRatio {
                    return Err(config_err(
                        "optimize cross-check sweeps use sweep.variable = \"density_ratio\"",
                    ));
                }
                check_ratio_sweep(sweep)?;
            }
        }
        ExperimentKind::Analytic => {}
    }

    let mc = file.mc.unwrap_or_default();
    let default_drops = match file.experiment {
        ExperimentKind::Throughput => DEFAULT_DROPS_THROUGHPUT,
        _ => DEFAULT_DROPS_PROBABILITY,
    };
    let drops = overrides.drops.or(mc.drops).unwrap_or(default_drops).max(1);
    let seed = overrides.seed.or(mc.seed).unwrap_or(DEFAULT_SEED);
    let mode = overrides
        .mode
        .or(mc.mode)
        .map(ContentionMode::from)
        .unwrap_or(ContentionMode::ThinnedPpp);
    if let Some(side) = mc.window_side_m {
        if !(side.is_finite() && side > 0.0) {
            return Err(config_err("mc.window_side_m must be finite and > 0"));
        }
    }

    Ok(ExperimentSpec {
        scenario,
        experiment: file.experiment,
        sweep: file.sweep,
        drops,
        seed,
        mode,
        window_side_m: mc.window_side_m,
        compare_modes: mc.compare_modes.unwrap_or(false),
        stem: file.output.path.clone(),
        format: overrides
            .format
            .or(file.output.format)
            .unwrap_or(OutputFormat::Csv),
    })
}

fn check_ratio_sweep(sweep: &SweepSpec) -> Result<(), RunError> {
    if !(sweep.start > 0.0 && sweep.stop >= sweep.start && sweep.step > 0.0) {
        return Err(config_err(
            "density_ratio sweep needs 0 < start <= stop and step > 0",
        ));
    }
    Ok(())
}

/// Grid of a ratio sweep, inclusive of the stop within half a step.
pub fn ratio_grid(sweep: &SweepSpec) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let ratio = sweep.start + sweep.step * k as f64;
        if ratio > sweep.stop + 0.5 * sweep.step {
            break;
        }
        out.push(ratio);
        k += 1;
    }
    out
}
