//! Density-ratio optimization of the coexisting success probability for
//! two-RAT scenarios: the feasibility constraint, the closed-form optimal
//! weighted ratio, the coupled fixed point recovering the raw density ratio,
//! plus sweep and concavity verification utilities.

use alloc::vec::Vec;
use core::fmt;

use crate::analytic::{self, AnalyticError, AnalyticIntermediates};
use crate::model::{validate, ValidConfig};
use crate::numeric;

#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerError {
    /// Operation defined for exactly two RATs.
    NotTwoRat {
        got: usize,
    },
    /// The feasibility inequality does not hold; no interior optimum exists.
    InfeasibleConstraint {
        margin: f64,
    },
    /// Bisection bracket carries no sign change.
    NoRootInBracket,
    /// The weighted-ratio objective is not monotone on the bracket.
    NonMonotoneObjective,
    /// The coexisting success probability violated monotonicity/concavity in
    /// m — a formula regression, not a data condition.
    ConcavityViolation {
        m: u32,
    },
    /// Concavity verification needs m_max >= 3.
    RangeTooSmall {
        m_max: u32,
    },
    Analytic(AnalyticError),
}

impl fmt::Display for OptimizerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimizerError::NotTwoRat { got } => {
                write!(f, "operation needs exactly 2 rats, config has {got}")
            }
            OptimizerError::InfeasibleConstraint { margin } => {
                write!(f, "feasibility constraint violated (margin {margin:.6e})")
            }
            OptimizerError::NoRootInBracket => f.write_str("no root in the density bracket"),
            OptimizerError::NonMonotoneObjective => {
                f.write_str("weighted-ratio objective is not monotone on the bracket")
            }
            OptimizerError::ConcavityViolation { m } => {
                write!(f, "coexisting success probability not concave at m={m}")
            }
            OptimizerError::RangeTooSmall { m_max } => {
                write!(f, "concavity check needs m_max >= 3, got {m_max}")
            }
            OptimizerError::Analytic(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for OptimizerError {}

impl From<AnalyticError> for OptimizerError {
    fn from(e: AnalyticError) -> Self {
        OptimizerError::Analytic(e)
    }
}

fn require_two_rats(cfg: &ValidConfig) -> Result<(), OptimizerError> {
    if cfg.rats.len() == 2 {
        Ok(())
    } else {
        Err(OptimizerError::NotTwoRat {
            got: cfg.rats.len(),
        })
    }
}

/// Outcome of the feasibility inequality
/// min{c_0, c_1} > (θ_0 θ_1)^(1/α) τ_α / m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintCheck {
    pub feasible: bool,
    /// min{c_0, c_1} - (θ_0 θ_1)^(1/α) τ_α / m; positive iff feasible.
    pub margin: f64,
    pub c: [f64; 2],
    /// The right-hand side (θ_0 θ_1)^(1/α) τ_α / m.
    pub threshold: f64,
}

/// Evaluate the feasibility constraint for a two-RAT scenario.
pub fn check_constraint(cfg: &ValidConfig) -> Result<ConstraintCheck, OptimizerError> {
    require_two_rats(cfg)?;
    let im = AnalyticIntermediates::compute(cfg)?;
    let thetas = (cfg.rats[0].sir_threshold, cfg.rats[1].sir_threshold);
    let threshold =
        libm::pow(thetas.0 * thetas.1, 1.0 / cfg.alpha) * im.tau_alpha / cfg.channels as f64;
    let min_c = im.c[0].min(im.c[1]);
    let margin = min_c - threshold;
    Ok(ConstraintCheck {
        feasible: margin > 0.0,
        margin,
        c: [im.c[0], im.c[1]],
        threshold,
    })
}

/// Closed-form optimal weighted density ratio (η_0 λ_0 / η_1 λ_1)*.
///
/// Reduces to (P_1/P_0)^(2/α) when both thresholds coincide.
pub fn optimal_weighted_ratio(cfg: &ValidConfig) -> Result<f64, OptimizerError> {
    let check = check_constraint(cfg)?;
    if !check.feasible {
        return Err(OptimizerError::InfeasibleConstraint {
            margin: check.margin,
        });
    }
    let im = AnalyticIntermediates::compute(cfg)?;
    let m = cfg.channels as f64;
    let (a, b) = (&cfg.rats[0], &cfg.rats[1]);
    let k = im.tau_alpha * libm::pow(a.sir_threshold * b.sir_threshold, 1.0 / cfg.alpha);
    let prefactor = libm::pow(
        libm::sqrt(a.sir_threshold) * b.power / (libm::sqrt(b.sir_threshold) * a.power),
        2.0 / cfg.alpha,
    );
    Ok(prefactor * (m * im.c[1] - k) / (m * im.c[0] - k))
}

/// Solution of the coupled fixed point for the raw density ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaRatioSolution {
    /// Optimal λ_1/λ_0 with λ_0 held fixed.
    pub lambda_ratio: f64,
    /// The closed-form target (η_0 λ_0 / η_1 λ_1)* it satisfies.
    pub weighted_target: f64,
    pub iterations: u32,
}

/// Solve for the second RAT's density such that the η-weighted ratio hits the
/// closed-form optimum, treating both η as functions of the total density.
///
/// Bisection over λ_1 ∈ [1e-3 λ_0, 1e3 λ_0] to relative tolerance 1e-6,
/// after numerically verifying the objective is monotone on the bracket.
pub fn solve_lambda_ratio(cfg: &ValidConfig) -> Result<LambdaRatioSolution, OptimizerError> {
    solve_lambda_ratio_with(cfg, |candidate| {
        let etas = analytic::transmit_probabilities(candidate);
        (etas[0], etas[1])
    })
}

/// [`solve_lambda_ratio`] with a caller-supplied η evaluator (test hook for
/// disabling the contention coupling).
pub fn solve_lambda_ratio_with<F>(
    cfg: &ValidConfig,
    eta_fn: F,
) -> Result<LambdaRatioSolution, OptimizerError>
where
    F: Fn(&ValidConfig) -> (f64, f64),
{
    require_two_rats(cfg)?;
    let target = optimal_weighted_ratio(cfg)?;
    let lambda_0 = cfg.rats[0].density;

    let weighted_ratio = |lambda_1: f64| -> f64 {
        let mut raw = cfg.as_config().clone();
        raw.rats[1].density = lambda_1;
        let candidate = validate(raw).expect("positive density keeps config valid");
        let (eta_0, eta_1) = eta_fn(&candidate);
        (eta_0 * lambda_0) / (eta_1 * lambda_1)
    };

    let lo = 1e-3 * lambda_0;
    let hi = 1e3 * lambda_0;

    // the objective must fall monotonically across the bracket before a
    // bisection on (objective - target) is meaningful
    let probes = 25;
    let log_lo = libm::log(lo);
    let step = (libm::log(hi) - log_lo) / (probes - 1) as f64;
    let mut last = f64::INFINITY;
    for i in 0..probes {
        let x = libm::exp(log_lo + step * i as f64);
        let value = weighted_ratio(x);
        // NaN compares as non-decreasing and is rejected here too
        if value.partial_cmp(&last) != Some(core::cmp::Ordering::Less) {
            return Err(OptimizerError::NonMonotoneObjective);
        }
        last = value;
    }

    let root = numeric::bisect(|x| weighted_ratio(x) - target, lo, hi, 1e-6)
        .map_err(|numeric::NoRootInBracket| OptimizerError::NoRootInBracket)?;
    Ok(LambdaRatioSolution {
        lambda_ratio: root.x / lambda_0,
        weighted_target: target,
        iterations: root.iterations,
    })
}

/// One grid point of an analytic density-ratio sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSweepPoint {
    /// λ_1/λ_0.
    pub ratio: f64,
    pub rho_ce: f64,
}

/// Evaluate the analytic coexisting success probability over a λ_1/λ_0 grid
/// (λ_0 fixed), start..=stop inclusive with the given step.
pub fn sweep_density_ratio(
    cfg: &ValidConfig,
    start: f64,
    stop: f64,
    step: f64,
) -> Result<Vec<RatioSweepPoint>, OptimizerError> {
    require_two_rats(cfg)?;
    let mut points = Vec::new();
    let mut k = 0u32;
    loop {
        let ratio = start + step * k as f64;
        if ratio > stop + 0.5 * step {
            break;
        }
        let mut raw = cfg.as_config().clone();
        raw.rats[1].density = ratio * cfg.rats[0].density;
        let candidate = validate(raw).expect("positive density keeps config valid");
        let rho_ce = analytic::coexisting_success_probability(&candidate)?;
        points.push(RatioSweepPoint { ratio, rho_ce });
        k += 1;
    }
    Ok(points)
}

/// Grid point with the largest value.
pub fn sweep_argmax(points: &[RatioSweepPoint]) -> Option<RatioSweepPoint> {
    points
        .iter()
        .copied()
        .max_by(|a, b| a.rho_ce.partial_cmp(&b.rho_ce).expect("finite rho_ce"))
}

/// Which route produced the reported optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimumMethod {
    /// Closed-form weighted ratio resolved through the contention coupling.
    ClosedForm,
    /// Argmax of the analytic sweep (fallback when the fixed point fails).
    Sweep,
}

impl fmt::Display for OptimumMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimumMethod::ClosedForm => f.write_str("closed-form"),
            OptimumMethod::Sweep => f.write_str("sweep"),
        }
    }
}

/// Full outcome of the density-ratio optimization.
///
/// When `feasible` is false the starred fields are absent. When both the
/// closed form and the sweep run, the two optima agree within the sweep's
/// grid step.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityResult {
    pub feasible: bool,
    pub constraint: ConstraintCheck,
    /// Optimal weighted density ratio (η_0 λ_0 / η_1 λ_1)*.
    pub weighted_ratio_star: Option<f64>,
    /// Optimal raw ratio λ_1/λ_0 after resolving the contention coupling.
    pub lambda_ratio_star: Option<f64>,
    pub rho_ce_at_star: Option<f64>,
    /// Analytic sweep cross-check, when a sweep grid was evaluated.
    pub sweep_argmax: Option<RatioSweepPoint>,
    pub method: Option<OptimumMethod>,
}

/// Run the whole optimization: constraint check, closed-form weighted ratio,
/// the coupled fixed point, and an analytic sweep cross-check over
/// `[start, stop]` with `step`.
pub fn optimize(
    cfg: &ValidConfig,
    start: f64,
    stop: f64,
    step: f64,
) -> Result<OptimalityResult, OptimizerError> {
    let constraint = check_constraint(cfg)?;
    if !constraint.feasible {
        return Ok(OptimalityResult {
            feasible: false,
            constraint,
            weighted_ratio_star: None,
            lambda_ratio_star: None,
            rho_ce_at_star: None,
            sweep_argmax: None,
            method: None,
        });
    }
    let weighted = optimal_weighted_ratio(cfg)?;
    let points = sweep_density_ratio(cfg, start, stop, step)?;
    let best = sweep_argmax(&points);
    let (lambda_ratio, method) = match solve_lambda_ratio(cfg) {
        Ok(solution) => (solution.lambda_ratio, OptimumMethod::ClosedForm),
        Err(OptimizerError::NoRootInBracket | OptimizerError::NonMonotoneObjective) => match best {
            Some(point) => (point.ratio, OptimumMethod::Sweep),
            None => return Err(OptimizerError::NoRootInBracket),
        },
        Err(e) => return Err(e),
    };
    let mut raw = cfg.as_config().clone();
    raw.rats[1].density = lambda_ratio * cfg.rats[0].density;
    let candidate = validate(raw).expect("positive density keeps config valid");
    let rho_ce_at_star = analytic::coexisting_success_probability(&candidate)?;
    Ok(OptimalityResult {
        feasible: true,
        constraint,
        weighted_ratio_star: Some(weighted),
        lambda_ratio_star: Some(lambda_ratio),
        rho_ce_at_star: Some(rho_ce_at_star),
        sweep_argmax: best,
        method: Some(method),
    })
}

/// Difference tables of ρ_ce over m = 1..=m_max.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    pub m_values: Vec<u32>,
    pub rho_ce: Vec<f64>,
    /// ρ_ce(m+1) - ρ_ce(m); all positive when monotone increasing.
    pub first_differences: Vec<f64>,
    /// ρ_ce(m+2) - 2 ρ_ce(m+1) + ρ_ce(m); all negative when concave.
    pub second_differences: Vec<f64>,
}

/// Evaluate ρ_ce at m = 1..=m_max and assert positive first differences and
/// negative second differences.
pub fn verify_concavity_in_m(
    cfg: &ValidConfig,
    m_max: u32,
) -> Result<ConcavityReport, OptimizerError> {
    if m_max < 3 {
        return Err(OptimizerError::RangeTooSmall { m_max });
    }
    let mut rho_ce = Vec::with_capacity(m_max as usize);
    for m in 1..=m_max {
        let mut raw = cfg.as_config().clone();
        raw.channels = m;
        let candidate = validate(raw).expect("m >= 1 keeps config valid");
        rho_ce.push(analytic::coexisting_success_probability(&candidate)?);
    }
    let first: Vec<f64> = rho_ce.windows(2).map(|w| w[1] - w[0]).collect();
    let second: Vec<f64> = rho_ce
        .windows(3)
        .map(|w| w[2] - 2.0 * w[1] + w[0])
        .collect();
    for (i, d) in first.iter().enumerate() {
        if *d <= 0.0 {
            return Err(OptimizerError::ConcavityViolation { m: i as u32 + 1 });
        }
    }
    for (i, d) in second.iter().enumerate() {
        if *d >= 0.0 {
            return Err(OptimizerError::ConcavityViolation { m: i as u32 + 1 });
        }
    }
    Ok(ConcavityReport {
        m_values: (1..=m_max).collect(),
        rho_ce,
        first_differences: first,
        second_differences: second,
    })
}
