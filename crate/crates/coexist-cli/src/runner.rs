//! Experiment execution: analytic evaluation, Monte Carlo runs (parallel
//! over fixed drop chunks, merged in chunk order for bit reproducibility),
//! figure-reproduction sweeps, and the density-ratio optimizer.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use coexist_core::analytic::{self, AnalyticReport};
use coexist_core::model::{validate, ValidConfig};
use coexist_core::montecarlo::{self, ContentionMode, McError, McReport, McSettings, WindowPolicy};
use coexist_core::optimizer;

use crate::config::{ExperimentKind, ExperimentSpec, OutputFormat, SweepSpec, SweepVariable};
use crate::output::{self, Cell, Table};

/// Runner failure, mapped onto the process exit codes: config errors exit 2,
/// numerical failures exit 3, output I/O failures exit 1.
#[derive(Debug, Clone)]
pub enum RunError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(msg) => write!(f, "config error: {msg}"),
            RunError::Numeric(msg) => write!(f, "numeric error: {msg}"),
            RunError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<McError> for RunError {
    fn from(e: McError) -> Self {
        RunError::Numeric(e.to_string())
    }
}

impl From<analytic::AnalyticError> for RunError {
    fn from(e: analytic::AnalyticError) -> Self {
        RunError::Numeric(e.to_string())
    }
}

impl From<optimizer::OptimizerError> for RunError {
    fn from(e: optimizer::OptimizerError) -> Self {
        RunError::Numeric(e.to_string())
    }
}

/// Paths written by a successful run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub csv: Option<PathBuf>,
    pub json: PathBuf,
}

/// Monte Carlo report with drop chunks evaluated in parallel. Chunks merge
/// in index order, so the result is bit-identical to the sequential runner.
pub fn par_report(cfg: &ValidConfig, settings: &McSettings) -> Result<McReport, McError> {
    let ctx = montecarlo::scenario_context(cfg, settings)?;
    let accumulators: Vec<_> = (0..ctx.num_chunks())
        .into_par_iter()
        .map(|chunk| montecarlo::run_chunk(&ctx, chunk))
        .collect();
    let mut total = montecarlo::DropAccumulator::new(ctx.rats());
    for acc in &accumulators {
        total.merge(acc);
    }
    Ok(McReport::from_accumulator(&ctx, &total))
}

/// Run a resolved experiment, writing `<stem>.csv` (unless the format is
/// json-only) and `<stem>.json` under `out_dir`.
pub fn execute(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunOutcome, RunError> {
    let (table, mut summary) = match spec.experiment {
        ExperimentKind::Analytic => run_analytic(spec)?,
        ExperimentKind::Simulate => run_simulate(spec)?,
        ExperimentKind::SweepM => run_sweep_m(spec)?,
        ExperimentKind::SweepRatio => run_sweep_ratio(spec)?,
        ExperimentKind::Optimize => run_optimize(spec)?,
        ExperimentKind::Throughput => run_throughput(spec)?,
    };

    std::fs::create_dir_all(out_dir)
        .map_err(|e| RunError::Io(format!("{}: {e}", out_dir.display())))?;
    let json_file = output::json_path(out_dir, &spec.stem);
    let csv_file = match spec.format {
        OutputFormat::Csv => {
            let path = output::csv_path(out_dir, &spec.stem);
            output::write_csv(&path, &table)?;
            if let Some(obj) = summary.as_object_mut() {
                obj.insert("csv".into(), json!(format!("{}.csv", spec.stem)));
            }
            Some(path)
        }
        OutputFormat::Json => None,
    };
    output::write_json(&json_file, &summary)?;
    Ok(RunOutcome {
        csv: csv_file,
        json: json_file,
    })
}

fn rat_ids(cfg: &ValidConfig) -> Vec<String> {
    cfg.rats.iter().map(|r| r.id.0.clone()).collect()
}

fn run_metadata(spec: &ExperimentSpec) -> serde_json::Value {
    let window = montecarlo::resolve_window(&spec.scenario, &window_policy(spec));
    json!({
        "experiment": spec.experiment.as_str(),
        "drops": spec.drops,
        "seed": spec.seed,
        "mode": spec.mode.to_string(),
        "window_side_m": window.width,
    })
}

fn window_policy(spec: &ExperimentSpec) -> WindowPolicy {
    match spec.window_side_m {
        Some(side) => WindowPolicy::Fixed(coexist_core::geometry::Window::square(side)),
        None => WindowPolicy::Auto,
    }
}

/// Candidate scenario with the second RAT's density set to `ratio` times the
/// first's.
fn with_ratio(cfg: &ValidConfig, ratio: f64) -> ValidConfig {
    let mut raw = cfg.as_config().clone();
    raw.rats[1].density = ratio * raw.rats[0].density;
    validate(raw).expect("positive density keeps config valid")
}

/// Window shared by every point of a ratio sweep: resolved once at the
/// sweep's minimum density so common random numbers stay coupled.
fn sweep_ratio_window(spec: &ExperimentSpec, grid: &[f64]) -> WindowPolicy {
    if spec.window_side_m.is_some() {
        return window_policy(spec);
    }
    let min_ratio = grid.first().copied().unwrap_or(1.0);
    let probe = with_ratio(&spec.scenario, min_ratio);
    WindowPolicy::Fixed(montecarlo::auto_window(&probe))
}

fn mc_settings_with_window(spec: &ExperimentSpec, drops: u64, window: WindowPolicy) -> McSettings {
    let mut settings = McSettings::new(drops, spec.seed, spec.mode);
    settings.window = window;
    settings
}

// -- analytic ------------------------------------------------------------

fn analytic_header(ids: &[String]) -> Vec<String> {
    let mut header = vec!["m".to_string(), "alpha".to_string()];
    for id in ids {
        header.push(format!("lambda_{id}_per_m2"));
    }
    for id in ids {
        header.push(format!("eta_{id}"));
    }
    for id in ids {
        header.push(format!("rho_{id}"));
    }
    header.push("rho_ce".into());
    header.push("c_ce_bps_hz_channel".into());
    header
}

fn analytic_row(cfg: &ValidConfig, report: &AnalyticReport) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![(cfg.channels as u64).into(), cfg.alpha.into()];
    for rat in &cfg.rats {
        row.push(rat.density.into());
    }
    for eta in &report.eta {
        row.push((*eta).into());
    }
    for rho in &report.rho {
        row.push((*rho).into());
    }
    row.push(report.rho_ce.into());
    row.push(report.c_ce.into());
    row
}

fn per_rat_map(ids: &[String], values: &[f64]) -> serde_json::Map<String, serde_json::Value> {
    ids.iter()
        .zip(values)
        .map(|(id, v)| (id.clone(), json!(v)))
        .collect()
}

fn analytic_summary(cfg: &ValidConfig, report: &AnalyticReport) -> serde_json::Value {
    let ids = rat_ids(cfg);
    json!({
        "eta": per_rat_map(&ids, &report.eta),
        "rho": per_rat_map(&ids, &report.rho),
        "rho_ce": report.rho_ce,
        "c_ce_bps_hz_channel": report.c_ce,
    })
}

fn run_analytic(spec: &ExperimentSpec) -> Result<(Table, serde_json::Value), RunError> {
    let cfg = &spec.scenario;
    let report = AnalyticReport::compute(cfg)?;
    let mut table = Table::new(analytic_header(&rat_ids(cfg)));
    table.push_row(analytic_row(cfg, &report));
    let summary = json!({
        "experiment": spec.experiment.as_str(),
        "analytic": analytic_summary(cfg, &report),
    });
    Ok((table, summary))
}

// -- simulate --------------------------------------------------------------

fn mc_summary(ids: &[String], report: &McReport) -> serde_json::Value {
    json!({
        "rho": ids
            .iter()
            .zip(&report.rho)
            .map(|(id, est)| (id.clone(), json!({"mean": est.mean, "ci": est.ci_half_width})))
            .collect::<serde_json::Map<_, _>>(),
        "rho_ce": {"mean": report.rho_ce.mean, "ci": report.rho_ce.ci_half_width},
        "c_ce_bps_hz_channel": {"mean": report.throughput.mean, "ci": report.throughput.ci_half_width},
        "no_serving_drops": report.no_serving,
    })
}

fn run_simulate(spec: &ExperimentSpec) -> Result<(Table, serde_json::Value), RunError> {
    let cfg = &spec.scenario;
    let ids = rat_ids(cfg);
    let analytic_report = AnalyticReport::compute(cfg)?;
    let settings = mc_settings_with_window(spec, spec.drops, window_policy(spec));
    let mc = par_report(cfg, &settings)?;

    let mut header = analytic_header(&ids);
    // analytic columns keep their plain names; MC columns are suffixed
    for h in header.iter_mut() {
        if h.starts_with("rho_") || h.starts_with("c_ce") {
            h.push_str("_analytic");
        }
    }
    for id in &ids {
        header.push(format!("rho_{id}_mc"));
        header.push(format!("rho_{id}_mc_ci"));
    }
    header.push("rho_ce_mc".into());
    header.push("rho_ce_mc_ci".into());
    header.push("c_ce_mc_bps_hz_channel".into());
    header.push("c_ce_mc_ci".into());
    header.push("drops".into());
    header.push("seed".into());
    header.push("mode".into());

    let compare = if spec.compare_modes {
        for id in &ids {
            header.push(format!("rho_{id}_mc_other_mode"));
        }
        header.push("rho_ce_mc_other_mode".into());
        header.push("rho_ce_mode_gap".into());
        let other = match spec.mode {
            ContentionMode::ThinnedPpp => ContentionMode::MaternCsma,
            ContentionMode::MaternCsma => ContentionMode::ThinnedPpp,
        };
        let mut other_settings = settings.clone();
        other_settings.mode = other;
        Some((other, par_report(cfg, &other_settings)?))
    } else {
        None
    };

    let mut row = analytic_row(cfg, &analytic_report);
    for est in &mc.rho {
        row.push(est.mean.into());
        row.push(est.ci_half_width.into());
    }
    row.push(mc.rho_ce.mean.into());
    row.push(mc.rho_ce.ci_half_width.into());
    row.push(mc.throughput.mean.into());
    row.push(mc.throughput.ci_half_width.into());
    row.push(spec.drops.into());
    row.push(spec.seed.into());
    row.push(Cell::Text(spec.mode.to_string()));

    let mut summary = json!({
        "experiment": spec.experiment.as_str(),
        "run": run_metadata(spec),
        "analytic": analytic_summary(cfg, &analytic_report),
        "mc": mc_summary(&ids, &mc),
    });
    if let Some((other_mode, other)) = &compare {
        for est in &other.rho {
            row.push(est.mean.into());
        }
        row.push(other.rho_ce.mean.into());
        row.push((other.rho_ce.mean - mc.rho_ce.mean).into());
        summary.as_object_mut().unwrap().insert(
            "mode_comparison".into(),
            json!({
                "other_mode": other_mode.to_string(),
                "mc": mc_summary(&ids, other),
                "rho_ce_gap": other.rho_ce.mean - mc.rho_ce.mean,
            }),
        );
    }

    let mut table = Table::new(header);
    table.push_row(row);
    Ok((table, summary))
}

// -- sweep-m --------------------------------------------------------------

fn run_sweep_m(spec: &ExperimentSpec) -> Result<(Table, serde_json::Value), RunError> {
    let sweep = spec.sweep.as_ref().expect("validated");
    let cfg = &spec.scenario;
    let ids = rat_ids(cfg);
    let m_values: Vec<u32> = (sweep.start as u32..=sweep.stop as u32).collect();

    // window depends only on densities, so every m shares it automatically;
    // resolve once anyway so a fixed override also applies everywhere
    let window = window_policy(spec);

    let mut header = vec!["m".to_string()];
    for id in &ids {
        header.push(format!("eta_{id}"));
    }
    for id in &ids {
        header.push(format!("rho_{id}_analytic"));
    }
    header.push("rho_ce_analytic".into());
    for id in &ids {
        header.push(format!("rho_{id}_mc"));
        header.push(format!("rho_{id}_mc_ci"));
    }
    header.push("rho_ce_mc".into());
    header.push("rho_ce_mc_ci".into());
    let mut table = Table::new(header);

    let mut analytic_curve = Vec::new();
    let mut mc_curve = Vec::new();
    let mut mc_ci = Vec::new();
    for &m in &m_values {
        let mut raw = cfg.as_config().clone();
        raw.channels = m;
        let candidate = validate(raw).expect("m >= 1 keeps config valid");
        let report = AnalyticReport::compute(&candidate)?;
        let settings = mc_settings_with_window(spec, spec.drops, window);
        let mc = par_report(&candidate, &settings)?;

        let mut row: Vec<Cell> = vec![(m as u64).into()];
        for eta in &report.eta {
            row.push((*eta).into());
        }
        for rho in &report.rho {
            row.push((*rho).into());
        }
        row.push(report.rho_ce.into());
        for est in &mc.rho {
            row.push(est.mean.into());
            row.push(est.ci_half_width.into());
        }
        row.push(mc.rho_ce.mean.into());
        row.push(mc.rho_ce.ci_half_width.into());
        table.push_row(row);

        analytic_curve.push(report.rho_ce);
        mc_curve.push(mc.rho_ce.mean);
        mc_ci.push(mc.rho_ce.ci_half_width);
    }

    let summary = json!({
        "experiment": spec.experiment.as_str(),
        "run": run_metadata(spec),
        "m": m_values,
        "rho_ce_analytic": analytic_curve,
        "rho_ce_mc": mc_curve,
        "analytic_monotone": is_increasing(&analytic_curve),
        "analytic_concave": is_concave(&analytic_curve),
        "mc_monotone": is_increasing(&mc_curve),
        "mc_concave": is_concave(&mc_curve),
        "mc_monotone_within_ci": is_increasing_within_ci(&mc_curve, &mc_ci),
        "mc_concave_within_ci": is_concave_within_ci(&mc_curve, &mc_ci),
    });
    Ok((table, summary))
}

fn is_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

fn is_concave(values: &[f64]) -> bool {
    values.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] < 0.0)
}

/// Shape checks allowing the 95% estimation error of each point (the
/// intervals are treated as independent, which over-allows slightly since
/// shared drop streams correlate neighbouring points positively).
fn is_increasing_within_ci(values: &[f64], ci: &[f64]) -> bool {
    (0..values.len().saturating_sub(1)).all(|i| {
        let allowance = (ci[i] * ci[i] + ci[i + 1] * ci[i + 1]).sqrt();
        values[i + 1] - values[i] > -allowance
    })
}

fn is_concave_within_ci(values: &[f64], ci: &[f64]) -> bool {
    (0..values.len().saturating_sub(2)).all(|i| {
        let allowance =
            (ci[i] * ci[i] + 4.0 * ci[i + 1] * ci[i + 1] + ci[i + 2] * ci[i + 2]).sqrt();
        values[i + 2] - 2.0 * values[i + 1] + values[i] < allowance
    })
}

// -- sweep-ratio -----------------------------------------------------------

fn run_sweep_ratio(spec: &ExperimentSpec) -> Result<(Table, serde_json::Value), RunError> {
    let sweep = spec.sweep.as_ref().expect("validated");
    let cfg = &spec.scenario;
    let ids = rat_ids(cfg);
    let grid = crate::config::ratio_grid(sweep);
    let window = sweep_ratio_window(spec, &grid);

    let mut table = Table::new(vec![
        "density_ratio".into(),
        format!("lambda_{}_per_m2", ids[1]),
        format!("eta_{}", ids[0]),
        format!("eta_{}", ids[1]),
        "rho_ce_analytic".into(),
        "rho_ce_mc".into(),
        "rho_ce_mc_ci".into(),
    ]);

    let mut analytic_curve = Vec::new();
    let mut mc_curve = Vec::new();
    for &ratio in &grid {
        let candidate = with_ratio(cfg, ratio);
        let etas = analytic::transmit_probabilities(&candidate);
        let rho_ce = analytic::coexisting_success_probability(&candidate)?;
        let settings = mc_settings_with_window(spec, spec.drops, window);
        let mc = par_report(&candidate, &settings)?;
        table.push_row(vec![
            ratio.into(),
            candidate.rats[1].density.into(),
            etas[0].into(),
            etas[1].into(),
            rho_ce.into(),
            mc.rho_ce.mean.into(),
            mc.rho_ce.ci_half_width.into(),
        ]);
        analytic_curve.push(rho_ce);
        mc_curve.push(mc.rho_ce.mean);
    }

    let argmax = |curve: &[f64]| -> (f64, f64) {
        let (i, v) = curve
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
            .expect("non-empty grid");
        (grid[i], *v)
    };
    let (analytic_star, analytic_value) = argmax(&analytic_curve);
    let (mc_star, mc_value) = argmax(&mc_curve);
    let fixed_point = optimizer::solve_lambda_ratio(cfg)?;

    let summary = json!({
        "experiment": spec.experiment.as_str(),
        "run": run_metadata(spec),
        "grid_step": sweep.step,
        "analytic_argmax_ratio": analytic_star,
        "analytic_argmax_rho_ce": analytic_value,
        "mc_argmax_ratio": mc_star,
        "mc_argmax_rho_ce": mc_value,
        "fixed_point_lambda_ratio": fixed_point.lambda_ratio,
        "weighted_ratio_target": fixed_point.weighted_target,
        "closed_vs_sweep_abs_diff": (fixed_point.lambda_ratio - analytic_star).abs(),
    });
    Ok((table, summary))
}

// -- optimize ---------------------------------------------------------------

fn run_optimize(spec: &ExperimentSpec) -> Result<(Table, serde_json::Value), RunError> {
    let cfg = &spec.scenario;
    let ids = rat_ids(cfg);

    let default_sweep = SweepSpec {
        variable: SweepVariable::DensityRatio,
        start: 0.5,
        stop: 4.0,
        step: 0.05,
    };
    let sweep = spec.sweep.unwrap_or(default_sweep);
    let result = optimizer::optimize(cfg, sweep.start, sweep.stop, sweep.step)?;
    let check = &result.constraint;

    let mut table = Table::new(vec![
        "feasible".into(),
        "constraint_margin".into(),
        format!("c_{}", ids[0]),
        format!("c_{}", ids[1]),
        "constraint_rhs".into(),
        "weighted_ratio_star".into(),
        "lambda_ratio_star".into(),
        "rho_ce_at_star".into(),
        "sweep_argmax_ratio".into(),
        "sweep_argmax_rho_ce".into(),
        "closed_vs_sweep_abs_diff".into(),
        "sweep_step".into(),
        "method".into(),
    ]);

    let nan = |v: Option<f64>| Cell::Float(v.unwrap_or(f64::NAN));
    let best = result.sweep_argmax;
    let diff = result
        .lambda_ratio_star
        .zip(best)
        .map(|(star, best)| (star - best.ratio).abs());
    table.push_row(vec![
        Cell::Bool(result.feasible),
        check.margin.into(),
        check.c[0].into(),
        check.c[1].into(),
        check.threshold.into(),
        nan(result.weighted_ratio_star),
        nan(result.lambda_ratio_star),
        nan(result.rho_ce_at_star),
        nan(best.map(|b| b.ratio)),
        nan(best.map(|b| b.rho_ce)),
        nan(diff),
        sweep.step.into(),
        Cell::Text(
            result
                .method
                .map(|m| m.to_string())
                .unwrap_or_else(|| "none".into()),
        ),
    ]);

    let mut summary = json!({
        "experiment": spec.experiment.as_str(),
        "feasible": result.feasible,
        "constraint_margin": check.margin,
        "c": {ids[0].clone(): check.c[0], ids[1].clone(): check.c[1]},
        "constraint_rhs": check.threshold,
    });
    if result.feasible {
        let obj = summary.as_object_mut().unwrap();
        obj.insert(
            "weighted_ratio_star".into(),
            json!(result.weighted_ratio_star),
        );
        obj.insert("lambda_ratio_star".into(), json!(result.lambda_ratio_star));
        obj.insert("rho_ce_at_star".into(), json!(result.rho_ce_at_star));
        obj.insert("sweep_argmax_ratio".into(), json!(best.map(|b| b.ratio)));
        obj.insert("sweep_argmax_rho_ce".into(), json!(best.map(|b| b.rho_ce)));
        obj.insert("closed_vs_sweep_abs_diff".into(), json!(diff));
        obj.insert("sweep_step".into(), json!(sweep.step));
        obj.insert("method".into(), json!(result.method.map(|m| m.to_string())));
    }
    Ok((table, summary))
}

// -- throughput --------------------------------------------------------------

/// Single-RAT scenario of the second RAT (the incumbent-only baseline).
fn baseline_config(cfg: &ValidConfig) -> ValidConfig {
    let mut raw = cfg.as_config().clone();
    let incumbent = raw.rats.pop().expect("two rats");
    raw.rats = vec![incumbent];
    validate(raw).expect("still valid")
}

fn run_throughput(spec: &ExperimentSpec) -> Result<(Table, serde_json::Value), RunError> {
    let cfg = &spec.scenario;
    let ids = rat_ids(cfg);

    // baseline: unlicensed band accessed by the incumbent RAT alone
    let baseline = (cfg.rats.len() == 2).then(|| baseline_config(cfg));
    let baseline_values = match &baseline {
        Some(base) => {
            let analytic_value = analytic::coexisting_throughput(base)?;
            let settings = mc_settings_with_window(spec, spec.drops, window_policy(spec));
            let mc = par_report(base, &settings)?;
            Some((analytic_value, mc.throughput))
        }
        None => None,
    };

    let mut header = vec!["density_ratio".to_string()];
    for id in &ids {
        header.push(format!("c_{id}_analytic_bps_hz_channel"));
    }
    header.push("c_ce_analytic_bps_hz_channel".into());
    header.push("c_ce_mc_bps_hz_channel".into());
    header.push("c_ce_mc_ci".into());
    if baseline_values.is_some() {
        header.push("gain_pct_analytic".into());
        header.push("gain_pct_mc".into());
    }
    let mut table = Table::new(header);

    let grid: Vec<f64> = match &spec.sweep {
        Some(sweep) => crate::config::ratio_grid(sweep),
        None => vec![if cfg.rats.len() == 2 {
            cfg.rats[1].density / cfg.rats[0].density
        } else {
            1.0
        }],
    };
    let window = match &spec.sweep {
        Some(_) => sweep_ratio_window(spec, &grid),
        None => window_policy(spec),
    };

    let mut analytic_curve = Vec::new();
    let mut mc_curve = Vec::new();
    for &ratio in &grid {
        let candidate = if cfg.rats.len() == 2 {
            with_ratio(cfg, ratio)
        } else {
            cfg.clone()
        };
        let parts = analytic::coexisting_throughput_parts(&candidate)?;
        let c_analytic: f64 = parts.iter().sum();
        let settings = mc_settings_with_window(spec, spec.drops, window);
        let mc = par_report(&candidate, &settings)?;

        let mut row: Vec<Cell> = vec![ratio.into()];
        for part in &parts {
            row.push((*part).into());
        }
        row.push(c_analytic.into());
        row.push(mc.throughput.mean.into());
        row.push(mc.throughput.ci_half_width.into());
        if let Some((base_analytic, base_mc)) = &baseline_values {
            row.push((100.0 * (c_analytic / base_analytic - 1.0)).into());
            row.push((100.0 * (mc.throughput.mean / base_mc.mean - 1.0)).into());
        }
        table.push_row(row);
        analytic_curve.push(c_analytic);
        mc_curve.push(mc.throughput.mean);
    }

    let mut summary = json!({
        "experiment": spec.experiment.as_str(),
        "run": run_metadata(spec),
        "density_ratio": grid,
        "c_ce_analytic": analytic_curve,
        "c_ce_mc": mc_curve,
    });
    if let Some((base_analytic, base_mc)) = &baseline_values {
        let argmax = |curve: &[f64]| {
            curve
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
                .map(|(i, v)| (grid[i], *v))
                .expect("non-empty grid")
        };
        let (a_star, a_val) = argmax(&analytic_curve);
        let (m_star, m_val) = argmax(&mc_curve);
        summary.as_object_mut().unwrap().insert(
            "baseline".into(),
            json!({
                "rat": ids[1].clone(),
                "analytic_bps_hz_channel": base_analytic,
                "mc_bps_hz_channel": base_mc.mean,
                "mc_ci": base_mc.ci_half_width,
            }),
        );
        summary.as_object_mut().unwrap().insert(
            "peak".into(),
            json!({
                "analytic_ratio": a_star,
                "analytic_gain_pct": 100.0 * (a_val / base_analytic - 1.0),
                "mc_ratio": m_star,
                "mc_gain_pct": 100.0 * (m_val / base_mc.mean - 1.0),
            }),
        );
    }
    Ok((table, summary))
}
