//! Drop-based Monte Carlo estimation of the success probabilities and the
//! coexisting throughput, with normal-approximation confidence intervals.
//!
//! Every random decision of drop `d` comes from a dedicated ChaCha stream
//! `d * STREAMS_PER_DROP + purpose`, so drops are independent, any subset can
//! be computed in isolation (parallel chunks merge in fixed index order for
//! bit reproducibility), and estimates at neighbouring sweep points share
//! their randomness: counts, positions, marks, contention coins and
//! interference gains stay aligned per point index, which keeps sweep curves
//! smooth in the common-random-number sense.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analytic::{self, AnalyticError};
use crate::geometry::{self, PointPattern, Vec2, Window};
use crate::model::ValidConfig;

/// How post-sampling channel contention is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContentionMode {
    /// Independent thinning with the closed-form η plus uniform channel
    /// assignment (the tractability assumption behind the closed forms).
    ThinnedPpp,
    /// Sequential Matérn hard-core contention in mark order; quantifies the
    /// thinning approximation.
    MaternCsma,
}

impl fmt::Display for ContentionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContentionMode::ThinnedPpp => f.write_str("thinned"),
            ContentionMode::MaternCsma => f.write_str("matern"),
        }
    }
}

/// Simulation window choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowPolicy {
    /// `max(1 km side, guard)` where the guard keeps the half-width at least
    /// max(5 x mean nearest-AP distance, 10/sqrt(pi lambda_min)) so edge
    /// truncation cannot bias the interference at the origin.
    Auto,
    Fixed(Window),
}

/// Monte Carlo run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct McSettings {
    pub drops: u64,
    pub seed: u64,
    pub mode: ContentionMode,
    pub window: WindowPolicy,
    /// Wrap distances around the window edges (default true).
    pub torus: bool,
    /// Force the thinning probabilities instead of computing them (test hook).
    pub eta_override: Option<Vec<f64>>,
}

impl McSettings {
    pub fn new(drops: u64, seed: u64, mode: ContentionMode) -> McSettings {
        McSettings {
            drops,
            seed,
            mode,
            window: WindowPolicy::Auto,
            torus: true,
            eta_override: None,
        }
    }
}

/// Estimation errors.
#[derive(Debug, Clone, PartialEq)]
pub enum McError {
    /// Expected AP count of one RAT inside the window is below one.
    DegenerateScenario {
        rat: usize,
        expected_count: f64,
    },
    /// The per-drop stream layout supports at most 8 RATs.
    TooManyRats {
        got: usize,
    },
    /// `eta_override` must hold one probability per RAT.
    BadEtaOverride,
    /// Estimates need at least one drop.
    ZeroDrops,
    Analytic(AnalyticError),
}

impl fmt::Display for McError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            McError::DegenerateScenario {
                rat,
                expected_count,
            } => write!(
                f,
                "rat {rat}: expected AP count in window is {expected_count:.3} (< 1)"
            ),
            McError::TooManyRats { got } => write!(f, "{got} rats exceed the supported 8"),
            McError::BadEtaOverride => {
                f.write_str("eta_override must hold one value in [0,1] per rat")
            }
            McError::ZeroDrops => f.write_str("drop count must be >= 1"),
            McError::Analytic(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for McError {}

impl From<AnalyticError> for McError {
    fn from(e: AnalyticError) -> Self {
        McError::Analytic(e)
    }
}

/// One Monte Carlo estimate with its 95% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// 1.96 x sample std / sqrt(drops); Bernoulli sample variance for
    /// probability estimates.
    pub ci_half_width: f64,
    pub drops: u64,
    pub seed: u64,
    pub mode: ContentionMode,
}

/// Everything measured at the typical user in one drop.
///
/// Conventions: a RAT with no transmitting AP records distance `None`,
/// `sir = 0` (hence failure, since θ > 0) and rate 0; a serving channel with
/// no interferer records `sir = +inf` (hence success) and rate 0 — both
/// events have vanishing probability at realistic densities but stay
/// deterministic and finite in the accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct DropRecord {
    pub serving_distance: Vec<Option<f64>>,
    pub serving_channel: Vec<Option<u32>>,
    /// Linear SIR per RAT; 0 without a serving AP.
    pub sir: Vec<f64>,
    /// `interference[user][source]`: received power sum from each source
    /// RAT on the user's serving channel, watts x m^-alpha.
    pub interference: Vec<Vec<f64>>,
    pub success: Vec<bool>,
    /// log2(1 + SIR) per RAT, 0 for the degenerate cases above.
    pub rate: Vec<f64>,
}

impl DropRecord {
    fn empty(rats: usize) -> DropRecord {
        DropRecord {
            serving_distance: alloc::vec![None; rats],
            serving_channel: alloc::vec![None; rats],
            sir: alloc::vec![0.0; rats],
            interference: alloc::vec![alloc::vec![0.0; rats]; rats],
            success: alloc::vec![false; rats],
            rate: alloc::vec![0.0; rats],
        }
    }

    fn reset(&mut self) {
        for v in &mut self.serving_distance {
            *v = None;
        }
        for v in &mut self.serving_channel {
            *v = None;
        }
        for v in &mut self.sir {
            *v = 0.0;
        }
        for row in &mut self.interference {
            for v in row {
                *v = 0.0;
            }
        }
        for v in &mut self.success {
            *v = false;
        }
        for v in &mut self.rate {
            *v = 0.0;
        }
    }
}

/// Associative per-drop tallies; merging in fixed chunk order keeps results
/// bit-identical regardless of how chunks were scheduled.
#[derive(Debug, Clone, PartialEq)]
pub struct DropAccumulator {
    pub drops: u64,
    pub success: Vec<u64>,
    pub no_serving: Vec<u64>,
    pub rho_ce_sum: f64,
    pub rho_ce_sumsq: f64,
    pub rate_sum: Vec<f64>,
    pub rate_sumsq: Vec<f64>,
    pub throughput_sum: f64,
    pub throughput_sumsq: f64,
}

impl DropAccumulator {
    pub fn new(rats: usize) -> DropAccumulator {
        DropAccumulator {
            drops: 0,
            success: alloc::vec![0; rats],
            no_serving: alloc::vec![0; rats],
            rho_ce_sum: 0.0,
            rho_ce_sumsq: 0.0,
            rate_sum: alloc::vec![0.0; rats],
            rate_sumsq: alloc::vec![0.0; rats],
            throughput_sum: 0.0,
            throughput_sumsq: 0.0,
        }
    }

    fn push(&mut self, record: &DropRecord, channels: f64) {
        let rats = self.success.len();
        self.drops += 1;
        let mut ok = 0u32;
        let mut rate_total = 0.0;
        for r in 0..rats {
            if record.success[r] {
                self.success[r] += 1;
                ok += 1;
            }
            if record.serving_distance[r].is_none() {
                self.no_serving[r] += 1;
            }
            let rate = record.rate[r];
            self.rate_sum[r] += rate;
            self.rate_sumsq[r] += rate * rate;
            rate_total += rate;
        }
        let rho_ce = ok as f64 / rats as f64;
        self.rho_ce_sum += rho_ce;
        self.rho_ce_sumsq += rho_ce * rho_ce;
        let c = rate_total / channels;
        self.throughput_sum += c;
        self.throughput_sumsq += c * c;
    }

    pub fn merge(&mut self, other: &DropAccumulator) {
        self.drops += other.drops;
        for (a, b) in self.success.iter_mut().zip(&other.success) {
            *a += b;
        }
        for (a, b) in self.no_serving.iter_mut().zip(&other.no_serving) {
            *a += b;
        }
        self.rho_ce_sum += other.rho_ce_sum;
        self.rho_ce_sumsq += other.rho_ce_sumsq;
        for (a, b) in self.rate_sum.iter_mut().zip(&other.rate_sum) {
            *a += b;
        }
        for (a, b) in self.rate_sumsq.iter_mut().zip(&other.rate_sumsq) {
            *a += b;
        }
        self.throughput_sum += other.throughput_sum;
        self.throughput_sumsq += other.throughput_sumsq;
    }
}

/// All Monte Carlo estimates of one run (shared drops).
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    /// Per-RAT success probability estimates, config order.
    pub rho: Vec<McEstimate>,
    pub rho_ce: McEstimate,
    /// Coexisting throughput, bps/Hz/channel.
    pub throughput: McEstimate,
    /// Per-RAT spectral-efficiency contributions (rate mean / m).
    pub throughput_parts: Vec<f64>,
    /// Drops in which the RAT had no transmitting AP.
    pub no_serving: Vec<u64>,
}

/// Per-drop stream purposes; a drop owns `STREAMS_PER_DROP` consecutive
/// ChaCha streams.
const STREAMS_PER_DROP: u64 = 128;
const PURPOSE_COUNT: u64 = 0; // + rat
const PURPOSE_ATTRS: u64 = 8; // + rat
const PURPOSE_CONTENTION: u64 = 16;
const PURPOSE_MATERN: u64 = 17;
const PURPOSE_SERVING_FADE: u64 = 24; // + rat
const PURPOSE_GAINS: u64 = 32; // + user_rat * 8 + source_rat
const MAX_RATS: usize = 8;

/// Fixed chunk length for associative accumulation.
pub const DROP_CHUNK: u64 = 4096;

/// Everything resolved once per run: η, window, per-RAT constants, and the
/// keyed RNG. Immutable; chunks of drops can be evaluated from it on any
/// thread.
#[derive(Debug, Clone)]
pub struct ScenarioContext {
    powers: Vec<f64>,
    thresholds: Vec<f64>,
    radii: Vec<f64>,
    mean_counts: Vec<f64>,
    etas: Vec<f64>,
    channels: u32,
    alpha: f64,
    fading: crate::model::FadingModel,
    window: Window,
    torus: bool,
    mode: ContentionMode,
    drops: u64,
    seed: u64,
    base: ChaCha8Rng,
}

/// The Auto window: side = max(1000 m, 2 x max(5 x mean nearest-AP distance,
/// 10/sqrt(pi lambda_min))), with lambda_min the sparsest RAT density.
pub fn auto_window(cfg: &ValidConfig) -> Window {
    let lambda_min = cfg
        .rats
        .iter()
        .map(|r| r.density)
        .fold(f64::INFINITY, f64::min);
    let mean_nn = 0.5 / libm::sqrt(lambda_min);
    let guard = 10.0 / libm::sqrt(PI * lambda_min);
    let half = (5.0 * mean_nn).max(guard);
    Window::square((2.0 * half).max(1000.0))
}

/// Resolve a window policy against a scenario.
pub fn resolve_window(cfg: &ValidConfig, policy: &WindowPolicy) -> Window {
    match policy {
        WindowPolicy::Auto => auto_window(cfg),
        WindowPolicy::Fixed(w) => *w,
    }
}

/// Build the run context, checking the scenario is simulable.
pub fn scenario_context(
    cfg: &ValidConfig,
    settings: &McSettings,
) -> Result<ScenarioContext, McError> {
    let rats = cfg.rats.len();
    if rats > MAX_RATS {
        return Err(McError::TooManyRats { got: rats });
    }
    if settings.drops == 0 {
        return Err(McError::ZeroDrops);
    }
    let etas = match &settings.eta_override {
        Some(etas) => {
            if etas.len() != rats || etas.iter().any(|e| !(0.0..=1.0).contains(e)) {
                return Err(McError::BadEtaOverride);
            }
            etas.clone()
        }
        None => analytic::transmit_probabilities(cfg),
    };
    let window = resolve_window(cfg, &settings.window);
    let area = window.area();
    let mean_counts: Vec<f64> = cfg.rats.iter().map(|r| r.density * area).collect();
    for (rat, &expected) in mean_counts.iter().enumerate() {
        if expected < 1.0 {
            return Err(McError::DegenerateScenario {
                rat,
                expected_count: expected,
            });
        }
    }
    Ok(ScenarioContext {
        powers: cfg.rats.iter().map(|r| r.power).collect(),
        thresholds: cfg.rats.iter().map(|r| r.sir_threshold).collect(),
        radii: cfg.rats.iter().map(|r| r.sense_radius).collect(),
        mean_counts,
        etas,
        channels: cfg.channels,
        alpha: cfg.alpha,
        fading: cfg.fading,
        window,
        torus: settings.torus,
        mode: settings.mode,
        drops: settings.drops,
        seed: settings.seed,
        base: ChaCha8Rng::seed_from_u64(settings.seed),
    })
}

impl ScenarioContext {
    pub fn drops(&self) -> u64 {
        self.drops
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> ContentionMode {
        self.mode
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn rats(&self) -> usize {
        self.powers.len()
    }

    pub fn num_chunks(&self) -> u64 {
        self.drops.div_ceil(DROP_CHUNK)
    }

    fn stream(&self, drop_index: u64, purpose: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(drop_index * STREAMS_PER_DROP + purpose);
        rng
    }

    /// d^(-alpha) from a squared distance.
    #[inline]
    fn path_gain(&self, d2: f64) -> f64 {
        if self.alpha == 4.0 {
            1.0 / (d2 * d2)
        } else {
            libm::pow(d2, -0.5 * self.alpha)
        }
    }
}

fn fill_drop(
    ctx: &ScenarioContext,
    drop_index: u64,
    pattern: &mut PointPattern,
    record: &mut DropRecord,
) {
    let rats = ctx.rats();
    record.reset();
    pattern.points.clear();
    pattern.window = ctx.window;
    pattern.torus = ctx.torus;

    // points grouped by rat so per-point draws stay index-aligned
    let mut offsets = [0usize; MAX_RATS + 1];
    for rat in 0..rats {
        let count = {
            let mut rng = ctx.stream(drop_index, PURPOSE_COUNT + rat as u64);
            geometry::sample_count(ctx.mean_counts[rat], 1.0, &mut rng)
        };
        let mut rng = ctx.stream(drop_index, PURPOSE_ATTRS + rat as u64);
        geometry::extend_positions(&mut pattern.points, count, ctx.window, rat, &mut rng);
        offsets[rat + 1] = pattern.points.len();
    }

    match ctx.mode {
        ContentionMode::ThinnedPpp => {
            let mut rng = ctx.stream(drop_index, PURPOSE_CONTENTION);
            geometry::contend_thinned_ppp(pattern, &ctx.etas, ctx.channels, &mut rng);
        }
        ContentionMode::MaternCsma => {
            let mut rng = ctx.stream(drop_index, PURPOSE_MATERN);
            geometry::contend_matern_csma(pattern, &ctx.radii, ctx.channels, &mut rng);
        }
    }

    for user in 0..rats {
        let Some((serving_idx, distance)) =
            geometry::nearest_transmitting(pattern, user, Vec2::ORIGIN)
        else {
            continue; // conventions: sir 0, failure, rate 0
        };
        let serving_channel = pattern.points[serving_idx]
            .channel
            .expect("transmitter has channel");
        record.serving_distance[user] = Some(distance);
        record.serving_channel[user] = Some(serving_channel.get());

        let h = {
            let mut rng = ctx.stream(drop_index, PURPOSE_SERVING_FADE + user as u64);
            ctx.fading.sample_gain(&mut rng)
        };
        let signal = h * ctx.powers[user] * ctx.path_gain(distance * distance);

        let mut total_interference = 0.0;
        for source in 0..rats {
            let mut gains = ctx.stream(
                drop_index,
                PURPOSE_GAINS + (user * MAX_RATS + source) as u64,
            );
            let mut sum = 0.0;
            let block = offsets[source]..offsets[source + 1];
            for (local, global) in block.clone().enumerate() {
                if global == serving_idx {
                    continue;
                }
                let p = &pattern.points[global];
                if !p.transmitting || p.channel != Some(serving_channel) {
                    continue;
                }
                // gains are addressed by point index so they stay aligned
                // across sweeps that change counts or channel membership
                gains.set_word_pos(2 * local as u128);
                let g = ctx.fading.sample_gain(&mut gains);
                let d2 = pattern.distance_sq(p.position, Vec2::ORIGIN);
                sum += ctx.powers[source] * g * ctx.path_gain(d2);
            }
            record.interference[user][source] = sum;
            total_interference += sum;
        }

        let sir = signal / total_interference; // +inf when no interferer
        record.sir[user] = sir;
        record.success[user] = sir >= ctx.thresholds[user];
        record.rate[user] = if sir.is_finite() {
            libm::log2(1.0 + sir)
        } else {
            0.0
        };
    }
}

/// Evaluate one drop in isolation.
pub fn run_drop(ctx: &ScenarioContext, drop_index: u64) -> DropRecord {
    let mut record = DropRecord::empty(ctx.rats());
    let mut pattern = PointPattern::new(ctx.window, ctx.torus);
    fill_drop(ctx, drop_index, &mut pattern, &mut record);
    record
}

/// Accumulate one chunk of drops: indices
/// `[chunk * DROP_CHUNK, min((chunk+1) * DROP_CHUNK, drops))`.
pub fn run_chunk(ctx: &ScenarioContext, chunk: u64) -> DropAccumulator {
    let start = chunk * DROP_CHUNK;
    let end = ((chunk + 1) * DROP_CHUNK).min(ctx.drops);
    let mut acc = DropAccumulator::new(ctx.rats());
    let mut record = DropRecord::empty(ctx.rats());
    let mut pattern = PointPattern::new(ctx.window, ctx.torus);
    let channels = ctx.channels as f64;
    for drop_index in start..end {
        fill_drop(ctx, drop_index, &mut pattern, &mut record);
        acc.push(&record, channels);
    }
    acc
}

/// Run every chunk sequentially and merge in chunk order. A parallel driver
/// that merges the same chunks in the same order produces identical bits.
pub fn run_drops(ctx: &ScenarioContext) -> DropAccumulator {
    let mut acc = DropAccumulator::new(ctx.rats());
    for chunk in 0..ctx.num_chunks() {
        acc.merge(&run_chunk(ctx, chunk));
    }
    acc
}

fn estimate(ctx: &ScenarioContext, mean: f64, variance: f64) -> McEstimate {
    let n = ctx.drops as f64;
    McEstimate {
        mean,
        ci_half_width: 1.96 * libm::sqrt(variance.max(0.0) / n),
        drops: ctx.drops,
        seed: ctx.seed,
        mode: ctx.mode,
    }
}

impl McReport {
    /// Project all estimates out of an accumulator.
    pub fn from_accumulator(ctx: &ScenarioContext, acc: &DropAccumulator) -> McReport {
        let n = acc.drops as f64;
        let rho: Vec<McEstimate> = acc
            .success
            .iter()
            .map(|&count| {
                let p = count as f64 / n;
                estimate(ctx, p, p * (1.0 - p))
            })
            .collect();
        let rho_ce_mean = acc.rho_ce_sum / n;
        let rho_ce = estimate(
            ctx,
            rho_ce_mean,
            acc.rho_ce_sumsq / n - rho_ce_mean * rho_ce_mean,
        );
        let c_mean = acc.throughput_sum / n;
        let throughput = estimate(ctx, c_mean, acc.throughput_sumsq / n - c_mean * c_mean);
        let m = ctx.channels as f64;
        let throughput_parts = acc.rate_sum.iter().map(|s| s / n / m).collect();
        McReport {
            rho,
            rho_ce,
            throughput,
            throughput_parts,
            no_serving: acc.no_serving.clone(),
        }
    }
}

/// Run the full report (shared drops for every estimate), sequentially.
pub fn run_report(cfg: &ValidConfig, settings: &McSettings) -> Result<McReport, McError> {
    let ctx = scenario_context(cfg, settings)?;
    let acc = run_drops(&ctx);
    Ok(McReport::from_accumulator(&ctx, &acc))
}

/// Monte Carlo estimate of one RAT's success probability.
pub fn estimate_success(
    cfg: &ValidConfig,
    rat: usize,
    settings: &McSettings,
) -> Result<McEstimate, McError> {
    Ok(run_report(cfg, settings)?.rho[rat])
}

/// Monte Carlo estimate of the coexisting success probability (per-drop mean
/// of the per-RAT success indicators).
pub fn estimate_coexisting_success(
    cfg: &ValidConfig,
    settings: &McSettings,
) -> Result<McEstimate, McError> {
    Ok(run_report(cfg, settings)?.rho_ce)
}

/// Monte Carlo estimate of the coexisting throughput, bps/Hz/channel.
pub fn estimate_throughput(
    cfg: &ValidConfig,
    settings: &McSettings,
) -> Result<McEstimate, McError> {
    Ok(run_report(cfg, settings)?.throughput)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::model::{validate, FadingModel, NetworkConfig, RatParams};

    fn fig1_config(channels: u32) -> ValidConfig {
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

    fn single_rat(density: f64, channels: u32, threshold: f64) -> ValidConfig {
        validate(NetworkConfig {
            rats: alloc::vec![RatParams {
                id: "w".into(),
                density,
                power: 0.5,
                sense_radius: 30.0,
                sir_threshold: threshold,
            }],
            channels,
            alpha: 4.0,
            fading: FadingModel::Rayleigh,
        })
        .unwrap()
    }

    #[test]
    fn auto_window_respects_floor_and_guard() {
        // lambda_min = 1e-4: guard half-width 564.19 m dominates the 1 km floor
        let w = auto_window(&fig1_config(5));
        assert!((w.width - 1128.379).abs() < 0.01, "{}", w.width);
        // dense scenario: the 1 km caption floor wins
        let dense = single_rat(1e-3, 5, 0.5);
        assert_eq!(auto_window(&dense), Window::square(1000.0));
    }

    #[test]
    fn degenerate_scenario_is_rejected() {
        let cfg = single_rat(1e-4, 5, 0.5);
        let mut settings = McSettings::new(10, 1, ContentionMode::ThinnedPpp);
        settings.window = WindowPolicy::Fixed(Window::square(50.0));
        assert_eq!(
            scenario_context(&cfg, &settings).unwrap_err(),
            McError::DegenerateScenario {
                rat: 0,
                expected_count: 0.25
            }
        );
    }

    #[test]
    fn eta_override_is_validated() {
        let cfg = fig1_config(5);
        let mut settings = McSettings::new(10, 1, ContentionMode::ThinnedPpp);
        settings.eta_override = Some(alloc::vec![1.0]);
        assert_eq!(
            scenario_context(&cfg, &settings).unwrap_err(),
            McError::BadEtaOverride
        );
        settings.eta_override = Some(alloc::vec![1.0, 1.5]);
        assert_eq!(
            scenario_context(&cfg, &settings).unwrap_err(),
            McError::BadEtaOverride
        );
    }

    #[test]
    fn estimates_are_bit_reproducible() {
        let cfg = fig1_config(5);
        let settings = McSettings::new(2_000, 99, ContentionMode::ThinnedPpp);
        let a = run_report(&cfg, &settings).unwrap();
        let b = run_report(&cfg, &settings).unwrap();
        assert_eq!(a, b);
        let c = run_report(
            &cfg,
            &McSettings::new(2_000, 100, ContentionMode::ThinnedPpp),
        )
        .unwrap();
        assert_ne!(a.rho_ce.mean.to_bits(), c.rho_ce.mean.to_bits());
    }

    #[test]
    fn chunk_merge_matches_sequential() {
        let cfg = fig1_config(5);
        let settings = McSettings::new(DROP_CHUNK + 1_500, 7, ContentionMode::ThinnedPpp);
        let ctx = scenario_context(&cfg, &settings).unwrap();
        let whole = run_drops(&ctx);
        let mut parts = DropAccumulator::new(ctx.rats());
        for chunk in 0..ctx.num_chunks() {
            parts.merge(&run_chunk(&ctx, chunk));
        }
        assert_eq!(whole, parts);
        assert_eq!(whole.drops, DROP_CHUNK + 1_500);
    }

    #[test]
    fn vanishing_threshold_gives_certain_success() {
        let cfg = single_rat(3e-4, 5, 1e-9);
        let settings = McSettings::new(2_000, 5, ContentionMode::ThinnedPpp);
        let est = estimate_success(&cfg, 0, &settings).unwrap();
        assert!(est.mean > 0.999, "{}", est.mean);
    }

    #[test]
    fn single_rat_closed_form_oracle() {
        // m=1, eta forced to 1, alpha=4, theta=1: rho = 1/(1 + pi/4),
        // an independent scalar evaluation (ell(1) = arctan 1)
        let cfg = single_rat(1e-4, 1, 1.0);
        let mut settings = McSettings::new(20_000, 11, ContentionMode::ThinnedPpp);
        settings.eta_override = Some(alloc::vec![1.0]);
        let est = estimate_success(&cfg, 0, &settings).unwrap();
        let expect = 0.560_099_153_511_557_4;
        assert!(
            (est.mean - expect).abs() < (2.0 * est.ci_half_width).max(0.015),
            "{} vs {expect} (ci {})",
            est.mean,
            est.ci_half_width
        );
    }

    #[test]
    fn thinned_mode_matches_closed_forms() {
        let cfg = fig1_config(5);
        let settings = McSettings::new(20_000, 31, ContentionMode::ThinnedPpp);
        let report = run_report(&cfg, &settings).unwrap();
        let (rho_s, rho_w) = analytic::success_probability_pair(&cfg).unwrap();
        for (est, want) in report.rho.iter().zip([rho_s, rho_w]) {
            let tol = (2.0 * est.ci_half_width).max(0.015);
            assert!(
                (est.mean - want).abs() <= tol,
                "{} vs {want} (tol {tol})",
                est.mean
            );
        }
        let rho_ce = analytic::coexisting_success_probability(&cfg).unwrap();
        let tol = (2.0 * report.rho_ce.ci_half_width).max(0.015);
        assert!((report.rho_ce.mean - rho_ce).abs() <= tol);
        // no-serving drops are essentially impossible at these densities
        assert_eq!(report.no_serving, alloc::vec![0, 0]);
    }

    #[test]
    fn rho_ce_equals_mean_of_per_rat_estimates() {
        let cfg = fig1_config(5);
        let settings = McSettings::new(4_000, 17, ContentionMode::ThinnedPpp);
        let report = run_report(&cfg, &settings).unwrap();
        let mean = (report.rho[0].mean + report.rho[1].mean) / 2.0;
        assert!((report.rho_ce.mean - mean).abs() < 1e-12);
    }

    #[test]
    fn power_doubling_is_bit_identical() {
        let base_cfg = fig1_config(5);
        let mut raw = base_cfg.as_config().clone();
        for r in &mut raw.rats {
            r.power *= 2.0;
        }
        let scaled_cfg = validate(raw).unwrap();
        let settings = McSettings::new(3_000, 23, ContentionMode::ThinnedPpp);
        let a = run_report(&base_cfg, &settings).unwrap();
        let b = run_report(&scaled_cfg, &settings).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ci_shrinks_like_sqrt_drops() {
        let cfg = fig1_config(5);
        let small = run_report(
            &cfg,
            &McSettings::new(2_000, 41, ContentionMode::ThinnedPpp),
        )
        .unwrap()
        .rho_ce;
        let large = run_report(
            &cfg,
            &McSettings::new(20_000, 41, ContentionMode::ThinnedPpp),
        )
        .unwrap()
        .rho_ce;
        let ratio = small.ci_half_width / large.ci_half_width;
        let expect = libm::sqrt(10.0);
        assert!(
            (ratio / expect - 1.0).abs() < 0.2,
            "ratio {ratio} vs {expect}"
        );
    }

    #[test]
    fn matern_mode_runs_and_stays_close() {
        // no directional assertion: the thinning approximation's error is
        // only reported; here we just bound it loosely
        let cfg = fig1_config(5);
        let thinned = run_report(
            &cfg,
            &McSettings::new(3_000, 53, ContentionMode::ThinnedPpp),
        )
        .unwrap()
        .rho_ce
        .mean;
        let matern = run_report(
            &cfg,
            &McSettings::new(3_000, 53, ContentionMode::MaternCsma),
        )
        .unwrap()
        .rho_ce
        .mean;
        assert!((thinned - matern).abs() < 0.2, "{thinned} vs {matern}");
    }

    #[test]
    fn no_serving_drops_recorded_as_failure() {
        // expected count barely above 1 with eta forced low: some drops
        // have no transmitter at all
        let cfg = single_rat(1e-4, 1, 0.5);
        let mut settings = McSettings::new(500, 3, ContentionMode::ThinnedPpp);
        settings.window = WindowPolicy::Fixed(Window::square(110.0));
        settings.eta_override = Some(alloc::vec![0.4]);
        let report = run_report(&cfg, &settings).unwrap();
        assert!(report.no_serving[0] > 0);
        assert!(report.rho[0].mean < 1.0);
    }

    #[test]
    fn drop_record_invariants() {
        let cfg = fig1_config(5);
        let settings = McSettings::new(1, 61, ContentionMode::ThinnedPpp);
        let ctx = scenario_context(&cfg, &settings).unwrap();
        for drop in 0..50 {
            let rec = run_drop(&ctx, drop);
            for r in 0..2 {
                assert!(rec.sir[r] >= 0.0);
                assert_eq!(rec.success[r], rec.sir[r] >= 0.5);
                assert!(rec.rate[r].is_finite());
                if rec.serving_distance[r].is_none() {
                    assert_eq!(rec.sir[r], 0.0);
                } else {
                    assert!(rec.serving_channel[r].is_some());
                }
            }
        }
    }

    #[test]
    fn throughput_estimate_sane() {
        // coarse agreement with the quadrature value (tight check lives in
        // the acceptance suite at full drop counts)
        let cfg = single_rat(3e-4, 5, 0.5);
        let est = estimate_throughput(
            &cfg,
            &McSettings::new(20_000, 71, ContentionMode::ThinnedPpp),
        )
        .unwrap();
        let want = analytic::coexisting_throughput(&cfg).unwrap();
        assert!(
            (est.mean - want).abs() < 0.05,
            "{} vs {want} (ci {})",
            est.mean,
            est.ci_half_width
        );
    }

    #[test]
    fn per_channel_dispersion_is_poisson_like() {
        // index of dispersion of the per-channel transmitting count over
        // replicates; 3 sigma band ~ 3*sqrt(2/(n-1))
        let cfg = fig1_config(5);
        let settings = McSettings::new(1, 83, ContentionMode::ThinnedPpp);
        let ctx = scenario_context(&cfg, &settings).unwrap();
        let n = 400;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for drop in 0..n {
            let mut pattern = PointPattern::new(ctx.window(), true);
            let mut record = DropRecord::empty(2);
            fill_drop(&ctx, drop, &mut pattern, &mut record);
            let count = pattern
                .points
                .iter()
                .filter(|p| p.rat == 0 && p.transmitting && p.channel.map(|c| c.get()) == Some(1))
                .count() as f64;
            sum += count;
            sumsq += count * count;
        }
        let mean = sum / n as f64;
        let var = (sumsq - sum * sum / n as f64) / (n as f64 - 1.0);
        let dispersion = var / mean;
        let band = 3.0 * libm::sqrt(2.0 / (n as f64 - 1.0));
        assert!(
            (dispersion - 1.0).abs() < band,
            "dispersion {dispersion}, band {band}"
        );
    }

    #[test]
    fn log2_rate_identity() {
        // spot-check the per-drop throughput contribution against its parts
        let cfg = fig1_config(5);
        let settings = McSettings::new(64, 91, ContentionMode::ThinnedPpp);
        let ctx = scenario_context(&cfg, &settings).unwrap();
        let acc = run_drops(&ctx);
        let report = McReport::from_accumulator(&ctx, &acc);
        let parts_sum: f64 = report.throughput_parts.iter().sum();
        assert!((report.throughput.mean - parts_sum).abs() < 1e-12);
    }
}
