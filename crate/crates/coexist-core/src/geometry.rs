//! Spatial sampling: homogeneous PPP generation over a rectangular window,
//! CSMA channel contention in two fidelity modes (independent thinning and
//! Matérn hard-core), and nearest-neighbor queries.
//!
//! The window is centred on the origin, where the typical user sits. With
//! `torus = true` all distances wrap around the window edges, which removes
//! boundary bias in interference seen at the origin.

use alloc::vec::Vec;
use core::num::NonZeroU32;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::analytic;
use crate::model::ValidConfig;

/// A planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ORIGIN: Vec2 = Vec2 { x: 0.0, y: 0.0 };
}

/// Axis-aligned simulation rectangle centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub width: f64,
    pub height: f64,
}

impl Window {
    pub fn square(side: f64) -> Window {
        Window {
            width: side,
            height: side,
        }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x.abs() <= 0.5 * self.width && p.y.abs() <= 0.5 * self.height
    }

    /// Squared distance between two points, optionally wrapping around the
    /// window edges.
    pub fn distance_sq(&self, a: Vec2, b: Vec2, torus: bool) -> f64 {
        let mut dx = (a.x - b.x).abs();
        let mut dy = (a.y - b.y).abs();
        if torus {
            if dx > 0.5 * self.width {
                dx = self.width - dx;
            }
            if dy > 0.5 * self.height {
                dy = self.height - dy;
            }
        }
        dx * dx + dy * dy
    }
}

/// One access point of a sampled pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessPoint {
    pub position: Vec2,
    /// Index into the scenario's RAT list.
    pub rat: usize,
    /// CSMA contention mark, uniform in [0, 1); lower marks claim first.
    pub mark: f64,
    /// Claimed channel in 1..=m; `None` until contention, or when silenced.
    pub channel: Option<NonZeroU32>,
    pub transmitting: bool,
}

/// Sampled AP positions with their contention state.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    pub points: Vec<AccessPoint>,
    pub window: Window,
    pub torus: bool,
}

impl PointPattern {
    pub fn new(window: Window, torus: bool) -> PointPattern {
        PointPattern {
            points: Vec::new(),
            window,
            torus,
        }
    }

    pub fn distance_sq(&self, a: Vec2, b: Vec2) -> f64 {
        self.window.distance_sq(a, b, self.torus)
    }

    /// Number of transmitting APs of one RAT.
    pub fn transmitting_count(&self, rat: usize) -> usize {
        self.points
            .iter()
            .filter(|p| p.rat == rat && p.transmitting)
            .count()
    }
}

/// Draw a Poisson point count for `density * area` from `rng`.
pub fn sample_count<R: Rng + ?Sized>(density: f64, area: f64, rng: &mut R) -> usize {
    let mean = density * area;
    if mean <= 0.0 {
        return 0;
    }
    let poisson = Poisson::new(mean).expect("positive finite mean");
    poisson.sample(rng) as usize
}

/// Append `count` RAT-`rat` points i.i.d. uniform on the window, drawing the
/// contention mark alongside each position (three uniforms per point:
/// x, y, mark).
pub fn extend_positions<R: Rng + ?Sized>(
    points: &mut Vec<AccessPoint>,
    count: usize,
    window: Window,
    rat: usize,
    rng: &mut R,
) {
    points.reserve(count);
    for _ in 0..count {
        let x = (rng.random::<f64>() - 0.5) * window.width;
        let y = (rng.random::<f64>() - 0.5) * window.height;
        let mark = rng.random::<f64>();
        points.push(AccessPoint {
            position: Vec2 { x, y },
            rat,
            mark,
            channel: None,
            transmitting: false,
        });
    }
}

/// Place `count` RAT-`rat` points i.i.d. uniform on the window.
pub fn sample_positions<R: Rng + ?Sized>(
    count: usize,
    window: Window,
    rat: usize,
    rng: &mut R,
) -> Vec<AccessPoint> {
    let mut points = Vec::with_capacity(count);
    extend_positions(&mut points, count, window, rat, rng);
    points
}

/// Sample one RAT's homogeneous PPP fragment: Poisson count, uniform
/// positions, uniform marks. Deterministic given the rng state.
pub fn sample_ppp<R: Rng + ?Sized>(
    density: f64,
    window: Window,
    rat: usize,
    rng: &mut R,
) -> Vec<AccessPoint> {
    let count = sample_count(density, window.area(), rng);
    sample_positions(count, window, rat, rng)
}

#[inline]
fn uniform_channel<R: Rng + ?Sized>(channels: u32, rng: &mut R) -> NonZeroU32 {
    let u: f64 = rng.random();
    let idx = ((u * channels as f64) as u32).min(channels - 1);
    NonZeroU32::new(idx + 1).unwrap()
}

/// Thinned-PPP contention: each RAT-r AP transmits independently with
/// probability `etas[r]` and, if transmitting, claims a channel uniformly at
/// random. Draw order is two uniforms per point in storage order, so patterns
/// stored rat-by-rat stay draw-aligned across parameter sweeps.
pub fn contend_thinned_ppp<R: Rng + ?Sized>(
    pattern: &mut PointPattern,
    etas: &[f64],
    channels: u32,
    rng: &mut R,
) {
    for p in &mut pattern.points {
        let thin: f64 = rng.random();
        let chan = uniform_channel(channels, rng);
        p.transmitting = thin < etas[p.rat];
        p.channel = p.transmitting.then_some(chan);
    }
}

/// [`contend_thinned_ppp`] with η computed from the scenario.
pub fn contend_thinned_from_config<R: Rng + ?Sized>(
    pattern: &mut PointPattern,
    cfg: &ValidConfig,
    rng: &mut R,
) {
    let etas = analytic::transmit_probabilities(cfg);
    contend_thinned_ppp(pattern, &etas, cfg.channels, rng);
}

/// Matérn hard-core CSMA contention. APs claim channels in increasing mark
/// order; an AP senses the channels already claimed by earlier-mark APs of
/// any RAT within its own sensing radius, claims a uniformly random free
/// channel if one exists, and is silenced otherwise.
pub fn contend_matern_csma<R: Rng + ?Sized>(
    pattern: &mut PointPattern,
    sense_radii: &[f64],
    channels: u32,
    rng: &mut R,
) {
    let n = pattern.points.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| {
        pattern.points[a as usize]
            .mark
            .partial_cmp(&pattern.points[b as usize].mark)
            .expect("marks are never NaN")
    });

    let max_radius = sense_radii.iter().fold(0.0_f64, |a, &b| a.max(b));
    let mut grid = UniformGrid::new(pattern.window, max_radius, pattern.torus);

    // occupied[ch] == stamp marks channel ch+1 busy for the current AP
    let mut occupied: Vec<u32> = alloc::vec![0; channels as usize];
    let mut stamp = 0u32;

    for &idx in &order {
        stamp += 1;
        let point = pattern.points[idx as usize];
        let radius = sense_radii[point.rat];
        let radius_sq = radius * radius;
        let mut busy = 0u32;
        grid.for_each_within(&pattern.points, point.position, radius, |other, d2| {
            if d2 <= radius_sq {
                if let Some(ch) = other.channel {
                    let slot = &mut occupied[(ch.get() - 1) as usize];
                    if *slot != stamp {
                        *slot = stamp;
                        busy += 1;
                    }
                }
            }
        });

        let free = channels - busy;
        let p = &mut pattern.points[idx as usize];
        if free == 0 {
            p.transmitting = false;
            p.channel = None;
            continue;
        }
        // pick the k-th free channel uniformly
        let u: f64 = rng.random();
        let mut k = ((u * free as f64) as u32).min(free - 1);
        let mut chosen = None;
        for ch in 0..channels {
            if occupied[ch as usize] != stamp {
                if k == 0 {
                    chosen = Some(NonZeroU32::new(ch + 1).unwrap());
                    break;
                }
                k -= 1;
            }
        }
        p.transmitting = true;
        p.channel = chosen;
        grid.insert(idx, point.position);
    }
}

/// Index and distance of the transmitting RAT-`rat` AP nearest to `origin`,
/// or `None` if that RAT has no transmitter.
pub fn nearest_transmitting(
    pattern: &PointPattern,
    rat: usize,
    origin: Vec2,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in pattern.points.iter().enumerate() {
        if p.rat != rat || !p.transmitting {
            continue;
        }
        let d2 = pattern.distance_sq(p.position, origin);
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((i, d2));
        }
    }
    best.map(|(i, d2)| (i, libm::sqrt(d2)))
}

/// Count violations of the hard-core property: transmitting pairs on the same
/// channel where the later-mark AP is within its own sensing radius of the
/// earlier-mark one (it should have sensed the channel busy).
pub fn hard_core_violations(pattern: &PointPattern, sense_radii: &[f64]) -> usize {
    let transmitting: Vec<usize> = (0..pattern.points.len())
        .filter(|&i| pattern.points[i].transmitting)
        .collect();
    let mut violations = 0;
    for (a, &i) in transmitting.iter().enumerate() {
        let pi = &pattern.points[i];
        for &j in &transmitting[a + 1..] {
            let pj = &pattern.points[j];
            if pi.channel != pj.channel {
                continue;
            }
            let (_, later) = if pi.mark < pj.mark {
                (pi, pj)
            } else {
                (pj, pi)
            };
            let radius = sense_radii[later.rat];
            if pattern.distance_sq(pi.position, pj.position) < radius * radius {
                violations += 1;
            }
        }
    }
    violations
}

/// Uniform-grid spatial index with cell size at least the query radius, so a
/// disc query only touches the 3x3 (or wrapped) neighborhood.
struct UniformGrid {
    cells: Vec<Vec<u32>>,
    nx: usize,
    ny: usize,
    cell_w: f64,
    cell_h: f64,
    window: Window,
    torus: bool,
}

impl UniformGrid {
    fn new(window: Window, min_cell: f64, torus: bool) -> UniformGrid {
        let nx = if min_cell > 0.0 {
            ((window.width / min_cell) as usize).max(1)
        } else {
            1
        };
        let ny = if min_cell > 0.0 {
            ((window.height / min_cell) as usize).max(1)
        } else {
            1
        };
        UniformGrid {
            cells: alloc::vec![Vec::new(); nx * ny],
            nx,
            ny,
            cell_w: window.width / nx as f64,
            cell_h: window.height / ny as f64,
            window,
            torus,
        }
    }

    fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let ix = (((p.x + 0.5 * self.window.width) / self.cell_w) as usize).min(self.nx - 1);
        let iy = (((p.y + 0.5 * self.window.height) / self.cell_h) as usize).min(self.ny - 1);
        (ix, iy)
    }

    fn insert(&mut self, idx: u32, p: Vec2) {
        let (ix, iy) = self.cell_of(p);
        self.cells[iy * self.nx + ix].push(idx);
    }

    /// Visit every inserted point within the cell neighborhood spanning
    /// `radius` around `p` (all cells when the grid is narrower than the
    /// span), passing the torus-aware squared distance.
    fn for_each_within<F: FnMut(&AccessPoint, f64)>(
        &self,
        points: &[AccessPoint],
        p: Vec2,
        radius: f64,
        mut f: F,
    ) {
        let span_x = ((radius / self.cell_w) as usize) + 1;
        let span_y = ((radius / self.cell_h) as usize) + 1;
        let (cx, cy) = self.cell_of(p);

        let xs = wrapped_range(cx, span_x, self.nx, self.torus);
        let ys = wrapped_range(cy, span_y, self.ny, self.torus);
        for &ix in &xs {
            for &iy in &ys {
                for &idx in &self.cells[iy * self.nx + ix] {
                    let other = &points[idx as usize];
                    let d2 = self.window.distance_sq(p, other.position, self.torus);
                    f(other, d2);
                }
            }
        }
    }
}

/// Cell indices within `span` of `center`, wrapped or clamped, deduplicated.
fn wrapped_range(center: usize, span: usize, n: usize, torus: bool) -> Vec<usize> {
    if 2 * span + 1 >= n {
        return (0..n).collect();
    }
    let mut out = Vec::with_capacity(2 * span + 1);
    for d in -(span as isize)..=span as isize {
        let raw = center as isize + d;
        let idx = if torus {
            raw.rem_euclid(n as isize) as usize
        } else {
            raw.clamp(0, n as isize - 1) as usize
        };
        if !out.contains(&idx) {
            out.push(idx);
        }
    }
    out
}
