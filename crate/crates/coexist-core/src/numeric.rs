//! Numerical primitives: adaptive Gauss–Kronrod quadrature, bisection root
//! finding, and small float helpers shared by the analytic modules.

use alloc::vec::Vec;
use core::fmt;

/// 15-point Kronrod abscissae on [-1, 1] (positive half; symmetric).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];

/// Kronrod weights matching `XGK`.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Embedded 7-point Gauss weights (odd Kronrod indices).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error.
    pub abs_error: f64,
    pub evaluations: u32,
}

/// Adaptive quadrature did not reach the requested tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureError {
    /// Best estimate at the point of failure.
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: u32,
}

impl fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "quadrature stalled at error {:.3e} after {} evaluations",
            self.abs_error, self.evaluations
        )
    }
}

impl core::error::Error for QuadratureError {}

/// One Gauss–Kronrod 15(7) panel on [a, b]: Kronrod value plus an error
/// estimate from the Gauss/Kronrod discrepancy.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    // the center abscissa belongs to both rules
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let sum = f(center - x) + f(center + x);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let value = kronrod * half;
    let error = libm::fabs((kronrod - gauss) * half);
    (value, error)
}

/// Integrate `f` over [a, b] with globally adaptive GK15 bisection until the
/// summed error estimate satisfies `err <= max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult, QuadratureError> {
    const MAX_SEGMENTS: usize = 4096;

    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }

    let (v, e) = gk15(&f, a, b);
    let mut segments = Vec::with_capacity(64);
    segments.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    let mut evaluations = 15u32;

    loop {
        let mut total_value = 0.0;
        let mut total_error = 0.0;
        let mut worst = 0usize;
        for (i, s) in segments.iter().enumerate() {
            total_value += s.value;
            total_error += s.error;
            if s.error > segments[worst].error {
                worst = i;
            }
        }

        let tol = abs_tol.max(rel_tol * libm::fabs(total_value));
        if total_error <= tol || !total_value.is_finite() {
            let result = QuadResult {
                value: total_value,
                abs_error: total_error,
                evaluations,
            };
            return if total_value.is_finite() {
                Ok(result)
            } else {
                Err(QuadratureError {
                    value: total_value,
                    abs_error: total_error,
                    evaluations,
                })
            };
        }

        if segments.len() >= MAX_SEGMENTS {
            return Err(QuadratureError {
                value: total_value,
                abs_error: total_error,
                evaluations,
            });
        }

        let Segment { a, b, .. } = segments[worst];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval exhausted at f64 resolution
            return Err(QuadratureError {
                value: total_value,
                abs_error: total_error,
                evaluations,
            });
        }
        let (v1, e1) = gk15(&f, a, mid);
        let (v2, e2) = gk15(&f, mid, b);
        evaluations += 30;
        segments[worst] = Segment {
            a,
            b: mid,
            value: v1,
            error: e1,
        };
        segments.push(Segment {
            a: mid,
            b,
            value: v2,
            error: e2,
        });
    }
}

/// Bisection failed: no sign change on the bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoRootInBracket;

impl fmt::Display for NoRootInBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("no sign change on the bisection bracket")
    }
}

impl core::error::Error for NoRootInBracket {}

/// Bisection solution with the iteration count actually used.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub iterations: u32,
}

/// Bisect `f` on [lo, hi] until the bracket width shrinks below
/// `rel_tol * |midpoint|`. Requires a sign change on the initial bracket.
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
) -> Result<Root, NoRootInBracket> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            iterations: 0,
        });
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(NoRootInBracket);
    }

    let mut iterations = 0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= rel_tol * libm::fabs(mid) || mid <= lo || mid >= hi {
            return Ok(Root { x: mid, iterations });
        }
        let f_mid = f(mid);
        iterations += 1;
        if f_mid == 0.0 {
            return Ok(Root { x: mid, iterations });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Root {
        x: 0.5 * (lo + hi),
        iterations,
    })
}

/// Integer power by binary exponentiation (f64::powi is std-only).
pub fn powi(base: f64, mut exp: u32) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= b;
        }
        b *= b;
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn polynomial_is_exact() {
        // GK15 integrates degree-22 polynomials exactly; x^3 over [0,2] = 4
        let r = integrate(|x| x * x * x, 0.0, 2.0, 1e-12, 0.0).unwrap();
        assert!((r.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn arctan_kernel() {
        // 1/(1+t^2) over [0,1] = pi/4
        let r = integrate(|t| 1.0 / (1.0 + t * t), 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((r.value - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn long_decaying_tail() {
        // 1/(1+t^2) over [0, 1e6] -> pi/2 - 1e-6
        let r = integrate(|t| 1.0 / (1.0 + t * t), 0.0, 1e6, 1e-10, 0.0).unwrap();
        let exact = FRAC_PI_2 - libm::atan(1e-6);
        assert!(
            (r.value - exact).abs() < 1e-9 * exact,
            "{} vs {exact}",
            r.value
        );
    }

    #[test]
    fn sqrt_cusp_converges() {
        let r = integrate(libm::sqrt, 0.0, 1.0, 1e-9, 0.0).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn empty_interval_is_zero() {
        let r = integrate(|_| 7.0, 3.0, 3.0, 1e-9, 0.0).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn non_finite_integrand_errors() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, 1e-9, 0.0).is_err());
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r.x - core::f64::consts::SQRT_2).abs() < 1e-11);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9),
            Err(NoRootInBracket)
        ));
    }

    #[test]
    fn powi_matches_std() {
        for (b, e) in [(0.257523, 5u32), (1.0 - 1e-13, 1_000_000), (2.0, 30)] {
            let got = powi(b, e);
            let want = b.powi(e as i32);
            assert!(
                (got - want).abs() <= 1e-15 * want.abs().max(1.0),
                "{b}^{e}: {got} vs {want}"
            );
        }
        assert_eq!(powi(0.3, 0), 1.0);
    }

    #[test]
    fn pi_from_circle_area() {
        let r = integrate(|x| libm::sqrt(1.0 - x * x), -1.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-8);
    }
}
