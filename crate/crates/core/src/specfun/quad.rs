//! Adaptive Gauss–Kronrod quadrature over finite and semi-infinite intervals.
//!
//! The kernel is the classic 15-point Kronrod extension of 7-point Gauss
//! (nodes and weights from QUADPACK's `dqk15`). Adaptivity is plain
//! worst-interval bisection driven by the QUADPACK error estimate. The
//! semi-infinite form maps `[lower, ∞)` onto `(0, 1]` via
//! `x = lower + (1 − t)/t`; Kronrod nodes are interior, so neither endpoint
//! is ever evaluated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{QuadratureResult, SpecFunError, ToleranceSpec};

/// Abscissae of the 15-point Kronrod rule on [−1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_7,
    0.949_107_912_342_758_524_526_189_7,
    0.864_864_423_359_769_072_789_712_8,
    0.741_531_185_599_394_439_863_864_8,
    0.586_087_235_467_691_130_294_144_8,
    0.405_845_151_377_397_166_906_606_4,
    0.207_784_955_007_898_467_600_689_4,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_0,
    0.063_092_092_629_978_553_290_700_7,
    0.104_790_010_322_250_183_839_876_3,
    0.140_653_259_715_525_918_745_189_6,
    0.169_004_726_639_267_902_826_583_4,
    0.190_350_578_064_785_409_913_256_4,
    0.204_432_940_075_298_892_414_162_0,
    0.209_482_141_084_727_828_012_999_2,
];

/// Weights of the embedded 7-point Gauss rule (odd Kronrod nodes).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_4,
    0.279_705_391_489_276_667_901_467_8,
    0.381_830_050_505_118_944_950_369_8,
    0.417_959_183_673_469_387_755_102_0,
];

/// One GK15 application on [a, b]: returns (integral, error bound, |f| norm).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv = [0.0f64; 15];
    fv[7] = fc;

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        let fsum = f1 + f2;
        resk += WGK[j] * fsum;
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            // odd Kronrod indices carry the embedded Gauss nodes
            resg += WG[j / 2] * fsum;
        }
    }

    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - reskh).abs() + (fv[14 - j] - reskh).abs());
    }

    let result = resk * half;
    let resabs_s = resabs * half.abs();
    let resasc_s = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc_s != 0.0 && err != 0.0 {
        err = resasc_s * (200.0 * err / resasc_s).powf(1.5).min(1.0);
    }
    let round_floor = 50.0 * f64::EPSILON * resabs_s;
    if round_floor > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(round_floor);
    }
    (result, err)
}

/// Interval bookkeeping for the worst-first refinement queue.
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integration of `f` over the finite interval [a, b].
pub(crate) fn integrate_finite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: &ToleranceSpec,
) -> Result<QuadratureResult, SpecFunError> {
    let tol = ToleranceSpec::new(tol.rel_tol, tol.abs_tol, tol.max_evals)?;
    let mut evaluations = 0usize;
    let mut heap = BinaryHeap::new();

    // Seed with two intervals: a single panel can fool the error estimate
    // when the integrand is nearly antisymmetric about the midpoint.
    let mid = 0.5 * (a + b);
    let mut total = 0.0;
    let mut total_err = 0.0;
    for (lo, hi) in [(a, mid), (mid, b)] {
        let (v, e) = gk15(&f, lo, hi);
        evaluations += 15;
        if !v.is_finite() {
            return Err(SpecFunError::QuadratureNonConvergence {
                value: v,
                error_estimate: f64::INFINITY,
                evaluations,
            });
        }
        total += v;
        total_err += e;
        heap.push(Segment {
            a: lo,
            b: hi,
            value: v,
            error: e,
        });
    }

    loop {
        if total_err <= tol.abs_tol.max(tol.rel_tol * total.abs()) {
            return Ok(QuadratureResult {
                value: total,
                error_estimate: total_err,
                evaluations,
            });
        }
        if evaluations + 30 > tol.max_evals {
            return Err(SpecFunError::QuadratureNonConvergence {
                value: total,
                error_estimate: total_err,
                evaluations,
            });
        }
        let worst = heap.pop().expect("refinement queue never empties");
        let m = 0.5 * (worst.a + worst.b);
        if !(worst.a < m && m < worst.b) {
            // interval no longer splittable in f64: accept what we have
            return Err(SpecFunError::QuadratureNonConvergence {
                value: total,
                error_estimate: total_err,
                evaluations,
            });
        }
        let (v1, e1) = gk15(&f, worst.a, m);
        let (v2, e2) = gk15(&f, m, worst.b);
        evaluations += 30;
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(SpecFunError::QuadratureNonConvergence {
                value: total,
                error_estimate: f64::INFINITY,
                evaluations,
            });
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: m,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
}

/// Adaptive integration of `f` over `[lower, ∞)`.
///
/// The integrand must be continuous on the domain and decay at least as fast
/// as an inverse fourth power (or exponentially); under the variable change
/// `x = lower + (1 − t)/t` the transformed integrand then stays bounded on
/// `(0, 1]` and ordinary adaptive refinement applies.
///
/// # Errors
///
/// [`SpecFunError::QuadratureNonConvergence`] carrying the best estimate and
/// its bound when the evaluation budget is exhausted before the requested
/// tolerance is met, and [`SpecFunError::InvalidTolerance`] for an
/// unsatisfiable tolerance request.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    lower: f64,
    tol: &ToleranceSpec,
) -> Result<QuadratureResult, SpecFunError> {
    integrate_finite(
        move |t| {
            let x = lower + (1.0 - t) / t;
            f(x) / (t * t)
        },
        0.0,
        1.0,
        tol,
    )
}

/// Adaptive integration of `f` over the quadrant `[0, ∞) × [0, ∞)` by
/// iterated one-dimensional quadrature.
///
/// The requested tolerance is split across the axes: each inner (v) solve is
/// run at a quarter of the relative tolerance so that the inner errors,
/// accumulated through the outer quadrature, stay subordinate to the outer
/// error bound. The reported error estimate sums both contributions;
/// `evaluations` counts every call to `f`.
pub fn integrate_quadrant<F: Fn(f64, f64) -> f64>(
    f: F,
    tol: &ToleranceSpec,
) -> Result<QuadratureResult, SpecFunError> {
    let tol = ToleranceSpec::new(tol.rel_tol, tol.abs_tol, tol.max_evals)?;
    let inner_tol = ToleranceSpec {
        rel_tol: (tol.rel_tol * 0.25).max(super::MIN_REL_TOL),
        abs_tol: tol.abs_tol * 0.25,
        max_evals: tol.max_evals,
    };

    // Interior-mutable tallies: the outer integrand closure must be Fn.
    use std::cell::Cell;
    let inner_evals = Cell::new(0usize);
    let inner_rel_err = Cell::new(0.0f64);
    let failed = Cell::new(false);

    let outer = integrate_semi_infinite(
        |u| match integrate_semi_infinite(|v| f(u, v), 0.0, &inner_tol) {
            Ok(r) => {
                inner_evals.set(inner_evals.get() + r.evaluations);
                if r.value != 0.0 {
                    inner_rel_err.set(inner_rel_err.get().max(r.error_estimate / r.value.abs()));
                }
                r.value
            }
            Err(_) => {
                failed.set(true);
                f64::NAN
            }
        },
        0.0,
        &tol,
    );

    match outer {
        Ok(r) => Ok(QuadratureResult {
            value: r.value,
            error_estimate: r.error_estimate + inner_rel_err.get() * r.value.abs(),
            evaluations: r.evaluations + inner_evals.get(),
        }),
        Err(SpecFunError::QuadratureNonConvergence {
            value,
            error_estimate,
            evaluations,
        }) => Err(SpecFunError::QuadratureNonConvergence {
            value,
            error_estimate: if failed.get() {
                f64::INFINITY
            } else {
                error_estimate
            },
            evaluations: evaluations + inner_evals.get(),
        }),
        Err(e) => Err(e),
    }
}
