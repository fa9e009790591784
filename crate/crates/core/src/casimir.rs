//! Vacuum energy and piston force for a rectangular Dirichlet cavity.
//!
//! The renormalized energy of an a×b compartment is available through two
//! algebraically equivalent routes: a lattice-zeta closed form
//! (`EnergyRoute::ZetaReflection`) and an exponentially convergent Bessel
//! series (`EnergyRoute::BesselSeries`). The force on a piston separating
//! two compartments comes from term-wise differentiation of the series,
//! with finite-difference oracles and closed-form asymptotes alongside for
//! cross-checking. All lengths are in natural units; energies scale as
//! 1/length and forces as 1/length².

use std::f64::consts::PI;

use thiserror::Error;

use crate::epstein::{self, CertifiedSum, EpsteinError, SeriesControl, UNDERFLOW_BOUND};
use crate::specfun::{bessel_k0, bessel_k1, bessel_k1_prime, riemann_zeta, BesselEval, SpecFunError};

/// Smallest accepted aspect ratio a/b; below this the exponential factors
/// of the series routes are not representable in double precision.
pub const ASPECT_MIN: f64 = 1e-4;
/// Largest accepted aspect ratio a/b.
pub const ASPECT_MAX: f64 = 1e4;

/// Bracket for the tension sign change, in units of b/a.
pub const CRITICAL_BRACKET: (f64, f64) = (2.0, 4.0);
/// Bisection narrows the bracket to this width before secant refinement.
const BISECT_WIDTH: f64 = 1e-3;

/// Attached to eq11 results when the series converges slowly.
pub const WARN_SMALL_ASPECT: &str =
    "aspect ratio a/b < 0.05: the eq11 series needs O(b/a) terms here; the eq14 route converges faster";
/// Attached to eq14 results when the series converges slowly.
pub const WARN_LARGE_ASPECT: &str =
    "aspect ratio a/b > 20: the eq14 series needs O(a/b) terms here; the eq11 route converges faster";

#[derive(Debug, Error)]
pub enum CasimirError {
    #[error("side length must be positive and finite, got {value}")]
    NonPositiveLength { value: f64 },
    #[error("aspect ratio {ratio:e} outside the supported range [1e-4, 1e4]")]
    AspectOutOfRange { ratio: f64 },
    #[error("piston position must satisfy 0 < a < L, got a = {a}, L = {l}")]
    PistonPosition { a: f64, l: f64 },
    #[error("root tolerance {tol:e} outside [1e-10, 1e-2]")]
    RootTolerance { tol: f64 },
    #[error("energy has no sign change on [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error(transparent)]
    Series(#[from] EpsteinError),
    #[error("special-function evaluation failed: {0}")]
    SpecFun(#[from] SpecFunError),
}

fn check_length(value: f64) -> Result<f64, CasimirError> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(CasimirError::NonPositiveLength { value });
    }
    Ok(value)
}

/// A single rectangular compartment, a×b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Length along the piston axis.
    pub a: f64,
    /// Transverse width.
    pub b: f64,
}

impl Geometry {
    pub fn new(a: f64, b: f64) -> Result<Self, CasimirError> {
        check_length(a)?;
        check_length(b)?;
        let ratio = a / b;
        if !(ASPECT_MIN..=ASPECT_MAX).contains(&ratio) {
            return Err(CasimirError::AspectOutOfRange { ratio });
        }
        Ok(Self { a, b })
    }

    pub fn aspect(&self) -> f64 {
        self.a / self.b
    }
}

/// An L×b box split by a piston at position a into compartments of
/// width a and L−a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PistonGeometry {
    /// Total box length.
    pub l: f64,
    /// Piston position, 0 < a < L.
    pub a: f64,
    /// Transverse width.
    pub b: f64,
}

impl PistonGeometry {
    pub fn new(l: f64, a: f64, b: f64) -> Result<Self, CasimirError> {
        check_length(l)?;
        check_length(b)?;
        if !a.is_finite() || !(a > 0.0 && a < l) {
            return Err(CasimirError::PistonPosition { a, l });
        }
        // both compartments must be valid geometries in their own right
        Geometry::new(a, b)?;
        Geometry::new(l - a, b)?;
        Ok(Self { l, a, b })
    }

    /// The compartment the piston bounds at position a.
    pub fn near_compartment(&self) -> Geometry {
        Geometry {
            a: self.a,
            b: self.b,
        }
    }

    /// The complementary compartment of width L−a.
    pub fn far_compartment(&self) -> Geometry {
        Geometry {
            a: self.l - self.a,
            b: self.b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyRoute {
    /// Lattice zeta closed form.
    ZetaReflection,
    /// Exponentially convergent K₁ double series.
    BesselSeries,
}

impl EnergyRoute {
    pub fn label(self) -> &'static str {
        match self {
            Self::ZetaReflection => "zeta_reflection",
            Self::BesselSeries => "bessel_series",
        }
    }
}

impl std::fmt::Display for EnergyRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceRoute {
    /// k²·K₁′ double series (fast for a ≥ b).
    Eq11,
    /// Closed terms plus k²·K₀ double series (fast for a ≤ b).
    Eq14,
    /// Central finite difference of the energy.
    FiniteDifference,
    /// One-term exponential asymptote for a ≫ b.
    AsymLargeA,
    /// Three-term closed form for a ≪ b.
    AsymSmallA,
}

impl ForceRoute {
    pub fn label(self) -> &'static str {
        match self {
            Self::Eq11 => "eq11",
            Self::Eq14 => "eq14",
            Self::FiniteDifference => "finite_difference",
            Self::AsymLargeA => "asym_large_a",
            Self::AsymSmallA => "asym_small_a",
        }
    }
}

impl std::fmt::Display for ForceRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Renormalized compartment energy, split into its three pieces.
///
/// `total` is always the literal sum of the three parts. The zeta route
/// folds everything into `bulk_term` + `edge_term`; the series route
/// populates all three.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBreakdown {
    /// π/(48·short side) piece.
    pub edge_term: f64,
    /// −ζ(3)·long/(16π·short²) piece (or the lattice-zeta term).
    pub bulk_term: f64,
    /// K₁ double series contribution; never positive.
    pub interaction_series: f64,
    pub total: f64,
    pub route: EnergyRoute,
    /// Certified bound on the truncation of whatever series the route used.
    pub tail_bound: f64,
}

/// A force value with its provenance and certified series remainder.
#[derive(Debug, Clone, Copy)]
pub struct ForceValue {
    pub value: f64,
    pub route: ForceRoute,
    /// Certified truncation remainder for series routes; a Richardson
    /// error estimate for the finite-difference route; 0 for closed forms.
    pub tail_bound: f64,
    /// Set when the chosen route is far from its fast-convergence regime.
    pub warning: Option<&'static str>,
}

fn zeta3() -> f64 {
    riemann_zeta(3.0).expect("3 is not the zeta pole")
}

/// Σ_{j≥1,k≥1} k²·κ(x·j·k) for a positive decreasing kernel κ.
///
/// Same certification scheme as the energy series: the inner tail is
/// geometric once ((k+1)/k)²·e^(−xj) < 1, rows are bounded through
/// Σ_k k²·q^(k−1) = (1+q)/(1−q)³, and successive row bounds shrink by at
/// least e^(−x). Unlike the energy sum this is used at arbitrarily small
/// x, so the inner loop keeps going until the geometric ratio certifies.
fn k2_kernel_sum<F>(
    x: f64,
    route: &'static str,
    kernel: F,
    ctrl: SeriesControl,
) -> Result<CertifiedSum, CasimirError>
where
    F: Fn(f64) -> Result<BesselEval, SpecFunError>,
{
    ctrl.validate()?;
    debug_assert!(x > 0.0 && x.is_finite());
    let floor = ctrl.inner_floor();
    let mut total = 0.0f64;
    let mut tail_bound = 0.0f64;
    let mut terms = 0usize;
    let mut j = 0usize;
    loop {
        j += 1;
        if j > ctrl.max_outer_terms {
            return Err(EpsteinError::BudgetExceeded { route, terms }.into());
        }
        let jf = j as f64;
        let decay = (-x * jf).exp();
        let first = kernel(x * jf)?;
        let first_mag = if first.underflow {
            UNDERFLOW_BOUND
        } else {
            first.value
        };
        if j > 1 && first.value <= floor * total {
            let geom = (1.0 + decay) / (1.0 - decay).powi(3);
            let rows_from_here = first_mag * geom / (1.0 - (-x).exp());
            let candidate = tail_bound + rows_from_here;
            if total == 0.0 || candidate <= ctrl.rel_tol * total {
                return Ok(CertifiedSum {
                    value: total,
                    tail_bound: candidate,
                });
            }
        }
        let mut k = 0usize;
        loop {
            k += 1;
            if k > ctrl.max_inner_terms {
                return Err(EpsteinError::BudgetExceeded { route, terms }.into());
            }
            let kf = k as f64;
            let eval = kernel(x * jf * kf)?;
            let term = kf * kf * eval.value;
            total += term;
            terms += 1;
            if term <= floor * total && !(j == 1 && k == 1) {
                let q = ((kf + 1.0) / kf).powi(2) * decay;
                if q < 1.0 {
                    let base = if eval.underflow {
                        kf * kf * UNDERFLOW_BOUND
                    } else {
                        term
                    };
                    tail_bound += base * q / (1.0 - q);
                    break;
                }
            }
        }
    }
}

/// |K₁′| as a positive kernel.
fn k1_prime_mag(y: f64) -> Result<BesselEval, SpecFunError> {
    let eval = bessel_k1_prime(y)?;
    Ok(BesselEval {
        value: -eval.value,
        underflow: eval.underflow,
    })
}

/// Renormalized vacuum energy of a single compartment.
///
/// `ZetaReflection` evaluates −(ab/32π)·Z₂(a,b;3) + (π/48)(1/a + 1/b);
/// `BesselSeries` evaluates the equivalent
/// π/(48b) − ζ(3)a/(16πb²) − (1/2b)·Σ(k/j)K₁(2πjk·a/b), with the roles of
/// a and b swapped when a < b so every Bessel argument stays ≥ 2π.
pub fn energy_ar(
    g: Geometry,
    route: EnergyRoute,
    ctrl: SeriesControl,
) -> Result<EnergyBreakdown, CasimirError> {
    match route {
        EnergyRoute::ZetaReflection => {
            let z2 = epstein::z2_s3_fast(g.a, g.b, ctrl)?;
            let bulk = -(g.a * g.b / (32.0 * PI)) * z2;
            let edge = (PI / 48.0) * (1.0 / g.a + 1.0 / g.b);
            Ok(EnergyBreakdown {
                edge_term: edge,
                bulk_term: bulk,
                interaction_series: 0.0,
                total: edge + bulk,
                route,
                tail_bound: ctrl.rel_tol * bulk.abs(),
            })
        }
        EnergyRoute::BesselSeries => {
            let (long, short) = if g.a >= g.b { (g.a, g.b) } else { (g.b, g.a) };
            let series = epstein::k1_ratio_sum(2.0 * PI * long / short, ctrl)?;
            let edge = PI / (48.0 * short);
            let bulk = -zeta3() * long / (16.0 * PI * short * short);
            let interaction = -series.value / (2.0 * short);
            Ok(EnergyBreakdown {
                edge_term: edge,
                bulk_term: bulk,
                interaction_series: interaction,
                total: edge + bulk + interaction,
                route,
                tail_bound: series.tail_bound / (2.0 * short),
            })
        }
    }
}

/// Piston force in the L → ∞ limit: (π/b²)·Σ_{j,k} k²·K₁′(2πjk·a/b).
///
/// Strictly negative (the piston is pulled toward the nearer wall).
pub fn force_infinite(g: Geometry, ctrl: SeriesControl) -> Result<ForceValue, CasimirError> {
    let series = k2_kernel_sum(
        2.0 * PI * g.a / g.b,
        "k²·K₁′ double series",
        k1_prime_mag,
        ctrl,
    )?;
    let scale = PI / (g.b * g.b);
    Ok(ForceValue {
        value: -scale * series.value,
        route: ForceRoute::Eq11,
        tail_bound: scale * series.tail_bound,
        warning: (g.aspect() < 0.05).then_some(WARN_SMALL_ASPECT),
    })
}

/// The same force through the complementary expansion:
/// −ζ(3)b/(8πa³) + π/(48a²) − ζ(3)/(16πb²) + (πb/a³)·Σ k²·K₀(2πjk·b/a).
pub fn force_alt(g: Geometry, ctrl: SeriesControl) -> Result<ForceValue, CasimirError> {
    let series = k2_kernel_sum(2.0 * PI * g.b / g.a, "k²·K₀ double series", bessel_k0, ctrl)?;
    let z3 = zeta3();
    let a3 = g.a * g.a * g.a;
    let closed =
        -z3 * g.b / (8.0 * PI * a3) + PI / (48.0 * g.a * g.a) - z3 / (16.0 * PI * g.b * g.b);
    let scale = PI * g.b / a3;
    Ok(ForceValue {
        value: closed + scale * series.value,
        route: ForceRoute::Eq14,
        tail_bound: scale * series.tail_bound,
        warning: (g.aspect() > 20.0).then_some(WARN_LARGE_ASPECT),
    })
}

/// d/dw of the compartment energy at width w, with its series tail bound.
///
/// For w ≥ b this is −ζ(3)/(16πb²) + (π/b²)·Σk²|K₁′|(2πjk·w/b); for w < b
/// the swapped series form is differentiated instead, which brings in both
/// the K₁ ratio sum and the k²·K₁′ sum at argument 2πjk·b/w.
fn energy_slope(w: f64, b: f64, ctrl: SeriesControl) -> Result<(f64, f64), CasimirError> {
    let z3 = zeta3();
    if w >= b {
        let series = k2_kernel_sum(
            2.0 * PI * w / b,
            "k²·K₁′ double series",
            k1_prime_mag,
            ctrl,
        )?;
        let scale = PI / (b * b);
        Ok((
            -z3 / (16.0 * PI * b * b) + scale * series.value,
            scale * series.tail_bound,
        ))
    } else {
        let x = 2.0 * PI * b / w;
        let ratio_sum = epstein::k1_ratio_sum(x, ctrl)?;
        let prime_sum = k2_kernel_sum(x, "k²·K₁′ double series", k1_prime_mag, ctrl)?;
        let w2 = w * w;
        let w3 = w2 * w;
        let slope = -PI / (48.0 * w2) + z3 * b / (8.0 * PI * w3) + ratio_sum.value / (2.0 * w2)
            - (PI * b / w3) * prime_sum.value;
        let tail = ratio_sum.tail_bound / (2.0 * w2) + (PI * b / w3) * prime_sum.tail_bound;
        Ok((slope, tail))
    }
}

/// Piston force in a finite box: −∂/∂a of the two-compartment energy,
/// evaluated by term-wise differentiation of the series routes.
///
/// Antisymmetric about a = L/2 and exactly zero there. The route tag is
/// `eq11` since the derivative series is the eq11 kernel applied per
/// compartment.
pub fn force_finite_l(pg: PistonGeometry, ctrl: SeriesControl) -> Result<ForceValue, CasimirError> {
    let (near, near_tail) = energy_slope(pg.a, pg.b, ctrl)?;
    let (far, far_tail) = energy_slope(pg.l - pg.a, pg.b, ctrl)?;
    Ok(ForceValue {
        value: far - near,
        route: ForceRoute::Eq11,
        tail_bound: near_tail + far_tail,
        warning: None,
    })
}

/// Compartment energy as a fixed smooth function of the width, for
/// finite differencing.
///
/// The series orientation and the term set {(j,k): j·k ≤ cap} are frozen
/// from the center width, so nearby evaluations share one analytic
/// expression and the difference quotient sees no truncation steps. The
/// cap keeps the discarded terms below ~e^(−40) of the leading one.
struct EnergyProfile {
    b: f64,
    wide: bool,
    jk_cap: usize,
}

impl EnergyProfile {
    fn new(center_width: f64, b: f64) -> Self {
        let wide = center_width >= b;
        let ratio = if wide { center_width / b } else { b / center_width };
        let jk_cap = (1.0 + 40.0 / (2.0 * PI * ratio)).ceil() as usize;
        Self { b, wide, jk_cap }
    }

    fn eval(&self, w: f64) -> Result<f64, CasimirError> {
        let (long, short) = if self.wide { (w, self.b) } else { (self.b, w) };
        let x = 2.0 * PI * long / short;
        let mut series = 0.0f64;
        for j in 1..=self.jk_cap {
            for k in 1..=self.jk_cap / j {
                let (jf, kf) = (j as f64, k as f64);
                series += (kf / jf) * bessel_k1(x * jf * kf)?.value;
            }
        }
        Ok(PI / (48.0 * short) - zeta3() * long / (16.0 * PI * short * short)
            - series / (2.0 * short))
    }
}

/// Central difference with one Richardson level: (4·D(h/2) − D(h))/3,
/// plus |D(h/2) − D(h)|/3 as the error estimate.
fn richardson_slope<F>(f: F, x: f64, h: f64) -> Result<(f64, f64), CasimirError>
where
    F: Fn(f64) -> Result<f64, CasimirError>,
{
    let quotient = |step: f64| -> Result<f64, CasimirError> {
        Ok((f(x + step)? - f(x - step)?) / (2.0 * step))
    };
    let coarse = quotient(h)?;
    let fine = quotient(0.5 * h)?;
    Ok(((4.0 * fine - coarse) / 3.0, (fine - coarse).abs() / 3.0))
}

/// Finite-difference oracle for `force_infinite`: −dE/da of the single
/// compartment minus the −ζ(3)/(16πb²) slope the far compartment keeps
/// contributing in the L → ∞ limit. Step h = 1e−5·min(a, b).
pub fn force_fd_infinite(g: Geometry, ctrl: SeriesControl) -> Result<ForceValue, CasimirError> {
    ctrl.validate()?;
    let profile = EnergyProfile::new(g.a, g.b);
    let h = 1e-5 * g.a.min(g.b);
    let (slope, err) = richardson_slope(|w| profile.eval(w), g.a, h)?;
    Ok(ForceValue {
        value: -slope - zeta3() / (16.0 * PI * g.b * g.b),
        route: ForceRoute::FiniteDifference,
        tail_bound: err,
        warning: None,
    })
}

/// Finite-difference oracle for `force_finite_L`: −d/da of the summed
/// compartment energies at step h = 1e−5·min(a, L−a, b).
pub fn force_fd_finite_l(
    pg: PistonGeometry,
    ctrl: SeriesControl,
) -> Result<ForceValue, CasimirError> {
    ctrl.validate()?;
    let near = EnergyProfile::new(pg.a, pg.b);
    let far = EnergyProfile::new(pg.l - pg.a, pg.b);
    let h = 1e-5 * pg.a.min(pg.l - pg.a).min(pg.b);
    let total = |w: f64| -> Result<f64, CasimirError> { Ok(near.eval(w)? + far.eval(pg.l - w)?) };
    let (slope, err) = richardson_slope(total, pg.a, h)?;
    Ok(ForceValue {
        value: -slope,
        route: ForceRoute::FiniteDifference,
        tail_bound: err,
        warning: None,
    })
}

/// Leading exponential asymptote −(π/2)(ab³)^(−1/2)·e^(−2πa/b) for a ≫ b.
pub fn force_asym_large_a(g: Geometry) -> ForceValue {
    let value = -(PI / 2.0) / (g.a * g.b.powi(3)).sqrt() * (-2.0 * PI * g.a / g.b).exp();
    ForceValue {
        value,
        route: ForceRoute::AsymLargeA,
        tail_bound: 0.0,
        warning: None,
    }
}

/// Three-term closed form −ζ(3)b/(8πa³) + π/(48a²) − ζ(3)/(16πb²) for a ≪ b.
pub fn force_asym_small_a(g: Geometry) -> ForceValue {
    let z3 = zeta3();
    let value = -z3 * g.b / (8.0 * PI * g.a.powi(3)) + PI / (48.0 * g.a * g.a)
        - z3 / (16.0 * PI * g.b * g.b);
    ForceValue {
        value,
        route: ForceRoute::AsymSmallA,
        tail_bound: 0.0,
        warning: None,
    }
}

/// Force per unit length between two parallel lines a apart: −ζ(3)/(8πa³).
pub fn parallel_lines_tension(a: f64) -> f64 {
    -zeta3() / (8.0 * PI * a * a * a)
}

/// Aspect ratio r* = b/a at which the compartment energy (and with it the
/// shape-preserving tension) changes sign.
///
/// Bisects the hard-coded bracket [2, 4] down to width 1e−3, then switches
/// to Illinois-damped secant steps until the bracket is narrower than
/// `tol`. The energy is strictly monotone on the bracket.
pub fn critical_ratio(tol: f64) -> Result<f64, CasimirError> {
    if !(1e-10..=1e-2).contains(&tol) {
        return Err(CasimirError::RootTolerance { tol });
    }
    let ctrl = SeriesControl::default();
    let energy = |r: f64| -> Result<f64, CasimirError> {
        Ok(energy_ar(Geometry::new(1.0, r)?, EnergyRoute::BesselSeries, ctrl)?.total)
    };
    let (mut lo, mut hi) = CRITICAL_BRACKET;
    let mut f_lo = energy(lo)?;
    let mut f_hi = energy(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(CasimirError::NoRoot { lo, hi });
    }
    while hi - lo > BISECT_WIDTH {
        let mid = 0.5 * (lo + hi);
        let f_mid = energy(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    // Illinois variant: halving the retained endpoint's value prevents the
    // secant from stalling on one side.
    let mut stuck_side = 0i8;
    while hi - lo > tol {
        let secant = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let x = if secant.is_finite() && secant > lo && secant < hi {
            secant
        } else {
            0.5 * (lo + hi)
        };
        let f_x = energy(x)?;
        if f_x == 0.0 {
            return Ok(x);
        }
        if f_x.signum() == f_lo.signum() {
            lo = x;
            f_lo = f_x;
            if stuck_side == -1 {
                f_hi *= 0.5;
            }
            stuck_side = -1;
        } else {
            hi = x;
            f_hi = f_x;
            if stuck_side == 1 {
                f_lo *= 0.5;
            }
            stuck_side = 1;
        }
    }
    Ok(0.5 * (lo + hi))
}
