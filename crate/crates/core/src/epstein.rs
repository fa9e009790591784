//! The two-dimensional lattice sum
//! Z₂(c₁, c₂; s) = Σ′_{j,k} (j²c₁² + k²c₂²)^(−s/2)
//! (the prime omits the all-zero index pair) in three independent
//! realizations, plus the auxiliary one-dimensional sum used to derive the
//! fast form:
//!
//! * [`z2_direct`] — literal lattice sum over squares of increasing radius
//!   with a midpoint-rule integral tail; slow, but shares no series
//!   machinery with the fast route, so it serves as the oracle.
//! * [`z2_s3_fast`] — the s = 3 closed form
//!   2π²/(3a²b) + (16π/(ab²))·Σ_{j,k≥1} (k/j)K₁(2πjk·a/b) + 2ζ(3)/b³,
//!   exponentially convergent once the Bessel argument is ≥ 2π (arguments
//!   are swapped internally to guarantee that).
//! * [`z2_continued`] — analytic continuation through the reflection
//!   formula a₁a₂Γ(s/2)π^(−s/2)Z₂(a₁,a₂;s) =
//!   Γ((2−s)/2)π^((s−2)/2)Z₂(1/a₁,1/a₂;2−s), giving access to s = −1.
//! * [`s_aux`] — S(m, a; s) = π^(−s/2)Γ(s/2)·[(m/π)^(−s)
//!   + 2Σ_{n≥1}((m/π)² + (n/a)²)^(−s/2)], with the s = 3 Bessel closed form
//!   (aπ/m²)·[1 + 4Σ_n (nma)K₁(2nma)] as the second route.
//!
//! Every truncation here is *certified*: a loop may stop only when a rigorous
//! bound on the discarded tail drops below `rel_tol` times the accumulated
//! value. For the Bessel series the bound is geometric, from
//! K_ν(y + δ) ≤ K_ν(y)·e^(−δ); for the lattice sums it is the midpoint-rule
//! error of the integral tail correction, bounded through the Hessian of the
//! summand.

use crate::specfun::{bessel_k1, integrate_finite, riemann_zeta, SpecFunError, ToleranceSpec};
use std::f64::consts::PI;
use thiserror::Error;

/// Errors raised by the lattice-sum layer.
#[derive(Debug, Clone, Error)]
pub enum EpsteinError {
    /// Lattice scales (and the auxiliary-sum parameters) must be positive.
    #[error("scale parameter must be positive and finite, got {value}")]
    NonPositiveScale { value: f64 },
    /// The requested route diverges (or fails its certificate) at this s.
    #[error("summation route requires s > {min}, got s = {s}")]
    ConvergenceDomain { s: f64, min: f64 },
    /// `SeriesControl::rel_tol` must lie strictly inside (0, 1).
    #[error("series rel_tol = {rel_tol} must lie in (0, 1)")]
    InvalidControl { rel_tol: f64 },
    /// The Γ/Bessel closed form of the auxiliary sum exists only where the
    /// implied Bessel order (1−s)/2 is ±1 or 0; only s = 3 is shipped.
    #[error("auxiliary-sum closed form implemented only at s = 3, got s = {s}")]
    UnsupportedOrder { s: f64 },
    /// Analytic continuation is implemented for s = −1 and s > 2 only.
    #[error("analytic continuation supports s = -1 or s > 2, got s = {s}")]
    UnsupportedArgument { s: f64 },
    /// A certified truncation could not be reached within the term budget.
    #[error("series budget exceeded in {route}: {terms} terms without meeting the tail certificate")]
    BudgetExceeded { route: &'static str, terms: usize },
    /// An underlying kernel or tail-correction quadrature failed.
    #[error("special-function evaluation failed: {0}")]
    SpecFun(#[from] SpecFunError),
}

/// Arguments of a lattice sum: Z₂(c₁, c₂; s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    /// First lattice scale (> 0).
    pub c1: f64,
    /// Second lattice scale (> 0).
    pub c2: f64,
    /// Exponent; the direct sum needs s > 2 to converge.
    pub s: f64,
}

impl LatticeParams {
    /// Validating constructor.
    pub fn new(c1: f64, c2: f64, s: f64) -> Result<Self, EpsteinError> {
        for value in [c1, c2] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(EpsteinError::NonPositiveScale { value });
            }
        }
        if !s.is_finite() {
            return Err(EpsteinError::UnsupportedArgument { s });
        }
        Ok(Self { c1, c2, s })
    }
}

/// Truncation policy for the series routes.
///
/// A sum stops only once its certified tail bound is below
/// `rel_tol · |accumulated value|`; the budgets bound the outer index (rows
/// of a double sum, or shells of the lattice sum) and the inner index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Target certified relative error, strictly inside (0, 1).
    pub rel_tol: f64,
    /// Outer-loop budget (rows / lattice shells).
    pub max_outer_terms: usize,
    /// Inner-loop budget (terms per row).
    pub max_inner_terms: usize,
}

impl SeriesControl {
    /// Validating constructor.
    pub fn new(
        rel_tol: f64,
        max_outer_terms: usize,
        max_inner_terms: usize,
    ) -> Result<Self, EpsteinError> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(EpsteinError::InvalidControl { rel_tol });
        }
        Ok(Self {
            rel_tol,
            max_outer_terms: max_outer_terms.max(1),
            max_inner_terms: max_inner_terms.max(1),
        })
    }

    pub(crate) fn validate(&self) -> Result<(), EpsteinError> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(EpsteinError::InvalidControl {
                rel_tol: self.rel_tol,
            });
        }
        Ok(())
    }

    /// Inner-loop stopping floor: a term is negligible once it falls two
    /// orders below the target relative error times the running partial.
    pub(crate) fn inner_floor(&self) -> f64 {
        self.rel_tol * 1e-2
    }
}

impl Default for SeriesControl {
    /// 1e−12 certified relative error with generous budgets; the
    /// exponentially convergent routes use ≲ 100 terms under this setting.
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_outer_terms: 100_000,
            max_inner_terms: 100_000,
        }
    }
}

/// Evaluation route for the auxiliary sum [`s_aux`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SAuxRoute {
    /// Literal definition: converges for s > 1, polynomially.
    DirectSum,
    /// Γ term plus K₁ corrections: s = 3 only, exponentially convergent.
    GammaBessel,
}

/// A truncated sum together with a rigorous bound on what was discarded.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CertifiedSum {
    pub value: f64,
    pub tail_bound: f64,
}

fn check_positive(value: f64) -> Result<f64, EpsteinError> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(EpsteinError::NonPositiveScale { value });
    }
    Ok(value)
}

/// Floor used in tail certificates when a Bessel factor has underflowed:
/// the true value is below this, so it is a valid (if loose) stand-in.
pub(crate) const UNDERFLOW_BOUND: f64 = 1e-300;

/// Σ_{j≥1, k≥1} (k/j)·K₁(x·j·k) with a certified tail bound.
///
/// Requires x ≥ ln 2 so that the inner geometric ratio
/// ((k+1)/k)·e^(−xj) is below 1 from k = 1 on; callers arrange x ≥ 2π.
/// All terms are positive. The inner loop stops when a term falls below
/// `rel_tol·partial·1e−2`, the outer loop when a row's first term does; the
/// discarded remainders are then bounded geometrically via
/// K₁(y + δ) ≤ K₁(y)·e^(−δ).
pub(crate) fn k1_ratio_sum(x: f64, ctrl: SeriesControl) -> Result<CertifiedSum, EpsteinError> {
    ctrl.validate()?;
    const ROUTE: &str = "(k/j)K1 double series";
    debug_assert!(x > std::f64::consts::LN_2);
    let floor = ctrl.inner_floor();
    let mut total = 0.0f64;
    let mut tail_bound = 0.0f64;
    let mut terms = 0usize;
    let mut j = 0usize;
    loop {
        j += 1;
        if j > ctrl.max_outer_terms {
            return Err(EpsteinError::BudgetExceeded {
                route: ROUTE,
                terms,
            });
        }
        let jf = j as f64;
        let first = bessel_k1(x * jf)?;
        let first_mag = if first.underflow {
            UNDERFLOW_BOUND
        } else {
            first.value
        };
        if j > 1 && first.value / jf <= floor * total {
            // candidate stopping point: bound the rows not yet summed.
            // Row i ≥ j is bounded by (K₁(xi)/i)·(1 − e^(−xi))^(−2) via
            // Σ_k k·q^(k−1) = (1 − q)^(−2), and successive row bounds
            // shrink by at least e^(−x).
            let geom = 1.0 / (1.0 - (-x * jf).exp()).powi(2);
            let rows_from_here = (first_mag / jf) * geom / (1.0 - (-x).exp());
            let candidate = tail_bound + rows_from_here;
            if total == 0.0 || candidate <= ctrl.rel_tol * total {
                return Ok(CertifiedSum {
                    value: total,
                    tail_bound: candidate,
                });
            }
            // certificate not met: sum this row too and try again
        }
        let mut k = 0usize;
        loop {
            k += 1;
            if k > ctrl.max_inner_terms {
                return Err(EpsteinError::BudgetExceeded {
                    route: ROUTE,
                    terms,
                });
            }
            let kf = k as f64;
            let eval = bessel_k1(x * jf * kf)?;
            let term = (kf / jf) * eval.value;
            total += term;
            terms += 1;
            if term <= floor * total && !(j == 1 && k == 1) {
                // discarded inner tail: terms shrink at least by
                // q = ((k+1)/k)·e^(−xj) per step
                let q = ((kf + 1.0) / kf) * (-x * jf).exp();
                let base = if eval.underflow {
                    (kf / jf) * UNDERFLOW_BOUND
                } else {
                    term
                };
                tail_bound += base * q / (1.0 - q);
                break;
            }
        }
    }
}

/// ζ(3), taken from the crate's own ζ implementation.
fn zeta3() -> f64 {
    riemann_zeta(3.0).expect("3 is not the zeta pole")
}

/// Z₂(a, b; 3) by the exponentially convergent closed form.
///
/// Evaluates 2π²/(3a²b) + (16π/(ab²))·Σ_{j,k≥1}(k/j)K₁(2πjk·a/b)
/// + 2ζ(3)/b³ after swapping arguments so that a ≥ b (the sum is symmetric,
/// and the swap keeps every Bessel argument ≥ 2π, so ~10 terms suffice).
/// Certified relative error ≤ `ctrl.rel_tol`.
///
/// # Errors
///
/// [`EpsteinError::NonPositiveScale`] for invalid sides,
/// [`EpsteinError::BudgetExceeded`] if the certificate cannot be met.
pub fn z2_s3_fast(a: f64, b: f64, ctrl: SeriesControl) -> Result<f64, EpsteinError> {
    let a = check_positive(a)?;
    let b = check_positive(b)?;
    ctrl.validate()?;
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    let series = k1_ratio_sum(2.0 * PI * a / b, ctrl)?;
    Ok(2.0 * PI * PI / (3.0 * a * a * b)
        + 16.0 * PI / (a * b * b) * series.value
        + 2.0 * zeta3() / (b * b * b))
}

/// Certified tail machinery for the direct lattice sum: exterior integral
/// of f(x, y) = (c₁²x² + c₂²y²)^(−s/2) over the complement of the square
/// [−α, α]², in polar form after rescaling to circular symmetry.
fn lattice_tail_integral(
    c1: f64,
    c2: f64,
    s: f64,
    alpha: f64,
) -> Result<f64, EpsteinError> {
    // ∫∫_(outside [−α,α]²) f = (1/(c₁c₂(s−2))) ∫₀^{2π} ρ(θ)^{2−s} dθ with
    // ρ(θ) = min(c₁α/|cos θ|, c₂α/|sin θ|); fourfold symmetry, kink at
    // tan θ* = c₂/c₁.
    let tol = ToleranceSpec::new(1e-13, 1e-300, 100_000)
        .expect("static tolerance literals are valid");
    let theta_star = (c2 / c1).atan();
    let lo = integrate_finite(
        |theta: f64| (c1 * alpha / theta.cos()).powf(2.0 - s),
        0.0,
        theta_star,
        &tol,
    )?;
    let hi = integrate_finite(
        |theta: f64| (c2 * alpha / theta.sin()).powf(2.0 - s),
        theta_star,
        PI / 2.0,
        &tol,
    )?;
    Ok(4.0 * (lo.value + hi.value) / (c1 * c2 * (s - 2.0)))
}

/// Midpoint-rule error certificate for replacing the lattice tail by the
/// integral: every discarded lattice point owns the unit cell centered on
/// it, and those cells tile exactly the integration region. Returns the
/// bound A/(1−A)·tail, or infinity when the shell radius is still too small
/// for the certificate to close (A ≥ 1).
fn lattice_tail_error(c1: f64, c2: f64, s: f64, alpha: f64, tail: f64) -> f64 {
    let cmin = c1.min(c2);
    // metric displacement within half a cell, and the resulting worst-case
    // ratio between a cell supremum and its center value
    let delta = (c1 * c1 + c2 * c2).sqrt() / 2.0;
    let rho_min = cmin * (alpha + 0.5);
    if delta >= 0.5 * rho_min {
        return f64::INFINITY;
    }
    let gamma = (1.0 - delta / rho_min).powf(-(s + 2.0));
    // |f_xx| + |f_yy| ≤ s(s+3)(c₁²+c₂²)·f/ρ² pointwise
    let a_factor =
        s * (s + 3.0) * (c1 * c1 + c2 * c2) * gamma / (24.0 * rho_min * rho_min);
    if a_factor >= 1.0 {
        return f64::INFINITY;
    }
    a_factor / (1.0 - a_factor) * tail
}

/// Z₂(c₁, c₂; s) by literal lattice summation (the slow oracle route).
///
/// Sums over squares of increasing max-norm radius, then replaces the rest
/// of the lattice by the exterior integral of the summand; the midpoint-rule
/// error of that replacement is bounded rigorously and must fall below
/// `ctrl.rel_tol` times the result before the function returns.
///
/// # Errors
///
/// [`EpsteinError::ConvergenceDomain`] unless s > 2,
/// [`EpsteinError::BudgetExceeded`] if the shell budget runs out first.
pub fn z2_direct(p: LatticeParams, ctrl: SeriesControl) -> Result<f64, EpsteinError> {
    let LatticeParams { c1, c2, s } = p;
    check_positive(c1)?;
    check_positive(c2)?;
    ctrl.validate()?;
    if !(s > 2.0) {
        return Err(EpsteinError::ConvergenceDomain { s, min: 2.0 });
    }
    let f = |j: f64, k: f64| (j * j * c1 * c1 + k * k * c2 * c2).powf(-s / 2.0);
    let cmin = c1.min(c2);

    let mut sum = 0.0f64;
    let mut comp = 0.0f64; // Kahan compensation across shells
    for n in 1..=ctrl.max_outer_terms {
        // shell max(|j|, |k|) = n, folded by the 4-fold lattice symmetry
        let nf = n as f64;
        let mut shell = 4.0 * f(nf, nf) + 2.0 * f(nf, 0.0) + 2.0 * f(0.0, nf);
        for i in 1..n {
            let ifl = i as f64;
            shell += 4.0 * (f(nf, ifl) + f(ifl, nf));
        }
        let y = shell - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;

        // cheap gate before paying for the tail quadrature: ρ(θ) ≥ cmin·α
        // bounds the exterior integral from above
        let alpha = nf + 0.5;
        let cheap_tail = 2.0 * PI * (cmin * alpha).powf(2.0 - s) / (c1 * c2 * (s - 2.0));
        if lattice_tail_error(c1, c2, s, alpha, cheap_tail) > ctrl.rel_tol * sum {
            continue;
        }
        let tail = lattice_tail_integral(c1, c2, s, alpha)?;
        let err = lattice_tail_error(c1, c2, s, alpha, tail);
        let total = sum + tail;
        if err <= ctrl.rel_tol * total.abs() {
            return Ok(total);
        }
    }
    Err(EpsteinError::BudgetExceeded {
        route: "direct lattice sum",
        terms: ctrl.max_outer_terms,
    })
}

/// The auxiliary sum S(m, a; s) in the requested realization.
///
/// * [`SAuxRoute::DirectSum`] — π^(−s/2)Γ(s/2)·[(m/π)^(−s)
///   + 2Σ_{n≥1}((m/π)² + (n/a)²)^(−s/2)], any s > 1 (certified midpoint
///   integral tail, same machinery as [`z2_direct`] in one dimension).
/// * [`SAuxRoute::GammaBessel`] — (aπ/m²)·[1 + 4Σ_{n≥1}(nma)K₁(2nma)],
///   the analytic continuation of the same sum; implemented at s = 3 only
///   (the implied Bessel order is (1−s)/2 = −1, and K₋₁ = K₁).
///
/// # Errors
///
/// [`EpsteinError::UnsupportedOrder`] for the Bessel route off s = 3;
/// [`EpsteinError::ConvergenceDomain`] for the direct route at s ≤ 1;
/// [`EpsteinError::BudgetExceeded`] when a certificate cannot be met.
pub fn s_aux(
    m: f64,
    a: f64,
    s: f64,
    route: SAuxRoute,
    ctrl: SeriesControl,
) -> Result<f64, EpsteinError> {
    let m = check_positive(m)?;
    let a = check_positive(a)?;
    ctrl.validate()?;
    match route {
        SAuxRoute::GammaBessel => {
            if s != 3.0 {
                return Err(EpsteinError::UnsupportedOrder { s });
            }
            s_aux_bessel(m, a, ctrl)
        }
        SAuxRoute::DirectSum => {
            if !(s > 1.0) {
                return Err(EpsteinError::ConvergenceDomain { s, min: 1.0 });
            }
            s_aux_direct(m, a, s, ctrl)
        }
    }
}

/// (aπ/m²)·[1 + 4Σ_{n≥1}(nma)K₁(2nma)] with geometric tail certificate.
fn s_aux_bessel(m: f64, a: f64, ctrl: SeriesControl) -> Result<f64, EpsteinError> {
    const ROUTE: &str = "auxiliary-sum Bessel series";
    let floor = ctrl.inner_floor();
    let ma = m * a;
    let mut bracket = 1.0f64;
    for n in 1..=ctrl.max_inner_terms {
        let nf = n as f64;
        let eval = bessel_k1(2.0 * nf * ma)?;
        let term = 4.0 * nf * ma * eval.value;
        bracket += term;
        if term <= floor * bracket {
            // terms shrink by at least q = ((n+1)/n)·e^(−2ma) once q < 1
            let q = ((nf + 1.0) / nf) * (-2.0 * ma).exp();
            if q < 1.0 {
                let base = if eval.underflow {
                    4.0 * nf * ma * UNDERFLOW_BOUND
                } else {
                    term
                };
                if base * q / (1.0 - q) <= ctrl.rel_tol * bracket {
                    return Ok(a * PI / (m * m) * bracket);
                }
            }
        }
    }
    Err(EpsteinError::BudgetExceeded {
        route: ROUTE,
        terms: ctrl.max_inner_terms,
    })
}

/// Literal definition of the auxiliary sum with a certified midpoint
/// integral tail (valid for s > 1).
fn s_aux_direct(m: f64, a: f64, s: f64, ctrl: SeriesControl) -> Result<f64, EpsteinError> {
    let c = m / PI;
    let g = |u: f64| (c * c + u * u).powf(-s / 2.0);
    let mut sum = 0.0f64;
    for n in 1..=ctrl.max_outer_terms {
        let nf = n as f64;
        sum += g(nf / a);
        let alpha = nf + 0.5;
        // cheap gate: the summand is below (u)^(−s)
        let cheap_tail = a.powf(s) * alpha.powf(1.0 - s) / (s - 1.0);
        let gamma = (alpha / (alpha - 0.5)).powf(s + 2.0);
        let a_factor = s * (s + 3.0) * gamma / (24.0 * alpha * alpha);
        if a_factor >= 1.0 || a_factor / (1.0 - a_factor) * cheap_tail > ctrl.rel_tol * sum {
            continue;
        }
        // exact tail integral ∫_α^∞ (c² + (x/a)²)^(−s/2) dx via x = ac·tan φ
        let tol = ToleranceSpec::new(1e-13, 1e-300, 100_000)
            .expect("static tolerance literals are valid");
        let phi0 = (alpha / (a * c)).atan();
        let integral = integrate_finite(
            |phi: f64| phi.cos().powf(s - 2.0),
            phi0,
            PI / 2.0,
            &tol,
        )?;
        let tail = a * c.powf(1.0 - s) * integral.value;
        let err = a_factor / (1.0 - a_factor) * tail;
        let tail_corrected = sum + tail;
        if err <= ctrl.rel_tol * tail_corrected {
            let prefactor = PI.powf(-s / 2.0) * crate::specfun::gamma(s / 2.0)?;
            return Ok(prefactor * (c.powf(-s) + 2.0 * tail_corrected));
        }
    }
    Err(EpsteinError::BudgetExceeded {
        route: "auxiliary-sum direct summation",
        terms: ctrl.max_outer_terms,
    })
}

/// Z₂(a, b; s) extended to s = −1 through the reflection formula.
///
/// For s > 2 this delegates to the convergent routes ([`z2_s3_fast`] at
/// s = 3, [`z2_direct`] otherwise, the latter certified to 1e−8). For
/// s = −1 it returns
/// Z₂(a, b; −1) = −Z₂(1/a, 1/b; 3)/(4π²ab),
/// which is the p = 2 reflection identity with Γ(3/2)/Γ(−1/2) = −1/4
/// inserted.
///
/// # Errors
///
/// [`EpsteinError::UnsupportedArgument`] outside s ∈ {−1} ∪ (2, ∞).
pub fn z2_continued(a: f64, b: f64, s: f64) -> Result<f64, EpsteinError> {
    let a = check_positive(a)?;
    let b = check_positive(b)?;
    if s == 3.0 {
        return z2_s3_fast(a, b, SeriesControl::default());
    }
    if s > 2.0 {
        // the literal sum converges slowly; 1e−8 keeps the shell count sane
        let ctrl = SeriesControl::new(1e-8, 100_000, 100_000)
            .expect("static control literals are valid");
        return z2_direct(LatticeParams::new(a, b, s)?, ctrl);
    }
    if s == -1.0 {
        let reflected = z2_s3_fast(1.0 / a, 1.0 / b, SeriesControl::default())?;
        return Ok(-reflected / (4.0 * PI * PI * a * b));
    }
    Err(EpsteinError::UnsupportedArgument { s })
}
