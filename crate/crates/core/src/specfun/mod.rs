//! Self-contained double-precision special functions and quadrature.
//!
//! Four kernels, all hand-implemented so that the higher layers can be tested
//! against genuinely independent references:
//!
//! * [`gamma`] — Lanczos approximation plus reflection.
//! * [`riemann_zeta`] — truncated Dirichlet series with an Euler–Maclaurin
//!   tail for s > 1, functional-equation reflection for s < 1.
//! * [`bessel_k0`]/[`bessel_k1`]/[`bessel_k1_prime`] — ascending series below
//!   the switch point x = 2, Steed continued fraction above it.
//! * [`integrate_semi_infinite`]/[`integrate_quadrant`] — adaptive 15-point
//!   Gauss–Kronrod after mapping `[lower, ∞)` onto a finite interval.
//!
//! All functions are pure; there is no global state.

mod bessel;
mod gamma;
mod quad;
mod zeta;

pub use bessel::{bessel_k, bessel_k0, bessel_k1, bessel_k1_prime, BesselEval};
pub use gamma::gamma;
pub use quad::{integrate_quadrant, integrate_semi_infinite};
pub(crate) use quad::integrate_finite;
pub use zeta::riemann_zeta;

use thiserror::Error;

/// Smallest admissible relative tolerance: double precision cannot honor
/// demands tighter than 2⁻⁵⁰ once a few rounding errors accumulate.
pub const MIN_REL_TOL: f64 = 8.881784197001252e-16; // 2^-50

/// Errors raised by the special-function layer.
#[derive(Debug, Clone, Error)]
pub enum SpecFunError {
    /// Γ has poles at 0, −1, −2, …
    #[error("gamma pole at nonpositive integer x = {x}")]
    GammaPole { x: f64 },
    /// Γ overflows double precision past x ≈ 171.6; arguments beyond ±170
    /// are rejected rather than silently returning ±inf.
    #[error("gamma argument x = {x} outside |x| <= 170 overflow guard")]
    GammaOverflow { x: f64 },
    /// ζ has a simple pole at s = 1.
    #[error("zeta pole at s = 1")]
    ZetaPole,
    /// K₀/K₁ are defined here for strictly positive real arguments.
    #[error("bessel argument x = {x} must be positive")]
    BesselDomain { x: f64 },
    /// Only orders 0 and 1 are implemented (all in-scope series use them).
    #[error("bessel order {order} not supported (only 0 and 1)")]
    BesselOrder { order: u8 },
    /// Tolerance specification outside the representable regime.
    #[error("invalid tolerance: rel_tol = {rel_tol} must lie in [2^-50, 1), abs_tol = {abs_tol} must be >= 0")]
    InvalidTolerance { rel_tol: f64, abs_tol: f64 },
    /// The adaptive quadrature ran out of budget; the best estimate and its
    /// error bound are carried along so callers can still inspect them.
    #[error("quadrature did not converge: value ~ {value}, error bound {error_estimate} after {evaluations} evaluations")]
    QuadratureNonConvergence {
        value: f64,
        error_estimate: f64,
        evaluations: usize,
    },
}

/// Result of an adaptive quadrature call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    /// Best estimate of the integral.
    pub value: f64,
    /// Conservative bound on the absolute error of `value`.
    pub error_estimate: f64,
    /// Number of integrand evaluations spent.
    pub evaluations: usize,
}

/// Accuracy/budget request for quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSpec {
    /// Target relative error (must lie in `[2^-50, 1)`).
    pub rel_tol: f64,
    /// Target absolute error; convergence requires the error bound to drop
    /// below `max(abs_tol, rel_tol * |value|)`.
    pub abs_tol: f64,
    /// Hard cap on integrand evaluations per 1-D solve.
    pub max_evals: usize,
}

impl ToleranceSpec {
    /// Validating constructor.
    pub fn new(rel_tol: f64, abs_tol: f64, max_evals: usize) -> Result<Self, SpecFunError> {
        if !(MIN_REL_TOL..1.0).contains(&rel_tol) || !(abs_tol >= 0.0) {
            return Err(SpecFunError::InvalidTolerance { rel_tol, abs_tol });
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_evals: max_evals.max(15),
        })
    }
}

impl Default for ToleranceSpec {
    /// 1e−10 relative, essentially-zero absolute floor, 200k evaluations:
    /// two digits of headroom above double-precision noise for every
    /// integral this crate evaluates.
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_evals: 200_000,
        }
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    /// Assert |a − b| ≤ tol·max(|a|, |b|); for expected-zero comparisons use
    /// `assert_close_abs`.
    pub fn assert_close(actual: f64, expected: f64, rel_tol: f64) {
        let scale = actual.abs().max(expected.abs());
        assert!(
            (actual - expected).abs() <= rel_tol * scale,
            "actual {actual:e} vs expected {expected:e}: |diff| = {:e} > {rel_tol:e} * {scale:e}",
            (actual - expected).abs()
        );
    }

    pub fn assert_close_abs(actual: f64, expected: f64, abs_tol: f64) {
        assert!(
            (actual - expected).abs() <= abs_tol,
            "actual {actual:e} vs expected {expected:e}: |diff| = {:e} > {abs_tol:e}",
            (actual - expected).abs()
        );
    }

    /// Small deterministic xorshift generator for reproducible randomized
    /// checks (no external RNG dependency in the core crate).
    pub struct TestRng(u64);

    impl TestRng {
        pub fn new(seed: u64) -> Self {
            Self(seed.max(1))
        }

        pub fn next_u64(&mut self) -> u64 {
            let mut x = self.0;
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            self.0 = x;
            x
        }

        /// Uniform draw from [lo, hi).
        pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
            let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            lo + u * (hi - lo)
        }
    }
}
