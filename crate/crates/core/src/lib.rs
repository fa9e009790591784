//! Numerical laboratory for the vacuum energy of a two-dimensional Dirichlet
//! rectangle and the force on a piston that divides it.
//!
//! The crate is layered bottom-up:
//!
//! * [`specfun`] — self-contained double-precision kernels: Γ, Riemann ζ,
//!   modified Bessel K₀/K₁ (plus K₁′), and adaptive Gauss–Kronrod quadrature
//!   over semi-infinite domains. Everything else is built on these, so they
//!   are hand-implemented rather than pulled from a third-party crate: the
//!   cross-route oracle tests are only meaningful if the routes share no code
//!   with their reference values.
//! * [`epstein`] — the two-dimensional lattice sum Z₂ in three independent
//!   realizations (direct sum, fast Bessel form, analytic continuation), plus
//!   the auxiliary one-dimensional sum used to derive the fast form.
//! * [`casimir`] — regularized compartment energy (two routes), the piston
//!   force (series, transformed series, finite difference), large- and
//!   small-separation asymptotics, and the critical aspect ratio where the
//!   rectangle's Casimir tension changes sign.
//! * [`cutoff`] — a smooth-cutoff mode-sum engine that exhibits the cubic and
//!   quadratic divergences explicitly, extracts the counterterm coefficients
//!   by least squares, and verifies the underlying integral identities.
//! * [`selftest`] — one entry point that runs every module invariant and
//!   reports pass/fail per item.
//!
//! Units are natural (ħ = c = 1): lengths are in the caller's unit, energies
//! in 1/length, forces in 1/length².

pub mod casimir;
pub mod cutoff;
pub mod epstein;
pub mod selftest;
pub mod specfun;

pub use casimir::{
    critical_ratio, energy_ar, force_alt, force_asym_large_a, force_asym_small_a,
    force_fd_finite_l, force_fd_infinite, force_finite_l, force_infinite,
    parallel_lines_tension, CasimirError, EnergyBreakdown, EnergyRoute, ForceRoute, ForceValue,
    Geometry, PistonGeometry, ASPECT_MAX, ASPECT_MIN, CRITICAL_BRACKET,
};

pub use cutoff::{
    abel_plana_check, c1_quadrature, c2_quadrature, energy_cutoff, fit_counterterms,
    identity_i_infinity, identity_sj3, AbelPlanaCase, CutoffError, CutoffFamily, CutoffSpec,
    FitReport,
};

pub use epstein::{
    s_aux, z2_continued, z2_direct, z2_s3_fast, EpsteinError, LatticeParams, SAuxRoute,
    SeriesControl,
};

pub use selftest::{run_selftest, SelftestItem, SelftestReport};

pub use specfun::{
    bessel_k, bessel_k0, bessel_k1, bessel_k1_prime, gamma, integrate_quadrant,
    integrate_semi_infinite, riemann_zeta, BesselEval, QuadratureResult, SpecFunError,
    ToleranceSpec,
};
