//! Design and analysis of multi-pulse dynamical-decoupling sequences for a
//! dephasing qubit under hard timing constraints.
//!
//! The crate computes the decoupling error of an arbitrary pi-pulse sequence
//! from a spectral measure of the noise, generates analytic UDD timings,
//! evaluates non-perturbative coherence-preservation bounds, and synthesizes
//! timing-constrained optimal sequences (BADD) along with the
//! duration-constrained variants LODD and OFDD.
//!
//! Conventions: time in picoseconds, angular frequency in rad/ps. All
//! operations are pure functions of immutable inputs and safe to call
//! concurrently.

// Parameter checks are written `!(x > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decoupling;
pub mod filterfn;
pub mod optimize;
pub mod quad;
pub mod sequences;
pub mod spectra;

pub use decoupling::{
    bound_cauchy, bound_fast_control, bound_slow_control, chi, chi_gradient, purity_loss,
    udd_upper_bounds, BoundParams, CauchyBound, ChiResult, DecouplingError, RegimeBound,
    UddUpperBounds, TAILORED_A_PRIME, TAILORED_C_PRIME,
};
pub use filterfn::{filter_l1_norm, filter_magnitude_sq, filter_value, filter_value_regrouped};
pub use optimize::{
    badd, badd_n_max, constrained_minimize, lodd, lodd_with_starts, multistart_points, ofdd,
    BaddResult, OptimizeError, OptimizedSequence, OptimizerConfig,
};
pub use quad::{quad_adaptive, quad_adaptive_panels, QuadError, QuadResult, QuadratureConfig};
pub use sequences::{tailored_udd_n, PulseSequence, SequenceError, TimingViolation};
pub use spectra::{
    measure_capital_m, measure_small_m, SpectraError, SpectralDensity, SpectralMeasure,
};
