//! Pseudo-spectral laboratory for mild solutions of the 3D incompressible
//! Navier-Stokes equations on a periodic box.
//!
//! The crate builds mild solutions `u = e^{t Lap} u0 + B(u, u)` by fixed-point
//! iteration, monitors the critical-norm hierarchy (`Hdot^{1/2}`, `L^3`,
//! space-time `E_T`, `F_T`, `L^5`, weighted sup, bmo^-1), and measures the
//! concentration-compactness diagnostics (profile orthogonality, Pythagorean
//! norm splitting, similarity-frame renormalization, local smallness and
//! local energy balance).
//!
//! Everything lives on the torus `[0, L)^3` with truncated Fourier series,
//! mean-zero fields, and viscosity fixed at 1. Continuum inequalities change
//! constants under this surrogate, so every inequality test in the crate
//! asserts boundedness or stability of measured ratios, never specific
//! constants.
//!
//! Fields are immutable values and all operations are pure; anything here may
//! be called concurrently from multiple threads.

// Validation guards use `!(x > 0.0)`-style comparisons on purpose: they
// reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Mode loops index several parallel arrays with one loop variable.
#![allow(clippy::needless_range_loop)]

pub mod contraction;
pub mod criticality;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod operators;
pub mod profiles;
pub mod snapshot;
pub mod solver;

pub use contraction::{
    estimate_eta, radius_bound, solve_fixed_point, BanachElement, BilinearFixedPointProblem,
    FixedPointResult,
};
pub use criticality::{
    decay_audit, e_norm, energy_audit, f_norm, l5_spacetime, local_energy_balance,
    local_smallness, record, trapezoid_error_bound, weighted_sup, CutoffSpec, DecayReport,
    NormRecord, WeightedSupReport,
};
pub use error::{
    AuditError, ContractionError, FieldError, GridError, OperatorError, ProfileError,
    SnapshotError, SolverError,
};
pub use field::{BmoMinus1Report, PhysicalField, ScalarField, SpectralField, TensorField};
pub use grid::GridSpec;
pub use operators::{
    curl, duhamel_bilinear, heat_semigroup,leray_project, nonlinear_term, nse_residual,
    nse_residual_field, oseen_apply, pressure_from_velocity, vorticity_residual,
    vorticity_residual_field, QuadratureKind, QuadratureRule,
};
pub use profiles::{
    compactness_diagnostic, inner_product_orthogonality, local_l2_mass, place_profile,
    pythagorean_defect, sample_datum, scale_solution, similarity_frame_track, superpose_profiles,
    AnalyticDatum, ProfileSpec, SimilarityFrame,
};
pub use solver::{
    cross_check_uniqueness, integrate_interval, solve, step, SolverConfig, TerminationReason,
    Trajectory,
};
