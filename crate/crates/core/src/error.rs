//! Error types shared across the crate.

use thiserror::Error;

/// Errors arising from grid construction or grid mismatches.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("n_modes must be even and >= 8, got {0}")]
    BadModeCount(usize),
    #[error("box length must be positive, got {0}")]
    BadBoxLength(f64),
    #[error("dealias fraction must lie in (0, 1], got {0}")]
    BadDealiasFraction(f64),
    #[error("grid mismatch: {0}")]
    Mismatch(String),
}

/// Errors from field validation, transforms and norm evaluation.
#[derive(Debug, Error)]
pub enum FieldError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("malformed field: {0}")]
    Malformed(String),
    #[error("Sobolev exponent {0} outside supported range [-2, 3]")]
    ExponentOutOfRange(f64),
    #[error("Lebesgue exponent must satisfy p >= 1, got {0}")]
    BadLebesgueExponent(f64),
    #[error("probe list must be nonempty")]
    EmptyProbeSet,
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

/// Errors from the Fourier-side operator layer.
#[derive(Debug, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("time argument must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("time argument must be strictly positive, got {0}")]
    NonPositiveTime(f64),
    #[error("quadrature rule needs at least 4 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("trajectory does not cover requested time {t}: covered [{lo}, {hi}]")]
    CoverageGap { t: f64, lo: f64, hi: f64 },
    #[error("time {0} must be interior to the trajectory for central differencing")]
    BoundaryTime(f64),
}

/// Errors from the fixed-point solver.
#[derive(Debug, Error)]
pub enum ContractionError {
    #[error("out of regime: 4*eta*|y| = {0} exceeds 1, no radius bound exists")]
    OutOfRegime(f64),
    #[error("eta must be positive, got {0}")]
    BadEta(f64),
    #[error("trial count must be >= 1")]
    NoTrials,
}

/// Errors from trajectory construction and the mild solver.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("initial datum is not divergence-free (defect {0:.3e})")]
    NotDivergenceFree(f64),
    #[error("step failed: inner Picard did not converge in {iterations} iterations (last delta {delta:.3e})")]
    StepFailure { iterations: usize, delta: f64 },
    #[error("non-finite coefficient after step at t = {0}")]
    NonFinite(f64),
    #[error("routes incomparable: {0}")]
    Incomparable(String),
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
}

/// Errors from profile placement and compactness diagnostics.
#[derive(Debug, Error)]
pub enum ProfileError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("profile scale {lambda} places support {support:.3} wider than half the box {half_box:.3}")]
    ProfileTooWide {
        lambda: f64,
        support: f64,
        half_box: f64,
    },
    #[error("scale factor must be positive, got {0}")]
    BadScale(f64),
    #[error("core {0:?} lies outside the box")]
    CoreOutsideBox([f64; 3]),
    #[error("zero profile has no normalized inner product")]
    ZeroProfile,
    #[error("zero superposition: Pythagorean defect undefined")]
    ZeroSuperposition,
    #[error("ball radius {r} exceeds half the box {half_box}")]
    BallTooLarge { r: f64, half_box: f64 },
    #[error("resampling out of representable range: relative scale {0}")]
    Unrepresentable(f64),
    #[error("frame undefined at requested time {0}")]
    FrameUndefined(f64),
}

/// Errors from the criticality audits.
#[derive(Debug, Error)]
pub enum AuditError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("trajectory does not cover requested time {t}: covered [{lo}, {hi}]")]
    CoverageGap { t: f64, lo: f64, hi: f64 },
    #[error("parabolic cylinder (r = {r}, t_end = {t_end}) not inside sampled range")]
    CylinderOutOfRange { r: f64, t_end: f64 },
    #[error("cylinder radius {r} exceeds L/4 = {quarter_box}")]
    CylinderTooLarge { r: f64, quarter_box: f64 },
    #[error("cutoff violates its support condition: {0}")]
    BadCutoff(String),
    #[error("record times must be nondecreasing: {prev} then {next}")]
    NonMonotoneTime { prev: f64, next: f64 },
}

/// Errors from the binary snapshot format.
#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected \"CRNS1\", got {0:?}")]
    BadMagic([u8; 5]),
    #[error("truncated file: expected {expected} bytes of coefficient data, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("field index {index} out of range: file holds {count} fields")]
    FieldIndexOutOfRange { index: usize, count: usize },
}
