//! Field representations on the periodic box and all norm evaluations.
//!
//! A [`SpectralField`] stores a real 3-vector field through its truncated
//! Fourier coefficients, component-major with the last spatial axis
//! contiguous. The physical-space convention is
//!
//! ```text
//! u_c(x) = sum_k uhat_c(k) exp(i k' . x),   k' = (2 pi / L) k,
//! ```
//!
//! so real-valued fields satisfy the Hermitian symmetry
//! `uhat(-k) = conj(uhat(k))`. All fields are mean-zero: the `k = 0`
//! coefficient is identically zero, which keeps the homogeneous-norm
//! multipliers `|k'|^s` well-defined.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::FieldError;
use crate::fft::fft3;
use crate::grid::GridSpec;

/// Relative tolerance on the imaginary residue discarded by [`SpectralField::to_physical`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Minimum number of composite-midpoint nodes in the bmo^-1 time integral.
pub const BMO_TIME_NODES: usize = 16;

/// Supported homogeneous Sobolev exponent range.
pub const SOBOLEV_RANGE: (f64, f64) = (-2.0, 3.0);

/// Real divergence-capable 3-vector field stored as truncated Fourier
/// coefficients; the universal carrier for velocities, vorticities and
/// profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    /// Length `3 n^3`, component-major.
    coeffs: Vec<Complex64>,
}

/// Real 3-vector field sampled at the lattice points; quadrature carrier for
/// the Lebesgue norms.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: GridSpec,
    /// Length `3 n^3`, component-major.
    values: Vec<f64>,
}

/// Rank-2 tensor field in spectral representation, entries stored row-major
/// (`T_ij` at block `3 i + j`).
#[derive(Debug, Clone)]
pub struct TensorField {
    grid: GridSpec,
    /// Length `9 n^3`.
    coeffs: Vec<Complex64>,
}

/// Scalar field in spectral representation (the carrier for pressure).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    /// Length `n^3`.
    coeffs: Vec<Complex64>,
}

/// One rejected bmo^-1 probe: the ball of radius `sqrt(t)` would wrap the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmoProbeRejection {
    pub center: [f64; 3],
    pub time: f64,
}

/// Result of a bmo^-1 norm evaluation: the max over accepted probes plus the
/// diagnostics for rejected ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmoMinus1Report {
    pub value: f64,
    pub rejected: Vec<BmoProbeRejection>,
}

impl SpectralField {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); 3 * grid.point_count()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self, FieldError> {
        if coeffs.len() != 3 * grid.point_count() {
            return Err(FieldError::Malformed(format!(
                "coefficient count {} does not match 3 n^3 = {}",
                coeffs.len(),
                3 * grid.point_count()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Replace the grid tag; the coefficient array is reinterpreted on the new
    /// box. Used by the exact scaling relabelings.
    pub(crate) fn with_grid(mut self, grid: GridSpec) -> Self {
        debug_assert_eq!(self.grid.n(), grid.n());
        self.grid = grid;
        self
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n3 = self.grid.point_count();
        &self.coeffs[c * n3..(c + 1) * n3]
    }

    #[inline]
    pub fn coeff(&self, c: usize, m: usize) -> Complex64 {
        self.coeffs[c * self.grid.point_count() + m]
    }

    /// Add `value` into component `c` of the single mode `k`. The caller is
    /// responsible for keeping the overall field Hermitian-symmetric.
    pub fn add_mode(&mut self, k: [i64; 3], c: usize, value: Complex64) {
        let n3 = self.grid.point_count();
        let i = self.grid.mode_index(
            self.grid.index_of_frequency(k[0]),
            self.grid.index_of_frequency(k[1]),
            self.grid.index_of_frequency(k[2]),
        );
        self.coeffs[c * n3 + i] += value;
    }

    /// Set component `c` of mode `k` and its mirror `-k` to keep the field real.
    pub fn set_mode_pair(&mut self, k: [i64; 3], c: usize, value: Complex64) {
        let n3 = self.grid.point_count();
        let i = self.grid.mode_index(
            self.grid.index_of_frequency(k[0]),
            self.grid.index_of_frequency(k[1]),
            self.grid.index_of_frequency(k[2]),
        );
        let j = self.grid.mode_index(
            self.grid.index_of_frequency(-k[0]),
            self.grid.index_of_frequency(-k[1]),
            self.grid.index_of_frequency(-k[2]),
        );
        self.coeffs[c * n3 + i] = value;
        self.coeffs[c * n3 + j] = value.conj();
    }

    /// Largest violation of `uhat(-k) = conj(uhat(k))`, relative to the largest
    /// coefficient magnitude. Zero fields report zero.
    pub fn hermitian_violation(&self) -> f64 {
        let n = self.grid.n();
        let n3 = self.grid.point_count();
        let mut max_coeff: f64 = 0.0;
        for c in self.coeffs.iter() {
            max_coeff = max_coeff.max(c.norm());
        }
        if max_coeff == 0.0 {
            return 0.0;
        }
        let mirror = |i: usize| -> usize {
            if i == 0 {
                0
            } else {
                n - i
            }
        };
        let mut worst: f64 = 0.0;
        for comp in 0..3 {
            for i1 in 0..n {
                for i2 in 0..n {
                    for i3 in 0..n {
                        let m = self.grid.mode_index(i1, i2, i3);
                        let mm = self.grid.mode_index(mirror(i1), mirror(i2), mirror(i3));
                        if mm < m {
                            continue;
                        }
                        let a = self.coeffs[comp * n3 + m];
                        let b = self.coeffs[comp * n3 + mm];
                        worst = worst.max((a - b.conj()).norm());
                    }
                }
            }
        }
        worst / max_coeff
    }

    /// Divergence defect `max_k |k'.uhat(k)| / max_k |k'| |uhat(k)|`.
    ///
    /// The normalization is global rather than per-mode: round-off noise on
    /// coefficients near machine epsilon would otherwise dominate the ratio.
    pub fn divergence_defect(&self) -> f64 {
        let n3 = self.grid.point_count();
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for m in 1..n3 {
            let w = self.grid.wavevector(m);
            let u = [
                self.coeffs[m],
                self.coeffs[n3 + m],
                self.coeffs[2 * n3 + m],
            ];
            let dot = u[0] * w[0] + u[1] * w[1] + u[2] * w[2];
            let wnorm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
            let unorm = (u[0].norm_sqr() + u[1].norm_sqr() + u[2].norm_sqr()).sqrt();
            num = num.max(dot.norm());
            den = den.max(wnorm * unorm);
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// Magnitude of the mean (the `k = 0` coefficient), which the mean-zero
    /// convention requires to vanish.
    pub fn mean_magnitude(&self) -> f64 {
        let n3 = self.grid.point_count();
        (self.coeffs[0].norm_sqr()
            + self.coeffs[n3].norm_sqr()
            + self.coeffs[2 * n3].norm_sqr())
        .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Inverse transform to lattice values. The imaginary residue is discarded
    /// after asserting it stays below [`HERMITIAN_TOL`] relative to the field
    /// amplitude; a larger residue means the Hermitian symmetry precondition
    /// was violated.
    pub fn to_physical(&self) -> Result<PhysicalField, FieldError> {
        let n = self.grid.n();
        let n3 = self.grid.point_count();
        let mut values = vec![0.0f64; 3 * n3];
        let mut buf = vec![Complex64::default(); n3];
        let mut max_im: f64 = 0.0;
        let mut max_re: f64 = 0.0;
        for c in 0..3 {
            buf.copy_from_slice(&self.coeffs[c * n3..(c + 1) * n3]);
            fft3(&mut buf, n, true);
            for (dst, src) in values[c * n3..(c + 1) * n3].iter_mut().zip(buf.iter()) {
                *dst = src.re;
                max_im = max_im.max(src.im.abs());
                max_re = max_re.max(src.re.abs());
            }
        }
        if max_im > HERMITIAN_TOL * max_re.max(1e-300) && max_im > 1e-300 {
            return Err(FieldError::Malformed(format!(
                "imaginary residue {:.3e} exceeds {:.1e} of amplitude {:.3e}; field is not Hermitian-symmetric",
                max_im, HERMITIAN_TOL, max_re
            )));
        }
        Ok(PhysicalField {
            grid: self.grid,
            values,
        })
    }

    /// Homogeneous Sobolev norm
    /// `(sum_{k != 0} |k'|^{2s} |uhat(k)|^2 L^3)^{1/2}` for `s` in `[-2, 3]`.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64, FieldError> {
        if !(SOBOLEV_RANGE.0..=SOBOLEV_RANGE.1).contains(&s) {
            return Err(FieldError::ExponentOutOfRange(s));
        }
        let n3 = self.grid.point_count();
        let vol = self.grid.volume();
        let mut acc = 0.0;
        for m in 1..n3 {
            let k2 = self.grid.wavevector_sq(m);
            let mag = self.coeffs[m].norm_sqr()
                + self.coeffs[n3 + m].norm_sqr()
                + self.coeffs[2 * n3 + m].norm_sqr();
            if mag > 0.0 {
                acc += k2.powf(s) * mag;
            }
        }
        Ok((acc * vol).sqrt())
    }

    /// `Hdot^s` inner product `sum_{k != 0} |k'|^{2s} Re(uhat . conj(vhat)) L^3`.
    pub fn sobolev_inner(&self, other: &SpectralField, s: f64) -> Result<f64, FieldError> {
        if !(SOBOLEV_RANGE.0..=SOBOLEV_RANGE.1).contains(&s) {
            return Err(FieldError::ExponentOutOfRange(s));
        }
        self.grid.check_same(&other.grid)?;
        let n3 = self.grid.point_count();
        let vol = self.grid.volume();
        let mut acc = 0.0;
        for m in 1..n3 {
            let k2 = self.grid.wavevector_sq(m);
            let mut dot = 0.0;
            for c in 0..3 {
                let a = self.coeffs[c * n3 + m];
                let b = other.coeffs[c * n3 + m];
                dot += a.re * b.re + a.im * b.im;
            }
            if dot != 0.0 {
                acc += k2.powf(s) * dot;
            }
        }
        Ok(acc * vol)
    }

    /// Lebesgue norm by equal-weight lattice quadrature of the pointwise
    /// Euclidean magnitude; `p = infinity` is the lattice max.
    pub fn lebesgue_norm(&self, p: f64) -> Result<f64, FieldError> {
        if !(p >= 1.0) {
            return Err(FieldError::BadLebesgueExponent(p));
        }
        let phys = self.to_physical()?;
        Ok(phys.lebesgue_norm(p))
    }

    /// `L^p` distance `|self - other|_p`, transforming each field separately
    /// and differencing lattice values. Subtracting nearly equal spectral
    /// fields first would leave a residue that fails the Hermitian check
    /// relative to its own tiny scale; this route is stable.
    pub fn lebesgue_distance(&self, other: &SpectralField, p: f64) -> Result<f64, FieldError> {
        if !(p >= 1.0) {
            return Err(FieldError::BadLebesgueExponent(p));
        }
        self.grid.check_same(&other.grid)?;
        let a = self.to_physical()?;
        let b = other.to_physical()?;
        let n3 = self.grid.point_count();
        if p.is_infinite() {
            let mut max: f64 = 0.0;
            for m in 0..n3 {
                let d = [
                    a.values[m] - b.values[m],
                    a.values[n3 + m] - b.values[n3 + m],
                    a.values[2 * n3 + m] - b.values[2 * n3 + m],
                ];
                max = max.max((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt());
            }
            return Ok(max);
        }
        let mut acc = 0.0;
        for m in 0..n3 {
            let d = [
                a.values[m] - b.values[m],
                a.values[n3 + m] - b.values[n3 + m],
                a.values[2 * n3 + m] - b.values[2 * n3 + m],
            ];
            acc += (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).powf(p / 2.0);
        }
        Ok((acc * self.grid.cell_volume()).powf(1.0 / p))
    }

    /// Fractional Laplacian `D^s`: multiply each mode by `|k'|^s`; the zero
    /// mode stays zero.
    pub fn fractional_laplacian(&self, s: f64) -> Result<SpectralField, FieldError> {
        if !(SOBOLEV_RANGE.0..=SOBOLEV_RANGE.1).contains(&s) {
            return Err(FieldError::ExponentOutOfRange(s));
        }
        let n3 = self.grid.point_count();
        let mut out = self.clone();
        for m in 0..n3 {
            let factor = if m == 0 {
                0.0
            } else {
                self.grid.wavevector_sq(m).powf(s / 2.0)
            };
            for c in 0..3 {
                out.coeffs[c * n3 + m] *= factor;
            }
        }
        Ok(out)
    }

    /// Carleson-type bmo^-1 norm surrogate:
    /// `max over probes (x0, t) of t^{-3/2} int_0^t int_{B_sqrt(t)(x0)} |e^{s Lap} f|^2 dx ds`,
    /// heat flow and ball quadrature on the lattice, time integral by
    /// composite midpoint with [`BMO_TIME_NODES`] nodes. Probes whose ball
    /// would wrap the torus (`sqrt(t) > L/2`) are rejected with a diagnostic.
    pub fn bmo_minus1_norm(
        &self,
        horizon: f64,
        probe_centers: &[[f64; 3]],
        probe_times: &[f64],
    ) -> Result<BmoMinus1Report, FieldError> {
        if !(horizon > 0.0) {
            return Err(FieldError::BadHorizon(horizon));
        }
        if probe_centers.is_empty() || probe_times.is_empty() {
            return Err(FieldError::EmptyProbeSet);
        }
        let half_box = self.grid.box_length() / 2.0;
        let cell = self.grid.cell_volume();
        let n3 = self.grid.point_count();
        let mut value: f64 = 0.0;
        let mut rejected = Vec::new();
        for &t in probe_times {
            if !(t > 0.0 && t <= horizon) {
                return Err(FieldError::BadHorizon(t));
            }
            let radius = t.sqrt();
            if radius > half_box {
                for &c in probe_centers {
                    rejected.push(BmoProbeRejection { center: c, time: t });
                }
                continue;
            }
            let m_nodes = BMO_TIME_NODES;
            let dt = t / m_nodes as f64;
            // Per-center accumulators over the midpoint nodes.
            let mut per_center = vec![0.0f64; probe_centers.len()];
            for q in 0..m_nodes {
                let s = (q as f64 + 0.5) * dt;
                let flowed = crate::operators::heat_semigroup(self, s)
                    .expect("nonnegative time")
                    .to_physical()?;
                for (ci, &center) in probe_centers.iter().enumerate() {
                    let mut ball_sum = 0.0;
                    for m in 0..n3 {
                        let x = self.grid.point(m);
                        if self.grid.periodic_distance(x, center) < radius {
                            let v = [
                                flowed.values[m],
                                flowed.values[n3 + m],
                                flowed.values[2 * n3 + m],
                            ];
                            ball_sum += v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                        }
                    }
                    per_center[ci] += ball_sum * cell * dt;
                }
            }
            for acc in &per_center {
                value = value.max(acc * t.powf(-1.5));
            }
        }
        Ok(BmoMinus1Report { value, rejected })
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= factor;
        }
        out
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField, FieldError> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField, FieldError> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a -= b;
        }
        Ok(out)
    }

    /// Linear interpolation `(1 - w) self + w other`.
    pub(crate) fn lerp(&self, other: &SpectralField, w: f64) -> SpectralField {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a = (1.0 - w) * *a + w * b;
        }
        out
    }

    /// Zero all modes beyond the grid's dealias cutoff.
    pub fn dealiased(&self) -> SpectralField {
        let n3 = self.grid.point_count();
        let mut out = self.clone();
        for m in 0..n3 {
            if !self.grid.mode_retained(m) {
                for c in 0..3 {
                    out.coeffs[c * n3 + m] = Complex64::default();
                }
            }
        }
        out
    }
}

impl PhysicalField {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; 3 * grid.point_count()],
        }
    }

    /// Sample a closed-form vector field at the lattice points.
    pub fn sample<F: Fn([f64; 3]) -> [f64; 3]>(grid: GridSpec, f: F) -> Self {
        let n3 = grid.point_count();
        let mut values = vec![0.0; 3 * n3];
        for m in 0..n3 {
            let v = f(grid.point(m));
            values[m] = v[0];
            values[n3 + m] = v[1];
            values[2 * n3 + m] = v[2];
        }
        Self { grid, values }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != 3 * grid.point_count() {
            return Err(FieldError::Malformed(format!(
                "value count {} does not match 3 n^3 = {}",
                values.len(),
                3 * grid.point_count()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(FieldError::NonFinite("physical field values".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, c: usize, m: usize) -> f64 {
        self.values[c * self.grid.point_count() + m]
    }

    /// Forward transform. The zero mode (the lattice mean) is subtracted and
    /// its magnitude returned alongside the mean-zero spectral field.
    pub fn to_spectral(&self) -> (SpectralField, f64) {
        let n = self.grid.n();
        let n3 = self.grid.point_count();
        let scale = 1.0 / n3 as f64;
        let mut coeffs = vec![Complex64::default(); 3 * n3];
        let mut buf = vec![Complex64::default(); n3];
        let mut mean_sq = 0.0;
        for c in 0..3 {
            for (dst, src) in buf.iter_mut().zip(&self.values[c * n3..(c + 1) * n3]) {
                *dst = Complex64::new(*src, 0.0);
            }
            fft3(&mut buf, n, false);
            for (dst, src) in coeffs[c * n3..(c + 1) * n3].iter_mut().zip(buf.iter()) {
                *dst = src * scale;
            }
            mean_sq += coeffs[c * n3].norm_sqr();
            coeffs[c * n3] = Complex64::default();
        }
        (
            SpectralField {
                grid: self.grid,
                coeffs,
            },
            mean_sq.sqrt(),
        )
    }

    /// Equal-weight lattice quadrature of the pointwise Euclidean magnitude.
    pub fn lebesgue_norm(&self, p: f64) -> f64 {
        let n3 = self.grid.point_count();
        if p.is_infinite() {
            let mut max: f64 = 0.0;
            for m in 0..n3 {
                let v = [
                    self.values[m],
                    self.values[n3 + m],
                    self.values[2 * n3 + m],
                ];
                max = max.max((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt());
            }
            return max;
        }
        let cell = self.grid.cell_volume();
        let mut acc = 0.0;
        for m in 0..n3 {
            let v = [
                self.values[m],
                self.values[n3 + m],
                self.values[2 * n3 + m],
            ];
            let mag = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            acc += mag.powf(p);
        }
        (acc * cell).powf(1.0 / p)
    }
}

impl ScalarField {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.point_count()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self, FieldError> {
        if coeffs.len() != grid.point_count() {
            return Err(FieldError::Malformed(format!(
                "coefficient count {} does not match n^3 = {}",
                coeffs.len(),
                grid.point_count()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Lattice values by inverse transform, discarding the imaginary residue
    /// under the same tolerance as [`SpectralField::to_physical`].
    pub fn to_values(&self) -> Result<Vec<f64>, FieldError> {
        let n = self.grid.n();
        let mut buf = self.coeffs.clone();
        fft3(&mut buf, n, true);
        let mut max_im: f64 = 0.0;
        let mut max_re: f64 = 0.0;
        let values: Vec<f64> = buf
            .iter()
            .map(|c| {
                max_im = max_im.max(c.im.abs());
                max_re = max_re.max(c.re.abs());
                c.re
            })
            .collect();
        if max_im > HERMITIAN_TOL * max_re.max(1e-300) && max_im > 1e-300 {
            return Err(FieldError::Malformed(format!(
                "imaginary residue {:.3e} in scalar field; not Hermitian-symmetric",
                max_im
            )));
        }
        Ok(values)
    }

    /// Equal-weight lattice quadrature of `|p(x)|^p`; `p = infinity` is the max.
    pub fn lebesgue_norm(&self, p: f64) -> Result<f64, FieldError> {
        if !(p >= 1.0) {
            return Err(FieldError::BadLebesgueExponent(p));
        }
        let values = self.to_values()?;
        if p.is_infinite() {
            return Ok(values.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        }
        let cell = self.grid.cell_volume();
        let acc: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
        Ok((acc * cell).powf(1.0 / p))
    }

    /// Homogeneous Sobolev norm of the scalar field.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64, FieldError> {
        if !(SOBOLEV_RANGE.0..=SOBOLEV_RANGE.1).contains(&s) {
            return Err(FieldError::ExponentOutOfRange(s));
        }
        let mut acc = 0.0;
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            let mag = c.norm_sqr();
            if mag > 0.0 {
                acc += self.grid.wavevector_sq(m).powf(s) * mag;
            }
        }
        Ok((acc * self.grid.volume()).sqrt())
    }
}

impl TensorField {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); 9 * grid.point_count()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize, m: usize) -> Complex64 {
        self.coeffs[(3 * i + j) * self.grid.point_count() + m]
    }

    /// Entry `T_ij` as a standalone scalar field.
    pub fn entry_field(&self, i: usize, j: usize) -> ScalarField {
        let n3 = self.grid.point_count();
        ScalarField {
            grid: self.grid,
            coeffs: self.coeffs[(3 * i + j) * n3..(3 * i + j + 1) * n3].to_vec(),
        }
    }
}
