//! Fourier-side realizations of the operators in the mild formulation.
//!
//! Everything here is a multiplier or a dealiased quadratic product:
//! the heat semigroup `e^{t Lap}`, the Leray projection `P`, the convective
//! divergence `div(u (x) u)`, the Duhamel bilinear form
//!
//! ```text
//! B(f, g)(t) = int_0^t e^{(t-s) Lap} P div(-f(s) (x) g(s)) ds ,
//! ```
//!
//! the one-pass Oseen operator `e^{t Lap} P div`, the pressure
//! `p = -(k'_i k'_j / |k'|^2) (u_i u_j)^` solving `-Lap p = d_i d_j (u_i u_j)`,
//! the curl, and the momentum / vorticity equation residuals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::OperatorError;
use crate::field::{ScalarField, SpectralField, TensorField};
use crate::grid::GridSpec;
use crate::solver::Trajectory;

/// Divergence-defect level above which [`nonlinear_term`] attaches a warning.
pub const DIVERGENCE_WARN_TOL: f64 = 1e-10;

const RESIDUAL_EPS: f64 = 1e-30;

/// Quadrature rule for the Duhamel time integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    Midpoint,
    GaussLegendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub nodes: usize,
}

impl QuadratureRule {
    pub fn new(kind: QuadratureKind, nodes: usize) -> Result<Self, OperatorError> {
        if nodes < 4 {
            return Err(OperatorError::TooFewNodes(nodes));
        }
        Ok(Self { kind, nodes })
    }

    pub fn gauss_legendre(nodes: usize) -> Result<Self, OperatorError> {
        Self::new(QuadratureKind::GaussLegendre, nodes)
    }

    pub fn midpoint(nodes: usize) -> Result<Self, OperatorError> {
        Self::new(QuadratureKind::Midpoint, nodes)
    }

    /// Nodes and weights on the interval `[a, b]`. All nodes are interior.
    pub fn nodes_weights(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let h = b - a;
        match self.kind {
            QuadratureKind::Midpoint => (0..self.nodes)
                .map(|i| {
                    let x = a + (i as f64 + 0.5) * h / self.nodes as f64;
                    (x, h / self.nodes as f64)
                })
                .collect(),
            QuadratureKind::GaussLegendre => gauss_legendre_unit(self.nodes)
                .into_iter()
                .map(|(x, w)| (a + 0.5 * h * (x + 1.0), 0.5 * h * w))
                .collect(),
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Precomputed heat multiplier `exp(-|k'|^2 t)` for one grid and time.
#[derive(Debug, Clone)]
pub(crate) struct HeatMultiplier {
    factors: Vec<f64>,
}

impl HeatMultiplier {
    pub(crate) fn new(grid: &GridSpec, t: f64) -> Self {
        let n3 = grid.point_count();
        let factors = (0..n3).map(|m| (-grid.wavevector_sq(m) * t).exp()).collect();
        Self { factors }
    }

    pub(crate) fn apply(&self, f: &mut SpectralField) {
        let n3 = self.factors.len();
        let coeffs = f.coeffs_mut();
        for c in 0..3 {
            for m in 0..n3 {
                coeffs[c * n3 + m] *= self.factors[m];
            }
        }
    }

    /// `dst += w * (multiplier . src)`.
    pub(crate) fn axpy_into(&self, dst: &mut SpectralField, w: f64, src: &SpectralField) {
        let n3 = self.factors.len();
        let d = dst.coeffs_mut();
        let s = src.coeffs();
        for c in 0..3 {
            for m in 0..n3 {
                d[c * n3 + m] += w * self.factors[m] * s[c * n3 + m];
            }
        }
    }
}

/// Heat semigroup `e^{t Lap}`: multiply each mode by `exp(-|k'|^2 t)`.
pub fn heat_semigroup(f: &SpectralField, t: f64) -> Result<SpectralField, OperatorError> {
    if !(t >= 0.0) {
        return Err(OperatorError::NegativeTime(t));
    }
    let mut out = f.clone();
    HeatMultiplier::new(f.grid(), t).apply(&mut out);
    Ok(out)
}

/// Leray projection onto divergence-free fields:
/// `uhat(k) -> uhat(k) - k' (k'.uhat(k)) / |k'|^2`.
pub fn leray_project(f: &SpectralField) -> SpectralField {
    let grid = *f.grid();
    let n3 = grid.point_count();
    let mut out = f.clone();
    let coeffs = out.coeffs_mut();
    for m in 1..n3 {
        let w = grid.wavevector(m);
        let k2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        let dot = coeffs[m] * w[0] + coeffs[n3 + m] * w[1] + coeffs[2 * n3 + m] * w[2];
        let scale = dot / k2;
        coeffs[m] -= scale * w[0];
        coeffs[n3 + m] -= scale * w[1];
        coeffs[2 * n3 + m] -= scale * w[2];
    }
    out
}

/// Dealiased tensor product `(f (x) g)_ij = f_i g_j` via physical-space
/// products. Inputs are truncated to the dealias band first, and the product
/// is truncated again, so retained modes carry no aliasing error.
pub fn tensor_product_dealiased(
    f: &SpectralField,
    g: &SpectralField,
) -> Result<TensorField, OperatorError> {
    f.grid().check_same(g.grid())?;
    let grid = *f.grid();
    let n3 = grid.point_count();
    let fp = f.dealiased().to_physical()?;
    let same = std::ptr::eq(f, g);
    let gp = if same {
        None
    } else {
        Some(g.dealiased().to_physical()?)
    };
    let gp_ref = gp.as_ref().unwrap_or(&fp);

    let mut tensor = TensorField::zero(grid);
    let mut prod = vec![Complex64::default(); n3];
    let scale = 1.0 / n3 as f64;
    for i in 0..3 {
        for j in 0..3 {
            if same && j < i {
                // Symmetric product: copy the transpose entry.
                let coeffs = tensor.coeffs_mut();
                let (src_start, dst_start) = ((3 * j + i) * n3, (3 * i + j) * n3);
                coeffs.copy_within(src_start..src_start + n3, dst_start);
                continue;
            }
            for m in 0..n3 {
                prod[m] = Complex64::new(fp.value(i, m) * gp_ref.value(j, m), 0.0);
            }
            crate::fft::fft3(&mut prod, grid.n(), false);
            let dst = &mut tensor.coeffs_mut()[(3 * i + j) * n3..(3 * i + j + 1) * n3];
            for m in 0..n3 {
                dst[m] = if grid.mode_retained(m) {
                    prod[m] * scale
                } else {
                    Complex64::default()
                };
            }
        }
    }
    Ok(tensor)
}

/// Spectral tensor divergence `(div T)_i = sum_j i k'_j That_ij`.
pub fn tensor_divergence(t: &TensorField) -> SpectralField {
    let grid = *t.grid();
    let n3 = grid.point_count();
    let mut out = SpectralField::zero(grid);
    let coeffs = out.coeffs_mut();
    for m in 1..n3 {
        let w = grid.wavevector(m);
        for i in 0..3 {
            let mut acc = Complex64::default();
            for j in 0..3 {
                acc += Complex64::new(0.0, w[j]) * t.entry(i, j, m);
            }
            coeffs[i * n3 + m] = acc;
        }
    }
    out
}

/// Convective divergence `div(u (x) u)` with dealiased products; no
/// input validation. Hot path shared by [`nonlinear_term`] and the solvers.
pub(crate) fn convective_divergence(u: &SpectralField) -> Result<SpectralField, OperatorError> {
    let tensor = tensor_product_dealiased(u, u)?;
    Ok(tensor_divergence(&tensor))
}

/// Result of [`nonlinear_term`]: the field `div(u (x) u)` plus a diagnostic
/// carrying the input divergence defect when it exceeds
/// [`DIVERGENCE_WARN_TOL`]. The result is returned either way.
#[derive(Debug, Clone)]
pub struct NonlinearTerm {
    pub field: SpectralField,
    pub divergence_warning: Option<f64>,
}

/// Nonlinearity `div(u (x) u)`, equal to `(u . grad) u` for divergence-free `u`.
pub fn nonlinear_term(u: &SpectralField) -> Result<NonlinearTerm, OperatorError> {
    let defect = u.divergence_defect();
    let field = convective_divergence(u)?;
    Ok(NonlinearTerm {
        field,
        divergence_warning: (defect > DIVERGENCE_WARN_TOL).then_some(defect),
    })
}

/// `P div(-u (x) u)`: the projected Duhamel integrand.
pub(crate) fn projected_nonlinearity(u: &SpectralField) -> Result<SpectralField, OperatorError> {
    Ok(leray_project(&convective_divergence(u)?).scaled(-1.0))
}

/// Duhamel bilinear form `B(f, g)(t)` with trajectory snapshots interpolated
/// linearly in time and the quadrature rule applied on each snapshot
/// interval intersected with `[0, t]`.
pub fn duhamel_bilinear(
    f_traj: &Trajectory,
    g_traj: &Trajectory,
    t: f64,
    q: &QuadratureRule,
) -> Result<SpectralField, OperatorError> {
    f_traj.grid().check_same(g_traj.grid())?;
    for traj in [f_traj, g_traj] {
        if !traj.covers(t) {
            return Err(OperatorError::CoverageGap {
                t,
                lo: traj.start_time(),
                hi: traj.end_time(),
            });
        }
    }
    let grid = *f_traj.grid();
    let mut acc = SpectralField::zero(grid);
    if t <= 0.0 {
        return Ok(acc);
    }
    let same = std::ptr::eq(f_traj, g_traj);
    // Composite quadrature over the snapshot lattice of f.
    let times = f_traj.times();
    let mut lo = times[0];
    let mut idx = 0;
    while lo < t - 1e-15 * t.max(1.0) {
        let hi = if idx + 1 < times.len() {
            times[idx + 1].min(t)
        } else {
            t
        };
        for (s, w) in q.nodes_weights(lo, hi) {
            let fs = f_traj.interp(s)?;
            let tensor = if same {
                tensor_product_dealiased(&fs, &fs)?
            } else {
                let gs = g_traj.interp(s)?;
                tensor_product_dealiased(&fs, &gs)?
            };
            let integrand = leray_project(&tensor_divergence(&tensor)).scaled(-1.0);
            HeatMultiplier::new(&grid, t - s).axpy_into(&mut acc, w, &integrand);
        }
        idx += 1;
        lo = hi;
    }
    Ok(acc)
}

/// One-pass Oseen operator `e^{t Lap} P div` acting on a tensor field.
pub fn oseen_apply(g: &TensorField, t: f64) -> Result<SpectralField, OperatorError> {
    if !(t > 0.0) {
        return Err(OperatorError::NonPositiveTime(t));
    }
    let grid = *g.grid();
    let n3 = grid.point_count();
    let mut out = SpectralField::zero(grid);
    let coeffs = out.coeffs_mut();
    for m in 1..n3 {
        let w = grid.wavevector(m);
        let k2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        let heat = (-k2 * t).exp();
        // d_i = i k'_j G_ij
        let mut d = [Complex64::default(); 3];
        for i in 0..3 {
            for j in 0..3 {
                d[i] += Complex64::new(0.0, w[j]) * g.entry(i, j, m);
            }
        }
        let dot = d[0] * w[0] + d[1] * w[1] + d[2] * w[2];
        for i in 0..3 {
            coeffs[i * n3 + m] = heat * (d[i] - dot / k2 * w[i]);
        }
    }
    Ok(out)
}

/// Pressure recovered from the velocity:
/// `phat(k) = -(k'_i k'_j / |k'|^2) (u_i u_j)^(k)` with dealiased products and
/// zero mean, so that `-Lap p = d_i d_j (u_i u_j)`.
pub fn pressure_from_velocity(u: &SpectralField) -> Result<ScalarField, OperatorError> {
    let grid = *u.grid();
    let n3 = grid.point_count();
    let tensor = tensor_product_dealiased(u, u)?;
    let mut out = ScalarField::zero(grid);
    let coeffs = out.coeffs_mut();
    for m in 1..n3 {
        let w = grid.wavevector(m);
        let k2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        let mut acc = Complex64::default();
        for i in 0..3 {
            for j in 0..3 {
                acc += w[i] * w[j] * tensor.entry(i, j, m);
            }
        }
        coeffs[m] = -acc / k2;
    }
    Ok(out)
}

/// Curl `omegahat(k) = i k' x uhat(k)`; exactly divergence-free.
pub fn curl(u: &SpectralField) -> SpectralField {
    let grid = *u.grid();
    let n3 = grid.point_count();
    let mut out = SpectralField::zero(grid);
    let coeffs = out.coeffs_mut();
    for m in 1..n3 {
        let w = grid.wavevector(m);
        let v = [u.coeff(0, m), u.coeff(1, m), u.coeff(2, m)];
        let i = Complex64::new(0.0, 1.0);
        coeffs[m] = i * (w[1] * v[2] - w[2] * v[1]);
        coeffs[n3 + m] = i * (w[2] * v[0] - w[0] * v[2]);
        coeffs[2 * n3 + m] = i * (w[0] * v[1] - w[1] * v[0]);
    }
    out
}

/// Gradient of a scalar field: `i k' phat`.
pub fn gradient(p: &ScalarField) -> SpectralField {
    let grid = *p.grid();
    let n3 = grid.point_count();
    let mut out = SpectralField::zero(grid);
    let coeffs = out.coeffs_mut();
    for m in 1..n3 {
        let w = grid.wavevector(m);
        let v = p.coeffs()[m];
        for c in 0..3 {
            coeffs[c * n3 + m] = Complex64::new(0.0, w[c]) * v;
        }
    }
    out
}

/// Laplacian: multiply each mode by `-|k'|^2`.
pub fn laplacian(u: &SpectralField) -> SpectralField {
    let grid = *u.grid();
    let n3 = grid.point_count();
    let mut out = u.clone();
    let coeffs = out.coeffs_mut();
    for m in 0..n3 {
        let k2 = grid.wavevector_sq(m);
        for c in 0..3 {
            coeffs[c * n3 + m] *= -k2;
        }
    }
    out
}

fn central_difference_indices(traj: &Trajectory, t: f64) -> Result<usize, OperatorError> {
    let j = traj
        .index_at(t)
        .ok_or(OperatorError::CoverageGap {
            t,
            lo: traj.start_time(),
            hi: traj.end_time(),
        })?;
    if j == 0 || j + 1 >= traj.times().len() {
        return Err(OperatorError::BoundaryTime(t));
    }
    Ok(j)
}

/// Momentum-equation residual field `u_t + div(u (x) u) - Lap u + grad p`
/// with `u_t` by central differencing around the interior lattice time `t`.
pub fn nse_residual_field(traj: &Trajectory, t: f64) -> Result<SpectralField, OperatorError> {
    let j = central_difference_indices(traj, t)?;
    let times = traj.times();
    let u = &traj.snapshots()[j];
    let dt2 = times[j + 1] - times[j - 1];
    let mut res = traj.snapshots()[j + 1].sub(&traj.snapshots()[j - 1]).map_err(OperatorError::Field)?;
    res = res.scaled(1.0 / dt2);
    res = res.add(&convective_divergence(u)?).map_err(OperatorError::Field)?;
    res = res.sub(&laplacian(u)).map_err(OperatorError::Field)?;
    let p = pressure_from_velocity(u)?;
    res = res.add(&gradient(&p)).map_err(OperatorError::Field)?;
    Ok(res)
}

/// L2 norm of the momentum residual at `t`, normalized by `|u(t)|_{Hdot^1}`.
pub fn nse_residual(traj: &Trajectory, t: f64) -> Result<f64, OperatorError> {
    let j = central_difference_indices(traj, t)?;
    let res = nse_residual_field(traj, t)?;
    let norm = res.sobolev_norm(0.0).map_err(OperatorError::Field)?;
    let scale = traj.snapshots()[j]
        .sobolev_norm(1.0)
        .map_err(OperatorError::Field)?;
    Ok(norm / (scale + RESIDUAL_EPS))
}

/// Vorticity-equation residual field
/// `w_t - Lap w + div(w (x) u) - div(u (x) w)` where `w = curl u`; the two
/// tensor terms realize `(u . grad) w` and `(w . grad) u` for divergence-free
/// `u` and `w`.
pub fn vorticity_residual_field(
    traj: &Trajectory,
    t: f64,
) -> Result<SpectralField, OperatorError> {
    let j = central_difference_indices(traj, t)?;
    let times = traj.times();
    let u = &traj.snapshots()[j];
    let w = curl(u);
    let w_prev = curl(&traj.snapshots()[j - 1]);
    let w_next = curl(&traj.snapshots()[j + 1]);
    let dt2 = times[j + 1] - times[j - 1];
    let mut res = w_next.sub(&w_prev).map_err(OperatorError::Field)?.scaled(1.0 / dt2);
    res = res.sub(&laplacian(&w)).map_err(OperatorError::Field)?;
    let stretch = tensor_divergence(&tensor_product_dealiased(&w, u)?);
    let transport = tensor_divergence(&tensor_product_dealiased(u, &w)?);
    res = res.add(&stretch).map_err(OperatorError::Field)?;
    res = res.sub(&transport).map_err(OperatorError::Field)?;
    Ok(res)
}

/// L2 norm of the vorticity residual at `t`, normalized by `|w(t)|_{Hdot^1}`.
pub fn vorticity_residual(traj: &Trajectory, t: f64) -> Result<f64, OperatorError> {
    let j = central_difference_indices(traj, t)?;
    let res = vorticity_residual_field(traj, t)?;
    let norm = res.sobolev_norm(0.0).map_err(OperatorError::Field)?;
    let scale = curl(&traj.snapshots()[j])
        .sobolev_norm(1.0)
        .map_err(OperatorError::Field)?;
    Ok(norm / (scale + RESIDUAL_EPS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PhysicalField;
    use num_complex::Complex64;

    fn grid_2pi(n: usize) -> GridSpec {
        GridSpec::new(n, 2.0 * std::f64::consts::PI).unwrap()
    }

    fn random_divfree(grid: GridSpec, seed: u64) -> SpectralField {
        let datum = crate::profiles::AnalyticDatum::BandLimitedRandom {
            seed,
            spectrum_slope: -1.0,
            k_min: 1,
            k_max: 3,
            amplitude: 0.3,
            period: grid.box_length(),
        };
        crate::profiles::sample_datum(&datum, &grid).unwrap()
    }

    /// Taylor-Green field in the phase `(sin x1 cos x2, -cos x1 sin x2, 0)`,
    /// whose convective term is grad(-(cos 2x1 + cos 2x2)/4).
    fn taylor_green_sin_phase(grid: GridSpec) -> SpectralField {
        PhysicalField::sample(grid, |x| {
            [x[0].sin() * x[1].cos(), -(x[0].cos()) * x[1].sin(), 0.0]
        })
        .to_spectral()
        .0
    }

    fn gradient_of_scalar(grid: GridSpec, f: impl Fn([f64; 3]) -> [f64; 3]) -> SpectralField {
        PhysicalField::sample(grid, f).to_spectral().0
    }

    #[test]
    fn heat_semigroup_examples() {
        let g = grid_2pi(16);
        let mut f = SpectralField::zero(g);
        f.set_mode_pair([1, 0, 0], 1, Complex64::new(0.5, 0.0));
        // t = 0 is the identity.
        let same = heat_semigroup(&f, 0.0).unwrap();
        assert_eq!(same.coeffs(), f.coeffs());
        // |k'| = 1 mode decays by e^{-1} at t = 1.
        let flowed = heat_semigroup(&f, 1.0).unwrap();
        let idx = g.mode_index(1, 0, 0);
        let expected = 0.5 * (-1.0f64).exp();
        assert!((flowed.coeff(1, idx).re - expected).abs() < 1e-14);
        assert!(heat_semigroup(&f, -0.1).is_err());
    }

    #[test]
    fn heat_semigroup_law_and_norm_monotonicity() {
        let g = grid_2pi(16);
        let f = random_divfree(g, 7);
        let two_step = heat_semigroup(&heat_semigroup(&f, 0.3).unwrap(), 0.45).unwrap();
        let one_step = heat_semigroup(&f, 0.75).unwrap();
        let diff = two_step.sub(&one_step).unwrap().sobolev_norm(0.0).unwrap();
        assert!(diff < 1e-12 * one_step.sobolev_norm(0.0).unwrap().max(1e-30));
        for s in [-1.0, 0.0, 0.5, 1.5, 3.0] {
            let before = f.sobolev_norm(s).unwrap();
            let after = heat_semigroup(&f, 0.2).unwrap().sobolev_norm(s).unwrap();
            assert!(after <= before * (1.0 + 1e-14));
        }
    }

    #[test]
    fn leray_annihilates_gradients_and_fixes_divergence_free() {
        let g = grid_2pi(16);
        // grad phi with phi = sin x1 cos x3.
        let grad = gradient_of_scalar(g, |x| {
            [
                x[0].cos() * x[2].cos(),
                0.0,
                -(x[0].sin()) * x[2].sin(),
            ]
        });
        let projected = leray_project(&grad);
        let scale = grad.sobolev_norm(0.0).unwrap();
        assert!(projected.sobolev_norm(0.0).unwrap() < 1e-12 * scale);

        let f = random_divfree(g, 3);
        let fixed = leray_project(&f);
        let diff = fixed.sub(&f).unwrap().sobolev_norm(0.0).unwrap();
        assert!(diff < 1e-12 * f.sobolev_norm(0.0).unwrap());
    }

    #[test]
    fn leray_idempotent_and_self_adjoint_on_random_fields() {
        let g = grid_2pi(16);
        // Non-divergence-free random field: mix a solenoidal field and a gradient.
        let f = random_divfree(g, 11)
            .add(&gradient_of_scalar(g, |x| {
                [x[1].cos() * 0.3, -(x[0].sin()) * 0.2, 0.0]
            }))
            .unwrap();
        let h = random_divfree(g, 12)
            .add(&gradient_of_scalar(g, |x| [0.0, x[2].cos() * 0.5, -(x[1].sin())]))
            .unwrap();
        let pf = leray_project(&f);
        let ppf = leray_project(&pf);
        let idem = ppf.sub(&pf).unwrap().sobolev_norm(0.0).unwrap();
        assert!(idem < 1e-12 * pf.sobolev_norm(0.0).unwrap());
        assert!(pf.divergence_defect() < 1e-12);
        // <P f, h> = <f, P h> in the L2 mode inner product.
        let lhs = pf.sobolev_inner(&h, 0.0).unwrap();
        let rhs = f.sobolev_inner(&leray_project(&h), 0.0).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(rhs.abs()).max(1e-30));
    }

    #[test]
    fn nonlinear_term_zero_and_taylor_green_gradient() {
        let g = grid_2pi(32);
        let zero = SpectralField::zero(g);
        let out = nonlinear_term(&zero).unwrap();
        assert!(out.field.coeffs().iter().all(|c| c.norm() == 0.0));
        assert!(out.divergence_warning.is_none());

        // The convective term of the Taylor-Green array is a pure gradient,
        // so the Leray projection kills it.
        let tg = taylor_green_sin_phase(g);
        let conv = nonlinear_term(&tg).unwrap();
        assert!(conv.divergence_warning.is_none());
        let projected = leray_project(&conv.field);
        let scale = conv.field.sobolev_norm(0.0).unwrap();
        assert!(projected.sobolev_norm(0.0).unwrap() < 1e-12 * scale);
        // And it matches grad(-(cos 2x1 + cos 2x2)/4) directly.
        let expected = gradient_of_scalar(g, |x| {
            [(2.0 * x[0]).sin() / 2.0, (2.0 * x[1]).sin() / 2.0, 0.0]
        });
        let diff = conv.field.sub(&expected).unwrap().sobolev_norm(0.0).unwrap();
        assert!(diff < 1e-12 * scale);
    }

    #[test]
    fn nonlinear_term_warns_on_divergent_input() {
        let g = grid_2pi(16);
        let grad = gradient_of_scalar(g, |x| [x[0].cos(), 0.0, 0.0]);
        let out = nonlinear_term(&grad).unwrap();
        assert!(out.divergence_warning.is_some());
    }

    /// Finite-difference oracle for (u . grad) u: centered differences of
    /// 8th order so the oracle itself resolves band-limited data to 1e-6.
    fn convective_fd_oracle(u: &SpectralField, order2: bool) -> Vec<f64> {
        let grid = *u.grid();
        let n = grid.n();
        let n3 = grid.point_count();
        let phys = u.to_physical().unwrap();
        let h = grid.spacing();
        // Stencil coefficients for the first derivative.
        let stencil: Vec<(i64, f64)> = if order2 {
            vec![(-1, -0.5), (1, 0.5)]
        } else {
            vec![
                (-4, 1.0 / 280.0),
                (-3, -4.0 / 105.0),
                (-2, 1.0 / 5.0),
                (-1, -4.0 / 5.0),
                (1, 4.0 / 5.0),
                (2, -1.0 / 5.0),
                (3, 4.0 / 105.0),
                (4, -1.0 / 280.0),
            ]
        };
        let wrap = |i: i64| -> usize { i.rem_euclid(n as i64) as usize };
        let mut out = vec![0.0; 3 * n3];
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    let m = grid.mode_index(i1, i2, i3);
                    let v = [phys.value(0, m), phys.value(1, m), phys.value(2, m)];
                    for c in 0..3 {
                        let mut acc = 0.0;
                        for axis in 0..3 {
                            let mut d = 0.0;
                            for &(off, w) in &stencil {
                                let (j1, j2, j3) = match axis {
                                    0 => (wrap(i1 as i64 + off), i2, i3),
                                    1 => (i1, wrap(i2 as i64 + off), i3),
                                    _ => (i1, i2, wrap(i3 as i64 + off)),
                                };
                                d += w * phys.value(c, grid.mode_index(j1, j2, j3));
                            }
                            acc += v[axis] * d / h;
                        }
                        out[c * n3 + m] = acc;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn nonlinear_term_matches_finite_difference_oracle() {
        let g = grid_2pi(64);
        let u = random_divfree(g, 21);
        let spectral = nonlinear_term(&u).unwrap().field.to_physical().unwrap();
        let oracle = convective_fd_oracle(&u, false);
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in spectral.values().iter().zip(oracle.iter()) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        let rel = (num / den).sqrt();
        assert!(rel < 1e-6, "relative error {rel}");
        // The plain second-order oracle converges at order 2.
        let coarse = {
            let g = grid_2pi(32);
            let u = random_divfree(g, 21);
            let spectral = nonlinear_term(&u).unwrap().field.to_physical().unwrap();
            let oracle = convective_fd_oracle(&u, true);
            let mut num = 0.0;
            let mut den = 0.0;
            for (a, b) in spectral.values().iter().zip(oracle.iter()) {
                num += (a - b) * (a - b);
                den += b * b;
            }
            (num / den).sqrt()
        };
        let fine = {
            let spectral = nonlinear_term(&u).unwrap().field.to_physical().unwrap();
            let oracle = convective_fd_oracle(&u, true);
            let mut num = 0.0;
            let mut den = 0.0;
            for (a, b) in spectral.values().iter().zip(oracle.iter()) {
                num += (a - b) * (a - b);
                den += b * b;
            }
            (num / den).sqrt()
        };
        let order = (coarse / fine).log2();
        assert!(order > 1.8, "FD oracle order {order}");
    }

    #[test]
    fn oseen_equals_three_step_pipeline() {
        let g = grid_2pi(16);
        let f = random_divfree(g, 31);
        let h = random_divfree(g, 32);
        let tensor = tensor_product_dealiased(&f, &h).unwrap();
        let zero = TensorField::zero(g);
        assert!(oseen_apply(&zero, 0.5)
            .unwrap()
            .coeffs()
            .iter()
            .all(|c| c.norm() == 0.0));
        assert!(oseen_apply(&tensor, 0.0).is_err());
        for t in [0.05, 0.4, 1.3] {
            let one_pass = oseen_apply(&tensor, t).unwrap();
            let pipeline =
                heat_semigroup(&leray_project(&tensor_divergence(&tensor)), t).unwrap();
            let diff = one_pass.sub(&pipeline).unwrap().sobolev_norm(0.0).unwrap();
            assert!(diff < 1e-12 * pipeline.sobolev_norm(0.0).unwrap().max(1e-30));
        }
    }

    #[test]
    fn oseen_weighted_decay_ratio_stays_bounded() {
        // |e^{t Lap} P div G|_inf * sqrt(t) / |G|_inf bounded over a t-sweep.
        let g = grid_2pi(16);
        let f = random_divfree(g, 41);
        let h = random_divfree(g, 42);
        let tensor = tensor_product_dealiased(&f, &h).unwrap();
        let n3 = g.point_count();
        let mut tensor_max: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut buf: Vec<Complex64> =
                    tensor.coeffs()[(3 * i + j) * n3..(3 * i + j + 1) * n3].to_vec();
                crate::fft::fft3(&mut buf, g.n(), true);
                for z in &buf {
                    tensor_max = tensor_max.max(z.re.abs());
                }
            }
        }
        let mut ratios = Vec::new();
        for &t in &[1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0] {
            let out = oseen_apply(&tensor, t).unwrap();
            let sup = out.lebesgue_norm(f64::INFINITY).unwrap();
            ratios.push(sup * t.sqrt() / tensor_max);
        }
        let max = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(max.is_finite() && max < 50.0, "ratios {ratios:?}");
    }

    #[test]
    fn pressure_zero_and_taylor_green_oracle() {
        let g = grid_2pi(32);
        let zero = SpectralField::zero(g);
        assert!(pressure_from_velocity(&zero)
            .unwrap()
            .coeffs()
            .iter()
            .all(|c| c.norm() == 0.0));

        // Canonical Taylor-Green phase: p = -(cos 2x1 + cos 2x2)/4, the
        // solution of -Lap p = d_i d_j (u_i u_j).
        let datum = crate::profiles::AnalyticDatum::taylor_green(g.box_length());
        let tg = crate::profiles::sample_datum(&datum, &g).unwrap();
        let p = pressure_from_velocity(&tg).unwrap();
        let values = p.to_values().unwrap();
        let mut worst: f64 = 0.0;
        for m in 0..g.point_count() {
            let x = g.point(m);
            let expected = -((2.0 * x[0]).cos() + (2.0 * x[1]).cos()) / 4.0;
            worst = worst.max((values[m] - expected).abs());
        }
        assert!(worst < 1e-12, "pressure error {worst}");
    }

    #[test]
    fn pressure_l32_ratio_stable_under_refinement() {
        // |p|_{3/2} <= C |u|_3^2 with measured C stable across grids.
        let mut ratios = Vec::new();
        for n in [16, 24, 32] {
            let g = grid_2pi(n);
            let mut worst: f64 = 0.0;
            for seed in 0..5 {
                let u = random_divfree(g, 100 + seed);
                let p = pressure_from_velocity(&u).unwrap();
                let num = p.lebesgue_norm(1.5).unwrap();
                let den = u.lebesgue_norm(3.0).unwrap().powi(2);
                worst = worst.max(num / den);
            }
            ratios.push(worst);
        }
        let max = ratios.iter().cloned().fold(0.0f64, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            max / min < 1.2,
            "pressure ratio unstable under refinement: {ratios:?}"
        );
    }

    #[test]
    fn curl_examples_and_vector_identity() {
        let g = grid_2pi(32);
        let grad = gradient_of_scalar(g, |x| {
            [x[0].cos() * 0.7, -(x[1].sin()) * 0.4, x[2].cos()]
        });
        let curled = curl(&grad);
        assert!(curled.sobolev_norm(0.0).unwrap() < 1e-12 * grad.sobolev_norm(0.0).unwrap());

        // Canonical Taylor-Green: omega = (0, 0, -2 cos x1 cos x2).
        let datum = crate::profiles::AnalyticDatum::taylor_green(g.box_length());
        let tg = crate::profiles::sample_datum(&datum, &g).unwrap();
        let omega = curl(&tg).to_physical().unwrap();
        let n3 = g.point_count();
        let mut worst: f64 = 0.0;
        for m in 0..n3 {
            let x = g.point(m);
            let expected = -2.0 * x[0].cos() * x[1].cos();
            worst = worst.max((omega.value(2, m) - expected).abs());
            worst = worst.max(omega.value(0, m).abs());
            worst = worst.max(omega.value(1, m).abs());
        }
        assert!(worst < 1e-12, "curl error {worst}");

        // curl curl = -Lap on divergence-free fields.
        let u = random_divfree(g, 55);
        let twice = curl(&curl(&u));
        let neg_lap = laplacian(&u).scaled(-1.0);
        let diff = twice.sub(&neg_lap).unwrap().sobolev_norm(0.0).unwrap();
        assert!(diff < 1e-12 * neg_lap.sobolev_norm(0.0).unwrap());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = QuadratureRule::gauss_legendre(4).unwrap();
        // Degree-7 polynomial is exact for 4-point Gauss.
        let exact = 2.0f64.powi(8) / 8.0; // int_0^2 x^7 dx
        let got: f64 = rule
            .nodes_weights(0.0, 2.0)
            .into_iter()
            .map(|(x, w)| w * x.powi(7))
            .sum();
        assert!((got - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn midpoint_weights_sum_to_interval() {
        let rule = QuadratureRule::midpoint(16).unwrap();
        let total: f64 = rule.nodes_weights(0.5, 2.5).iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_rejects_too_few_nodes() {
        assert!(QuadratureRule::gauss_legendre(3).is_err());
    }
}
