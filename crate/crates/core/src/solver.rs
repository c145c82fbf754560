//! Mild-solution trajectories by two independent routes.
//!
//! `integrate_interval` runs whole-interval space-time Picard iteration
//! `u^{m+1} = e^{t Lap} u0 + B(u^m, u^m)` on a uniform time lattice;
//! `solve` marches stepwise, closing each step's Duhamel integral with an
//! inner Picard loop and halving `dt` on failure. Their agreement on shared
//! lattice times is the discrete uniqueness witness exposed by
//! [`cross_check_uniqueness`].
//!
//! Blow-up can never be confirmed on a torus desk run; `terminated_reason`
//! reports evidence (norm threshold crossed, or `dt` underflow with inner
//! Picard failure), it does not claim a finite maximal time. Likewise the
//! records expose both the `Hdot^{1/2}`-family and `L^3`-family norms, but
//! whether their maximal existence times coincide is not something a
//! discrete run can distinguish; no audit asserts it.

use serde::{Deserialize, Serialize};

use crate::criticality::{record, NormRecord};
use crate::error::SolverError;
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::operators::{projected_nonlinearity, HeatMultiplier, QuadratureRule};

/// Divergence-defect tolerance enforced on trajectory snapshots.
pub const TRAJECTORY_DIVERGENCE_TOL: f64 = 1e-10;

/// Why a trajectory stopped where it did.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TerminationReason {
    HorizonReached,
    BlowupDetected,
    PicardFailure { interval: f64 },
}

impl TerminationReason {
    pub fn is_horizon_reached(&self) -> bool {
        matches!(self, TerminationReason::HorizonReached)
    }
}

/// Time-ordered field snapshots plus one `NormRecord` per time.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: GridSpec,
    times: Vec<f64>,
    snapshots: Vec<SpectralField>,
    records: Vec<NormRecord>,
    terminated_reason: TerminationReason,
}

impl Trajectory {
    /// Build a trajectory from snapshots, recomputing the per-time records.
    /// Times must be strictly increasing starting at the first entry, and
    /// every snapshot must be divergence-free to [`TRAJECTORY_DIVERGENCE_TOL`].
    pub fn from_snapshots(
        times: Vec<f64>,
        snapshots: Vec<SpectralField>,
        terminated_reason: TerminationReason,
    ) -> Result<Self, SolverError> {
        if times.is_empty() || times.len() != snapshots.len() {
            return Err(SolverError::BadConfig(format!(
                "{} times vs {} snapshots",
                times.len(),
                snapshots.len()
            )));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(SolverError::BadConfig(format!(
                    "times not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let grid = *snapshots[0].grid();
        let mut records = Vec::with_capacity(times.len());
        let mut prev: Option<NormRecord> = None;
        for (t, snap) in times.iter().zip(snapshots.iter()) {
            grid.check_same(snap.grid()).map_err(|e| SolverError::Field(e.into()))?;
            let defect = snap.divergence_defect();
            if defect > TRAJECTORY_DIVERGENCE_TOL {
                return Err(SolverError::NotDivergenceFree(defect));
            }
            let rec = record(snap, *t, prev.as_ref())
                .map_err(|e| SolverError::BadConfig(e.to_string()))?;
            prev = Some(rec.clone());
            records.push(rec);
        }
        Ok(Self {
            grid,
            times,
            snapshots,
            records,
            terminated_reason,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[SpectralField] {
        &self.snapshots
    }

    pub fn records(&self) -> &[NormRecord] {
        &self.records
    }

    pub fn terminated_reason(&self) -> TerminationReason {
        self.terminated_reason
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn covers(&self, t: f64) -> bool {
        let tol = 1e-12 * self.end_time().abs().max(1.0);
        t >= self.start_time() - tol && t <= self.end_time() + tol
    }

    /// Index of the lattice time equal to `t`, if any.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * self.end_time().abs().max(1.0);
        self.times.iter().position(|&s| (s - t).abs() <= tol)
    }

    /// Snapshot at time `s`, linearly interpolated between lattice times.
    pub fn interp(&self, s: f64) -> Result<SpectralField, crate::error::OperatorError> {
        if !self.covers(s) {
            return Err(crate::error::OperatorError::CoverageGap {
                t: s,
                lo: self.start_time(),
                hi: self.end_time(),
            });
        }
        let s = s.clamp(self.start_time(), self.end_time());
        match self.times.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(j) => Ok(self.snapshots[j].clone()),
            Err(j) => {
                let j = j.clamp(1, self.times.len() - 1);
                let (t0, t1) = (self.times[j - 1], self.times[j]);
                let w = (s - t0) / (t1 - t0);
                Ok(self.snapshots[j - 1].lerp(&self.snapshots[j], w))
            }
        }
    }
}

/// Configuration for both solver routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub duhamel_quadrature: QuadratureRule,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub norm_blowup_threshold: f64,
    pub min_dt: f64,
}

impl SolverConfig {
    /// Gauss-Legendre 8-node Duhamel quadrature per step interval and
    /// moderate Picard settings.
    pub fn standard(dt: f64) -> Self {
        Self {
            dt,
            duhamel_quadrature: QuadratureRule::gauss_legendre(8).expect("8 >= 4"),
            picard_tol: 1e-10,
            picard_max_iter: 60,
            norm_blowup_threshold: 1e3,
            min_dt: dt / 1024.0,
        }
    }

    fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt > 0.0 && self.min_dt > 0.0 && self.min_dt <= self.dt) {
            return Err(SolverError::BadConfig(format!(
                "need 0 < min_dt <= dt, got dt = {}, min_dt = {}",
                self.dt, self.min_dt
            )));
        }
        if !(self.picard_tol > 0.0) || self.picard_max_iter == 0 {
            return Err(SolverError::BadConfig("picard settings must be positive".into()));
        }
        if !(self.norm_blowup_threshold > 0.0) {
            return Err(SolverError::BadConfig("blow-up threshold must be positive".into()));
        }
        Ok(())
    }
}

fn validate_datum(u0: &SpectralField) -> Result<(), SolverError> {
    if !u0.is_finite() {
        return Err(SolverError::NonFinite(0.0));
    }
    let defect = u0.divergence_defect();
    if defect > TRAJECTORY_DIVERGENCE_TOL {
        return Err(SolverError::NotDivergenceFree(defect));
    }
    let scale = u0.coeffs().iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if u0.mean_magnitude() > 1e-12 * scale.max(1e-300) && u0.mean_magnitude() > 1e-300 {
        return Err(SolverError::Field(crate::error::FieldError::Malformed(
            format!("datum has nonzero mean {:.3e}", u0.mean_magnitude()),
        )));
    }
    Ok(())
}

/// Precomputed heat tables for one (grid, dt, quadrature) combination.
struct StepContext {
    dt: f64,
    full: HeatMultiplier,
    /// (offset in (0, dt), weight, multiplier for e^{(dt - offset) Lap}).
    nodes: Vec<(f64, f64, HeatMultiplier)>,
}

impl StepContext {
    fn new(grid: &GridSpec, dt: f64, q: &QuadratureRule) -> Self {
        let nodes = q
            .nodes_weights(0.0, dt)
            .into_iter()
            .map(|(s, w)| (s, w, HeatMultiplier::new(grid, dt - s)))
            .collect();
        Self {
            dt,
            full: HeatMultiplier::new(grid, dt),
            nodes,
        }
    }

    /// One stepwise Duhamel step with inner Picard closure.
    fn step(&self, u: &SpectralField, cfg: &SolverConfig) -> Result<SpectralField, SolverError> {
        let mut base = u.clone();
        self.full.apply(&mut base);
        let mut v = base.clone();
        let mut last_delta = f64::INFINITY;
        for _ in 0..cfg.picard_max_iter {
            let mut next = base.clone();
            for (s, w, table) in &self.nodes {
                let us = u.lerp(&v, s / self.dt);
                let integrand = projected_nonlinearity(&us)?;
                table.axpy_into(&mut next, *w, &integrand);
            }
            if !next.is_finite() {
                return Err(SolverError::NonFinite(self.dt));
            }
            last_delta = next
                .sub(&v)
                .map_err(SolverError::Field)?
                .sobolev_norm(0.5)
                .map_err(SolverError::Field)?;
            v = next;
            if last_delta < cfg.picard_tol {
                return Ok(v);
            }
        }
        Err(SolverError::StepFailure {
            iterations: cfg.picard_max_iter,
            delta: last_delta,
        })
    }
}

/// Advance `u` by one Duhamel step of length `dt`:
/// `u(t + dt) = e^{dt Lap} u + int_0^{dt} e^{(dt - s) Lap} P div(-u(s) (x) u(s)) ds`
/// with the integrand closed by an inner Picard loop over the step.
pub fn step(u: &SpectralField, dt: f64, cfg: &SolverConfig) -> Result<SpectralField, SolverError> {
    if !(dt > 0.0) {
        return Err(SolverError::BadConfig(format!("step dt must be positive, got {dt}")));
    }
    cfg.validate()?;
    StepContext::new(u.grid(), dt, &cfg.duhamel_quadrature).step(u, cfg)
}

/// Whole-interval space-time Picard construction of the mild solution on
/// `[0, T]`. Successive iterates are compared in the discrete `E_T` norm;
/// non-convergence is reported as `PicardFailure` carrying the interval
/// length, with the last iterate as the trajectory.
pub fn integrate_interval(
    u0: &SpectralField,
    horizon: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    validate_datum(u0)?;
    if !(horizon > 0.0) {
        return Err(SolverError::BadConfig(format!("horizon must be positive, got {horizon}")));
    }
    let grid = *u0.grid();
    let steps = ((horizon / cfg.dt).round() as usize).max(1);
    let dt = horizon / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|j| j as f64 * dt).collect();

    // Heat flow of the datum at every lattice time.
    let base: Vec<SpectralField> = times
        .iter()
        .map(|&t| {
            let mut b = u0.clone();
            HeatMultiplier::new(&grid, t).apply(&mut b);
            b
        })
        .collect();

    let ctx = StepContext::new(&grid, dt, &cfg.duhamel_quadrature);
    let mut current = base.clone();

    let mut converged = false;
    for _ in 0..cfg.picard_max_iter {
        let mut next = Vec::with_capacity(times.len());
        next.push(u0.clone());
        let mut bacc = SpectralField::zero(grid);
        for j in 1..=steps {
            // Propagate the accumulated integral and add this interval.
            let mut propagated = bacc;
            ctx.full.apply(&mut propagated);
            bacc = propagated;
            for (s, w, table) in &ctx.nodes {
                // Quadratic interpolation through three lattice iterates:
                // the whole-interval route sees the entire lattice, so it can
                // approximate the continuous-time object one order better
                // than the stepwise marcher. This keeps the two routes
                // genuinely distinct discretizations, which the uniqueness
                // cross-check relies on.
                let us = if steps == 1 {
                    current[j - 1].lerp(&current[j], s / dt)
                } else if j < steps {
                    quadratic_interp(
                        &current[j - 1],
                        &current[j],
                        &current[j + 1],
                        s / dt,
                    )
                } else {
                    quadratic_interp(
                        &current[j - 2],
                        &current[j - 1],
                        &current[j],
                        s / dt + 1.0,
                    )
                };
                let integrand = projected_nonlinearity(&us)?;
                table.axpy_into(&mut bacc, *w, &integrand);
            }
            let uj = base[j].add(&bacc).map_err(SolverError::Field)?;
            if !uj.is_finite() {
                return finish_interval(times, current, horizon);
            }
            next.push(uj);
        }
        // Discrete E_T distance between iterates.
        let mut sup_sq: f64 = 0.0;
        let mut grad_int = 0.0;
        let mut prev_sq = 0.0;
        for (j, (a, b)) in next.iter().zip(current.iter()).enumerate() {
            let diff = a.sub(b).map_err(SolverError::Field)?;
            let h_half = diff.sobolev_norm(0.5).map_err(SolverError::Field)?;
            let h_three_half = diff.sobolev_norm(1.5).map_err(SolverError::Field)?;
            sup_sq = sup_sq.max(h_half * h_half);
            let sq = h_three_half * h_three_half;
            if j > 0 {
                grad_int += 0.5 * dt * (prev_sq + sq);
            }
            prev_sq = sq;
        }
        let delta = (sup_sq + grad_int).sqrt();
        current = next;
        if delta < cfg.picard_tol {
            converged = true;
            break;
        }
    }
    if converged {
        Trajectory::from_snapshots(times, current, TerminationReason::HorizonReached)
    } else {
        finish_interval(times, current, horizon)
    }
}

/// Lagrange interpolation through equispaced values at `theta = 0, 1, 2`.
fn quadratic_interp(
    a: &SpectralField,
    b: &SpectralField,
    c: &SpectralField,
    theta: f64,
) -> SpectralField {
    let w0 = 0.5 * (theta - 1.0) * (theta - 2.0);
    let w1 = theta * (2.0 - theta);
    let w2 = 0.5 * theta * (theta - 1.0);
    let mut out = a.scaled(w0);
    let coeffs = out.coeffs_mut();
    for (dst, (x, y)) in coeffs.iter_mut().zip(b.coeffs().iter().zip(c.coeffs())) {
        *dst += w1 * x + w2 * y;
    }
    out
}

fn finish_interval(
    times: Vec<f64>,
    snapshots: Vec<SpectralField>,
    horizon: f64,
) -> Result<Trajectory, SolverError> {
    // Non-convergent iterates may carry non-finite or divergence-polluted
    // entries; keep the longest clean prefix so the failure is inspectable.
    let mut keep = snapshots.len();
    for (j, s) in snapshots.iter().enumerate() {
        if !s.is_finite() || s.divergence_defect() > TRAJECTORY_DIVERGENCE_TOL {
            keep = j;
            break;
        }
    }
    let keep = keep.max(1);
    Trajectory::from_snapshots(
        times[..keep].to_vec(),
        snapshots[..keep].to_vec(),
        TerminationReason::PicardFailure { interval: horizon },
    )
}

/// Stepwise march with adaptive halving of `dt` on step failure. Declares
/// `BlowupDetected` when the `Hdot^{1/2}` norm crosses the configured
/// threshold or when `dt` underflows `min_dt` with the inner Picard still
/// failing; the last successful time is the reported maximal-time estimate.
pub fn solve(
    u0: &SpectralField,
    horizon: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    validate_datum(u0)?;
    if !(horizon > 0.0) {
        return Err(SolverError::BadConfig(format!("horizon must be positive, got {horizon}")));
    }
    let grid = *u0.grid();
    let mut times = vec![0.0];
    let mut snapshots = vec![u0.clone()];
    let mut u = u0.clone();
    let mut t = 0.0;
    let mut dt_cur = cfg.dt.min(horizon);
    let mut ctx = StepContext::new(&grid, dt_cur, &cfg.duhamel_quadrature);
    let mut ctx_dt = dt_cur;
    let tol = 1e-12 * horizon;
    let mut reason = TerminationReason::HorizonReached;
    while t < horizon - tol {
        let h_half = u.sobolev_norm(0.5).map_err(SolverError::Field)?;
        if h_half > cfg.norm_blowup_threshold {
            reason = TerminationReason::BlowupDetected;
            break;
        }
        let dt_step = dt_cur.min(horizon - t);
        if (dt_step - ctx_dt).abs() > 1e-15 * dt_step {
            ctx = StepContext::new(&grid, dt_step, &cfg.duhamel_quadrature);
            ctx_dt = dt_step;
        }
        match ctx.step(&u, cfg) {
            Ok(v) => {
                u = v;
                t += dt_step;
                times.push(t);
                snapshots.push(u.clone());
            }
            Err(SolverError::StepFailure { .. }) | Err(SolverError::NonFinite(_)) => {
                dt_cur /= 2.0;
                if dt_cur < cfg.min_dt {
                    reason = TerminationReason::BlowupDetected;
                    break;
                }
            }
            Err(other) => return Err(other),
        }
    }
    if reason.is_horizon_reached() {
        let h_half = u.sobolev_norm(0.5).map_err(SolverError::Field)?;
        if h_half > cfg.norm_blowup_threshold {
            reason = TerminationReason::BlowupDetected;
        }
    }
    Trajectory::from_snapshots(times, snapshots, reason)
}

/// Max over shared lattice times of the L3 distance between the
/// interval-Picard route (under `cfg_interval`) and the stepwise route
/// (under `cfg_stepwise`): the discrete witness of the uniqueness theorem.
pub fn cross_check_uniqueness(
    u0: &SpectralField,
    horizon: f64,
    cfg_interval: &SolverConfig,
    cfg_stepwise: &SolverConfig,
) -> Result<f64, SolverError> {
    let a = integrate_interval(u0, horizon, cfg_interval)?;
    if !a.terminated_reason().is_horizon_reached() {
        return Err(SolverError::Incomparable(format!(
            "interval route terminated with {:?}",
            a.terminated_reason()
        )));
    }
    let b = solve(u0, horizon, cfg_stepwise)?;
    if !b.terminated_reason().is_horizon_reached() {
        return Err(SolverError::Incomparable(format!(
            "stepwise route terminated with {:?}",
            b.terminated_reason()
        )));
    }
    let mut shared = 0usize;
    let mut worst: f64 = 0.0;
    for (j, &t) in a.times().iter().enumerate() {
        if let Some(i) = b.index_at(t) {
            shared += 1;
            let dist = a.snapshots()[j]
                .lebesgue_distance(&b.snapshots()[i], 3.0)
                .map_err(SolverError::Field)?;
            worst = worst.max(dist);
        }
    }
    if shared < 2 {
        return Err(SolverError::Incomparable(
            "routes share fewer than two lattice times".into(),
        ));
    }
    Ok(worst)
}
