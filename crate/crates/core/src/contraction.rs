//! Generic bilinear fixed-point solver.
//!
//! Solves `x = y + B(x, x)` for a continuous bilinear `B` with
//! `|B(a, b)| <= eta |a| |b|` by Picard iteration from `x0 = y`. When
//! `4 eta |y| <= 1` the solution lies in the ball of radius
//!
//! ```text
//! R = (1 - sqrt(1 - 4 eta |y|)) / (2 eta)
//! ```
//!
//! and the iteration contracts with factor at most `2 eta R < 1`. Out of that
//! regime the solver still runs and reports non-convergence: the stepping
//! harness uses exactly that failure as its interval-shrinking signal.
//! Uniqueness actually extends to the larger ball of radius `1 / (2 eta)`;
//! the solver does not certify that, it only certifies the residual of the
//! iterate it returns.

use crate::error::ContractionError;

/// Value-semantics element of a normed space: addition, scaling and a norm
/// are all the solver needs.
pub trait BanachElement: Clone {
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, factor: f64) -> Self;
    fn norm(&self) -> f64;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }
}

impl BanachElement for f64 {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, factor: f64) -> Self {
        self * factor
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl BanachElement for Vec<f64> {
    fn add(&self, other: &Self) -> Self {
        self.iter().zip(other).map(|(a, b)| a + b).collect()
    }
    fn scale(&self, factor: f64) -> Self {
        self.iter().map(|a| a * factor).collect()
    }
    fn norm(&self) -> f64 {
        self.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// Abstract instance of the quadratic fixed-point problem `x = y + B(x, x)`.
pub struct BilinearFixedPointProblem<X, B>
where
    X: BanachElement,
    B: Fn(&X, &X) -> X,
{
    pub y: X,
    pub bilinear: B,
    /// Bilinear bound `|B(a, b)| <= eta |a| |b|`.
    pub eta: f64,
    pub tol: f64,
    pub max_iter: usize,
}

/// Outcome of the Picard iteration, with per-iterate diagnostics.
#[derive(Debug, Clone)]
pub struct FixedPointResult<X> {
    pub solution: X,
    pub iterations: usize,
    /// Certified equation residual `|solution - y - B(solution, solution)|`.
    pub residual: f64,
    /// `R` from the radius formula; `None` out of regime (`4 eta |y| > 1`).
    pub radius_bound: Option<f64>,
    pub converged: bool,
    /// `|x_m|` after each iteration.
    pub norm_history: Vec<f64>,
    /// `|x_{m+1} - x_m|` after each iteration.
    pub residual_history: Vec<f64>,
}

/// Radius of the solution ball, `R = (1 - sqrt(1 - 4 eta |y|)) / (2 eta)`.
/// Requires `eta > 0` and `4 eta |y| <= 1`.
pub fn radius_bound(eta: f64, y_norm: f64) -> Result<f64, ContractionError> {
    if !(eta > 0.0) {
        return Err(ContractionError::BadEta(eta));
    }
    let discriminant = 4.0 * eta * y_norm;
    if discriminant > 1.0 {
        return Err(ContractionError::OutOfRegime(discriminant));
    }
    Ok((1.0 - (1.0 - discriminant).sqrt()) / (2.0 * eta))
}

/// Picard iteration `x_0 = y`, `x_{m+1} = y + B(x_m, x_m)` until the update
/// falls below `tol`, then one explicit residual check of the final iterate.
pub fn solve_fixed_point<X, B>(problem: &BilinearFixedPointProblem<X, B>) -> FixedPointResult<X>
where
    X: BanachElement,
    B: Fn(&X, &X) -> X,
{
    let radius = radius_bound(problem.eta, problem.y.norm()).ok();
    let mut x = problem.y.clone();
    let mut norm_history = vec![x.norm()];
    let mut residual_history = Vec::new();
    let mut iterations = 0;
    let mut update = f64::INFINITY;
    while iterations < problem.max_iter {
        let next = problem.y.add(&(problem.bilinear)(&x, &x));
        update = next.sub(&x).norm();
        iterations += 1;
        norm_history.push(next.norm());
        residual_history.push(update);
        x = next;
        if !update.is_finite() {
            break;
        }
        if update <= problem.tol {
            break;
        }
    }
    // Certify the returned iterate against the equation itself.
    let residual = x
        .sub(&problem.y.add(&(problem.bilinear)(&x, &x)))
        .norm();
    let converged = update.is_finite() && residual <= problem.tol;
    FixedPointResult {
        solution: x,
        iterations,
        residual,
        radius_bound: radius,
        converged,
        norm_history,
        residual_history,
    }
}

/// Empirical surrogate for the bilinear bound `eta`: the max of
/// `|B(a, b)| / (|a| |b|)` over sampled pairs. Degenerate (zero-norm) samples
/// are skipped.
pub fn estimate_eta<X, B, S>(
    bilinear: B,
    mut sampler: S,
    trials: usize,
) -> Result<f64, ContractionError>
where
    X: BanachElement,
    B: Fn(&X, &X) -> X,
    S: FnMut(usize) -> X,
{
    if trials == 0 {
        return Err(ContractionError::NoTrials);
    }
    let mut eta: f64 = 0.0;
    for i in 0..trials {
        let a = sampler(2 * i);
        let b = sampler(2 * i + 1);
        let (na, nb) = (a.norm(), b.norm());
        if na == 0.0 || nb == 0.0 {
            continue;
        }
        eta = eta.max(bilinear(&a, &b).norm() / (na * nb));
    }
    Ok(eta)
}
