//! The abstract fixed-point machinery instantiated on the NSE bilinear form:
//! elements are lattice space-time paths under the discrete F_T norm, the
//! bilinear map is the Duhamel form, and the empirical eta estimate must be
//! stable under grid refinement.

mod common;

use common::{grid, random_divfree};
use critns_core::operators::{tensor_divergence, tensor_product_dealiased};
use critns_core::{
    estimate_eta, heat_semigroup, leray_project, BanachElement, GridSpec, QuadratureRule,
    SpectralField,
};

/// A field path sampled on a fixed uniform time lattice.
#[derive(Clone)]
struct LatticePath {
    dt: f64,
    fields: Vec<SpectralField>,
}

impl LatticePath {
    fn heat_flow(u0: &SpectralField, horizon: f64, steps: usize) -> Self {
        let dt = horizon / steps as f64;
        let fields = (0..=steps)
            .map(|j| heat_semigroup(u0, j as f64 * dt).unwrap())
            .collect();
        Self { dt, fields }
    }

    fn lerp(&self, s: f64) -> SpectralField {
        let pos = (s / self.dt).clamp(0.0, (self.fields.len() - 1) as f64);
        let j = (pos.floor() as usize).min(self.fields.len() - 2);
        let w = pos - j as f64;
        self.fields[j]
            .scaled(1.0 - w)
            .add(&self.fields[j + 1].scaled(w))
            .unwrap()
    }
}

impl BanachElement for LatticePath {
    fn add(&self, other: &Self) -> Self {
        Self {
            dt: self.dt,
            fields: self
                .fields
                .iter()
                .zip(&other.fields)
                .map(|(a, b)| a.add(b).unwrap())
                .collect(),
        }
    }

    fn scale(&self, factor: f64) -> Self {
        Self {
            dt: self.dt,
            fields: self.fields.iter().map(|f| f.scaled(factor)).collect(),
        }
    }

    /// Discrete F_T norm: `(trapz |u|_{Hdot^1}^4)^{1/4}`.
    fn norm(&self) -> f64 {
        let h1: Vec<f64> = self
            .fields
            .iter()
            .map(|f| f.sobolev_norm(1.0).unwrap())
            .collect();
        let mut acc = 0.0;
        for j in 1..h1.len() {
            acc += 0.5 * self.dt * (h1[j - 1].powi(4) + h1[j].powi(4));
        }
        acc.powf(0.25)
    }
}

/// Duhamel images `B(f, g)(t_j)` accumulated interval by interval.
fn duhamel_path(f: &LatticePath, g: &LatticePath, rule: &QuadratureRule) -> LatticePath {
    let grid = *f.fields[0].grid();
    let dt = f.dt;
    let mut images = vec![SpectralField::zero(grid)];
    let mut acc = SpectralField::zero(grid);
    for j in 1..f.fields.len() {
        let (lo, hi) = ((j - 1) as f64 * dt, j as f64 * dt);
        acc = heat_semigroup(&acc, dt).unwrap();
        for (s, w) in rule.nodes_weights(lo, hi) {
            let tensor = tensor_product_dealiased(&f.lerp(s), &g.lerp(s)).unwrap();
            let integrand = leray_project(&tensor_divergence(&tensor)).scaled(-1.0);
            let propagated = heat_semigroup(&integrand, hi - s).unwrap().scaled(w);
            acc = acc.add(&propagated).unwrap();
        }
        images.push(acc.clone());
    }
    LatticePath { dt, fields: images }
}

#[test]
fn nse_eta_estimate_stable_under_refinement() {
    let rule = QuadratureRule::gauss_legendre(4).unwrap();
    let mut per_grid = Vec::new();
    for n in [16usize, 24, 32] {
        let g: GridSpec = grid(n);
        let eta = estimate_eta(
            |a: &LatticePath, b: &LatticePath| duhamel_path(a, b, &rule),
            |i| LatticePath::heat_flow(&random_divfree(&g, 9000 + i as u64, 1.0), 0.5, 8),
            6,
        )
        .unwrap();
        assert!(eta > 0.0 && eta.is_finite());
        per_grid.push(eta);
    }
    let max = per_grid.iter().cloned().fold(0.0f64, f64::max);
    let min = per_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(
        max <= 1.3 * min,
        "eta estimate drifts across refinements: {per_grid:?}"
    );
}
