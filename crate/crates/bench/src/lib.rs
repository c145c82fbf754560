//! Fixtures shared by the benchmark targets.

use critns_core::{sample_datum, AnalyticDatum, GridSpec, SpectralField};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn grid(n: usize) -> GridSpec {
    GridSpec::new(n, TWO_PI).unwrap()
}

/// Band-limited divergence-free field at unit Hdot^{1/2} norm.
pub fn random_field(g: &GridSpec, seed: u64) -> SpectralField {
    let raw = sample_datum(
        &AnalyticDatum::BandLimitedRandom {
            seed,
            spectrum_slope: -1.0,
            k_min: 1,
            k_max: 3,
            amplitude: 1.0,
            period: g.box_length(),
        },
        g,
    )
    .unwrap();
    let norm = raw.sobolev_norm(0.5).unwrap();
    raw.scaled(1.0 / norm)
}
