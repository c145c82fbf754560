//! Shared fixtures for the integration tests.
#![allow(dead_code)] // each test binary uses its own subset

use critns_core::{
    sample_datum, AnalyticDatum, GridSpec, SolverConfig, SpectralField, TerminationReason,
    Trajectory,
};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn grid(n: usize) -> GridSpec {
    GridSpec::new(n, TWO_PI).unwrap()
}

pub fn taylor_green(g: &GridSpec) -> SpectralField {
    sample_datum(&AnalyticDatum::taylor_green(g.box_length()), g).unwrap()
}

/// Random divergence-free band-limited field scaled to a target Hdot^{1/2} norm.
pub fn random_divfree(g: &GridSpec, seed: u64, target_hhalf: f64) -> SpectralField {
    let raw = sample_datum(
        &AnalyticDatum::BandLimitedRandom {
            seed,
            spectrum_slope: -1.0,
            k_min: 1,
            k_max: 2,
            amplitude: 1.0,
            period: g.box_length(),
        },
        g,
    )
    .unwrap();
    let norm = raw.sobolev_norm(0.5).unwrap();
    raw.scaled(target_hhalf / norm)
}

/// Analytic Taylor-Green trajectory `u0 e^{-2t}` on a uniform lattice.
pub fn taylor_green_trajectory(g: &GridSpec, horizon: f64, dt: f64) -> Trajectory {
    let u0 = taylor_green(g);
    let steps = (horizon / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|j| j as f64 * horizon / steps as f64).collect();
    let snapshots: Vec<SpectralField> = times
        .iter()
        .map(|&t| u0.scaled((-2.0 * t).exp()))
        .collect();
    Trajectory::from_snapshots(times, snapshots, TerminationReason::HorizonReached).unwrap()
}

/// Heat-flow trajectory `e^{t Lap} u0` on a uniform lattice.
pub fn heat_trajectory(u0: &SpectralField, horizon: f64, steps: usize) -> Trajectory {
    let times: Vec<f64> = (0..=steps)
        .map(|j| j as f64 * horizon / steps as f64)
        .collect();
    let snapshots: Vec<SpectralField> = times
        .iter()
        .map(|&t| critns_core::heat_semigroup(u0, t).unwrap())
        .collect();
    Trajectory::from_snapshots(times, snapshots, TerminationReason::HorizonReached).unwrap()
}

pub fn quick_config(dt: f64) -> SolverConfig {
    SolverConfig::standard(dt)
}
