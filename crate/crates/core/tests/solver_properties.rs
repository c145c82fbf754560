//! Trajectory-level solver properties: scaling symmetry commutation,
//! small-data decay, energy behavior and the two-route uniqueness witness.

mod common;

use common::{grid, random_divfree};
use critns_core::{
    cross_check_uniqueness, decay_audit, energy_audit, scale_solution, solve, trapezoid_error_bound,
    SolverConfig, TerminationReason, Trajectory,
};

/// Solving then rescaling equals rescaling the datum then solving on the
/// rescaled box and time lattice.
#[test]
fn solve_then_scale_commutes_with_scale_then_solve() {
    let g = grid(24);
    let u0 = random_divfree(&g, 121, 0.3);
    let lambda = 2.0;
    let horizon = 0.4;
    let dt = 1.0 / 32.0;

    let solved = solve(&u0, horizon, &SolverConfig::standard(dt)).unwrap();
    assert!(solved.terminated_reason().is_horizon_reached());
    let solved_scaled = scale_solution(&solved, lambda).unwrap();

    let datum_traj = Trajectory::from_snapshots(
        vec![0.0],
        vec![u0.clone()],
        TerminationReason::HorizonReached,
    )
    .unwrap();
    let scaled_datum = scale_solution(&datum_traj, lambda).unwrap().snapshots()[0].clone();
    let scaled_solved = solve(
        &scaled_datum,
        horizon / (lambda * lambda),
        &SolverConfig::standard(dt / (lambda * lambda)),
    )
    .unwrap();
    assert!(scaled_solved.terminated_reason().is_horizon_reached());

    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for (j, &t) in solved_scaled.times().iter().enumerate() {
        if let Some(i) = scaled_solved.index_at(t) {
            compared += 1;
            let d = solved_scaled.snapshots()[j]
                .lebesgue_distance(&scaled_solved.snapshots()[i], 3.0)
                .unwrap();
            worst = worst.max(d);
        }
    }
    assert!(compared > 5, "need shared lattice times, got {compared}");
    let scale = solved_scaled.records()[0].l3;
    assert!(
        worst < 1e-6 * scale.max(1.0),
        "scaling commutation defect {worst}"
    );
    // Critical-norm timeseries is invariant under the relabeling.
    for (j, &t) in solved_scaled.times().iter().enumerate() {
        if let Some(i) = scaled_solved.index_at(t) {
            let a = solved_scaled.records()[j].hdot_half;
            let b = scaled_solved.records()[i].hdot_half;
            assert!((a - b).abs() < 1e-6 * a.max(1e-30));
        }
    }
}

/// Small data: every run reaches the horizon, the critical norm decays to a
/// fifth of its initial value well before horizon 5, and the energy
/// inequality holds to quadrature error.
#[test]
fn small_data_runs_decay_and_satisfy_energy_inequality() {
    let g = grid(16);
    let dt = 1.0 / 16.0;
    let cfg = SolverConfig::standard(dt);
    for seed in 0..3 {
        let u0 = random_divfree(&g, 500 + seed, 0.05);
        let traj = solve(&u0, 5.0, &cfg).unwrap();
        assert!(
            traj.terminated_reason().is_horizon_reached(),
            "seed {seed} terminated early: {:?}",
            traj.terminated_reason()
        );
        let report = decay_audit(&traj);
        assert!(
            report.final_hdot_half <= 0.2 * report.initial_hdot_half,
            "seed {seed}: decay ratio {}",
            report.final_hdot_half / report.initial_hdot_half
        );
        let series: Vec<f64> = traj
            .records()
            .iter()
            .map(|r| r.hdot_threehalf.powi(2))
            .collect();
        let bound = trapezoid_error_bound(&series, dt);
        let defect = energy_audit(&traj);
        assert!(
            defect <= 10.0 * bound.max(1e-14),
            "seed {seed}: energy defect {defect} vs bound {bound}"
        );
    }
}

/// Route discrepancy shrinks at order >= 2 under dt halving.
#[test]
fn uniqueness_cross_check_discrepancy_order() {
    let g = grid(16);
    let u0 = random_divfree(&g, 600, 0.25);
    let disc = |dt: f64| {
        cross_check_uniqueness(
            &u0,
            0.5,
            &SolverConfig::standard(dt),
            &SolverConfig::standard(dt),
        )
        .unwrap()
    };
    let d1 = disc(1.0 / 16.0);
    let d2 = disc(1.0 / 32.0);
    let d3 = disc(1.0 / 64.0);
    let order12 = (d1 / d2).log2();
    let order23 = (d2 / d3).log2();
    assert!(
        order12 > 1.8 && order23 > 1.8,
        "orders {order12}, {order23} from discrepancies {d1}, {d2}, {d3}"
    );
}

/// Large-amplitude data never produce silent NaNs: the march either completes
/// or reports a definite termination reason with finite snapshots.
#[test]
fn large_amplitude_march_terminates_definitively() {
    let g = grid(16);
    let u0 = random_divfree(&g, 700, 40.0);
    let mut cfg = SolverConfig::standard(0.05);
    cfg.picard_max_iter = 12;
    cfg.min_dt = 0.05 / 64.0;
    cfg.norm_blowup_threshold = 1e3;
    let traj = solve(&u0, 1.0, &cfg).unwrap();
    match traj.terminated_reason() {
        TerminationReason::HorizonReached | TerminationReason::BlowupDetected => {}
        other => panic!("unexpected reason {other:?}"),
    }
    for snap in traj.snapshots() {
        assert!(snap.is_finite());
    }
    for rec in traj.records() {
        assert!(rec.hdot_half.is_finite());
    }
}
