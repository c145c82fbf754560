//! Specialized commands: scaling commutation, profile sweeps, the scalar
//! contraction demo, pressure recovery, and the compactness diagnostic.

use std::path::Path;

use critns_core::{
    compactness_diagnostic, inner_product_orthogonality, pressure_from_velocity,
    pythagorean_defect, sample_datum, scale_solution, similarity_frame_track, snapshot, solve,
    solve_fixed_point, AnalyticDatum, BilinearFixedPointProblem, GridSpec, ProfileSpec,
    TerminationReason, Trajectory,
};
use serde::Serialize;

use crate::config::{ProfileSweepConfig, ScalingCheckConfig, ScenarioConfig, SuiteConfig};
use crate::scenario::{build_datum_field, write_atomic, AuditOutcome};
use crate::CliError;

/// Solve-then-scale vs scale-then-solve: max relative L^3 discrepancy at
/// matched times against the configured tolerance.
pub fn scaling_check_outcome(
    cfg: &ScalingCheckConfig,
    seed: u64,
) -> Result<AuditOutcome, CliError> {
    let grid = cfg.grid.build()?;
    let datum = cfg.datum.build(seed, "scaling-check");
    let mut u0 = sample_datum(&datum, &grid)
        .map_err(|e| CliError::Scenario(format!("scaling check datum: {e}")))?;
    if let Some(target) = cfg.datum.target_hdot_half() {
        let norm = u0
            .sobolev_norm(0.5)
            .map_err(|e| CliError::Scenario(e.to_string()))?;
        if norm > 0.0 {
            u0 = u0.scaled(target / norm);
        }
    }
    let solver = cfg.solver.build()?;
    let lambda = cfg.lambda;

    let solved = solve(&u0, cfg.horizon, &solver)
        .map_err(|e| CliError::Scenario(format!("scaling check solve: {e}")))?;
    if !solved.terminated_reason().is_horizon_reached() {
        return Err(CliError::Scenario(format!(
            "scaling check: base run terminated with {:?}",
            solved.terminated_reason()
        )));
    }
    let solved_scaled = scale_solution(&solved, lambda)
        .map_err(|e| CliError::Scenario(e.to_string()))?;

    let datum_traj = Trajectory::from_snapshots(
        vec![0.0],
        vec![u0.clone()],
        TerminationReason::HorizonReached,
    )
    .map_err(|e| CliError::Scenario(e.to_string()))?;
    let scaled_datum = scale_solution(&datum_traj, lambda)
        .map_err(|e| CliError::Scenario(e.to_string()))?
        .snapshots()[0]
        .clone();
    let mut scaled_solver = solver;
    scaled_solver.dt /= lambda * lambda;
    scaled_solver.min_dt /= lambda * lambda;
    let rerun = solve(&scaled_datum, cfg.horizon / (lambda * lambda), &scaled_solver)
        .map_err(|e| CliError::Scenario(format!("scaling check rerun: {e}")))?;

    let mut worst: f64 = 0.0;
    let mut shared = 0usize;
    for (j, &t) in solved_scaled.times().iter().enumerate() {
        if let Some(i) = rerun.index_at(t) {
            shared += 1;
            let d = solved_scaled.snapshots()[j]
                .lebesgue_distance(&rerun.snapshots()[i], 3.0)
                .map_err(|e| CliError::Scenario(e.to_string()))?;
            worst = worst.max(d);
        }
    }
    if shared < 2 {
        return Err(CliError::Scenario(
            "scaling check: no shared lattice times".into(),
        ));
    }
    let scale = solved_scaled.records()[0].l3.max(1e-30);
    let measured = worst / scale;
    Ok(AuditOutcome {
        name: "scaling_commutation".into(),
        passed: measured <= cfg.tolerance,
        measured,
        threshold: cfg.tolerance,
        detail: format!(
            "lambda {}, {} shared times, relative max L3 discrepancy",
            lambda, shared
        ),
    })
}

#[derive(Debug, Serialize)]
struct SweepRow {
    sweep: &'static str,
    parameter: f64,
    defect: f64,
    normalized_inner: f64,
}

/// Two-bubble sweeps: Pythagorean defect and normalized Hdot^{1/2} inner
/// product over core separations and scale ratios. Writes `profiles.csv`
/// when an output directory is given.
pub fn profile_sweep_outcomes(
    cfg: &ProfileSweepConfig,
    output_dir: Option<&Path>,
) -> Result<Vec<AuditOutcome>, CliError> {
    let grid = GridSpec::new(cfg.n_modes, cfg.box_length)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let l = cfg.box_length;
    let mid = l / 2.0;
    let mut rows = Vec::new();

    // Separation sweep at equal scales.
    let sep_width = cfg.separation_width_fraction * l;
    let mut sep_defects = Vec::new();
    let mut sep_inners = Vec::new();
    for &frac in &cfg.separation_fractions {
        let d = frac * l;
        let base = l / 4.0;
        let p1 = ProfileSpec::new(
            AnalyticDatum::LocalizedVortex {
                width: sep_width,
                amplitude: 1.0,
            },
            1.0,
            [base, mid, mid],
        );
        let p2 = ProfileSpec::new(p1.datum.clone(), 1.0, [base + d, mid, mid]);
        let defect = pythagorean_defect(&[p1.clone(), p2.clone()], None, &grid)
            .map_err(|e| CliError::Scenario(e.to_string()))?;
        let inner = inner_product_orthogonality(&p1, &p2, &grid)
            .map_err(|e| CliError::Scenario(e.to_string()))?
            .abs();
        sep_defects.push(defect);
        sep_inners.push(inner);
        rows.push(SweepRow {
            sweep: "separation",
            parameter: d,
            defect,
            normalized_inner: inner,
        });
    }

    // Scale-ratio sweep at a common core.
    let ratio_width = cfg.ratio_width_fraction * l;
    let mut ratio_defects = Vec::new();
    let mut ratio_inners = Vec::new();
    for &ratio in &cfg.ratios {
        let p1 = ProfileSpec::new(
            AnalyticDatum::LocalizedVortex {
                width: ratio_width,
                amplitude: 1.0,
            },
            1.0,
            [mid, mid, mid],
        );
        let p2 = ProfileSpec::new(p1.datum.clone(), 1.0 / ratio, [mid, mid, mid]);
        let defect = pythagorean_defect(&[p1.clone(), p2.clone()], None, &grid)
            .map_err(|e| CliError::Scenario(e.to_string()))?;
        let inner = inner_product_orthogonality(&p1, &p2, &grid)
            .map_err(|e| CliError::Scenario(e.to_string()))?
            .abs();
        ratio_defects.push(defect);
        ratio_inners.push(inner);
        rows.push(SweepRow {
            sweep: "scale_ratio",
            parameter: ratio,
            defect,
            normalized_inner: inner,
        });
    }

    if let Some(dir) = output_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
        let mut csv = String::from("sweep,parameter,defect,normalized_inner\n");
        for row in &rows {
            csv.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                row.sweep, row.parameter, row.defect, row.normalized_inner
            ));
        }
        write_atomic(&dir.join("profiles.csv"), csv.as_bytes())?;
    }

    let strictly_decreasing = |values: &[f64]| -> (bool, f64) {
        let mut worst_ratio: f64 = 0.0;
        let mut ok = true;
        for w in values.windows(2) {
            if w[1] >= w[0] {
                ok = false;
            }
            if w[0] > 0.0 {
                worst_ratio = worst_ratio.max(w[1] / w[0]);
            }
        }
        (ok, worst_ratio)
    };

    let mut outcomes = Vec::new();
    for (label, defects, inners) in [
        ("separation", &sep_defects, &sep_inners),
        ("scale_ratio", &ratio_defects, &ratio_inners),
    ] {
        let (mono_d, ratio_d) = strictly_decreasing(defects);
        outcomes.push(AuditOutcome {
            name: format!("profile_defect_monotone_{label}"),
            passed: mono_d,
            measured: ratio_d,
            threshold: 1.0,
            detail: format!("defects {defects:?}"),
        });
        let (mono_i, ratio_i) = strictly_decreasing(inners);
        outcomes.push(AuditOutcome {
            name: format!("profile_inner_monotone_{label}"),
            passed: mono_i,
            measured: ratio_i,
            threshold: 1.0,
            detail: format!("inner products {inners:?}"),
        });
        let last = *defects.last().unwrap_or(&f64::NAN);
        outcomes.push(AuditOutcome {
            name: format!("profile_defect_final_{label}"),
            passed: last <= cfg.defect_threshold,
            measured: last,
            threshold: cfg.defect_threshold,
            detail: "Pythagorean defect at the sweep extreme".into(),
        });
    }
    Ok(outcomes)
}

/// Scalar contraction demo: 50 values of `4 eta y` in [0, 0.99] against the
/// quadratic-formula root.
pub fn contraction_demo(output_dir: Option<&Path>) -> Result<Vec<AuditOutcome>, CliError> {
    let eta = 1.0;
    let count = 50;
    let mut csv = String::from("four_eta_y,solution,expected,iterations,residual\n");
    let mut worst_err: f64 = 0.0;
    let mut ball_ok = true;
    let mut rate_ok = true;
    for i in 0..count {
        let frac = 0.99 * i as f64 / (count - 1) as f64;
        let y = frac / (4.0 * eta);
        let problem = BilinearFixedPointProblem {
            y,
            bilinear: move |a: &f64, b: &f64| eta * a * b,
            eta,
            tol: 1e-14,
            max_iter: 100_000,
        };
        let result = solve_fixed_point(&problem);
        let expected = (1.0 - (1.0 - frac).sqrt()) / (2.0 * eta);
        if !result.converged {
            return Err(CliError::Scenario(format!(
                "contraction demo: no convergence at 4 eta y = {frac}"
            )));
        }
        worst_err = worst_err.max((result.solution - expected).abs());
        let radius = result.radius_bound.expect("in regime");
        if result.norm_history.iter().any(|&n| n > radius + 1e-12) {
            ball_ok = false;
        }
        // Geometric decay with rate <= 2 eta R + slack over the last ten steps.
        let rate_bound = 2.0 * eta * radius + 0.05;
        let hist = &result.residual_history;
        let tail = hist.len().saturating_sub(11);
        for w in hist[tail..].windows(2) {
            if w[0] > 1e-13 && w[1] > rate_bound * w[0] * (1.0 + 1e-9) {
                rate_ok = false;
            }
        }
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{},{:.16e}\n",
            frac, result.solution, expected, result.iterations, result.residual
        ));
    }
    if let Some(dir) = output_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
        write_atomic(&dir.join("contraction.csv"), csv.as_bytes())?;
    }
    Ok(vec![
        AuditOutcome {
            name: "contraction_closed_form".into(),
            passed: worst_err <= 1e-12,
            measured: worst_err,
            threshold: 1e-12,
            detail: format!("{count} values of 4 eta y in [0, 0.99]"),
        },
        AuditOutcome {
            name: "contraction_iterates_in_ball".into(),
            passed: ball_ok,
            measured: if ball_ok { 0.0 } else { 1.0 },
            threshold: 0.0,
            detail: "iterate norms never exceed the radius bound".into(),
        },
        AuditOutcome {
            name: "contraction_geometric_decay".into(),
            passed: rate_ok,
            measured: if rate_ok { 0.0 } else { 1.0 },
            threshold: 0.0,
            detail: "residual decay rate <= 2 eta R + 0.05".into(),
        },
    ])
}

#[derive(Debug, Serialize)]
struct PressureReport {
    scenario: String,
    pressure_l32: f64,
    velocity_l3_squared: f64,
    calderon_zygmund_ratio: f64,
}

/// Recover the pressure of a scenario's datum, export the velocity snapshot,
/// and report the Calderon-Zygmund-type ratio.
pub fn pressure_command(
    scenario: &ScenarioConfig,
    seed: u64,
    output_dir: &Path,
) -> Result<Vec<AuditOutcome>, CliError> {
    let u = build_datum_field(scenario, seed)?;
    let grid = *u.grid();
    let p = pressure_from_velocity(&u).map_err(|e| CliError::Scenario(e.to_string()))?;
    let p_norm = p
        .lebesgue_norm(1.5)
        .map_err(|e| CliError::Scenario(e.to_string()))?;
    let u_l3 = u
        .lebesgue_norm(3.0)
        .map_err(|e| CliError::Scenario(e.to_string()))?;
    let ratio = if u_l3 > 0.0 {
        p_norm / (u_l3 * u_l3)
    } else {
        0.0
    };
    std::fs::create_dir_all(output_dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", output_dir.display())))?;
    let snap_path = output_dir.join(format!("{}_datum.crns", scenario.name));
    snapshot::write_fields_to_path(&snap_path, &grid, &[&u])
        .map_err(|e| CliError::Io(e.to_string()))?;
    let report = PressureReport {
        scenario: scenario.name.clone(),
        pressure_l32: p_norm,
        velocity_l3_squared: u_l3 * u_l3,
        calderon_zygmund_ratio: ratio,
    };
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(
        &output_dir.join(format!("{}_pressure.json", scenario.name)),
        json.as_bytes(),
    )?;
    Ok(vec![AuditOutcome {
        name: "pressure_ratio_finite".into(),
        passed: ratio.is_finite(),
        measured: ratio,
        threshold: f64::INFINITY,
        detail: "|p|_{3/2} / |u|_3^2".into(),
    }])
}

#[derive(Debug, Serialize)]
struct CompactnessReport {
    scenario: String,
    sample_times: Vec<f64>,
    max_off_diagonal: f64,
    matrix: Vec<Vec<f64>>,
}

/// Renormalized-family diagnostic for a scenario: solve, track the
/// similarity frame, and report the pairwise L^3 distance matrix after
/// amplitude normalization.
pub fn compactness_command(
    scenario: &ScenarioConfig,
    seed: u64,
    samples: usize,
    output_dir: &Path,
) -> Result<Vec<AuditOutcome>, CliError> {
    let u0 = build_datum_field(scenario, seed)?;
    let solver = scenario.solver.build()?;
    let traj = solve(&u0, scenario.horizon, &solver)
        .map_err(|e| CliError::Scenario(e.to_string()))?;
    let frame = similarity_frame_track(&traj);
    let count = samples.max(2).min(traj.times().len());
    let stride = (traj.times().len() - 1) / (count - 1);
    let sample_times: Vec<f64> = (0..count)
        .map(|i| traj.times()[(i * stride).min(traj.times().len() - 1)])
        .collect();
    let matrix = compactness_diagnostic(&traj, &frame, &sample_times, true)
        .map_err(|e| CliError::Scenario(e.to_string()))?;
    let mut max_off: f64 = 0.0;
    for (i, row) in matrix.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if i != j {
                max_off = max_off.max(d);
            }
        }
    }
    let report = CompactnessReport {
        scenario: scenario.name.clone(),
        sample_times,
        max_off_diagonal: max_off,
        matrix,
    };
    std::fs::create_dir_all(output_dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", output_dir.display())))?;
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(
        &output_dir.join(format!("{}_compactness.json", scenario.name)),
        json.as_bytes(),
    )?;
    Ok(vec![AuditOutcome {
        name: "compactness_matrix_finite".into(),
        passed: max_off.is_finite(),
        measured: max_off,
        threshold: f64::INFINITY,
        detail: "max off-diagonal renormalized L3 distance".into(),
    }])
}

/// A placed-profile demo used by the `profiles` subcommand when the suite has
/// no sweep section: a single two-bubble superposition on the default grid.
pub fn default_profile_sweep() -> ProfileSweepConfig {
    ProfileSweepConfig {
        n_modes: 48,
        box_length: 2.0 * std::f64::consts::PI,
        ratio_width_fraction: 0.125,
        separation_width_fraction: 1.0 / 24.0,
        ratios: vec![2.0, 4.0, 16.0],
        separation_fractions: vec![0.125, 0.25, 0.5],
        defect_threshold: 0.05,
    }
}

pub fn first_scenario<'a>(
    suite: &'a SuiteConfig,
    name: Option<&str>,
) -> Result<&'a ScenarioConfig, CliError> {
    match name {
        None => suite
            .scenarios
            .first()
            .ok_or_else(|| CliError::Config("suite has no scenarios".into())),
        Some(n) => suite
            .scenarios
            .iter()
            .find(|s| s.name == n)
            .ok_or_else(|| CliError::Config(format!("no scenario named {n}"))),
    }
}
