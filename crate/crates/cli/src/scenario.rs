//! Scenario execution, the audit registry, and suite orchestration.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use critns_core::{
    decay_audit, e_norm, energy_audit, f_norm, l5_spacetime, nse_residual, sample_datum,
    snapshot, solve, trapezoid_error_bound, weighted_sup, SpectralField, TerminationReason,
    Trajectory,
};
use serde::{Deserialize, Serialize};

use crate::config::{scenario_hash, ScenarioConfig, SuiteConfig};
use crate::CliError;

pub const DIVERGENCE_AUDIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditOutcome {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub started_unix_ms: u128,
    pub ended_unix_ms: u128,
    pub terminated_reason: TerminationReason,
    pub artifacts: ArtifactPaths,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactPaths {
    pub norms_csv: String,
    pub audits_json: String,
    pub snapshots: Vec<String>,
}

/// Manifest of a persisted trajectory: times of the stored snapshots, the
/// solver configuration, the termination reason, and the norm table path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub times: Vec<f64>,
    pub solver: critns_core::SolverConfig,
    pub terminated_reason: TerminationReason,
    pub norm_table: String,
    pub snapshots: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub terminated_reason: TerminationReason,
    pub audits: Vec<AuditOutcome>,
}

impl ScenarioReport {
    pub fn all_passed(&self) -> bool {
        self.audits.iter().all(|a| a.passed)
    }
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// Write through a temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("renaming into {}: {e}", path.display())))?;
    Ok(())
}

pub fn build_datum_field(
    scenario: &ScenarioConfig,
    seed: u64,
) -> Result<SpectralField, CliError> {
    let grid = scenario.grid.build()?;
    let datum = scenario.datum.build(seed, &scenario.name);
    let mut field = sample_datum(&datum, &grid)
        .map_err(|e| CliError::Scenario(format!("{}: sampling datum: {e}", scenario.name)))?;
    if let Some(target) = scenario.datum.target_hdot_half() {
        let norm = field
            .sobolev_norm(0.5)
            .map_err(|e| CliError::Scenario(e.to_string()))?;
        if norm > 0.0 {
            field = field.scaled(target / norm);
        }
    }
    Ok(field)
}

/// Solve, audit, and persist one scenario; deterministic given (seed, config).
pub fn run_scenario(
    scenario: &ScenarioConfig,
    seed: u64,
    output_dir: &Path,
    persist_snapshots: bool,
) -> Result<(ScenarioReport, RunManifest), CliError> {
    let started = unix_ms();
    let dir = output_dir.join(&scenario.name);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;

    let u0 = build_datum_field(scenario, seed)?;
    let solver_cfg = scenario.solver.build()?;
    let traj = solve(&u0, scenario.horizon, &solver_cfg)
        .map_err(|e| CliError::Scenario(format!("{}: {e}", scenario.name)))?;

    let audits = run_audits(scenario, &traj)?;

    // norms.csv
    let csv = snapshot::records_to_csv(traj.records());
    write_atomic(&dir.join("norms.csv"), csv.as_bytes())?;

    // audits.json
    let audits_json = serde_json::to_string_pretty(&audits)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&dir.join("audits.json"), audits_json.as_bytes())?;

    // snapshots plus the trajectory manifest (persisted times, solver
    // config, termination reason, norm-table path).
    let mut snapshot_paths = Vec::new();
    if persist_snapshots && scenario.snapshot_stride > 0 {
        let snap_dir = dir.join("snapshots");
        std::fs::create_dir_all(&snap_dir)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", snap_dir.display())))?;
        let last = traj.snapshots().len() - 1;
        let mut persisted_times = Vec::new();
        for (j, field) in traj.snapshots().iter().enumerate() {
            if j % scenario.snapshot_stride != 0 && j != last {
                continue;
            }
            let rel = format!("snapshots/snap_{j:06}.crns");
            let path = dir.join(&rel);
            let tmp = path.with_extension("tmp");
            snapshot::write_fields_to_path(&tmp, traj.grid(), &[field])
                .map_err(|e| CliError::Io(e.to_string()))?;
            std::fs::rename(&tmp, &path)
                .map_err(|e| CliError::Io(e.to_string()))?;
            snapshot_paths.push(rel);
            persisted_times.push(traj.times()[j]);
        }
        let traj_manifest = TrajectoryManifest {
            times: persisted_times,
            solver: solver_cfg,
            terminated_reason: traj.terminated_reason(),
            norm_table: "../norms.csv".into(),
            snapshots: snapshot_paths
                .iter()
                .map(|p| p.trim_start_matches("snapshots/").to_string())
                .collect(),
        };
        let json = serde_json::to_string_pretty(&traj_manifest)
            .map_err(|e| CliError::Io(e.to_string()))?;
        write_atomic(&snap_dir.join("trajectory.json"), json.as_bytes())?;
    }

    let manifest = RunManifest {
        scenario: scenario.name.clone(),
        config_hash: scenario_hash(seed, scenario),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        started_unix_ms: started,
        ended_unix_ms: unix_ms(),
        terminated_reason: traj.terminated_reason(),
        artifacts: ArtifactPaths {
            norms_csv: "norms.csv".into(),
            audits_json: "audits.json".into(),
            snapshots: snapshot_paths,
        },
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&dir.join("manifest.json"), manifest_json.as_bytes())?;

    Ok((
        ScenarioReport {
            name: scenario.name.clone(),
            terminated_reason: traj.terminated_reason(),
            audits,
        },
        manifest,
    ))
}

fn run_audits(
    scenario: &ScenarioConfig,
    traj: &Trajectory,
) -> Result<Vec<AuditOutcome>, CliError> {
    let mut outcomes = Vec::new();
    for name in &scenario.audits {
        let outcome = match name.as_str() {
            "horizon" => AuditOutcome {
                name: name.clone(),
                passed: traj.terminated_reason().is_horizon_reached(),
                measured: traj.end_time(),
                threshold: scenario.horizon,
                detail: format!("terminated with {:?}", traj.terminated_reason()),
            },
            "energy" => {
                let dt = scenario.solver.dt;
                let series: Vec<f64> = traj
                    .records()
                    .iter()
                    .map(|r| r.hdot_threehalf.powi(2))
                    .collect();
                let bound = 10.0 * trapezoid_error_bound(&series, dt).max(1e-14);
                let defect = energy_audit(traj);
                AuditOutcome {
                    name: name.clone(),
                    passed: defect <= bound,
                    measured: defect,
                    threshold: bound,
                    detail: "energy inequality defect vs 10x trapezoid bound".into(),
                }
            }
            "decay" => {
                let report = decay_audit(traj);
                let threshold = scenario.decay_factor * report.initial_hdot_half;
                AuditOutcome {
                    name: name.clone(),
                    passed: report.final_hdot_half <= threshold || report.initial_hdot_half == 0.0,
                    measured: report.final_hdot_half,
                    threshold,
                    detail: format!(
                        "initial {:.6e}, max {:.6e}",
                        report.initial_hdot_half, report.max_hdot_half
                    ),
                }
            }
            "divergence" => {
                let worst = traj
                    .snapshots()
                    .iter()
                    .map(|s| s.divergence_defect())
                    .fold(0.0f64, f64::max);
                AuditOutcome {
                    name: name.clone(),
                    passed: worst <= DIVERGENCE_AUDIT_TOL,
                    measured: worst,
                    threshold: DIVERGENCE_AUDIT_TOL,
                    detail: "max divergence defect over snapshots".into(),
                }
            }
            "interpolation" => {
                let horizon = traj.end_time();
                let f = f_norm(traj, horizon).map_err(|e| CliError::Scenario(e.to_string()))?;
                let sup = traj
                    .records()
                    .iter()
                    .map(|r| r.hdot_half)
                    .fold(0.0f64, f64::max);
                let grad = traj.records().last().unwrap().cum_grad_hhalf_sq;
                let bound = sup.sqrt() * grad.powf(0.25) * (1.0 + 1e-10);
                AuditOutcome {
                    name: name.clone(),
                    passed: f <= bound || bound == 0.0,
                    measured: f,
                    threshold: bound,
                    detail: "F_T vs Hoelder interpolation bound".into(),
                }
            }
            "residual" => {
                let times = traj.times();
                if times.len() < 3 {
                    AuditOutcome {
                        name: name.clone(),
                        passed: false,
                        measured: f64::NAN,
                        threshold: scenario.residual_threshold,
                        detail: "trajectory too short for central differencing".into(),
                    }
                } else {
                    let picks = [times.len() / 4, times.len() / 2, 3 * times.len() / 4];
                    let mut worst: f64 = 0.0;
                    for &j in &picks {
                        let j = j.clamp(1, times.len() - 2);
                        let r = nse_residual(traj, times[j])
                            .map_err(|e| CliError::Scenario(e.to_string()))?;
                        worst = worst.max(r);
                    }
                    AuditOutcome {
                        name: name.clone(),
                        passed: worst <= scenario.residual_threshold,
                        measured: worst,
                        threshold: scenario.residual_threshold,
                        detail: "max momentum-equation residual at sampled interior times".into(),
                    }
                }
            }
            "l5" => {
                let horizon = traj.end_time();
                let value =
                    l5_spacetime(traj, horizon).map_err(|e| CliError::Scenario(e.to_string()))?;
                AuditOutcome {
                    name: name.clone(),
                    passed: value.is_finite(),
                    measured: value,
                    threshold: f64::INFINITY,
                    detail: "space-time L5 norm finiteness".into(),
                }
            }
            "weighted_sup" => {
                let horizon = traj.end_time();
                let report = weighted_sup(traj, horizon)
                    .map_err(|e| CliError::Scenario(e.to_string()))?;
                AuditOutcome {
                    name: name.clone(),
                    passed: report.sup.is_finite(),
                    measured: report.sup,
                    threshold: f64::INFINITY,
                    detail: format!("small-time sup {:.6e}", report.small_time_sup),
                }
            }
            "e_norm" => {
                let horizon = traj.end_time();
                let value =
                    e_norm(traj, horizon).map_err(|e| CliError::Scenario(e.to_string()))?;
                AuditOutcome {
                    name: name.clone(),
                    passed: value.is_finite(),
                    measured: value,
                    threshold: f64::INFINITY,
                    detail: "discrete E_T norm finiteness".into(),
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown audit name {other:?} in scenario {}",
                    scenario.name
                )))
            }
        };
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

#[derive(Debug, Serialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub scenarios: Vec<ScenarioReport>,
    pub checks: Vec<AuditOutcome>,
    pub all_passed: bool,
}

/// Execute the suite: scenarios in parallel over a bounded worker pool, then
/// the configured scaling/profile checks, then a summary.
pub fn run_suite(
    suite: &SuiteConfig,
    persist_snapshots: bool,
) -> Result<SuiteSummary, CliError> {
    std::fs::create_dir_all(&suite.output_dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", suite.output_dir.display())))?;
    let worker_count = suite.threads.max(1).min(suite.scenarios.len().max(1));
    let next = AtomicUsize::new(0);
    type Slot = Mutex<Option<Result<(ScenarioReport, RunManifest), CliError>>>;
    let results: Vec<Slot> = suite.scenarios.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= suite.scenarios.len() {
                    break;
                }
                let result = run_scenario(
                    &suite.scenarios[idx],
                    suite.seed,
                    &suite.output_dir,
                    persist_snapshots,
                );
                *results[idx].lock().unwrap() = Some(result);
            });
        }
    });

    let mut reports = Vec::with_capacity(suite.scenarios.len());
    for cell in results {
        let result = cell.into_inner().unwrap().expect("worker completed");
        reports.push(result?.0);
    }

    let mut checks = Vec::new();
    if let Some(cfg) = &suite.scaling_check {
        checks.push(crate::commands::scaling_check_outcome(cfg, suite.seed)?);
    }
    if let Some(cfg) = &suite.profile_sweep {
        checks.extend(crate::commands::profile_sweep_outcomes(
            cfg,
            Some(&suite.output_dir),
        )?);
    }

    let all_passed =
        reports.iter().all(|r| r.all_passed()) && checks.iter().all(|c| c.passed);
    let summary = SuiteSummary {
        seed: suite.seed,
        scenarios: reports,
        checks,
        all_passed,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&suite.output_dir.join("summary.json"), json.as_bytes())?;
    Ok(summary)
}
