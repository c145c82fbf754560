//! Suite configuration: key = value sections in TOML, a suite header plus an
//! array of `[[scenario]]` tables. Schema:
//!
//! ```toml
//! seed = 42                      # master seed (overridden by --seed)
//! output_dir = "runs"            # overridden by --output
//! threads = 2                    # overridden by --threads / CRITNS_THREADS
//!
//! [[scenario]]
//! name = "taylor-green"
//! horizon = 1.0
//! audits = ["horizon", "energy", "decay", "divergence", "interpolation"]
//! snapshot_stride = 8            # persist every k-th snapshot (0 = none)
//! decay_factor = 0.2             # threshold for the "decay" audit
//! residual_threshold = 1e-3      # threshold for the "residual" audit
//!
//! [scenario.grid]
//! n_modes = 16
//! box_length = 6.283185307179586
//! dealias_fraction = 0.6666666666666666   # optional, defaults to 2/3
//!
//! [scenario.datum]
//! kind = "taylor_green"          # taylor_green | band_limited_random | localized_vortex
//! period = 6.283185307179586
//! amplitude = 1.0
//! # band_limited_random also takes: spectrum_slope, k_min, k_max,
//! #   seed (optional; derived from the master seed and scenario name),
//! #   target_hdot_half (optional rescaling of the sampled datum)
//! # localized_vortex takes: width, amplitude
//!
//! [scenario.solver]
//! dt = 0.0625
//! picard_tol = 1e-10             # optional
//! picard_max_iter = 60           # optional
//! norm_blowup_threshold = 1000.0 # optional
//! min_dt = 6.1e-5                # optional, defaults to dt / 1024
//!
//! [scenario.solver.quadrature]   # optional, defaults to gauss_legendre / 8
//! kind = "gauss_legendre"        # gauss_legendre | midpoint
//! nodes = 8
//! ```

use std::path::{Path, PathBuf};

use critns_core::{
    AnalyticDatum, GridSpec, QuadratureKind, QuadratureRule, SolverConfig,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default, rename = "scenario")]
    pub scenarios: Vec<ScenarioConfig>,
    #[serde(default)]
    pub scaling_check: Option<ScalingCheckConfig>,
    #[serde(default)]
    pub profile_sweep: Option<ProfileSweepConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingCheckConfig {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    pub horizon: f64,
    #[serde(default = "default_scaling_tolerance")]
    pub tolerance: f64,
    pub grid: GridConfig,
    pub datum: DatumConfig,
    pub solver: SolverSection,
}

fn default_lambda() -> f64 {
    2.0
}

fn default_scaling_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSweepConfig {
    pub n_modes: usize,
    pub box_length: f64,
    /// Base bubble width for the scale-ratio sweep, as a fraction of L.
    #[serde(default = "default_ratio_width")]
    pub ratio_width_fraction: f64,
    /// Bubble width for the separation sweep, as a fraction of L.
    #[serde(default = "default_separation_width")]
    pub separation_width_fraction: f64,
    #[serde(default = "default_ratios")]
    pub ratios: Vec<f64>,
    /// Core separations as fractions of L.
    #[serde(default = "default_separations")]
    pub separation_fractions: Vec<f64>,
    /// Pythagorean-defect bound at the extreme of each sweep.
    #[serde(default = "default_defect_threshold")]
    pub defect_threshold: f64,
}

fn default_ratio_width() -> f64 {
    0.125
}

fn default_separation_width() -> f64 {
    1.0 / 24.0
}

fn default_ratios() -> Vec<f64> {
    vec![2.0, 4.0, 16.0]
}

fn default_separations() -> Vec<f64> {
    vec![0.125, 0.25, 0.5]
}

fn default_defect_threshold() -> f64 {
    0.05
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_threads() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub horizon: f64,
    #[serde(default = "default_audits")]
    pub audits: Vec<String>,
    /// Persist every k-th snapshot (plus the final one); 0 disables snapshots.
    #[serde(default = "default_snapshot_stride")]
    pub snapshot_stride: usize,
    /// Threshold for the "decay" audit: final <= factor * initial.
    #[serde(default = "default_decay_factor")]
    pub decay_factor: f64,
    /// Threshold for the "residual" audit.
    #[serde(default = "default_residual_threshold")]
    pub residual_threshold: f64,
    pub grid: GridConfig,
    pub datum: DatumConfig,
    pub solver: SolverSection,
}

fn default_audits() -> Vec<String> {
    vec!["horizon".into(), "energy".into(), "divergence".into()]
}

fn default_snapshot_stride() -> usize {
    8
}

fn default_decay_factor() -> f64 {
    1.0
}

fn default_residual_threshold() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_modes: usize,
    pub box_length: f64,
    #[serde(default)]
    pub dealias_fraction: Option<f64>,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec, CliError> {
        let grid = match self.dealias_fraction {
            Some(f) => GridSpec::with_dealias(self.n_modes, self.box_length, f),
            None => GridSpec::new(self.n_modes, self.box_length),
        };
        grid.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatumConfig {
    TaylorGreen {
        period: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    BandLimitedRandom {
        period: f64,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default = "default_slope")]
        spectrum_slope: f64,
        #[serde(default = "default_kmin")]
        k_min: u32,
        #[serde(default = "default_kmax")]
        k_max: u32,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        /// Rescale the sampled field to this Hdot^{1/2} norm.
        #[serde(default)]
        target_hdot_half: Option<f64>,
    },
    LocalizedVortex {
        width: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_slope() -> f64 {
    -1.0
}

fn default_kmin() -> u32 {
    1
}

fn default_kmax() -> u32 {
    2
}

impl DatumConfig {
    /// Concrete datum; random data without an explicit seed derive one
    /// deterministically from the master seed and the scenario name.
    pub fn build(&self, master_seed: u64, scenario_name: &str) -> AnalyticDatum {
        match self {
            DatumConfig::TaylorGreen { period, amplitude } => AnalyticDatum::TaylorGreen {
                period: *period,
                amplitude: *amplitude,
            },
            DatumConfig::BandLimitedRandom {
                period,
                seed,
                spectrum_slope,
                k_min,
                k_max,
                amplitude,
                ..
            } => AnalyticDatum::BandLimitedRandom {
                seed: seed.unwrap_or_else(|| derive_seed(master_seed, scenario_name)),
                spectrum_slope: *spectrum_slope,
                k_min: *k_min,
                k_max: *k_max,
                amplitude: *amplitude,
                period: *period,
            },
            DatumConfig::LocalizedVortex { width, amplitude } => {
                AnalyticDatum::LocalizedVortex {
                    width: *width,
                    amplitude: *amplitude,
                }
            }
        }
    }

    pub fn target_hdot_half(&self) -> Option<f64> {
        match self {
            DatumConfig::BandLimitedRandom {
                target_hdot_half, ..
            } => *target_hdot_half,
            _ => None,
        }
    }
}

fn derive_seed(master: u64, name: &str) -> u64 {
    // FNV-1a over the scenario name, mixed with the master seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ master;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverSection {
    pub dt: f64,
    #[serde(default)]
    pub picard_tol: Option<f64>,
    #[serde(default)]
    pub picard_max_iter: Option<usize>,
    #[serde(default)]
    pub norm_blowup_threshold: Option<f64>,
    #[serde(default)]
    pub min_dt: Option<f64>,
    #[serde(default)]
    pub quadrature: Option<QuadratureSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureSection {
    pub kind: QuadratureKind,
    pub nodes: usize,
}

impl SolverSection {
    pub fn build(&self) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::standard(self.dt);
        if let Some(tol) = self.picard_tol {
            cfg.picard_tol = tol;
        }
        if let Some(iters) = self.picard_max_iter {
            cfg.picard_max_iter = iters;
        }
        if let Some(threshold) = self.norm_blowup_threshold {
            cfg.norm_blowup_threshold = threshold;
        }
        if let Some(min_dt) = self.min_dt {
            cfg.min_dt = min_dt;
        }
        if let Some(q) = &self.quadrature {
            cfg.duhamel_quadrature = QuadratureRule::new(q.kind, q.nodes)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(cfg)
    }
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parse a suite; TOML errors carry line/column positions.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let suite: SuiteConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        let mut seen = std::collections::HashSet::new();
        for s in &suite.scenarios {
            if !(s.horizon > 0.0) {
                return Err(CliError::Config(format!(
                    "scenario {}: horizon must be positive",
                    s.name
                )));
            }
            if !seen.insert(s.name.clone()) {
                return Err(CliError::Config(format!(
                    "duplicate scenario name {}",
                    s.name
                )));
            }
        }
        Ok(suite)
    }

    /// Bundled default suite.
    pub fn default_suite() -> Self {
        Self::parse(DEFAULT_SUITE_TOML).expect("bundled suite must parse")
    }
}

/// Deterministic hash of one scenario's canonical serialization, prefixed
/// with the master seed.
pub fn scenario_hash(seed: u64, scenario: &ScenarioConfig) -> String {
    let canonical =
        toml::to_string(scenario).unwrap_or_else(|_| format!("{scenario:?}"));
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(2 * digest.len());
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

pub const DEFAULT_SUITE_TOML: &str = include_str!("../../../configs/default.toml");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_default_suite_parses() {
        let suite = SuiteConfig::default_suite();
        assert!(!suite.scenarios.is_empty());
    }

    #[test]
    fn malformed_config_reports_position() {
        let err = SuiteConfig::parse("seed = \"not a number\"").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 1"), "missing position info: {msg}");
    }

    #[test]
    fn duplicate_names_rejected() {
        let text = r#"
[[scenario]]
name = "a"
horizon = 1.0
[scenario.grid]
n_modes = 8
box_length = 1.0
[scenario.datum]
kind = "taylor_green"
period = 1.0
[scenario.solver]
dt = 0.1

[[scenario]]
name = "a"
horizon = 1.0
[scenario.grid]
n_modes = 8
box_length = 1.0
[scenario.datum]
kind = "taylor_green"
period = 1.0
[scenario.solver]
dt = 0.1
"#;
        assert!(SuiteConfig::parse(text).is_err());
    }

    #[test]
    fn hash_is_deterministic_and_seed_sensitive() {
        let suite = SuiteConfig::default_suite();
        let a = scenario_hash(1, &suite.scenarios[0]);
        let b = scenario_hash(1, &suite.scenarios[0]);
        let c = scenario_hash(2, &suite.scenarios[0]);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
