use std::fmt;
use std::path::PathBuf;

use flowdet::determinant::{SignConvention, MAX_WINDOW};
use flowdet::symbol::Symbol;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    TraceSweep,
    DetConvergence,
    RationalFlowSweep,
    NormAudit,
    KernelIdentity,
    K2PairingTable,
    SeriesAudit,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::TraceSweep => "trace-sweep",
            Experiment::DetConvergence => "det-convergence",
            Experiment::RationalFlowSweep => "rational-flow-sweep",
            Experiment::NormAudit => "norm-audit",
            Experiment::KernelIdentity => "kernel-identity",
            Experiment::K2PairingTable => "k2-pairing-table",
            Experiment::SeriesAudit => "series-audit",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Two symbols on a common module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub phi: Symbol,
    pub psi: Symbol,
}

pub fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn default_seed() -> u64 {
    0
}
fn default_count() -> usize {
    10
}
fn default_theta() -> f64 {
    golden()
}
fn default_convergents() -> usize {
    9
}
fn default_schedule() -> Vec<usize> {
    vec![16, 32, 64, 128, 256]
}
fn default_grid() -> usize {
    32
}
fn default_max_degree() -> i64 {
    8
}
fn default_basepoints() -> usize {
    5
}
fn default_t_max() -> f64 {
    200.0
}
fn default_section() -> usize {
    32
}
fn default_out_dir() -> PathBuf {
    PathBuf::from(".")
}

/// Everything an experiment run depends on. Random draws are a function of
/// `seed` and the row index only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Random cases to draw when no explicit `pairs`/`symbols` are given.
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub pairs: Option<Vec<PairSpec>>,
    #[serde(default)]
    pub symbols: Option<Vec<Symbol>>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_convergents")]
    pub convergents: usize,
    #[serde(default = "default_schedule")]
    pub n_schedule: Vec<usize>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_max_degree")]
    pub max_degree: i64,
    #[serde(default = "default_basepoints")]
    pub basepoints: usize,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_section")]
    pub section: usize,
    #[serde(default)]
    pub sign_convention: SignConvention,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            seed: default_seed(),
            count: default_count(),
            pairs: None,
            symbols: None,
            theta: default_theta(),
            convergents: default_convergents(),
            n_schedule: default_schedule(),
            grid: default_grid(),
            max_degree: default_max_degree(),
            basepoints: default_basepoints(),
            t_max: default_t_max(),
            section: default_section(),
            sign_convention: SignConvention::default(),
            out_dir: default_out_dir(),
            format: Format::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_schedule.is_empty() {
            return Err("n_schedule must not be empty".into());
        }
        if self.n_schedule[0] == 0 || self.n_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!(
                "n_schedule {:?} must be positive and strictly increasing",
                self.n_schedule
            ));
        }
        if let Some(n) = self.n_schedule.iter().chain([&self.section]).find(|&&n| n > MAX_WINDOW) {
            return Err(format!("window size {n} exceeds the cap {MAX_WINDOW}"));
        }
        if self.section == 0 {
            return Err("section must be positive".into());
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        if self.convergents == 0 {
            return Err("convergents must be at least 1".into());
        }
        if self.max_degree < 0 {
            return Err("max_degree must be nonnegative".into());
        }
        if self.grid == 0 || self.basepoints == 0 {
            return Err("grid and basepoints must be positive".into());
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(format!("t_max must be positive, got {}", self.t_max));
        }
        let rank = match self.experiment {
            Experiment::RationalFlowSweep => 2,
            _ => 1,
        };
        for (i, p) in self.pairs.iter().flatten().enumerate() {
            if p.phi.module() != p.psi.module() {
                return Err(format!("pairs[{i}]: phi and psi live on different modules"));
            }
            if p.phi.module().rank() != rank {
                return Err(format!("pairs[{i}]: {} needs rank-{rank} symbols", self.experiment));
            }
            if rank == 2 && p.phi.module().rates()[1] != self.theta {
                return Err(format!("pairs[{i}]: module slope differs from theta"));
            }
        }
        for (i, s) in self.symbols.iter().flatten().enumerate() {
            if s.module().rank() != 1 {
                return Err(format!("symbols[{i}]: needs a rank-1 symbol"));
            }
        }
        Ok(())
    }
}

/// Printed by `--help`.
pub const SCHEMA: &str = r#"CONFIG FILE (JSON, all keys optional except "experiment"; explicit flags win):
  experiment       one of trace-sweep, det-convergence, rational-flow-sweep,
                   norm-audit, kernel-identity, k2-pairing-table, series-audit
  seed             u64, default 0; fixes every random draw
  count            random cases when no explicit pairs/symbols, default 10;
                   trace-sweep, norm-audit and kernel-identity draw circle symbols of
                   degree <= max_degree with coefficients in the unit disc,
                   k2-pairing-table uses degree <= 2 and radius 1/2
  pairs            [{"phi": SYMBOL, "psi": SYMBOL}, ...]; an empty list gives 0 rows
  symbols          [SYMBOL, ...] for kernel-identity
  theta            Kronecker slope in (0,1), default (sqrt 5 - 1)/2
  convergents      continued-fraction convergents to sweep, default 9
  n_schedule       strictly increasing window sizes <= 4096, default [16,32,64,128,256]
  grid             sampling points per axis for C1 norm bounds, default 32
  max_degree       band limit of random circle symbols, default 8
  basepoints       random orbit basepoints per convergent, default 5
  t_max            time cutoff of the kernel double integral, default 200
  section          finite-section size for k2-pairing-table, default 32
  sign_convention  "dettr-chain" (default) or "paper-display"
  out_dir          directory for auto-named reports, default "."
  format           "csv" (default) or "json"
SYMBOL:
  {"rates": [1.0], "terms": [{"lambda": [1], "re": 1.0, "im": 0.0}, ...]}
  rates (1) is the circle, (1, theta) the Kronecker torus; "im" defaults to 0.
EXIT CODES: 0 all rows pass, 1 some row fails, 2 usage or config error."#;
