use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::config::{Experiment, ExperimentConfig, Format, SCHEMA};

/// Runs flowdet experiments and writes CSV/JSON reports.
#[derive(Debug, Parser)]
#[command(name = "flowdet", version, after_long_help = SCHEMA, after_help = "Run with --help for the config file schema.")]
pub struct Cli {
    /// Experiment to run; required unless the config file names one.
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// JSON config file; explicit flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Kronecker slope in (0, 1).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Number of continued-fraction convergents.
    #[arg(long)]
    pub convergents: Option<usize>,
    /// Comma-separated, strictly increasing window sizes.
    #[arg(long, value_delimiter = ',', value_name = "N,N,...")]
    pub n_schedule: Option<Vec<usize>>,
    /// Random cases to draw when the config lists none.
    #[arg(long)]
    pub count: Option<usize>,
    /// Report path; defaults to <out_dir>/<experiment>-<unix time>.<format>.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads.
    #[arg(long, env = "FLOWDET_JOBS", default_value_t = 1)]
    pub jobs: usize,
    /// Record per-case wall time in runtime_ms (makes reports nondeterministic).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub config: ExperimentConfig,
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub timings: bool,
}

#[derive(Debug)]
pub enum ParseError {
    /// Includes `--help` and `--version`, which are not failures.
    Clap(clap::Error),
    Config(String),
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseError::Clap(e) => write!(f, "{e}"),
            ParseError::Config(m) => write!(f, "error: {m}"),
        }
    }
}

fn extension_format(path: &Path) -> Option<Format> {
    match path.extension()?.to_str()? {
        "csv" => Some(Format::Csv),
        "json" => Some(Format::Json),
        _ => None,
    }
}

/// Merges flags over the optional config file and validates the result.
pub fn parse_flags<I, T>(argv: I) -> Result<Invocation, ParseError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ParseError::Clap)?;
    let mut config = match &cli.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| ParseError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text).map_err(|e| ParseError::Config(format!("{}: {e}", path.display())))?
        }
        None => {
            let experiment = cli
                .experiment
                .ok_or_else(|| ParseError::Config("--experiment is required without --config".into()))?;
            ExperimentConfig::new(experiment)
        }
    };
    if let Some(e) = cli.experiment {
        config.experiment = e;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(t) = cli.theta {
        config.theta = t;
    }
    if let Some(c) = cli.convergents {
        config.convergents = c;
    }
    if let Some(n) = cli.n_schedule {
        config.n_schedule = n;
    }
    if let Some(c) = cli.count {
        config.count = c;
    }
    let from_ext = cli.out.as_deref().and_then(extension_format);
    match (cli.format, from_ext) {
        (Some(f), Some(g)) if f != g => {
            return Err(ParseError::Config(format!(
                "--format {} conflicts with the extension of --out {}",
                f.extension(),
                cli.out.as_ref().expect("extension implies a path").display()
            )))
        }
        (Some(f), _) | (None, Some(f)) => config.format = f,
        (None, None) => {}
    }
    if cli.jobs == 0 {
        return Err(ParseError::Config("--jobs must be at least 1".into()));
    }
    config.validate().map_err(ParseError::Config)?;
    Ok(Invocation {
        config,
        out: cli.out,
        jobs: cli.jobs,
        timings: cli.timings,
    })
}

impl Invocation {
    /// `--out`, or a fresh name under `out_dir`.
    pub fn output_path(&self) -> PathBuf {
        if let Some(p) = &self.out {
            return p.clone();
        }
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.config.out_dir.join(format!(
            "{}-{stamp}.{}",
            self.config.experiment,
            self.config.format.extension()
        ))
    }
}

/// `dir/stem.suffix` next to a report.
pub fn sibling(report: &Path, suffix: &str) -> PathBuf {
    let stem = report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    report.with_file_name(format!("{stem}.{suffix}"))
}
