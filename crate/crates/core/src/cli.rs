//! Command-line front end.
//!
//! ```text
//! schelling --sweep symmetric --reps 100 --seed 7 --out results/ --plots
//! ```
//!
//! Every option may also come from a `--config` file of `key = value` lines
//! (`sweep`, `reps`, `seed`, `out`, `k`, `jobs`, `plots`); flags given on the
//! command line win. Exit status is 0 on success, 2 for usage errors and 1
//! when reading or writing files fails.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::error::ExperimentError;
use crate::experiments::{self, SweepOptions, SweepSpec, BUILTIN_SWEEPS};
use crate::plot;
use crate::spectral::DEFAULT_K;

#[derive(Debug, Parser)]
#[command(
    name = "schelling",
    version,
    about = "Run Schelling segregation sweeps on dense random networks"
)]
struct Args {
    /// Built-in sweep name or path to a custom grid file
    #[arg(long)]
    sweep: Option<String>,
    /// Repetitions per grid cell
    #[arg(long)]
    reps: Option<usize>,
    /// Base seed; run seeds are base + cell * reps + rep
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of leading singular values seen by the dimension estimate
    #[arg(long)]
    k: Option<usize>,
    /// Worker threads
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write SVG plots
    #[arg(long)]
    plots: bool,
    /// key = value file supplying defaults for the options above
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub sweep: String,
    pub reps: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub k_singular: usize,
    pub parallelism: usize,
    pub emit_plots: bool,
}

impl Config {
    pub fn new(sweep: impl Into<String>) -> Self {
        Self {
            sweep: sweep.into(),
            reps: 100,
            seed: 0,
            out_dir: PathBuf::from("results"),
            k_singular: DEFAULT_K,
            parallelism: SweepOptions::default().parallelism,
            emit_plots: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Values read from a config file; `None` where the file is silent.
#[derive(Debug, Default)]
struct FileValues {
    sweep: Option<String>,
    reps: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    k: Option<usize>,
    jobs: Option<usize>,
    plots: Option<bool>,
}

fn read_config_file(path: &Path) -> Result<FileValues, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text, path)
}

fn parse_config(text: &str, path: &Path) -> Result<FileValues, CliError> {
    let mut v = FileValues::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| CliError::Usage(format!("{}:{}: {msg}", path.display(), i + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key = value, got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| v.parse::<u64>().map_err(|e| bad(format!("{key}: {e}")));
        match key {
            "sweep" => v.sweep = Some(value.to_string()),
            "reps" => v.reps = Some(num(value)? as usize),
            "seed" => v.seed = Some(num(value)?),
            "out" => v.out = Some(PathBuf::from(value)),
            "k" => v.k = Some(num(value)? as usize),
            "jobs" => v.jobs = Some(num(value)? as usize),
            "plots" => {
                v.plots = Some(match value {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    other => {
                        return Err(bad(format!("plots: expected true or false, got '{other}'")))
                    }
                })
            }
            other => return Err(bad(format!("unknown key '{other}'"))),
        }
    }
    Ok(v)
}

fn resolve(args: Args) -> Result<Config, CliError> {
    let file = match &args.config {
        Some(p) => read_config_file(p)?,
        None => FileValues::default(),
    };
    let sweep = args.sweep.or(file.sweep).ok_or_else(|| {
        CliError::Usage(format!(
            "no sweep given; use --sweep with one of {} or a grid file",
            BUILTIN_SWEEPS.join(", ")
        ))
    })?;
    let mut cfg = Config::new(sweep);
    if let Some(r) = args.reps.or(file.reps) {
        cfg.reps = r;
    }
    if let Some(s) = args.seed.or(file.seed) {
        cfg.seed = s;
    }
    if let Some(o) = args.out.or(file.out) {
        cfg.out_dir = o;
    }
    if let Some(k) = args.k.or(file.k) {
        cfg.k_singular = k;
    }
    if let Some(j) = args.jobs.or(file.jobs) {
        cfg.parallelism = j;
    }
    cfg.emit_plots = args.plots || file.plots.unwrap_or(false);

    if cfg.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if cfg.k_singular < 3 {
        return Err(CliError::Usage("--k must be at least 3".into()));
    }
    if cfg.parallelism == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    Ok(cfg)
}

/// Builtin name, or a grid file named after its stem.
pub fn load_sweep(name_or_path: &str) -> Result<SweepSpec, CliError> {
    if BUILTIN_SWEEPS.contains(&name_or_path) {
        return Ok(experiments::builtin_sweep(name_or_path)?);
    }
    let path = Path::new(name_or_path);
    if !path.is_file() {
        return Err(ExperimentError::UnknownSweep(name_or_path.to_string()).into());
    }
    let mut spec = experiments::load_custom_grid(path)?;
    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
        spec.name = stem.to_string();
    }
    Ok(spec)
}

/// Files written by one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Written {
    pub raw: PathBuf,
    pub aggregate: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Runs the sweep described by `cfg` and writes its outputs.
pub fn execute(cfg: &Config) -> Result<Written, CliError> {
    let spec = load_sweep(&cfg.sweep)?
        .with_reps(cfg.reps)
        .with_seed(cfg.seed);
    spec.validate()?;
    let n = spec.params_base.n;
    if cfg.k_singular > n {
        return Err(CliError::Usage(format!(
            "--k {} exceeds the {n} agents",
            cfg.k_singular
        )));
    }
    let opts = SweepOptions {
        parallelism: cfg.parallelism,
        k_singular: cfg.k_singular,
    };
    let outcome = experiments::run_sweep(&spec, &opts)?;
    let (raw, aggregate) = outcome.write(&cfg.out_dir)?;
    let plots = if cfg.emit_plots {
        plot::emit_plots(&outcome.rows, &outcome.records, &cfg.out_dir, &outcome.name)?
    } else {
        Vec::new()
    };
    Ok(Written {
        raw,
        aggregate,
        plots,
    })
}

/// Parses `args` (program name first), runs, and reports to the given
/// streams. Returns the process exit status.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                2
            } else {
                let _ = write!(out, "{e}");
                0
            };
            return code;
        }
    };
    let result = resolve(args).and_then(|cfg| execute(&cfg));
    match result {
        Ok(w) => {
            let _ = writeln!(out, "{}", w.raw.display());
            let _ = writeln!(out, "{}", w.aggregate.display());
            for p in &w.plots {
                let _ = writeln!(out, "{}", p.display());
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
