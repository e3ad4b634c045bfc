//! Command-line driver: argument parsing, config files, output routing and
//! exit codes. The numerical work lives in the `dirac_ee` crate.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dirac_ee::{Error, ErrorClass};

use crate::config::ExperimentConfig;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "DIRAC_EE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(String),
    #[error("failing criteria: {}", .0.join(", "))]
    SuiteFailed(Vec<String>),
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.class().as_str(),
            CliError::Io { .. } => "IO",
            CliError::Config(_) => ErrorClass::Argument.as_str(),
            CliError::SuiteFailed(_) => "SUITE",
        }
    }

    /// 1 suite failure, 2 argument or geometry, 3 resource, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SuiteFailed(_) => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Geometry | ErrorClass::Argument => 2,
                ErrorClass::Resource => 3,
                ErrorClass::Numerical => 4,
            },
            CliError::Io { .. } => 3,
            CliError::Config(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "dirac-ee", version, about = "Entanglement entropy of free Dirac fermions on intervals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// Read the command and its flags from a `key = value` file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the effective invocation as a config file.
    #[arg(long = "save-config", global = true)]
    pub save_config: Option<PathBuf>,
    /// Output format; tables default to csv, reports to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct PairArgs {
    #[arg(long)]
    pub i1: Option<String>,
    #[arg(long)]
    pub i2: Option<String>,
}

#[derive(Debug, Args, Clone)]
pub struct SweepArgs {
    #[arg(long = "kappa-min", default_value_t = 200.0)]
    pub kappa_min: f64,
    #[arg(long = "kappa-max", default_value_t = 260.0)]
    pub kappa_max: f64,
    #[arg(long, default_value_t = 13)]
    pub samples: usize,
    /// `window` or `none`.
    #[arg(long, default_value = "window")]
    pub averaging: String,
    /// `auto`, `scale:<factor>` or a fixed count per interval.
    #[arg(long, default_value = "auto")]
    pub nodes: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form trace for separated intervals.
    Formula {
        #[command(flatten)]
        pair: PairArgs,
        /// Grouped interval sets `A|B`, e.g. `0,1;4,5|2,3`.
        #[arg(long)]
        sets: Option<String>,
        #[arg(long, default_value = "halpha:1")]
        f: String,
    },
    /// The U coefficient `U(s1,s2;f)`.
    Ucoef {
        #[arg(long, default_value = "halpha:1")]
        f: String,
        #[arg(long, default_value_t = 0.0)]
        s1: f64,
        #[arg(long, default_value_t = 1.0)]
        s2: f64,
    },
    /// Eigenvalues of the band-limited projector on a union of intervals.
    Spectrum {
        /// Interval set, e.g. `0,1;2,3`.
        #[arg(long)]
        sets: String,
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value = "auto")]
        nodes: String,
    },
    /// Band-limited mutual information against twice the closed form.
    Mutualinfo {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        sets: Option<String>,
        #[arg(long, default_value = "halpha:1")]
        f: String,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Block-word trace for a monomial `t^m`.
    Polytrace {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 40)]
        nodes: usize,
    },
    /// Schatten norm of the cross block between two intervals.
    Schatten {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 40)]
        nodes: usize,
        /// Truncation length for an unbounded interval.
        #[arg(long)]
        truncate: Option<f64>,
    },
    /// Overlapping intervals: closed form, polynomial limit or cutoff sweep.
    Intersect {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value = "halpha:1")]
        f: String,
        /// `closed`, `poly` or `cutoff`.
        #[arg(long, default_value = "closed")]
        method: String,
        /// Monomial degree for `poly`.
        #[arg(long, default_value_t = 2)]
        m: u32,
        /// Comma-separated ε values for `poly`.
        #[arg(long, default_value = "0.04,0.02,0.01")]
        eps: String,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Widom combination for mollified indicators and its ε → 0 limit.
    Widom {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value = "halpha:1")]
        f: String,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
    },
    /// Herglotz representation of h_α against direct evaluation.
    Herglotz {
        #[arg(long)]
        alpha: f64,
        /// Comma-separated points in (0,1).
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        t: String,
    },
    /// Exact Rényi mutual information against its large-separation term.
    Asymptotics {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Comma-separated increasing shifts of the second interval.
        #[arg(long, default_value = "50,100,200")]
        r: String,
    },
    /// The acceptance battery.
    Suite {
        /// Criterion ids; repeat or separate by commas.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Formula { .. } => "formula",
            Command::Ucoef { .. } => "ucoef",
            Command::Spectrum { .. } => "spectrum",
            Command::Mutualinfo { .. } => "mutualinfo",
            Command::Polytrace { .. } => "polytrace",
            Command::Schatten { .. } => "schatten",
            Command::Intersect { .. } => "intersect",
            Command::Widom { .. } => "widom",
            Command::Herglotz { .. } => "herglotz",
            Command::Asymptotics { .. } => "asymptotics",
            Command::Suite { .. } => "suite",
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    // a pool may already exist when driven from tests
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Splices a config file in front of the remaining command-line flags.
fn expand_config(args: &[String]) -> Result<Vec<String>, CliError> {
    let mut rest = Vec::new();
    let mut driver = Vec::new();
    let mut config = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            config = Some(it.next().ok_or_else(|| CliError::Config("--config needs a path".into()))?.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else if a == "--save-config" || a.starts_with("--save-config=") {
            driver.push(a.clone());
            if a == "--save-config" {
                driver.extend(it.next().cloned());
            }
        } else {
            rest.push(a.clone());
        }
    }
    let Some(path) = config else { return Ok(args.to_vec()) };
    let mut cfg = ExperimentConfig::parse(&read_file(Path::new(&path))?)?;
    if rest.is_empty() {
        return Ok(cfg.to_argv().into_iter().chain(driver).collect());
    }
    // command-line flags override config entries of the same name
    let mut line = rest;
    if !line[0].starts_with("--") && line[0] != cfg.command {
        return Err(CliError::Config(format!("config is for '{}', not '{}'", cfg.command, line[0])));
    }
    if line[0].starts_with("--") {
        line.insert(0, cfg.command.clone());
    }
    let over = ExperimentConfig::from_argv(&line)?;
    cfg.entries.retain(|(k, _)| !over.entries.iter().any(|(o, _)| o == k));
    cfg.entries.extend(over.entries);
    Ok(cfg.to_argv().into_iter().chain(driver).collect())
}

fn execute(args: &[String]) -> Result<i32, CliError> {
    configure_threads()?;
    let args = expand_config(args)?;
    let argv = std::iter::once("dirac-ee".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return Ok(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Some(command) = &cli.command else {
        return Err(CliError::Config("no command given; see --help".into()));
    };
    if let Some(path) = &cli.save_config {
        write_file(path, &ExperimentConfig::from_argv(&args)?.render())?;
    }
    let out = commands::dispatch(command, cli.format)?;
    match &cli.output {
        Some(path) => write_file(path, &out.text)?,
        None => print!("{}", out.text),
    }
    match out.failed {
        Some(ids) => Err(CliError::SuiteFailed(ids)),
        None => Ok(0),
    }
}

/// Runs the tool on the arguments after the program name; returns the exit code.
pub fn run(args: &[String]) -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();
    match execute(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            e.exit_code()
        }
    }
}
