//! Command-line front end for `assoc-lab`.
//!
//! Subcommands: `generate` writes an ensemble file, `stability` runs one
//! grid cell, `sweep` runs a whole grid and `selftest` checks the fast field
//! evaluators against brute force.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.

pub mod config;
pub mod output;
pub mod selftest;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use assoc_lab::experiments::{sweep_with, CellStatus, Experiment};
use assoc_lab::{
    default_sparsity, gen_bernoulli, gen_fixed_weight, gen_gb, BlockLayout, CapacityRule, ModelSpec,
    SweepGrid, SweepRecord,
};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{Format, RawConfig, RunConfig};
use output::{csv_preamble, csv_row, JsonReport};

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "ASSOC_LAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "assoc-lab", version, about = "Higher-order sparse associative memory experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a pattern ensemble in the line-oriented text format.
    Generate(GenerateArgs),
    /// Estimate fixed-point stability for a single parameter cell.
    Stability(RunArgs),
    /// Estimate stability over a parameter grid.
    Sweep(RunArgs),
    /// Check the fast field evaluators against brute-force enumeration.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// bernoulli, fixed or gb
    #[arg(long)]
    pub mode: String,
    /// Number of neurons N (bernoulli, fixed)
    #[arg(long = "n")]
    pub dim: Option<usize>,
    /// Activation probability; defaults to ln N / N
    #[arg(long)]
    pub p: Option<f64>,
    /// Active neurons per pattern (fixed); defaults to round(ln N)
    #[arg(long)]
    pub weight: Option<usize>,
    /// Block count (gb)
    #[arg(long)]
    pub l: Option<usize>,
    /// Block size (gb)
    #[arg(long)]
    pub c: Option<usize>,
    /// Number of patterns M
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Flags shared by `stability` and `sweep`; each overrides the config key
/// of the same name. List-valued keys take comma separated values.
#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// key=value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// amari, willshaw or gb
    #[arg(long)]
    pub model: Option<String>,
    /// Fixed interaction order n
    #[arg(long)]
    pub order: Option<String>,
    /// Logarithmic order n = round(kappa ln N)
    #[arg(long)]
    pub kappa: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Number of neurons N (amari, willshaw)
    #[arg(long = "n")]
    pub dim: Option<String>,
    /// Block count (gb)
    #[arg(long)]
    pub l: Option<String>,
    /// Block size (gb)
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// bernoulli or fixed
    #[arg(long)]
    pub patterns: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// Subset enumeration budget for clipped fields
    #[arg(long)]
    pub budget: Option<String>,
    /// Largest allowed message count M
    #[arg(long)]
    pub cap: Option<String>,
    /// csv or json
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<String>,
    /// Omit wall-clock timings so output is byte-identical across runs
    #[arg(long)]
    pub reproducible: bool,
    /// Report each finished cell on standard error
    #[arg(long)]
    pub progress: bool,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Random instances per check
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl RunArgs {
    /// Reads the config file (if any) and applies the flags on top.
    pub fn to_config(&self) -> Result<RunConfig, CliError> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                RawConfig::parse(&text)?
            }
            None => RawConfig::default(),
        };
        let flags = [
            ("model", &self.model),
            ("order", &self.order),
            ("kappa", &self.kappa),
            ("gamma", &self.gamma),
            ("alpha", &self.alpha),
            ("N", &self.dim),
            ("l", &self.l),
            ("c", &self.c),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("patterns", &self.patterns),
            ("delta", &self.delta),
            ("budget", &self.budget),
            ("cap", &self.cap),
            ("format", &self.format),
            ("threads", &self.threads),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.set(key, v.clone())?;
            }
        }
        if let Some(p) = &self.output {
            raw.set("output", p.to_string_lossy())?;
        }
        if self.reproducible {
            raw.set("reproducible", "true")?;
        }
        if self.progress {
            raw.set("progress", "true")?;
        }
        if raw.get("threads").is_none() {
            if let Ok(v) = std::env::var(THREADS_ENV) {
                raw.set("threads", v)?;
            }
        }
        RunConfig::resolve(&raw)
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write + Send>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn run_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let cfg = |msg: String| CliError::Config(msg);
    let need_dim = || args.dim.ok_or_else(|| cfg("--n is required for this mode".into()));
    let ensemble = match args.mode.as_str() {
        "bernoulli" => {
            let dim = need_dim()?;
            let p = match args.p {
                Some(p) => p,
                None => default_sparsity(dim).map_err(|e| cfg(e.to_string()))?,
            };
            gen_bernoulli(dim, p, args.m, args.seed)
        }
        "fixed" => {
            let dim = need_dim()?;
            let weight = args
                .weight
                .unwrap_or_else(|| ((dim as f64).ln().round() as usize).max(1));
            gen_fixed_weight(dim, weight, args.m, args.seed)
        }
        "gb" => {
            let (l, c) = args
                .l
                .zip(args.c)
                .ok_or_else(|| cfg("--l and --c are required for gb".into()))?;
            let layout = BlockLayout::new(l, c).map_err(|e| cfg(e.to_string()))?;
            gen_gb(layout, args.m, args.seed)
        }
        other => return Err(cfg(format!("unknown mode `{other}`"))),
    }
    .map_err(|e| cfg(e.to_string()))?;
    let mut out = open_output(&args.output)?;
    out.write_all(assoc_lab::patterns::write_ensemble(&ensemble).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn template(cfg: &RunConfig) -> Result<Experiment, CliError> {
    let first = cfg.dims[0];
    let spec = ModelSpec::new(cfg.model, cfg.order, cfg.gammas[0], first.layout())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let rule = CapacityRule::for_model(&spec, cfg.alphas[0]).map_err(|e| CliError::Config(e.to_string()))?;
    let mut exp = Experiment::new(spec, rule, first);
    exp.patterns = cfg.patterns;
    exp.delta = cfg.delta;
    exp.budget = cfg.budget;
    exp.capacity_cap = cfg.cap;
    Ok(exp)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(runtime)?;
    Ok(pool.install(f))
}

/// Runs the configured grid, streaming rows to the output as cells finish.
pub fn run_grid(cfg: &RunConfig) -> Result<Vec<SweepRecord>, CliError> {
    let exp = template(cfg)?;
    let grid = SweepGrid {
        alphas: cfg.alphas.clone(),
        dims: cfg.dims.clone(),
        gammas: cfg.gammas.clone(),
    };
    let echo = cfg.echo();
    let mut out = open_output(&cfg.output)?;
    if cfg.format == Format::Csv {
        out.write_all(csv_preamble(&echo, cfg.reproducible).as_bytes())?;
        out.flush()?;
    }
    let total = grid.len();
    let mut io_error: Option<io::Error> = None;
    let mut done = 0usize;
    let records = with_threads(cfg.threads, || {
        sweep_with(&exp, &grid, cfg.trials, cfg.seed, |rec| {
            done += 1;
            if cfg.progress {
                eprintln!(
                    "[{done}/{total}] N={} gamma={} alpha={} -> {}{}",
                    rec.dim,
                    rec.gamma,
                    rec.alpha,
                    rec.status.as_str(),
                    rec.rate.map(|r| format!(" rate={r:.4}")).unwrap_or_default()
                );
            }
            if let Some(reason) = &rec.reason {
                eprintln!("cell N={} gamma={} alpha={}: {reason}", rec.dim, rec.gamma, rec.alpha);
            }
            if cfg.format == Format::Csv && io_error.is_none() {
                let row = csv_row(rec, cfg.reproducible);
                if let Err(e) = out.write_all(row.as_bytes()).and_then(|_| out.flush()) {
                    io_error = Some(e);
                }
            }
        })
    })?
    .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let mut records = records;
    if cfg.reproducible {
        for r in &mut records {
            r.wall_ms = None;
        }
    }
    if cfg.format == Format::Json {
        JsonReport::new(&echo, records.clone()).write_to(&mut out)?;
        out.flush()?;
    }
    Ok(records)
}

fn check_records(records: &[SweepRecord]) -> Result<(), CliError> {
    let bad = records.iter().filter(|r| r.status == CellStatus::Error).count();
    if bad > 0 {
        return Err(CliError::Runtime(format!("{bad} cell(s) failed")));
    }
    Ok(())
}

pub fn run_stability(args: &RunArgs) -> Result<(), CliError> {
    let cfg = args.to_config()?;
    if cfg.cells() != 1 {
        return Err(CliError::Config(format!(
            "stability runs a single cell but the config describes {}; use `sweep`",
            cfg.cells()
        )));
    }
    let records = run_grid(&cfg)?;
    match records[0].status {
        CellStatus::Ok => Ok(()),
        _ => Err(CliError::Runtime(
            records[0].reason.clone().unwrap_or_else(|| "cell not run".into()),
        )),
    }
}

pub fn run_sweep(args: &RunArgs) -> Result<(), CliError> {
    let cfg = args.to_config()?;
    let records = run_grid(&cfg)?;
    check_records(&records)
}

pub fn run_selftest_cmd(args: &SelftestArgs) -> Result<(), CliError> {
    if args.instances == 0 {
        return Err(CliError::Config("--instances must be positive".into()));
    }
    let results = selftest::run_selftest(args.instances, args.seed).map_err(runtime)?;
    let mut failed = 0;
    for r in &results {
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} {} ({} instances, {} failures)", r.name, r.instances, r.failures);
        failed += usize::from(!r.passed());
    }
    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} check(s) failed")));
    }
    Ok(())
}

/// Parses arguments, runs the subcommand and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => run_generate(a),
        Command::Stability(a) => run_stability(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Selftest(a) => run_selftest_cmd(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("assoc-lab: {e}");
            e.exit_code()
        }
    }
}
