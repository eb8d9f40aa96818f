mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use weblab::hypotheses::KernelMode;
use weblab::sublevel::{CellSample, Method};

#[derive(Debug, Parser)]
#[command(name = "weblab", version, about = "Hypothesis checks, flows and sublevel-set measurements for planar 3-web data")]
pub struct Cli {
    /// Worker threads (default: available parallelism; WEBLAB_THREADS overrides).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural hypotheses of a triple datum.
    Check(CheckArgs),
    /// Sublevel-set measures over a dyadic eps sweep, with an exponent fit.
    Measure(MeasureArgs),
    /// Alternating flow chains and samples of the three-square function.
    Flows(FlowsArgs),
    /// Association tree of a linear datum.
    Derive(DeriveArgs),
    /// Jet-kernel dimensions at sample points.
    Jets(JetsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    FloatSvd,
    ExactRational,
}

impl From<ModeArg> for KernelMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FloatSvd => KernelMode::FloatSvd,
            ModeArg::ExactRational => KernelMode::ExactRational,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Grid,
    MonteCarlo,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Grid => Method::Grid,
            MethodArg::MonteCarlo => Method::MonteCarlo,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CellArg {
    Jittered,
    Center,
}

impl From<CellArg> for CellSample {
    fn from(c: CellArg) -> Self {
        match c {
            CellArg::Jittered => CellSample::Jittered,
            CellArg::Center => CellSample::Center,
        }
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub datum: PathBuf,
    /// Grid cells per axis for the grid-based checks.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    /// Highest jet order for the main hypothesis.
    #[arg(long, default_value_t = 6)]
    pub nmax: usize,
    /// Points per axis for the jet-kernel scan.
    #[arg(long, default_value_t = 3)]
    pub jet_points: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::FloatSvd)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Sampled pairs for the det B criterion.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub datum: PathBuf,
    /// Test functions: a JSON array of three.
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long, default_value_t = -12, allow_hyphen_values = true)]
    pub eps_min: i32,
    #[arg(long, default_value_t = -3, allow_hyphen_values = true)]
    pub eps_max: i32,
    /// Cells per axis (grid) or samples (Monte Carlo).
    #[arg(long, default_value_t = 512)]
    pub res: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Grid)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = CellArg::Jittered)]
    pub cell_sample: CellArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Fit JSON (default: the CSV path with extension `fit.json`).
    #[arg(long)]
    pub fit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FlowsArgs {
    #[command(subcommand)]
    pub command: FlowsCommand,
}

#[derive(Debug, Subcommand)]
pub enum FlowsCommand {
    /// Stages of one chain.
    Chain(ChainArgs),
    /// The three-square function on a seeded parameter cloud.
    ScriptF(ScriptFArgs),
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long)]
    pub datum: PathBuf,
    /// Base point `x1,x2,t`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z: Vec<f64>,
    /// Up to four stage times.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub tvec: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eps: f64,
    #[arg(long, default_value_t = weblab::flows::DEFAULT_STEPS_PER_UNIT)]
    pub steps_per_unit: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScriptFArgs {
    #[arg(long)]
    pub datum: PathBuf,
    /// Base point `x1,x2,t`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub zbar: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub s_max: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    #[arg(long)]
    pub datum: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Keep children whose signature was already seen.
    #[arg(long)]
    pub no_dedup: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the tree in DOT format.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JetsArgs {
    #[arg(long)]
    pub datum: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub nmax: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::FloatSvd)]
    pub mode: ModeArg,
    /// Points per axis of the scan grid, used when no `--point` is given.
    #[arg(long, default_value_t = 3)]
    pub grid: usize,
    /// Explicit point `x1,x2`; repeatable.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub point: Vec<[f64; 2]>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the full scan as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad coordinate `{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(format!("expected `x1,x2`, got `{s}`")),
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, String> {
    match std::env::var("WEBLAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("WEBLAB_THREADS must be a positive integer, got `{v}`")),
        },
        Err(_) => Ok(flag.filter(|&n| n > 0)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match thread_count(cli.threads) {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
        }
        Ok(None) => {}
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    }
    let start = Instant::now();
    let result = commands::run(cli.command);
    match result {
        Ok(summary) => {
            for line in summary {
                println!("{line}");
            }
            println!("wall time: {:.3}s", start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
