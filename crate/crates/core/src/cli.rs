//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;

use crate::blaschke::{gen_exponential, gen_growing_density, gen_stacked_carleson, io, BlaschkeEvaluator, Placement, SingularAtom, ZeroSequence};
use crate::error::Error;
use crate::experiments::{self, ExperimentConfig, Scenario};
use crate::functions::{BlaschkeDerivative, Constant, DiscFunction, Lacunary, PolePower, SingularAtomDerivative};
use crate::geometry::DiscPoint;
use crate::measure::PolarGrid;
use crate::norms::{hardy_norm_estimate, tilde_l1w_norm, weak_hardy_estimate, weak_quasinorm_mu_p, LambdaGrid, NormSchedule};
use crate::report::write_atomic;
use crate::zeros::{classify, BoxFamily};

#[derive(Debug, Parser)]
#[command(name = "blaschke", version, about = "Blaschke products and weak-type norm diagnostics on the unit disc")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated zero sequence as JSON.
    Gen(GenArgs),
    /// Tabulate B and B' of the materialised product on a polar grid as CSV.
    Eval(EvalArgs),
    /// Estimate one norm and print the estimate as JSON.
    Norm(NormArgs),
    /// Classify a zero sequence as exponential or not.
    Classify(ClassifyArgs),
    /// Run a verification scenario and write its report.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenKind {
    Exponential,
    Growing,
    Stacked,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Zeros per annulus (exponential).
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Number of annuli, or the box level for `stacked`.
    #[arg(long)]
    pub depth: u32,
    /// Density exponent (growing).
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Stacked zero count.
    #[arg(long, default_value_t = 100)]
    pub count: u32,
    #[arg(long, default_value_t = Placement::Radial)]
    pub placement: Placement,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Zero-sequence JSON file.
    #[arg(long)]
    pub zeros: PathBuf,
    /// Radii 1 - 2^-k for k = 0..rings.
    #[arg(long, default_value_t = 8)]
    pub rings: u32,
    #[arg(long, default_value_t = 16)]
    pub angles: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FunctionKind {
    Constant,
    InverseSqrtPole,
    Pole,
    Lacunary,
    Atom,
    BlaschkeDerivative,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Space {
    Weak,
    Tilde,
    Hardy,
    WeakHardy,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    #[arg(long, value_enum)]
    pub function: FunctionKind,
    /// Zero-sequence JSON file, required for `blaschke-derivative`.
    #[arg(long)]
    pub zeros: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Space::Weak)]
    pub space: Space,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
    #[arg(long, default_value_t = 1)]
    pub density: u32,
    #[arg(long, default_value_t = 4)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub zeros: PathBuf,
    #[arg(long)]
    pub depth: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub scenario: Option<Scenario>,
    /// JSON file mirroring the experiment configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub placement: Option<Placement>,
    #[arg(long)]
    pub max_depth: Option<u32>,
    #[arg(long)]
    pub refinements: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
}

/// Failure of one invocation and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Computation(Error),
    ScenarioFailed(Vec<String>),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Computation(_) | Failure::ScenarioFailed(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Computation(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::Format(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}

fn to_pretty(value: &impl serde::Serialize) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn read_zeros(path: &Path) -> Result<ZeroSequence<f64>, Failure> {
    io::read_file(path).map_err(usage)
}

fn gen(args: &GenArgs) -> Result<(), Failure> {
    let seq = match args.kind {
        GenKind::Exponential => gen_exponential::<f64>(args.m, args.depth, args.placement, args.seed),
        GenKind::Growing => gen_growing_density::<f64>(args.s, args.depth),
        GenKind::Stacked => gen_stacked_carleson::<f64>(args.count, args.depth),
    };
    let mut text = io::to_json(&seq);
    if !text.ends_with('\n') {
        text.push('\n');
    }
    emit(&text, args.out.as_deref())
}

fn eval(args: &EvalArgs) -> Result<(), Failure> {
    if args.angles == 0 {
        return Err(Failure::Usage("--angles must be positive".into()));
    }
    let evaluator = BlaschkeEvaluator::finite(ZeroSequence::finite(read_zeros(&args.zeros)?.zeros().to_vec()));
    let mut csv = String::from("re,im,b_re,b_im,db_re,db_im\n");
    for k in 0..args.rings {
        let r = 1.0 - 2f64.powi(-(k as i32));
        for a in 0..args.angles {
            let z = Complex::from_polar(r, std::f64::consts::TAU * a as f64 / args.angles as f64);
            let (b, db) = evaluator.evaluate_with_derivative(&DiscPoint::new(z)?)?;
            let _ = writeln!(csv, "{},{},{},{},{},{}", z.re, z.im, b.value.re, b.value.im, db.value.re, db.value.im);
        }
    }
    emit(&csv, args.out.as_deref())
}

fn norm_of<F: DiscFunction<f64> + ?Sized>(f: &F, args: &NormArgs) -> Result<String, Failure> {
    let radii: Vec<u32> = (0..args.steps as u32).map(|s| (s + 1) * 4).collect();
    let schedule = || -> Result<NormSchedule<f64>, Failure> {
        Ok(NormSchedule::new(PolarGrid::new(args.depth, args.density).map_err(usage)?).with_steps(args.steps))
    };
    let estimate = match args.space {
        Space::Weak => weak_quasinorm_mu_p(f, args.p, &schedule()?)?,
        Space::Tilde => tilde_l1w_norm(f, &schedule()?)?,
        Space::Hardy => hardy_norm_estimate(f, args.p, &radii)?,
        Space::WeakHardy => weak_hardy_estimate(f, args.p, &radii, &LambdaGrid::default())?,
    };
    to_pretty(&estimate)
}

fn norm(args: &NormArgs) -> Result<(), Failure> {
    if !(args.p > 0.0) || args.steps == 0 {
        return Err(Failure::Usage("--p must be positive and --steps at least 1".into()));
    }
    let text = match args.function {
        FunctionKind::Constant => norm_of(&Constant::real(1.0), args)?,
        FunctionKind::InverseSqrtPole => norm_of(&PolePower::new(0.5), args)?,
        FunctionKind::Pole => norm_of(&PolePower::new(1.0), args)?,
        FunctionKind::Lacunary => norm_of(&Lacunary::default(), args)?,
        FunctionKind::Atom => {
            norm_of(&SingularAtomDerivative(SingularAtom::new(Complex::new(1.0, 0.0), 1.0)?), args)?
        }
        FunctionKind::BlaschkeDerivative => {
            let path = args
                .zeros
                .as_deref()
                .ok_or_else(|| Failure::Usage("--zeros is required for blaschke-derivative".into()))?;
            norm_of(&BlaschkeDerivative::truncated(&read_zeros(path)?), args)?
        }
    };
    emit(&text, args.out.as_deref())
}

fn classify_cmd(args: &ClassifyArgs) -> Result<(), Failure> {
    let seq = read_zeros(&args.zeros)?;
    let verdict = classify(&seq, args.depth, &BoxFamily::Dyadic)?;
    emit(&to_pretty(&verdict)?, args.out.as_deref())
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text).map_err(usage)?
        }
        None => ExperimentConfig::new(
            args.scenario.ok_or_else(|| Failure::Usage("either --scenario or --config is required".into()))?,
        ),
    };
    if let Some(s) = args.scenario {
        config.scenario = s;
    }
    if let Some(p) = args.p {
        config.p = p;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(placement) = args.placement {
        config.placement = placement;
    }
    if args.max_depth.is_some() {
        config.max_depth = args.max_depth;
    }
    if args.refinements.is_some() {
        config.refinements = args.refinements;
    }
    if args.out.is_some() {
        config.output = args.out.clone();
    }
    if args.csv_dir.is_some() {
        config.csv_dir = args.csv_dir.clone();
    }
    config.validate().map_err(usage)?;

    let (output, csv_dir) = (config.output.take(), config.csv_dir.take());
    let report = experiments::run(&config)?;
    match &output {
        Some(path) => {
            report.write(path, csv_dir.as_deref())?;
        }
        None => emit(&report.to_json()?, None)?,
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::ScenarioFailed(
            report.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect(),
        ))
    }
}

/// Parses `argv` and executes the chosen subcommand.
pub fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Eval(a) => eval(a),
        Command::Norm(a) => norm(a),
        Command::Classify(a) => classify_cmd(a),
        Command::Verify(a) => verify(a),
    }
}

/// Entry point shared by the binary and the tests; returns the process exit code.
pub fn main_with<I, S>(argv: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Computation(e) => eprintln!("error: {e}"),
                Failure::ScenarioFailed(names) => eprintln!("scenario failed: {}", names.join(", ")),
            }
            failure.code()
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(main_with(std::env::args_os()))
}
