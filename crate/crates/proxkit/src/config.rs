//! Command-line flags, config files and the resolved run configuration.
//!
//! Precedence, lowest first: built-in defaults, `--config` TOML file,
//! `PROXKIT_*` environment variables, command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::data::{SimFamily, SimSpec};
use crate::error::{Error, Result};
use crate::experiments::{LossFamily, PenaltyKind, SolverKind};

#[derive(Debug, Parser)]
#[command(name = "proxkit", version, about = "Proximal solvers for regularized regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Fit a penalized model to a delimited data file.
    Fit(Options),
    /// Generate a seeded instance and solve it.
    Simulate(Options),
    /// Bridge-penalty coefficient path over a lambda grid for a data file.
    Path(Options),
    /// Bridge-penalty MSE surface over lambda and q on simulated data.
    Surface(Options),
    /// Check every prox in the catalog against grid minimization.
    CatalogCheck(Options),
}

impl CommandArgs {
    fn split(self) -> (Command, Options) {
        match self {
            CommandArgs::Fit(o) => (Command::Fit, o),
            CommandArgs::Simulate(o) => (Command::Simulate, o),
            CommandArgs::Path(o) => (Command::Path, o),
            CommandArgs::Surface(o) => (Command::Surface, o),
            CommandArgs::CatalogCheck(o) => (Command::CatalogCheck, o),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Fit,
    Simulate,
    Path,
    Surface,
    CatalogCheck,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to the defaults shown.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct Options {
    /// Input data file (fit, path)
    #[arg(env = "PROXKIT_INPUT")]
    pub input: Option<PathBuf>,
    /// TOML file with default values for any flag
    #[arg(long, env = "PROXKIT_CONFIG")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration and exit
    #[arg(long)]
    #[serde(skip)]
    pub print_config: bool,
    /// Model family: gaussian, logistic, poisson (fit) or logistic-l1,
    /// logit-fused, poisson-fused, lq-bridge (simulate) [default: gaussian / logistic-l1]
    #[arg(long, env = "PROXKIT_FAMILY")]
    pub family: Option<String>,
    /// Response column name [default: first column]
    #[arg(long, env = "PROXKIT_RESPONSE")]
    pub response: Option<String>,
    /// Comma-separated predictor columns [default: all but the response]
    #[arg(long, env = "PROXKIT_COLUMNS", value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    /// Penalty kind [default: l1; lq for path and surface]
    #[arg(long, env = "PROXKIT_PENALTY")]
    pub penalty: Option<PenaltyKind>,
    /// Penalty weight, >= 0 [default: 0.1 for fit, family default for simulate]
    #[arg(long, env = "PROXKIT_GAMMA", allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Bridge exponent q in (0, 1) [default: 0.5]
    #[arg(long, env = "PROXKIT_Q", allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Solver [default: fista; cyclic for path and surface]
    #[arg(long, env = "PROXKIT_SOLVER")]
    pub solver: Option<SolverKind>,
    /// Fixed step size > 0 [default: 1/Lipschitz bound]
    #[arg(long, env = "PROXKIT_STEP", allow_negative_numbers = true)]
    pub step: Option<f64>,
    /// ADMM penalty parameter > 0 [default: 1]
    #[arg(long, env = "PROXKIT_RHO", allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Picard-Opial relaxation in (0, 1) [default: 0.5]
    #[arg(long, env = "PROXKIT_KAPPA", allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Envelope damping >= 0 for dual-fb and picard-opial [default: 0.1]
    #[arg(long, env = "PROXKIT_DAMPING", allow_negative_numbers = true)]
    pub damping: Option<f64>,
    /// Use momentum in ista [default: false]
    #[arg(long, env = "PROXKIT_ACCELERATE", num_args = 0..=1, default_missing_value = "true")]
    pub accelerate: Option<bool>,
    /// Adaptive momentum restart [default: false]
    #[arg(long, env = "PROXKIT_RESTART", num_args = 0..=1, default_missing_value = "true")]
    pub restart: Option<bool>,
    /// Backtracking shrink factor in (0, 1) [default: off]
    #[arg(long, env = "PROXKIT_BACKTRACKING", allow_negative_numbers = true)]
    pub backtracking: Option<f64>,
    /// Convergence tolerance > 0 [default: 1e-8]
    #[arg(long, env = "PROXKIT_TOL", allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Iteration budget >= 1 [default: 10000]
    #[arg(long, env = "PROXKIT_MAX_ITER")]
    pub max_iter: Option<usize>,
    /// Random seed [default: 0]
    #[arg(long, env = "PROXKIT_SEED")]
    pub seed: Option<u64>,
    /// Binomial trials per row [default: 1 for fit, 2 for simulate]
    #[arg(long, env = "PROXKIT_TRIALS")]
    pub trials: Option<u32>,
    /// Simulated rows [default: family preset]
    #[arg(long, env = "PROXKIT_N")]
    pub n: Option<usize>,
    /// Simulated columns [default: family preset]
    #[arg(long, env = "PROXKIT_D")]
    pub d: Option<usize>,
    /// Fraction of nonzero true coefficients in (0, 1] [default: family preset]
    #[arg(long, env = "PROXKIT_SPARSITY", allow_negative_numbers = true)]
    pub sparsity: Option<f64>,
    /// Signal-to-noise ratio in dB for lq-bridge [default: 16.5]
    #[arg(long, env = "PROXKIT_SNR", allow_negative_numbers = true)]
    pub snr: Option<f64>,
    /// Number of lambda grid points >= 2 [default: 50]
    #[arg(long, env = "PROXKIT_N_LAMBDA")]
    pub n_lambda: Option<usize>,
    /// Smallest grid lambda as a fraction of lambda_max [default: 1e-4]
    #[arg(long, env = "PROXKIT_LAMBDA_MIN_RATIO", allow_negative_numbers = true)]
    pub lambda_min_ratio: Option<f64>,
    /// Largest grid lambda as a fraction of lambda_max [default: 2]
    #[arg(long, env = "PROXKIT_LAMBDA_MAX_RATIO", allow_negative_numbers = true)]
    pub lambda_max_ratio: Option<f64>,
    /// Explicit comma-separated lambda grid, strictly increasing [default: log grid]
    #[arg(long, env = "PROXKIT_LAMBDAS", value_delimiter = ',', allow_negative_numbers = true)]
    pub lambdas: Option<Vec<f64>>,
    /// Comma-separated q grid for surface [default: 0.1,0.2,...,0.9]
    #[arg(long, env = "PROXKIT_Q_GRID", value_delimiter = ',', allow_negative_numbers = true)]
    pub q_grid: Option<Vec<f64>>,
    /// Worker threads for grid commands [default: 1]
    #[arg(long, env = "PROXKIT_THREADS")]
    pub threads: Option<usize>,
    /// Random draws per catalog entry [default: 50]
    #[arg(long, env = "PROXKIT_DRAWS")]
    pub draws: Option<usize>,
    /// Output directory [default: proxkit-out]
    #[arg(long, env = "PROXKIT_OUT")]
    pub out: Option<PathBuf>,
    /// Record wall-clock seconds in traces (breaks byte-identical reruns) [default: false]
    #[arg(long, env = "PROXKIT_WALL_CLOCK", num_args = 0..=1, default_missing_value = "true")]
    pub wall_clock: Option<bool>,
}

/// Fully resolved configuration, echoed by `--print-config` and in summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<String>>,
    pub family: String,
    pub penalty: PenaltyKind,
    /// `None` means the family default (simulate only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub q: f64,
    pub solver: SolverKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    pub rho: f64,
    pub kappa: f64,
    pub damping: f64,
    pub accelerate: bool,
    pub restart: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backtracking: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub trials: u32,
    pub n: usize,
    pub d: usize,
    pub sparsity: f64,
    pub snr: f64,
    pub n_lambda: usize,
    pub lambda_min_ratio: f64,
    pub lambda_max_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    pub q_grid: Vec<f64>,
    pub threads: usize,
    pub draws: usize,
    pub out: PathBuf,
    pub wall_clock: bool,
}

/// Parsed command line: the resolved config plus whether to only echo it.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub config: RunConfig,
    pub print_config: bool,
}

fn read_file_options(path: &Path) -> Result<Options> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn pick<T>(cli: Option<T>, file: Option<T>) -> Option<T> {
    cli.or(file)
}

/// Merges flags over the config file and fills defaults, then validates.
pub fn resolve(args: CommandArgs) -> Result<Invocation> {
    let (command, cli) = args.split();
    let file = match &cli.config {
        Some(p) => read_file_options(p)?,
        None => Options::default(),
    };
    let family = pick(cli.family, file.family).unwrap_or_else(|| {
        match command {
            Command::Simulate => "logistic-l1",
            Command::Surface => "lq-bridge",
            _ => "gaussian",
        }
        .to_string()
    });
    let preset = match command {
        Command::Simulate => parse_sim_family(&family).ok().map(preset_for),
        Command::Surface => Some(SimSpec::lq_bridge(0)),
        _ => None,
    }
    .unwrap_or_else(|| SimSpec::logistic_l1(0));
    let grid_command = matches!(command, Command::Path | Command::Surface);
    let default_penalty = match (command, parse_sim_family(&family)) {
        _ if grid_command => PenaltyKind::Lq,
        (Command::Simulate, Ok(f)) => default_sim_penalty(f),
        _ => PenaltyKind::L1,
    };
    let config = RunConfig {
        command,
        input: pick(cli.input, file.input),
        response: pick(cli.response, file.response),
        columns: pick(cli.columns, file.columns),
        family,
        penalty: pick(cli.penalty, file.penalty).unwrap_or(default_penalty),
        gamma: pick(cli.gamma, file.gamma).or(match command {
            Command::Fit => Some(0.1),
            _ => None,
        }),
        q: pick(cli.q, file.q).unwrap_or(0.5),
        solver: pick(cli.solver, file.solver).unwrap_or(if grid_command {
            SolverKind::Cyclic
        } else {
            SolverKind::Fista
        }),
        step: pick(cli.step, file.step),
        rho: pick(cli.rho, file.rho).unwrap_or(1.0),
        kappa: pick(cli.kappa, file.kappa).unwrap_or(0.5),
        damping: pick(cli.damping, file.damping).unwrap_or(0.1),
        accelerate: pick(cli.accelerate, file.accelerate).unwrap_or(false),
        restart: pick(cli.restart, file.restart).unwrap_or(false),
        backtracking: pick(cli.backtracking, file.backtracking),
        tol: pick(cli.tol, file.tol).unwrap_or(1e-8),
        max_iter: pick(cli.max_iter, file.max_iter).unwrap_or(10_000),
        seed: pick(cli.seed, file.seed).unwrap_or(0),
        trials: pick(cli.trials, file.trials).unwrap_or(match command {
            Command::Simulate => preset.trials,
            _ => 1,
        }),
        n: pick(cli.n, file.n).unwrap_or(preset.n),
        d: pick(cli.d, file.d).unwrap_or(preset.d),
        sparsity: pick(cli.sparsity, file.sparsity).unwrap_or(preset.sparsity),
        snr: pick(cli.snr, file.snr).unwrap_or(preset.snr),
        n_lambda: pick(cli.n_lambda, file.n_lambda).unwrap_or(50),
        lambda_min_ratio: pick(cli.lambda_min_ratio, file.lambda_min_ratio).unwrap_or(1e-4),
        lambda_max_ratio: pick(cli.lambda_max_ratio, file.lambda_max_ratio).unwrap_or(2.0),
        lambdas: pick(cli.lambdas, file.lambdas),
        q_grid: pick(cli.q_grid, file.q_grid)
            .unwrap_or_else(|| (1..=9).map(|k| k as f64 / 10.0).collect()),
        threads: pick(cli.threads, file.threads).unwrap_or(1),
        draws: pick(cli.draws, file.draws).unwrap_or(crate::catalog::DEFAULT_DRAWS),
        out: pick(cli.out, file.out).unwrap_or_else(|| PathBuf::from("proxkit-out")),
        wall_clock: pick(cli.wall_clock, file.wall_clock).unwrap_or(false),
    };
    validate(&config)?;
    Ok(Invocation {
        config,
        print_config: cli.print_config,
    })
}

fn preset_for(f: SimFamily) -> SimSpec {
    match f {
        SimFamily::LogisticL1 => SimSpec::logistic_l1(0),
        SimFamily::LogitFused => SimSpec::logit_fused(0),
        SimFamily::PoissonFused => SimSpec::poisson_fused(0),
        SimFamily::LqBridge => SimSpec::lq_bridge(0),
    }
}

fn default_sim_penalty(f: SimFamily) -> PenaltyKind {
    match f {
        SimFamily::LogisticL1 => PenaltyKind::L1,
        SimFamily::LogitFused | SimFamily::PoissonFused => PenaltyKind::Fused,
        SimFamily::LqBridge => PenaltyKind::Lq,
    }
}

pub fn parse_sim_family(s: &str) -> Result<SimFamily> {
    SimFamily::from_str(s, false).map_err(|_| {
        Error::Config(format!(
            "invalid value for `family`: `{s}` (expected logistic-l1, logit-fused, poisson-fused or lq-bridge)"
        ))
    })
}

pub fn parse_loss_family(s: &str) -> Result<LossFamily> {
    LossFamily::from_str(s, false).map_err(|_| {
        Error::Config(format!(
            "invalid value for `family`: `{s}` (expected gaussian, logistic or poisson)"
        ))
    })
}

fn range(name: &str, ok: bool, value: impl std::fmt::Display, expected: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("invalid value for `{name}`: {value} (expected {expected})")))
    }
}

fn increasing(v: &[f64]) -> bool {
    !v.is_empty() && v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] > w[0])
}

/// Range checks with messages naming the offending field.
pub fn validate(c: &RunConfig) -> Result<()> {
    match c.command {
        Command::Fit => {
            parse_loss_family(&c.family)?;
        }
        Command::Simulate => {
            parse_sim_family(&c.family)?;
        }
        Command::Surface => {
            range("family", c.family == "lq-bridge", &c.family, "lq-bridge")?;
        }
        Command::Path => {
            range("family", c.family == "gaussian", &c.family, "gaussian")?;
        }
        Command::CatalogCheck => {}
    }
    if matches!(c.command, Command::Fit | Command::Path) {
        match &c.input {
            None => return Err(Error::Config("missing input file".into())),
            Some(p) if !p.is_file() => {
                return Err(Error::Config(format!("input file {} does not exist", p.display())))
            }
            _ => {}
        }
    }
    if let Some(s) = c.step {
        range("step", s > 0.0 && s.is_finite(), s, "> 0")?;
    }
    if let Some(g) = c.gamma {
        range("gamma", g >= 0.0 && g.is_finite(), g, ">= 0")?;
    }
    if let Some(b) = c.backtracking {
        range("backtracking", b > 0.0 && b < 1.0, b, "in (0, 1)")?;
    }
    range("q", c.q > 0.0 && c.q < 1.0, c.q, "in (0, 1)")?;
    range("rho", c.rho > 0.0 && c.rho.is_finite(), c.rho, "> 0")?;
    range("kappa", c.kappa > 0.0 && c.kappa < 1.0, c.kappa, "in (0, 1)")?;
    range("damping", c.damping >= 0.0 && c.damping.is_finite(), c.damping, ">= 0")?;
    range("tol", c.tol > 0.0 && c.tol.is_finite(), c.tol, "> 0")?;
    range("max-iter", c.max_iter >= 1, c.max_iter, ">= 1")?;
    range("trials", c.trials >= 1, c.trials, ">= 1")?;
    range("n", c.n >= 1, c.n, ">= 1")?;
    range("d", c.d >= 1, c.d, ">= 1")?;
    range("sparsity", c.sparsity > 0.0 && c.sparsity <= 1.0, c.sparsity, "in (0, 1]")?;
    range("snr", c.snr.is_finite(), c.snr, "finite")?;
    range("n-lambda", c.n_lambda >= 2, c.n_lambda, ">= 2")?;
    range(
        "lambda-min-ratio",
        c.lambda_min_ratio > 0.0 && c.lambda_min_ratio < c.lambda_max_ratio,
        c.lambda_min_ratio,
        "> 0 and below lambda-max-ratio",
    )?;
    range("lambda-max-ratio", c.lambda_max_ratio.is_finite(), c.lambda_max_ratio, "finite")?;
    if let Some(l) = &c.lambdas {
        range(
            "lambdas",
            increasing(l) && l[0] >= 0.0,
            format!("{l:?}"),
            "non-negative and strictly increasing",
        )?;
    }
    range(
        "q-grid",
        increasing(&c.q_grid) && c.q_grid.iter().all(|q| *q > 0.0 && *q < 1.0),
        format!("{:?}", c.q_grid),
        "strictly increasing values in (0, 1)",
    )?;
    range("threads", c.threads >= 1, c.threads, ">= 1")?;
    range("draws", c.draws >= 1, c.draws, ">= 1")?;
    Ok(())
}

/// Parses `argv` (including the program name) and resolves the config.
/// Clap usage errors are returned as-is so the caller can print them.
pub fn parse_config<I, T>(argv: I) -> std::result::Result<Result<Invocation>, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(resolve(cli.command))
}
