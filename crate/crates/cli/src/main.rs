use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use liftlab_cli::config::{validate_config, Command, ConfigError, ExperimentConfig, GammaSpec, Target};
use liftlab_cli::{execute, EXIT_CONFIG};

/// Lifted Markov processes: simulation, lift checks, spectral analysis and bounds.
#[derive(Debug, Parser)]
#[command(name = "liftlab", version)]
struct Cli {
    /// Master seed; chain k uses stream k of this seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path: `.csv` for the table (report beside it as `.json`), else the report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "LIFTLAB_THREADS")]
    threads: Option<usize>,
    /// Record wall-clock timings in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Simulate trajectories of a process.
    Simulate(SimulateArgs),
    /// Check the lift identities on a test-function dictionary.
    Liftcheck(LiftcheckArgs),
    /// Decay curves, relaxation times and singular values.
    Spectral(SpectralArgs),
    /// Mixing times of the base and lifted walks on the discrete circle.
    Circle(CircleArgs),
    /// Divergence constants, contraction rate and relaxation-time bounds.
    Bounds(BoundsArgs),
    /// Regenerate a reference result.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
    },
    /// Run an experiment from a TOML config; global flags override its keys.
    Run { config: PathBuf },
    /// Check a TOML config without running it.
    Validate { config: PathBuf },
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Potential spec, e.g. `gaussian:m=1,dim=2` or `double-well:beta=0.5`.
    #[arg(long, allow_negative_numbers = true)]
    potential: Option<String>,
    /// overdamped, hamiltonian, langevin, rhmc or bps.
    #[arg(long, allow_negative_numbers = true)]
    process: Option<String>,
    /// Friction or refresh rate γ.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Independent chains.
    #[arg(long, allow_negative_numbers = true)]
    chains: Option<usize>,
    /// Simulated time per chain.
    #[arg(long, allow_negative_numbers = true)]
    horizon: Option<f64>,
    /// Integrator step.
    #[arg(long, allow_negative_numbers = true)]
    step: Option<f64>,
    /// Time between recorded rows.
    #[arg(long, allow_negative_numbers = true)]
    record_every: Option<f64>,
    /// Initial position, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    /// Initial velocity, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    v0: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct LiftcheckArgs {
    /// Potential spec, e.g. `gaussian:m=1,dim=2` or `double-well:beta=0.5`.
    #[arg(long, allow_negative_numbers = true)]
    potential: Option<String>,
    /// overdamped, hamiltonian, langevin, rhmc or bps.
    #[arg(long, allow_negative_numbers = true)]
    process: Option<String>,
    /// Highest test-function degree.
    #[arg(long, allow_negative_numbers = true)]
    degree: Option<usize>,
    /// Total samples, split evenly across chains.
    #[arg(long, allow_negative_numbers = true)]
    samples: Option<usize>,
    /// Independent chains.
    #[arg(long, allow_negative_numbers = true)]
    chains: Option<usize>,
}

#[derive(Debug, Args)]
struct SpectralArgs {
    /// Potential spec, e.g. `gaussian:m=1,dim=2` or `double-well:beta=0.5`.
    #[arg(long, allow_negative_numbers = true)]
    potential: Option<String>,
    /// overdamped, hamiltonian, langevin, rhmc or bps.
    #[arg(long, allow_negative_numbers = true)]
    process: Option<String>,
    /// Friction or refresh rate γ.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Galerkin truncation degree.
    #[arg(long, allow_negative_numbers = true)]
    degree: Option<usize>,
    /// Time grid `start:stop:step`.
    #[arg(long, allow_negative_numbers = true)]
    grid: Option<String>,
    /// Relaxation thresholds in (0, 1).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    eps: Option<Vec<f64>>,
    /// Sweep γ over `start:stop:step` and report the spectral gap.
    #[arg(long, allow_negative_numbers = true)]
    sweep_gamma: Option<String>,
    /// `galerkin` or `empirical`.
    #[arg(long, allow_negative_numbers = true)]
    method: Option<String>,
    /// Empirical method: outer replicas.
    #[arg(long, allow_negative_numbers = true)]
    outer: Option<usize>,
    /// Empirical method: inner replicas per outer replica.
    #[arg(long, allow_negative_numbers = true)]
    inner: Option<usize>,
    /// Empirical method: integrator step.
    #[arg(long, allow_negative_numbers = true)]
    step: Option<f64>,
}

#[derive(Debug, Args)]
struct CircleArgs {
    /// Circle sizes, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    n: Option<Vec<usize>>,
    /// `1/n` or a fixed flip probability.
    #[arg(long, allow_negative_numbers = true)]
    eps_rule: Option<String>,
    /// Mixing threshold in total variation.
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Poincaré constant; estimated from `--potential` when absent.
    #[arg(long, allow_negative_numbers = true)]
    m: Option<f64>,
    /// Lower curvature bound κ₋, with ∇²U ≥ −κ₋.
    #[arg(long, allow_negative_numbers = true)]
    kappa_minus: Option<f64>,
    /// Delay horizon.
    #[arg(long = "T", allow_negative_numbers = true)]
    t: Option<f64>,
    /// Use T = 3/√m.
    #[arg(long = "auto-T")]
    auto_t: bool,
    /// Refresh rate or `auto` for the optimum.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<GammaSpec>,
    /// Relaxation threshold ε in (0, 1).
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// Potential spec, e.g. `gaussian:m=1,dim=2` or `double-well:beta=0.5`.
    #[arg(long, allow_negative_numbers = true)]
    potential: Option<String>,
    /// Galerkin truncation degree.
    #[arg(long, allow_negative_numbers = true)]
    degree: Option<usize>,
}

fn config_for(cmd: Cmd) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    match cmd {
        Cmd::Simulate(a) => {
            c.command = Some(Command::Simulate);
            c.potential = a.potential;
            c.process = a.process;
            c.gamma = a.gamma.map(GammaSpec::Value);
            c.chains = a.chains;
            c.horizon = a.horizon;
            c.step = a.step;
            c.record_every = a.record_every;
            c.x0 = a.x0;
            c.v0 = a.v0;
        }
        Cmd::Liftcheck(a) => {
            c.command = Some(Command::Liftcheck);
            c.potential = a.potential;
            c.process = a.process;
            c.degree = a.degree;
            c.samples = a.samples;
            c.chains = a.chains;
        }
        Cmd::Spectral(a) => {
            c.command = Some(Command::Spectral);
            c.potential = a.potential;
            c.process = a.process;
            c.gamma = a.gamma.map(GammaSpec::Value);
            c.degree = a.degree;
            c.grid = a.grid;
            c.eps = a.eps;
            c.sweep_gamma = a.sweep_gamma;
            c.method = a.method;
            c.outer = a.outer;
            c.inner = a.inner;
            c.step = a.step;
        }
        Cmd::Circle(a) => {
            c.command = Some(Command::Circle);
            c.n = a.n;
            c.eps_rule = a.eps_rule;
            c.tol = a.tol;
        }
        Cmd::Bounds(a) => {
            c.command = Some(Command::Bounds);
            c.m = a.m;
            c.kappa_minus = a.kappa_minus;
            c.t = a.t;
            c.auto_t = a.auto_t.then_some(true);
            c.gamma = a.gamma;
            c.eps = a.eps.map(|e| vec![e]);
            c.potential = a.potential;
            c.degree = a.degree;
        }
        Cmd::Reproduce { target } => {
            c.command = Some(Command::Reproduce);
            c.target = Some(target);
        }
        Cmd::Run { .. } | Cmd::Validate { .. } => unreachable!("handled before"),
    }
    c
}

fn report_config_error(e: &ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let mut config = match cli.command {
        Cmd::Validate { config } => {
            return match validate_config(&config) {
                Ok(_) => {
                    println!("{}: ok", config.display());
                    ExitCode::SUCCESS
                }
                Err(e) => report_config_error(&e),
            };
        }
        Cmd::Run { config } => match validate_config(&config) {
            Ok((c, _)) => c,
            Err(e) => return report_config_error(&e),
        },
        other => config_for(other),
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if cli.out.is_some() {
        config.out = cli.out;
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    ExitCode::from(execute(&config, cli.timings))
}
