//! Command-line experiment runner. Exit codes: 0 on success, 1 for an
//! invalid experiment description, 2 for dataset/filesystem failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use poem_bench::runner::{cmd_run, cmd_stepsize_trace, cmd_sweep};
use poem_bench::spec::{load_config, SpecOverlay};
use poem_bench::BenchError;

#[derive(Parser)]
#[command(
    name = "poem-bench",
    about = "Stochastic zeroth-order optimization benchmark harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded optimizations and write full value-trace CSVs.
    Run(CommonArgs),
    /// Sweep a parameter grid and write the final-objective summary CSV.
    Sweep(CommonArgs),
    /// Overlay adaptive step-size curves across initial movements.
    StepsizeTrace(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Problem source: a LIBSVM file path (.gz ok), `gen:n=..,d=..,nnz=..,seed=..`,
    /// `synthetic:d=..,noise=..,seed=..`, or `hard:f1,L=..,T=..,d=..`.
    #[arg(long)]
    dataset: Option<String>,

    /// Ball radius for hinge problems.
    #[arg(long)]
    radius: Option<f64>,

    /// Algorithm: poem | poem-unbounded | tpbco | tpge | rsnso.
    #[arg(long)]
    algo: Option<String>,

    /// Iteration budget T (each iteration costs two oracle calls).
    #[arg(short = 'T', long = "iters")]
    iters: Option<u64>,

    /// Comma-separated seed list, e.g. `0,1,2,3,4`.
    #[arg(long)]
    seeds: Option<String>,

    /// Initial movement for the adaptive methods.
    #[arg(long)]
    r_eps: Option<f64>,

    /// Lipschitz overestimate for poem-unbounded (defaults to the
    /// problem's own constant).
    #[arg(long)]
    lbar: Option<f64>,

    /// Confidence level for poem-unbounded.
    #[arg(long)]
    delta: Option<f64>,

    /// Start-to-optimum distance estimate for rsnso.
    #[arg(long)]
    s0: Option<f64>,

    /// Comma-separated parameter grid (r_eps values for the adaptive
    /// methods, 1/L multipliers for the baselines).
    #[arg(long)]
    grid: Option<String>,

    /// Record a trace row every `stride` steps.
    #[arg(long)]
    stride: Option<u64>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Smoothing sequence for tpge: `coarse` (D/t) or `fine` (D/(d^2 t^2)).
    #[arg(long)]
    tpge_mu: Option<String>,

    /// Baseline output point: `uniform` average or `last` iterate.
    #[arg(long)]
    averaging: Option<String>,

    /// `key = value` config file supplying any of the flags above
    /// (command line takes precedence).
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn into_overlay(self) -> Result<SpecOverlay, BenchError> {
        let cli = SpecOverlay {
            dataset: self.dataset,
            radius: self.radius,
            algo: self.algo,
            iters: self.iters,
            seeds: self.seeds,
            r_eps: self.r_eps,
            lbar: self.lbar,
            delta: self.delta,
            s0: self.s0,
            grid: self.grid,
            stride: self.stride,
            out: self.out,
            tpge_mu: self.tpge_mu,
            averaging: self.averaging,
        };
        Ok(match &self.config {
            Some(path) => cli.or(load_config(path)?),
            None => cli,
        })
    }
}

fn run() -> Result<(), BenchError> {
    let cli = Cli::try_parse().map_err(|e| {
        // clap already formats usage errors; print and classify as a bad
        // spec unless it was --help/--version
        if e.use_stderr() {
            BenchError::spec(e.to_string())
        } else {
            let _ = e.print();
            std::process::exit(0);
        }
    })?;
    match cli.command {
        Command::Run(args) => cmd_run(&args.into_overlay()?.resolve()?),
        Command::Sweep(args) => cmd_sweep(&args.into_overlay()?.resolve()?),
        Command::StepsizeTrace(args) => cmd_stepsize_trace(&args.into_overlay()?.resolve()?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
