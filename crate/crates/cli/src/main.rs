//! Command-line driver. Subcommands mirror the run modes; flags override the
//! optional TOML config file, and `NMG_OUTPUT_DIR` overrides the output
//! directory. Exit codes: 0 = every check passed, 1 = a checked assertion
//! failed, 2 = the run could not complete (bad config, violated precondition,
//! solver or I/O failure).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nmg_cli::config::{self, Mode, Overrides};
use nmg_cli::experiments;

#[derive(Parser)]
#[command(
    name = "nmg",
    version,
    about = "Numerical laboratory for planar nonlocal minimal graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the curvature residual of the initial state.
    Nmc(RunArgs),
    /// Relax to the minimal graph and emit the solution.
    Solve(RunArgs),
    /// Run the inequality suite.
    Verify(RunArgs),
    /// Solve, then assert odd symmetry and the sign pattern.
    ExperimentMaxprinciple(RunArgs),
    /// Sweep eta and check the boundary-jump floor.
    ExperimentStickiness(RunArgs),
}

impl Cmd {
    fn mode(&self) -> Mode {
        match self {
            Cmd::Nmc(_) => Mode::Nmc,
            Cmd::Solve(_) => Mode::Solve,
            Cmd::Verify(_) => Mode::Verify,
            Cmd::ExperimentMaxprinciple(_) => Mode::ExperimentMaxprinciple,
            Cmd::ExperimentStickiness(_) => Mode::ExperimentStickiness,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Cmd::Nmc(a)
            | Cmd::Solve(a)
            | Cmd::Verify(a)
            | Cmd::ExperimentMaxprinciple(a)
            | Cmd::ExperimentStickiness(a) => a,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Where artifacts go (also settable via NMG_OUTPUT_DIR).
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Seed for the randomized spot checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Fractional order in (0, 1).
    #[arg(long)]
    s: Option<f64>,
    /// Stickiness exponent input (> 0).
    #[arg(long)]
    epsilon0: Option<f64>,
    /// Datum strength (>= 0).
    #[arg(long)]
    eta: Option<f64>,
    /// Barrier-error constant (> 0).
    #[arg(long)]
    barrier_c: Option<f64>,
    /// Replace the preset domain half-width.
    #[arg(long)]
    d_override: Option<f64>,
    /// Ramp width of the datum bump.
    #[arg(long)]
    ramp_width: Option<f64>,
    /// Replace the preset plateau height.
    #[arg(long)]
    plateau_height: Option<f64>,
    /// Drop the odd mirror of the datum (right half-line becomes zero).
    #[arg(long)]
    no_odd_datum: bool,
    /// Interior node count.
    #[arg(long)]
    n_nodes: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Sup-norm target on the interior residual.
    #[arg(long)]
    residual_tol: Option<f64>,
    /// Iteration budget per solve.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Initial pseudo-time step (0 = automatic).
    #[arg(long)]
    step0: Option<f64>,
    /// Step shrink factor on rejection, in (0, 1).
    #[arg(long)]
    step_shrink: Option<f64>,
    /// Skip the odd-projection after each step.
    #[arg(long)]
    no_symmetrize: bool,
    /// Comma-separated, strictly decreasing eta values for the sweep.
    #[arg(long, value_delimiter = ',')]
    eta_sweep: Option<Vec<f64>>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            output_dir: self.output_dir.clone(),
            seed: self.seed,
            s: self.s,
            epsilon0: self.epsilon0,
            eta: self.eta,
            barrier_c: self.barrier_c,
            d_override: self.d_override,
            ramp_width: self.ramp_width,
            plateau_height: self.plateau_height,
            odd_datum: if self.no_odd_datum { Some(false) } else { None },
            n_nodes: self.n_nodes,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            residual_tol: self.residual_tol,
            max_iters: self.max_iters,
            step0: self.step0,
            step_shrink: self.step_shrink,
            odd_symmetrize: if self.no_symmetrize { Some(false) } else { None },
            eta_sweep: self.eta_sweep.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = cli.cmd.mode();
    let args = cli.cmd.args();
    let resolved = match config::load(args.config.as_deref(), mode, &args.overrides()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match experiments::run(&resolved) {
        Ok(outcome) => {
            let verdict = if outcome.pass { "pass" } else { "FAIL" };
            println!(
                "{}: {verdict} (artifacts in {})",
                mode.as_str(),
                resolved.output_dir.display()
            );
            ExitCode::from(if outcome.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
