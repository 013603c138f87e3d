//! `ampenc` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure,
//! 4 validation failure (including a failed `verify`). Errors are reported
//! on stderr as one JSON object `{"error": {"category", "message"}}`.

use std::path::PathBuf;
use std::process::ExitCode;

use ampenc::amplify::EstimatorMode;
use ampenc::encoding::Backend;
use ampenc::linsolve::InversionMethod;
use ampenc::run::{export_qasm, parse_vector, run, RunConfig, SolverKind};
use ampenc::{verify, Error, ErrorCategory};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ampenc", version, about = "Nonlinear solvers on amplified block encodings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed-point iteration x <- g(x).
    FixedPoint(RunArgs),
    /// Newton's method for f(x) = 0.
    Newton(RunArgs),
    /// Run the built-in invariant suite and print a pass/fail table.
    Verify {
        /// Run only checks whose group equals, or whose `group/name` contains, this string.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Write one OpenQASM 3 file per iterate circuit.
    ExportQasm {
        #[command(flatten)]
        run: RunArgs,
        /// Iteration whose circuits are exported: `fixed-point` or `newton`.
        #[arg(long, default_value = "fixed-point", value_parser = parse_solver)]
        iteration: SolverKind,
    },
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_estimator(s: &str) -> Result<EstimatorMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> Result<InversionMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone)]
struct Vector(Vec<[f64; 2]>);

fn parse_x0(s: &str) -> Result<Vector, String> {
    parse_vector(s).map(Vector).map_err(|e| e.to_string())
}

#[derive(Args)]
struct RunArgs {
    /// Built-in problem (`paper-g`, `paper-g-direct`) or a problem file.
    #[arg(long, default_value = "paper-g")]
    problem: String,
    /// Initial iterate, comma separated; entries may be complex (`1-2i`).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_x0)]
    x0: Option<Vector>,
    /// Number of steps; the planned count is used when absent.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// `gate-level` or `algebraic`.
    #[arg(long, default_value = "gate-level", value_parser = parse_backend)]
    backend: Backend,
    /// `exact` or `monte-carlo`.
    #[arg(long, default_value = "exact", value_parser = parse_estimator)]
    estimator: EstimatorMode,
    /// Shots per batch (Monte Carlo).
    #[arg(long, default_value_t = 1 << 14)]
    shots: u64,
    /// Batches combined by their median (Monte Carlo).
    #[arg(long, default_value_t = 9)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target accuracy (default 1e-3 for fixed point, 1e-2 for Newton).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Overall failure probability.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Contraction constant used to plan fixed-point steps.
    #[arg(long)]
    contraction: Option<f64>,
    /// Linear solver for Newton steps: `reference` or `qsvt`.
    #[arg(long, default_value = "reference", value_parser = parse_method)]
    solver: InversionMethod,
    /// Condition-number bound of the Jacobians.
    #[arg(long, default_value_t = 6.0)]
    kappa: f64,
    /// Accuracy required of the linear solver.
    #[arg(long, default_value_t = 0.1)]
    solver_epsilon: f64,
    /// Phase-angle file for the QSVT solver (the bundled set is used otherwise).
    #[arg(long)]
    angles: Option<PathBuf>,
    /// Bound on the iterate norms used in the Newton tolerance schedule.
    #[arg(long, default_value_t = 4.0)]
    norm_bound: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write every iterate circuit to `<out>/qasm`.
    #[arg(long)]
    export_qasm: bool,
}

impl RunArgs {
    fn into_config(self, solver: SolverKind) -> RunConfig {
        RunConfig {
            problem: self.problem,
            solver,
            x0: self.x0.map(|v| v.0),
            steps: self.steps,
            max_steps: self.max_steps,
            backend: self.backend,
            estimator: self.estimator,
            shots: self.shots,
            repetitions: self.reps,
            seed: self.seed,
            epsilon: self.epsilon,
            delta: self.delta,
            contraction: self.contraction,
            inversion: self.solver,
            kappa: self.kappa,
            solver_epsilon: self.solver_epsilon,
            angles: self.angles,
            norm_bound: self.norm_bound,
            out_dir: self.out,
            export_qasm: self.export_qasm,
        }
    }
}

fn fail(err: &Error) -> ExitCode {
    let category = err.category();
    let json = serde_json::json!({ "error": { "category": category.as_str(), "message": err.to_string() } });
    eprintln!("{json}");
    ExitCode::from(category.exit_code() as u8)
}

fn solve(cfg: RunConfig) -> ExitCode {
    match run(&cfg) {
        Ok(report) => {
            let r = &report.report;
            let last = r.all_records().last().expect("initial record");
            println!(
                "{} on {}: {} step(s) (planned {}{}), final gate count {}, norm estimate {:.6}",
                r.solver,
                cfg.problem,
                r.steps,
                r.planned_steps,
                if r.capped { ", capped" } else { "" },
                last.gate_count,
                r.final_norm
            );
            if let Some(x) = &last.iterate {
                let parts: Vec<String> = x.iter().map(|p| format!("{:.6}{:+.6}i", p[0], p[1])).collect();
                println!("final iterate: ({})", parts.join(", "));
            }
            println!("wrote {}", cfg.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::FixedPoint(args) => solve(args.into_config(SolverKind::FixedPoint)),
        Command::Newton(args) => solve(args.into_config(SolverKind::Newton)),
        Command::Verify { filter } => {
            let results = verify::run_suite(filter.as_deref());
            print!("{}", verify::render_table(&results));
            if results.iter().all(|r| r.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(ErrorCategory::Validation.exit_code() as u8)
            }
        }
        Command::ExportQasm { run, iteration } => {
            let cfg = run.into_config(iteration);
            match export_qasm(&cfg, &cfg.out_dir) {
                Ok((_, files)) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
    }
}
