//! Batch front end: `orlicz solve-linear | solve-superlinear | verify | catalog`.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 violated hypothesis or failed
//! geometry/verification, 3 nonconvergence (the best iterate is still written).

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub use config::{MeshConfig, Problem, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] orlicz_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// A verification check ran to completion and failed.
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Core(e) if e.is_hypothesis_failure() => 2,
            CliError::Core(e) if e.is_nonconvergence() => 3,
            CliError::Core(_) => 1,
        }
    }

    fn status(&self) -> &'static str {
        match self.exit_code() {
            2 => "hypothesis_failure",
            3 => "nonconvergence",
            _ => "usage_error",
        }
    }

    /// The named hypothesis or stalled metric, for the report.
    fn detail(&self) -> Value {
        use orlicz_core::Error as E;
        fn walk(e: &E) -> Value {
            match e {
                E::Hypothesis { hypothesis, witness, detail } => {
                    json!({ "hypothesis": hypothesis, "witness": witness, "detail": detail })
                }
                E::Geometry(msg) => json!({ "hypothesis": "mountain-pass geometry", "detail": msg }),
                E::NonConvergence { iterations, residual, context, .. } => {
                    json!({ "stalled_metric": "residual", "value": residual, "iterations": iterations, "detail": context })
                }
                E::Stagnation { sweeps, level, residual, .. } => {
                    json!({ "stalled_metric": "mountain-pass level", "value": level, "residual": residual, "sweeps": sweeps })
                }
                E::BoundViolation { eps, quantity, value, cap } => {
                    json!({ "stalled_metric": quantity, "value": value, "cap": cap, "eps": eps })
                }
                E::AtEpsilon { eps, source } => {
                    let mut v = walk(source);
                    if let Value::Object(m) = &mut v {
                        m.insert("eps".into(), json!(eps));
                    }
                    v
                }
                _ => Value::Null,
            }
        }
        match self {
            CliError::Core(e) => walk(e),
            CliError::Verification(msg) => json!({ "failed_check": msg }),
            _ => Value::Null,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "orlicz", version, about = "Phi-Laplacian Dirichlet solvers in Orlicz-Sobolev spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve -Delta_Phi u = f with u = 0 on the boundary.
    SolveLinear(RunArgs),
    /// Find a mountain-pass solution of -Delta_Phi u = g(u).
    SolveSuperlinear(RunArgs),
    /// Run the Moser, Poincare and convergence checks.
    Verify(RunArgs),
    /// List the available operators and nonlinearities.
    Catalog,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// TOML configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// power:p=<float> | logarithmic | custom:<path>
    #[arg(long)]
    operator: Option<String>,
    /// 1d:<n> or 2d:<n>
    #[arg(long)]
    mesh: Option<String>,
    /// const:<c> | sin:<c>
    #[arg(long = "f", visible_alias = "source")]
    source: Option<String>,
    /// power:q=<float> | powerlog:m=<float> | custom:<path> | zero
    #[arg(long)]
    nonlinearity: Option<String>,
    /// full | plus | minus | pair
    #[arg(long)]
    variant: Option<String>,
    /// Regularization of the superlinear functional (0 allowed when l > 1).
    #[arg(long)]
    eps: Option<f64>,
    /// Explicit continuation ladder, comma separated.
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<f64>>,
    /// Geometric continuation ladder 2^-k, k = 0..=k_max.
    #[arg(long)]
    k_max: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    tol_final: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// moser, poincare, convergence or all (comma separated).
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short = 'o')]
    output_dir: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self, problem: Option<Problem>) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = problem {
            cfg.problem = p;
        }
        if let Some(v) = self.operator {
            cfg.operator = v;
        }
        if let Some(v) = self.mesh {
            cfg.mesh = MeshConfig::parse(&v)?;
        }
        if let Some(v) = self.source {
            cfg.source = v;
        }
        if let Some(v) = self.nonlinearity {
            cfg.nonlinearity = Some(v);
        }
        if let Some(v) = self.variant {
            cfg.variant = v;
        }
        if let Some(v) = self.eps {
            cfg.superlinear.eps = Some(v);
        }
        if let Some(v) = self.schedule {
            cfg.schedule.eps = Some(v);
        }
        if let Some(v) = self.k_max {
            cfg.schedule.k_max = Some(v);
            cfg.schedule.eps = None;
        }
        if let Some(v) = self.tol {
            cfg.tolerances.tol = Some(v);
        }
        if let Some(v) = self.tol_final {
            cfg.tolerances.tol_final = Some(v);
        }
        if let Some(v) = self.max_iters {
            cfg.tolerances.max_iters = Some(v);
        }
        if let Some(v) = self.checks {
            cfg.verify.checks = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.output_dir {
            cfg.output_dir = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Worker count for the solver pool, from `ORLICZ_SOLVER_THREADS`.
fn solver_threads() -> Result<Option<usize>, CliError> {
    match std::env::var("ORLICZ_SOLVER_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("ORLICZ_SOLVER_THREADS must be a positive integer, got '{s}'"))),
        },
        Err(_) => Ok(None),
    }
}

fn in_pool<T: Send>(job: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match solver_threads()? {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, args, problem) = match cli.command {
        Command::Catalog => {
            print!("{}", commands::catalog());
            return 0;
        }
        Command::SolveLinear(a) => ("solve-linear", a, Some(Problem::Linear)),
        Command::SolveSuperlinear(a) => ("solve-superlinear", a, Some(Problem::Superlinear)),
        Command::Verify(a) => ("verify", a, None),
    };
    let fallback_dir = args.output_dir.clone();
    let cfg = match args.into_config(problem) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(dir) = fallback_dir {
                let _ = output::write_report(&dir, &failure_report(name, None, &e));
            }
            return e.exit_code();
        }
    };
    let outcome = in_pool(|| match name {
        "solve-linear" => commands::solve_linear(&cfg),
        "solve-superlinear" => commands::solve_superlinear(&cfg),
        _ => commands::verify(&cfg),
    })
    .and_then(|r| r);
    let (code, report) = match outcome {
        Ok(results) => (
            0,
            json!({ "command": name, "status": "ok", "exit_code": 0, "config": cfg, "results": results }),
        ),
        Err(e) => {
            eprintln!("error: {e}");
            (e.exit_code(), failure_report(name, Some(&cfg), &e))
        }
    };
    if let Err(e) = output::write_report(&cfg.output_dir, &report) {
        eprintln!("error: cannot write report: {e}");
        return if code == 0 { 1 } else { code };
    }
    code
}

fn failure_report(name: &str, cfg: Option<&RunConfig>, e: &CliError) -> Value {
    json!({
        "command": name,
        "status": e.status(),
        "exit_code": e.exit_code(),
        "config": cfg,
        "error": { "message": e.to_string(), "detail": e.detail() },
    })
}
