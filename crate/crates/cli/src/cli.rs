//! Command-line interface.

use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mpgmres::sparse::{read_matrix_market, save_matrix_market};
use mpgmres::{count_stencil_nnz, generate_stencil, Error, PrecondSpec, Precision, ProblemSpec, Result};

use crate::experiment::{
    load_problem, run_on_problem, ExperimentSpec, PolySeed, ProblemSource, SolverKind, VectorInit,
};
use crate::model::{spmv_speedup_model, SpmvModelInput};
use crate::output::{create, group_thousands, write_history_csv, write_summary_json};
use crate::sweep::{sweep_restart_sizes, sweep_switch_points, write_restart_csv, write_switch_csv};

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Environment variable holding the seed of every randomised vector.
pub const SEED_VAR: &str = "MPK_SEED";

#[derive(Debug, Parser)]
#[command(name = "mpgmres", version, about = "Mixed-precision GMRES experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a stencil matrix in Matrix Market format.
    Generate(GenerateArgs),
    /// Solve one system and report convergence.
    Solve(SolveArgs),
    /// Run GMRES-FD at several switch points.
    SweepSwitch(SweepSwitchArgs),
    /// Run double GMRES and GMRES-IR for several restart lengths.
    SweepRestart(SweepRestartArgs),
    /// Evaluate the SpMV read-traffic model.
    ModelSpmv(ModelArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Matrix Market file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset", required_unless_present = "preset")]
    pub matrix: Option<PathBuf>,
    /// Stencil preset: Laplace2D, Laplace3D, UniFlow2D, BentPipe2D, Stretched2D
    /// (a trailing grid size such as BentPipe2D1500 is accepted).
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Grid points per direction for --preset.
    #[arg(long, value_name = "K")]
    pub nx: Option<usize>,
    /// Reorder with reverse Cuthill-McKee before solving.
    #[arg(long)]
    pub rcm: bool,
}

impl ProblemArgs {
    pub fn source(&self) -> Result<ProblemSource> {
        match (&self.matrix, &self.preset) {
            (Some(path), _) => {
                if self.nx.is_some() {
                    return Err(Error::InvalidConfig("--nx only applies to --preset".into()));
                }
                Ok(ProblemSource::File(path.clone()))
            }
            (None, Some(name)) => Ok(ProblemSource::Preset(ProblemSpec::from_name(name, self.nx)?)),
            (None, None) => Err(Error::InvalidConfig("give --matrix or --preset".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverKind::Gmres)]
    pub solver: SolverKind,
    /// Working precision of plain GMRES: single or double.
    #[arg(long)]
    pub precision: Option<Precision>,
    /// Restart length m.
    #[arg(long, value_name = "M", default_value_t = 50)]
    pub restart: usize,
    /// Relative residual tolerance.
    #[arg(long, value_name = "T", default_value_t = 1e-10)]
    pub tol: f64,
    /// Iteration cap over the whole solve.
    #[arg(long, value_name = "N", default_value_t = 20_000)]
    pub max_iters: usize,
    /// none, jacobi:K or poly:D.
    #[arg(long, default_value = "none")]
    pub precond: PrecondSpec,
    /// Precision the preconditioner is built and applied in.
    #[arg(long)]
    pub precond_precision: Option<Precision>,
    /// Iterations of single precision before switching (gmres-fd).
    #[arg(long, value_name = "S")]
    pub switch_iter: Option<usize>,
    /// Stop instead of restarting after a loss of accuracy.
    #[arg(long)]
    pub no_loa_restart: bool,
    /// Start vector for building a polynomial preconditioner.
    #[arg(long, value_enum, default_value_t = PolySeed::Random)]
    pub poly_seed: PolySeed,
    #[arg(long, value_enum, default_value_t = VectorInit::Ones)]
    pub rhs: VectorInit,
    #[arg(long, value_enum, default_value_t = VectorInit::Zeros)]
    pub x0: VectorInit,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_name = "NAME")]
    pub preset: String,
    #[arg(long, value_name = "K")]
    pub nx: Option<usize>,
    /// Output file.
    #[arg(long, short, value_name = "PATH", required_unless_present = "dry_run")]
    pub out: Option<PathBuf>,
    /// Print the dimension and nonzero count without building the matrix.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Convergence history CSV.
    #[arg(long, value_name = "PATH.csv")]
    pub history: Option<PathBuf>,
    /// JSON summary.
    #[arg(long, value_name = "PATH.json")]
    pub summary: Option<PathBuf>,
    /// Print the problem size without solving.
    #[arg(long)]
    pub dry_run: bool,
    /// Time this many solves and report the median.
    #[arg(long, value_name = "R", default_value_t = 1)]
    pub repeat: usize,
}

#[derive(Debug, Args)]
pub struct SweepSwitchArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated switch points; defaults to multiples of m up to the
    /// single-precision stall.
    #[arg(long, value_delimiter = ',')]
    pub points: Option<Vec<usize>>,
    /// Output CSV (stdout when absent).
    #[arg(long, short, value_name = "PATH.csv")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepRestartArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Comma-separated restart lengths.
    #[arg(long, value_delimiter = ',', default_value = "25,50,100")]
    pub sizes: Vec<usize>,
    #[arg(long, short, value_name = "PATH.csv")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Nonzeros per row: integer, decimal or fraction such as 7/2.
    #[arg(long, conflicts_with_all = ["preset", "matrix"])]
    pub w: Option<SpmvModelInput>,
    /// Take w = nnz / n from a stencil preset.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    #[arg(long, value_name = "K")]
    pub nx: Option<usize>,
    /// Take w = nnz / n from a Matrix Market file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    pub matrix: Option<PathBuf>,
}

/// Seed from `MPK_SEED`, zero when unset.
pub fn seed_from_env() -> Result<u64> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{SEED_VAR}=`{s}` is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

pub fn experiment_spec(problem: &ProblemArgs, s: &SolverArgs) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::new(problem.source()?, s.solver);
    spec.precision = s.precision;
    spec.restart = s.restart;
    spec.rtol = s.tol;
    spec.max_iters = s.max_iters;
    spec.precond = s.precond;
    spec.precond_precision = s.precond_precision;
    spec.rcm = problem.rcm;
    spec.switch_iter = s.switch_iter;
    spec.restart_on_loss_of_accuracy = !s.no_loa_restart;
    spec.poly_seed = s.poly_seed;
    spec.rhs = s.rhs;
    spec.x0 = s.x0;
    spec.seed = seed_from_env()?;
    Ok(spec)
}

fn print_size(out: &mut dyn Write, label: &str, n: u64, nnz: u64) -> Result<()> {
    writeln!(out, "{label}: N={} NNZ={}", group_thousands(n), group_thousands(nnz))?;
    Ok(())
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Generate(g) => {
            let spec = ProblemSpec::from_name(&g.preset, g.nx)?;
            if g.dry_run {
                print_size(out, &spec.to_string(), spec.n(), count_stencil_nnz(&spec)?)?;
                return Ok(EXIT_CONVERGED);
            }
            let a = generate_stencil(&spec)?;
            let path = g.out.expect("clap requires --out without --dry-run");
            save_matrix_market(&a, &path)?;
            print_size(out, &spec.to_string(), a.n() as u64, a.nnz() as u64)?;
            Ok(EXIT_CONVERGED)
        }
        Command::Solve(s) => {
            let mut spec = experiment_spec(&s.problem, &s.solver)?;
            spec.repeat = s.repeat;
            spec.validate()?;
            if s.dry_run {
                let (n, nnz) = match &spec.source {
                    ProblemSource::Preset(p) => (p.n(), count_stencil_nnz(p)?),
                    ProblemSource::File(path) => {
                        let a = read_matrix_market(path)?;
                        (a.n() as u64, a.nnz() as u64)
                    }
                };
                print_size(out, &spec.source.to_string(), n, nnz)?;
                return Ok(EXIT_CONVERGED);
            }
            let problem = load_problem(&spec)?;
            let outcome = run_on_problem(&spec, &problem)?;
            if let Some(path) = &s.history {
                write_history_csv(&outcome.report, create(path)?)?;
            }
            if let Some(path) = &s.summary {
                write_summary_json(&outcome.summary, create(path)?)?;
            }
            let sm = &outcome.summary;
            writeln!(
                out,
                "{} {} on {}: {} after {} iterations ({} restarts), relres {:.3e}{}, {:.3} s",
                sm.solver,
                sm.precision,
                problem.label,
                if sm.converged { "converged" } else { "not converged" },
                sm.total_iters,
                sm.restarts,
                sm.final_relres,
                if sm.loss_of_accuracy { ", loss of accuracy" } else { "" },
                sm.wall_seconds
            )?;
            Ok(if sm.converged { EXIT_CONVERGED } else { EXIT_NOT_CONVERGED })
        }
        Command::SweepSwitch(s) => {
            let mut spec = experiment_spec(&s.problem, &s.solver)?;
            spec.solver = SolverKind::GmresFd;
            spec.switch_iter = Some(0);
            spec.validate()?;
            let problem = load_problem(&spec)?;
            let rows = sweep_switch_points(&spec, &problem, s.points.as_deref())?;
            match &s.out {
                Some(path) => write_switch_csv(&rows, create(path)?)?,
                None => write_switch_csv(&rows, &mut *out)?,
            }
            Ok(if rows.iter().all(|r| r.converged) { EXIT_CONVERGED } else { EXIT_NOT_CONVERGED })
        }
        Command::SweepRestart(s) => {
            let mut spec = experiment_spec(&s.problem, &s.solver)?;
            spec.solver = SolverKind::Gmres;
            spec.validate()?;
            if s.sizes.contains(&0) {
                return Err(Error::InvalidConfig("restart lengths must be at least 1".into()));
            }
            let problem = load_problem(&spec)?;
            let rows = sweep_restart_sizes(&spec, &problem, &s.sizes)?;
            match &s.out {
                Some(path) => write_restart_csv(&rows, create(path)?)?,
                None => write_restart_csv(&rows, &mut *out)?,
            }
            let ok = rows.iter().all(|r| r.converged_double && r.converged_ir);
            Ok(if ok { EXIT_CONVERGED } else { EXIT_NOT_CONVERGED })
        }
        Command::ModelSpmv(m) => {
            let input = match (m.w, &m.preset, &m.matrix) {
                (Some(w), _, _) => w,
                (None, Some(name), _) => {
                    let spec = ProblemSpec::from_name(name, m.nx)?;
                    SpmvModelInput::for_matrix(spec.n(), count_stencil_nnz(&spec)?)
                        .map_err(|e| Error::InvalidConfig(e.to_string()))?
                }
                (None, None, Some(path)) => {
                    let a = read_matrix_market(path)?;
                    SpmvModelInput::for_matrix(a.n() as u64, a.nnz() as u64)
                        .map_err(|e| Error::InvalidConfig(e.to_string()))?
                }
                (None, None, None) => {
                    return Err(Error::InvalidConfig("give --w, --preset or --matrix".into()))
                }
            };
            let model = spmv_speedup_model(&input).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            serde_json::to_writer_pretty(&mut *out, &model).map_err(io::Error::from)?;
            writeln!(out)?;
            Ok(EXIT_CONVERGED)
        }
    }
}
