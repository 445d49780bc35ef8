//! One solver run on one problem, as described by an [`ExperimentSpec`].

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use mpgmres::multiprecision::{FdOperators, IrOperators};
use mpgmres::precond::random_seed;
use mpgmres::sparse::{permute_system, rcm_ordering, read_matrix_market, unpermute_vector};
use mpgmres::{
    build_preconditioner, convert_vector, generate_stencil, gmres_fd_with, gmres_ir_with,
    gmres_restarted, preconditioner_for_double, ConvergenceReport, CsrMatrix, Error, FdConfig,
    IrConfig, PrecondSpec, Precision, ProblemSpec, Result, SolverConfig,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Gmres,
    GmresIr,
    GmresFd,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Gmres => "gmres",
            SolverKind::GmresIr => "gmres-ir",
            SolverKind::GmresFd => "gmres-fd",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Preset(ProblemSpec),
    File(PathBuf),
}

impl fmt::Display for ProblemSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSource::Preset(p) => write!(f, "{p}"),
            ProblemSource::File(path) => write!(f, "{}", path.display()),
        }
    }
}

/// How to fill `b` or `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum VectorInit {
    Ones,
    Zeros,
    /// Uniform in `[-1, 1)` from the experiment seed.
    Random,
}

/// Start vector of the polynomial preconditioner's Arnoldi process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PolySeed {
    /// Uniform in `[-1, 1)` from the experiment seed.
    Random,
    /// The right-hand side.
    Rhs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: ProblemSource,
    pub solver: SolverKind,
    /// Working precision of plain GMRES. Must be unset or double for the
    /// mixed-precision solvers.
    pub precision: Option<Precision>,
    pub restart: usize,
    pub rtol: f64,
    pub max_iters: usize,
    pub precond: PrecondSpec,
    /// Defaults to the working precision for GMRES, single for GMRES-IR and
    /// double for the second phase of GMRES-FD.
    pub precond_precision: Option<Precision>,
    pub rcm: bool,
    pub switch_iter: Option<usize>,
    pub restart_on_loss_of_accuracy: bool,
    pub poly_seed: PolySeed,
    pub rhs: VectorInit,
    pub x0: VectorInit,
    pub seed: u64,
    /// Solves to time; the reported time is their median.
    pub repeat: usize,
}

impl ExperimentSpec {
    pub fn new(source: ProblemSource, solver: SolverKind) -> Self {
        Self {
            source,
            solver,
            precision: None,
            restart: 50,
            rtol: 1e-10,
            max_iters: 20_000,
            precond: PrecondSpec::None,
            precond_precision: None,
            rcm: false,
            switch_iter: None,
            restart_on_loss_of_accuracy: true,
            poly_seed: PolySeed::Random,
            rhs: VectorInit::Ones,
            x0: VectorInit::Zeros,
            seed: 0,
            repeat: 1,
        }
    }

    pub fn preset(spec: ProblemSpec, solver: SolverKind) -> Self {
        Self::new(ProblemSource::Preset(spec), solver)
    }

    /// Check flag combinations before anything is allocated.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.restart == 0 {
            return bad("--restart must be at least 1".into());
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return bad(format!("--tol {} must lie in (0, 1)", self.rtol));
        }
        if self.repeat == 0 {
            return bad("--repeat must be at least 1".into());
        }
        if self.rhs == VectorInit::Zeros {
            return bad("the right-hand side must be nonzero".into());
        }
        match self.solver {
            SolverKind::Gmres => {
                if self.switch_iter.is_some() {
                    return bad("--switch-iter only applies to gmres-fd".into());
                }
                if self.precision == Some(Precision::Single)
                    && self.precond_precision == Some(Precision::Double)
                {
                    return bad("a double preconditioner inside single GMRES is not supported".into());
                }
            }
            SolverKind::GmresIr | SolverKind::GmresFd => {
                if self.precision == Some(Precision::Single) {
                    return bad(format!(
                        "{} always mixes single and double; drop --precision single",
                        self.solver
                    ));
                }
                if self.solver == SolverKind::GmresIr {
                    if self.switch_iter.is_some() {
                        return bad("--switch-iter only applies to gmres-fd".into());
                    }
                    if self.precond_precision == Some(Precision::Double) {
                        return bad("gmres-ir applies its preconditioner in single precision".into());
                    }
                } else {
                    match self.switch_iter {
                        None => return bad("gmres-fd needs --switch-iter".into()),
                        Some(s) if s % self.restart != 0 => {
                            return bad(format!(
                                "--switch-iter {s} is not a multiple of --restart {}",
                                self.restart
                            ))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    pub fn working_precision(&self) -> Precision {
        self.precision.unwrap_or(Precision::Double)
    }

    fn solver_config(&self, precision: Precision, precond_precision: Precision) -> SolverConfig {
        SolverConfig {
            restart: self.restart,
            rtol: self.rtol,
            max_iters: self.max_iters,
            max_restarts: usize::MAX,
            precision,
            precond: self.precond,
            precond_precision,
            restart_on_loss_of_accuracy: self.restart_on_loss_of_accuracy,
        }
    }
}

/// A loaded (and possibly reordered) linear system.
#[derive(Debug, Clone)]
pub struct Problem {
    pub label: String,
    pub a: Arc<CsrMatrix<f64>>,
    pub b: Vec<f64>,
    pub x0: Vec<f64>,
    /// Reverse Cuthill-McKee ordering applied to `a`, `b` and `x0`.
    pub perm: Option<Vec<usize>>,
}

fn init_vector(init: VectorInit, n: usize, seed: u64) -> Vec<f64> {
    match init {
        VectorInit::Ones => vec![1.0; n],
        VectorInit::Zeros => vec![0.0; n],
        VectorInit::Random => random_seed(n, seed),
    }
}

// distinct streams for the three randomised vectors
const RHS_STREAM: u64 = 0x5248_5300;
const X0_STREAM: u64 = 0x5830_0000;
const POLY_STREAM: u64 = 0x504f_4c59;

pub fn load_matrix(source: &ProblemSource) -> Result<CsrMatrix<f64>> {
    match source {
        ProblemSource::Preset(p) => generate_stencil(p),
        ProblemSource::File(path) => read_matrix_market(path),
    }
}

pub fn load_problem(spec: &ExperimentSpec) -> Result<Problem> {
    let a = load_matrix(&spec.source)?;
    let n = a.n();
    let b = init_vector(spec.rhs, n, spec.seed ^ RHS_STREAM);
    let x0 = init_vector(spec.x0, n, spec.seed ^ X0_STREAM);
    let label = spec.source.to_string();
    if !spec.rcm {
        return Ok(Problem {
            label,
            a: Arc::new(a),
            b,
            x0,
            perm: None,
        });
    }
    let perm = rcm_ordering(&a);
    let (pa, pb) = permute_system(&a, &b, &perm)?;
    let px0 = perm.iter().map(|&p| x0[p]).collect();
    Ok(Problem {
        label,
        a: Arc::new(pa),
        b: pb,
        x0: px0,
        perm: Some(perm),
    })
}

/// The stable JSON summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub solver: SolverKind,
    /// `single` or `double` for GMRES, `mixed` for GMRES-IR and GMRES-FD.
    pub precision: String,
    pub n: usize,
    pub nnz: usize,
    pub m: usize,
    pub rtol: f64,
    pub converged: bool,
    pub total_iters: usize,
    pub restarts: usize,
    pub final_relres: f64,
    pub loss_of_accuracy: bool,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ConvergenceReport,
    pub summary: Summary,
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let problem = load_problem(spec)?;
    run_on_problem(spec, &problem)
}

/// Run `spec`'s solver on an already loaded problem. Only the solve itself is
/// timed: precision copies and preconditioner construction happen first.
pub fn run_on_problem(spec: &ExperimentSpec, problem: &Problem) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let a = &problem.a;
    let n = a.n();
    let (b, x0) = (&problem.b[..], &problem.x0[..]);
    let seed = match spec.poly_seed {
        PolySeed::Rhs => b.to_vec(),
        PolySeed::Random => random_seed(n, spec.seed ^ POLY_STREAM),
    };

    let mut times = Vec::with_capacity(spec.repeat);
    let mut timed = |f: &mut dyn FnMut() -> Result<ConvergenceReport>| -> Result<ConvergenceReport> {
        let mut last = None;
        for _ in 0..spec.repeat {
            let start = Instant::now();
            let rep = f()?;
            times.push(start.elapsed().as_secs_f64());
            last = Some(rep);
        }
        Ok(last.expect("repeat >= 1"))
    };

    let (mut report, precision) = match spec.solver {
        SolverKind::Gmres => match spec.working_precision() {
            Precision::Double => {
                let pp = spec.precond_precision.unwrap_or(Precision::Double);
                let cfg = spec.solver_config(Precision::Double, pp);
                let m = preconditioner_for_double(spec.precond, pp, a, &seed)?;
                let rep = timed(&mut || gmres_restarted(a.as_ref(), m.as_ref(), b, x0, &cfg))?;
                (rep, "double")
            }
            Precision::Single => {
                let cfg = spec.solver_config(Precision::Single, Precision::Single);
                let a32 = Arc::new(a.convert::<f32>());
                let m = build_preconditioner(spec.precond, &a32, &convert_vector::<f64, f32>(&seed))?;
                let b32: Vec<f32> = convert_vector(b);
                let x32: Vec<f32> = convert_vector(x0);
                let rep = timed(&mut || gmres_restarted(a32.as_ref(), m.as_ref(), &b32, &x32, &cfg))?;
                (rep, "single")
            }
        },
        SolverKind::GmresIr => {
            let cfg = IrConfig {
                inner: spec.solver_config(Precision::Single, Precision::Single),
                outer_precision: Precision::Double,
                rtol: spec.rtol,
                max_refinements: usize::MAX,
            };
            let ops = IrOperators::prepare(a, &cfg, &seed)?;
            (timed(&mut || gmres_ir_with(a, &ops, b, x0, &cfg))?, "mixed")
        }
        SolverKind::GmresFd => {
            let cfg = FdConfig {
                switch_iter: spec.switch_iter.unwrap_or(0),
                low: spec.solver_config(Precision::Single, Precision::Single),
                high: spec.solver_config(Precision::Double, spec.precond_precision.unwrap_or(Precision::Double)),
            };
            let ops = FdOperators::prepare(a, &cfg, &seed)?;
            (timed(&mut || gmres_fd_with(a, &ops, b, x0, &cfg))?, "mixed")
        }
    };

    if let Some(perm) = &problem.perm {
        report.solution = unpermute_vector(&report.solution, perm);
    }
    times.sort_by(f64::total_cmp);
    let summary = Summary {
        solver: spec.solver,
        precision: precision.to_string(),
        n,
        nnz: a.nnz(),
        m: spec.restart,
        rtol: spec.rtol,
        converged: report.converged,
        total_iters: report.total_iters,
        restarts: report.restarts,
        final_relres: report.final_explicit_relres,
        loss_of_accuracy: report.loss_of_accuracy,
        wall_seconds: times[times.len() / 2],
    };
    Ok(ExperimentOutcome { report, summary })
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, true)
            .map_err(|_| Error::InvalidConfig(format!("unknown solver `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap(solver: SolverKind) -> ExperimentSpec {
        ExperimentSpec::preset(ProblemSpec::laplace2d(8), solver)
    }

    #[test]
    fn flag_combinations() {
        assert!(lap(SolverKind::Gmres).validate().is_ok());
        let mut s = lap(SolverKind::GmresFd);
        assert!(s.validate().is_err());
        s.switch_iter = Some(100);
        assert!(s.validate().is_ok());
        s.switch_iter = Some(75);
        assert!(s.validate().is_err());
        let mut s = lap(SolverKind::GmresIr);
        s.precision = Some(Precision::Single);
        assert!(s.validate().is_err());
        let mut s = lap(SolverKind::GmresIr);
        s.switch_iter = Some(50);
        assert!(s.validate().is_err());
        let mut s = lap(SolverKind::Gmres);
        s.precision = Some(Precision::Single);
        s.precond_precision = Some(Precision::Double);
        assert!(s.validate().is_err());
        let mut s = lap(SolverKind::Gmres);
        s.rhs = VectorInit::Zeros;
        assert!(s.validate().is_err());
    }

    #[test]
    fn rcm_run_returns_solution_in_original_order() {
        let mut s = ExperimentSpec::preset(ProblemSpec::bentpipe2d(10), SolverKind::Gmres);
        s.precond = PrecondSpec::BlockJacobi { block_size: 5 };
        let plain = run_experiment(&s).unwrap();
        s.rcm = true;
        let reordered = run_experiment(&s).unwrap();
        assert!(plain.summary.converged && reordered.summary.converged);
        let a = generate_stencil(&ProblemSpec::bentpipe2d(10)).unwrap();
        let r = a.residual(&vec![1.0; 100], &reordered.report.solution).unwrap();
        let rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / 10.0;
        assert!(rel <= 1e-10);
    }

    #[test]
    fn summary_fields() {
        let out = run_experiment(&lap(SolverKind::GmresIr)).unwrap();
        assert_eq!(out.summary.precision, "mixed");
        assert_eq!(out.summary.n, 64);
        assert_eq!(out.summary.nnz, 5 * 64 - 4 * 8);
        assert!(out.summary.converged);
    }
}
