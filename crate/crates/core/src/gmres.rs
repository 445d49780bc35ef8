//! Restarted GMRES(m) with classical Gram-Schmidt (two passes), right
//! preconditioning and explicit residual checks at every restart.

use serde::{Deserialize, Serialize};

use crate::dense::{norm2, HessenbergSystem, KrylovBasis};
use crate::error::{Error, Result};
use crate::precision::{Precision, Scalar};
use crate::precond::{PrecondSpec, Preconditioner};
use crate::report::{ConvergenceReport, HistoryEntry, Phase};
use crate::sparse::csr::check_len;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Restart length `m`: maximum Krylov subspace dimension per cycle.
    pub restart: usize,
    /// Relative residual tolerance.
    pub rtol: f64,
    /// Cap on Arnoldi steps over the whole solve.
    pub max_iters: usize,
    /// Cap on restarts.
    pub max_restarts: usize,
    /// Working precision of the Krylov iteration.
    pub precision: Precision,
    pub precond: PrecondSpec,
    /// Precision the preconditioner is built and applied in.
    pub precond_precision: Precision,
    /// After a loss of accuracy, keep restarting from the explicit residual instead
    /// of stopping.
    pub restart_on_loss_of_accuracy: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restart: 50,
            rtol: 1e-10,
            max_iters: 20_000,
            max_restarts: usize::MAX,
            precision: Precision::Double,
            precond: PrecondSpec::None,
            precond_precision: Precision::Double,
            restart_on_loss_of_accuracy: true,
        }
    }
}

impl SolverConfig {
    pub fn new(precision: Precision, restart: usize, rtol: f64) -> Self {
        Self {
            restart,
            rtol,
            precision,
            precond_precision: precision,
            ..Self::default()
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_precond(mut self, precond: PrecondSpec, precision: Precision) -> Self {
        self.precond = precond;
        self.precond_precision = precision;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restart == 0 {
            return Err(Error::InvalidConfig("restart length must be >= 1".into()));
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance {} must lie in (0, 1)",
                self.rtol
            )));
        }
        Ok(())
    }
}

/// Why a cycle stopped before or at `m` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleExit {
    RestartLength,
    ImplicitConvergence,
    LuckyBreakdown,
    IterationBudget,
    /// Inner residual reached the low-precision floor (GMRES-IR only).
    InnerFloor,
}

/// Everything one GMRES cycle leaves behind.
#[derive(Debug, Clone)]
pub struct CycleState<T> {
    pub basis: KrylovBasis<T>,
    pub hessenberg: HessenbergSystem<T>,
    pub steps: usize,
    /// Absolute implicit residual norm after each step, in binary64.
    pub implicit_norms: Vec<f64>,
    /// Relative residual denominator used for the cycle's convergence test.
    pub baseline: f64,
    pub exit: CycleExit,
}

impl<T> CycleState<T> {
    pub fn implicit_relres(&self) -> Option<f64> {
        self.implicit_norms.last().map(|r| r / self.baseline)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CycleOptions {
    pub baseline: f64,
    pub max_steps: usize,
    /// Stop once `implicit / baseline <= rtol`.
    pub rtol: Option<f64>,
    /// Stop once `implicit <= floor * gamma`.
    pub floor: Option<f64>,
}

/// Loss of accuracy: the implicit residual claims convergence but the explicit one
/// is more than ten times the tolerance.
pub fn detect_loss_of_accuracy(implicit_relres: f64, explicit_relres: f64, rtol: f64) -> bool {
    implicit_relres <= rtol && explicit_relres > 10.0 * rtol
}

fn check_operator<T: Scalar>(
    a: &CsrMatrix<T>,
    m: &dyn Preconditioner<T>,
    b: &[T],
    x0: &[T],
    cfg: &SolverConfig,
) -> Result<()> {
    cfg.validate()?;
    if cfg.precision != T::PRECISION {
        return Err(Error::PrecisionMismatch {
            expected: cfg.precision,
            actual: T::PRECISION,
        });
    }
    check_len("preconditioner", a.n(), m.dim())?;
    check_len("right-hand side", a.n(), b.len())?;
    check_len("initial guess", a.n(), x0.len())?;
    if b.iter().all(|v| *v == T::zero()) {
        return Err(Error::ZeroRhs);
    }
    Ok(())
}

/// One cycle from `x0` with residual `r0 = b - A x0` of norm `gamma > 0`. Returns
/// `x0 + M V d`.
pub(crate) fn run_cycle<T: Scalar>(
    a: &CsrMatrix<T>,
    m: &dyn Preconditioner<T>,
    restart: usize,
    r0: &[T],
    gamma: T,
    x0: &[T],
    opts: CycleOptions,
) -> Result<(Vec<T>, CycleState<T>)> {
    let n = a.n();
    let mut basis = KrylovBasis::new(n, restart + 1);
    basis.push_scaled(r0, gamma)?;
    let mut hs = HessenbergSystem::new(restart, gamma);
    let mut z = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut implicit_norms = Vec::with_capacity(restart);
    let mut exit = CycleExit::RestartLength;
    let mut steps = 0;

    for j in 1..=restart {
        if steps >= opts.max_steps {
            exit = CycleExit::IterationBudget;
            break;
        }
        m.apply(basis.column(j - 1), &mut z);
        a.spmv_unchecked(&z, &mut w);
        let step = basis.cgs2_append(&mut w)?;
        let res = hs.lsq_update(j, &step.h_col, step.beta)?.as_f64();
        steps = j;
        implicit_norms.push(res);
        if !step.appended {
            exit = CycleExit::LuckyBreakdown;
            break;
        }
        if opts.rtol.is_some_and(|tol| res / opts.baseline <= tol) {
            exit = CycleExit::ImplicitConvergence;
            break;
        }
        if opts.floor.is_some_and(|f| res <= f * gamma.as_f64()) {
            exit = CycleExit::InnerFloor;
            break;
        }
    }

    // fall back to the largest nonsingular leading triangle
    let mut d = Vec::new();
    for k in (1..=steps).rev() {
        if let Ok(sol) = hs.lsq_solve(k) {
            d = sol;
            break;
        }
    }
    let mut x = x0.to_vec();
    if !d.is_empty() {
        let vd = basis.combine(&d);
        m.apply(&vd, &mut z);
        for (xi, &zi) in x.iter_mut().zip(&z) {
            *xi = *xi + zi;
        }
    }
    Ok((
        x,
        CycleState {
            basis,
            hessenberg: hs,
            steps,
            implicit_norms,
            baseline: opts.baseline,
            exit,
        },
    ))
}

/// A single GMRES(m) cycle from `x0`: Arnoldi on `v -> A M v` with early exit on
/// implicit convergence (relative to `||b - A x0||`) or lucky breakdown.
pub fn gmres_cycle<T: Scalar>(
    a: &CsrMatrix<T>,
    m: &dyn Preconditioner<T>,
    b: &[T],
    x0: &[T],
    cfg: &SolverConfig,
) -> Result<(Vec<T>, CycleState<T>)> {
    check_operator(a, m, b, x0, cfg)?;
    let r0 = a.residual(b, x0)?;
    let gamma = norm2(&r0);
    if gamma == T::zero() {
        return Err(Error::InvalidConfig("initial guess already solves the system".into()));
    }
    run_cycle(
        a,
        m,
        cfg.restart,
        &r0,
        gamma,
        x0,
        CycleOptions {
            baseline: gamma.as_f64(),
            max_steps: cfg.restart.min(cfg.max_iters),
            rtol: Some(cfg.rtol),
            floor: None,
        },
    )
}

/// Knobs of the restart loop that the multiprecision drivers change.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RestartOptions {
    /// Relative residual denominator; `None` means `||b - A x0||`.
    pub baseline: Option<f64>,
    pub phase: Phase,
    pub iter_offset: usize,
    /// Stop when a restart fails to lower the explicit residual.
    pub stop_on_stall: bool,
}

pub(crate) struct RestartedRun<T> {
    pub x: Vec<T>,
    pub report: ConvergenceReport,
}

pub(crate) fn restarted<T: Scalar>(
    a: &CsrMatrix<T>,
    m: &dyn Preconditioner<T>,
    b: &[T],
    x0: &[T],
    cfg: &SolverConfig,
    opts: RestartOptions,
) -> Result<RestartedRun<T>> {
    let mut x = x0.to_vec();
    let mut r = a.residual(b, &x)?;
    let mut rnorm = norm2(&r);
    let baseline = opts.baseline.unwrap_or(rnorm.as_f64());
    let relres = |norm: T| if baseline > 0.0 { norm.as_f64() / baseline } else { 0.0 };

    let mut explicit = relres(rnorm);
    let mut history = vec![HistoryEntry {
        iter: opts.iter_offset,
        phase: opts.phase,
        implicit_relres: None,
        explicit_relres: Some(explicit),
    }];
    let mut best = explicit;
    let mut iters = 0;
    let mut cycles = 0;
    let mut converged = false;
    let mut stalled = false;
    let mut loa_events = 0;
    let mut previous = f64::INFINITY;

    loop {
        if explicit <= cfg.rtol {
            converged = true;
            break;
        }
        if iters >= cfg.max_iters || cycles > cfg.max_restarts {
            break;
        }
        if opts.stop_on_stall && explicit >= previous {
            stalled = true;
            break;
        }
        let (x_new, state) = run_cycle(
            a,
            m,
            cfg.restart,
            &r,
            rnorm,
            &x,
            CycleOptions {
                baseline,
                max_steps: cfg.max_iters - iters,
                rtol: Some(cfg.rtol),
                floor: None,
            },
        )?;
        for (k, res) in state.implicit_norms.iter().enumerate() {
            history.push(HistoryEntry {
                iter: opts.iter_offset + iters + k + 1,
                phase: opts.phase,
                implicit_relres: Some(res / baseline),
                explicit_relres: None,
            });
        }
        iters += state.steps;
        cycles += 1;
        x = x_new;
        r = a.residual(b, &x)?;
        rnorm = norm2(&r);
        previous = explicit;
        explicit = relres(rnorm);
        best = best.min(explicit);
        if let Some(last) = history.last_mut() {
            last.explicit_relres = Some(explicit);
        }
        if state.exit == CycleExit::ImplicitConvergence {
            let implicit = state.implicit_relres().unwrap_or(f64::INFINITY);
            if detect_loss_of_accuracy(implicit, explicit, cfg.rtol) {
                loa_events += 1;
                if !cfg.restart_on_loss_of_accuracy {
                    break;
                }
            }
        }
        if state.steps == 0 {
            // no budget left for even one step
            break;
        }
    }

    let (single_iters, double_iters) = match T::PRECISION {
        Precision::Single => (iters, 0),
        Precision::Double => (0, iters),
    };
    let report = ConvergenceReport {
        precision: T::PRECISION,
        converged,
        total_iters: iters,
        restarts: cycles.saturating_sub(1),
        final_explicit_relres: explicit,
        best_explicit_relres: best,
        baseline_norm: baseline,
        loss_of_accuracy: loa_events > 0,
        loss_of_accuracy_events: loa_events,
        stalled,
        single_iters,
        double_iters,
        history,
        solution: x.iter().map(|v| v.as_f64()).collect(),
    };
    Ok(RestartedRun { x, report })
}

/// Restarted GMRES(m): repeat cycles, recomputing `b - A x` after each, until the
/// explicit residual relative to `||b - A x0||` is at most `cfg.rtol` or a cap is hit.
/// Non-convergence is reported, not raised.
pub fn gmres_restarted<T: Scalar>(
    a: &CsrMatrix<T>,
    m: &dyn Preconditioner<T>,
    b: &[T],
    x0: &[T],
    cfg: &SolverConfig,
) -> Result<ConvergenceReport> {
    check_operator(a, m, b, x0, cfg)?;
    let run = restarted(
        a,
        m,
        b,
        x0,
        cfg,
        RestartOptions {
            baseline: None,
            phase: Phase::for_precision(T::PRECISION),
            iter_offset: 0,
            stop_on_stall: false,
        },
    )?;
    Ok(run.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::{identity, Identity};

    #[test]
    fn identity_converges_in_one_step() {
        let a = CsrMatrix::<f64>::identity(4);
        let b = [1.0, -2.0, 3.0, 0.5];
        let cfg = SolverConfig::default();
        let (x, st) = gmres_cycle(&a, &Identity::new(4), &b, &[0.0; 4], &cfg).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() <= 4.0 * f64::EPSILON * bi.abs());
        }
        assert_eq!(st.steps, 1);
        assert_eq!(st.exit, CycleExit::LuckyBreakdown);
        let rep = gmres_restarted(&a, identity::<f64>(4).as_ref(), &b, &[0.0; 4], &cfg).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.total_iters, 1);
        assert_eq!(rep.restarts, 0);
    }

    #[test]
    fn config_and_input_errors() {
        let a = CsrMatrix::<f64>::identity(2);
        let m = Identity::new(2);
        let cfg = SolverConfig::default();
        assert!(matches!(
            gmres_restarted(&a, &m, &[0.0, 0.0], &[0.0, 0.0], &cfg),
            Err(Error::ZeroRhs)
        ));
        assert!(gmres_restarted(&a, &m, &[1.0], &[0.0, 0.0], &cfg).is_err());
        assert!(gmres_restarted(&a, &Identity::new(3), &[1.0, 1.0], &[0.0, 0.0], &cfg).is_err());
        let bad = SolverConfig { restart: 0, ..cfg };
        assert!(gmres_restarted(&a, &m, &[1.0, 1.0], &[0.0, 0.0], &bad).is_err());
        let bad = SolverConfig { rtol: 1.5, ..cfg };
        assert!(gmres_restarted(&a, &m, &[1.0, 1.0], &[0.0, 0.0], &bad).is_err());
        let single = SolverConfig::new(Precision::Single, 10, 1e-6);
        assert!(matches!(
            gmres_restarted(&a, &m, &[1.0, 1.0], &[0.0, 0.0], &single),
            Err(Error::PrecisionMismatch { .. })
        ));
    }

    #[test]
    fn exact_initial_guess_converges_without_iterations() {
        let a = CsrMatrix::from_diagonal(&[2.0f64, 4.0]);
        let rep = gmres_restarted(&a, &Identity::new(2), &[2.0, 4.0], &[1.0, 1.0], &SolverConfig::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.total_iters, 0);
    }

    #[test]
    fn loss_of_accuracy_definition() {
        assert!(!detect_loss_of_accuracy(1e-11, 9e-11, 1e-10));
        assert!(detect_loss_of_accuracy(1e-11, 1e-6, 1e-10));
        assert!(!detect_loss_of_accuracy(1e-9, 1e-6, 1e-10));
    }

    #[test]
    fn iteration_cap_gives_unconverged_report() {
        let a = crate::sparse::generate_stencil(&crate::sparse::ProblemSpec::laplace2d(10)).unwrap();
        let cfg = SolverConfig::new(Precision::Double, 5, 1e-10).with_max_iters(12);
        let rep = gmres_restarted(&a, &Identity::new(100), &[1.0; 100], &[0.0; 100], &cfg).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.total_iters, 12);
        assert_eq!(rep.restarts, 2);
        // rows: initial + one per iteration
        assert_eq!(rep.history.len(), 13);
        assert_eq!(rep.explicit_trace().count(), 4);
    }
}
