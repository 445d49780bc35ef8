//! Mixed-precision drivers: iterative refinement with a binary32 GMRES correction
//! solve, and the binary32-then-binary64 "first double" scheme.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dense::norm2;
use crate::error::{Error, Result};
use crate::gmres::{restarted, run_cycle, CycleOptions, RestartOptions, SolverConfig};
use crate::precision::Precision;
use crate::precond::{build_preconditioner, PrecondKind, Preconditioner, PreconditionerHandle};
use crate::report::{ConvergenceReport, HistoryEntry, Phase};
use crate::sparse::csr::check_len;
use crate::sparse::{convert_vector, CsrMatrix};

/// Applies a binary32 preconditioner to binary64 vectors: round the input down,
/// apply, widen the result.
#[derive(Debug, Clone)]
pub struct CastPreconditioner {
    inner: PreconditionerHandle<f32>,
}

impl CastPreconditioner {
    pub fn inner(&self) -> &PreconditionerHandle<f32> {
        &self.inner
    }
}

impl Preconditioner<f64> for CastPreconditioner {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn kind(&self) -> PrecondKind {
        self.inner.kind()
    }

    fn precision(&self) -> Precision {
        Precision::Single
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let x32: Vec<f32> = convert_vector(x);
        let mut y32 = vec![0.0f32; x32.len()];
        self.inner.apply(&x32, &mut y32);
        for (yi, &v) in y.iter_mut().zip(&y32) {
            *yi = v as f64;
        }
    }
}

pub fn wrap_low_precision_preconditioner(m: PreconditionerHandle<f32>) -> PreconditionerHandle<f64> {
    Arc::new(CastPreconditioner { inner: m })
}

/// Preconditioner for a binary64 solve, built from the binary64 matrix in
/// `precision`. A binary32 build uses a rounded copy of `a` and is applied through
/// [`CastPreconditioner`].
pub fn preconditioner_for_double(
    spec: crate::precond::PrecondSpec,
    precision: Precision,
    a: &Arc<CsrMatrix<f64>>,
    seed: &[f64],
) -> Result<PreconditionerHandle<f64>> {
    match precision {
        Precision::Double => build_preconditioner(spec, a, seed),
        Precision::Single => {
            let a32 = Arc::new(a.convert::<f32>());
            let m32 = build_preconditioner(spec, &a32, &convert_vector::<f64, f32>(seed))?;
            Ok(wrap_low_precision_preconditioner(m32))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrConfig {
    /// Correction solve settings. Its precision must be lower than
    /// `outer_precision`; its `rtol` is ignored, its `max_iters` caps all inner steps.
    pub inner: SolverConfig,
    pub outer_precision: Precision,
    /// Tolerance on the binary64 explicit residual.
    pub rtol: f64,
    pub max_refinements: usize,
}

impl IrConfig {
    pub fn new(restart: usize, rtol: f64) -> Self {
        Self {
            inner: SolverConfig {
                precond_precision: Precision::Single,
                ..SolverConfig::new(Precision::Single, restart, rtol)
            },
            outer_precision: Precision::Double,
            rtol,
            max_refinements: usize::MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.inner.validate()?;
        if self.inner.precision != Precision::Single || self.outer_precision != Precision::Double {
            return Err(Error::InvalidConfig(
                "iterative refinement needs a single inner and double outer precision".into(),
            ));
        }
        if self.inner.precond_precision != Precision::Single {
            return Err(Error::InvalidConfig(
                "the correction solve applies its preconditioner in single precision".into(),
            ));
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(Error::InvalidConfig(format!("tolerance {} must lie in (0, 1)", self.rtol)));
        }
        Ok(())
    }
}

/// Binary32 operators for GMRES-IR, built ahead of the timed solve.
#[derive(Debug, Clone)]
pub struct IrOperators {
    pub a32: Arc<CsrMatrix<f32>>,
    pub m32: PreconditionerHandle<f32>,
}

impl IrOperators {
    /// Round `a` to binary32 and build the inner preconditioner from the rounded
    /// copy. `seed` starts a polynomial preconditioner's Arnoldi process.
    pub fn prepare(a: &CsrMatrix<f64>, cfg: &IrConfig, seed: &[f64]) -> Result<Self> {
        let a32 = Arc::new(a.convert::<f32>());
        let m32 = build_preconditioner(cfg.inner.precond, &a32, &convert_vector::<f64, f32>(seed))?;
        Ok(Self { a32, m32 })
    }
}

/// GMRES-IR. Each refinement runs exactly one binary32 GMRES(m) cycle on
/// `A u = r` from zero, with no convergence test other than lucky breakdown or an
/// inner residual below `10 u32` relative to `||r||`; `x` and `r = b - A x` are then
/// updated in binary64.
pub fn gmres_ir(a: &CsrMatrix<f64>, b: &[f64], x0: &[f64], cfg: &IrConfig) -> Result<ConvergenceReport> {
    let ops = IrOperators::prepare(a, cfg, b)?;
    gmres_ir_with(a, &ops, b, x0, cfg)
}

pub fn gmres_ir_with(
    a: &CsrMatrix<f64>,
    ops: &IrOperators,
    b: &[f64],
    x0: &[f64],
    cfg: &IrConfig,
) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let n = a.n();
    check_len("single-precision matrix", n, ops.a32.n())?;
    check_len("preconditioner", n, ops.m32.dim())?;
    check_len("right-hand side", n, b.len())?;
    check_len("initial guess", n, x0.len())?;
    if b.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroRhs);
    }

    let mut x = x0.to_vec();
    let mut r = a.residual(b, &x)?;
    let baseline = norm2(&r);
    let mut explicit = if baseline > 0.0 { 1.0 } else { 0.0 };
    let mut history = vec![HistoryEntry {
        iter: 0,
        phase: Phase::Outer,
        implicit_relres: None,
        explicit_relres: Some(explicit),
    }];
    let mut best = explicit;
    let mut iters = 0;
    let mut refinements = 0;
    let mut zero_corrections = 0;
    let mut converged = false;
    let mut stalled = false;
    let zeros = vec![0.0f32; n];
    let floor = 10.0 * Precision::Single.unit_roundoff();

    loop {
        if explicit <= cfg.rtol {
            converged = true;
            break;
        }
        if iters >= cfg.inner.max_iters || refinements >= cfg.max_refinements {
            break;
        }
        let r32: Vec<f32> = convert_vector(&r);
        let gamma = norm2(&r32);
        if gamma == 0.0 || !gamma.is_finite() {
            // the residual is not representable in single precision
            stalled = true;
            break;
        }
        let (u32s, state) = run_cycle(
            &ops.a32,
            ops.m32.as_ref(),
            cfg.inner.restart,
            &r32,
            gamma,
            &zeros,
            CycleOptions {
                baseline: gamma as f64,
                max_steps: cfg.inner.max_iters - iters,
                rtol: None,
                floor: Some(floor),
            },
        )?;
        for (k, res) in state.implicit_norms.iter().enumerate() {
            history.push(HistoryEntry {
                iter: iters + k + 1,
                phase: Phase::Inner,
                implicit_relres: Some(res / baseline),
                explicit_relres: None,
            });
        }
        iters += state.steps;
        refinements += 1;

        if u32s.iter().all(|v| *v == 0.0) {
            zero_corrections += 1;
            if zero_corrections >= 2 {
                stalled = true;
                break;
            }
        } else {
            zero_corrections = 0;
            for (xi, &ui) in x.iter_mut().zip(&u32s) {
                *xi += ui as f64;
            }
            r = a.residual(b, &x)?;
        }
        explicit = norm2(&r) / baseline;
        best = best.min(explicit);
        history.push(HistoryEntry {
            iter: iters,
            phase: Phase::Outer,
            implicit_relres: None,
            explicit_relres: Some(explicit),
        });
        if state.steps == 0 {
            break;
        }
    }

    Ok(ConvergenceReport {
        precision: Precision::Double,
        converged,
        total_iters: iters,
        restarts: refinements.saturating_sub(1),
        final_explicit_relres: explicit,
        best_explicit_relres: best,
        baseline_norm: baseline,
        loss_of_accuracy: false,
        loss_of_accuracy_events: 0,
        stalled,
        single_iters: iters,
        double_iters: 0,
        history,
        solution: x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    /// Single-precision iterations before switching; a multiple of `low.restart`.
    /// Zero skips the single phase.
    pub switch_iter: usize,
    pub low: SolverConfig,
    pub high: SolverConfig,
}

impl FdConfig {
    pub fn new(restart: usize, rtol: f64, switch_iter: usize) -> Self {
        Self {
            switch_iter,
            low: SolverConfig::new(Precision::Single, restart, rtol),
            high: SolverConfig::new(Precision::Double, restart, rtol),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.low.validate()?;
        self.high.validate()?;
        if self.low.precision != Precision::Single || self.high.precision != Precision::Double {
            return Err(Error::InvalidConfig(
                "first-double needs a single first phase and a double second phase".into(),
            ));
        }
        if !self.switch_iter.is_multiple_of(self.low.restart) {
            return Err(Error::InvalidConfig(format!(
                "switch iteration {} is not a multiple of the restart length {}",
                self.switch_iter, self.low.restart
            )));
        }
        Ok(())
    }
}

/// Operators for GMRES-FD, built ahead of the timed solve.
#[derive(Debug, Clone)]
pub struct FdOperators {
    pub a32: Arc<CsrMatrix<f32>>,
    pub m32: PreconditionerHandle<f32>,
    pub m64: PreconditionerHandle<f64>,
}

impl FdOperators {
    pub fn prepare(a: &Arc<CsrMatrix<f64>>, cfg: &FdConfig, seed: &[f64]) -> Result<Self> {
        let a32 = Arc::new(a.convert::<f32>());
        let m32 = build_preconditioner(cfg.low.precond, &a32, &convert_vector::<f64, f32>(seed))?;
        let m64 = preconditioner_for_double(cfg.high.precond, cfg.high.precond_precision, a, seed)?;
        Ok(Self { a32, m32, m64 })
    }
}

/// GMRES-FD: restarted binary32 GMRES until `switch_iter` iterations or a restart
/// that fails to lower the residual, then restarted binary64 GMRES from the widened
/// iterate. Relative residuals in both phases use `||b - A x0||`.
pub fn gmres_fd(a: &Arc<CsrMatrix<f64>>, b: &[f64], x0: &[f64], cfg: &FdConfig) -> Result<ConvergenceReport> {
    let ops = FdOperators::prepare(a, cfg, b)?;
    gmres_fd_with(a, &ops, b, x0, cfg)
}

pub fn gmres_fd_with(
    a: &CsrMatrix<f64>,
    ops: &FdOperators,
    b: &[f64],
    x0: &[f64],
    cfg: &FdConfig,
) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let n = a.n();
    check_len("single-precision matrix", n, ops.a32.n())?;
    check_len("preconditioner", n, ops.m32.dim())?;
    check_len("preconditioner", n, ops.m64.dim())?;
    check_len("right-hand side", n, b.len())?;
    check_len("initial guess", n, x0.len())?;
    if b.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroRhs);
    }
    let baseline = norm2(&a.residual(b, x0)?);

    let mut history = Vec::new();
    let mut single_iters = 0;
    let mut single_cycles = 0;
    let mut best = f64::INFINITY;
    let start = if cfg.switch_iter > 0 {
        let low = SolverConfig {
            max_iters: cfg.switch_iter.min(cfg.low.max_iters),
            ..cfg.low
        };
        let run = restarted(
            &ops.a32,
            ops.m32.as_ref(),
            &convert_vector::<f64, f32>(b),
            &convert_vector::<f64, f32>(x0),
            &low,
            RestartOptions {
                baseline: None,
                phase: Phase::Single,
                iter_offset: 0,
                stop_on_stall: true,
            },
        )?;
        single_iters = run.report.total_iters;
        single_cycles = run.report.restarts + usize::from(single_iters > 0);
        best = run.report.best_explicit_relres;
        history.extend(run.report.history);
        convert_vector::<f32, f64>(&run.x)
    } else {
        x0.to_vec()
    };

    let high = SolverConfig {
        max_iters: cfg.high.max_iters.saturating_sub(single_iters),
        ..cfg.high
    };
    let run = restarted(
        a,
        ops.m64.as_ref(),
        b,
        &start,
        &high,
        RestartOptions {
            baseline: Some(baseline),
            phase: Phase::Double,
            iter_offset: single_iters,
            stop_on_stall: false,
        },
    )?;
    let mut report = run.report;
    history.extend(report.history);
    report.history = history;
    report.single_iters = single_iters;
    report.total_iters = single_iters + report.double_iters;
    report.restarts += single_cycles;
    report.best_explicit_relres = report.best_explicit_relres.min(best);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmres::gmres_restarted;
    use crate::precond::{Identity, PrecondSpec};
    use crate::sparse::{generate_stencil, ProblemSpec};

    fn laplace(nx: usize) -> Arc<CsrMatrix<f64>> {
        Arc::new(generate_stencil(&ProblemSpec::laplace2d(nx)).unwrap())
    }

    #[test]
    fn cast_preconditioner_rounds_through_single() {
        let a32 = Arc::new(CsrMatrix::from_diagonal(&[3.0f32, 7.0]));
        let m = wrap_low_precision_preconditioner(build_preconditioner(PrecondSpec::BlockJacobi { block_size: 1 }, &a32, &[1.0, 1.0]).unwrap());
        assert_eq!(m.precision(), Precision::Single);
        let y = m.apply_vec(&[1.0, 1.0]).unwrap();
        assert_eq!(y[0], (1.0f32 / 3.0) as f64);
        assert_eq!(y[1], (1.0f32 / 7.0) as f64);
    }

    #[test]
    fn ir_reaches_double_accuracy() {
        let a = laplace(8);
        let n = a.n();
        let rep = gmres_ir(&a, &vec![1.0; n], &vec![0.0; n], &IrConfig::new(10, 1e-10)).unwrap();
        assert!(rep.converged, "{:?}", rep.final_explicit_relres);
        let r = a.residual(&vec![1.0; n], &rep.solution).unwrap();
        assert!(norm2(&r) / (n as f64).sqrt() <= 1e-10);
        assert_eq!(rep.single_iters, rep.total_iters);
    }

    #[test]
    fn fd_switch_zero_matches_double() {
        let a = laplace(8);
        let n = a.n();
        let b = vec![1.0; n];
        let x0 = vec![0.0; n];
        let cfg = FdConfig::new(10, 1e-10, 0);
        let fd = gmres_fd(&a, &b, &x0, &cfg).unwrap();
        let plain = gmres_restarted(a.as_ref(), &Identity::new(n), &b, &x0, &cfg.high).unwrap();
        assert_eq!(fd.history, plain.history);
        assert_eq!(fd.solution, plain.solution);
        assert_eq!(fd.total_iters, plain.total_iters);
    }

    #[test]
    fn fd_counts_both_phases() {
        let a = laplace(8);
        let n = a.n();
        let rep = gmres_fd(&a, &vec![1.0; n], &vec![0.0; n], &FdConfig::new(10, 1e-10, 20)).unwrap();
        assert!(rep.converged);
        assert!(rep.single_iters > 0 && rep.single_iters <= 20);
        assert_eq!(rep.total_iters, rep.single_iters + rep.double_iters);
    }

    #[test]
    fn bad_multiprecision_configs() {
        let a = laplace(4);
        assert!(gmres_fd(&a, &[1.0; 16], &[0.0; 16], &FdConfig::new(10, 1e-10, 15)).is_err());
        let mut ir = IrConfig::new(10, 1e-10);
        ir.inner.precision = Precision::Double;
        assert!(gmres_ir(&a, &[1.0; 16], &[0.0; 16], &ir).is_err());
    }
}
