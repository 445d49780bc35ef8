//! Switch-point and restart-length sweeps, emitted as CSV tables.

use std::io::Write;

use mpgmres::Result;

use crate::experiment::{run_on_problem, ExperimentSpec, Problem, SolverKind};

pub const SWITCH_HEADER: &str = "switch_iter,converged,total_iters,single_iters,double_iters,final_relres";
pub const RESTART_HEADER: &str = "m,iters_double,converged_double,iters_ir,converged_ir";

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchRow {
    pub switch_iter: usize,
    pub converged: bool,
    pub total_iters: usize,
    pub single_iters: usize,
    pub double_iters: usize,
    pub final_relres: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestartRow {
    pub m: usize,
    pub iters_double: usize,
    pub converged_double: bool,
    pub iters_ir: usize,
    pub converged_ir: bool,
}

/// Multiples of `m` from zero up to the iteration where pure single-precision
/// GMRES stops lowering the residual (capped by `max_iters`).
pub fn default_switch_points(spec: &ExperimentSpec, problem: &Problem) -> Result<Vec<usize>> {
    let mut probe = spec.clone();
    probe.solver = SolverKind::GmresFd;
    probe.switch_iter = Some(spec.max_iters / spec.restart * spec.restart);
    probe.repeat = 1;
    let out = run_on_problem(&probe, problem)?;
    let stall = out.report.single_iters / spec.restart * spec.restart;
    Ok((0..=stall).step_by(spec.restart).collect())
}

/// One GMRES-FD run per switch point (`None` picks [`default_switch_points`]).
pub fn sweep_switch_points(
    spec: &ExperimentSpec,
    problem: &Problem,
    points: Option<&[usize]>,
) -> Result<Vec<SwitchRow>> {
    let points = match points {
        Some(p) => p.to_vec(),
        None => default_switch_points(spec, problem)?,
    };
    let mut rows = Vec::with_capacity(points.len());
    for s in points {
        let mut run = spec.clone();
        run.solver = SolverKind::GmresFd;
        run.switch_iter = Some(s);
        let out = run_on_problem(&run, problem)?;
        rows.push(SwitchRow {
            switch_iter: s,
            converged: out.report.converged,
            total_iters: out.report.total_iters,
            single_iters: out.report.single_iters,
            double_iters: out.report.double_iters,
            final_relres: out.report.final_explicit_relres,
        });
    }
    Ok(rows)
}

/// Paired double GMRES(m) and GMRES-IR(m) runs for each restart length.
pub fn sweep_restart_sizes(spec: &ExperimentSpec, problem: &Problem, sizes: &[usize]) -> Result<Vec<RestartRow>> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &m in sizes {
        let mut double = spec.clone();
        double.solver = SolverKind::Gmres;
        double.precision = None;
        double.precond_precision = None;
        double.switch_iter = None;
        double.restart = m;
        let mut ir = double.clone();
        ir.solver = SolverKind::GmresIr;
        let d = run_on_problem(&double, problem)?;
        let i = run_on_problem(&ir, problem)?;
        rows.push(RestartRow {
            m,
            iters_double: d.report.total_iters,
            converged_double: d.report.converged,
            iters_ir: i.report.total_iters,
            converged_ir: i.report.converged,
        });
    }
    Ok(rows)
}

pub fn write_switch_csv<W: Write>(rows: &[SwitchRow], mut out: W) -> Result<()> {
    writeln!(out, "{SWITCH_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:e}",
            r.switch_iter, r.converged, r.total_iters, r.single_iters, r.double_iters, r.final_relres
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_restart_csv<W: Write>(rows: &[RestartRow], mut out: W) -> Result<()> {
    writeln!(out, "{RESTART_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.m, r.iters_double, r.converged_double, r.iters_ir, r.converged_ir
        )?;
    }
    out.flush()?;
    Ok(())
}
