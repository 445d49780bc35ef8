//! Convergence records shared by every solver driver.

use serde::{Deserialize, Serialize};

use crate::precision::Precision;

/// Which part of a solve produced a history row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Single,
    Double,
    /// Low-precision correction solve inside GMRES-IR.
    Inner,
    /// High-precision residual update of GMRES-IR.
    Outer,
}

impl Phase {
    pub fn for_precision(p: Precision) -> Self {
        match p {
            Precision::Single => Phase::Single,
            Precision::Double => Phase::Double,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Single => "single",
            Phase::Double => "double",
            Phase::Inner => "inner",
            Phase::Outer => "outer",
        }
    }
}

/// One row of a convergence history. Residuals are relative to the initial residual
/// norm of the whole solve; `None` means not computed at this iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iter: usize,
    pub phase: Phase,
    pub implicit_relres: Option<f64>,
    pub explicit_relres: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Precision the final residual was measured in.
    pub precision: Precision,
    pub converged: bool,
    /// Arnoldi steps executed, in every phase.
    pub total_iters: usize,
    /// Cycles started after the first one (refinements for GMRES-IR).
    pub restarts: usize,
    pub final_explicit_relres: f64,
    pub best_explicit_relres: f64,
    /// Initial residual norm used as the denominator of every relative residual.
    pub baseline_norm: f64,
    pub loss_of_accuracy: bool,
    pub loss_of_accuracy_events: usize,
    /// Set when a driver gave up because it stopped making progress.
    pub stalled: bool,
    pub single_iters: usize,
    pub double_iters: usize,
    pub history: Vec<HistoryEntry>,
    /// Final iterate, widened to binary64.
    pub solution: Vec<f64>,
}

impl ConvergenceReport {
    /// Implicit residuals of the rows that have one, in order.
    pub fn implicit_trace(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.history
            .iter()
            .filter_map(|h| h.implicit_relres.map(|r| (h.iter, r)))
    }

    /// Explicit residuals of the rows that have one, in order.
    pub fn explicit_trace(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.history
            .iter()
            .filter_map(|h| h.explicit_relres.map(|r| (h.iter, r)))
    }
}
