//! Cooperative resource limits for compilation and counting.
//!
//! Long-running stages (the CNF compiler, the stratified counting loops) poll
//! a [`Limits`] value at regular intervals instead of relying on threads or
//! signals. A zero timeout therefore trips on the very first poll.

use std::time::{Duration, Instant};

use crate::{Error, Result};

/// Wall-clock deadline and node budget shared by a pipeline run.
#[derive(Debug, Clone, Copy, Default)]
pub struct Limits {
    /// Absolute deadline; `None` means unlimited time.
    pub deadline: Option<Instant>,
    /// Maximum number of circuit nodes the compiler may allocate; `None`
    /// means unlimited.
    pub node_budget: Option<u64>,
}

impl Limits {
    /// No limits at all.
    pub fn none() -> Self {
        Self::default()
    }

    /// Deadline `timeout` from now, no node budget.
    pub fn with_timeout(timeout: Duration) -> Self {
        Self {
            deadline: Some(Instant::now() + timeout),
            node_budget: None,
        }
    }

    /// Node budget only.
    pub fn with_node_budget(nodes: u64) -> Self {
        Self {
            deadline: None,
            node_budget: Some(nodes),
        }
    }

    /// Errors with [`Error::DeadlineExceeded`] once the deadline has passed.
    pub fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::DeadlineExceeded),
            _ => Ok(()),
        }
    }

    /// Errors with [`Error::BudgetExhausted`] once `nodes` exceeds the budget.
    pub fn check_nodes(&self, nodes: u64) -> Result<()> {
        match self.node_budget {
            Some(b) if nodes > b => Err(Error::BudgetExhausted { nodes }),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unlimited_never_trips() {
        let l = Limits::none();
        assert!(l.check_deadline().is_ok());
        assert!(l.check_nodes(u64::MAX).is_ok());
    }

    #[test]
    fn zero_timeout_trips_immediately() {
        let l = Limits::with_timeout(Duration::ZERO);
        assert!(matches!(l.check_deadline(), Err(Error::DeadlineExceeded)));
    }

    #[test]
    fn node_budget_trips_only_above_budget() {
        let l = Limits::with_node_budget(10);
        assert!(l.check_nodes(10).is_ok());
        assert!(matches!(
            l.check_nodes(11),
            Err(Error::BudgetExhausted { nodes: 11 })
        ));
    }
}
