//! MIP solving: a minimal backend abstraction over the portable model
//! representation, the HiGHS backend, and an exhaustive dynamic-programming
//! oracle for small instances.

pub mod mip;

mod highs;
mod oracle;

pub use highs::HighsBackend;
pub use oracle::{dp_oracle, OracleError, OracleSolution};

use thiserror::Error;

use mip::ModelInstance;

/// Environment variable consulted for the default backend name.
pub const SOLVER_ENV_VAR: &str = "PESS_SOLVER";

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("unknown solver backend `{name}` (available: {available})")]
    UnknownBackend { name: String, available: String },
    #[error("solver backend failure: {0}")]
    Backend(String),
}

/// Options forwarded to the MIP backend.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Relative MIP gap at which the search stops and reports optimal.
    pub relative_gap: f64,
    /// Wall-clock limit in seconds.
    pub time_limit_s: Option<f64>,
    /// Solver threads; `None` means 1 (deterministic).
    pub threads: Option<u32>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            relative_gap: 1e-6,
            time_limit_s: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionStatus {
    /// Proven optimal within the relative gap.
    Optimal,
    /// A feasible incumbent without optimality proof.
    Feasible,
    /// No feasible point exists.
    Infeasible,
    /// Stopped at the time limit (assignment present if an incumbent exists).
    TimeLimit,
}

/// Outcome of one MIP solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolutionStatus,
    /// Variable values in model order; empty when no incumbent exists.
    pub assignment: Vec<f64>,
    /// Objective of the incumbent (meaningless without one).
    pub objective: f64,
    /// Best proven objective bound.
    pub bound: f64,
}

impl Solution {
    pub fn has_assignment(&self) -> bool {
        !self.assignment.is_empty()
    }
}

/// A MIP engine able to solve a [`ModelInstance`].
pub trait MipBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &ModelInstance, options: &SolverOptions)
        -> Result<Solution, SolveError>;
}

/// Look up a backend by name (case-insensitive).
pub fn backend_by_name(name: &str) -> Result<Box<dyn MipBackend>, SolveError> {
    match name.to_ascii_lowercase().as_str() {
        "highs" => Ok(Box::new(HighsBackend)),
        _ => Err(SolveError::UnknownBackend {
            name: name.to_string(),
            available: "highs".to_string(),
        }),
    }
}

/// Solve with the default backend (HiGHS).
pub fn solve(model: &ModelInstance, options: &SolverOptions) -> Result<Solution, SolveError> {
    HighsBackend.solve(model, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::mip::Sense;

    #[test]
    fn backend_registry() {
        assert_eq!(backend_by_name("highs").unwrap().name(), "highs");
        assert_eq!(backend_by_name("HiGHS").unwrap().name(), "highs");
        assert!(matches!(
            backend_by_name("cplex"),
            Err(SolveError::UnknownBackend { .. })
        ));
    }

    #[test]
    fn small_milp_solves_to_optimality() {
        // max 3x + 2y + b : x + y <= 4, x <= 3b, x,y >= 0, b binary
        let mut m = ModelInstance::new();
        let x = m.add_continuous(0.0, f64::INFINITY, 3.0);
        let y = m.add_continuous(0.0, f64::INFINITY, 2.0);
        let b = m.add_binary(1.0);
        m.add_constraint(vec![(x, 1.0), (y, 1.0)], Sense::Le, 4.0);
        m.add_constraint(vec![(x, 1.0), (b, -3.0)], Sense::Le, 0.0);
        let sol = solve(&m, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolutionStatus::Optimal);
        // x = 3, y = 1, b = 1 -> 3*3 + 2*1 + 1 = 12
        assert!((sol.objective - 12.0).abs() < 1e-6, "got {}", sol.objective);
        assert_eq!(sol.assignment.len(), 3);
    }

    #[test]
    fn objective_offset_is_applied() {
        let mut m = ModelInstance::new();
        let x = m.add_continuous(0.0, 2.0, 1.0);
        let _ = x;
        m.add_objective_offset(-10.0);
        let sol = solve(&m, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolutionStatus::Optimal);
        assert!((sol.objective - (2.0 - 10.0)).abs() < 1e-9);
    }

    #[test]
    fn infeasible_reported_as_status() {
        let mut m = ModelInstance::new();
        let x = m.add_continuous(0.0, 1.0, 1.0);
        m.add_constraint(vec![(x, 1.0)], Sense::Ge, 2.0);
        let sol = solve(&m, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolutionStatus::Infeasible);
        assert!(!sol.has_assignment());
    }
}
