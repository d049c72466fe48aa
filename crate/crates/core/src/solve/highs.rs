//! HiGHS-backed implementation of the MIP interface.

use std::ffi::CStr;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense as HighsSense};

use super::mip::{ModelInstance, Sense, VarKind};
use super::{MipBackend, Solution, SolutionStatus, SolveError, SolverOptions};

pub struct HighsBackend;

impl MipBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(
        &self,
        model: &ModelInstance,
        options: &SolverOptions,
    ) -> Result<Solution, SolveError> {
        let mut problem = RowProblem::default();
        let cols: Vec<highs::Col> = model
            .vars()
            .iter()
            .map(|v| match v.kind {
                VarKind::Continuous => problem.add_column(v.objective, v.lower..=v.upper),
                VarKind::Binary => problem.add_integer_column(v.objective, v.lower..=v.upper),
            })
            .collect();
        let mut merged: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        for c in model.constraints() {
            // HiGHS rejects rows that mention a column twice.
            merged.clear();
            for (id, coef) in &c.terms {
                *merged.entry(id.index()).or_insert(0.0) += coef;
            }
            let terms: Vec<(highs::Col, f64)> =
                merged.iter().map(|(&i, &coef)| (cols[i], coef)).collect();
            match c.sense {
                Sense::Le => problem.add_row(..=c.rhs, terms),
                Sense::Ge => problem.add_row(c.rhs.., terms),
                Sense::Eq => problem.add_row(c.rhs..=c.rhs, terms),
            };
        }

        let mut solver = problem
            .try_optimise(HighsSense::Maximise)
            .map_err(|status| SolveError::Backend(format!("HiGHS rejected the model: {status:?}")))?;
        solver.set_option("output_flag", false);
        solver.set_option("mip_rel_gap", options.relative_gap);
        solver.set_option("random_seed", 0);
        solver.set_option("threads", options.threads.unwrap_or(1) as i32);
        if let Some(limit) = options.time_limit_s {
            solver.set_option("time_limit", limit);
        }

        let solved = solver.try_solve().map_err(|status| {
            SolveError::Backend(format!("HiGHS run failed with status {status:?}"))
        })?;
        let offset = model.objective_offset();
        let has_incumbent = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let dual_bound = || {
            let name = CStr::from_bytes_with_nul(b"mip_dual_bound\0").unwrap();
            solved
                .double_info_value(name)
                .map(|b| b + offset)
                .unwrap_or(f64::INFINITY)
        };

        let solution = match solved.status() {
            HighsModelStatus::Optimal => Solution {
                status: SolutionStatus::Optimal,
                objective: solved.objective_value() + offset,
                bound: dual_bound(),
                assignment: solved.get_solution().columns().to_vec(),
            },
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => Solution {
                status: SolutionStatus::Infeasible,
                objective: f64::NEG_INFINITY,
                bound: f64::NEG_INFINITY,
                assignment: Vec::new(),
            },
            HighsModelStatus::ReachedTimeLimit => Solution {
                status: SolutionStatus::TimeLimit,
                objective: if has_incumbent {
                    solved.objective_value() + offset
                } else {
                    f64::NEG_INFINITY
                },
                bound: dual_bound(),
                assignment: if has_incumbent {
                    solved.get_solution().columns().to_vec()
                } else {
                    Vec::new()
                },
            },
            // Iteration/solution limits and interrupts can still carry an incumbent.
            _ if has_incumbent => Solution {
                status: SolutionStatus::Feasible,
                objective: solved.objective_value() + offset,
                bound: dual_bound(),
                assignment: solved.get_solution().columns().to_vec(),
            },
            status => {
                return Err(SolveError::Backend(format!(
                    "HiGHS terminated with status {status:?} and no solution"
                )))
            }
        };
        Ok(solution)
    }
}
