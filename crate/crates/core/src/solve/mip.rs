//! Backend-neutral MILP representation.
//!
//! The interface is deliberately minimal so any MIP engine can host it:
//! continuous variables with bounds, binary variables, linear constraints
//! (<=, =, >=), and a linear maximization objective with a constant offset.

use serde::{Deserialize, Serialize};

/// Handle to a variable inside one [`ModelInstance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(&self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarDef {
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    /// Coefficient in the (maximized) objective.
    pub objective: f64,
}

/// Comparison sense of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// An immutable-once-built MILP: maximize `offset + sum(c_i x_i)` subject to
/// linear constraints and variable bounds/integrality.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelInstance {
    vars: Vec<VarDef>,
    constraints: Vec<LinearConstraint>,
    objective_offset: f64,
}

impl ModelInstance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_continuous(&mut self, lower: f64, upper: f64, objective: f64) -> VarId {
        self.vars.push(VarDef {
            kind: VarKind::Continuous,
            lower,
            upper,
            objective,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn add_binary(&mut self, objective: f64) -> VarId {
        self.vars.push(VarDef {
            kind: VarKind::Binary,
            lower: 0.0,
            upper: 1.0,
            objective,
        });
        VarId(self.vars.len() - 1)
    }

    /// Binary variable pinned at zero (upper bound 0). Used for structurally
    /// impossible decisions that still occupy a slot in the variable layout.
    pub fn add_binary_fixed_zero(&mut self) -> VarId {
        self.vars.push(VarDef {
            kind: VarKind::Binary,
            lower: 0.0,
            upper: 0.0,
            objective: 0.0,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn add_constraint(&mut self, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(LinearConstraint { terms, sense, rhs });
    }

    pub fn add_objective_offset(&mut self, constant: f64) {
        self.objective_offset += constant;
    }

    pub fn vars(&self) -> &[VarDef] {
        &self.vars
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_binary_vars(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn num_continuous_vars(&self) -> usize {
        self.vars
            .iter()
            .filter(|v| v.kind == VarKind::Continuous)
            .count()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Objective value of an assignment (no feasibility check).
    pub fn objective_value(&self, assignment: &[f64]) -> f64 {
        self.objective_offset
            + self
                .vars
                .iter()
                .zip(assignment)
                .map(|(v, x)| v.objective * x)
                .sum::<f64>()
    }
}
