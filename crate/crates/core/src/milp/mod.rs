//! Integer linear models: variables with finite bounds, tagged linear
//! constraints, an assignment checker, and LP-format text.

mod lp;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use lp::{parse_lp, write_lp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MilpError {
    #[error("LP line {line}: {message}")]
    LpSyntax { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarType {
    Binary,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilpVariable {
    pub name: String,
    pub kind: VarType,
    pub lower: i64,
    pub upper: i64,
    /// Branch on the upper bound first.
    pub prefer_high: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// `sum(coef * var) sense rhs`, variables given by model index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(i64, usize)>,
    pub sense: Sense,
    pub rhs: i64,
    pub tag: String,
}

impl LinearConstraint {
    pub fn activity(&self, values: &[i64]) -> i64 {
        self.terms.iter().map(|&(c, v)| c * values[v]).sum()
    }

    pub fn holds(&self, values: &[i64]) -> bool {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Eq => lhs == self.rhs,
            Sense::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MilpModel {
    pub variables: Vec<MilpVariable>,
    pub constraints: Vec<LinearConstraint>,
    /// Minimized when present.
    pub objective: Option<Vec<(i64, usize)>>,
    pub horizon: usize,
    index: HashMap<String, usize>,
}

/// First constraint an assignment breaks, or a bound it leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Length { expected: usize, found: usize },
    Bound { var: String, value: i64 },
    Constraint { index: usize, tag: String, lhs: i64 },
}

impl MilpModel {
    pub fn new(horizon: usize) -> Self {
        MilpModel { horizon, ..Default::default() }
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Declares `name`, or returns the existing variable of that name.
    pub fn add_var(&mut self, name: &str, kind: VarType, lower: i64, upper: i64, prefer_high: bool) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.variables.len();
        let (lower, upper) = match kind {
            VarType::Binary => (0, 1),
            VarType::Integer => (lower, upper),
        };
        self.variables.push(MilpVariable { name: name.to_string(), kind, lower, upper, prefer_high });
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn binary(&mut self, name: &str) -> usize {
        self.add_var(name, VarType::Binary, 0, 1, false)
    }

    pub fn integer(&mut self, name: &str, lower: i64, upper: i64) -> usize {
        self.add_var(name, VarType::Integer, lower, upper, false)
    }

    /// Adds a constraint after merging repeated variables and dropping zero
    /// coefficients. A constraint left without terms is kept only when it
    /// is violated.
    pub fn constrain(&mut self, tag: &str, terms: Vec<(i64, usize)>, sense: Sense, rhs: i64) {
        let mut merged: Vec<(i64, usize)> = Vec::with_capacity(terms.len());
        for (c, v) in terms {
            match merged.iter_mut().find(|(_, w)| *w == v) {
                Some(t) => t.0 += c,
                None => merged.push((c, v)),
            }
        }
        merged.retain(|&(c, _)| c != 0);
        let con = LinearConstraint { terms: merged, sense, rhs, tag: tag.to_string() };
        if con.terms.is_empty() && con.holds(&[]) {
            return;
        }
        self.constraints.push(con);
    }

    pub fn names(&self, terms: &[(i64, usize)]) -> Vec<(i64, &str)> {
        terms.iter().map(|&(c, v)| (c, self.variables[v].name.as_str())).collect()
    }

    /// Checks bounds and every constraint.
    pub fn check(&self, values: &[i64]) -> Result<(), Violation> {
        if values.len() != self.variables.len() {
            return Err(Violation::Length { expected: self.variables.len(), found: values.len() });
        }
        for (v, &x) in self.variables.iter().zip(values) {
            if x < v.lower || x > v.upper {
                return Err(Violation::Bound { var: v.name.clone(), value: x });
            }
        }
        for (index, c) in self.constraints.iter().enumerate() {
            if !c.holds(values) {
                return Err(Violation::Constraint { index, tag: c.tag.clone(), lhs: c.activity(values) });
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[i64]) -> i64 {
        self.objective.iter().flatten().map(|&(c, v)| c * values[v]).sum()
    }

    /// Assignment from `(name, value)` pairs; unnamed variables take their
    /// lower bound. Unknown names are ignored.
    pub fn assignment_from<'a>(&self, pairs: impl IntoIterator<Item = (&'a str, i64)>) -> Vec<i64> {
        let mut values: Vec<i64> = self.variables.iter().map(|v| v.lower).collect();
        for (name, x) in pairs {
            if let Some(i) = self.var(name) {
                values[i] = x;
            }
        }
        values
    }

    pub fn tags(&self) -> Vec<&str> {
        let mut tags: Vec<&str> = self.constraints.iter().map(|c| c.tag.as_str()).collect();
        tags.sort_unstable();
        tags.dedup();
        tags
    }
}
