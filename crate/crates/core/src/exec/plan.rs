use std::fmt::Write;

use super::ExecError;
use crate::sas::SasTask;

/// Operator ids grouped into steps. Steps are never empty and keep their
/// operators sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Plan {
    steps: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanSummary {
    pub makespan: usize,
    pub cost: u64,
    pub operators: usize,
}

impl Plan {
    pub fn empty() -> Self {
        Plan::default()
    }

    /// One operator per step.
    pub fn sequential(ops: Vec<usize>) -> Self {
        Plan { steps: ops.into_iter().map(|o| vec![o]).collect() }
    }

    /// Drops empty steps, sorts and dedups each step.
    pub fn from_steps(steps: Vec<Vec<usize>>) -> Self {
        let steps = steps
            .into_iter()
            .filter(|s| !s.is_empty())
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        Plan { steps }
    }

    pub fn steps(&self) -> &[Vec<usize>] {
        &self.steps
    }

    pub fn makespan(&self) -> usize {
        self.steps.len()
    }

    pub fn operator_count(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    pub fn is_sequential(&self) -> bool {
        self.steps.iter().all(|s| s.len() == 1)
    }

    pub fn cost(&self, task: &SasTask) -> u64 {
        self.steps.iter().flatten().map(|&o| task.operators[o].cost).sum()
    }

    /// Plan text: one line per step, operator names separated by spaces.
    /// Names containing whitespace are wrapped in parentheses.
    pub fn to_text(&self, task: &SasTask) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let names: Vec<String> = step.iter().map(|&o| quote_name(&task.operators[o].name)).collect();
            let _ = writeln!(out, "{}", names.join(" "));
        }
        out
    }
}

fn quote_name(name: &str) -> String {
    if name.chars().any(char::is_whitespace) {
        format!("({name})")
    } else {
        name.to_string()
    }
}

/// Reads plan text. Lines starting with `;` are comments; blank lines are
/// skipped. Each remaining line is one step.
pub fn parse_plan(task: &SasTask, text: &str) -> Result<Plan, ExecError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        let err = |message: String| ExecError::PlanSyntax { line: i + 1, message };
        let mut step = Vec::new();
        let mut rest = line;
        while !rest.is_empty() {
            let (name, tail) = if let Some(inner) = rest.strip_prefix('(') {
                let close = inner.find(')').ok_or_else(|| err("unclosed `(`".into()))?;
                (inner[..close].trim(), &inner[close + 1..])
            } else {
                let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
                (&rest[..end], &rest[end..])
            };
            let op = task
                .operators
                .iter()
                .find(|o| o.name == name || o.name.split_whitespace().eq(name.split_whitespace()))
                .ok_or_else(|| err(format!("unknown operator `{name}`")))?;
            step.push(op.id);
            rest = tail.trim_start();
        }
        steps.push(step);
    }
    Ok(Plan::from_steps(steps))
}
