//! Grounded SAS+ tasks with axioms.
//!
//! Tasks are read from the translator's version-3 `.sas` text format.
//! Variables with a non-negative axiom layer are derived (secondary) and
//! binary; their value is fixed to 0 unless an axiom derives 1.

mod parse;
mod write;

use thiserror::Error;

use crate::logic::{find_stratification, AtomId, NormalLogicProgram, Rule};

pub use parse::parse_sas;
pub use write::serialize_sas;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SasError {
    #[error("line {line} ({section}): {message}")]
    Syntax { line: usize, section: String, message: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("axioms are not stratified: {0}")]
    Stratification(String),
}

/// `var = value`; also the fluent `f(var, value)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub var: usize,
    pub value: usize,
}

impl Assignment {
    pub fn new(var: usize, value: usize) -> Self {
        Assignment { var, value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Primary,
    /// Derived variable with its axiom layer from the file.
    Secondary { layer: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SasVariable {
    pub id: usize,
    pub name: String,
    pub kind: VarKind,
    pub value_names: Vec<String>,
}

impl SasVariable {
    pub fn domain_size(&self) -> usize {
        self.value_names.len()
    }

    pub fn is_primary(&self) -> bool {
        self.kind == VarKind::Primary
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Effect {
    pub condition: Vec<Assignment>,
    pub affected: Assignment,
}

impl Effect {
    pub fn is_conditional(&self) -> bool {
        !self.condition.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operator {
    pub id: usize,
    pub name: String,
    /// Sorted by variable, at most one entry per variable.
    pub precondition: Vec<Assignment>,
    pub effects: Vec<Effect>,
    pub cost: u64,
}

impl Operator {
    pub fn pre_value(&self, var: usize) -> Option<usize> {
        self.precondition.iter().find(|a| a.var == var).map(|a| a.value)
    }

    pub fn has_conditional_effects(&self) -> bool {
        self.effects.iter().any(Effect::is_conditional)
    }
}

/// `head :- pos_body, not neg_body.` The head is a secondary variable taking
/// value 1. Negative literals name the negated atom, which is always a
/// secondary variable at value 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axiom {
    pub head: Assignment,
    pub pos_body: Vec<Assignment>,
    pub neg_body: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutexGroup {
    pub fluents: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SasTask {
    pub variables: Vec<SasVariable>,
    pub axioms: Vec<Axiom>,
    pub operators: Vec<Operator>,
    pub mutex_groups: Vec<MutexGroup>,
    /// One value per variable; secondary entries hold the default 0.
    pub init: Vec<usize>,
    pub goal: Vec<Assignment>,
    /// Whether the file declared action costs.
    pub use_costs: bool,
}

impl SasTask {
    pub fn is_primary(&self, var: usize) -> bool {
        self.variables[var].is_primary()
    }

    pub fn primary_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables.iter().filter(|v| v.is_primary()).map(|v| v.id)
    }

    pub fn secondary_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables.iter().filter(|v| !v.is_primary()).map(|v| v.id)
    }

    pub fn has_axioms(&self) -> bool {
        !self.axioms.is_empty()
    }

    pub fn has_conditional_effects(&self) -> bool {
        self.operators.iter().any(Operator::has_conditional_effects)
    }

    pub fn operator_by_name(&self, name: &str) -> Option<&Operator> {
        self.operators.iter().find(|o| o.name == name)
    }

    /// Checks the structural invariants the rest of the crate relies on.
    /// The parser calls this; tasks built in code should too.
    pub fn validate(&self) -> Result<(), SasError> {
        let unsupported = |m: String| Err(SasError::UnsupportedFeature(m));
        for (i, v) in self.variables.iter().enumerate() {
            if v.id != i {
                return unsupported(format!("variable ids must be dense, found {} at {i}", v.id));
            }
            if v.domain_size() < 2 {
                return unsupported(format!("variable {} has domain size {}", v.name, v.domain_size()));
            }
            if !v.is_primary() && v.domain_size() != 2 {
                return unsupported(format!("derived variable {} is not binary", v.name));
            }
        }
        let check = |a: &Assignment, what: &str| -> Result<(), SasError> {
            match self.variables.get(a.var) {
                Some(v) if a.value < v.domain_size() => Ok(()),
                _ => Err(SasError::UnsupportedFeature(format!("{what} refers to undeclared fluent {}={}", a.var, a.value))),
            }
        };
        if self.init.len() != self.variables.len() {
            return unsupported("initial state does not cover every variable".into());
        }
        for (var, &value) in self.init.iter().enumerate() {
            check(&Assignment::new(var, value), "initial state")?;
            if !self.is_primary(var) && value != 0 {
                return unsupported(format!("derived variable {} has default value {value}", self.variables[var].name));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for g in &self.goal {
            check(g, "goal")?;
            if !seen.insert(g.var) {
                return unsupported(format!("goal assigns variable {} twice", g.var));
            }
        }
        for o in &self.operators {
            for a in &o.precondition {
                check(a, "precondition")?;
            }
            if o.precondition.windows(2).any(|w| w[0].var >= w[1].var) {
                return unsupported(format!("operator {}: precondition must be sorted with one entry per variable", o.name));
            }
            for (i, e) in o.effects.iter().enumerate() {
                check(&e.affected, "effect")?;
                for c in &e.condition {
                    check(c, "effect condition")?;
                }
                if !self.is_primary(e.affected.var) {
                    return unsupported(format!("operator {} assigns derived variable {}", o.name, self.variables[e.affected.var].name));
                }
                let clash = o.effects[..i].iter().any(|f| {
                    f.affected.var == e.affected.var && f.affected.value != e.affected.value && f.condition == e.condition
                });
                if clash {
                    return unsupported(format!("operator {} has contradictory effects on {}", o.name, self.variables[e.affected.var].name));
                }
            }
        }
        for ax in &self.axioms {
            check(&ax.head, "axiom head")?;
            if self.is_primary(ax.head.var) || ax.head.value != 1 {
                return unsupported(format!("axiom head {} is not a derived variable set to 1", self.variables[ax.head.var].name));
            }
            for b in &ax.pos_body {
                check(b, "axiom body")?;
                if !self.is_primary(b.var) && b.value != 1 {
                    return unsupported("positive axiom literal over a derived variable must use value 1".into());
                }
            }
            for c in &ax.neg_body {
                check(c, "axiom body")?;
                if self.is_primary(c.var) || c.value != 1 {
                    return unsupported("negative axiom literals must name a derived variable".into());
                }
                if ax.pos_body.contains(c) {
                    return unsupported(format!("axiom for {} requires a derived variable both true and false", self.variables[ax.head.var].name));
                }
            }
        }
        for g in &self.mutex_groups {
            if g.fluents.len() < 2 {
                return unsupported("mutex group with fewer than two fluents".into());
            }
            for (i, f) in g.fluents.iter().enumerate() {
                check(f, "mutex group")?;
                if !self.is_primary(f.var) {
                    return unsupported("mutex group mentions a derived variable".into());
                }
                if g.fluents[..i].contains(f) {
                    return unsupported("mutex group repeats a fluent".into());
                }
            }
        }
        let prog = self.axiom_program();
        if find_stratification(&prog.program).is_none() {
            return Err(SasError::Stratification("negation through recursion among derived variables".into()));
        }
        Ok(())
    }

    /// The axioms as a normal logic program over fluent atoms, without facts.
    ///
    /// Panics if an axiom requires the same derived variable both true and
    /// false; [`SasTask::validate`] rejects such tasks.
    pub fn axiom_program(&self) -> AxiomProgram {
        AxiomProgram::new(self)
    }
}

/// What an atom of an [`AxiomProgram`] stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxiomAtom {
    /// A secondary variable being true.
    Derived(usize),
    /// A primary fluent used in some axiom body.
    Fluent(Assignment),
}

/// The task's axioms as a normal logic program. Rule `i` is axiom `i`.
/// Derived atoms come first, in variable order, labelled `v{id}`; primary
/// fluents mentioned by bodies follow, labelled `v{id}_{value}`.
#[derive(Debug, Clone)]
pub struct AxiomProgram {
    pub program: NormalLogicProgram,
    pub atoms: Vec<AxiomAtom>,
    derived_atom: Vec<Option<AtomId>>,
}

impl AxiomProgram {
    fn new(task: &SasTask) -> Self {
        let mut program = NormalLogicProgram::new();
        let mut atoms = Vec::new();
        let mut derived_atom = vec![None; task.variables.len()];
        for u in task.secondary_vars() {
            derived_atom[u] = Some(program.atom(&format!("v{u}")));
            atoms.push(AxiomAtom::Derived(u));
        }
        let mut fluents: Vec<Assignment> = task
            .axioms
            .iter()
            .flat_map(|a| a.pos_body.iter().chain(&a.neg_body))
            .filter(|a| task.is_primary(a.var))
            .copied()
            .collect();
        fluents.sort();
        fluents.dedup();
        for f in fluents {
            program.atom(&format!("v{}_{}", f.var, f.value));
            atoms.push(AxiomAtom::Fluent(f));
        }
        let mut out = AxiomProgram { program, atoms, derived_atom };
        for ax in &task.axioms {
            let head = out.atom_of(task, ax.head).expect("axiom head is derived");
            let pos = ax.pos_body.iter().map(|&b| out.atom_of(task, b).expect("declared")).collect();
            let neg = ax.neg_body.iter().map(|&c| out.atom_of(task, c).expect("declared")).collect();
            out.program.add_rule(Rule::new(head, pos, neg)).expect("axiom bodies are consistent");
        }
        out
    }

    /// Atom for an axiom literal's assignment, if the program has one.
    pub fn atom_of(&self, task: &SasTask, a: Assignment) -> Option<AtomId> {
        if task.is_primary(a.var) {
            self.program.lookup(&format!("v{}_{}", a.var, a.value))
        } else {
            self.derived_atom[a.var]
        }
    }

    pub fn derived_atom(&self, var: usize) -> Option<AtomId> {
        self.derived_atom.get(var).copied().flatten()
    }

    /// Atoms for the primary fluents that hold in `state`.
    pub fn facts_for(&self, state: &[usize]) -> Vec<AtomId> {
        self.atoms
            .iter()
            .enumerate()
            .filter_map(|(i, a)| match a {
                AxiomAtom::Fluent(f) if state[f.var] == f.value => Some(i),
                _ => None,
            })
            .collect()
    }
}

/// The per-state axiom program: every axiom as a rule plus a fact for each
/// primary fluent that holds in `state` and occurs in some axiom body.
/// `state` holds one value per variable; secondary entries are ignored.
pub fn task_to_nlp(task: &SasTask, state: &[usize]) -> NormalLogicProgram {
    let ap = task.axiom_program();
    let mut p = ap.program.clone();
    for a in ap.facts_for(state) {
        p.add_rule(Rule::fact(a)).expect("fact atoms are declared");
    }
    p
}

#[cfg(test)]
pub(crate) mod fixtures {
    /// One primary binary `v`, one derived `u` with `u :- v=1`, operator
    /// `set_v` making `v` true, goal `u`.
    pub const TOY1: &str = "begin_version
3
end_version
begin_metric
0
end_metric
2
begin_variable
v
-1
2
Atom v()
NegatedAtom v()
end_variable
begin_variable
u
0
2
NegatedAtom u()
Atom u()
end_variable
0
begin_state
0
0
end_state
begin_goal
1
1 1
end_goal
1
begin_operator
set_v
0
1
0 0 -1 1
1
end_operator
1
begin_rule
1
0 1
1 0 1
end_rule
";

    pub fn toy1() -> super::SasTask {
        super::parse_sas(TOY1).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::toy1;
    use super::*;

    #[test]
    fn toy1_nlp_with_v_true() {
        let t = toy1();
        let p = task_to_nlp(&t, &[1, 0]);
        assert_eq!(p.to_string(), "v1 :- v0_1.\nv0_1.\n");
    }

    #[test]
    fn toy1_nlp_with_v_false() {
        let t = toy1();
        let p = task_to_nlp(&t, &[0, 0]);
        assert_eq!(p.to_string(), "v1 :- v0_1.\n");
    }

    #[test]
    fn task_without_axioms_gives_empty_program() {
        let mut t = toy1();
        t.axioms.clear();
        assert!(task_to_nlp(&t, &[1, 0]).rules().is_empty());
    }
}
