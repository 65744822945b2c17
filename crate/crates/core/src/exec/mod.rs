//! Extended states, operator application, plan validation and a
//! breadth-first oracle planner.

mod oracle;
mod plan;

use std::fmt;

use thiserror::Error;

use crate::logic::StratifiedProgram;
use crate::sas::{Assignment, AxiomProgram, Operator, SasTask};

pub use oracle::{oracle_plan, reachable_states, STATE_CAP};
pub use plan::{parse_plan, Plan, PlanSummary};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("step {step}: operator {op} is not applicable")]
    NotApplicable { step: usize, op: String },
    #[error("step {step}: operator {op} triggers conflicting effects on variable {var}")]
    ConflictingEffects { step: usize, op: String, var: usize },
    #[error("goal does not hold in the final state")]
    GoalUnsatisfied,
    #[error("step {step}: operators {op1} and {op2} conflict")]
    StepConflict { step: usize, op1: String, op2: String },
    #[error("parallel steps are not supported for tasks with axioms")]
    ForallWithAxioms,
    #[error("step {step} has {count} operators under sequential semantics")]
    NotSequential { step: usize, count: usize },
    #[error("unknown operator id {0}")]
    UnknownOperator(usize),
    #[error("more than {0} reachable states")]
    StateSpaceTooLarge(usize),
    #[error("plan line {line}: {message}")]
    PlanSyntax { line: usize, message: String },
}

/// How many operators a model step may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    /// Exactly one operator per step.
    Seq,
    /// A set of pairwise non-conflicting operators per step.
    Forall,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Seq => "seq",
            Semantics::Forall => "forall",
        })
    }
}

/// A primary assignment closed under the axioms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtendedState {
    /// One value per variable; secondary variables hold 0 or 1.
    values: Vec<usize>,
}

impl ExtendedState {
    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn value(&self, var: usize) -> usize {
        self.values[var]
    }

    pub fn holds(&self, a: Assignment) -> bool {
        self.values[a.var] == a.value
    }

    pub fn holds_all(&self, assignments: &[Assignment]) -> bool {
        assignments.iter().all(|&a| self.holds(a))
    }

    pub fn derived(&self, var: usize) -> bool {
        self.values[var] == 1
    }
}

/// Axiom evaluation with the stratification computed once per task.
#[derive(Debug, Clone)]
pub struct Executor<'t> {
    task: &'t SasTask,
    axioms: AxiomProgram,
    strata: StratifiedProgram,
}

impl<'t> Executor<'t> {
    /// Panics if the task's axioms are not stratified; parsed tasks always are.
    pub fn new(task: &'t SasTask) -> Self {
        let axioms = task.axiom_program();
        let strata = StratifiedProgram::new(&axioms.program).expect("validated tasks have stratified axioms");
        Executor { task, axioms, strata }
    }

    pub fn task(&self) -> &'t SasTask {
        self.task
    }

    /// `A(s)` for the primary part of `values`; secondary entries are ignored.
    pub fn evaluate(&self, values: &[usize]) -> ExtendedState {
        let model = self.strata.evaluate(&self.axioms.facts_for(values));
        let mut values = values.to_vec();
        for u in self.task.secondary_vars() {
            let atom = self.axioms.derived_atom(u).expect("derived atom");
            values[u] = usize::from(model[atom]);
        }
        ExtendedState { values }
    }

    pub fn initial_state(&self) -> ExtendedState {
        self.evaluate(&self.task.init)
    }

    pub fn goal_holds(&self, s: &ExtendedState) -> bool {
        s.holds_all(&self.task.goal)
    }

    pub fn applicable(&self, s: &ExtendedState, o: &Operator) -> bool {
        s.holds_all(&o.precondition)
    }

    /// Primary assignment after `o`'s triggered effects, without re-evaluating
    /// axioms. Effect conditions are read from `s`.
    fn successor_values(&self, s: &ExtendedState, o: &Operator) -> Result<Vec<usize>, usize> {
        let mut values = s.values.clone();
        let mut assigned: Vec<Option<usize>> = vec![None; values.len()];
        for e in o.effects.iter().filter(|e| s.holds_all(&e.condition)) {
            let Assignment { var, value } = e.affected;
            match assigned[var] {
                Some(v) if v != value => return Err(var),
                _ => assigned[var] = Some(value),
            }
            values[var] = value;
        }
        Ok(values)
    }

    /// Applies `o` in `s`; `step` is only used for error reporting.
    pub fn apply(&self, s: &ExtendedState, o: &Operator, step: usize) -> Result<ExtendedState, ExecError> {
        if !self.applicable(s, o) {
            return Err(ExecError::NotApplicable { step, op: o.name.clone() });
        }
        let values = self
            .successor_values(s, o)
            .map_err(|var| ExecError::ConflictingEffects { step, op: o.name.clone(), var })?;
        Ok(self.evaluate(&values))
    }

    /// First pair of operators in `step` that may not share a parallel step:
    /// one assigns `X=Y` while the other requires or assigns `X=Z`, `Y != Z`,
    /// or has an effect conditioned on `X`.
    pub fn step_conflict(&self, ops: &[usize]) -> Option<(usize, usize)> {
        let task = self.task;
        for &a in ops {
            for &b in ops {
                if a == b {
                    continue;
                }
                let (oa, ob) = (&task.operators[a], &task.operators[b]);
                let clash = oa.effects.iter().any(|e| {
                    let x = e.affected;
                    ob.precondition.iter().any(|p| p.var == x.var && p.value != x.value)
                        || ob.effects.iter().any(|f| {
                            (f.affected.var == x.var && f.affected.value != x.value)
                                || f.condition.iter().any(|c| c.var == x.var)
                        })
                });
                if clash {
                    return Some((a.min(b), a.max(b)));
                }
            }
        }
        None
    }

    /// Executes `plan` from the initial state and checks the goal.
    pub fn validate(&self, plan: &Plan, semantics: Semantics) -> Result<PlanSummary, ExecError> {
        let task = self.task;
        if semantics == Semantics::Forall && task.has_axioms() {
            return Err(ExecError::ForallWithAxioms);
        }
        let mut s = self.initial_state();
        for (i, ops) in plan.steps().iter().enumerate() {
            let step = i + 1;
            if let Some(&bad) = ops.iter().find(|&&o| o >= task.operators.len()) {
                return Err(ExecError::UnknownOperator(bad));
            }
            match semantics {
                Semantics::Seq if ops.len() != 1 => {
                    return Err(ExecError::NotSequential { step, count: ops.len() });
                }
                Semantics::Forall => {
                    if let Some((a, b)) = self.step_conflict(ops) {
                        return Err(ExecError::StepConflict {
                            step,
                            op1: task.operators[a].name.clone(),
                            op2: task.operators[b].name.clone(),
                        });
                    }
                    // every precondition is read before the step
                    if let Some(&o) = ops.iter().find(|&&o| !self.applicable(&s, &task.operators[o])) {
                        return Err(ExecError::NotApplicable { step, op: task.operators[o].name.clone() });
                    }
                }
                _ => {}
            }
            // Steps keep operator ids sorted, which is the linearization order.
            for &o in ops {
                s = self.apply(&s, &task.operators[o], step)?;
            }
        }
        if !self.goal_holds(&s) {
            return Err(ExecError::GoalUnsatisfied);
        }
        Ok(PlanSummary { makespan: plan.makespan(), cost: plan.cost(task), operators: plan.operator_count() })
    }

    /// States `s_0 ..= s_n` visited by a plan, one per step.
    pub fn trace(&self, plan: &Plan) -> Result<Vec<ExtendedState>, ExecError> {
        let mut states = vec![self.initial_state()];
        for (i, ops) in plan.steps().iter().enumerate() {
            let mut s = states.last().expect("non-empty").clone();
            for &o in ops {
                let op = self.task.operators.get(o).ok_or(ExecError::UnknownOperator(o))?;
                s = self.apply(&s, op, i + 1)?;
            }
            states.push(s);
        }
        Ok(states)
    }
}

/// Derived values for a primary assignment. `primary` holds one value per
/// variable; secondary entries are ignored.
pub fn evaluate_axioms(task: &SasTask, primary: &[usize]) -> ExtendedState {
    Executor::new(task).evaluate(primary)
}

pub fn apply_operator(task: &SasTask, s: &ExtendedState, o: &Operator) -> Result<ExtendedState, ExecError> {
    Executor::new(task).apply(s, o, 1)
}

pub fn validate_plan(task: &SasTask, plan: &Plan, semantics: Semantics) -> Result<PlanSummary, ExecError> {
    Executor::new(task).validate(plan, semantics)
}


#[cfg(test)]
mod tests {
    use super::fixtures::neg_axioms;
    use super::*;
    use crate::sas::fixtures::toy1;
    use crate::sas::parse_sas;

    #[test]
    fn toy1_axioms() {
        let t = toy1();
        assert!(evaluate_axioms(&t, &[1, 0]).derived(1));
        assert!(!evaluate_axioms(&t, &[0, 0]).derived(1));
    }

    #[test]
    fn evaluation_ignores_stale_derived_values() {
        let t = toy1();
        assert!(!evaluate_axioms(&t, &[0, 1]).derived(1));
    }

    #[test]
    fn toy1_apply() {
        let t = toy1();
        let s = evaluate_axioms(&t, &t.init);
        let s2 = apply_operator(&t, &s, &t.operators[0]).unwrap();
        assert_eq!(s2.values(), &[1, 1]);
    }

    #[test]
    fn failed_effect_condition_leaves_state() {
        let mut t = toy1();
        t.operators[0].effects[0].condition = vec![Assignment::new(1, 1)];
        let s = evaluate_axioms(&t, &t.init);
        assert_eq!(apply_operator(&t, &s, &t.operators[0]).unwrap(), s);
    }

    #[test]
    fn derived_precondition_blocks() {
        let mut t = toy1();
        t.operators[0].precondition = vec![Assignment::new(1, 1)];
        let s = evaluate_axioms(&t, &t.init);
        assert!(matches!(apply_operator(&t, &s, &t.operators[0]), Err(ExecError::NotApplicable { .. })));
    }

    #[test]
    fn conflicting_effects_are_reported() {
        let mut t = toy1();
        let mut e = t.operators[0].effects[0].clone();
        e.affected.value = 0;
        e.condition = vec![Assignment::new(0, 0)];
        t.operators[0].effects.push(e);
        let s = evaluate_axioms(&t, &t.init);
        assert!(matches!(apply_operator(&t, &s, &t.operators[0]), Err(ExecError::ConflictingEffects { var: 0, .. })));
    }

    #[test]
    fn toy1_plan_validates() {
        let t = toy1();
        let plan = Plan::sequential(vec![0]);
        assert_eq!(validate_plan(&t, &plan, Semantics::Seq).unwrap(), PlanSummary { makespan: 1, cost: 1, operators: 1 });
        assert_eq!(validate_plan(&t, &Plan::empty(), Semantics::Seq), Err(ExecError::GoalUnsatisfied));
    }

    #[test]
    fn empty_plan_on_satisfied_goal() {
        let mut t = toy1();
        t.goal = vec![Assignment::new(0, 0)];
        assert_eq!(validate_plan(&t, &Plan::empty(), Semantics::Seq).unwrap().makespan, 0);
    }

    #[test]
    fn forall_is_refused_with_axioms() {
        let t = toy1();
        assert_eq!(validate_plan(&t, &Plan::sequential(vec![0]), Semantics::Forall), Err(ExecError::ForallWithAxioms));
    }

    #[test]
    fn forall_step_conflict() {
        // two operators writing different values of x in one step
        let text = "begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n1\nbegin_variable\nx\n-1\n3\na\nb\nc\nend_variable\n0\nbegin_state\n0\nend_state\nbegin_goal\n1\n0 1\nend_goal\n2\nbegin_operator\nto_b\n0\n1\n0 0 -1 1\n1\nend_operator\nbegin_operator\nto_c\n0\n1\n0 0 -1 2\n1\nend_operator\n0\n";
        let t = parse_sas(text).unwrap();
        let plan = Plan::from_steps(vec![vec![0, 1]]);
        assert!(matches!(validate_plan(&t, &plan, Semantics::Forall), Err(ExecError::StepConflict { step: 1, .. })));
        assert!(validate_plan(&t, &Plan::from_steps(vec![vec![0]]), Semantics::Forall).is_ok());
    }

    /// `power_on`, then `flip` which lights the lamp only with power on;
    /// `light` needs power.
    const LAMP: &str = "begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n2\n\
begin_variable\npower\n-1\n2\noff\non\nend_variable\nbegin_variable\nlight\n-1\n2\noff\non\nend_variable\n0\n\
begin_state\n0\n0\nend_state\nbegin_goal\n1\n1 1\nend_goal\n3\n\
begin_operator\npower_on\n0\n1\n0 0 0 1\n1\nend_operator\n\
begin_operator\nflip\n0\n1\n1 0 1 1 -1 1\n1\nend_operator\n\
begin_operator\nlight\n1\n0 1\n1\n0 1 -1 1\n1\nend_operator\n0\n";

    #[test]
    fn forall_reads_conditions_before_the_step() {
        let t = parse_sas(LAMP).unwrap();
        let together = Plan::from_steps(vec![vec![0, 1]]);
        assert!(matches!(validate_plan(&t, &together, Semantics::Forall), Err(ExecError::StepConflict { .. })));
        assert!(validate_plan(&t, &Plan::sequential(vec![0, 1]), Semantics::Forall).is_ok());
    }

    #[test]
    fn forall_reads_preconditions_before_the_step() {
        let t = parse_sas(LAMP).unwrap();
        let together = Plan::from_steps(vec![vec![0, 2]]);
        assert!(matches!(validate_plan(&t, &together, Semantics::Forall), Err(ExecError::NotApplicable { step: 1, .. })));
        assert!(validate_plan(&t, &Plan::sequential(vec![0, 2]), Semantics::Seq).is_ok());
    }

    #[test]
    fn seq_rejects_parallel_steps() {
        let t = neg_axioms();
        let plan = Plan::from_steps(vec![vec![0, 1]]);
        assert_eq!(validate_plan(&t, &plan, Semantics::Seq), Err(ExecError::NotSequential { step: 1, count: 2 }));
        assert!(validate_plan(&t, &Plan::sequential(vec![0, 1]), Semantics::Seq).is_ok());
    }

    #[test]
    fn negative_derived_precondition() {
        let t = neg_axioms();
        let ex = Executor::new(&t);
        let s0 = ex.initial_state();
        // a holds initially since b is false
        assert_eq!(&s0.values()[2..], &[1, 0, 0]);
        let finish = &t.operators[1];
        assert!(!ex.applicable(&s0, finish));
        let s1 = ex.apply(&s0, &t.operators[0], 1).unwrap();
        assert_eq!(&s1.values()[2..], &[0, 1, 1]);
        assert!(ex.applicable(&s1, finish));
    }

    #[test]
    fn corridor_reachability() {
        // player at cell 0 of a 3-cell corridor, all cells clear
        let text = "begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n4\n\
begin_variable\nplayer\n-1\n3\nc0\nc1\nc2\nend_variable\n\
begin_variable\nr0\n0\n2\nno\nyes\nend_variable\n\
begin_variable\nr1\n0\n2\nno\nyes\nend_variable\n\
begin_variable\nr2\n0\n2\nno\nyes\nend_variable\n\
0\nbegin_state\n0\n0\n0\n0\nend_state\nbegin_goal\n1\n3 1\nend_goal\n0\n5\n\
begin_rule\n1\n0 0\n1 0 1\nend_rule\nbegin_rule\n1\n0 1\n2 0 1\nend_rule\nbegin_rule\n1\n0 2\n3 0 1\nend_rule\n\
begin_rule\n1\n1 1\n2 0 1\nend_rule\nbegin_rule\n1\n2 1\n3 0 1\nend_rule\n";
        let t = parse_sas(text).unwrap();
        let s = evaluate_axioms(&t, &t.init);
        assert_eq!(s.values(), &[0, 1, 1, 1]);
    }
}
