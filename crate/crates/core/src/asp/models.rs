use std::collections::{BTreeSet, HashMap};

use super::{AspError, AspProgram, GroundAtom, Statement};
use crate::exec::{Executor, Plan, Semantics};
use crate::logic::{is_answer_set, AtomSet, NormalLogicProgram, Rule, StratifiedProgram};
use crate::sas::{Assignment, SasTask};

/// A program rewritten into plain normal rules.
///
/// `apply(o,t)` choices become `apply :- not napply.` and
/// `napply :- not apply.` with a constraint for the lower bound and
/// pairwise constraints for an upper bound of one. Every constraint
/// `:- B.` becomes `bot :- B, not bot.`
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub program: NormalLogicProgram,
    /// Atom ids of `program` in the order of [`AspProgram::atoms`], followed
    /// by the `napply` atoms and `bot`.
    pub atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, usize>,
}

impl AspProgram {
    pub fn to_normal_program(&self) -> NormalForm {
        let mut atoms = self.atoms.clone();
        let mut program = NormalLogicProgram::new();
        for a in &atoms {
            program.atom(&a.to_string());
        }
        let mut extra = |a: GroundAtom, program: &mut NormalLogicProgram| {
            atoms.push(a);
            program.atom(&a.to_string())
        };
        let bot = extra(GroundAtom::Bot, &mut program);
        let add = |p: &mut NormalLogicProgram, head, pos: Vec<usize>, mut neg: Vec<usize>, constraint: bool| {
            if constraint {
                neg.push(bot);
            }
            p.add_rule(Rule::new(head, pos, neg)).expect("atoms are declared");
        };
        for s in &self.statements {
            match s {
                Statement::Fact(a) => add(&mut program, *a, vec![], vec![], false),
                Statement::Rule { head, pos, neg } => add(&mut program, *head, pos.clone(), neg.clone(), false),
                Statement::Constraint { pos, neg } => add(&mut program, bot, pos.clone(), neg.clone(), true),
                Statement::Choice { atoms: choice, lower, upper } => {
                    for &a in choice {
                        let GroundAtom::Apply { op, t } = self.atoms[a] else { unreachable!("choices range over apply") };
                        let na = extra(GroundAtom::NotApply { op, t }, &mut program);
                        add(&mut program, a, vec![], vec![na], false);
                        add(&mut program, na, vec![], vec![a], false);
                    }
                    if *lower > 0 {
                        add(&mut program, bot, vec![], choice.clone(), true);
                    }
                    if *upper == Some(1) {
                        for (i, &a) in choice.iter().enumerate() {
                            for &b in &choice[i + 1..] {
                                add(&mut program, bot, vec![a, b], vec![], true);
                            }
                        }
                    }
                }
            }
        }
        let index = atoms.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        NormalForm { program, atoms, index }
    }

    /// The choice atoms grouped by step.
    fn choices(&self) -> Vec<Vec<usize>> {
        self.statements
            .iter()
            .filter_map(|s| match s {
                Statement::Choice { atoms, .. } => Some(atoms.clone()),
                _ => None,
            })
            .collect()
    }
}

/// Every answer set of `program`, as sets over [`AspProgram::atoms`].
///
/// The `apply` atoms are guessed step by step within the choice bounds; the
/// rest of the program is stratified, so each guess fixes one candidate.
/// Candidates that pass the integrity constraints are checked against the
/// normal form. `cap` bounds the number
/// of guesses.
pub fn enumerate_models(program: &AspProgram, cap: u64) -> Result<Vec<BTreeSet<GroundAtom>>, AspError> {
    let choices = program.choices();
    let per_step: Vec<Vec<Vec<usize>>> = choices
        .iter()
        .map(|c| match program.semantics {
            Semantics::Seq => c.iter().map(|&a| vec![a]).collect(),
            Semantics::Forall => nonempty_subsets(c),
        })
        .collect();
    let total = per_step.iter().try_fold(1u64, |acc, s| acc.checked_mul(s.len() as u64));
    if total == Some(0) {
        return Ok(Vec::new());
    }
    if total.is_none_or(|n| n > cap) {
        return Err(AspError::TooManyGuesses(cap));
    }

    let mut middle = NormalLogicProgram::new();
    for a in &program.atoms {
        middle.atom(&a.to_string());
    }
    for s in &program.statements {
        match s {
            Statement::Fact(a) => middle.add_rule(Rule::fact(*a)),
            Statement::Rule { head, pos, neg } => middle.add_rule(Rule::new(*head, pos.clone(), neg.clone())),
            _ => continue,
        }
        .expect("atoms are declared");
    }
    let strat = StratifiedProgram::new(&middle).map_err(|e| AspError::MalformedModel(e.to_string()))?;
    let normal = program.to_normal_program();

    let constraints: Vec<(&[usize], &[usize])> = program
        .statements
        .iter()
        .filter_map(|s| match s {
            Statement::Constraint { pos, neg } => Some((pos.as_slice(), neg.as_slice())),
            _ => None,
        })
        .collect();

    let mut out = Vec::new();
    let mut pick = vec![0usize; per_step.len()];
    loop {
        let guess: Vec<usize> = pick.iter().zip(&per_step).flat_map(|(&i, s)| s[i].iter().copied()).collect();
        let bits = strat.evaluate(&guess);
        let violated = constraints.iter().any(|(pos, neg)| pos.iter().all(|&a| bits[a]) && neg.iter().all(|&a| !bits[a]));
        if !violated {
            let model: BTreeSet<GroundAtom> =
                bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| program.atoms[i]).collect();
            if is_model_in(&normal, &model) {
                out.push(model);
            }
        }
        // odometer over the per-step guesses
        let mut i = 0;
        loop {
            if i == pick.len() {
                return Ok(out);
            }
            pick[i] += 1;
            if pick[i] < per_step[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn nonempty_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    assert!(items.len() < 32, "too many operators for subset enumeration");
    (1u32..1 << items.len())
        .map(|mask| items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a).collect())
        .collect()
}

/// Whether `model` is an answer set of `program`. The auxiliary atoms of
/// the normal form are completed from the `apply` atoms.
pub fn is_model_of(program: &AspProgram, model: &BTreeSet<GroundAtom>) -> bool {
    is_model_in(&program.to_normal_program(), model)
}

fn is_model_in(normal: &NormalForm, model: &BTreeSet<GroundAtom>) -> bool {
    let mut set = AtomSet::new();
    for a in model {
        match normal.index.get(a) {
            Some(&i) => set.insert(i),
            None => return false,
        };
    }
    for (i, a) in normal.atoms.iter().enumerate() {
        if let GroundAtom::NotApply { op, t } = *a {
            if !model.contains(&GroundAtom::Apply { op, t }) {
                set.insert(i);
            }
        }
    }
    is_answer_set(&normal.program, &set)
}

/// The plan executed by an answer set.
pub fn decode_plan(program: &AspProgram, model: &BTreeSet<GroundAtom>) -> Result<Plan, AspError> {
    let mut steps = vec![Vec::new(); program.horizon];
    for a in model {
        if let GroundAtom::Apply { op, t } = *a {
            if t == 0 || t > program.horizon {
                return Err(AspError::MalformedModel(format!("{a} outside steps 1..{}", program.horizon)));
            }
            steps[t - 1].push(op);
        }
    }
    let most = if program.semantics == Semantics::Seq { 1 } else { usize::MAX };
    if let Some(t) = steps.iter().position(|s| s.is_empty() || s.len() > most) {
        return Err(AspError::MalformedModel(format!("step {} has {} operators", t + 1, steps[t].len())));
    }
    Ok(Plan::from_steps(steps))
}

/// The answer set a valid plan of makespan `program.horizon` induces,
/// built by executing the plan.
pub fn plan_to_model(task: &SasTask, program: &AspProgram, plan: &Plan) -> Result<BTreeSet<GroundAtom>, AspError> {
    use GroundAtom::*;
    let ex = Executor::new(task);
    ex.validate(plan, program.semantics)?;
    if plan.makespan() != program.horizon {
        return Err(AspError::WrongMakespan { makespan: plan.makespan(), horizon: program.horizon });
    }
    let states = ex.trace(plan)?;
    let mut model: BTreeSet<GroundAtom> = program
        .statements
        .iter()
        .filter_map(|s| match s {
            Statement::Fact(a) => Some(program.atoms[*a]),
            _ => None,
        })
        .collect();
    for (t, s) in states.iter().enumerate() {
        for v in &task.variables {
            model.insert(Holds { fluent: Assignment::new(v.id, s.value(v.id)), t });
        }
    }
    for (i, step) in plan.steps().iter().enumerate() {
        let t = i + 1;
        let cond_state = if program.options.conditions_at_step { &states[t] } else { &states[t - 1] };
        for &op in step {
            model.insert(Apply { op, t });
            for (e, eff) in task.operators[op].effects.iter().enumerate() {
                if eff.is_conditional() {
                    if !cond_state.holds_all(&eff.condition) {
                        continue;
                    }
                    model.insert(Fired { op, eff: e, t });
                }
                model.insert(Changed { var: eff.affected.var, t });
            }
        }
    }
    Ok(model)
}
