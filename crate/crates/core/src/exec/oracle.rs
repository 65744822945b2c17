use std::collections::{HashMap, VecDeque};

use super::{ExecError, Executor, ExtendedState, Plan};
use crate::sas::SasTask;

/// Hard limit on the number of distinct states a search may visit.
pub const STATE_CAP: usize = 1_000_000;

/// Shortest sequential plan with at most `max_makespan` steps.
///
/// Breadth-first over extended states; operators are expanded in id order,
/// so the returned plan is the same on every run. Operators whose effects
/// conflict in a state are treated as inapplicable there.
pub fn oracle_plan(task: &SasTask, max_makespan: usize) -> Result<Option<Plan>, ExecError> {
    let ex = Executor::new(task);
    let init = ex.initial_state();
    if ex.goal_holds(&init) {
        return Ok(Some(Plan::empty()));
    }
    // state -> (parent index, operator)
    let mut states: Vec<ExtendedState> = vec![init.clone()];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut index: HashMap<ExtendedState, usize> = HashMap::from([(init, 0)]);
    let mut depth = vec![0usize];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if depth[i] >= max_makespan {
            continue;
        }
        for op in &task.operators {
            let Ok(next) = ex.apply(&states[i], op, depth[i] + 1) else { continue };
            if index.contains_key(&next) {
                continue;
            }
            if states.len() >= STATE_CAP {
                return Err(ExecError::StateSpaceTooLarge(STATE_CAP));
            }
            let j = states.len();
            let done = ex.goal_holds(&next);
            index.insert(next.clone(), j);
            states.push(next);
            parent.push(Some((i, op.id)));
            depth.push(depth[i] + 1);
            if done {
                let mut ops = Vec::new();
                let mut k = j;
                while let Some((p, o)) = parent[k] {
                    ops.push(o);
                    k = p;
                }
                ops.reverse();
                return Ok(Some(Plan::sequential(ops)));
            }
            queue.push_back(j);
        }
    }
    Ok(None)
}

/// Every extended state reachable from the initial state, in BFS order.
pub fn reachable_states(task: &SasTask, limit: usize) -> Result<Vec<ExtendedState>, ExecError> {
    let ex = Executor::new(task);
    let init = ex.initial_state();
    let mut states = vec![init.clone()];
    let mut seen: HashMap<ExtendedState, ()> = HashMap::from([(init, ())]);
    let mut i = 0;
    while i < states.len() {
        for op in &task.operators {
            let Ok(next) = ex.apply(&states[i], op, 1) else { continue };
            if seen.contains_key(&next) {
                continue;
            }
            if states.len() >= limit {
                return Err(ExecError::StateSpaceTooLarge(limit));
            }
            seen.insert(next.clone(), ());
            states.push(next);
        }
        i += 1;
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::neg_axioms;
    use super::super::{validate_plan, Semantics};
    use super::*;
    use crate::sas::fixtures::toy1;
    use crate::sas::Assignment;

    #[test]
    fn toy1_oracle() {
        let t = toy1();
        let plan = oracle_plan(&t, 3).unwrap().unwrap();
        assert_eq!(plan, Plan::sequential(vec![0]));
        assert!(oracle_plan(&t, 0).unwrap().is_none());
    }

    #[test]
    fn satisfied_goal_needs_no_steps() {
        let mut t = toy1();
        t.goal = vec![Assignment::new(0, 0)];
        assert_eq!(oracle_plan(&t, 0).unwrap(), Some(Plan::empty()));
    }

    #[test]
    fn oracle_plans_validate() {
        let t = neg_axioms();
        let plan = oracle_plan(&t, 5).unwrap().unwrap();
        assert_eq!(plan.steps(), &[vec![0], vec![1]]);
        assert_eq!(validate_plan(&t, &plan, Semantics::Seq).unwrap().makespan, 2);
    }

    #[test]
    fn reachable_state_count() {
        assert_eq!(reachable_states(&toy1(), 10).unwrap().len(), 2);
        assert_eq!(reachable_states(&neg_axioms(), 10).unwrap().len(), 3);
        assert!(matches!(reachable_states(&neg_axioms(), 2), Err(ExecError::StateSpaceTooLarge(2))));
    }
}
