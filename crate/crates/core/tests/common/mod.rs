#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fs;
use std::path::PathBuf;

use axplan::exec::{Executor, ExtendedState, Plan, Semantics};
use axplan::logic::{AtomSet, NormalLogicProgram, Rule};
use axplan::sas::{parse_sas, SasTask};
use rand::Rng;

pub const SUITE: &[&str] = &[
    "toy1",
    "trivial",
    "soko4_axioms",
    "soko4_moves",
    "corridor6_axioms",
    "corridor6_moves",
    "lamp_conditional",
    "derived_goal",
    "neg_axioms",
    "logistics",
    "unsolvable",
    "gripper",
    "switches",
];

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn load(name: &str) -> SasTask {
    let text = fs::read_to_string(data(&format!("{name}.sas"))).unwrap();
    parse_sas(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every valid plan with exactly `k` steps, by trying all step sequences.
/// `None` when there are more than `cap` sequences.
pub fn brute_force_plans(task: &SasTask, k: usize, semantics: Semantics, cap: u64) -> Option<BTreeSet<Vec<Vec<usize>>>> {
    let n = task.operators.len();
    let steps: Vec<Vec<usize>> = match semantics {
        Semantics::Seq => (0..n).map(|o| vec![o]).collect(),
        Semantics::Forall => {
            if n >= 20 {
                return None;
            }
            (1u32..1 << n).map(|m| (0..n).filter(|&o| m >> o & 1 == 1).collect()).collect()
        }
    };
    if steps.is_empty() && k > 0 {
        return Some(BTreeSet::new());
    }
    if (steps.len() as u64).checked_pow(k as u32)? > cap {
        return None;
    }
    let ex = Executor::new(task);
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; k];
    loop {
        let plan = Plan::from_steps(idx.iter().map(|&i| steps[i].clone()).collect());
        if ex.validate(&plan, semantics).is_ok() {
            out.insert(plan.steps().to_vec());
        }
        let mut i = 0;
        loop {
            if i == k {
                return Some(out);
            }
            idx[i] += 1;
            if idx[i] < steps.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Fewest parallel steps to the goal, by breadth-first search over sets of
/// pairwise non-conflicting applicable operators.
pub fn forall_makespan(task: &SasTask, cap: usize) -> Option<usize> {
    let ex = Executor::new(task);
    let n = task.operators.len();
    assert!(n < 16, "subset search on {n} operators");
    let start = ex.initial_state();
    let mut depth: HashMap<ExtendedState, usize> = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        let d = depth[&s];
        if ex.goal_holds(&s) {
            return Some(d);
        }
        if d == cap {
            continue;
        }
        for mask in 1u32..1 << n {
            let ops: Vec<usize> = (0..n).filter(|&o| mask >> o & 1 == 1).collect();
            if ex.step_conflict(&ops).is_some() || !ops.iter().all(|&o| ex.applicable(&s, &task.operators[o])) {
                continue;
            }
            let mut next = s.clone();
            let mut ok = true;
            for &o in &ops {
                match ex.apply(&next, &task.operators[o], d + 1) {
                    Ok(t) => next = t,
                    Err(_) => ok = false,
                }
            }
            if ok && !depth.contains_key(&next) {
                depth.insert(next.clone(), d + 1);
                queue.push_back(next);
            }
        }
    }
    None
}

/// A random program over at most `max_atoms` atoms.
pub fn random_program(rng: &mut impl Rng, max_atoms: usize) -> NormalLogicProgram {
    let n = rng.gen_range(1..=max_atoms);
    let mut p = NormalLogicProgram::new();
    for i in 0..n {
        p.atom(&format!("p{i}"));
    }
    for _ in 0..rng.gen_range(0..=2 * n) {
        let head = rng.gen_range(0..n);
        let pos: Vec<usize> = (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(0..n)).collect();
        let neg: Vec<usize> =
            (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..n)).filter(|a| !pos.contains(a)).collect();
        p.add_rule(Rule::new(head, pos, neg)).unwrap();
    }
    p
}

/// Answer-set check straight from the definition: `m` must equal the least
/// model of the reduct, computed by naive iteration.
pub fn naive_answer_set(p: &NormalLogicProgram, m: &AtomSet) -> bool {
    let reduct: Vec<&Rule> = p.rules().iter().filter(|r| r.neg_body.iter().all(|c| !m.contains(c))).collect();
    let mut least = AtomSet::new();
    loop {
        let before = least.len();
        for r in &reduct {
            if r.pos_body.iter().all(|b| least.contains(b)) {
                least.insert(r.head);
            }
        }
        if least.len() == before {
            return &least == m;
        }
    }
}

pub fn subsets(n: usize) -> impl Iterator<Item = AtomSet> {
    (0u32..1 << n).map(move |mask| (0..n).filter(|&a| mask >> a & 1 == 1).collect())
}
