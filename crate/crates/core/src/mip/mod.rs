//! Depth-first branch and bound with interval propagation, for models small
//! enough to search exhaustively.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use crate::ip::{translate_axioms, AtomTerm};
use crate::logic::{dependency_graph, AtomSet, LogicError, NormalLogicProgram};
use crate::milp::{MilpModel, Sense, VarType};

/// Largest program `solve_stable_models` accepts.
pub const STABLE_MODEL_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BranchOrder {
    /// Declaration order.
    #[default]
    Index,
    /// Variables in more constraints first.
    MostConstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
    pub branch_order: BranchOrder,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { node_limit: 5_000_000, time_limit: None, branch_order: BranchOrder::Index }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Feasible,
    Infeasible,
    Limit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub assignment: Option<Vec<i64>>,
    pub nodes: u64,
    pub propagations: u64,
}

/// Bound propagation hit an empty domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conflict {
    pub constraint: usize,
}

fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -div_floor(-a, b)
}

/// Variable to constraint incidence.
fn occurrences(model: &MilpModel) -> Vec<Vec<usize>> {
    let mut occ = vec![Vec::new(); model.num_vars()];
    for (i, c) in model.constraints.iter().enumerate() {
        for &(_, v) in &c.terms {
            occ[v].push(i);
        }
    }
    occ
}

struct Propagator<'m> {
    model: &'m MilpModel,
    occ: Vec<Vec<usize>>,
    queued: Vec<bool>,
    queue: VecDeque<usize>,
    tightenings: u64,
}

impl<'m> Propagator<'m> {
    fn new(model: &'m MilpModel) -> Self {
        let n = model.constraints.len();
        Propagator { model, occ: occurrences(model), queued: vec![false; n], queue: VecDeque::new(), tightenings: 0 }
    }

    fn push(&mut self, c: usize) {
        if !self.queued[c] {
            self.queued[c] = true;
            self.queue.push_back(c);
        }
    }

    /// Tightens `bounds` to a fixpoint starting from the constraints on
    /// `changed`, or from every constraint when `changed` is `None`.
    fn run(&mut self, bounds: &mut [(i64, i64)], changed: Option<usize>) -> Result<(), Conflict> {
        match changed {
            None => (0..self.model.constraints.len()).for_each(|c| self.push(c)),
            Some(v) => (0..self.occ[v].len()).for_each(|k| self.push(self.occ[v][k])),
        }
        while let Some(ci) = self.queue.pop_front() {
            self.queued[ci] = false;
            if let Err(e) = self.tighten(ci, bounds) {
                for c in self.queue.drain(..) {
                    self.queued[c] = false;
                }
                return Err(e);
            }
        }
        Ok(())
    }

    fn tighten(&mut self, ci: usize, bounds: &mut [(i64, i64)]) -> Result<(), Conflict> {
        let c = &self.model.constraints[ci];
        let term_min = |a: i64, (lo, hi): (i64, i64)| if a > 0 { a * lo } else { a * hi };
        let term_max = |a: i64, (lo, hi): (i64, i64)| if a > 0 { a * hi } else { a * lo };
        let min_act: i64 = c.terms.iter().map(|&(a, v)| term_min(a, bounds[v])).sum();
        let max_act: i64 = c.terms.iter().map(|&(a, v)| term_max(a, bounds[v])).sum();
        let upper = matches!(c.sense, Sense::Le | Sense::Eq);
        let lower = matches!(c.sense, Sense::Ge | Sense::Eq);
        if (upper && min_act > c.rhs) || (lower && max_act < c.rhs) {
            return Err(Conflict { constraint: ci });
        }
        for &(a, v) in &c.terms {
            let (mut lo, mut hi) = bounds[v];
            if upper {
                let slack = c.rhs - (min_act - term_min(a, bounds[v]));
                if a > 0 {
                    hi = hi.min(div_floor(slack, a));
                } else {
                    lo = lo.max(div_ceil(slack, a));
                }
            }
            if lower {
                let slack = c.rhs - (max_act - term_max(a, bounds[v]));
                if a > 0 {
                    lo = lo.max(div_ceil(slack, a));
                } else {
                    hi = hi.min(div_floor(slack, a));
                }
            }
            if lo > hi {
                return Err(Conflict { constraint: ci });
            }
            if (lo, hi) != bounds[v] {
                bounds[v] = (lo, hi);
                self.tightenings += 1;
                for k in 0..self.occ[v].len() {
                    let other = self.occ[v][k];
                    if other != ci {
                        self.push(other);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Single-constraint interval reasoning repeated to a fixpoint. Returns the
/// number of bound changes. Never removes an integral solution.
pub fn propagate(model: &MilpModel, bounds: &mut [(i64, i64)]) -> Result<u64, Conflict> {
    let mut p = Propagator::new(model);
    p.run(bounds, None)?;
    Ok(p.tightenings)
}

struct Search<'m> {
    model: &'m MilpModel,
    config: SolverConfig,
    order: Vec<usize>,
    prop: Propagator<'m>,
    nodes: u64,
    started: Instant,
}

impl Search<'_> {
    fn out_of_budget(&self) -> bool {
        if self.nodes >= self.config.node_limit {
            return true;
        }
        match self.config.time_limit {
            Some(limit) if self.nodes.is_multiple_of(256) => self.started.elapsed() >= limit,
            _ => false,
        }
    }

    fn objective_bound(&self, bounds: &[(i64, i64)]) -> i64 {
        self.model
            .objective
            .iter()
            .flatten()
            .map(|&(a, v)| if a > 0 { a * bounds[v].0 } else { a * bounds[v].1 })
            .sum()
    }

    fn run(&mut self) -> SolveResult {
        let mut root: Vec<(i64, i64)> = self.model.variables.iter().map(|v| (v.lower, v.upper)).collect();
        let mut stack = Vec::new();
        if self.prop.run(&mut root, None).is_ok() {
            stack.push(root);
        }
        let mut best: Option<(i64, Vec<i64>)> = None;
        let mut limited = false;
        while let Some(bounds) = stack.pop() {
            if self.out_of_budget() {
                limited = true;
                break;
            }
            self.nodes += 1;
            if let Some((value, _)) = &best {
                if self.objective_bound(&bounds) >= *value {
                    continue;
                }
            }
            let Some(&v) = self.order.iter().find(|&&v| bounds[v].0 < bounds[v].1) else {
                let values: Vec<i64> = bounds.iter().map(|b| b.0).collect();
                if self.model.check(&values).is_err() {
                    continue;
                }
                if self.model.objective.is_none() {
                    return self.result(SolveStatus::Feasible, Some(values));
                }
                best = Some((self.model.objective_value(&values), values));
                continue;
            };
            let (lo, hi) = bounds[v];
            let var = &self.model.variables[v];
            let mut children = if var.kind == VarType::Binary || lo + 1 == hi {
                vec![(lo, lo), (hi, hi)]
            } else {
                vec![(lo, lo), (lo + 1, hi)]
            };
            if var.prefer_high {
                children.reverse();
            }
            // pushed in reverse so the preferred child is explored first
            for range in children.into_iter().rev() {
                let mut child = bounds.clone();
                child[v] = range;
                if self.prop.run(&mut child, Some(v)).is_ok() {
                    stack.push(child);
                }
            }
        }
        match best {
            Some((_, values)) => self.result(SolveStatus::Feasible, Some(values)),
            None if limited => self.result(SolveStatus::Limit, None),
            None => self.result(SolveStatus::Infeasible, None),
        }
    }

    fn result(&self, status: SolveStatus, assignment: Option<Vec<i64>>) -> SolveResult {
        SolveResult { status, assignment, nodes: self.nodes, propagations: self.prop.tightenings }
    }
}

/// Searches for a feasible assignment, or a cheapest one when the model has
/// an objective. Binaries are branched on before integers. Any assignment
/// returned has passed [`MilpModel::check`].
pub fn solve(model: &MilpModel, config: &SolverConfig) -> SolveResult {
    let prop = Propagator::new(model);
    let mut order: Vec<usize> = (0..model.num_vars()).collect();
    let degree: Vec<usize> = prop.occ.iter().map(Vec::len).collect();
    let integer = |v: usize| model.variables[v].kind == VarType::Integer;
    match config.branch_order {
        BranchOrder::Index => order.sort_by_key(|&v| integer(v)),
        BranchOrder::MostConstrained => order.sort_by_key(|&v| (integer(v), std::cmp::Reverse(degree[v]))),
    }
    let mut search = Search { model, config: *config, order, prop, nodes: 0, started: Instant::now() };
    let result = search.run();
    if let Some(values) = &result.assignment {
        assert_eq!(model.check(values), Ok(()), "solver returned an infeasible assignment");
    }
    result
}

/// Every distinct projection of the feasible assignments onto the binary
/// variables `vars`, found by re-solving with a no-good after each one.
/// Returns `None` if a solve hits a limit.
pub fn enumerate_projections(model: &MilpModel, vars: &[usize], config: &SolverConfig) -> Option<Vec<Vec<i64>>> {
    let mut m = model.clone();
    m.objective = None;
    let mut found = Vec::new();
    loop {
        let r = solve(&m, config);
        match r.status {
            SolveStatus::Infeasible => break,
            SolveStatus::Limit => return None,
            SolveStatus::Feasible => {}
        }
        let values = r.assignment.expect("feasible");
        let proj: Vec<i64> = vars.iter().map(|&v| values[v]).collect();
        let ones = proj.iter().filter(|&&x| x == 1).count() as i64;
        let cut = vars.iter().zip(&proj).map(|(&v, &x)| (if x == 1 { 1 } else { -1 }, v)).collect();
        m.constrain("block", cut, Sense::Le, ones - 1);
        found.push(proj);
    }
    found.sort();
    Some(found)
}

/// Answer sets of `p` through the level-ranking translation, every atom
/// treated as derived.
pub fn solve_stable_models(p: &NormalLogicProgram) -> Result<Vec<AtomSet>, LogicError> {
    let n = p.num_atoms();
    if n > STABLE_MODEL_CAP {
        return Err(LogicError::TooLarge { atoms: n, cap: STABLE_MODEL_CAP });
    }
    let g = dependency_graph(p);
    let atoms: Vec<AtomTerm> = (0..n).map(AtomTerm::Derived).collect();
    let mut m = MilpModel::new(0);
    translate_axioms(&mut m, p, &g, &atoms, 0);
    let sats: Vec<usize> = (0..n).map(|a| m.var(&format!("sat_f{a}_t0")).expect("sat per atom")).collect();
    let config = SolverConfig { node_limit: u64::MAX, ..SolverConfig::default() };
    let projections = enumerate_projections(&m, &sats, &config).expect("no limits");
    let mut sets: Vec<AtomSet> =
        projections.iter().map(|proj| (0..n).filter(|&a| proj[a] == 1).collect()).collect();
    sets.sort();
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::fixtures::{p1, p2, set};

    #[test]
    fn fixing_one_side_of_a_packing_row() {
        let mut m = MilpModel::new(0);
        let x = m.binary("x");
        let y = m.binary("y");
        m.constrain("c", vec![(1, x), (1, y)], Sense::Le, 1);
        let mut b = vec![(1, 1), (0, 1)];
        propagate(&m, &mut b).unwrap();
        assert_eq!(b[y], (0, 0));
        assert_eq!(b[x], (1, 1));
    }

    #[test]
    fn ranking_conflict() {
        let mut m = MilpModel::new(0);
        let zc = m.integer("z_c", 0, 1);
        let zb = m.integer("z_b", 0, 1);
        let gt = m.binary("gt");
        m.constrain("axrank", vec![(1, zc), (-1, zb), (-2, gt)], Sense::Ge, -1);
        let mut b = vec![(0, 1), (1, 1), (1, 1)];
        assert!(propagate(&m, &mut b).is_err());
    }

    #[test]
    fn empty_model_keeps_bounds() {
        let mut m = MilpModel::new(0);
        m.integer("z", -3, 4);
        let mut b = vec![(-3, 4)];
        assert_eq!(propagate(&m, &mut b), Ok(0));
        assert_eq!(b, vec![(-3, 4)]);
    }

    #[test]
    fn contradictory_unit_rows() {
        let mut m = MilpModel::new(0);
        let x = m.binary("x");
        m.constrain("a", vec![(1, x)], Sense::Ge, 1);
        m.constrain("b", vec![(1, x)], Sense::Le, 0);
        let r = solve(&m, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.nodes <= 2);
    }

    #[test]
    fn integer_branching_and_objective() {
        let mut m = MilpModel::new(0);
        let z = m.integer("z", 0, 5);
        let x = m.binary("x");
        m.constrain("c", vec![(1, z), (3, x)], Sense::Ge, 4);
        m.objective = Some(vec![(2, z), (3, x)]);
        let r = solve(&m, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::Feasible);
        // z=1, x=1 costs 5; z=4, x=0 costs 8
        assert_eq!(r.assignment.unwrap(), vec![1, 1]);
    }

    #[test]
    fn division_rounding() {
        assert_eq!(div_floor(-3, 2), -2);
        assert_eq!(div_ceil(-3, 2), -1);
        assert_eq!(div_floor(3, -2), -2);
        assert_eq!(div_ceil(3, 2), 2);
        assert_eq!(div_floor(4, 2), 2);
    }

    #[test]
    fn node_limit_is_reported() {
        let mut m = MilpModel::new(0);
        let vars: Vec<usize> = (0..12).map(|i| m.binary(&format!("x{i}"))).collect();
        // parity-style constraint that propagation cannot settle early
        m.constrain("c", vars.iter().map(|&v| (2, v)).collect(), Sense::Eq, 7);
        let r = solve(&m, &SolverConfig { node_limit: 10, ..SolverConfig::default() });
        assert_eq!(r.status, SolveStatus::Limit);
    }

    #[test]
    fn toy1_models() {
        use crate::exec::{Plan, Semantics};
        use crate::ip::{build_state_change_model, decode_assignment, IpOptions};
        let t = crate::sas::fixtures::toy1();
        let ip = build_state_change_model(&t, 1, Semantics::Seq, IpOptions::default()).unwrap();
        let r = solve(&ip.milp, &SolverConfig::default());
        assert_eq!(r.status, SolveStatus::Feasible);
        assert_eq!(decode_assignment(&ip, &r.assignment.unwrap()).unwrap(), Plan::sequential(vec![0]));
        let ip0 = build_state_change_model(&t, 0, Semantics::Seq, IpOptions::default()).unwrap();
        assert_eq!(solve(&ip0.milp, &SolverConfig::default()).status, SolveStatus::Infeasible);
    }

    #[test]
    fn stable_models_of_worked_programs() {
        let p = p1();
        assert_eq!(solve_stable_models(&p).unwrap(), vec![set(&p, &["a", "c"]), set(&p, &["b"])]);
        let p = p2();
        assert_eq!(solve_stable_models(&p).unwrap(), vec![set(&p, &["a"])]);
        assert_eq!(solve_stable_models(&NormalLogicProgram::new()).unwrap(), vec![AtomSet::new()]);
    }
}
