//! State-change integer programs for k-step planning, with axioms compiled
//! through level rankings.

mod axioms;
mod decode;

use thiserror::Error;

use crate::exec::{ExecError, Semantics};
use crate::logic::dependency_graph;
use crate::milp::{MilpModel, Sense, VarType};
use crate::sas::{Assignment, AxiomAtom, AxiomProgram, SasTask};

pub use axioms::{translate_axioms, AtomTerm};
pub use decode::{axiom_layer_model, decode_assignment, plan_to_assignment, AxiomLayer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IpError {
    #[error("the integer program does not support conditional effects")]
    ConditionalEffectsUnsupported,
    #[error("parallel steps are not supported for tasks with axioms")]
    ForallWithAxioms,
    #[error("malformed assignment: {0}")]
    MalformedAssignment(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(#[from] ExecError),
    #[error("plan has {makespan} steps but the model only {horizon}")]
    HorizonExceeded { makespan: usize, horizon: usize },
}

/// Operators that require, add or delete each primary fluent.
///
/// Fluent ids number the primary assignments by variable, then value;
/// secondary variables follow with one id each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentIndex {
    pub fluents: Vec<Assignment>,
    first: Vec<Option<usize>>,
    secondary: Vec<Option<usize>>,
    pub pre: Vec<Vec<usize>>,
    pub add: Vec<Vec<usize>>,
    pub del: Vec<Vec<usize>>,
}

impl FluentIndex {
    pub fn id(&self, a: Assignment) -> usize {
        self.first[a.var].expect("primary variable") + a.value
    }

    pub fn secondary_id(&self, var: usize) -> usize {
        self.secondary[var].expect("secondary variable")
    }

    pub fn num_primary(&self) -> usize {
        self.fluents.len()
    }
}

/// An operator deletes `v=z` when it assigns `v` a different value and
/// either requires `v=z` or says nothing about `v`.
pub fn build_fluent_index(task: &SasTask) -> Result<FluentIndex, IpError> {
    if task.has_conditional_effects() {
        return Err(IpError::ConditionalEffectsUnsupported);
    }
    let mut fluents = Vec::new();
    let mut first = vec![None; task.variables.len()];
    let mut secondary = vec![None; task.variables.len()];
    for v in task.variables.iter().filter(|v| v.is_primary()) {
        first[v.id] = Some(fluents.len());
        fluents.extend((0..v.domain_size()).map(|x| Assignment::new(v.id, x)));
    }
    for (u, id) in task.secondary_vars().zip(fluents.len()..) {
        secondary[u] = Some(id);
    }
    let n = fluents.len();
    let mut fi = FluentIndex { fluents, first, secondary, pre: vec![vec![]; n], add: vec![vec![]; n], del: vec![vec![]; n] };
    for o in &task.operators {
        for p in o.precondition.iter().filter(|p| task.is_primary(p.var)) {
            let f = fi.id(*p);
            fi.pre[f].push(o.id);
        }
        for e in &o.effects {
            let Assignment { var, value } = e.affected;
            let f = fi.id(e.affected);
            fi.add[f].push(o.id);
            for z in (0..task.variables[var].domain_size()).filter(|&z| z != value) {
                if o.pre_value(var).is_none_or(|p| p == z) {
                    let f = fi.id(Assignment::new(var, z));
                    fi.del[f].push(o.id);
                }
            }
        }
    }
    for set in fi.pre.iter_mut().chain(fi.add.iter_mut()).chain(fi.del.iter_mut()) {
        set.sort_unstable();
        set.dedup();
    }
    Ok(fi)
}

/// A k-step model together with the index needed to read plans back.
#[derive(Debug, Clone)]
pub struct IpModel {
    pub milp: MilpModel,
    pub fluents: FluentIndex,
    pub semantics: Semantics,
    pub horizon: usize,
}

impl IpModel {
    pub fn y(&self, o: usize, t: usize) -> Option<usize> {
        self.milp.var(&y_name(o, t))
    }
}

pub(crate) fn y_name(o: usize, t: usize) -> String {
    format!("y_o{o}_t{t}")
}

pub(crate) fn x_name(kind: &str, f: usize, t: usize) -> String {
    format!("x{kind}_f{f}_t{t}")
}

pub(crate) use axioms::sat_name;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IpOptions {
    /// Minimize the summed cost of executed operators.
    pub cost_objective: bool,
}

/// Atom terms of the axiom program. Primary fluents become constants when
/// `state` is given and read `sat` variables otherwise.
pub(crate) fn layer_terms(ap: &AxiomProgram, fi: &FluentIndex, state: Option<&[usize]>) -> Vec<AtomTerm> {
    ap.atoms
        .iter()
        .map(|a| match *a {
            AxiomAtom::Derived(u) => AtomTerm::Derived(fi.secondary_id(u)),
            AxiomAtom::Fluent(f) => match state {
                Some(s) => AtomTerm::Const(s[f.var] == f.value),
                None => AtomTerm::Input(fi.id(f)),
            },
        })
        .collect()
}

/// The state-change model with horizon `horizon`.
///
/// Beyond the classic families, every primary variable takes exactly one
/// value per step (tag `domain`), and at step 0 all state changes except
/// `xadd` of initial fluents are zero.
pub fn build_state_change_model(
    task: &SasTask,
    horizon: usize,
    semantics: Semantics,
    options: IpOptions,
) -> Result<IpModel, IpError> {
    if semantics == Semantics::Forall && task.has_axioms() {
        return Err(IpError::ForallWithAxioms);
    }
    let fi = build_fluent_index(task)?;
    let mut m = MilpModel::new(horizon);
    let nf = fi.num_primary();

    // declaration order doubles as the solver's branching order
    let mut y = vec![Vec::new()];
    for t in 1..=horizon {
        y.push(task.operators.iter().map(|o| m.add_var(&y_name(o.id, t), VarType::Binary, 0, 1, true)).collect::<Vec<_>>());
    }
    let mut sat = Vec::new();
    let mut xs: Vec<[Vec<usize>; 5]> = Vec::new();
    for t in 0..=horizon {
        sat.push((0..nf).map(|f| m.add_var(&sat_name(f, t), VarType::Binary, 0, 1, true)).collect::<Vec<_>>());
        let mut group: [Vec<usize>; 5] = Default::default();
        for (k, kind) in ["add", "pre", "predel", "del", "m"].iter().enumerate() {
            group[k] = (0..nf).map(|f| m.binary(&x_name(kind, f, t))).collect();
        }
        xs.push(group);
    }
    let secondary_sat: Vec<Vec<(usize, usize)>> = (0..=horizon)
        .map(|t| {
            task.secondary_vars()
                .map(|u| (u, m.add_var(&sat_name(fi.secondary_id(u), t), VarType::Binary, 0, 1, true)))
                .collect()
        })
        .collect();
    let sat_of = |t: usize, u: usize| secondary_sat[t].iter().find(|&&(w, _)| w == u).expect("secondary sat").1;
    const ADD: usize = 0;
    const PRE: usize = 1;
    const PREDEL: usize = 2;
    const DEL: usize = 3;
    const M: usize = 4;

    for f in 0..nf {
        let a = fi.fluents[f];
        let x = &xs[0];
        m.constrain("initial", vec![(1, x[ADD][f])], Sense::Eq, i64::from(task.init[a.var] == a.value));
        for k in [PRE, PREDEL, DEL, M] {
            m.constrain("initial", vec![(1, x[k][f])], Sense::Eq, 0);
        }
    }

    for t in 1..=horizon {
        let x = &xs[t];
        for f in 0..nf {
            let minus = |a: &[usize], b: &[usize]| a.iter().copied().filter(|o| !b.contains(o)).collect::<Vec<_>>();
            let families = [
                ("add", minus(&fi.add[f], &fi.pre[f]), x[ADD][f]),
                ("del", minus(&fi.del[f], &fi.pre[f]), x[DEL][f]),
                ("preadd", minus(&fi.pre[f], &fi.del[f]), x[PRE][f]),
            ];
            for (tag, ops, var) in families {
                let mut sum: Vec<(i64, usize)> = ops.iter().map(|&o| (1, y[t][o])).collect();
                sum.push((-1, var));
                m.constrain(tag, sum, Sense::Ge, 0);
                for &o in &ops {
                    m.constrain(tag, vec![(1, y[t][o]), (-1, var)], Sense::Le, 0);
                }
            }
            let mut predel: Vec<(i64, usize)> =
                fi.pre[f].iter().filter(|o| fi.del[f].contains(o)).map(|&o| (1, y[t][o])).collect();
            predel.push((-1, x[PREDEL][f]));
            m.constrain("predel", predel, Sense::Eq, 0);

            m.constrain("parallel", vec![(1, x[ADD][f]), (1, x[M][f]), (1, x[DEL][f]), (1, x[PREDEL][f])], Sense::Le, 1);
            m.constrain("parallel", vec![(1, x[PRE][f]), (1, x[M][f]), (1, x[DEL][f]), (1, x[PREDEL][f])], Sense::Le, 1);

            let p = &xs[t - 1];
            m.constrain(
                "backward",
                vec![(1, x[PRE][f]), (1, x[M][f]), (1, x[PREDEL][f]), (-1, p[PRE][f]), (-1, p[ADD][f]), (-1, p[M][f])],
                Sense::Le,
                0,
            );
        }
    }

    for t in 0..=horizon {
        let x = &xs[t];
        for f in 0..nf {
            let s = sat[t][f];
            m.constrain("sat", vec![(1, s), (-1, x[ADD][f]), (-1, x[PRE][f]), (-1, x[M][f])], Sense::Le, 0);
            for k in [ADD, PRE, M] {
                m.constrain("sat", vec![(1, s), (-1, x[k][f])], Sense::Ge, 0);
            }
        }
        for v in task.primary_vars() {
            let terms =
                (0..task.variables[v].domain_size()).map(|val| (1, sat[t][fi.id(Assignment::new(v, val))])).collect();
            m.constrain("domain", terms, Sense::Eq, 1);
        }
        for g in &task.mutex_groups {
            m.constrain("mutex", g.fluents.iter().map(|&a| (1, sat[t][fi.id(a)])).collect(), Sense::Le, 1);
        }
    }

    for g in &task.goal {
        if task.is_primary(g.var) {
            m.constrain("goal", vec![(1, sat[horizon][fi.id(*g)])], Sense::Ge, 1);
        } else if g.value == 1 {
            m.constrain("goal", vec![(1, sat_of(horizon, g.var))], Sense::Ge, 1);
        } else {
            m.constrain("goal", vec![(1, sat_of(horizon, g.var))], Sense::Le, 0);
        }
    }

    for (t, yt) in y.iter().enumerate().skip(1) {
        for o in &task.operators {
            for p in o.precondition.iter().filter(|p| !task.is_primary(p.var)) {
                let s = sat_of(t - 1, p.var);
                if p.value == 1 {
                    m.constrain("link", vec![(1, yt[o.id]), (-1, s)], Sense::Le, 0);
                } else {
                    m.constrain("link", vec![(1, yt[o.id]), (1, s)], Sense::Le, 1);
                }
            }
        }
        if semantics == Semantics::Seq {
            m.constrain("seq", yt.iter().map(|&v| (1, v)).collect(), Sense::Le, 1);
        }
    }

    if task.has_axioms() || task.secondary_vars().next().is_some() {
        let ap = task.axiom_program();
        let g = dependency_graph(&ap.program);
        for t in 0..=horizon {
            let init: Option<&[usize]> = (t == 0).then_some(task.init.as_slice());
            let terms = layer_terms(&ap, &fi, init);
            translate_axioms(&mut m, &ap.program, &g, &terms, t);
        }
    }

    if options.cost_objective {
        m.objective = Some(
            (1..=horizon)
                .flat_map(|t| task.operators.iter().map(move |o| (t, o)))
                .map(|(t, o)| (o.cost as i64, y[t][o.id]))
                .collect(),
        );
    }

    Ok(IpModel { milp: m, fluents: fi, semantics, horizon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sas::fixtures::toy1;

    #[test]
    fn toy1_fluent_sets() {
        let t = toy1();
        let fi = build_fluent_index(&t).unwrap();
        let (v0, v1) = (fi.id(Assignment::new(0, 0)), fi.id(Assignment::new(0, 1)));
        assert_eq!(fi.add[v1], vec![0]);
        assert_eq!(fi.del[v0], vec![0]);
        assert!(fi.pre[v0].is_empty() && fi.pre[v1].is_empty());
        assert!(fi.add[v0].is_empty() && fi.del[v1].is_empty());
        assert_eq!(fi.secondary_id(1), 2);
    }

    #[test]
    fn required_value_is_the_only_one_deleted() {
        let mut t = toy1();
        t.operators[0].precondition = vec![Assignment::new(0, 0)];
        let fi = build_fluent_index(&t).unwrap();
        let (v0, v1) = (fi.id(Assignment::new(0, 0)), fi.id(Assignment::new(0, 1)));
        assert_eq!(fi.pre[v0], vec![0]);
        assert_eq!(fi.del[v0], vec![0]);
        assert!(!fi.pre[v1].contains(&0));
        assert_eq!(fi.add[v1], vec![0]);
    }

    #[test]
    fn conditional_effects_are_refused() {
        let mut t = toy1();
        t.operators[0].effects[0].condition = vec![Assignment::new(0, 0)];
        assert_eq!(build_fluent_index(&t), Err(IpError::ConditionalEffectsUnsupported));
    }

    #[test]
    fn toy1_hand_assignments() {
        let t = toy1();
        let ip = build_state_change_model(&t, 1, Semantics::Seq, IpOptions::default()).unwrap();
        let m = &ip.milp;
        // v0=0 is fluent 0, v0=1 fluent 1, derived v1 fluent 2
        let good = m.assignment_from([
            ("y_o0_t1", 1),
            ("xadd_f0_t0", 1),
            ("sat_f0_t0", 1),
            ("xadd_f1_t1", 1),
            ("xdel_f0_t1", 1),
            ("sat_f1_t1", 1),
            ("sat_f2_t1", 1),
            ("bd_r0_t1", 1),
        ]);
        assert_eq!(m.check(&good), Ok(()));
        let mut idle = m.assignment_from([("xadd_f0_t0", 1), ("sat_f0_t0", 1), ("xm_f0_t1", 1), ("sat_f0_t1", 1)]);
        assert!(m.check(&idle).is_err());
        let y = m.var("y_o0_t1").unwrap();
        idle[y] = 0;
        assert!(m.check(&idle).is_err());
    }

    #[test]
    fn mutex_groups_appear_at_every_step() {
        let mut t = toy1();
        t.mutex_groups.push(crate::sas::MutexGroup { fluents: vec![Assignment::new(0, 0), Assignment::new(0, 1)] });
        let ip = build_state_change_model(&t, 2, Semantics::Seq, IpOptions::default()).unwrap();
        let rows: Vec<_> = ip.milp.constraints.iter().filter(|c| c.tag == "mutex").collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(ip.milp.names(&rows[2].terms), vec![(1, "sat_f0_t2"), (1, "sat_f1_t2")]);
    }

    #[test]
    fn forall_with_axioms_is_refused() {
        assert!(matches!(
            build_state_change_model(&toy1(), 1, Semantics::Forall, IpOptions::default()),
            Err(IpError::ForallWithAxioms)
        ));
    }

    #[test]
    fn all_families_present() {
        let t = crate::exec::fixtures::neg_axioms();
        let mut t2 = t.clone();
        t2.mutex_groups.push(crate::sas::MutexGroup { fluents: vec![Assignment::new(0, 1), Assignment::new(1, 1)] });
        let ip = build_state_change_model(&t2, 2, Semantics::Seq, IpOptions { cost_objective: true }).unwrap();
        let tags = ip.milp.tags();
        for tag in [
            "add", "axbody", "axdef", "axinternal", "axrank", "axsupport", "backward", "del", "domain", "goal", "initial",
            "link", "mutex", "parallel", "predel", "preadd", "sat", "seq",
        ] {
            assert!(tags.contains(&tag), "missing {tag}");
        }
        assert!(ip.milp.objective.is_some());
    }
}
