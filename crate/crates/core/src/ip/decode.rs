use super::axioms::{sat_name, witness};
use super::{layer_terms, translate_axioms, x_name, y_name, AtomTerm, IpError, IpModel};
use crate::exec::{Executor, Plan};
use crate::logic::dependency_graph;
use crate::milp::MilpModel;
use crate::sas::{AxiomAtom, SasTask};

/// Reads the executed operators off a solver assignment. Steps without an
/// operator are dropped.
pub fn decode_assignment(ip: &IpModel, values: &[i64]) -> Result<Plan, IpError> {
    if values.len() != ip.milp.num_vars() {
        return Err(IpError::MalformedAssignment(format!(
            "{} values for {} variables",
            values.len(),
            ip.milp.num_vars()
        )));
    }
    let mut steps = Vec::new();
    for t in 1..=ip.horizon {
        let mut step = Vec::new();
        let mut o = 0;
        while let Some(v) = ip.y(o, t) {
            match values[v] {
                0 => {}
                1 => step.push(o),
                x => return Err(IpError::MalformedAssignment(format!("y_o{o}_t{t} = {x}"))),
            }
            o += 1;
        }
        steps.push(step);
    }
    Ok(Plan::from_steps(steps))
}

/// The assignment a valid plan induces, padded with idle steps up to the
/// model's horizon.
pub fn plan_to_assignment(task: &SasTask, ip: &IpModel, plan: &Plan) -> Result<Vec<i64>, IpError> {
    let ex = Executor::new(task);
    ex.validate(plan, ip.semantics)?;
    if plan.makespan() > ip.horizon {
        return Err(IpError::HorizonExceeded { makespan: plan.makespan(), horizon: ip.horizon });
    }
    let mut states = ex.trace(plan)?;
    let last = states.last().expect("initial state").clone();
    states.resize(ip.horizon + 1, last);

    let m = &ip.milp;
    let fi = &ip.fluents;
    let mut values: Vec<i64> = m.variables.iter().map(|v| v.lower).collect();
    let mut set = |name: String, x: bool| {
        let v = m.var(&name).unwrap_or_else(|| panic!("model lacks {name}"));
        values[v] = i64::from(x);
    };
    for (f, &a) in fi.fluents.iter().enumerate() {
        set(x_name("add", f, 0), states[0].holds(a));
        set(sat_name(f, 0), states[0].holds(a));
    }
    let empty = Vec::new();
    for t in 1..=ip.horizon {
        let step = plan.steps().get(t - 1).unwrap_or(&empty);
        for &o in step {
            set(y_name(o, t), true);
        }
        let any = |set: &[usize], not: &[usize]| step.iter().any(|o| set.contains(o) && !not.contains(o));
        for (f, &a) in fi.fluents.iter().enumerate() {
            let add = any(&fi.add[f], &fi.pre[f]);
            let pre = any(&fi.pre[f], &fi.del[f]);
            let del = any(&fi.del[f], &fi.pre[f]);
            let predel = step.iter().any(|o| fi.pre[f].contains(o) && fi.del[f].contains(o));
            let maintain = states[t - 1].holds(a) && states[t].holds(a) && !add && !pre;
            set(x_name("add", f, t), add);
            set(x_name("pre", f, t), pre);
            set(x_name("del", f, t), del);
            set(x_name("predel", f, t), predel);
            set(x_name("m", f, t), maintain);
            set(sat_name(f, t), states[t].holds(a));
        }
    }

    if task.secondary_vars().next().is_some() {
        let ap = task.axiom_program();
        let g = dependency_graph(&ap.program);
        let given: Vec<usize> =
            (0..ap.atoms.len()).filter(|&a| matches!(ap.atoms[a], AxiomAtom::Fluent(_))).collect();
        for (t, s) in states.iter().enumerate() {
            let bits: Vec<bool> = ap
                .atoms
                .iter()
                .map(|a| match *a {
                    AxiomAtom::Derived(u) => s.derived(u),
                    AxiomAtom::Fluent(f) => s.holds(f),
                })
                .collect();
            let init: Option<&[usize]> = (t == 0).then_some(task.init.as_slice());
            let terms = layer_terms(&ap, fi, init);
            witness(m, &mut values, &ap.program, &g, &terms, &bits, &given, t);
        }
    }
    Ok(values)
}

/// The axiom constraints of one step on their own, with the primary part of
/// `state` fixed.
#[derive(Debug, Clone)]
pub struct AxiomLayer {
    pub milp: MilpModel,
    /// `(secondary variable, sat variable)` pairs.
    pub derived: Vec<(usize, usize)>,
}

/// Derived variables are named by their variable id: `sat_f{u}_t0`.
pub fn axiom_layer_model(task: &SasTask, state: &[usize]) -> AxiomLayer {
    let ap = task.axiom_program();
    let g = dependency_graph(&ap.program);
    let terms: Vec<AtomTerm> = ap
        .atoms
        .iter()
        .map(|a| match *a {
            AxiomAtom::Derived(u) => AtomTerm::Derived(u),
            AxiomAtom::Fluent(f) => AtomTerm::Const(state[f.var] == f.value),
        })
        .collect();
    let mut milp = MilpModel::new(0);
    translate_axioms(&mut milp, &ap.program, &g, &terms, 0);
    let derived = task.secondary_vars().map(|u| (u, milp.var(&sat_name(u, 0)).expect("derived sat"))).collect();
    AxiomLayer { milp, derived }
}

#[cfg(test)]
mod tests {
    use super::super::{build_state_change_model, IpOptions};
    use super::*;
    use crate::exec::fixtures::neg_axioms;
    use crate::exec::Semantics;
    use crate::sas::fixtures::toy1;
    use crate::sas::Assignment;

    #[test]
    fn toy1_round_trip() {
        let t = toy1();
        let ip = build_state_change_model(&t, 1, Semantics::Seq, IpOptions::default()).unwrap();
        let plan = Plan::sequential(vec![0]);
        let values = plan_to_assignment(&t, &ip, &plan).unwrap();
        assert_eq!(ip.milp.check(&values), Ok(()));
        assert_eq!(decode_assignment(&ip, &values).unwrap(), plan);
    }

    #[test]
    fn shorter_plans_are_padded() {
        let t = neg_axioms();
        let ip = build_state_change_model(&t, 4, Semantics::Seq, IpOptions::default()).unwrap();
        let values = plan_to_assignment(&t, &ip, &Plan::sequential(vec![0, 1])).unwrap();
        assert_eq!(ip.milp.check(&values), Ok(()));
        let short = build_state_change_model(&t, 1, Semantics::Seq, IpOptions::default()).unwrap();
        assert!(matches!(
            plan_to_assignment(&t, &short, &Plan::sequential(vec![0, 1])),
            Err(IpError::HorizonExceeded { makespan: 2, horizon: 1 })
        ));
    }

    #[test]
    fn empty_plan_on_satisfied_goal() {
        let mut t = toy1();
        t.goal = vec![Assignment::new(0, 0)];
        let ip = build_state_change_model(&t, 1, Semantics::Seq, IpOptions::default()).unwrap();
        let values = plan_to_assignment(&t, &ip, &Plan::empty()).unwrap();
        assert_eq!(ip.milp.check(&values), Ok(()));
        assert_eq!(decode_assignment(&ip, &values).unwrap(), Plan::empty());
    }

    #[test]
    fn parallel_steps_decode_together() {
        let text = "begin_version\n3\nend_version\nbegin_metric\n0\nend_metric\n2\n\
begin_variable\na\n-1\n2\nx\ny\nend_variable\nbegin_variable\nb\n-1\n2\nx\ny\nend_variable\n0\n\
begin_state\n0\n0\nend_state\nbegin_goal\n2\n0 1\n1 1\nend_goal\n2\n\
begin_operator\nseta\n0\n1\n0 0 -1 1\n1\nend_operator\nbegin_operator\nsetb\n0\n1\n0 1 -1 1\n1\nend_operator\n0\n";
        let t = crate::sas::parse_sas(text).unwrap();
        let ip = build_state_change_model(&t, 1, Semantics::Forall, IpOptions::default()).unwrap();
        let plan = Plan::from_steps(vec![vec![0, 1]]);
        let values = plan_to_assignment(&t, &ip, &plan).unwrap();
        assert_eq!(ip.milp.check(&values), Ok(()));
        assert_eq!(decode_assignment(&ip, &values).unwrap().steps(), &[vec![0, 1]]);
    }

    #[test]
    fn malformed_values() {
        let t = toy1();
        let ip = build_state_change_model(&t, 1, Semantics::Seq, IpOptions::default()).unwrap();
        assert!(decode_assignment(&ip, &[]).is_err());
        let mut v = vec![0; ip.milp.num_vars()];
        v[ip.y(0, 1).unwrap()] = 2;
        assert!(decode_assignment(&ip, &v).is_err());
    }
}
