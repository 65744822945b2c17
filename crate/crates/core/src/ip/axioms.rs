use std::collections::BTreeSet;

use crate::logic::{classify_rules, derivation_rounds, AtomId, DependencyGraph, NormalLogicProgram};
use crate::milp::{MilpModel, Sense, VarType};

/// How an atom of a translated program enters the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomTerm {
    /// Defined by the program. The id names its `sat`, `z` and `gt`
    /// variables.
    Derived(usize),
    /// Read from the variable `sat_f{id}_t{t}`.
    Input(usize),
    /// Fixed truth value.
    Const(bool),
}

pub(crate) fn sat_name(id: usize, t: usize) -> String {
    format!("sat_f{id}_t{t}")
}

pub(crate) fn bd_name(r: usize, t: usize) -> String {
    format!("bd_r{r}_t{t}")
}

pub(crate) fn s_name(r: usize, t: usize) -> String {
    format!("s_r{r}_t{t}")
}

pub(crate) fn gt_name(a: usize, b: usize, t: usize) -> String {
    format!("gt_u{a}_b{b}_t{t}")
}

pub(crate) fn z_name(a: usize, t: usize) -> String {
    format!("z_u{a}_t{t}")
}

enum Lit {
    Var(usize),
    Const(bool),
}

fn lit(model: &mut MilpModel, term: AtomTerm, t: usize) -> Lit {
    match term {
        AtomTerm::Derived(id) | AtomTerm::Input(id) => {
            Lit::Var(model.add_var(&sat_name(id, t), VarType::Binary, 0, 1, true))
        }
        AtomTerm::Const(b) => Lit::Const(b),
    }
}

/// Adds the level-ranking constraints of `p` at step `t` to `model`.
///
/// `atoms[a]` says how atom `a` is represented; every rule head must be
/// `Derived`. Constraint tags: `axdef` (a true body forces its head),
/// `axbody` (body variable equals the conjunction of its literals),
/// `axsupport` (a true atom needs an external body or a ranked internal
/// one), `axinternal` and `axrank` (ranking of internal support).
pub fn translate_axioms(model: &mut MilpModel, p: &NormalLogicProgram, g: &DependencyGraph, atoms: &[AtomTerm], t: usize) {
    assert_eq!(atoms.len(), p.num_atoms(), "one term per atom");
    let id_of = |a: AtomId| match atoms[a] {
        AtomTerm::Derived(id) => id,
        other => panic!("atom {a} is a rule head or in a cycle but maps to {other:?}"),
    };

    let bd: Vec<usize> = (0..p.rules().len()).map(|r| model.binary(&bd_name(r, t))).collect();
    for (r, rule) in p.rules().iter().enumerate() {
        let mut terms = Vec::new();
        let (mut lo, mut hi) = (-(rule.neg_body.len() as i64), rule.pos_body.len() as i64 - 1);
        for &b in &rule.pos_body {
            match lit(model, atoms[b], t) {
                Lit::Var(v) => terms.push((1, v)),
                Lit::Const(true) => {
                    lo -= 1;
                    hi -= 1;
                }
                Lit::Const(false) => {}
            }
        }
        for &c in &rule.neg_body {
            match lit(model, atoms[c], t) {
                Lit::Var(v) => terms.push((-1, v)),
                Lit::Const(true) => {
                    lo += 1;
                    hi += 1;
                }
                Lit::Const(false) => {}
            }
        }
        let mut first = terms.clone();
        first.push((-(rule.body_len() as i64), bd[r]));
        model.constrain("axbody", first, Sense::Ge, lo);
        terms.push((-1, bd[r]));
        model.constrain("axbody", terms, Sense::Le, hi);
    }

    let mut ranked: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (u, term) in atoms.iter().enumerate() {
        let AtomTerm::Derived(uid) = *term else { continue };
        let sat = model.add_var(&sat_name(uid, t), VarType::Binary, 0, 1, true);
        let classes = classify_rules(p, g, u);
        let mut def: Vec<(i64, usize)> = classes.def.iter().map(|&r| (1, bd[r])).collect();
        def.push((-(classes.def.len() as i64), sat));
        model.constrain("axdef", def, Sense::Le, 0);

        let s: Vec<usize> = classes.int.iter().map(|&r| model.binary(&s_name(r, t))).collect();
        let mut support: Vec<(i64, usize)> = classes.ext.iter().map(|&r| (1, bd[r])).collect();
        support.extend(s.iter().map(|&v| (1, v)));
        support.push((-1, sat));
        model.constrain("axsupport", support, Sense::Ge, 0);

        let size = g.scc(u).len() as i64;
        for (&sr, (r, inside)) in s.iter().zip(&classes.internal_support) {
            model.constrain("axinternal", vec![(1, bd[*r]), (-1, sr)], Sense::Ge, 0);
            let mut gts: Vec<(i64, usize)> = Vec::new();
            for &b in inside {
                let bid = id_of(b);
                let gt = model.binary(&gt_name(uid, bid, t));
                gts.push((1, gt));
                if ranked.insert((uid, bid)) {
                    let zu = model.integer(&z_name(uid, t), 0, size - 1);
                    let zb = model.integer(&z_name(bid, t), 0, size - 1);
                    model.constrain("axrank", vec![(1, zu), (-1, zb), (-size, gt)], Sense::Ge, 1 - size);
                }
            }
            gts.push((-(inside.len() as i64), sr));
            model.constrain("axinternal", gts, Sense::Ge, 0);
        }
    }
}

/// Values of the translation's auxiliary variables for the model `m` of
/// `p` at step `t`: bodies from `m`, ranks from the derivation rounds
/// compressed within each component. Variables missing from `model` are
/// skipped. `given` lists the atoms that are not rule heads.
#[allow(clippy::too_many_arguments)]
pub(crate) fn witness(
    model: &MilpModel,
    values: &mut [i64],
    p: &NormalLogicProgram,
    g: &DependencyGraph,
    atoms: &[AtomTerm],
    m: &[bool],
    given: &[AtomId],
    t: usize,
) {
    let mut set = |name: String, x: i64| {
        if let Some(v) = model.var(&name) {
            values[v] = x;
        }
    };
    let rounds = derivation_rounds(p, m, given);
    let mut z = vec![0i64; p.num_atoms()];
    for comp in &g.components {
        let mut levels: Vec<u32> = comp.iter().filter_map(|&a| rounds[a]).collect();
        levels.sort_unstable();
        levels.dedup();
        for &a in comp {
            if let Some(r) = rounds[a] {
                z[a] = levels.binary_search(&r).expect("present") as i64;
            }
        }
    }
    for (a, term) in atoms.iter().enumerate() {
        match *term {
            AtomTerm::Derived(id) => {
                set(sat_name(id, t), i64::from(m[a]));
                set(z_name(id, t), z[a]);
            }
            AtomTerm::Input(id) => set(sat_name(id, t), i64::from(m[a])),
            AtomTerm::Const(_) => {}
        }
    }
    for (r, rule) in p.rules().iter().enumerate() {
        let body = rule.body_holds_in(m);
        set(bd_name(r, t), i64::from(body));
        let AtomTerm::Derived(hid) = atoms[rule.head] else { continue };
        let mut ranked = body;
        for &b in rule.pos_body.iter().filter(|&&b| g.same_scc(rule.head, b)) {
            let AtomTerm::Derived(bid) = atoms[b] else { continue };
            let gt = z[rule.head] > z[b];
            set(gt_name(hid, bid, t), i64::from(gt));
            ranked &= gt;
        }
        set(s_name(r, t), i64::from(ranked));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::dependency_graph;
    use crate::logic::fixtures::p2;
    use crate::milp::write_lp;

    fn translated_p2() -> MilpModel {
        let p = p2();
        let g = dependency_graph(&p);
        let atoms: Vec<AtomTerm> = (0..p.num_atoms()).map(AtomTerm::Derived).collect();
        let mut m = MilpModel::new(0);
        translate_axioms(&mut m, &p, &g, &atoms, 0);
        m
    }

    fn rows(m: &MilpModel) -> Vec<String> {
        write_lp(m).lines().filter(|l| l.starts_with(" ax")).map(|l| l.split_once(": ").unwrap().1.to_string()).collect()
    }

    #[test]
    fn p2_constraints_from_the_worked_example() {
        let p = p2();
        assert_eq!(p.labels(), &["a", "b", "c"]);
        let rows = rows(&translated_p2());
        for expected in [
            "bd_r0_t0 - sat_f0_t0 <= 0",
            "sat_f1_t0 - bd_r2_t0 >= 0",
            "sat_f1_t0 - bd_r2_t0 <= 0",
            "gt_u2_b1_t0 - s_r2_t0 >= 0",
            "z_u2_t0 - z_u1_t0 - 2 gt_u2_b1_t0 >= -1",
            "bd_r0_t0 - sat_f0_t0 >= 0",
            "s_r2_t0 - sat_f2_t0 >= 0",
        ] {
            assert!(rows.iter().any(|r| r == expected), "missing `{expected}` in {rows:#?}");
        }
    }

    #[test]
    fn answer_set_witness_satisfies_translation() {
        let p = p2();
        let g = dependency_graph(&p);
        let atoms: Vec<AtomTerm> = (0..3).map(AtomTerm::Derived).collect();
        let m = translated_p2();
        let mut values = vec![0; m.num_vars()];
        witness(&m, &mut values, &p, &g, &atoms, &[true, false, false], &[], 0);
        assert_eq!(m.check(&values), Ok(()));
        // the supported model {b, c} has no consistent ranking
        let mut values = vec![0; m.num_vars()];
        witness(&m, &mut values, &p, &g, &atoms, &[false, true, true], &[], 0);
        assert!(m.check(&values).is_err());
    }

    #[test]
    fn constants_fold_into_the_right_hand_side() {
        // d :- x, not y. with x true and y false fixed
        let p = NormalLogicProgram::parse("d :- x, not y.").unwrap();
        let g = dependency_graph(&p);
        let atoms = [AtomTerm::Derived(0), AtomTerm::Const(true), AtomTerm::Const(false)];
        let mut m = MilpModel::new(0);
        translate_axioms(&mut m, &p, &g, &atoms, 3);
        let rows = rows(&m);
        assert!(rows.contains(&"- 2 bd_r0_t3 >= -2".to_string()), "{rows:?}");
        assert!(rows.contains(&"- bd_r0_t3 <= -1".to_string()), "{rows:?}");
    }
}
