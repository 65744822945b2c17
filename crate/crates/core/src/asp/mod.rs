//! k-step answer-set programs for SAS+ tasks with axioms and conditional
//! effects, their normal-program form, and the mapping between answer sets
//! and plans.

mod models;
mod syntax;

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write};

use thiserror::Error;

use crate::exec::{ExecError, Semantics};
use crate::sas::{Assignment, SasTask, VarKind};

pub use models::{decode_plan, enumerate_models, is_model_of, plan_to_model, NormalForm};
pub use syntax::{check_syntax, AspSyntaxError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AspError {
    #[error("parallel steps are not supported for tasks with axioms")]
    ForallWithAxioms,
    #[error("invalid plan: {0}")]
    InvalidPlan(#[from] ExecError),
    #[error("plan has {makespan} steps, program has {horizon}")]
    WrongMakespan { makespan: usize, horizon: usize },
    #[error("malformed model: {0}")]
    MalformedModel(String),
    #[error("more than {0} operator choices to enumerate")]
    TooManyGuesses(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundAtom {
    Holds { fluent: Assignment, t: usize },
    Apply { op: usize, t: usize },
    Fired { op: usize, eff: usize, t: usize },
    Changed { var: usize, t: usize },
    Goal(Assignment),
    Demands { op: usize, fluent: Assignment },
    /// `eff` is set for conditional effects, which are named on their own.
    Add { op: usize, eff: Option<usize>, fluent: Assignment },
    Inertial(Assignment),
    /// A condition of a conditional effect.
    Cond { op: usize, eff: usize, fluent: Assignment },
    /// Complement of an `apply` atom in the normal form of a choice rule.
    NotApply { op: usize, t: usize },
    /// Head of the normal-rule form of integrity constraints.
    Bot,
}

struct F(Assignment);

impl fmt::Display for F {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f(v{},{})", self.0.var, self.0.value)
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GroundAtom::Holds { fluent, t } => write!(f, "holds({},{t})", F(fluent)),
            GroundAtom::Apply { op, t } => write!(f, "apply(o{op},{t})"),
            GroundAtom::Fired { op, eff, t } => write!(f, "fired(o{op}_e{eff},{t})"),
            GroundAtom::Changed { var, t } => write!(f, "changed(v{var},{t})"),
            GroundAtom::Goal(a) => write!(f, "goal({})", F(a)),
            GroundAtom::Demands { op, fluent } => write!(f, "demands(o{op},{})", F(fluent)),
            GroundAtom::Add { op, eff: None, fluent } => write!(f, "add(o{op},{})", F(fluent)),
            GroundAtom::Add { op, eff: Some(e), fluent } => write!(f, "add(o{op}_e{e},{})", F(fluent)),
            GroundAtom::Inertial(a) => write!(f, "inertial({})", F(a)),
            GroundAtom::Cond { op, eff, fluent } => write!(f, "cond(o{op}_e{eff},{})", F(fluent)),
            GroundAtom::NotApply { op, t } => write!(f, "napply(o{op},{t})"),
            GroundAtom::Bot => f.write_str("bot"),
        }
    }
}

/// Statements refer to atoms by index into the program's atom table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Fact(usize),
    Rule { head: usize, pos: Vec<usize>, neg: Vec<usize> },
    Constraint { pos: Vec<usize>, neg: Vec<usize> },
    /// `lower { atoms } upper`; `upper` is absent under parallel steps.
    Choice { atoms: Vec<usize>, lower: usize, upper: Option<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AspOptions {
    /// Read effect conditions at the step's own layer instead of the layer
    /// before it.
    pub conditions_at_step: bool,
}

#[derive(Debug, Clone)]
pub struct AspProgram {
    pub horizon: usize,
    pub semantics: Semantics,
    pub options: AspOptions,
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, usize>,
    pub statements: Vec<Statement>,
}

impl AspProgram {
    fn new(horizon: usize, semantics: Semantics, options: AspOptions) -> Self {
        AspProgram { horizon, semantics, options, atoms: Vec::new(), index: HashMap::new(), statements: Vec::new() }
    }

    fn atom(&mut self, a: GroundAtom) -> usize {
        if let Some(&i) = self.index.get(&a) {
            return i;
        }
        self.atoms.push(a);
        self.index.insert(a, self.atoms.len() - 1);
        self.atoms.len() - 1
    }

    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn atom_index(&self, a: &GroundAtom) -> Option<usize> {
        self.index.get(a).copied()
    }

    fn fact(&mut self, a: GroundAtom) {
        let i = self.atom(a);
        self.statements.push(Statement::Fact(i));
    }

    fn rule(&mut self, head: GroundAtom, pos: &[GroundAtom], neg: &[GroundAtom]) {
        let head = self.atom(head);
        let pos = pos.iter().map(|&a| self.atom(a)).collect();
        let neg = neg.iter().map(|&a| self.atom(a)).collect();
        self.statements.push(Statement::Rule { head, pos, neg });
    }

    fn constraint(&mut self, pos: &[GroundAtom], neg: &[GroundAtom]) {
        let pos = pos.iter().map(|&a| self.atom(a)).collect();
        let neg = neg.iter().map(|&a| self.atom(a)).collect();
        self.statements.push(Statement::Constraint { pos, neg });
    }

    fn render(&self, s: &Statement) -> String {
        let name = |i: &usize| self.atoms[*i].to_string();
        let body = |pos: &[usize], neg: &[usize]| {
            pos.iter().map(name).chain(neg.iter().map(|i| format!("not {}", name(i)))).collect::<Vec<_>>().join(", ")
        };
        match s {
            Statement::Fact(a) => format!("{}.", name(a)),
            Statement::Rule { head, pos, neg } if pos.is_empty() && neg.is_empty() => format!("{}.", name(head)),
            Statement::Rule { head, pos, neg } => format!("{} :- {}.", name(head), body(pos, neg)),
            Statement::Constraint { pos, neg } => format!(":- {}.", body(pos, neg)),
            Statement::Choice { atoms, lower, upper } => {
                let inner = atoms.iter().map(name).collect::<Vec<_>>().join("; ");
                let inner = if inner.is_empty() { String::from(" ") } else { format!(" {inner} ") };
                match upper {
                    Some(u) => format!("{lower} {{{inner}}} {u}."),
                    None => format!("{lower} {{{inner}}}."),
                }
            }
        }
    }

    fn texts(&self, keep: impl Fn(&Statement) -> bool) -> Vec<String> {
        self.statements.iter().filter(|s| keep(s)).map(|s| self.render(s)).collect()
    }

    pub fn facts(&self) -> Vec<String> {
        self.texts(|s| matches!(s, Statement::Fact(_)))
    }

    pub fn rules(&self) -> Vec<String> {
        self.texts(|s| matches!(s, Statement::Rule { .. }))
    }

    pub fn constraints(&self) -> Vec<String> {
        self.texts(|s| matches!(s, Statement::Constraint { .. }))
    }

    pub fn choice_rules(&self) -> Vec<String> {
        self.texts(|s| matches!(s, Statement::Choice { .. }))
    }

    /// One statement per line, in emission order.
    pub fn to_ground_text(&self) -> String {
        let mut out = String::new();
        for s in &self.statements {
            out.push_str(&self.render(s));
            out.push('\n');
        }
        out
    }

    /// Ids used in the program paired with the task's names.
    pub fn name_map(&self, task: &SasTask) -> String {
        let mut out = String::new();
        for v in &task.variables {
            let _ = writeln!(out, "v{} {}", v.id, v.name);
            for (x, name) in v.value_names.iter().enumerate() {
                let _ = writeln!(out, "f(v{},{x}) {name}", v.id);
            }
        }
        for o in &task.operators {
            let _ = writeln!(out, "o{} {}", o.id, o.name);
        }
        out
    }
}

/// The ground k-step program.
pub fn encode_asp(task: &SasTask, k: usize, semantics: Semantics, options: AspOptions) -> Result<AspProgram, AspError> {
    use GroundAtom::*;
    if semantics == Semantics::Forall && task.has_axioms() {
        return Err(AspError::ForallWithAxioms);
    }
    let mut p = AspProgram::new(k, semantics, options);
    let primary: Vec<usize> = task.primary_vars().collect();

    for &v in &primary {
        p.fact(Holds { fluent: Assignment::new(v, task.init[v]), t: 0 });
    }
    for &g in &task.goal {
        p.fact(Goal(g));
    }
    for o in &task.operators {
        for &pre in &o.precondition {
            p.fact(Demands { op: o.id, fluent: pre });
        }
        for (e, eff) in o.effects.iter().enumerate() {
            let eff_id = eff.is_conditional().then_some(e);
            p.fact(Add { op: o.id, eff: eff_id, fluent: eff.affected });
            for &c in &eff.condition {
                p.fact(Cond { op: o.id, eff: e, fluent: c });
            }
        }
    }
    for &v in &primary {
        for x in 0..task.variables[v].domain_size() {
            p.fact(Inertial(Assignment::new(v, x)));
        }
    }
    for &g in &task.goal {
        p.constraint(&[Goal(g)], &[Holds { fluent: g, t: k }]);
    }

    let conflicts = conflict_witnesses(task);
    for t in 0..=k {
        if t > 0 {
            let applies: Vec<usize> = task.operators.iter().map(|o| p.atom(Apply { op: o.id, t })).collect();
            let upper = (semantics == Semantics::Seq).then_some(1);
            p.statements.push(Statement::Choice { atoms: applies, lower: 1, upper });
            for o in &task.operators {
                let apply = Apply { op: o.id, t };
                for &pre in &o.precondition {
                    p.constraint(&[apply, Demands { op: o.id, fluent: pre }], &[Holds { fluent: pre, t: t - 1 }]);
                }
                for (e, eff) in o.effects.iter().enumerate() {
                    let f = eff.affected;
                    if eff.is_conditional() {
                        let fired = Fired { op: o.id, eff: e, t };
                        let add = Add { op: o.id, eff: Some(e), fluent: f };
                        let layer = if options.conditions_at_step { t } else { t - 1 };
                        let mut body = vec![apply];
                        body.extend(eff.condition.iter().map(|&c| Holds { fluent: c, t: layer }));
                        p.rule(fired, &body, &[]);
                        p.rule(Holds { fluent: f, t }, &[fired, add], &[]);
                        p.rule(Changed { var: f.var, t }, &[fired, add], &[]);
                    } else {
                        let add = Add { op: o.id, eff: None, fluent: f };
                        p.rule(Holds { fluent: f, t }, &[apply, add], &[]);
                        p.rule(Changed { var: f.var, t }, &[apply, add], &[]);
                    }
                }
            }
            for &v in &primary {
                for x in 0..task.variables[v].domain_size() {
                    let f = Assignment::new(v, x);
                    p.rule(Holds { fluent: f, t }, &[Holds { fluent: f, t: t - 1 }, Inertial(f)], &[Changed { var: v, t }]);
                }
            }
            if semantics == Semantics::Forall {
                for w in &conflicts {
                    let mut body = vec![Apply { op: w.0, t }, Apply { op: w.1, t }];
                    body.extend_from_slice(&w.2);
                    p.constraint(&body, &[]);
                }
            }
        }
        for ax in &task.axioms {
            let pos: Vec<GroundAtom> = ax.pos_body.iter().map(|&b| Holds { fluent: b, t }).collect();
            let neg: Vec<GroundAtom> = ax.neg_body.iter().map(|&c| Holds { fluent: c, t }).collect();
            p.rule(Holds { fluent: ax.head, t }, &pos, &neg);
        }
        for u in task.secondary_vars() {
            let (zero, one) = (Holds { fluent: Assignment::new(u, 0), t }, Holds { fluent: Assignment::new(u, 1), t });
            p.rule(zero, &[], &[one]);
            p.constraint(&[], &[zero, one]);
        }
        for v in &task.variables {
            for y in 0..v.domain_size() {
                for z in y + 1..v.domain_size() {
                    let a = Holds { fluent: Assignment::new(v.id, y), t };
                    let b = Holds { fluent: Assignment::new(v.id, z), t };
                    p.constraint(&[a, b], &[]);
                }
            }
        }
        for g in &task.mutex_groups {
            for (i, &a) in g.fluents.iter().enumerate() {
                for &b in &g.fluents[i + 1..] {
                    if a.var != b.var {
                        p.constraint(&[Holds { fluent: a, t }, Holds { fluent: b, t }], &[]);
                    }
                }
            }
        }
    }
    Ok(p)
}

/// `(o, o', fact atoms)` for every pair that may not share a step: `o`
/// adds `X=Y` while `o'` demands or adds `X=Z`, `Y != Z`, or has an effect
/// conditioned on `X`.
fn conflict_witnesses(task: &SasTask) -> Vec<(usize, usize, Vec<GroundAtom>)> {
    let mut out = BTreeSet::new();
    for o in &task.operators {
        for o2 in task.operators.iter().filter(|o2| o2.id != o.id) {
            for (e, eff) in o.effects.iter().enumerate() {
                let x = eff.affected;
                let add = GroundAtom::Add { op: o.id, eff: eff.is_conditional().then_some(e), fluent: x };
                for &pre in o2.precondition.iter().filter(|p| p.var == x.var && p.value != x.value) {
                    out.insert((o.id, o2.id, vec![add, GroundAtom::Demands { op: o2.id, fluent: pre }]));
                }
                for (e2, eff2) in o2.effects.iter().enumerate() {
                    for &c in eff2.condition.iter().filter(|c| c.var == x.var) {
                        out.insert((o.id, o2.id, vec![add, GroundAtom::Cond { op: o2.id, eff: e2, fluent: c }]));
                    }
                    let y = eff2.affected;
                    if y.var == x.var && y.value != x.value {
                        let add2 = GroundAtom::Add { op: o2.id, eff: eff2.is_conditional().then_some(e2), fluent: y };
                        out.insert((o.id, o2.id, vec![add, add2]));
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// The program with first-order rules over `step(T)` and `layer(T)`, for
/// external grounders. Operator and fluent data stay as ground facts.
pub fn encode_asp_template(task: &SasTask, k: usize, semantics: Semantics, options: AspOptions) -> Result<String, AspError> {
    if semantics == Semantics::Forall && task.has_axioms() {
        return Err(AspError::ForallWithAxioms);
    }
    let ground = encode_asp(task, 0, semantics, options)?;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "#const n={k}.\nstep(1..n).\nlayer(0..n).");
    for f in ground.facts() {
        let _ = writeln!(w, "{f}");
    }
    for o in &task.operators {
        let _ = writeln!(w, "operators(o{}).", o.id);
        for (e, eff) in o.effects.iter().enumerate().filter(|(_, e)| e.is_conditional()) {
            let _ = writeln!(w, "effect_of(o{},o{}_e{e}).", o.id, o.id);
            let layer = if options.conditions_at_step { "T" } else { "T-1" };
            let conds: Vec<String> =
                eff.condition.iter().map(|c| format!("holds(f(v{},{}),{layer})", c.var, c.value)).collect();
            let _ = writeln!(w, "fired(o{}_e{e},T) :- apply(o{},T), {}, step(T).", o.id, o.id, conds.join(", "));
        }
    }
    let rules = [
        ":- goal(F), not holds(F,n).",
        ":- apply(O,T), demands(O,F), not holds(F,T-1), step(T).",
        "holds(F,T) :- apply(O,T), add(O,F), step(T).",
        "changed(X,T) :- apply(O,T), add(O,f(X,Y)), step(T).",
        "holds(F,T) :- fired(E,T), add(E,F), step(T).",
        "changed(X,T) :- fired(E,T), add(E,f(X,Y)), step(T).",
        "holds(f(X,Y),T) :- holds(f(X,Y),T-1), step(T), inertial(f(X,Y)), not changed(X,T).",
        ":- holds(f(X,Y),T), holds(f(X,Z),T), Y != Z, layer(T).",
    ];
    for r in rules {
        let _ = writeln!(w, "{r}");
    }
    match semantics {
        Semantics::Seq => {
            let _ = writeln!(w, "1 {{ apply(O,T) : operators(O) }} 1 :- step(T).");
        }
        Semantics::Forall => {
            let _ = writeln!(w, "1 {{ apply(O,T) : operators(O) }} :- step(T).");
            let _ = writeln!(w, "adds(O,F) :- add(O,F), operators(O).\nadds(O,F) :- effect_of(O,E), add(E,F).");
            let _ = writeln!(
                w,
                ":- apply(O,T), apply(O2,T), adds(O,f(X,Y)), demands(O2,f(X,Z)), step(T), O != O2, Y != Z."
            );
            let _ =
                writeln!(w, ":- apply(O,T), apply(O2,T), adds(O,f(X,Y)), adds(O2,f(X,Z)), step(T), O != O2, Y != Z.");
            let _ = writeln!(
                w,
                ":- apply(O,T), apply(O2,T), adds(O,f(X,Y)), effect_of(O2,E), cond(E,f(X,Z)), step(T), O != O2."
            );
        }
    }
    for ax in &task.axioms {
        let mut body: Vec<String> = ax.pos_body.iter().map(|b| format!("holds(f(v{},{}),T)", b.var, b.value)).collect();
        body.extend(ax.neg_body.iter().map(|c| format!("not holds(f(v{},1),T)", c.var)));
        body.push("layer(T)".into());
        let _ = writeln!(w, "holds(f(v{},1),T) :- {}.", ax.head.var, body.join(", "));
    }
    for v in task.variables.iter().filter(|v| matches!(v.kind, VarKind::Secondary { .. })) {
        let _ = writeln!(w, "holds(f(v{},0),T) :- not holds(f(v{},1),T), layer(T).", v.id, v.id);
        let _ = writeln!(w, ":- not holds(f(v{},0),T), not holds(f(v{},1),T), layer(T).", v.id, v.id);
    }
    for g in &task.mutex_groups {
        for (i, a) in g.fluents.iter().enumerate() {
            for b in g.fluents[i + 1..].iter().filter(|b| b.var != a.var) {
                let _ =
                    writeln!(w, ":- holds(f(v{},{}),T), holds(f(v{},{}),T), layer(T).", a.var, a.value, b.var, b.value);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::fixtures::neg_axioms;
    use crate::sas::fixtures::toy1;

    #[test]
    fn toy1_facts_and_choice() {
        let p = encode_asp(&toy1(), 1, Semantics::Seq, AspOptions::default()).unwrap();
        assert_eq!(
            p.facts(),
            ["holds(f(v0,0),0).", "goal(f(v1,1)).", "add(o0,f(v0,1)).", "inertial(f(v0,0)).", "inertial(f(v0,1))."]
        );
        assert_eq!(p.choice_rules(), ["1 { apply(o0,1) } 1."]);
        let rules = p.rules();
        for r in ["holds(f(v1,1),0) :- holds(f(v0,1),0).", "holds(f(v1,1),1) :- holds(f(v0,1),1)."] {
            assert!(rules.iter().any(|x| x == r), "{r}");
        }
        for t in 0..=1 {
            let bridge = format!("holds(f(v1,0),{t}) :- not holds(f(v1,1),{t}).");
            assert!(rules.contains(&bridge));
        }
    }

    #[test]
    fn negative_axiom_literals_read_the_true_value() {
        let p = encode_asp(&neg_axioms(), 1, Semantics::Seq, AspOptions::default()).unwrap();
        let rules = p.rules();
        // a :- not b.   b :- c.   c :- b.   b :- p=1.
        for r in [
            "holds(f(v2,1),1) :- not holds(f(v3,1),1).",
            "holds(f(v3,1),1) :- holds(f(v4,1),1).",
            "holds(f(v4,1),1) :- holds(f(v3,1),1).",
            "holds(f(v3,1),1) :- holds(f(v0,1),1).",
        ] {
            assert!(rules.iter().any(|x| x == r), "{r}");
        }
    }

    #[test]
    fn forall_refuses_axioms() {
        assert!(matches!(encode_asp(&toy1(), 1, Semantics::Forall, AspOptions::default()), Err(AspError::ForallWithAxioms)));
    }

    #[test]
    fn zero_steps_have_no_apply_atoms() {
        let p = encode_asp(&toy1(), 0, Semantics::Seq, AspOptions::default()).unwrap();
        assert!(!p.atoms().iter().any(|a| matches!(a, GroundAtom::Apply { .. })));
        assert!(p.choice_rules().is_empty());
    }

    #[test]
    fn template_is_valid_syntax() {
        let text = encode_asp_template(&neg_axioms(), 3, Semantics::Seq, AspOptions::default()).unwrap();
        assert!(text.starts_with("#const n=3.\nstep(1..n).\nlayer(0..n).\n"));
        check_syntax(&text).unwrap();
        let ground = encode_asp(&neg_axioms(), 2, Semantics::Seq, AspOptions::default()).unwrap();
        check_syntax(&ground.to_ground_text()).unwrap();
    }
}
