use std::fmt::Write;

use super::{SasTask, VarKind};

/// Writes `task` in the version-3 `.sas` format.
///
/// A precondition on a variable the operator also assigns is written as the
/// `pre` field of each effect on that variable; the rest go to the prevail
/// list. Axiom bodies list positive literals before negative ones. Parsing
/// the output and writing it again reproduces it byte for byte.
pub fn serialize_sas(task: &SasTask) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "begin_version\n3\nend_version");
    let _ = writeln!(w, "begin_metric\n{}\nend_metric", u8::from(task.use_costs));
    let _ = writeln!(w, "{}", task.variables.len());
    for v in &task.variables {
        let layer = match v.kind {
            VarKind::Primary => -1,
            VarKind::Secondary { layer } => i64::from(layer),
        };
        let _ = writeln!(w, "begin_variable\n{}\n{layer}\n{}", v.name, v.domain_size());
        for name in &v.value_names {
            let _ = writeln!(w, "{name}");
        }
        let _ = writeln!(w, "end_variable");
    }
    let _ = writeln!(w, "{}", task.mutex_groups.len());
    for g in &task.mutex_groups {
        let _ = writeln!(w, "begin_mutex_group\n{}", g.fluents.len());
        for f in &g.fluents {
            let _ = writeln!(w, "{} {}", f.var, f.value);
        }
        let _ = writeln!(w, "end_mutex_group");
    }
    let _ = writeln!(w, "begin_state");
    for v in &task.init {
        let _ = writeln!(w, "{v}");
    }
    let _ = writeln!(w, "end_state\nbegin_goal\n{}", task.goal.len());
    for g in &task.goal {
        let _ = writeln!(w, "{} {}", g.var, g.value);
    }
    let _ = writeln!(w, "end_goal\n{}", task.operators.len());
    for o in &task.operators {
        let _ = writeln!(w, "begin_operator\n{}", o.name);
        let prevail: Vec<_> =
            o.precondition.iter().filter(|p| !o.effects.iter().any(|e| e.affected.var == p.var)).collect();
        let _ = writeln!(w, "{}", prevail.len());
        for p in prevail {
            let _ = writeln!(w, "{} {}", p.var, p.value);
        }
        let _ = writeln!(w, "{}", o.effects.len());
        for e in &o.effects {
            let _ = write!(w, "{}", e.condition.len());
            for c in &e.condition {
                let _ = write!(w, " {} {}", c.var, c.value);
            }
            let pre = o.pre_value(e.affected.var).map_or(-1, |v| v as i64);
            let _ = writeln!(w, " {} {pre} {}", e.affected.var, e.affected.value);
        }
        let _ = writeln!(w, "{}\nend_operator", o.cost);
    }
    let _ = writeln!(w, "{}", task.axioms.len());
    for ax in &task.axioms {
        let _ = writeln!(w, "begin_rule\n{}", ax.pos_body.len() + ax.neg_body.len());
        for b in &ax.pos_body {
            let _ = writeln!(w, "{} {}", b.var, b.value);
        }
        for c in &ax.neg_body {
            let _ = writeln!(w, "{} 0", c.var);
        }
        let _ = writeln!(w, "{} 0 1\nend_rule", ax.head.var);
    }
    out
}
