use super::{from_bits, to_bits, AtomSet, LogicError, NormalLogicProgram, Rule};

/// Largest atom count accepted by [`enumerate_answer_sets`].
pub const ENUMERATION_CAP: usize = 20;

/// `P^M`: drops every rule whose negative body meets `m`, strips the rest.
pub fn reduct(p: &NormalLogicProgram, m: &AtomSet) -> NormalLogicProgram {
    let rules = p
        .rules()
        .iter()
        .filter(|r| r.neg_body.iter().all(|c| !m.contains(c)))
        .map(|r| Rule { head: r.head, pos_body: r.pos_body.clone(), neg_body: Vec::new() })
        .collect();
    p.with_rules(rules)
}

/// Least model of a positive program.
///
/// Panics if a rule has a negative body.
pub fn least_model(p: &NormalLogicProgram) -> AtomSet {
    assert!(p.is_positive(), "least_model needs a positive program");
    from_bits(&least_model_bits(p.num_atoms(), p.rules().iter()))
}

/// Unit propagation over body counters; linear in program size.
pub(crate) fn least_model_bits<'a>(n: usize, rules: impl Iterator<Item = &'a Rule>) -> Vec<bool> {
    let rules: Vec<&Rule> = rules.collect();
    let mut watch: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut missing: Vec<usize> = Vec::with_capacity(rules.len());
    let mut model = vec![false; n];
    let mut queue = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        missing.push(r.pos_body.len());
        for &b in &r.pos_body {
            watch[b].push(i);
        }
        if r.pos_body.is_empty() && !model[r.head] {
            model[r.head] = true;
            queue.push(r.head);
        }
    }
    while let Some(a) = queue.pop() {
        for &i in &watch[a] {
            missing[i] -= 1;
            if missing[i] == 0 {
                let h = rules[i].head;
                if !model[h] {
                    model[h] = true;
                    queue.push(h);
                }
            }
        }
    }
    model
}

pub fn is_model(p: &NormalLogicProgram, m: &AtomSet) -> bool {
    p.rules().iter().all(|r| !r.body_holds(m) || m.contains(&r.head))
}

/// `m` is an answer set iff it is the least model of `P^m`.
pub fn is_answer_set(p: &NormalLogicProgram, m: &AtomSet) -> bool {
    let bits = to_bits(p.num_atoms(), m);
    is_answer_set_bits(p, &bits)
}

pub(crate) fn is_answer_set_bits(p: &NormalLogicProgram, m: &[bool]) -> bool {
    let kept = p.rules().iter().filter(|r| r.neg_body.iter().all(|&c| !m[c]));
    least_model_bits(p.num_atoms(), kept) == m
}

/// Every answer set, by checking all `2^|At(P)|` candidates.
/// Results are in lexicographic order of their sorted atom ids.
pub fn enumerate_answer_sets(p: &NormalLogicProgram) -> Result<Vec<AtomSet>, LogicError> {
    let n = p.num_atoms();
    if n > ENUMERATION_CAP {
        return Err(LogicError::TooLarge { atoms: n, cap: ENUMERATION_CAP });
    }
    let mut found = Vec::new();
    let mut bits = vec![false; n];
    for mask in 0u32..(1u32 << n) {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = mask & (1 << i) != 0;
        }
        if is_answer_set_bits(p, &bits) {
            found.push(from_bits(&bits));
        }
    }
    found.sort();
    Ok(found)
}

/// `m` is a model and each of its atoms has a rule with that head whose body
/// `m` satisfies.
pub fn is_supported(p: &NormalLogicProgram, m: &AtomSet) -> bool {
    is_model(p, m)
        && m.iter().all(|a| p.rules().iter().any(|r| r.head == *a && r.body_holds(m)))
}
