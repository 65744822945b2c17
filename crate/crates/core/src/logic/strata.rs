use super::graph::tarjan_scc;
use super::{from_bits, AtomSet, LogicError, NormalLogicProgram, Rule};

/// A level mapping witnessing local stratification. Levels start at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratification {
    pub level: Vec<u32>,
}

impl Stratification {
    /// Checks the two level conditions against every rule of `p`.
    pub fn is_valid_for(&self, p: &NormalLogicProgram) -> bool {
        self.level.len() == p.num_atoms()
            && self.level.iter().all(|&l| l >= 1)
            && p.rules().iter().all(|r| {
                let h = self.level[r.head];
                r.pos_body.iter().all(|&b| self.level[b] <= h) && r.neg_body.iter().all(|&c| self.level[c] < h)
            })
    }

    pub fn max_level(&self) -> u32 {
        self.level.iter().copied().max().unwrap_or(0)
    }
}

/// Builds a level mapping if one exists.
///
/// Positive and negative body edges are condensed together; a negative edge
/// inside a component means negation through recursion. Otherwise each
/// component sits one level above the highest component it reaches through a
/// negative edge, and no lower than anything it reaches positively.
pub fn find_stratification(p: &NormalLogicProgram) -> Option<Stratification> {
    let n = p.num_atoms();
    // (target, strict)
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for r in p.rules() {
        adj[r.head].extend(r.pos_body.iter().map(|&b| (b, false)));
        adj[r.head].extend(r.neg_body.iter().map(|&c| (c, true)));
    }
    let plain: Vec<Vec<usize>> = adj.iter().map(|es| es.iter().map(|&(t, _)| t).collect()).collect();
    let comps = tarjan_scc(&plain);
    let mut comp_of = vec![0; n];
    for (c, atoms) in comps.iter().enumerate() {
        for &a in atoms {
            comp_of[a] = c;
        }
    }
    // Sinks come first, so every successor component already has its level.
    let mut comp_level = vec![1u32; comps.len()];
    for (c, atoms) in comps.iter().enumerate() {
        let mut level = 1;
        for &a in atoms {
            for &(t, strict) in &adj[a] {
                let d = comp_of[t];
                if d == c {
                    if strict {
                        return None;
                    }
                    continue;
                }
                level = level.max(comp_level[d] + u32::from(strict));
            }
        }
        comp_level[c] = level;
    }
    Some(Stratification { level: (0..n).map(|a| comp_level[comp_of[a]]).collect() })
}

/// Perfect model of a locally stratified program.
pub fn perfect_model(p: &NormalLogicProgram) -> Result<AtomSet, LogicError> {
    let sp = StratifiedProgram::new(p)?;
    Ok(from_bits(&sp.evaluate(&[])))
}

/// A stratified program prepared for repeated evaluation under different
/// sets of extra facts.
#[derive(Debug, Clone)]
pub struct StratifiedProgram {
    n: usize,
    /// Rule indices grouped by the level of their head, ascending.
    strata: Vec<Vec<usize>>,
    rules: Vec<Rule>,
    watch: Vec<Vec<usize>>,
}

impl StratifiedProgram {
    pub fn new(p: &NormalLogicProgram) -> Result<Self, LogicError> {
        let s = find_stratification(p).ok_or(LogicError::NotStratified)?;
        Ok(Self::with_stratification(p, &s))
    }

    pub fn with_stratification(p: &NormalLogicProgram, s: &Stratification) -> Self {
        let mut strata = vec![Vec::new(); s.max_level() as usize];
        for (i, r) in p.rules().iter().enumerate() {
            strata[s.level[r.head] as usize - 1].push(i);
        }
        let mut watch = vec![Vec::new(); p.num_atoms()];
        for (i, r) in p.rules().iter().enumerate() {
            for &b in &r.pos_body {
                watch[b].push(i);
            }
        }
        StratifiedProgram { n: p.num_atoms(), strata, rules: p.rules().to_vec(), watch }
    }

    /// Evaluates strata bottom-up with `facts` added; returns the model as a
    /// membership vector.
    pub fn evaluate(&self, facts: &[usize]) -> Vec<bool> {
        let mut model = vec![false; self.n];
        let mut missing: Vec<usize> = self.rules.iter().map(|r| r.pos_body.len()).collect();
        let mut active = vec![false; self.rules.len()];
        let mut queue = Vec::new();
        let set = |a: usize, model: &mut Vec<bool>, queue: &mut Vec<usize>| {
            if !model[a] {
                model[a] = true;
                queue.push(a);
            }
        };
        for &f in facts {
            set(f, &mut model, &mut queue);
        }
        for stratum in &self.strata {
            // Negative bodies only mention lower strata, which are final here.
            for &i in stratum {
                active[i] = self.rules[i].neg_body.iter().all(|&c| !model[c]);
            }
            // Atoms derived earlier already decremented the counters; fire
            // whatever is complete now.
            for &i in stratum {
                if active[i] && missing[i] == 0 {
                    set(self.rules[i].head, &mut model, &mut queue);
                }
            }
            while let Some(a) = queue.pop() {
                for &i in &self.watch[a] {
                    missing[i] -= 1;
                    if missing[i] == 0 && active[i] {
                        set(self.rules[i].head, &mut model, &mut queue);
                    }
                }
            }
        }
        model
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{p1, p2, set};
    use super::*;

    #[test]
    fn p2_is_stratified() {
        let p = p2();
        let s = find_stratification(&p).unwrap();
        assert!(s.is_valid_for(&p));
        let lv = |l: &str| s.level[p.lookup(l).unwrap()];
        assert_eq!((lv("a"), lv("b"), lv("c")), (2, 1, 1));
    }

    #[test]
    fn p1_is_not_stratified() {
        assert_eq!(find_stratification(&p1()), None);
    }

    #[test]
    fn positive_programs_sit_on_one_level() {
        let p = NormalLogicProgram::parse("a :- b.\nb :- a.\nc :- a.\n").unwrap();
        let s = find_stratification(&p).unwrap();
        assert_eq!(s.level, vec![1, 1, 1]);
    }

    #[test]
    fn negation_through_a_positive_cycle_is_rejected() {
        let p = NormalLogicProgram::parse("a :- not b.\nb :- a.\n").unwrap();
        assert_eq!(find_stratification(&p), None);
    }

    #[test]
    fn perfect_models() {
        let p = p2();
        assert_eq!(perfect_model(&p).unwrap(), set(&p, &["a"]));
        let q = NormalLogicProgram::parse("a :- not b.\n").unwrap();
        assert_eq!(perfect_model(&q).unwrap(), set(&q, &["a"]));
        assert!(perfect_model(&NormalLogicProgram::new()).unwrap().is_empty());
        assert_eq!(perfect_model(&p1()), Err(LogicError::NotStratified));
    }

    #[test]
    fn evaluation_with_extra_facts() {
        let p = p2();
        let sp = StratifiedProgram::new(&p).unwrap();
        let b = p.lookup("b").unwrap();
        assert_eq!(from_bits(&sp.evaluate(&[b])), set(&p, &["b", "c"]));
    }

    #[test]
    fn chained_strata() {
        let p = NormalLogicProgram::parse("d :- not c.\nc :- not b, e.\nb :- not a.\ne.\n").unwrap();
        assert_eq!(perfect_model(&p).unwrap(), set(&p, &["b", "d", "e"]));
    }
}
