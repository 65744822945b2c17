//! Ground normal logic programs.
//!
//! Programs are small and fully ground: atoms are dense indices with a
//! printable label, rules carry a head, a positive body and a negative body.
//! The functions in this module implement the classical semantics used
//! throughout the crate: reducts, least models, answer sets, supported
//! models, local stratification, the positive dependency graph and level
//! rankings.

mod graph;
mod ranking;
mod semantics;
mod strata;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub use graph::{classify_rules, dependency_graph, tarjan_scc, DependencyGraph, RuleClasses};
pub use ranking::{is_level_ranking, level_ranking, level_ranking_exists, LevelRanking};
pub(crate) use ranking::derivation_rounds;
pub use semantics::{
    enumerate_answer_sets, is_answer_set, is_model, is_supported, least_model, reduct,
    ENUMERATION_CAP,
};
pub use strata::{find_stratification, perfect_model, StratifiedProgram, Stratification};

pub type AtomId = usize;
pub type AtomSet = BTreeSet<AtomId>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("program has {atoms} atoms, above the cap of {cap}")]
    TooLarge { atoms: usize, cap: usize },
    #[error("program is not locally stratified")]
    NotStratified,
    #[error("atom set is not a supported model")]
    NotSupported,
    #[error("rule for `{0}` has an atom in both its positive and negative body")]
    VacuousRule(String),
    #[error("unknown atom id {0}")]
    UnknownAtom(AtomId),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A ground rule `head :- pos_body, not neg_body.`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: AtomId,
    pub pos_body: Vec<AtomId>,
    pub neg_body: Vec<AtomId>,
}

impl Rule {
    pub fn new(head: AtomId, mut pos_body: Vec<AtomId>, mut neg_body: Vec<AtomId>) -> Self {
        pos_body.sort_unstable();
        pos_body.dedup();
        neg_body.sort_unstable();
        neg_body.dedup();
        Rule { head, pos_body, neg_body }
    }

    pub fn fact(head: AtomId) -> Self {
        Rule { head, pos_body: Vec::new(), neg_body: Vec::new() }
    }

    pub fn is_positive(&self) -> bool {
        self.neg_body.is_empty()
    }

    /// Number of body literals, `|B(r)|`.
    pub fn body_len(&self) -> usize {
        self.pos_body.len() + self.neg_body.len()
    }

    pub fn body_holds(&self, m: &AtomSet) -> bool {
        self.pos_body.iter().all(|b| m.contains(b)) && self.neg_body.iter().all(|c| !m.contains(c))
    }

    pub(crate) fn body_holds_in(&self, m: &[bool]) -> bool {
        self.pos_body.iter().all(|&b| m[b]) && self.neg_body.iter().all(|&c| !m[c])
    }
}

/// A ground normal logic program over a dense, labelled atom table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalLogicProgram {
    atoms: Vec<String>,
    index: HashMap<String, AtomId>,
    rules: Vec<Rule>,
}

impl NormalLogicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `label`, declaring it if needed.
    pub fn atom(&mut self, label: &str) -> AtomId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.atoms.len();
        self.atoms.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn lookup(&self, label: &str) -> Option<AtomId> {
        self.index.get(label).copied()
    }

    pub fn add_rule(&mut self, rule: Rule) -> Result<usize, LogicError> {
        for &a in std::iter::once(&rule.head).chain(&rule.pos_body).chain(&rule.neg_body) {
            if a >= self.atoms.len() {
                return Err(LogicError::UnknownAtom(a));
            }
        }
        if rule.pos_body.iter().any(|b| rule.neg_body.binary_search(b).is_ok()) {
            return Err(LogicError::VacuousRule(self.atoms[rule.head].clone()));
        }
        self.rules.push(rule);
        Ok(self.rules.len() - 1)
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn label(&self, id: AtomId) -> &str {
        &self.atoms[id]
    }

    pub fn labels(&self) -> &[String] {
        &self.atoms
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn is_positive(&self) -> bool {
        self.rules.iter().all(Rule::is_positive)
    }

    /// Same atom table, different rules.
    pub(crate) fn with_rules(&self, rules: Vec<Rule>) -> Self {
        NormalLogicProgram { atoms: self.atoms.clone(), index: self.index.clone(), rules }
    }

    /// Labels of `m`, in id order.
    pub fn set_labels(&self, m: &AtomSet) -> Vec<&str> {
        m.iter().map(|&a| self.label(a)).collect()
    }

    /// Atom set from labels; unknown labels are an error.
    pub fn set_of(&self, labels: &[&str]) -> Result<AtomSet, LogicError> {
        labels
            .iter()
            .map(|l| {
                self.lookup(l).ok_or(LogicError::Parse { line: 0, message: format!("unknown atom `{l}`") })
            })
            .collect()
    }

    /// Parses the debug text form: one rule per line, `a :- b, not c.` or `a.`.
    /// `%` starts a comment. Atoms are declared in order of first appearance.
    pub fn parse(text: &str) -> Result<Self, LogicError> {
        let mut p = NormalLogicProgram::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('%').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| LogicError::Parse { line: line_no, message: message.to_string() };
            let line = line.strip_suffix('.').ok_or_else(|| err("missing terminating `.`"))?;
            let (head, body) = match line.split_once(":-") {
                Some((h, b)) => (h.trim(), b.trim()),
                None => (line.trim(), ""),
            };
            if head.is_empty() || !is_label(head) {
                return Err(err("bad rule head"));
            }
            let head = p.atom(head);
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            if !body.is_empty() {
                for lit in body.split(',') {
                    let lit = lit.trim();
                    match lit.strip_prefix("not ") {
                        Some(a) if is_label(a.trim()) => neg.push(p.atom(a.trim())),
                        None if is_label(lit) => pos.push(p.atom(lit)),
                        _ => return Err(err("bad body literal")),
                    }
                }
            }
            p.add_rule(Rule::new(head, pos, neg)).map_err(|e| err(&e.to_string()))?;
        }
        Ok(p)
    }
}

fn is_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || "_()',".contains(c))
}

impl fmt::Display for NormalLogicProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            write!(f, "{}", self.atoms[r.head])?;
            let lits: Vec<String> = r
                .pos_body
                .iter()
                .map(|&b| self.atoms[b].clone())
                .chain(r.neg_body.iter().map(|&c| format!("not {}", self.atoms[c])))
                .collect();
            if !lits.is_empty() {
                write!(f, " :- {}", lits.join(", "))?;
            }
            writeln!(f, ".")?;
        }
        Ok(())
    }
}

pub(crate) fn to_bits(n: usize, m: &AtomSet) -> Vec<bool> {
    let mut bits = vec![false; n];
    for &a in m {
        bits[a] = true;
    }
    bits
}

pub(crate) fn from_bits(bits: &[bool]) -> AtomSet {
    bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}
