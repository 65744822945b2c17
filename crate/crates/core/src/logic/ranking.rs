use std::collections::BTreeMap;

use super::{is_supported, AtomId, AtomSet, LogicError, NormalLogicProgram};

/// Largest model size accepted by the ranking search.
pub const RANKING_CAP: usize = 15;

/// Rank of each atom of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelRanking {
    pub rank: BTreeMap<AtomId, u32>,
}

/// Checks the level-ranking conditions of `ranking` for `m` directly: every
/// atom of `m` needs a support rule whose positive body is ranked strictly
/// lower.
pub fn is_level_ranking(p: &NormalLogicProgram, m: &AtomSet, ranking: &LevelRanking) -> bool {
    m.iter().all(|a| {
        let Some(&ra) = ranking.rank.get(a) else { return false };
        p.rules().iter().filter(|r| r.head == *a && r.body_holds(m)).any(|r| {
            r.pos_body.iter().all(|b| ranking.rank.get(b).is_some_and(|&rb| ra > rb))
        })
    })
}

/// Searches for a level ranking of a supported model `m`.
///
/// Ranks are assigned in derivation rounds over the support rules of `m`:
/// round `k` ranks every atom having a support rule whose positive body was
/// ranked in earlier rounds. The rounds produce the pointwise smallest
/// ranking, so when they stall before covering `m` no ranking exists.
/// Ranks stay within `0..|m|`.
pub fn level_ranking(p: &NormalLogicProgram, m: &AtomSet) -> Result<Option<LevelRanking>, LogicError> {
    if m.len() > RANKING_CAP {
        return Err(LogicError::TooLarge { atoms: m.len(), cap: RANKING_CAP });
    }
    if !is_supported(p, m) {
        return Err(LogicError::NotSupported);
    }
    let rounds = derivation_rounds(p, &super::to_bits(p.num_atoms(), m), &[]);
    let mut rank = BTreeMap::new();
    for &a in m {
        match rounds[a] {
            Some(r) => rank.insert(a, r),
            None => return Ok(None),
        };
    }
    let ranking = LevelRanking { rank };
    debug_assert!(is_level_ranking(p, m, &ranking));
    Ok(Some(ranking))
}

/// Round in which each atom of `m` is first derived from the support rules
/// of `m`, or `None` for atoms outside `m` and atoms the rounds never reach.
/// Atoms of `m` listed in `given` count as derived before round 0.
pub(crate) fn derivation_rounds(p: &NormalLogicProgram, m: &[bool], given: &[AtomId]) -> Vec<Option<u32>> {
    let support: Vec<_> = p.rules().iter().filter(|r| m[r.head] && r.body_holds_in(m)).collect();
    let mut rank: Vec<Option<u32>> = vec![None; p.num_atoms()];
    for &a in given.iter().filter(|&&a| m[a]) {
        rank[a] = Some(0);
    }
    let mut round = 0;
    loop {
        let fresh: Vec<AtomId> = support
            .iter()
            .filter(|r| rank[r.head].is_none())
            .filter(|r| r.pos_body.iter().all(|&b| rank[b].is_some()))
            .map(|r| r.head)
            .collect();
        if fresh.is_empty() {
            return rank;
        }
        for a in fresh {
            rank[a] = Some(round);
        }
        round += 1;
    }
}

pub fn level_ranking_exists(p: &NormalLogicProgram, m: &AtomSet) -> Result<bool, LogicError> {
    Ok(level_ranking(p, m)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{p1, p2, set};
    use super::*;

    #[test]
    fn p2_cycle_has_no_ranking() {
        let p = p2();
        assert_eq!(level_ranking_exists(&p, &set(&p, &["b", "c"])), Ok(false));
    }

    #[test]
    fn p2_answer_set_is_ranked() {
        let p = p2();
        let m = set(&p, &["a"]);
        let r = level_ranking(&p, &m).unwrap().unwrap();
        assert_eq!(r.rank[&p.lookup("a").unwrap()], 0);
        assert!(is_level_ranking(&p, &m, &r));
    }

    #[test]
    fn p1_ranks_follow_derivation() {
        let p = p1();
        let m = set(&p, &["a", "c"]);
        let r = level_ranking(&p, &m).unwrap().unwrap();
        assert_eq!(r.rank[&p.lookup("a").unwrap()], 0);
        assert_eq!(r.rank[&p.lookup("c").unwrap()], 1);
    }

    #[test]
    fn unsupported_input_is_an_error() {
        let p = p1();
        assert_eq!(level_ranking_exists(&p, &AtomSet::new()), Err(LogicError::NotSupported));
    }

    #[test]
    fn cap_is_enforced() {
        let text: String = (0..16).map(|i| format!("x{i}.\n")).collect();
        let p = NormalLogicProgram::parse(&text).unwrap();
        let m: AtomSet = (0..16).collect();
        assert_eq!(level_ranking_exists(&p, &m), Err(LogicError::TooLarge { atoms: 16, cap: 15 }));
    }

    #[test]
    fn checker_rejects_flat_ranks_on_chains() {
        let p = NormalLogicProgram::parse("a.\nb :- a.\n").unwrap();
        let m = set(&p, &["a", "b"]);
        let flat = LevelRanking { rank: [(0, 0), (1, 0)].into_iter().collect() };
        assert!(!is_level_ranking(&p, &m, &flat));
    }
}
