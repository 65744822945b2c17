use super::{AtomId, NormalLogicProgram};

/// Positive dependency graph: an edge `⟨a, b⟩` for every rule with head `a`
/// and `b` in its positive body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub edges: Vec<(AtomId, AtomId)>,
    /// Component id of each atom, indexing `components`.
    pub scc_of: Vec<usize>,
    /// Strongly connected components, dependencies first: for every edge
    /// `⟨a, b⟩`, `scc_of[b] <= scc_of[a]`. Atoms inside a component are sorted.
    pub components: Vec<Vec<AtomId>>,
}

impl DependencyGraph {
    pub fn scc(&self, a: AtomId) -> &[AtomId] {
        &self.components[self.scc_of[a]]
    }

    pub fn same_scc(&self, a: AtomId, b: AtomId) -> bool {
        self.scc_of[a] == self.scc_of[b]
    }
}

pub fn dependency_graph(p: &NormalLogicProgram) -> DependencyGraph {
    let n = p.num_atoms();
    let mut edges: Vec<(AtomId, AtomId)> =
        p.rules().iter().flat_map(|r| r.pos_body.iter().map(move |&b| (r.head, b))).collect();
    edges.sort_unstable();
    edges.dedup();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adj[a].push(b);
    }
    let mut components = tarjan_scc(&adj);
    let mut scc_of = vec![0; n];
    for (c, comp) in components.iter_mut().enumerate() {
        comp.sort_unstable();
        for &a in comp.iter() {
            scc_of[a] = c;
        }
    }
    DependencyGraph { edges, scc_of, components }
}

/// Tarjan's algorithm, iterative. Components come out sinks first: if an
/// edge `u -> v` crosses components, `v`'s component is listed before `u`'s.
pub fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    // (vertex, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        while let Some(&(v, pos)) = call.last() {
            if pos == 0 && index[v] == UNVISITED {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(pos) {
                call.last_mut().expect("non-empty").1 += 1;
                if index[w] == UNVISITED {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                out.push(comp);
            }
        }
    }
    out
}

/// Defining rules of one atom, split by whether they reach back into the
/// atom's own component.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleClasses {
    pub def: Vec<usize>,
    pub ext: Vec<usize>,
    pub int: Vec<usize>,
    /// `(r, SCC(a) ∩ B+(r))` for every `r` in `int`.
    pub internal_support: Vec<(usize, Vec<AtomId>)>,
}

pub fn classify_rules(p: &NormalLogicProgram, g: &DependencyGraph, a: AtomId) -> RuleClasses {
    let mut out = RuleClasses::default();
    for (i, r) in p.rules().iter().enumerate().filter(|(_, r)| r.head == a) {
        out.def.push(i);
        let inside: Vec<AtomId> = r.pos_body.iter().copied().filter(|&b| g.same_scc(a, b)).collect();
        if inside.is_empty() {
            out.ext.push(i);
        } else {
            out.int.push(i);
            out.internal_support.push((i, inside));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{p1, p2};
    use super::*;

    fn comps(p: &NormalLogicProgram, g: &DependencyGraph) -> Vec<Vec<String>> {
        g.components.iter().map(|c| c.iter().map(|&a| p.label(a).to_string()).collect()).collect()
    }

    #[test]
    fn graph_of_p2() {
        let p = p2();
        let g = dependency_graph(&p);
        let (b, c) = (p.lookup("b").unwrap(), p.lookup("c").unwrap());
        assert_eq!(g.edges, vec![(b, c), (c, b)]);
        let mut cs = comps(&p, &g);
        cs.sort();
        assert_eq!(cs, vec![vec!["a".to_string()], vec!["b".to_string(), "c".to_string()]]);
    }

    #[test]
    fn graph_of_p1_has_singletons() {
        let p = p1();
        let g = dependency_graph(&p);
        let (a, c) = (p.lookup("a").unwrap(), p.lookup("c").unwrap());
        assert_eq!(g.edges, vec![(c, a)]);
        assert_eq!(g.components.len(), 3);
        assert!(g.scc_of[a] < g.scc_of[c]);
    }

    #[test]
    fn ruleless_atoms_are_singletons() {
        let mut p = NormalLogicProgram::new();
        p.atom("x");
        p.atom("y");
        let g = dependency_graph(&p);
        assert!(g.edges.is_empty());
        assert_eq!(g.components.len(), 2);
    }

    #[test]
    fn classification_in_p2() {
        let p = p2();
        let g = dependency_graph(&p);
        let a = classify_rules(&p, &g, p.lookup("a").unwrap());
        assert_eq!((a.def.clone(), a.ext.clone(), a.int.clone()), (vec![0], vec![0], vec![]));
        let b = classify_rules(&p, &g, p.lookup("b").unwrap());
        assert_eq!((b.def.clone(), b.int.clone()), (vec![1], vec![1]));
        let c = classify_rules(&p, &g, p.lookup("c").unwrap());
        assert_eq!((c.def.clone(), c.ext.clone(), c.int.clone()), (vec![2], vec![], vec![2]));
        assert_eq!(c.internal_support, vec![(2, vec![p.lookup("b").unwrap()])]);
    }

    #[test]
    fn atom_without_rules_has_empty_classes() {
        let mut p = NormalLogicProgram::new();
        let x = p.atom("x");
        let g = dependency_graph(&p);
        assert_eq!(classify_rules(&p, &g, x), RuleClasses::default());
    }

    #[test]
    fn tarjan_orders_sinks_first() {
        // 0 -> 1 -> 2 -> 1, 3 -> 0
        let adj = vec![vec![1], vec![2], vec![1], vec![0]];
        let mut comps = tarjan_scc(&adj);
        for c in &mut comps {
            c.sort();
        }
        assert_eq!(comps, vec![vec![1, 2], vec![0], vec![3]]);
    }

    #[test]
    fn tarjan_handles_long_chains() {
        let n = 100_000;
        let adj: Vec<Vec<usize>> = (0..n).map(|i| if i + 1 < n { vec![i + 1] } else { vec![0] }).collect();
        assert_eq!(tarjan_scc(&adj).len(), 1);
    }
}
