//! Fences and connectedness.
//!
//! Two morphisms are adjacent when they share a domain or share a codomain;
//! a fence is a path in that adjacency graph.

use std::collections::VecDeque;

use crate::category::{FinCat, MorphId};
use crate::error::{Error, Result};

/// A non-empty sequence of morphisms, consecutive ones sharing an endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fence {
    steps: Vec<MorphId>,
}

impl Fence {
    pub fn steps(&self) -> &[MorphId] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Checks the alternation invariant against `c`.
    pub fn is_valid_in(&self, c: &FinCat) -> bool {
        !self.steps.is_empty() && self.steps.windows(2).all(|w| adjacent(c, w[0], w[1]))
    }
}

pub fn adjacent(c: &FinCat, f: MorphId, g: MorphId) -> bool {
    c.dom(f) == c.dom(g) || c.cod(f) == c.cod(g)
}

/// Shortest fence from `f` to `g`, or `None` when they are not connected.
pub fn find_fence(c: &FinCat, f: MorphId, g: MorphId) -> Result<Option<Fence>> {
    for m in [f, g] {
        if m.index() >= c.num_morphisms() {
            return Err(Error::UnknownMorphism(format!("#{}", m.0)));
        }
    }
    let n = c.num_morphisms();
    let mut prev: Vec<Option<MorphId>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([f]);
    seen[f.index()] = true;
    while let Some(m) = queue.pop_front() {
        if m == g {
            let mut steps = vec![g];
            let mut cur = g;
            while let Some(p) = prev[cur.index()] {
                steps.push(p);
                cur = p;
            }
            steps.reverse();
            return Ok(Some(Fence { steps }));
        }
        let neighbours = c
            .out_morphisms(c.dom(m))
            .iter()
            .chain(c.in_morphisms(c.cod(m)));
        for &k in neighbours {
            if !seen[k.index()] {
                seen[k.index()] = true;
                prev[k.index()] = Some(m);
                queue.push_back(k);
            }
        }
    }
    Ok(None)
}

/// Component label of every morphism under fence connectivity.
pub fn morphism_components(c: &FinCat) -> (usize, Vec<usize>) {
    let mut uf = UnionFind::new(c.num_morphisms());
    for x in c.objects() {
        for group in [c.out_morphisms(x), c.in_morphisms(x)] {
            if let Some((&first, rest)) = group.split_first() {
                for &m in rest {
                    uf.union(first.index(), m.index());
                }
            }
        }
    }
    uf.labels()
}

/// True iff `c` is non-empty and every pair of morphisms is joined by a fence.
pub fn is_connected(c: &FinCat) -> bool {
    !c.is_empty() && morphism_components(c).0 == 1
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins, keeps labels deterministic
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Dense labels in order of first appearance.
    pub(crate) fn labels(&mut self) -> (usize, Vec<usize>) {
        let n = self.parent.len();
        let mut map = vec![usize::MAX; n];
        let mut labels = vec![0; n];
        let mut count = 0;
        for i in 0..n {
            let r = self.find(i);
            if map[r] == usize::MAX {
                map[r] = count;
                count += 1;
            }
            labels[i] = map[r];
        }
        (count, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::tests::{c2, raw};

    fn v_poset() -> FinCat {
        FinCat::validate(&raw(
            &["x", "y", "z"],
            &[("p", "x", "z"), ("q", "y", "z")],
            &[],
        ))
        .unwrap()
    }

    fn c2_sum() -> FinCat {
        FinCat::validate(&raw(
            &["a", "b", "a2", "b2"],
            &[("f", "a", "b"), ("f2", "a2", "b2")],
            &[],
        ))
        .unwrap()
    }

    /// Brute-force reachability over the adjacency relation.
    fn reachable(c: &FinCat, f: MorphId) -> Vec<bool> {
        let n = c.num_morphisms();
        let mut seen = vec![false; n];
        seen[f.index()] = true;
        loop {
            let mut changed = false;
            for a in c.morphisms() {
                for b in c.morphisms() {
                    if seen[a.index()] && !seen[b.index()] && adjacent(c, a, b) {
                        seen[b.index()] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                return seen;
            }
        }
    }

    #[test]
    fn trivial_fence() {
        let c = c2();
        let f = c.morphism_id("f").unwrap();
        let fence = find_fence(&c, f, f).unwrap().unwrap();
        assert_eq!(fence.steps(), &[f]);
    }

    #[test]
    fn v_poset_fence() {
        let c = v_poset();
        let ix = c.identity(c.object_id("x").unwrap());
        let iy = c.identity(c.object_id("y").unwrap());
        let fence = find_fence(&c, ix, iy).unwrap().unwrap();
        assert!(fence.len() <= 5);
        assert_eq!(fence.len(), 4);
        assert!(fence.is_valid_in(&c));
        assert_eq!(fence.steps()[0], ix);
        assert_eq!(*fence.steps().last().unwrap(), iy);
    }

    #[test]
    fn disjoint_union_has_no_fence() {
        let c = c2_sum();
        let f = c.morphism_id("f").unwrap();
        let f2 = c.morphism_id("f2").unwrap();
        assert_eq!(find_fence(&c, f, f2).unwrap(), None);
        assert!(!is_connected(&c));
        assert!(is_connected(&c2()));
        assert!(is_connected(&v_poset()));
    }

    #[test]
    fn unknown_morphism() {
        let c = c2();
        assert!(matches!(
            find_fence(&c, MorphId(0), MorphId(99)),
            Err(Error::UnknownMorphism(_))
        ));
    }

    #[test]
    fn free_dag_is_connected() {
        let c = FinCat::validate(&raw(
            &["a", "b", "c"],
            &[("u", "a", "b"), ("v", "a", "c")],
            &[],
        ))
        .unwrap();
        assert!(is_connected(&c));
    }

    #[test]
    fn components_match_brute_force() {
        for c in [c2(), v_poset(), c2_sum()] {
            let (count, labels) = morphism_components(&c);
            for f in c.morphisms() {
                let seen = reachable(&c, f);
                for g in c.morphisms() {
                    assert_eq!(seen[g.index()], labels[f.index()] == labels[g.index()]);
                    assert_eq!(seen[g.index()], find_fence(&c, f, g).unwrap().is_some());
                }
            }
            assert_eq!(is_connected(&c), count == 1);
        }
    }

    #[test]
    fn empty_category_is_not_connected() {
        let c = FinCat::validate(&crate::category::RawCategory::default()).unwrap();
        assert!(!is_connected(&c));
    }
}
