//! Prime factorization of connected loop-free categories.
//!
//! Candidate binary splittings come from the object poset: the Hasse
//! diagram of a product is the Cartesian product of the factors' Hasse
//! diagrams, so every splitting is a grouping of the graph's prime edge
//! classes. Those classes are the transitive closure of the
//! Djoković–Winkler relation together with the "no common square" relation
//! on incident edges. Each grouping gives a pair of object partitions, the
//! factors are taken as full subcategories through the base object, and a
//! seeded isomorphism search decides whether the splitting lifts to
//! morphisms.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::category::{FinCat, MorphId, ObjectId};
use crate::error::{Error, Result};
use crate::fence::{is_connected, UnionFind};
use crate::functor::{full_subcategory, Functor};
use crate::iso::find_isomorphism;
use crate::product::{product, product_numbered, Decomposition, ProductCat};

/// Default cap on the size of categories handed to the factorizer.
pub const DEFAULT_MAX_MORPHISMS: usize = 2000;

/// The factorization size cap, overridable through `LFCAT_MAX_MORPHISMS`.
pub fn max_morphisms() -> usize {
    std::env::var("LFCAT_MAX_MORPHISMS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_MORPHISMS)
}

/// Object-level shadow of a binary splitting: `theta1[x]` and `theta2[x]`
/// are class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPair {
    pub theta1: Vec<usize>,
    pub theta2: Vec<usize>,
}

impl PartitionPair {
    fn classes(labels: &[usize]) -> usize {
        labels.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn theta1_classes(&self) -> usize {
        Self::classes(&self.theta1)
    }

    pub fn theta2_classes(&self) -> usize {
        Self::classes(&self.theta2)
    }

    /// Product of class counts equals the object count, every pair of
    /// classes meets exactly once, and classes are equinumerous.
    pub fn is_valid(&self) -> bool {
        let n = self.theta1.len();
        if self.theta2.len() != n {
            return false;
        }
        let (k1, k2) = (self.theta1_classes(), self.theta2_classes());
        if k1 * k2 != n {
            return false;
        }
        let mut hit = vec![false; n];
        for x in 0..n {
            let cell = self.theta1[x] * k2 + self.theta2[x];
            if hit[cell] {
                return false;
            }
            hit[cell] = true;
        }
        // unique intersection plus k1·k2 = n forces equal class sizes
        true
    }

    pub fn is_trivial(&self) -> bool {
        self.theta1_classes() == 1 || self.theta2_classes() == 1
    }
}

/// Undirected Hasse diagram of the object poset.
fn hasse_edges(c: &FinCat) -> Vec<(usize, usize)> {
    let n = c.num_objects();
    let mut less = vec![vec![false; n]; n];
    for f in c.morphisms() {
        let (x, y) = (c.dom(f).index(), c.cod(f).index());
        if x != y {
            less[x][y] = true;
        }
    }
    let mut edges = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if less[x][y] && !(0..n).any(|z| less[x][z] && less[z][y]) {
                edges.push((x, y));
            }
        }
    }
    edges
}

/// Prime edge classes of a connected graph; `labels[e]` per edge.
fn product_classes(n: usize, edges: &[(usize, usize)]) -> (usize, Vec<usize>) {
    let mut adj = vec![Vec::new(); n];
    for &(x, y) in edges {
        adj[x].push(y);
        adj[y].push(x);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    let dist: Vec<Vec<usize>> = (0..n)
        .map(|src| {
            let mut d = vec![usize::MAX; n];
            d[src] = 0;
            let mut q = VecDeque::from([src]);
            while let Some(v) = q.pop_front() {
                for &w in &adj[v] {
                    if d[w] == usize::MAX {
                        d[w] = d[v] + 1;
                        q.push_back(w);
                    }
                }
            }
            d
        })
        .collect();
    let m = edges.len();
    let mut uf = UnionFind::new(m);
    for i in 0..m {
        let (x, y) = edges[i];
        for j in (i + 1)..m {
            let (u, v) = edges[j];
            if dist[x][u] + dist[y][v] != dist[x][v] + dist[y][u] {
                uf.union(i, j);
            }
        }
    }
    let mut edge_at = HashMap::new();
    for (i, &(x, y)) in edges.iter().enumerate() {
        edge_at.insert((x.min(y), x.max(y)), i);
    }
    let edge_id = |a: usize, b: usize| edge_at[&(a.min(b), a.max(b))];
    for x in 0..n {
        let nb = &adj[x];
        for (i, &y) in nb.iter().enumerate() {
            for &z in &nb[i + 1..] {
                let shares_square = adj[y]
                    .iter()
                    .any(|&w| w != x && adj[z].binary_search(&w).is_ok());
                if !shares_square {
                    uf.union(edge_id(x, y), edge_id(x, z));
                }
            }
        }
    }
    uf.labels()
}

fn components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut uf = UnionFind::new(n);
    for (x, y) in edges {
        uf.union(x, y);
    }
    uf.labels().1
}

/// Every partition pair induced by a splitting of the object poset's Hasse
/// diagram, in a fixed order, the two trivial pairs last.
pub fn candidate_partition_pairs(c: &FinCat) -> Result<Vec<PartitionPair>> {
    if c.is_empty() {
        return Err(Error::EmptyCategory);
    }
    if !is_connected(c) {
        return Err(Error::NotConnected("category".into()));
    }
    let n = c.num_objects();
    let edges = hasse_edges(c);
    let (k, class) = product_classes(n, &edges);
    let mut out = Vec::new();
    if k > 1 {
        // class 0 always sits on the first side
        for mask in 1u64..(1u64 << (k - 1)) {
            let on_b = |e: usize| class[e] > 0 && mask & (1 << (class[e] - 1)) != 0;
            let theta2 = components(
                n,
                edges
                    .iter()
                    .enumerate()
                    .filter(|(e, _)| !on_b(*e))
                    .map(|(_, &p)| p),
            );
            let theta1 = components(
                n,
                edges
                    .iter()
                    .enumerate()
                    .filter(|(e, _)| on_b(*e))
                    .map(|(_, &p)| p),
            );
            let pair = PartitionPair { theta1, theta2 };
            if pair.is_valid() {
                out.push(pair);
            }
        }
    }
    let one = vec![0; n];
    let singletons: Vec<usize> = (0..n).collect();
    out.push(PartitionPair {
        theta1: singletons.clone(),
        theta2: one.clone(),
    });
    if n > 1 {
        out.push(PartitionPair {
            theta1: one,
            theta2: singletons,
        });
    }
    Ok(out)
}

/// `C ≅ A × B` with `A` and `B` full subcategories of `C` through `s`.
#[derive(Debug, Clone)]
pub struct BinaryDecomposition {
    pub a: Arc<FinCat>,
    pub b: Arc<FinCat>,
    pub a_inclusion: Functor,
    pub b_inclusion: Functor,
    pub product: ProductCat,
    pub iso: Functor,
    pub pair: PartitionPair,
    /// `s` seen inside `a` and inside `b`.
    pub s_a: ObjectId,
    pub s_b: ObjectId,
}

fn check_input(c: &FinCat) -> Result<()> {
    if c.is_empty() {
        return Err(Error::EmptyCategory);
    }
    let limit = max_morphisms();
    if c.num_morphisms() > limit {
        return Err(Error::SizeExceeded {
            what: "factorization input".into(),
            needed: c.num_morphisms() as u128,
            limit,
        });
    }
    if !is_connected(c) {
        return Err(Error::NotConnected("category".into()));
    }
    Ok(())
}

/// First non-trivial splitting of `c` that lifts to an isomorphism, if any.
/// `s` defaults to the object with the least token.
pub fn binary_decomposition(
    c: &Arc<FinCat>,
    s: Option<ObjectId>,
) -> Result<Option<BinaryDecomposition>> {
    check_input(c)?;
    let s = resolve_base(c, s)?;
    for pair in candidate_partition_pairs(c)? {
        if pair.is_trivial() {
            continue;
        }
        if let Some(d) = try_pair(c, s, pair)? {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

fn resolve_base(c: &FinCat, s: Option<ObjectId>) -> Result<ObjectId> {
    match s {
        Some(s) if s.index() < c.num_objects() => Ok(s),
        Some(s) => Err(Error::UnknownObject(format!("#{}", s.0))),
        None => c
            .objects()
            .min_by(|a, b| c.object_name(*a).cmp(c.object_name(*b)))
            .ok_or(Error::EmptyCategory),
    }
}

fn try_pair(
    c: &Arc<FinCat>,
    s: ObjectId,
    pair: PartitionPair,
) -> Result<Option<BinaryDecomposition>> {
    let n = c.num_objects();
    let si = s.index();
    let a_objs: Vec<ObjectId> = (0..n)
        .filter(|&x| pair.theta2[x] == pair.theta2[si])
        .map(|x| ObjectId(x as u32))
        .collect();
    let b_objs: Vec<ObjectId> = (0..n)
        .filter(|&x| pair.theta1[x] == pair.theta1[si])
        .map(|x| ObjectId(x as u32))
        .collect();
    // local index of the A-slice object carrying each theta1 class, and dually
    let mut a_of_class = vec![ObjectId(0); pair.theta1_classes()];
    for (i, x) in a_objs.iter().enumerate() {
        a_of_class[pair.theta1[x.index()]] = ObjectId(i as u32);
    }
    let mut b_of_class = vec![ObjectId(0); pair.theta2_classes()];
    for (i, x) in b_objs.iter().enumerate() {
        b_of_class[pair.theta2[x.index()]] = ObjectId(i as u32);
    }
    let (a, a_inclusion) = full_subcategory(c, &a_objs)?;
    let (b, b_inclusion) = full_subcategory(c, &b_objs)?;
    if a.num_morphisms() * b.num_morphisms() != c.num_morphisms() {
        return Ok(None);
    }
    let product = product(vec![("1".into(), a.clone()), ("2".into(), b.clone())])?;
    let seed: Vec<(ObjectId, ObjectId)> = c
        .objects()
        .map(|x| {
            let t = [
                a_of_class[pair.theta1[x.index()]],
                b_of_class[pair.theta2[x.index()]],
            ];
            (x, product.object_of(&t))
        })
        .collect();
    let Some(iso) = find_isomorphism(c, product.carrier(), &seed)? else {
        return Ok(None);
    };
    let s_a = a_of_class[pair.theta1[si]];
    let s_b = b_of_class[pair.theta2[si]];
    Ok(Some(BinaryDecomposition {
        a,
        b,
        a_inclusion,
        b_inclusion,
        product,
        iso,
        pair,
        s_a,
        s_b,
    }))
}

/// A decomposition of `base` into prime factors.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub base: Arc<FinCat>,
    pub base_object: ObjectId,
    pub factors: Vec<Arc<FinCat>>,
    pub decomposition: Decomposition,
    pub irreducible: Vec<bool>,
}

impl Factorization {
    /// True for the terminal category, which has no prime factors.
    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }
}

struct Split {
    factors: Vec<Arc<FinCat>>,
    omap: Vec<Vec<ObjectId>>,
    mmap: Vec<Vec<MorphId>>,
}

fn split(c: &Arc<FinCat>, s: ObjectId) -> Result<Split> {
    if c.is_terminal() {
        return Ok(Split {
            factors: Vec::new(),
            omap: vec![Vec::new()],
            mmap: vec![Vec::new()],
        });
    }
    let Some(d) = binary_decomposition(c, Some(s))? else {
        return Ok(Split {
            factors: vec![c.clone()],
            omap: c.objects().map(|x| vec![x]).collect(),
            mmap: c.morphisms().map(|f| vec![f]).collect(),
        });
    };
    let left = split(&d.a, d.s_a)?;
    let right = split(&d.b, d.s_b)?;
    let p = &d.product;
    let omap = c
        .objects()
        .map(|x| {
            let t = d.iso.obj(x);
            let mut v = left.omap[p.object_component(t, 0).index()].clone();
            v.extend_from_slice(&right.omap[p.object_component(t, 1).index()]);
            v
        })
        .collect();
    let mmap = c
        .morphisms()
        .map(|f| {
            let t = d.iso.mor(f);
            let mut v = left.mmap[p.morphism_component(t, 0).index()].clone();
            v.extend_from_slice(&right.mmap[p.morphism_component(t, 1).index()]);
            v
        })
        .collect();
    let mut factors = left.factors;
    factors.extend(right.factors);
    Ok(Split {
        factors,
        omap,
        mmap,
    })
}

/// Sort key for factors: object count, morphism count, then the sorted
/// in/out degree profile.
fn factor_key(c: &FinCat) -> (usize, usize, Vec<(usize, usize)>) {
    let mut profile: Vec<(usize, usize)> = c
        .objects()
        .map(|x| (c.in_morphisms(x).len(), c.out_morphisms(x).len()))
        .collect();
    profile.sort_unstable();
    (c.num_objects(), c.num_morphisms(), profile)
}

/// Splits `c` into prime factors through base object `s` (default: the
/// object with the least token). Factors are ordered canonically, ties
/// keeping discovery order.
pub fn prime_factorization(c: &Arc<FinCat>, s: Option<ObjectId>) -> Result<Factorization> {
    check_input(c)?;
    let s = resolve_base(c, s)?;
    let sp = split(c, s)?;
    let mut order: Vec<usize> = (0..sp.factors.len()).collect();
    let keys: Vec<_> = sp.factors.iter().map(|f| factor_key(f)).collect();
    order.sort_by(|&i, &j| keys[i].cmp(&keys[j]));
    let factors: Vec<Arc<FinCat>> = order.iter().map(|&i| sp.factors[i].clone()).collect();
    let prod = product_numbered(factors.clone())?;
    let iso = Functor::from_maps_unchecked(
        c.clone(),
        prod.carrier().clone(),
        sp.omap
            .iter()
            .map(|t| prod.object_of(&order.iter().map(|&i| t[i]).collect::<Vec<_>>()))
            .collect(),
        sp.mmap
            .iter()
            .map(|t| prod.morphism_of(&order.iter().map(|&i| t[i]).collect::<Vec<_>>()))
            .collect(),
    );
    let decomposition = Decomposition::new(c.clone(), prod, iso)?;
    let irreducible = vec![true; factors.len()];
    Ok(Factorization {
        base: c.clone(),
        base_object: s,
        factors,
        decomposition,
        irreducible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reducibility {
    /// The terminal category.
    Unit,
    Prime,
    Composite,
}

pub fn classify(c: &Arc<FinCat>) -> Result<Reducibility> {
    check_input(c)?;
    if c.is_terminal() {
        return Ok(Reducibility::Unit);
    }
    Ok(match binary_decomposition(c, None)? {
        Some(_) => Reducibility::Composite,
        None => Reducibility::Prime,
    })
}

pub fn is_irreducible(c: &Arc<FinCat>) -> Result<bool> {
    Ok(classify(c)? == Reducibility::Prime)
}
