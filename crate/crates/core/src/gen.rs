//! Deterministic generators for test and benchmark categories.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::category::{FinCat, MorphId, ObjectId};
use crate::error::{Error, Result};
use crate::fence::is_connected;
use crate::functor::Functor;
use crate::product::{product, product_numbered, Decomposition, ProductCat};

const MAX_GENERATED_MORPHISMS: usize = 200_000;
const CONNECT_ATTEMPTS: usize = 1_000;

/// The chain `0 < 1 < … < n-1` as a poset category. Morphisms are named
/// `i→j`, identities `id_i`.
pub fn chain(n: usize) -> Result<FinCat> {
    if n == 0 {
        return Err(Error::ParamOutOfRange(
            "chain length must be positive".into(),
        ));
    }
    let less: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i < j).collect()).collect();
    Ok(poset_category(&less))
}

/// The product of chains of the given lengths.
pub fn grid(dims: &[usize]) -> Result<FinCat> {
    if dims.is_empty() {
        return Err(Error::ParamOutOfRange(
            "grid needs at least one dimension".into(),
        ));
    }
    let chains = dims
        .iter()
        .map(|&d| chain(d).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    Ok((**product_numbered(chains)?.carrier()).clone())
}

/// Category of a strict order given as a relation matrix; `less` must be
/// transitive and irreflexive.
fn poset_category(less: &[Vec<bool>]) -> FinCat {
    let n = less.len();
    let objects: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let mut morphisms = Vec::new();
    let mut at = HashMap::new();
    let mut identities = Vec::with_capacity(n);
    for i in 0..n {
        at.insert((i, i), MorphId(morphisms.len() as u32));
        identities.push(MorphId(morphisms.len() as u32));
        morphisms.push((format!("id_{i}"), ObjectId(i as u32), ObjectId(i as u32)));
    }
    for i in 0..n {
        for j in 0..n {
            if less[i][j] {
                at.insert((i, j), MorphId(morphisms.len() as u32));
                morphisms.push((format!("{i}→{j}"), ObjectId(i as u32), ObjectId(j as u32)));
            }
        }
    }
    let mut comp = HashMap::new();
    for (&(i, j), &f) in &at {
        for k in 0..n {
            if let Some(&g) = at.get(&(j, k)) {
                comp.insert((g, f), at[&(i, k)]);
            }
        }
    }
    FinCat::from_tables(objects, morphisms, identities, comp)
}

fn check_density(density: f64) -> Result<()> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::ParamOutOfRange(format!(
            "density {density} not in (0, 1]"
        )));
    }
    Ok(())
}

/// Random DAG on `0..n` (edges only go upward) whose underlying graph is
/// connected; rejection sampling.
fn connected_dag(n: usize, density: f64, rng: &mut impl Rng) -> Result<Vec<(usize, usize)>> {
    if n == 0 {
        return Err(Error::ParamOutOfRange("size must be positive".into()));
    }
    check_density(density)?;
    let mut last = None;
    let mut edges = Vec::new();
    for _ in 0..CONNECT_ATTEMPTS {
        edges.clear();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(density) {
                    edges.push((i, j));
                }
            }
        }
        let mut uf = crate::fence::UnionFind::new(n);
        for &(i, j) in &edges {
            uf.union(i, j);
        }
        let (count, labels) = uf.labels();
        if count == 1 {
            return Ok(edges);
        }
        last = Some(labels);
    }
    // sparse regime: join the components of the last sample through their
    // least vertices, oriented upwards
    let labels = last.expect("at least one attempt");
    let mut firsts: Vec<usize> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (v, &l) in labels.iter().enumerate() {
        if seen.insert(l) {
            firsts.push(v);
        }
    }
    for w in firsts.windows(2) {
        edges.push((w[0], w[1]));
    }
    Ok(edges)
}

/// Free category on a random connected DAG. Morphisms are the paths, named
/// by their vertex sequence (`0→2→3`).
pub fn free_dag(n: usize, density: f64, seed: u64) -> Result<FinCat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = connected_dag(n, density, &mut rng)?;
    free_category(n, &edges)
}

fn free_category(n: usize, edges: &[(usize, usize)]) -> Result<FinCat> {
    let mut succ = vec![Vec::new(); n];
    for &(i, j) in edges {
        succ[i].push(j);
    }
    // paths[i] = every path starting at i, as vertex sequences
    let mut paths: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    for i in (0..n).rev() {
        let mut here = vec![vec![i]];
        for &j in &succ[i] {
            for p in &paths[j] {
                let mut q = Vec::with_capacity(p.len() + 1);
                q.push(i);
                q.extend_from_slice(p);
                here.push(q);
            }
        }
        if here.len() > MAX_GENERATED_MORPHISMS {
            return Err(Error::SizeExceeded {
                what: "free category".into(),
                needed: here.len() as u128,
                limit: MAX_GENERATED_MORPHISMS,
            });
        }
        paths[i] = here;
    }
    let total: usize = paths.iter().map(Vec::len).sum();
    if total > MAX_GENERATED_MORPHISMS {
        return Err(Error::SizeExceeded {
            what: "free category".into(),
            needed: total as u128,
            limit: MAX_GENERATED_MORPHISMS,
        });
    }
    let mut all: Vec<Vec<usize>> = paths.into_iter().flatten().collect();
    all.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    let index: HashMap<&[usize], MorphId> = all
        .iter()
        .enumerate()
        .map(|(k, p)| (p.as_slice(), MorphId(k as u32)))
        .collect();
    let objects = (0..n).map(|i| i.to_string()).collect();
    let morphisms = all
        .iter()
        .map(|p| {
            let name = if p.len() == 1 {
                format!("id_{}", p[0])
            } else {
                p.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("→")
            };
            (
                name,
                ObjectId(p[0] as u32),
                ObjectId(*p.last().unwrap() as u32),
            )
        })
        .collect();
    let identities = (0..n).map(|i| index[[i].as_slice()]).collect();
    let mut by_start: Vec<Vec<&Vec<usize>>> = vec![Vec::new(); n];
    for p in &all {
        by_start[p[0]].push(p);
    }
    let mut comp = HashMap::new();
    for f in &all {
        for g in &by_start[*f.last().unwrap()] {
            let mut h = f.clone();
            h.extend_from_slice(&g[1..]);
            comp.insert(
                (index[g.as_slice()], index[f.as_slice()]),
                index[h.as_slice()],
            );
        }
    }
    Ok(FinCat::from_tables(objects, morphisms, identities, comp))
}

/// Transitive closure of a random connected DAG, as a poset category.
pub fn random_poset(n: usize, density: f64, seed: u64) -> Result<FinCat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = connected_dag(n, density, &mut rng)?;
    let mut less = vec![vec![false; n]; n];
    for &(i, j) in &edges {
        less[i][j] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if less[i][k] {
                for j in 0..n {
                    if less[k][j] {
                        less[i][j] = true;
                    }
                }
            }
        }
    }
    Ok(poset_category(&less))
}

/// A copy of `c` with permuted tables and fresh tokens (`prefix` + number),
/// with the isomorphism from `c` onto it.
pub fn shuffled_copy(c: &Arc<FinCat>, prefix: &str, rng: &mut impl Rng) -> (Arc<FinCat>, Functor) {
    let mut operm: Vec<usize> = (0..c.num_objects()).collect();
    operm.shuffle(rng);
    let mut mperm: Vec<usize> = (0..c.num_morphisms()).collect();
    mperm.shuffle(rng);
    // operm[old] = new
    let mut objects = vec![String::new(); c.num_objects()];
    for x in c.objects() {
        objects[operm[x.index()]] = format!("{prefix}o{}", operm[x.index()]);
    }
    let mut morphisms = vec![(String::new(), ObjectId(0), ObjectId(0)); c.num_morphisms()];
    for f in c.morphisms() {
        let k = mperm[f.index()];
        morphisms[k] = (
            format!("{prefix}m{k}"),
            ObjectId(operm[c.dom(f).index()] as u32),
            ObjectId(operm[c.cod(f).index()] as u32),
        );
    }
    let mut identities = vec![MorphId(0); c.num_objects()];
    for x in c.objects() {
        identities[operm[x.index()]] = MorphId(mperm[c.identity(x).index()] as u32);
    }
    let comp = c
        .composition_table()
        .map(|(g, f, h)| {
            let m = |k: MorphId| MorphId(mperm[k.index()] as u32);
            ((m(g), m(f)), m(h))
        })
        .collect();
    let copy = Arc::new(FinCat::from_tables(objects, morphisms, identities, comp));
    let iso = Functor::from_maps_unchecked(
        c.clone(),
        copy.clone(),
        operm.iter().map(|&k| ObjectId(k as u32)).collect(),
        mperm.iter().map(|&k| MorphId(k as u32)).collect(),
    );
    (copy, iso)
}

/// A random connected loop-free category with at least two objects and at
/// most `max_morphisms` morphisms: either a random poset or the free
/// category on a random DAG.
pub fn random_connected_factor(max_morphisms: usize, rng: &mut impl Rng) -> Result<FinCat> {
    if max_morphisms < 3 {
        return Err(Error::ParamOutOfRange(
            "a non-terminal factor needs at least 3 morphisms".into(),
        ));
    }
    for _ in 0..CONNECT_ATTEMPTS {
        let n = rng.gen_range(2..=5);
        let density = rng.gen_range(0.3..=1.0);
        let seed = rng.gen();
        let c = if rng.gen_bool(0.5) {
            random_poset(n, density, seed)?
        } else {
            match free_dag(n, density, seed) {
                Ok(c) => c,
                Err(Error::SizeExceeded { .. }) => continue,
                Err(e) => return Err(e),
            }
        };
        if c.num_morphisms() <= max_morphisms {
            return Ok(c);
        }
    }
    Err(Error::ParamOutOfRange(format!(
        "no factor with at most {max_morphisms} morphisms found"
    )))
}

/// An ordered set partition of `0..n` into non-empty groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    pub groups: Vec<Vec<usize>>,
}

impl Grouping {
    pub fn identity(n: usize) -> Self {
        Grouping {
            groups: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let mut leaves: Vec<usize> = (0..n).collect();
        leaves.shuffle(rng);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for leaf in leaves {
            if groups.is_empty() || rng.gen_bool(0.5) {
                groups.push(vec![leaf]);
            } else {
                let k = rng.gen_range(0..groups.len());
                groups[k].push(leaf);
            }
        }
        Grouping { groups }
    }
}

/// Decomposition of `leaves.carrier()` onto `∏_groups ∏_{i∈group} copy_i`,
/// where `copies[i]: leaf_i ≅ copy_i`. Outer indices are `names[k]`, inner
/// indices the leaf numbers.
pub fn grouped_decomposition(
    leaves: &ProductCat,
    grouping: &Grouping,
    copies: &[Functor],
    names: &[String],
) -> Result<Decomposition> {
    let groups: Vec<ProductCat> = grouping
        .groups
        .iter()
        .map(|g| {
            product(
                g.iter()
                    .map(|&i| (format!("{}", i + 1), copies[i].target().clone()))
                    .collect(),
            )
        })
        .collect::<Result<_>>()?;
    let outer = product(
        names
            .iter()
            .cloned()
            .zip(groups.iter().map(|g| g.carrier().clone()))
            .collect(),
    )?;
    let c = leaves.carrier();
    let omap = c
        .objects()
        .map(|x| {
            let t: Vec<ObjectId> = grouping
                .groups
                .iter()
                .zip(&groups)
                .map(|(g, p)| {
                    p.object_of(
                        &g.iter()
                            .map(|&i| copies[i].obj(leaves.object_component(x, i)))
                            .collect::<Vec<_>>(),
                    )
                })
                .collect();
            outer.object_of(&t)
        })
        .collect();
    let mmap = c
        .morphisms()
        .map(|f| {
            let t: Vec<MorphId> = grouping
                .groups
                .iter()
                .zip(&groups)
                .map(|(g, p)| {
                    p.morphism_of(
                        &g.iter()
                            .map(|&i| copies[i].mor(leaves.morphism_component(f, i)))
                            .collect::<Vec<_>>(),
                    )
                })
                .collect();
            outer.morphism_of(&t)
        })
        .collect();
    let iso = Functor::from_maps_unchecked(c.clone(), outer.carrier().clone(), omap, mmap);
    Decomposition::new(c.clone(), outer, iso)
}

/// Random regrouping of `leaves` with shuffled factor copies.
pub fn random_decomposition(
    leaves: &ProductCat,
    tag: &str,
    rng: &mut impl Rng,
) -> Result<Decomposition> {
    let n = leaves.arity();
    let grouping = Grouping::random(n, rng);
    let copies: Vec<Functor> = (0..n)
        .map(|i| shuffled_copy(leaves.factor(i), &format!("{tag}{}", i + 1), rng).1)
        .collect();
    let names: Vec<String> = (0..grouping.groups.len())
        .map(|k| format!("{tag}{}", k + 1))
        .collect();
    grouped_decomposition(leaves, &grouping, &copies, &names)
}

/// `k` random connected factors and their product.
pub fn random_leaves(k: usize, max_morphisms: usize, rng: &mut impl Rng) -> Result<ProductCat> {
    let factors = (0..k)
        .map(|_| random_connected_factor(max_morphisms, rng).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    product_numbered(factors)
}

/// Checks that a generated category is usable as a factor.
pub fn is_usable_factor(c: &FinCat) -> bool {
    c.num_objects() >= 2 && is_connected(c) && c.violations().is_empty()
}
