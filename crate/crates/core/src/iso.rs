//! Isomorphism search between finite loop-free categories.
//!
//! Objects are matched first (colour refinement over hom-set sizes, then
//! backtracking with hom-count consistency), then morphisms hom-set by
//! hom-set in order of increasing height difference. A composite's image is
//! forced by its factors, so only indecomposable morphisms ever branch.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::category::{FinCat, MorphId, ObjectId};
use crate::error::{Error, Result};
use crate::functor::Functor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsoOptions {
    /// `None` disables the limit.
    pub time_limit: Option<Duration>,
}

impl Default for IsoOptions {
    fn default() -> Self {
        IsoOptions {
            time_limit: Some(Duration::from_secs(10)),
        }
    }
}

/// Some isomorphism `c → d` extending `seed`, or `None`.
pub fn find_isomorphism(
    c: &Arc<FinCat>,
    d: &Arc<FinCat>,
    seed: &[(ObjectId, ObjectId)],
) -> Result<Option<Functor>> {
    find_isomorphism_with(c, d, seed, &IsoOptions::default())
}

pub fn find_isomorphism_with(
    c: &Arc<FinCat>,
    d: &Arc<FinCat>,
    seed: &[(ObjectId, ObjectId)],
    opts: &IsoOptions,
) -> Result<Option<Functor>> {
    let seed = check_seed(c, d, seed)?;
    if c.num_objects() != d.num_objects() || c.num_morphisms() != d.num_morphisms() {
        return Ok(None);
    }
    if hom_profile(c) != hom_profile(d) {
        return Ok(None);
    }
    let (cc, dc) = match refine_colours(c, d, &seed) {
        Some(v) => v,
        None => return Ok(None),
    };
    let mut s = Search {
        c,
        d,
        cc,
        dc,
        omap: vec![None; c.num_objects()],
        used_obj: vec![false; d.num_objects()],
        clock: Clock::new(opts.time_limit),
        plan_c: MorphPlan::new(c),
        plan_d: MorphPlan::new(d),
    };
    for &(x, y) in &seed {
        // hom counts among seeded pairs must already agree
        for &(x2, y2) in &seed {
            if c.hom(x, x2).len() != d.hom(y, y2).len() {
                return Ok(None);
            }
        }
        s.omap[x.index()] = Some(y);
        s.used_obj[y.index()] = true;
    }
    let found = s.objects()?;
    Ok(found.map(|(omap, mmap)| {
        let f = Functor::from_maps_unchecked(c.clone(), d.clone(), omap, mmap);
        debug_assert!(f.violations().is_empty() && f.is_isomorphism());
        f
    }))
}

fn check_seed(
    c: &FinCat,
    d: &FinCat,
    seed: &[(ObjectId, ObjectId)],
) -> Result<Vec<(ObjectId, ObjectId)>> {
    let mut fwd: BTreeMap<ObjectId, ObjectId> = BTreeMap::new();
    let mut bwd: BTreeMap<ObjectId, ObjectId> = BTreeMap::new();
    for &(x, y) in seed {
        if x.index() >= c.num_objects() {
            return Err(Error::SeedInconsistent(format!(
                "source object #{} out of range",
                x.0
            )));
        }
        if y.index() >= d.num_objects() {
            return Err(Error::SeedInconsistent(format!(
                "target object #{} out of range",
                y.0
            )));
        }
        if let Some(&prev) = fwd.get(&x) {
            if prev != y {
                return Err(Error::SeedInconsistent(format!(
                    "`{}` seeded to both `{}` and `{}`",
                    c.object_name(x),
                    d.object_name(prev),
                    d.object_name(y)
                )));
            }
        }
        if let Some(&prev) = bwd.get(&y) {
            if prev != x {
                return Err(Error::SeedInconsistent(format!(
                    "`{}` and `{}` both seeded to `{}`",
                    c.object_name(prev),
                    c.object_name(x),
                    d.object_name(y)
                )));
            }
        }
        fwd.insert(x, y);
        bwd.insert(y, x);
    }
    Ok(fwd.into_iter().collect())
}

/// Sorted multiset of non-empty hom-set sizes.
fn hom_profile(c: &FinCat) -> Vec<usize> {
    let mut v: Vec<usize> = Vec::new();
    for x in c.objects() {
        let mut seen: HashMap<ObjectId, usize> = HashMap::new();
        for &f in c.out_morphisms(x) {
            *seen.entry(c.cod(f)).or_default() += 1;
        }
        v.extend(seen.into_values());
    }
    v.sort_unstable();
    v
}

/// Joint colour refinement on the disjoint union of `c` and `d`. Seeded
/// pairs start with a private colour. Returns `None` when the colour
/// histograms disagree.
fn refine_colours(
    c: &FinCat,
    d: &FinCat,
    seed: &[(ObjectId, ObjectId)],
) -> Option<(Vec<u32>, Vec<u32>)> {
    let n = c.num_objects();
    let mut seed_rank_c = vec![0u32; n];
    let mut seed_rank_d = vec![0u32; n];
    for (i, &(x, y)) in seed.iter().enumerate() {
        seed_rank_c[x.index()] = i as u32 + 1;
        seed_rank_d[y.index()] = i as u32 + 1;
    }
    // per object: (codomain, multiplicity) out and (domain, multiplicity) in
    type Adjacency = (Vec<(ObjectId, u32)>, Vec<(ObjectId, u32)>);
    let neighbours = |cat: &FinCat| -> Vec<Adjacency> {
        cat.objects()
            .map(|x| {
                let mut out: BTreeMap<ObjectId, u32> = BTreeMap::new();
                let mut inc: BTreeMap<ObjectId, u32> = BTreeMap::new();
                for &f in cat.out_morphisms(x) {
                    if !cat.is_identity(f) {
                        *out.entry(cat.cod(f)).or_default() += 1;
                    }
                }
                for &f in cat.in_morphisms(x) {
                    if !cat.is_identity(f) {
                        *inc.entry(cat.dom(f)).or_default() += 1;
                    }
                }
                (out.into_iter().collect(), inc.into_iter().collect())
            })
            .collect()
    };
    let nc = neighbours(c);
    let nd = neighbours(d);
    let mut cc: Vec<u32> = seed_rank_c;
    let mut dc: Vec<u32> = seed_rank_d;
    let mut classes = 0usize;
    loop {
        type Sig = (u32, Vec<(u32, u32)>, Vec<(u32, u32)>);
        let sig = |col: &[u32], nb: &[Adjacency], x: usize| -> Sig {
            let mut out: Vec<(u32, u32)> =
                nb[x].0.iter().map(|&(y, k)| (k, col[y.index()])).collect();
            let mut inc: Vec<(u32, u32)> =
                nb[x].1.iter().map(|&(y, k)| (k, col[y.index()])).collect();
            out.sort_unstable();
            inc.sort_unstable();
            (col[x], out, inc)
        };
        let sc: Vec<Sig> = (0..n).map(|x| sig(&cc, &nc, x)).collect();
        let sd: Vec<Sig> = (0..n).map(|x| sig(&dc, &nd, x)).collect();
        let mut palette: BTreeMap<&Sig, (u32, i64)> = BTreeMap::new();
        for s in &sc {
            palette.entry(s).or_insert((0, 0)).1 += 1;
        }
        for s in &sd {
            palette.entry(s).or_insert((0, 0)).1 -= 1;
        }
        if palette.values().any(|&(_, bal)| bal != 0) {
            return None;
        }
        for (i, v) in palette.values_mut().enumerate() {
            v.0 = i as u32;
        }
        let new_classes = palette.len();
        let ncc: Vec<u32> = sc.iter().map(|s| palette[s].0).collect();
        let ndc: Vec<u32> = sd.iter().map(|s| palette[s].0).collect();
        cc = ncc;
        dc = ndc;
        if new_classes == classes {
            return Some((cc, dc));
        }
        classes = new_classes;
    }
}

struct Clock {
    start: Instant,
    limit: Option<Duration>,
    ticks: u32,
}

impl Clock {
    fn new(limit: Option<Duration>) -> Self {
        Clock {
            start: Instant::now(),
            limit,
            ticks: 0,
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks.is_multiple_of(256) {
            if let Some(limit) = self.limit {
                if self.start.elapsed() > limit {
                    return Err(Error::Timeout(limit));
                }
            }
        }
        Ok(())
    }
}

/// Per-category data for the morphism phase.
struct MorphPlan {
    /// Non-identity morphisms ordered by height difference.
    order: Vec<MorphId>,
    /// Non-identity factorizations `f = g ∘ h` for each `f`.
    splits: Vec<Vec<(MorphId, MorphId)>>,
}

impl MorphPlan {
    fn new(c: &FinCat) -> Self {
        let height = heights(c);
        let mut splits = vec![Vec::new(); c.num_morphisms()];
        for (g, h, f) in c.composition_table() {
            if !c.is_identity(g) && !c.is_identity(h) {
                splits[f.index()].push((g, h));
            }
        }
        for s in &mut splits {
            s.sort_unstable();
        }
        let mut order: Vec<MorphId> = c.morphisms().filter(|&f| !c.is_identity(f)).collect();
        order.sort_by_key(|&f| {
            (
                height[c.cod(f).index()] - height[c.dom(f).index()],
                c.dom(f),
                c.cod(f),
                f,
            )
        });
        MorphPlan { order, splits }
    }
}

/// Length of the longest chain of non-identity morphisms ending at each object.
pub(crate) fn heights(c: &FinCat) -> Vec<usize> {
    let n = c.num_objects();
    let mut indeg = vec![0usize; n];
    for f in c.morphisms() {
        if !c.is_identity(f) {
            indeg[c.cod(f).index()] += 1;
        }
    }
    let mut h = vec![0usize; n];
    let mut stack: Vec<ObjectId> = c.objects().filter(|x| indeg[x.index()] == 0).collect();
    while let Some(x) = stack.pop() {
        for &f in c.out_morphisms(x) {
            if c.is_identity(f) {
                continue;
            }
            let y = c.cod(f).index();
            h[y] = h[y].max(h[x.index()] + 1);
            indeg[y] -= 1;
            if indeg[y] == 0 {
                stack.push(ObjectId(y as u32));
            }
        }
    }
    h
}

struct Search<'a> {
    c: &'a FinCat,
    d: &'a FinCat,
    cc: Vec<u32>,
    dc: Vec<u32>,
    omap: Vec<Option<ObjectId>>,
    used_obj: Vec<bool>,
    clock: Clock,
    plan_c: MorphPlan,
    plan_d: MorphPlan,
}

type Maps = (Vec<ObjectId>, Vec<MorphId>);

impl Search<'_> {
    fn next_object(&self) -> Option<ObjectId> {
        let c = self.c;
        let mut class_size: HashMap<u32, usize> = HashMap::new();
        for x in c.objects() {
            if self.omap[x.index()].is_none() {
                *class_size.entry(self.cc[x.index()]).or_default() += 1;
            }
        }
        c.objects()
            .filter(|x| self.omap[x.index()].is_none())
            .max_by_key(|&x| {
                let assigned = c
                    .out_morphisms(x)
                    .iter()
                    .map(|&f| c.cod(f))
                    .chain(c.in_morphisms(x).iter().map(|&f| c.dom(f)))
                    .filter(|y| *y != x && self.omap[y.index()].is_some())
                    .count();
                (
                    assigned,
                    std::cmp::Reverse(class_size[&self.cc[x.index()]]),
                    std::cmp::Reverse(x),
                )
            })
    }

    fn consistent(&self, x: ObjectId, y: ObjectId) -> bool {
        if self.c.hom(x, x).len() != self.d.hom(y, y).len() {
            return false;
        }
        self.c.objects().all(|x2| match self.omap[x2.index()] {
            None => true,
            Some(y2) => {
                self.c.hom(x, x2).len() == self.d.hom(y, y2).len()
                    && self.c.hom(x2, x).len() == self.d.hom(y2, y).len()
            }
        })
    }

    fn objects(&mut self) -> Result<Option<Maps>> {
        self.clock.tick()?;
        let Some(x) = self.next_object() else {
            let omap: Vec<ObjectId> = self.omap.iter().map(|o| o.expect("assigned")).collect();
            return self.morphisms(&omap).map(|m| m.map(|mm| (omap, mm)));
        };
        let colour = self.cc[x.index()];
        for y in self.d.objects() {
            if self.used_obj[y.index()] || self.dc[y.index()] != colour || !self.consistent(x, y) {
                continue;
            }
            self.omap[x.index()] = Some(y);
            self.used_obj[y.index()] = true;
            if let Some(found) = self.objects()? {
                return Ok(Some(found));
            }
            self.omap[x.index()] = None;
            self.used_obj[y.index()] = false;
        }
        Ok(None)
    }

    fn morphisms(&mut self, omap: &[ObjectId]) -> Result<Option<Vec<MorphId>>> {
        let (c, d) = (self.c, self.d);
        let mut mmap: Vec<Option<MorphId>> = vec![None; c.num_morphisms()];
        let mut used = vec![false; d.num_morphisms()];
        for x in c.objects() {
            let (i, j) = (c.identity(x), d.identity(omap[x.index()]));
            mmap[i.index()] = Some(j);
            used[j.index()] = true;
        }
        let order = self.plan_c.order.clone();
        if self.assign(&order, 0, omap, &mut mmap, &mut used)? {
            Ok(Some(mmap.into_iter().map(|m| m.expect("total")).collect()))
        } else {
            Ok(None)
        }
    }

    fn assign(
        &mut self,
        order: &[MorphId],
        k: usize,
        omap: &[ObjectId],
        mmap: &mut Vec<Option<MorphId>>,
        used: &mut Vec<bool>,
    ) -> Result<bool> {
        self.clock.tick()?;
        let Some(&f) = order.get(k) else {
            return Ok(true);
        };
        let (c, d) = (self.c, self.d);
        let splits = &self.plan_c.splits[f.index()];
        if let Some(&(g, h)) = splits.first() {
            let forced = d
                .compose(
                    mmap[g.index()].expect("smaller"),
                    mmap[h.index()].expect("smaller"),
                )
                .expect("composable images");
            if used[forced.index()] {
                return Ok(false);
            }
            for &(g2, h2) in &splits[1..] {
                let other = d.compose(
                    mmap[g2.index()].expect("smaller"),
                    mmap[h2.index()].expect("smaller"),
                );
                if other != Some(forced) {
                    return Ok(false);
                }
            }
            mmap[f.index()] = Some(forced);
            used[forced.index()] = true;
            let ok = self.assign(order, k + 1, omap, mmap, used)?;
            if !ok {
                mmap[f.index()] = None;
                used[forced.index()] = false;
            }
            return Ok(ok);
        }
        let (x, y) = (omap[c.dom(f).index()], omap[c.cod(f).index()]);
        let candidates: Vec<MorphId> = d
            .hom(x, y)
            .iter()
            .copied()
            .filter(|&g| !used[g.index()] && self.plan_d.splits[g.index()].is_empty())
            .collect();
        for g in candidates {
            mmap[f.index()] = Some(g);
            used[g.index()] = true;
            if self.assign(order, k + 1, omap, mmap, used)? {
                return Ok(true);
            }
            used[g.index()] = false;
        }
        mmap[f.index()] = None;
        Ok(false)
    }
}

/// True when an isomorphism exists.
pub fn are_isomorphic(c: &Arc<FinCat>, d: &Arc<FinCat>) -> Result<bool> {
    Ok(find_isomorphism(c, d, &[])?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::tests::{c2, raw};
    use crate::product::product_numbered;

    fn c3() -> Arc<FinCat> {
        Arc::new(
            FinCat::validate(&raw(
                &["0", "1", "2"],
                &[("u", "0", "1"), ("v", "1", "2"), ("w", "0", "2")],
                &[("v", "u", "w")],
            ))
            .unwrap(),
        )
    }

    fn reversed_names(c: &FinCat) -> Arc<FinCat> {
        // same tables, but relabel through a permutation of declaration order
        let raw = c.to_raw();
        let mut r = raw.clone();
        r.objects.reverse();
        r.morphisms.reverse();
        for o in &mut r.objects {
            *o = format!("o_{o}");
        }
        for m in &mut r.morphisms {
            m.name = format!("m_{}", m.name);
            m.dom = format!("o_{}", m.dom);
            m.cod = format!("o_{}", m.cod);
        }
        r.identities = raw
            .identities
            .iter()
            .map(|(k, v)| (format!("o_{k}"), format!("m_{v}")))
            .collect();
        for t in &mut r.comp {
            for s in t.iter_mut() {
                *s = format!("m_{s}");
            }
        }
        Arc::new(FinCat::validate(&r).unwrap())
    }

    #[test]
    fn c2_to_itself() {
        let c = Arc::new(c2());
        let f = find_isomorphism(&c, &c, &[]).unwrap().unwrap();
        assert_eq!(f, Functor::identity(&c));
    }

    #[test]
    fn c2_vs_c3() {
        assert!(find_isomorphism(&Arc::new(c2()), &c3(), &[])
            .unwrap()
            .is_none());
    }

    #[test]
    fn shuffled_product() {
        let p = product_numbered(vec![Arc::new(c2()), c3()]).unwrap();
        let c = p.carrier().clone();
        let d = reversed_names(&c);
        let f = find_isomorphism(&c, &d, &[]).unwrap().unwrap();
        assert!(f.violations().is_empty());
        assert!(f.is_isomorphism());
        let back = find_isomorphism(&d, &c, &[]).unwrap().unwrap();
        assert!(back.is_isomorphism());
    }

    #[test]
    fn seed_is_respected_or_refused() {
        let p = product_numbered(vec![Arc::new(c2()), Arc::new(c2())]).unwrap();
        let c = p.carrier().clone();
        let ab = c.object_id("(a,b)").unwrap();
        let ba = c.object_id("(b,a)").unwrap();
        let aa = c.object_id("(a,a)").unwrap();
        let swap = find_isomorphism(&c, &c, &[(ab, ba)]).unwrap().unwrap();
        assert_eq!(swap.obj(ab), ba);
        assert_eq!(swap.obj(ba), ab);
        // bottom cannot go to a middle element
        assert!(find_isomorphism(&c, &c, &[(aa, ab)]).unwrap().is_none());
        assert!(matches!(
            find_isomorphism(&c, &c, &[(aa, aa), (aa, ab)]),
            Err(Error::SeedInconsistent(_))
        ));
        assert!(matches!(
            find_isomorphism(&c, &c, &[(aa, aa), (ab, aa)]),
            Err(Error::SeedInconsistent(_))
        ));
    }

    #[test]
    fn parallel_arrows_are_matched() {
        // two parallel arrows with composites through a middle object
        let c = Arc::new(
            FinCat::validate(&raw(
                &["x", "y", "z"],
                &[
                    ("p", "x", "y"),
                    ("q", "x", "y"),
                    ("r", "y", "z"),
                    ("rp", "x", "z"),
                    ("rq", "x", "z"),
                ],
                &[("r", "p", "rp"), ("r", "q", "rq")],
            ))
            .unwrap(),
        );
        let d = reversed_names(&c);
        let f = find_isomorphism(&c, &d, &[]).unwrap().unwrap();
        assert!(f.violations().is_empty());
        assert!(f.is_isomorphism());
    }

    #[test]
    fn non_isomorphic_with_same_counts() {
        // both have 3 objects, 5 morphisms: V and Λ
        let v = Arc::new(
            FinCat::validate(&raw(
                &["x", "y", "z"],
                &[("p", "x", "z"), ("q", "y", "z")],
                &[],
            ))
            .unwrap(),
        );
        let l = Arc::new(
            FinCat::validate(&raw(
                &["x", "y", "z"],
                &[("p", "z", "x"), ("q", "z", "y")],
                &[],
            ))
            .unwrap(),
        );
        assert!(find_isomorphism(&v, &l, &[]).unwrap().is_none());
    }
}
