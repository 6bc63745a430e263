//! Functors between finite categories, and subcategories.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::category::{FinCat, MorphId, ObjectId};
use crate::error::{Error, Result};
use crate::fence::is_connected;

/// Object and morphism maps keyed by token; unvalidated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawFunctor {
    pub omap: BTreeMap<String, String>,
    pub mmap: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctorViolation {
    #[error("dangling reference `{token}` in {context}")]
    DanglingReference { context: String, token: String },
    #[error("object `{0}` has no image")]
    MissingObject(String),
    #[error("morphism `{0}` has no image")]
    MissingMorphism(String),
    #[error("not functorial: {0}")]
    NotFunctorial(String),
}

/// A structure-preserving map between two [`FinCat`]s.
#[derive(Debug, Clone)]
pub struct Functor {
    source: Arc<FinCat>,
    target: Arc<FinCat>,
    omap: Vec<ObjectId>,
    mmap: Vec<MorphId>,
}

impl PartialEq for Functor {
    fn eq(&self, other: &Self) -> bool {
        same_cat(&self.source, &other.source)
            && same_cat(&self.target, &other.target)
            && self.omap == other.omap
            && self.mmap == other.mmap
    }
}

pub(crate) fn same_cat(a: &Arc<FinCat>, b: &Arc<FinCat>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Functor {
    /// Checked constructor.
    pub fn new(
        source: Arc<FinCat>,
        target: Arc<FinCat>,
        omap: Vec<ObjectId>,
        mmap: Vec<MorphId>,
    ) -> Result<Functor> {
        let f = Self::from_maps_unchecked(source, target, omap, mmap);
        let v = f.violations();
        if v.is_empty() {
            Ok(f)
        } else {
            Err(Error::InvalidFunctor(v))
        }
    }

    /// Wraps the given tables without checking functoriality. Use
    /// [`Functor::violations`] to audit the result.
    pub fn from_maps_unchecked(
        source: Arc<FinCat>,
        target: Arc<FinCat>,
        omap: Vec<ObjectId>,
        mmap: Vec<MorphId>,
    ) -> Functor {
        Functor {
            source,
            target,
            omap,
            mmap,
        }
    }

    pub fn identity(c: &Arc<FinCat>) -> Functor {
        Functor {
            source: c.clone(),
            target: c.clone(),
            omap: c.objects().collect(),
            mmap: c.morphisms().collect(),
        }
    }

    /// Resolves token maps against `source` and `target`, then checks
    /// functoriality. Every problem found is reported.
    pub fn validate(
        raw: &RawFunctor,
        source: Arc<FinCat>,
        target: Arc<FinCat>,
    ) -> std::result::Result<Functor, Vec<FunctorViolation>> {
        let f = Self::resolve(raw, source, target)?;
        let v = f.violations();
        if v.is_empty() {
            Ok(f)
        } else {
            Err(v)
        }
    }

    /// Token resolution only: the maps must be total and refer to existing
    /// tokens, but functoriality is not checked.
    pub fn resolve(
        raw: &RawFunctor,
        source: Arc<FinCat>,
        target: Arc<FinCat>,
    ) -> std::result::Result<Functor, Vec<FunctorViolation>> {
        let mut violations = Vec::new();
        let mut omap = vec![None; source.num_objects()];
        for (k, v) in &raw.omap {
            let x = source.object_id(k);
            let y = target.object_id(v);
            match (x, y) {
                (Some(x), Some(y)) => omap[x.index()] = Some(y),
                (None, _) => violations.push(FunctorViolation::DanglingReference {
                    context: "omap source".into(),
                    token: k.clone(),
                }),
                (_, None) => violations.push(FunctorViolation::DanglingReference {
                    context: format!("omap image of `{k}`"),
                    token: v.clone(),
                }),
            }
        }
        let mut mmap = vec![None; source.num_morphisms()];
        for (k, v) in &raw.mmap {
            let f = source.morphism_id(k);
            let g = target.morphism_id(v);
            match (f, g) {
                (Some(f), Some(g)) => mmap[f.index()] = Some(g),
                (None, _) => violations.push(FunctorViolation::DanglingReference {
                    context: "mmap source".into(),
                    token: k.clone(),
                }),
                (_, None) => violations.push(FunctorViolation::DanglingReference {
                    context: format!("mmap image of `{k}`"),
                    token: v.clone(),
                }),
            }
        }
        for x in source.objects() {
            if omap[x.index()].is_none() {
                violations.push(FunctorViolation::MissingObject(
                    source.object_name(x).into(),
                ));
            }
        }
        for f in source.morphisms() {
            // identities may be omitted: they follow from the object map
            if mmap[f.index()].is_none() {
                if let (true, Some(y)) = (source.is_identity(f), omap[source.dom(f).index()]) {
                    mmap[f.index()] = Some(target.identity(y));
                } else {
                    violations.push(FunctorViolation::MissingMorphism(
                        source.morphism_name(f).into(),
                    ));
                }
            }
        }
        if !violations.is_empty() {
            return Err(violations);
        }
        Ok(Functor::from_maps_unchecked(
            source,
            target,
            omap.into_iter().map(Option::unwrap).collect(),
            mmap.into_iter().map(Option::unwrap).collect(),
        ))
    }

    /// Every functoriality failure, in source table order.
    pub fn violations(&self) -> Vec<FunctorViolation> {
        let (s, t) = (&*self.source, &*self.target);
        let mut out = Vec::new();
        if self.omap.len() != s.num_objects() || self.mmap.len() != s.num_morphisms() {
            out.push(FunctorViolation::NotFunctorial("maps are not total".into()));
            return out;
        }
        if self.omap.iter().any(|y| y.index() >= t.num_objects())
            || self.mmap.iter().any(|g| g.index() >= t.num_morphisms())
        {
            out.push(FunctorViolation::NotFunctorial(
                "image outside target".into(),
            ));
            return out;
        }
        for x in s.objects() {
            if self.mor(s.identity(x)) != t.identity(self.obj(x)) {
                out.push(FunctorViolation::NotFunctorial(format!(
                    "identity of `{}` not preserved",
                    s.object_name(x)
                )));
            }
        }
        for f in s.morphisms() {
            let g = self.mor(f);
            if t.dom(g) != self.obj(s.dom(f)) {
                out.push(FunctorViolation::NotFunctorial(format!(
                    "dom of `{}` not preserved",
                    s.morphism_name(f)
                )));
            }
            if t.cod(g) != self.obj(s.cod(f)) {
                out.push(FunctorViolation::NotFunctorial(format!(
                    "cod of `{}` not preserved",
                    s.morphism_name(f)
                )));
            }
        }
        if !out.is_empty() {
            return out;
        }
        let mut table: Vec<_> = s.composition_table().collect();
        table.sort_unstable();
        for (g, f, gf) in table {
            if t.compose(self.mor(g), self.mor(f)) != Some(self.mor(gf)) {
                out.push(FunctorViolation::NotFunctorial(format!(
                    "composite ({}, {}) not preserved",
                    s.morphism_name(g),
                    s.morphism_name(f)
                )));
            }
        }
        out
    }

    pub fn source(&self) -> &Arc<FinCat> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FinCat> {
        &self.target
    }

    #[inline]
    pub fn obj(&self, x: ObjectId) -> ObjectId {
        self.omap[x.index()]
    }

    #[inline]
    pub fn mor(&self, f: MorphId) -> MorphId {
        self.mmap[f.index()]
    }

    pub fn object_map(&self) -> &[ObjectId] {
        &self.omap
    }

    pub fn morphism_map(&self) -> &[MorphId] {
        &self.mmap
    }

    /// Token-keyed maps, the inverse of [`Functor::validate`].
    pub fn to_raw(&self) -> RawFunctor {
        RawFunctor {
            omap: self
                .source
                .objects()
                .map(|x| {
                    (
                        self.source.object_name(x).to_string(),
                        self.target.object_name(self.obj(x)).to_string(),
                    )
                })
                .collect(),
            mmap: self
                .source
                .morphisms()
                .map(|f| {
                    (
                        self.source.morphism_name(f).to_string(),
                        self.target.morphism_name(self.mor(f)).to_string(),
                    )
                })
                .collect(),
        }
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Functor) -> Result<Functor> {
        compose(self, inner)
    }

    pub fn is_isomorphism(&self) -> bool {
        is_bijection(&self.omap, self.target.num_objects(), |o| o.index())
            && is_bijection(&self.mmap, self.target.num_morphisms(), |m| m.index())
    }

    pub fn invert(&self) -> Result<Functor> {
        if !self.is_isomorphism() {
            return Err(Error::NotInvertible(format!(
                "{} objects / {} morphisms onto {} / {}",
                self.source.num_objects(),
                self.source.num_morphisms(),
                self.target.num_objects(),
                self.target.num_morphisms()
            )));
        }
        let mut omap = vec![ObjectId(0); self.omap.len()];
        for (i, y) in self.omap.iter().enumerate() {
            omap[y.index()] = ObjectId(i as u32);
        }
        let mut mmap = vec![MorphId(0); self.mmap.len()];
        for (i, g) in self.mmap.iter().enumerate() {
            mmap[g.index()] = MorphId(i as u32);
        }
        Ok(Functor {
            source: self.target.clone(),
            target: self.source.clone(),
            omap,
            mmap,
        })
    }

    /// The image, provided it is closed under composition.
    pub fn image(&self) -> Result<Subcat> {
        Subcat::new(
            self.target.clone(),
            self.omap.iter().copied().collect(),
            self.mmap.iter().copied().collect(),
        )
    }

    /// True iff every hom-set is mapped onto the corresponding hom-set.
    pub fn is_full(&self) -> bool {
        let (s, t) = (&*self.source, &*self.target);
        for x in s.objects() {
            for y in s.objects() {
                let img: BTreeSet<MorphId> = s.hom(x, y).iter().map(|&f| self.mor(f)).collect();
                if img.len() != t.hom(self.obj(x), self.obj(y)).len() {
                    return false;
                }
            }
        }
        true
    }

    /// True iff the morphism map is injective.
    pub fn is_faithful(&self) -> bool {
        let set: BTreeSet<MorphId> = self.mmap.iter().copied().collect();
        set.len() == self.mmap.len()
    }

    /// Replaces the target by `new_target`, mapping through `embed`, which
    /// sends old target tokens to new ones.
    pub(crate) fn with_target(
        &self,
        new_target: Arc<FinCat>,
        omap: impl Fn(ObjectId) -> ObjectId,
        mmap: impl Fn(MorphId) -> MorphId,
    ) -> Functor {
        Functor {
            source: self.source.clone(),
            target: new_target,
            omap: self.omap.iter().map(|&o| omap(o)).collect(),
            mmap: self.mmap.iter().map(|&m| mmap(m)).collect(),
        }
    }
}

fn is_bijection<T>(map: &[T], target_len: usize, idx: impl Fn(&T) -> usize) -> bool {
    if map.len() != target_len {
        return false;
    }
    let mut hit = vec![false; target_len];
    for v in map {
        let i = idx(v);
        if i >= target_len || hit[i] {
            return false;
        }
        hit[i] = true;
    }
    true
}

/// `outer ∘ inner`; requires `target(inner) = source(outer)`.
pub fn compose(outer: &Functor, inner: &Functor) -> Result<Functor> {
    if !same_cat(&inner.target, &outer.source) {
        return Err(Error::SourceTargetMismatch(format!(
            "inner target {:?} vs outer source {:?}",
            inner.target, outer.source
        )));
    }
    Ok(Functor {
        source: inner.source.clone(),
        target: outer.target.clone(),
        omap: inner.omap.iter().map(|&x| outer.obj(x)).collect(),
        mmap: inner.mmap.iter().map(|&f| outer.mor(f)).collect(),
    })
}

/// A subcategory of a parent [`FinCat`], closed under endpoints,
/// identities and composition.
#[derive(Debug, Clone)]
pub struct Subcat {
    parent: Arc<FinCat>,
    objects: BTreeSet<ObjectId>,
    morphisms: BTreeSet<MorphId>,
    full: bool,
}

impl Subcat {
    pub fn new(
        parent: Arc<FinCat>,
        objects: BTreeSet<ObjectId>,
        morphisms: BTreeSet<MorphId>,
    ) -> Result<Subcat> {
        let p = &*parent;
        for &x in &objects {
            if x.index() >= p.num_objects() {
                return Err(Error::UnknownObject(format!("#{}", x.0)));
            }
            if !morphisms.contains(&p.identity(x)) {
                return Err(Error::PreconditionViolated(format!(
                    "subcategory misses the identity of `{}`",
                    p.object_name(x)
                )));
            }
        }
        for &f in &morphisms {
            if f.index() >= p.num_morphisms() {
                return Err(Error::UnknownMorphism(format!("#{}", f.0)));
            }
            if !objects.contains(&p.dom(f)) || !objects.contains(&p.cod(f)) {
                return Err(Error::PreconditionViolated(format!(
                    "subcategory misses an endpoint of `{}`",
                    p.morphism_name(f)
                )));
            }
        }
        for &f in &morphisms {
            for &g in p.out_morphisms(p.cod(f)) {
                if morphisms.contains(&g) {
                    let gf = p.compose(g, f).expect("composable");
                    if !morphisms.contains(&gf) {
                        return Err(Error::PreconditionViolated(format!(
                            "subcategory not closed under composition of ({}, {})",
                            p.morphism_name(g),
                            p.morphism_name(f)
                        )));
                    }
                }
            }
        }
        let full = objects.iter().all(|&x| {
            objects
                .iter()
                .all(|&y| p.hom(x, y).iter().all(|f| morphisms.contains(f)))
        });
        Ok(Subcat {
            parent,
            objects,
            morphisms,
            full,
        })
    }

    /// The full subcategory on `objects`.
    pub fn full_on(parent: Arc<FinCat>, objects: BTreeSet<ObjectId>) -> Result<Subcat> {
        let mut morphisms = BTreeSet::new();
        for &x in &objects {
            if x.index() >= parent.num_objects() {
                return Err(Error::UnknownObject(format!("#{}", x.0)));
            }
            for &f in parent.out_morphisms(x) {
                if objects.contains(&parent.cod(f)) {
                    morphisms.insert(f);
                }
            }
        }
        Subcat::new(parent, objects, morphisms)
    }

    pub fn parent(&self) -> &Arc<FinCat> {
        &self.parent
    }

    pub fn objects(&self) -> &BTreeSet<ObjectId> {
        &self.objects
    }

    pub fn morphisms(&self) -> &BTreeSet<MorphId> {
        &self.morphisms
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn contains_morphism(&self, f: MorphId) -> bool {
        self.morphisms.contains(&f)
    }

    pub fn is_connected(&self) -> bool {
        is_connected(&self.extract().category)
    }

    /// Materializes the subcategory as a standalone [`FinCat`] keeping the
    /// parent's tokens and order.
    pub fn extract(&self) -> Extracted {
        let p = &*self.parent;
        let local_obj: HashMap<ObjectId, ObjectId> = self
            .objects
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, ObjectId(i as u32)))
            .collect();
        let local_mor: HashMap<MorphId, MorphId> = self
            .morphisms
            .iter()
            .enumerate()
            .map(|(i, &f)| (f, MorphId(i as u32)))
            .collect();
        let objects = self
            .objects
            .iter()
            .map(|&x| p.object_name(x).to_string())
            .collect();
        let morphisms = self
            .morphisms
            .iter()
            .map(|&f| {
                (
                    p.morphism_name(f).to_string(),
                    local_obj[&p.dom(f)],
                    local_obj[&p.cod(f)],
                )
            })
            .collect();
        let identities = self
            .objects
            .iter()
            .map(|&x| local_mor[&p.identity(x)])
            .collect();
        let mut comp = HashMap::new();
        for &f in &self.morphisms {
            for &g in p.out_morphisms(p.cod(f)) {
                if let Some(&lg) = local_mor.get(&g) {
                    let gf = p.compose(g, f).expect("composable");
                    comp.insert((lg, local_mor[&f]), local_mor[&gf]);
                }
            }
        }
        let category = Arc::new(FinCat::from_tables(objects, morphisms, identities, comp));
        let inclusion = Functor {
            source: category.clone(),
            target: self.parent.clone(),
            omap: self.objects.iter().copied().collect(),
            mmap: self.morphisms.iter().copied().collect(),
        };
        Extracted {
            category,
            inclusion,
            local_obj,
            local_mor,
        }
    }
}

/// A [`Subcat`] turned into its own category, with the inclusion functor.
#[derive(Debug, Clone)]
pub struct Extracted {
    pub category: Arc<FinCat>,
    pub inclusion: Functor,
    local_obj: HashMap<ObjectId, ObjectId>,
    local_mor: HashMap<MorphId, MorphId>,
}

impl Extracted {
    pub fn local_object(&self, x: ObjectId) -> Option<ObjectId> {
        self.local_obj.get(&x).copied()
    }

    pub fn local_morphism(&self, f: MorphId) -> Option<MorphId> {
        self.local_mor.get(&f).copied()
    }

    /// Factors `f` through the inclusion; fails if the image of `f` leaves
    /// the subcategory.
    pub fn corestrict(&self, f: &Functor) -> Result<Functor> {
        if !same_cat(f.target(), self.inclusion.target()) {
            return Err(Error::SourceTargetMismatch(
                "corestriction onto a subcategory of another category".into(),
            ));
        }
        for &x in f.object_map() {
            if !self.local_obj.contains_key(&x) {
                return Err(Error::PreconditionViolated(format!(
                    "object `{}` lies outside the subcategory",
                    f.target().object_name(x)
                )));
            }
        }
        for &m in f.morphism_map() {
            if !self.local_mor.contains_key(&m) {
                return Err(Error::PreconditionViolated(format!(
                    "morphism `{}` lies outside the subcategory",
                    f.target().morphism_name(m)
                )));
            }
        }
        Ok(f.with_target(
            self.category.clone(),
            |x| self.local_obj[&x],
            |m| self.local_mor[&m],
        ))
    }

    /// Restricts a functor defined on the parent to this subcategory.
    pub fn restrict(&self, f: &Functor) -> Result<Functor> {
        compose(f, &self.inclusion)
    }
}

/// Full subcategory of `c` on the named objects, with its inclusion.
pub fn full_subcategory(c: &Arc<FinCat>, objects: &[ObjectId]) -> Result<(Arc<FinCat>, Functor)> {
    let sub = Subcat::full_on(c.clone(), objects.iter().copied().collect())?;
    let e = sub.extract();
    Ok((e.category, e.inclusion))
}
