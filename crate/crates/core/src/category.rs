//! Finite categories stored as explicit tables.
//!
//! A [`FinCat`] is immutable once built. The only public way to obtain one
//! from untrusted data is [`FinCat::validate`], which checks the category
//! axioms together with loop-freeness and reports every violation it finds.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of an object inside one [`FinCat`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(pub u32);

/// Index of a morphism inside one [`FinCat`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MorphId(pub u32);

impl ObjectId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl MorphId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One morphism declaration of a [`RawCategory`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismEntry {
    pub name: String,
    pub dom: String,
    pub cod: String,
}

/// Unvalidated category description; also the JSON document layout.
///
/// `comp` holds `[g, f, g∘f]` triples. Composites involving an identity may
/// be left out and are synthesized during validation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCategory {
    pub objects: Vec<String>,
    pub morphisms: Vec<MorphismEntry>,
    pub identities: BTreeMap<String, String>,
    #[serde(default)]
    pub comp: Vec<[String; 3]>,
}

/// Coarse classification of a [`Violation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Malformed,
    DanglingReference,
    Identity,
    Totality,
    Associativity,
    LoopFree,
}

/// A single broken invariant found by [`FinCat::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("empty token in {0}")]
    EmptyToken(String),
    #[error("duplicate object `{0}`")]
    DuplicateObject(String),
    #[error("duplicate morphism `{0}`")]
    DuplicateMorphism(String),
    #[error("dangling reference `{token}` in {context}")]
    DanglingReference { context: String, token: String },
    #[error("object `{0}` has no identity")]
    MissingIdentity(String),
    #[error("identity `{morphism}` of `{object}` is not an endomorphism of it")]
    IdentityEndpoints { object: String, morphism: String },
    #[error("morphism `{0}` is the identity of several objects")]
    SharedIdentity(String),
    #[error("identity law fails: {identity} composed with {morphism} gives {got}")]
    IdentityLaw {
        identity: String,
        morphism: String,
        got: String,
    },
    #[error("composite declared for non-composable pair ({g}, {f})")]
    NotComposable { g: String, f: String },
    #[error("conflicting composites for ({g}, {f}): {first} vs {second}")]
    ConflictingComposite {
        g: String,
        f: String,
        first: String,
        second: String,
    },
    #[error("missing composite for composable pair ({g}, {f})")]
    MissingComposite { g: String, f: String },
    #[error("composite {composite} of ({g}, {f}) has wrong endpoints")]
    CompositeEndpoints {
        g: String,
        f: String,
        composite: String,
    },
    #[error("associativity fails for ({h}, {g}, {f})")]
    Associativity { h: String, g: String, f: String },
    #[error("loop: non-identity endomorphism `{morphism}` on `{object}`")]
    NonIdentityEndomorphism { object: String, morphism: String },
    #[error("loop: `{forward}` admits the return `{backward}`")]
    ReturnPair { forward: String, backward: String },
}

impl Violation {
    pub fn kind(&self) -> ViolationKind {
        use Violation::*;
        match self {
            EmptyToken(_) | DuplicateObject(_) | DuplicateMorphism(_) => ViolationKind::Malformed,
            DanglingReference { .. } => ViolationKind::DanglingReference,
            MissingIdentity(_)
            | IdentityEndpoints { .. }
            | SharedIdentity(_)
            | IdentityLaw { .. } => ViolationKind::Identity,
            NotComposable { .. }
            | ConflictingComposite { .. }
            | MissingComposite { .. }
            | CompositeEndpoints { .. } => ViolationKind::Totality,
            Associativity { .. } => ViolationKind::Associativity,
            NonIdentityEndomorphism { .. } | ReturnPair { .. } => ViolationKind::LoopFree,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct MorphData {
    name: String,
    dom: ObjectId,
    cod: ObjectId,
}

/// A validated finite loop-free category.
#[derive(Clone)]
pub struct FinCat {
    objects: Vec<String>,
    morphisms: Vec<MorphData>,
    identities: Vec<MorphId>,
    comp: HashMap<(MorphId, MorphId), MorphId>,
    obj_index: HashMap<String, ObjectId>,
    mor_index: HashMap<String, MorphId>,
    out: Vec<Vec<MorphId>>,
    inc: Vec<Vec<MorphId>>,
    hom: HashMap<(ObjectId, ObjectId), Vec<MorphId>>,
    is_identity: Vec<bool>,
}

impl PartialEq for FinCat {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects
            && self.morphisms == other.morphisms
            && self.identities == other.identities
            && self.comp == other.comp
    }
}

impl Eq for FinCat {}

impl fmt::Debug for FinCat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinCat")
            .field("objects", &self.objects.len())
            .field("morphisms", &self.morphisms.len())
            .finish()
    }
}

impl FinCat {
    /// Validates `raw`, synthesizing missing identity composites.
    pub fn validate(raw: &RawCategory) -> Result<FinCat, Vec<Violation>> {
        Validator::new(raw).run()
    }

    /// Builds a category from trusted tables. Composites with identities are
    /// added when absent. No axiom is checked.
    pub(crate) fn from_tables(
        objects: Vec<String>,
        morphisms: Vec<(String, ObjectId, ObjectId)>,
        identities: Vec<MorphId>,
        mut comp: HashMap<(MorphId, MorphId), MorphId>,
    ) -> FinCat {
        let morphisms: Vec<MorphData> = morphisms
            .into_iter()
            .map(|(name, dom, cod)| MorphData { name, dom, cod })
            .collect();
        for (i, m) in morphisms.iter().enumerate() {
            let f = MorphId(i as u32);
            comp.entry((identities[m.cod.index()], f)).or_insert(f);
            comp.entry((f, identities[m.dom.index()])).or_insert(f);
        }
        Self::index(objects, morphisms, identities, comp)
    }

    fn index(
        objects: Vec<String>,
        morphisms: Vec<MorphData>,
        identities: Vec<MorphId>,
        comp: HashMap<(MorphId, MorphId), MorphId>,
    ) -> FinCat {
        let obj_index = objects
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), ObjectId(i as u32)))
            .collect();
        let mor_index = morphisms
            .iter()
            .enumerate()
            .map(|(i, m)| (m.name.clone(), MorphId(i as u32)))
            .collect();
        let mut out = vec![Vec::new(); objects.len()];
        let mut inc = vec![Vec::new(); objects.len()];
        let mut hom: HashMap<(ObjectId, ObjectId), Vec<MorphId>> = HashMap::new();
        let mut is_identity = vec![false; morphisms.len()];
        for id in &identities {
            is_identity[id.index()] = true;
        }
        for (i, m) in morphisms.iter().enumerate() {
            let f = MorphId(i as u32);
            out[m.dom.index()].push(f);
            inc[m.cod.index()].push(f);
            hom.entry((m.dom, m.cod)).or_default().push(f);
        }
        FinCat {
            objects,
            morphisms,
            identities,
            comp,
            obj_index,
            mor_index,
            out,
            inc,
            hom,
            is_identity,
        }
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.morphisms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> impl ExactSizeIterator<Item = ObjectId> + Clone {
        (0..self.objects.len() as u32).map(ObjectId)
    }

    pub fn morphisms(&self) -> impl ExactSizeIterator<Item = MorphId> + Clone {
        (0..self.morphisms.len() as u32).map(MorphId)
    }

    pub fn object_name(&self, x: ObjectId) -> &str {
        &self.objects[x.index()]
    }

    pub fn morphism_name(&self, f: MorphId) -> &str {
        &self.morphisms[f.index()].name
    }

    pub fn object_id(&self, name: &str) -> Option<ObjectId> {
        self.obj_index.get(name).copied()
    }

    pub fn morphism_id(&self, name: &str) -> Option<MorphId> {
        self.mor_index.get(name).copied()
    }

    pub fn dom(&self, f: MorphId) -> ObjectId {
        self.morphisms[f.index()].dom
    }

    pub fn cod(&self, f: MorphId) -> ObjectId {
        self.morphisms[f.index()].cod
    }

    pub fn identity(&self, x: ObjectId) -> MorphId {
        self.identities[x.index()]
    }

    pub fn is_identity(&self, f: MorphId) -> bool {
        self.is_identity[f.index()]
    }

    /// `g ∘ f`, defined when `cod(f) = dom(g)`.
    pub fn compose(&self, g: MorphId, f: MorphId) -> Option<MorphId> {
        self.comp.get(&(g, f)).copied()
    }

    /// All `(g, f, g∘f)` triples of the composition table.
    pub fn composition_table(&self) -> impl Iterator<Item = (MorphId, MorphId, MorphId)> + '_ {
        self.comp.iter().map(|(&(g, f), &h)| (g, f, h))
    }

    pub fn hom(&self, x: ObjectId, y: ObjectId) -> &[MorphId] {
        self.hom.get(&(x, y)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `x ≤ y` in the object preorder, i.e. `Hom(x, y)` is inhabited.
    pub fn leq(&self, x: ObjectId, y: ObjectId) -> bool {
        self.hom.contains_key(&(x, y))
    }

    /// Morphisms with domain `x`, identity included.
    pub fn out_morphisms(&self, x: ObjectId) -> &[MorphId] {
        &self.out[x.index()]
    }

    /// Morphisms with codomain `x`, identity included.
    pub fn in_morphisms(&self, x: ObjectId) -> &[MorphId] {
        &self.inc[x.index()]
    }

    /// The terminal category with a single object `*`.
    pub fn terminal(object: &str) -> FinCat {
        let mut comp = HashMap::new();
        comp.insert((MorphId(0), MorphId(0)), MorphId(0));
        Self::index(
            vec![object.to_string()],
            vec![MorphData {
                name: format!("id_{object}"),
                dom: ObjectId(0),
                cod: ObjectId(0),
            }],
            vec![MorphId(0)],
            comp,
        )
    }

    pub fn is_terminal(&self) -> bool {
        self.objects.len() == 1 && self.morphisms.len() == 1
    }

    /// Canonical raw form: declaration order is kept, identity composites
    /// are omitted and the remaining triples are sorted by `(g, f)`.
    pub fn to_raw(&self) -> RawCategory {
        let mut comp: Vec<(MorphId, MorphId, MorphId)> = self
            .composition_table()
            .filter(|&(g, f, _)| !self.is_identity(g) && !self.is_identity(f))
            .collect();
        comp.sort_unstable();
        RawCategory {
            objects: self.objects.clone(),
            morphisms: self
                .morphisms
                .iter()
                .map(|m| MorphismEntry {
                    name: m.name.clone(),
                    dom: self.object_name(m.dom).to_string(),
                    cod: self.object_name(m.cod).to_string(),
                })
                .collect(),
            identities: self
                .objects()
                .map(|x| {
                    (
                        self.object_name(x).to_string(),
                        self.morphism_name(self.identity(x)).to_string(),
                    )
                })
                .collect(),
            comp: comp
                .into_iter()
                .map(|(g, f, h)| {
                    [
                        self.morphism_name(g).to_string(),
                        self.morphism_name(f).to_string(),
                        self.morphism_name(h).to_string(),
                    ]
                })
                .collect(),
        }
    }

    /// Re-runs the full validator on this category's tables.
    pub fn violations(&self) -> Vec<Violation> {
        match FinCat::validate(&self.to_raw()) {
            Ok(_) => Vec::new(),
            Err(v) => v,
        }
    }

    /// Same category with new token names; tables are untouched.
    pub fn renamed(
        &self,
        mut object_name: impl FnMut(ObjectId, &str) -> String,
        mut morphism_name: impl FnMut(MorphId, &str) -> String,
    ) -> FinCat {
        let objects = self
            .objects()
            .map(|x| object_name(x, self.object_name(x)))
            .collect();
        let morphisms = self
            .morphisms
            .iter()
            .enumerate()
            .map(|(i, m)| MorphData {
                name: morphism_name(MorphId(i as u32), &m.name),
                dom: m.dom,
                cod: m.cod,
            })
            .collect();
        Self::index(
            objects,
            morphisms,
            self.identities.clone(),
            self.comp.clone(),
        )
    }
}

struct Validator<'a> {
    raw: &'a RawCategory,
    violations: Vec<Violation>,
}

impl<'a> Validator<'a> {
    fn new(raw: &'a RawCategory) -> Self {
        Validator {
            raw,
            violations: Vec::new(),
        }
    }

    fn run(mut self) -> Result<FinCat, Vec<Violation>> {
        let raw = self.raw;
        let mut obj_index: HashMap<&str, ObjectId> = HashMap::new();
        let mut objects = Vec::new();
        for o in &raw.objects {
            if o.is_empty() {
                self.violations
                    .push(Violation::EmptyToken("objects".into()));
            } else if obj_index.contains_key(o.as_str()) {
                self.violations.push(Violation::DuplicateObject(o.clone()));
            } else {
                obj_index.insert(o, ObjectId(objects.len() as u32));
                objects.push(o.clone());
            }
        }

        let mut mor_index: HashMap<&str, MorphId> = HashMap::new();
        let mut morphisms = Vec::new();
        for m in &raw.morphisms {
            if m.name.is_empty() {
                self.violations
                    .push(Violation::EmptyToken("morphisms".into()));
                continue;
            }
            if mor_index.contains_key(m.name.as_str()) {
                self.violations
                    .push(Violation::DuplicateMorphism(m.name.clone()));
                continue;
            }
            let dom = self.lookup_obj(&obj_index, &m.dom, &format!("dom of `{}`", m.name));
            let cod = self.lookup_obj(&obj_index, &m.cod, &format!("cod of `{}`", m.name));
            if let (Some(dom), Some(cod)) = (dom, cod) {
                mor_index.insert(&m.name, MorphId(morphisms.len() as u32));
                morphisms.push(MorphData {
                    name: m.name.clone(),
                    dom,
                    cod,
                });
            }
        }

        let mut identities: Vec<Option<MorphId>> = vec![None; objects.len()];
        let mut identity_owner: HashMap<MorphId, ObjectId> = HashMap::new();
        for (o, m) in &raw.identities {
            let x = self.lookup_obj(&obj_index, o, "identities");
            let f = self.lookup_mor(&mor_index, m, &format!("identity of `{o}`"));
            let (Some(x), Some(f)) = (x, f) else { continue };
            let data = &morphisms[f.index()];
            if data.dom != x || data.cod != x {
                self.violations.push(Violation::IdentityEndpoints {
                    object: o.clone(),
                    morphism: m.clone(),
                });
                continue;
            }
            if identity_owner.insert(f, x).is_some() {
                self.violations.push(Violation::SharedIdentity(m.clone()));
                continue;
            }
            identities[x.index()] = Some(f);
        }
        for (i, id) in identities.iter().enumerate() {
            if id.is_none() && !raw.identities.contains_key(&objects[i]) {
                self.violations
                    .push(Violation::MissingIdentity(objects[i].clone()));
            }
        }

        let mut comp: HashMap<(MorphId, MorphId), MorphId> = HashMap::new();
        for [g, f, h] in &raw.comp {
            let ctx = format!("composite ({g}, {f})");
            let gi = self.lookup_mor(&mor_index, g, &ctx);
            let fi = self.lookup_mor(&mor_index, f, &ctx);
            let hi = self.lookup_mor(&mor_index, h, &ctx);
            let (Some(gi), Some(fi), Some(hi)) = (gi, fi, hi) else {
                continue;
            };
            let (gd, fd, hd) = (
                &morphisms[gi.index()],
                &morphisms[fi.index()],
                &morphisms[hi.index()],
            );
            if fd.cod != gd.dom {
                self.violations.push(Violation::NotComposable {
                    g: g.clone(),
                    f: f.clone(),
                });
                continue;
            }
            if hd.dom != fd.dom || hd.cod != gd.cod {
                self.violations.push(Violation::CompositeEndpoints {
                    g: g.clone(),
                    f: f.clone(),
                    composite: h.clone(),
                });
                continue;
            }
            match comp.get(&(gi, fi)) {
                Some(&prev) if prev != hi => {
                    self.violations.push(Violation::ConflictingComposite {
                        g: g.clone(),
                        f: f.clone(),
                        first: morphisms[prev.index()].name.clone(),
                        second: h.clone(),
                    });
                }
                _ => {
                    comp.insert((gi, fi), hi);
                }
            }
        }

        let complete_identities = identities.iter().all(Option::is_some);
        if complete_identities {
            let identities: Vec<MorphId> = identities.iter().map(|i| i.unwrap()).collect();
            for (i, m) in morphisms.iter().enumerate() {
                let f = MorphId(i as u32);
                for (key, id) in [
                    ((identities[m.cod.index()], f), identities[m.cod.index()]),
                    ((f, identities[m.dom.index()]), identities[m.dom.index()]),
                ] {
                    match comp.get(&key) {
                        None => {
                            comp.insert(key, f);
                        }
                        Some(&got) if got != f => self.violations.push(Violation::IdentityLaw {
                            identity: morphisms[id.index()].name.clone(),
                            morphism: m.name.clone(),
                            got: morphisms[got.index()].name.clone(),
                        }),
                        Some(_) => {}
                    }
                }
            }
        }

        let mut out: Vec<Vec<MorphId>> = vec![Vec::new(); objects.len()];
        for (i, m) in morphisms.iter().enumerate() {
            out[m.dom.index()].push(MorphId(i as u32));
        }

        if complete_identities {
            for (i, fd) in morphisms.iter().enumerate() {
                let f = MorphId(i as u32);
                for &g in &out[fd.cod.index()] {
                    if !comp.contains_key(&(g, f)) {
                        self.violations.push(Violation::MissingComposite {
                            g: morphisms[g.index()].name.clone(),
                            f: fd.name.clone(),
                        });
                    }
                }
            }

            for (i, fd) in morphisms.iter().enumerate() {
                let f = MorphId(i as u32);
                for &g in &out[fd.cod.index()] {
                    let Some(&gf) = comp.get(&(g, f)) else {
                        continue;
                    };
                    for &h in &out[morphisms[g.index()].cod.index()] {
                        let left = comp.get(&(h, gf));
                        let right = comp.get(&(h, g)).and_then(|hg| comp.get(&(*hg, f)));
                        if let (Some(l), Some(r)) = (left, right) {
                            if l != r {
                                self.violations.push(Violation::Associativity {
                                    h: morphisms[h.index()].name.clone(),
                                    g: morphisms[g.index()].name.clone(),
                                    f: fd.name.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }

        // Loop-freeness only needs the hom-sets.
        let mut hom: BTreeMap<(ObjectId, ObjectId), Vec<MorphId>> = BTreeMap::new();
        for (i, m) in morphisms.iter().enumerate() {
            hom.entry((m.dom, m.cod))
                .or_default()
                .push(MorphId(i as u32));
        }
        for (&(x, y), fs) in &hom {
            if x == y {
                for &f in fs {
                    if identities[x.index()] != Some(f) {
                        self.violations.push(Violation::NonIdentityEndomorphism {
                            object: objects[x.index()].clone(),
                            morphism: morphisms[f.index()].name.clone(),
                        });
                    }
                }
            } else if x < y {
                if let Some(back) = hom.get(&(y, x)) {
                    self.violations.push(Violation::ReturnPair {
                        forward: morphisms[fs[0].index()].name.clone(),
                        backward: morphisms[back[0].index()].name.clone(),
                    });
                }
            }
        }

        if !self.violations.is_empty() {
            return Err(self.violations);
        }
        let identities = identities.into_iter().map(Option::unwrap).collect();
        Ok(FinCat::index(objects, morphisms, identities, comp))
    }

    fn lookup_obj(
        &mut self,
        idx: &HashMap<&str, ObjectId>,
        token: &str,
        ctx: &str,
    ) -> Option<ObjectId> {
        let found = idx.get(token).copied();
        if found.is_none() {
            self.violations.push(Violation::DanglingReference {
                context: ctx.to_string(),
                token: token.to_string(),
            });
        }
        found
    }

    fn lookup_mor(
        &mut self,
        idx: &HashMap<&str, MorphId>,
        token: &str,
        ctx: &str,
    ) -> Option<MorphId> {
        let found = idx.get(token).copied();
        if found.is_none() {
            self.violations.push(Violation::DanglingReference {
                context: ctx.to_string(),
                token: token.to_string(),
            });
        }
        found
    }
}
