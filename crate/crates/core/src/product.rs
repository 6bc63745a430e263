//! Indexed products of finite categories.
//!
//! Carriers are materialized eagerly. Objects and morphisms of a carrier are
//! numbered in mixed radix over the factors (first index most significant),
//! so tuple ↔ id conversion is arithmetic. Tokens are `(c1,…,cn)`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::category::{FinCat, MorphId, ObjectId};
use crate::error::{Error, Result};
use crate::functor::{same_cat, Extracted, Functor, Subcat};

/// Default cap on carrier morphism counts.
pub const DEFAULT_MAX_PRODUCT_MORPHISMS: usize = 500_000;

/// `t` with component `j` replaced by `x`.
pub fn substitute<T: Clone>(t: &[T], j: usize, x: T) -> Vec<T> {
    let mut out = t.to_vec();
    out[j] = x;
    out
}

#[derive(Debug, Clone)]
pub struct ProductCat {
    indices: Vec<String>,
    factors: Vec<Arc<FinCat>>,
    carrier: Arc<FinCat>,
    obj_strides: Vec<usize>,
    mor_strides: Vec<usize>,
}

/// Product of `factors` in the given index order.
pub fn product(factors: Vec<(String, Arc<FinCat>)>) -> Result<ProductCat> {
    product_with_limit(factors, DEFAULT_MAX_PRODUCT_MORPHISMS)
}

pub fn product_with_limit(factors: Vec<(String, Arc<FinCat>)>, limit: usize) -> Result<ProductCat> {
    let mut seen = HashSet::new();
    for (name, _) in &factors {
        if !seen.insert(name.as_str()) {
            return Err(Error::PreconditionViolated(format!(
                "duplicate product index `{name}`"
            )));
        }
    }
    let needed: u128 = factors
        .iter()
        .map(|(_, c)| c.num_morphisms() as u128)
        .product();
    if needed > limit as u128 {
        return Err(Error::SizeExceeded {
            what: "product carrier".into(),
            needed,
            limit,
        });
    }
    let (indices, factors): (Vec<String>, Vec<Arc<FinCat>>) = factors.into_iter().unzip();
    let obj_strides = strides(factors.iter().map(|c| c.num_objects()));
    let mor_strides = strides(factors.iter().map(|c| c.num_morphisms()));
    let carrier = Arc::new(build_carrier(&factors, &obj_strides, &mor_strides));
    Ok(ProductCat {
        indices,
        factors,
        carrier,
        obj_strides,
        mor_strides,
    })
}

/// Product indexed by `"1"`, `"2"`, ….
pub fn product_numbered(factors: Vec<Arc<FinCat>>) -> Result<ProductCat> {
    product(
        factors
            .into_iter()
            .enumerate()
            .map(|(i, c)| ((i + 1).to_string(), c))
            .collect(),
    )
}

fn strides(sizes: impl DoubleEndedIterator<Item = usize> + ExactSizeIterator) -> Vec<usize> {
    let sizes: Vec<usize> = sizes.collect();
    let mut out = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * sizes[i + 1];
    }
    out
}

fn tuple_name<'a>(parts: impl Iterator<Item = &'a str>) -> String {
    let mut s = String::from("(");
    for (i, p) in parts.enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(p);
    }
    s.push(')');
    s
}

fn build_carrier(factors: &[Arc<FinCat>], os: &[usize], ms: &[usize]) -> FinCat {
    let k = factors.len();
    let n_obj: usize = factors.iter().map(|c| c.num_objects()).product();
    let n_mor: usize = factors.iter().map(|c| c.num_morphisms()).product();
    let ocomp = |x: usize, i: usize| ObjectId(((x / os[i]) % factors[i].num_objects()) as u32);
    let mcomp = |f: usize, i: usize| MorphId(((f / ms[i]) % factors[i].num_morphisms()) as u32);

    let objects = (0..n_obj)
        .map(|x| tuple_name((0..k).map(|i| factors[i].object_name(ocomp(x, i)))))
        .collect();
    let morphisms = (0..n_mor)
        .map(|f| {
            let mut dom = 0;
            let mut cod = 0;
            for i in 0..k {
                let c = mcomp(f, i);
                dom += factors[i].dom(c).index() * os[i];
                cod += factors[i].cod(c).index() * os[i];
            }
            let name = tuple_name((0..k).map(|i| factors[i].morphism_name(mcomp(f, i))));
            (name, ObjectId(dom as u32), ObjectId(cod as u32))
        })
        .collect();
    let identities = (0..n_obj)
        .map(|x| {
            MorphId(
                (0..k)
                    .map(|i| factors[i].identity(ocomp(x, i)).index() * ms[i])
                    .sum::<usize>() as u32,
            )
        })
        .collect();

    let tables: Vec<Vec<(MorphId, MorphId, MorphId)>> = factors
        .iter()
        .map(|c| {
            let mut t: Vec<_> = c.composition_table().collect();
            t.sort_unstable();
            t
        })
        .collect();
    let total: usize = tables.iter().map(Vec::len).product();
    let mut comp = HashMap::with_capacity(total);
    if tables.iter().all(|t| !t.is_empty()) {
        let mut counter = vec![0usize; k];
        loop {
            let (mut g, mut f, mut h) = (0usize, 0usize, 0usize);
            for i in 0..k {
                let (gi, fi, hi) = tables[i][counter[i]];
                g += gi.index() * ms[i];
                f += fi.index() * ms[i];
                h += hi.index() * ms[i];
            }
            comp.insert((MorphId(g as u32), MorphId(f as u32)), MorphId(h as u32));
            let mut i = k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                counter[i] += 1;
                if counter[i] < tables[i].len() {
                    break;
                }
                counter[i] = 0;
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX || k == 0 {
                break;
            }
        }
    }
    FinCat::from_tables(objects, morphisms, identities, comp)
}

impl ProductCat {
    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn indices(&self) -> &[String] {
        &self.indices
    }

    pub fn factors(&self) -> &[Arc<FinCat>] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &Arc<FinCat> {
        &self.factors[i]
    }

    pub fn carrier(&self) -> &Arc<FinCat> {
        &self.carrier
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.indices
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::IndexUnknown(name.to_string()))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.arity() {
            Ok(())
        } else {
            Err(Error::IndexUnknown(format!("#{i}")))
        }
    }

    #[inline]
    pub fn object_component(&self, x: ObjectId, i: usize) -> ObjectId {
        ObjectId(((x.index() / self.obj_strides[i]) % self.factors[i].num_objects()) as u32)
    }

    #[inline]
    pub fn morphism_component(&self, f: MorphId, i: usize) -> MorphId {
        MorphId(((f.index() / self.mor_strides[i]) % self.factors[i].num_morphisms()) as u32)
    }

    pub fn object_tuple(&self, x: ObjectId) -> Vec<ObjectId> {
        (0..self.arity())
            .map(|i| self.object_component(x, i))
            .collect()
    }

    pub fn morphism_tuple(&self, f: MorphId) -> Vec<MorphId> {
        (0..self.arity())
            .map(|i| self.morphism_component(f, i))
            .collect()
    }

    /// Carrier object with the given components. Components must be in range.
    pub fn object_of(&self, t: &[ObjectId]) -> ObjectId {
        debug_assert_eq!(t.len(), self.arity());
        ObjectId(
            t.iter()
                .zip(&self.obj_strides)
                .map(|(c, s)| c.index() * s)
                .sum::<usize>() as u32,
        )
    }

    pub fn morphism_of(&self, t: &[MorphId]) -> MorphId {
        debug_assert_eq!(t.len(), self.arity());
        MorphId(
            t.iter()
                .zip(&self.mor_strides)
                .map(|(c, s)| c.index() * s)
                .sum::<usize>() as u32,
        )
    }

    pub fn substitute_object(&self, s: ObjectId, j: usize, x: ObjectId) -> Result<ObjectId> {
        self.check_index(j)?;
        if x.index() >= self.factors[j].num_objects() {
            return Err(Error::ComponentWrongFactor {
                index: self.indices[j].clone(),
                component: format!("#{}", x.0),
            });
        }
        Ok(self.object_of(&substitute(&self.object_tuple(s), j, x)))
    }

    pub fn substitute_morphism(&self, f: MorphId, j: usize, g: MorphId) -> Result<MorphId> {
        self.check_index(j)?;
        if g.index() >= self.factors[j].num_morphisms() {
            return Err(Error::ComponentWrongFactor {
                index: self.indices[j].clone(),
                component: format!("#{}", g.0),
            });
        }
        Ok(self.morphism_of(&substitute(&self.morphism_tuple(f), j, g)))
    }

    /// Projection functor onto factor `i`.
    pub fn projection(&self, i: usize) -> Result<Functor> {
        self.check_index(i)?;
        Ok(Functor::from_maps_unchecked(
            self.carrier.clone(),
            self.factors[i].clone(),
            self.carrier
                .objects()
                .map(|x| self.object_component(x, i))
                .collect(),
            self.carrier
                .morphisms()
                .map(|f| self.morphism_component(f, i))
                .collect(),
        ))
    }

    /// The λ-section at `s`: objects `x ↦ s[λ := x]`, morphisms
    /// `f ↦ id_s[λ := f]`.
    pub fn section(&self, s: ObjectId, lambda: usize) -> Result<Functor> {
        self.check_index(lambda)?;
        if s.index() >= self.carrier.num_objects() {
            return Err(Error::UnknownObject(format!("#{}", s.0)));
        }
        let id_s = self.carrier.identity(s);
        let factor = &self.factors[lambda];
        let s_base =
            s.index() - self.object_component(s, lambda).index() * self.obj_strides[lambda];
        let id_base =
            id_s.index() - self.morphism_component(id_s, lambda).index() * self.mor_strides[lambda];
        Ok(Functor::from_maps_unchecked(
            factor.clone(),
            self.carrier.clone(),
            factor
                .objects()
                .map(|x| ObjectId((s_base + x.index() * self.obj_strides[lambda]) as u32))
                .collect(),
            factor
                .morphisms()
                .map(|f| MorphId((id_base + f.index() * self.mor_strides[lambda]) as u32))
                .collect(),
        ))
    }

    /// The slice through `s` along `lambda`, with the isomorphism from the
    /// factor onto it.
    pub fn slice_subcategory(&self, s: ObjectId, lambda: usize) -> Result<Slice> {
        let section = self.section(s, lambda)?;
        let subcat = section.image()?;
        let extracted = subcat.extract();
        let iso = extracted.corestrict(&section)?;
        Ok(Slice {
            subcat,
            extracted,
            iso,
        })
    }

    /// Object whose component names are pointwise least.
    pub fn least_object(&self) -> ObjectId {
        let t: Vec<ObjectId> = self
            .factors
            .iter()
            .map(|c| {
                c.objects()
                    .min_by(|a, b| c.object_name(*a).cmp(c.object_name(*b)))
                    .expect("non-empty factor")
            })
            .collect();
        self.object_of(&t)
    }

    /// Regroups as the binary product `X_λ × ∏_{α≠λ} X_α`. Returns the binary
    /// product, the inner product of the remaining factors, and the regrouping
    /// isomorphism `δ_λ` from the binary carrier onto this carrier.
    pub fn split_off(&self, lambda: usize) -> Result<(ProductCat, ProductCat, Functor)> {
        self.check_index(lambda)?;
        let rest = product(
            (0..self.arity())
                .filter(|&i| i != lambda)
                .map(|i| (self.indices[i].clone(), self.factors[i].clone()))
                .collect(),
        )?;
        let binary = product(vec![
            (self.indices[lambda].clone(), self.factors[lambda].clone()),
            ("rest".into(), rest.carrier.clone()),
        ])?;
        let merge_obj = |x: ObjectId| {
            let head = binary.object_component(x, 0);
            let tail = rest.object_tuple(binary.object_component(x, 1));
            let mut t = tail;
            t.insert(lambda, head);
            self.object_of(&t)
        };
        let merge_mor = |f: MorphId| {
            let head = binary.morphism_component(f, 0);
            let mut t = rest.morphism_tuple(binary.morphism_component(f, 1));
            t.insert(lambda, head);
            self.morphism_of(&t)
        };
        let delta = Functor::from_maps_unchecked(
            binary.carrier.clone(),
            self.carrier.clone(),
            binary.carrier.objects().map(merge_obj).collect(),
            binary.carrier.morphisms().map(merge_mor).collect(),
        );
        Ok((binary, rest, delta))
    }
}

/// Output of [`ProductCat::slice_subcategory`].
#[derive(Debug, Clone)]
pub struct Slice {
    pub subcat: Subcat,
    pub extracted: Extracted,
    /// Factor → standalone slice category.
    pub iso: Functor,
}

/// Componentwise product of functors `components[i]: src_i → tgt_i`.
pub fn product_map(src: &ProductCat, tgt: &ProductCat, components: &[Functor]) -> Result<Functor> {
    if components.len() != src.arity() || components.len() != tgt.arity() {
        return Err(Error::SourceTargetMismatch(format!(
            "{} components for products of arity {} and {}",
            components.len(),
            src.arity(),
            tgt.arity()
        )));
    }
    for (i, c) in components.iter().enumerate() {
        if !same_cat(c.source(), src.factor(i)) || !same_cat(c.target(), tgt.factor(i)) {
            return Err(Error::SourceTargetMismatch(format!("component {i}")));
        }
    }
    let k = components.len();
    let carrier = src.carrier();
    let omap = carrier
        .objects()
        .map(|x| {
            let t: Vec<ObjectId> = (0..k)
                .map(|i| components[i].obj(src.object_component(x, i)))
                .collect();
            tgt.object_of(&t)
        })
        .collect();
    let mmap = carrier
        .morphisms()
        .map(|f| {
            let t: Vec<MorphId> = (0..k)
                .map(|i| components[i].mor(src.morphism_component(f, i)))
                .collect();
            tgt.morphism_of(&t)
        })
        .collect();
    Ok(Functor::from_maps_unchecked(
        carrier.clone(),
        tgt.carrier().clone(),
        omap,
        mmap,
    ))
}

/// The tuple functor `x ↦ (F_i(x))_i` from `source` into `tgt`.
pub fn pairing(source: &Arc<FinCat>, tgt: &ProductCat, components: &[Functor]) -> Result<Functor> {
    if components.len() != tgt.arity() {
        return Err(Error::SourceTargetMismatch(format!(
            "{} components for a product of arity {}",
            components.len(),
            tgt.arity()
        )));
    }
    let source = source.clone();
    for (i, c) in components.iter().enumerate() {
        if !same_cat(c.source(), &source) || !same_cat(c.target(), tgt.factor(i)) {
            return Err(Error::SourceTargetMismatch(format!("component {i}")));
        }
    }
    let omap = source
        .objects()
        .map(|x| tgt.object_of(&components.iter().map(|c| c.obj(x)).collect::<Vec<_>>()))
        .collect();
    let mmap = source
        .morphisms()
        .map(|f| tgt.morphism_of(&components.iter().map(|c| c.mor(f)).collect::<Vec<_>>()))
        .collect();
    Ok(Functor::from_maps_unchecked(
        source,
        tgt.carrier().clone(),
        omap,
        mmap,
    ))
}

/// A product of products: `outer.factor(i)` is `inner[i].carrier()`, and all
/// inner products are expected to share `inner_indices`.
#[derive(Debug, Clone)]
pub struct NestedProduct {
    pub outer: ProductCat,
    pub inner: Vec<ProductCat>,
    pub inner_indices: Vec<String>,
}

impl NestedProduct {
    pub fn new(
        outer_indices: Vec<String>,
        inner: Vec<ProductCat>,
        inner_indices: Vec<String>,
    ) -> Result<Self> {
        if outer_indices.len() != inner.len() {
            return Err(Error::PreconditionViolated(
                "one inner product per outer index required".into(),
            ));
        }
        let outer = product(
            outer_indices
                .into_iter()
                .zip(&inner)
                .map(|(n, p)| (n, p.carrier().clone()))
                .collect(),
        )?;
        Ok(NestedProduct {
            outer,
            inner,
            inner_indices,
        })
    }

    /// Grid entry `(α, β)`.
    pub fn entry(&self, alpha: usize, beta: usize) -> &Arc<FinCat> {
        self.inner[alpha].factor(beta)
    }
}

/// The transposition `((z_{αβ})_β)_α ↦ ((z_{αβ})_α)_β`. Returns `γ` and the
/// transposed nested product it lands in.
pub fn transpose(n: &NestedProduct) -> Result<(Functor, NestedProduct)> {
    for p in &n.inner {
        if p.indices() != n.inner_indices.as_slice() {
            return Err(Error::RaggedIndexSets(format!(
                "{:?} vs {:?}",
                p.indices(),
                n.inner_indices
            )));
        }
    }
    let a = n.inner.len();
    let b = n.inner_indices.len();
    let mut inner_t = Vec::with_capacity(b);
    for beta in 0..b {
        inner_t.push(product(
            (0..a)
                .map(|alpha| {
                    (
                        n.outer.indices()[alpha].clone(),
                        n.entry(alpha, beta).clone(),
                    )
                })
                .collect(),
        )?);
    }
    let target = NestedProduct::new(n.inner_indices.clone(), inner_t, n.outer.indices().to_vec())?;

    let carrier = n.outer.carrier();
    let omap = carrier
        .objects()
        .map(|x| {
            let grid: Vec<Vec<ObjectId>> = (0..a)
                .map(|alpha| n.inner[alpha].object_tuple(n.outer.object_component(x, alpha)))
                .collect();
            let cols: Vec<ObjectId> = (0..b)
                .map(|beta| {
                    let col: Vec<ObjectId> = (0..a).map(|alpha| grid[alpha][beta]).collect();
                    target.inner[beta].object_of(&col)
                })
                .collect();
            target.outer.object_of(&cols)
        })
        .collect();
    let mmap = carrier
        .morphisms()
        .map(|f| {
            let grid: Vec<Vec<MorphId>> = (0..a)
                .map(|alpha| n.inner[alpha].morphism_tuple(n.outer.morphism_component(f, alpha)))
                .collect();
            let cols: Vec<MorphId> = (0..b)
                .map(|beta| {
                    let col: Vec<MorphId> = (0..a).map(|alpha| grid[alpha][beta]).collect();
                    target.inner[beta].morphism_of(&col)
                })
                .collect();
            target.outer.morphism_of(&cols)
        })
        .collect();
    let gamma =
        Functor::from_maps_unchecked(carrier.clone(), target.outer.carrier().clone(), omap, mmap);
    Ok((gamma, target))
}

/// An isomorphism from `base` onto the carrier of `product`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub base: Arc<FinCat>,
    pub product: ProductCat,
    pub iso: Functor,
}

impl Decomposition {
    pub fn new(base: Arc<FinCat>, product: ProductCat, iso: Functor) -> Result<Self> {
        if !same_cat(iso.source(), &base) || !same_cat(iso.target(), product.carrier()) {
            return Err(Error::SourceTargetMismatch(
                "decomposition iso must run from the base onto the product carrier".into(),
            ));
        }
        let v = iso.violations();
        if !v.is_empty() {
            return Err(Error::InvalidFunctor(v));
        }
        if !iso.is_isomorphism() {
            return Err(Error::NotIso(
                "decomposition functor is not bijective".into(),
            ));
        }
        Ok(Decomposition { base, product, iso })
    }

    /// The trivial one-factor decomposition `C → C`.
    pub fn trivial(base: Arc<FinCat>, index: &str) -> Result<Self> {
        let p = product(vec![(index.to_string(), base.clone())])?;
        let iso = Functor::from_maps_unchecked(
            base.clone(),
            p.carrier().clone(),
            base.objects().map(|x| p.object_of(&[x])).collect(),
            base.morphisms().map(|f| p.morphism_of(&[f])).collect(),
        );
        Decomposition::new(base, p, iso)
    }
}

/// Objects of the slice through `s` along `lambda`; convenience for tests
/// and factor recovery.
pub fn slice_objects(p: &ProductCat, s: ObjectId, lambda: usize) -> Result<BTreeSet<ObjectId>> {
    Ok(p.section(s, lambda)?.object_map().iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::tests::{c2, raw};
    use crate::fence::is_connected;

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

    fn c2a() -> Arc<FinCat> {
        Arc::new(c2())
    }

    #[test]
    fn empty_product_is_terminal() {
        let p = product(vec![]).unwrap();
        assert_eq!(p.carrier().num_objects(), 1);
        assert_eq!(p.carrier().num_morphisms(), 1);
        assert!(p.carrier().violations().is_empty());
    }

    #[test]
    fn cardinalities_multiply() {
        let p = product_numbered(vec![c2a(), c2a()]).unwrap();
        assert_eq!(
            (p.carrier().num_objects(), p.carrier().num_morphisms()),
            (4, 9)
        );
        assert!(p.carrier().violations().is_empty());
        let p = product_numbered(vec![c2a(), c3()]).unwrap();
        assert_eq!(
            (p.carrier().num_objects(), p.carrier().num_morphisms()),
            (6, 18)
        );
        assert!(p.carrier().violations().is_empty());
        for i in 0..2 {
            assert!(p.projection(i).unwrap().violations().is_empty());
        }
        assert!(p.carrier().object_id("(a,0)").is_some());
        assert!(p.carrier().morphism_id("(f,w)").is_some());
    }

    #[test]
    fn substitution() {
        let p = product_numbered(vec![c2a(), c2a()]).unwrap();
        let c = p.carrier();
        let aa = c.object_id("(a,a)").unwrap();
        let ab = c.object_id("(a,b)").unwrap();
        let b = p.factor(0).object_id("b").unwrap();
        assert_eq!(
            c.object_name(p.substitute_object(aa, 0, b).unwrap()),
            "(b,a)"
        );
        assert_eq!(p.substitute_object(ab, 1, b).unwrap(), ab);
        let id_aa = c.morphism_id("(id_a,id_a)").unwrap();
        let f = p.factor(0).morphism_id("f").unwrap();
        assert_eq!(
            c.morphism_name(p.substitute_morphism(id_aa, 0, f).unwrap()),
            "(f,id_a)"
        );
        assert!(matches!(
            p.substitute_object(aa, 2, b),
            Err(Error::IndexUnknown(_))
        ));
        assert!(matches!(
            p.substitute_object(aa, 0, ObjectId(9)),
            Err(Error::ComponentWrongFactor { .. })
        ));
        assert_eq!(substitute(&["a", "a"], 0, "b"), vec!["b", "a"]);
    }

    #[test]
    fn section_behaviour() {
        let p = product_numbered(vec![c2a(), c2a()]).unwrap();
        let c = p.carrier();
        let s = c.object_id("(a,a)").unwrap();
        let sec = p.section(s, 0).unwrap();
        assert!(sec.violations().is_empty());
        let x2 = p.factor(0);
        assert_eq!(c.object_name(sec.obj(x2.object_id("b").unwrap())), "(b,a)");
        assert_eq!(
            c.morphism_name(sec.mor(x2.morphism_id("f").unwrap())),
            "(f,id_a)"
        );
        let back = p.projection(0).unwrap().after(&sec).unwrap();
        assert_eq!(back, Functor::identity(x2));
        // the other projection is constant
        let other = p.projection(1).unwrap().after(&sec).unwrap();
        assert!(other
            .object_map()
            .iter()
            .all(|&y| y == p.object_component(s, 1)));
        let img = sec.image().unwrap();
        assert!(img.is_full());
        let objs: Vec<_> = img
            .objects()
            .iter()
            .map(|&x| c.object_name(x).to_string())
            .collect();
        assert_eq!(objs, vec!["(a,a)", "(b,a)"]);
    }

    #[test]
    fn slice_subcategory_along_second_index() {
        let p = product_numbered(vec![c2a(), c2a()]).unwrap();
        let s = p.carrier().object_id("(a,a)").unwrap();
        let slice = p.slice_subcategory(s, 1).unwrap();
        let names: Vec<_> = slice
            .subcat
            .objects()
            .iter()
            .map(|&x| p.carrier().object_name(x).to_string())
            .collect();
        assert_eq!(names, vec!["(a,a)", "(a,b)"]);
        assert_eq!(slice.subcat.morphisms().len(), 3);
        assert!(slice.iso.is_isomorphism());
        assert!(slice.iso.violations().is_empty());
        assert!(is_connected(&slice.extracted.category));
        // Ξ ∘ π|slice = id on the slice
        let pi_restricted = slice.extracted.restrict(&p.projection(1).unwrap()).unwrap();
        assert_eq!(
            slice.iso.after(&pi_restricted).unwrap(),
            Functor::identity(&slice.extracted.category)
        );
    }

    #[test]
    fn singleton_factor_slice() {
        let t = Arc::new(FinCat::terminal("*"));
        let p = product_numbered(vec![c2a(), t]).unwrap();
        let slice = p.slice_subcategory(p.least_object(), 1).unwrap();
        assert_eq!(slice.subcat.objects().len(), 1);
        assert_eq!(slice.subcat.morphisms().len(), 1);
    }

    #[test]
    fn transpose_two_by_two() {
        let names = ["p", "q", "r", "s"];
        let cats: Vec<Arc<FinCat>> = names
            .iter()
            .map(|n| Arc::new(FinCat::terminal(n)))
            .collect();
        let row = |i: usize| {
            product(vec![
                ("x".into(), cats[2 * i].clone()),
                ("y".into(), cats[2 * i + 1].clone()),
            ])
            .unwrap()
        };
        let n = NestedProduct::new(
            vec!["1".into(), "2".into()],
            vec![row(0), row(1)],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let (gamma, t) = transpose(&n).unwrap();
        assert!(gamma.is_isomorphism());
        assert_eq!(t.outer.carrier().object_name(ObjectId(0)), "((p,r),(q,s))");
        assert_eq!(n.outer.carrier().object_name(ObjectId(0)), "((p,q),(r,s))");
        let (back, _) = transpose(&t).unwrap();
        let round = back.after(&gamma).unwrap();
        assert_eq!(round, Functor::identity(n.outer.carrier()));
    }

    #[test]
    fn transpose_on_real_factors_is_functorial() {
        let a = product(vec![("x".into(), c2a()), ("y".into(), c3())]).unwrap();
        let b = product(vec![("x".into(), c3()), ("y".into(), c2a())]).unwrap();
        let n = NestedProduct::new(
            vec!["1".into(), "2".into()],
            vec![a, b],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let (gamma, _) = transpose(&n).unwrap();
        assert!(gamma.violations().is_empty());
        assert!(gamma.is_isomorphism());
        let inv = gamma.invert().unwrap();
        assert_eq!(
            gamma.after(&inv).unwrap(),
            Functor::identity(gamma.target())
        );
    }

    #[test]
    fn ragged_inner_indices() {
        let a = product(vec![("x".into(), c2a())]).unwrap();
        let b = product(vec![("y".into(), c2a())]).unwrap();
        let n =
            NestedProduct::new(vec!["1".into(), "2".into()], vec![a, b], vec!["x".into()]).unwrap();
        assert!(matches!(transpose(&n), Err(Error::RaggedIndexSets(_))));
    }

    #[test]
    fn size_cap() {
        let r = product_with_limit(vec![("1".into(), c3()), ("2".into(), c3())], 10);
        assert!(matches!(r, Err(Error::SizeExceeded { needed: 36, .. })));
    }

    #[test]
    fn split_off_is_iso() {
        let p = product_numbered(vec![c2a(), c3(), c2a()]).unwrap();
        for l in 0..3 {
            let (bin, _, delta) = p.split_off(l).unwrap();
            assert_eq!(bin.arity(), 2);
            assert!(delta.violations().is_empty());
            assert!(delta.is_isomorphism());
            let pi = p.projection(l).unwrap().after(&delta).unwrap();
            assert_eq!(pi, bin.projection(0).unwrap());
        }
    }

    #[test]
    fn binary_square_commutes() {
        // (f, id) ∘ (id, g) = (id, g) ∘ (f, id) = (f, g)
        let p = product_numbered(vec![c2a(), c3()]).unwrap();
        let c = p.carrier();
        let x = p.factor(0);
        let y = p.factor(1);
        let f = x.morphism_id("f").unwrap();
        for g in y.morphisms() {
            let f_id = p.morphism_of(&[f, y.identity(y.cod(g))]);
            let id_g = p.morphism_of(&[x.identity(x.dom(f)), g]);
            let id_g2 = p.morphism_of(&[x.identity(x.cod(f)), g]);
            let f_id2 = p.morphism_of(&[f, y.identity(y.dom(g))]);
            let both = p.morphism_of(&[f, g]);
            assert_eq!(c.compose(f_id, id_g), Some(both));
            assert_eq!(c.compose(id_g2, f_id2), Some(both));
        }
    }
}
