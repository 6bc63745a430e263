//! Common refinement of two product decompositions.
//!
//! Given `ΨA: C ≅ ∏_α X_α` and `ΨB: C ≅ ∏_β Y_β`, [`refine`] builds the grid
//! `Z_{α,β}` together with isomorphisms `a_α: X_α ≅ ∏_β Z_{α,β}` and
//! `b_β: Y_β ≅ ∏_α Z_{α,β}` such that `(∏ b_β)∘ΨB = γ∘(∏ a_α)∘ΨA`, where
//! `γ` transposes the nesting. Every functor involved is materialized, and
//! the verification compares tables.

pub mod lemmas;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::category::{FinCat, ObjectId};
use crate::error::{Error, Result};
use crate::fence::is_connected;
use crate::functor::{same_cat, Extracted, Functor};
use crate::product::{
    pairing, product, product_map, transpose, Decomposition, NestedProduct, ProductCat,
};

/// An isomorphism `Φ` between two product carriers, with its inverse.
#[derive(Debug, Clone)]
pub struct ProductIso {
    pub x: ProductCat,
    pub y: ProductCat,
    pub phi: Functor,
    pub phi_inv: Functor,
}

impl ProductIso {
    pub fn new(x: ProductCat, y: ProductCat, phi: Functor) -> Result<Self> {
        if !same_cat(phi.source(), x.carrier()) || !same_cat(phi.target(), y.carrier()) {
            return Err(Error::SourceTargetMismatch(
                "Φ must run between the two product carriers".into(),
            ));
        }
        let v = phi.violations();
        if !v.is_empty() {
            return Err(Error::InvalidFunctor(v));
        }
        if !phi.is_isomorphism() {
            return Err(Error::NotIso("Φ is not bijective".into()));
        }
        if x.carrier().is_empty() {
            return Err(Error::EmptyCategory);
        }
        if !is_connected(x.carrier()) {
            return Err(Error::NotConnected("product carrier".into()));
        }
        let phi_inv = phi.invert()?;
        Ok(ProductIso { x, y, phi, phi_inv })
    }
}

/// The pair of mutually inverse sub-factors attached to `(α, β)`.
#[derive(Debug, Clone)]
pub struct CrossSlice {
    /// `X_α^β ⊆ X_α`, the image of [`CrossSlice::bwd_full`].
    pub x_ab: Extracted,
    /// `Y_β^α ⊆ Y_β`, the image of [`CrossSlice::fwd_full`].
    pub y_ba: Extracted,
    /// `π_β Φ Ξ^s_α : X_α → Y_β`.
    pub fwd_full: Functor,
    /// `π_α Φ⁻¹ Ξ^{Φ(s)}_β : Y_β → X_α`.
    pub bwd_full: Functor,
    pub fwd: Functor,
    pub bwd: Functor,
}

pub fn cross_slice(iso: &ProductIso, s: ObjectId, alpha: usize, beta: usize) -> Result<CrossSlice> {
    if s.index() >= iso.x.carrier().num_objects() {
        return Err(Error::UnknownObject(format!("#{}", s.0)));
    }
    let fwd_full = iso
        .y
        .projection(beta)?
        .after(&iso.phi.after(&iso.x.section(s, alpha)?)?)?;
    let bwd_full = iso
        .x
        .projection(alpha)?
        .after(&iso.phi_inv.after(&iso.y.section(iso.phi.obj(s), beta)?)?)?;
    let x_ab = bwd_full.image()?.extract();
    let y_ba = fwd_full.image()?.extract();
    let fwd = y_ba.corestrict(&x_ab.restrict(&fwd_full)?)?;
    let bwd = x_ab.corestrict(&y_ba.restrict(&bwd_full)?)?;
    if fwd.after(&bwd)? != Functor::identity(&y_ba.category)
        || bwd.after(&fwd)? != Functor::identity(&x_ab.category)
    {
        return Err(Error::NotIso(format!(
            "cross slices ({alpha}, {beta}) are not inverse to each other"
        )));
    }
    Ok(CrossSlice {
        x_ab,
        y_ba,
        fwd_full,
        bwd_full,
        fwd,
        bwd,
    })
}

/// One line of a [`VerificationReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    fn pass(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: true,
            witness: None,
        }
    }

    fn fail(name: impl Into<String>, witness: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: false,
            witness: Some(witness.into()),
        }
    }

    fn from_result(name: impl Into<String>, r: std::result::Result<(), String>) -> Self {
        match r {
            Ok(()) => Check::pass(name),
            Err(w) => Check::fail(name, w),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Everything [`refine`] computes.
#[derive(Debug, Clone)]
pub struct RefinementResult {
    /// `s`, an object of the carrier of ΨA's product.
    pub base_object: ObjectId,
    pub phi: Functor,
    pub a_indices: Vec<String>,
    pub b_indices: Vec<String>,
    /// `z[α][β]`.
    pub z: Vec<Vec<Arc<FinCat>>>,
    pub cross: Vec<Vec<CrossSlice>>,
    pub a: Vec<Functor>,
    pub b: Vec<Functor>,
    /// `∏_α ∏_β Z_{α,β}`.
    pub rows: NestedProduct,
    /// `∏_β ∏_α Z_{α,β}`.
    pub cols: NestedProduct,
    pub psi1: Functor,
    pub psi2: Functor,
    pub gamma: Functor,
    pub report: VerificationReport,
}

impl RefinementResult {
    pub fn base_object_name(&self) -> &str {
        self.phi.source().object_name(self.base_object)
    }

    /// Positions `(α, β)` whose `Z` is not terminal.
    pub fn nontrivial_entries(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.z.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                if !z.is_terminal() {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Builds the common refinement of `psi_a` and `psi_b`. `s` is an object of
/// ΨA's product carrier and defaults to its least object.
pub fn refine(
    c: &Arc<FinCat>,
    psi_a: &Decomposition,
    psi_b: &Decomposition,
    s: Option<ObjectId>,
) -> Result<RefinementResult> {
    if c.is_empty() {
        return Err(Error::EmptyCategory);
    }
    if !is_connected(c) {
        return Err(Error::NotConnected("base category".into()));
    }
    if !same_cat(&psi_a.base, c) || !same_cat(&psi_b.base, c) {
        return Err(Error::SourceTargetMismatch(
            "both decompositions must start at the base category".into(),
        ));
    }
    let phi = psi_b.iso.after(&psi_a.iso.invert()?)?;
    let iso = ProductIso::new(psi_a.product.clone(), psi_b.product.clone(), phi)?;
    let s = s.unwrap_or_else(|| iso.x.least_object());
    if s.index() >= iso.x.carrier().num_objects() {
        return Err(Error::UnknownObject(format!("#{}", s.0)));
    }
    let na = iso.x.arity();
    let nb = iso.y.arity();

    let cross: Vec<Vec<CrossSlice>> = (0..na)
        .into_par_iter()
        .map(|alpha| {
            (0..nb)
                .map(|beta| cross_slice(&iso, s, alpha, beta))
                .collect()
        })
        .collect::<Result<_>>()?;
    let z: Vec<Vec<Arc<FinCat>>> = cross
        .iter()
        .map(|row| row.iter().map(|cs| cs.x_ab.category.clone()).collect())
        .collect();
    let a_indices = iso.x.indices().to_vec();
    let b_indices = iso.y.indices().to_vec();

    let rows = nested_rows(&a_indices, &b_indices, &z)?;
    let (gamma, cols) = transpose(&rows)?;

    let mut a = Vec::with_capacity(na);
    for alpha in 0..na {
        let comps = (0..nb)
            .map(|beta| {
                let cs = &cross[alpha][beta];
                cs.x_ab.corestrict(&cs.bwd_full.after(&cs.fwd_full)?)
            })
            .collect::<Result<Vec<_>>>()?;
        a.push(pairing(iso.x.factor(alpha), &rows.inner[alpha], &comps)?);
    }
    let mut b = Vec::with_capacity(nb);
    for beta in 0..nb {
        let comps = (0..na)
            .map(|alpha| {
                let cs = &cross[alpha][beta];
                cs.x_ab.corestrict(&cs.bwd_full)
            })
            .collect::<Result<Vec<_>>>()?;
        b.push(pairing(iso.y.factor(beta), &cols.inner[beta], &comps)?);
    }
    let psi2 = product_map(&iso.x, &rows.outer, &a)?;
    let psi1 = product_map(&iso.y, &cols.outer, &b)?;

    let mut report = verify_parts(&a_indices, &b_indices, &z, &a, &b, psi_a, psi_b);
    let left = psi1.after(&iso.phi)?;
    let right = gamma.after(&psi2)?;
    report.checks.push(Check::from_result(
        "Ψ₁∘Φ = γ∘Ψ₂",
        functor_diff(&left, &right),
    ));
    let mut result = RefinementResult {
        base_object: s,
        phi: iso.phi.clone(),
        a_indices,
        b_indices,
        z,
        cross,
        a,
        b,
        rows,
        cols,
        psi1,
        psi2,
        gamma,
        report,
    };
    let extra = lemmas::refinement_lemma_checks(&iso, &result)?;
    result.report.checks.extend(extra);
    Ok(result)
}

fn nested_rows(
    a_indices: &[String],
    b_indices: &[String],
    z: &[Vec<Arc<FinCat>>],
) -> Result<NestedProduct> {
    let inner = z
        .iter()
        .map(|row| product(b_indices.iter().cloned().zip(row.iter().cloned()).collect()))
        .collect::<Result<Vec<_>>>()?;
    NestedProduct::new(a_indices.to_vec(), inner, b_indices.to_vec())
}

/// Re-checks a refinement from its parts: functoriality and bijectivity of
/// every `a_α`, `b_β` and `γ`, and `(∏ b_β)∘ΨB = γ∘(∏ a_α)∘ΨA` on tables.
pub fn verify_refinement(
    r: &RefinementResult,
    psi_a: &Decomposition,
    psi_b: &Decomposition,
) -> VerificationReport {
    verify_parts(&r.a_indices, &r.b_indices, &r.z, &r.a, &r.b, psi_a, psi_b)
}

/// As [`verify_refinement`], for parts loaded from elsewhere.
pub fn verify_parts(
    a_indices: &[String],
    b_indices: &[String],
    z: &[Vec<Arc<FinCat>>],
    a: &[Functor],
    b: &[Functor],
    psi_a: &Decomposition,
    psi_b: &Decomposition,
) -> VerificationReport {
    let mut checks = Vec::new();
    for (name, psi) in [("ΨA", psi_a), ("ΨB", psi_b)] {
        checks.push(Check::from_result(
            format!("{name} is a functor"),
            functor_ok(&psi.iso),
        ));
        checks.push(Check::from_result(
            format!("{name} is an isomorphism"),
            iso_ok(&psi.iso),
        ));
    }
    let shape_ok = z.len() == a_indices.len()
        && z.iter().all(|row| row.len() == b_indices.len())
        && a.len() == a_indices.len()
        && b.len() == b_indices.len()
        && psi_a.product.indices() == a_indices
        && psi_b.product.indices() == b_indices;
    if !shape_ok {
        checks.push(Check::fail(
            "grid shape",
            "index sets, grid and component counts disagree",
        ));
        return VerificationReport { checks };
    }
    let (rows, gamma, cols) = match nested_rows(a_indices, b_indices, z).and_then(|rows| {
        let (g, cols) = transpose(&rows)?;
        Ok((rows, g, cols))
    }) {
        Ok(v) => v,
        Err(e) => {
            checks.push(Check::fail("grid products", e.to_string()));
            return VerificationReport { checks };
        }
    };
    let mut typed = true;
    for (i, f) in a.iter().enumerate() {
        let name = format!("a[{}]", a_indices[i]);
        let ty = typing_ok(f, psi_a.product.factor(i), rows.inner[i].carrier());
        typed &= ty.is_ok();
        checks.push(Check::from_result(format!("{name} has the right type"), ty));
        checks.push(Check::from_result(
            format!("{name} is a functor"),
            functor_ok(f),
        ));
        checks.push(Check::from_result(
            format!("{name} is an isomorphism"),
            iso_ok(f),
        ));
    }
    for (j, f) in b.iter().enumerate() {
        let name = format!("b[{}]", b_indices[j]);
        let ty = typing_ok(f, psi_b.product.factor(j), cols.inner[j].carrier());
        typed &= ty.is_ok();
        checks.push(Check::from_result(format!("{name} has the right type"), ty));
        checks.push(Check::from_result(
            format!("{name} is a functor"),
            functor_ok(f),
        ));
        checks.push(Check::from_result(
            format!("{name} is an isomorphism"),
            iso_ok(f),
        ));
    }
    checks.push(Check::from_result("γ is an isomorphism", iso_ok(&gamma)));
    let name = "(∏b)∘ΨB = γ∘(∏a)∘ΨA";
    if !typed {
        checks.push(Check::fail(name, "skipped: component types do not match"));
        return VerificationReport { checks };
    }
    let diagram = (|| -> Result<std::result::Result<(), String>> {
        let prod_a = product_map(&psi_a.product, &rows.outer, a)?;
        let prod_b = product_map(&psi_b.product, &cols.outer, b)?;
        let left = prod_b.after(&psi_b.iso)?;
        let right = gamma.after(&prod_a.after(&psi_a.iso)?)?;
        Ok(functor_diff(&left, &right))
    })();
    checks.push(match diagram {
        Ok(r) => Check::from_result(name, r),
        Err(e) => Check::fail(name, e.to_string()),
    });
    VerificationReport { checks }
}

fn typing_ok(
    f: &Functor,
    source: &Arc<FinCat>,
    target: &Arc<FinCat>,
) -> std::result::Result<(), String> {
    if !same_cat(f.source(), source) {
        return Err("source differs from the expected factor".into());
    }
    if !same_cat(f.target(), target) {
        return Err("target differs from the expected product of Z entries".into());
    }
    Ok(())
}

fn functor_ok(f: &Functor) -> std::result::Result<(), String> {
    match f.violations().first() {
        None => Ok(()),
        Some(v) => Err(v.to_string()),
    }
}

fn iso_ok(f: &Functor) -> std::result::Result<(), String> {
    if f.is_isomorphism() {
        return Ok(());
    }
    let t = f.target();
    let mut hit = vec![false; t.num_morphisms()];
    for m in f.source().morphisms() {
        let g = f.mor(m);
        if hit[g.index()] {
            return Err(format!(
                "`{}` is hit twice, e.g. by `{}`",
                t.morphism_name(g),
                f.source().morphism_name(m)
            ));
        }
        hit[g.index()] = true;
    }
    match hit.iter().position(|h| !h) {
        Some(i) => Err(format!(
            "`{}` is not hit",
            t.morphism_name(crate::MorphId(i as u32))
        )),
        None => Err("object map is not bijective".into()),
    }
}

/// First morphism (or object) on which two parallel functors differ.
pub(crate) fn functor_diff(left: &Functor, right: &Functor) -> std::result::Result<(), String> {
    let src = left.source();
    for f in src.morphisms() {
        let (l, r) = (left.mor(f), right.mor(f));
        if l != r {
            return Err(format!(
                "morphism `{}`: `{}` vs `{}`",
                src.morphism_name(f),
                left.target().morphism_name(l),
                right.target().morphism_name(r)
            ));
        }
    }
    for x in src.objects() {
        let (l, r) = (left.obj(x), right.obj(x));
        if l != r {
            return Err(format!(
                "object `{}`: `{}` vs `{}`",
                src.object_name(x),
                left.target().object_name(l),
                right.target().object_name(r)
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::tests::{c2, raw};
    use crate::iso::are_isomorphic;
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

    fn swap(p: &ProductCat) -> Functor {
        let c = p.carrier();
        Functor::new(
            c.clone(),
            c.clone(),
            c.objects()
                .map(|x| {
                    let t = p.object_tuple(x);
                    p.object_of(&[t[1], t[0]])
                })
                .collect(),
            c.morphisms()
                .map(|f| {
                    let t = p.morphism_tuple(f);
                    p.morphism_of(&[t[1], t[0]])
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn cross_slices_under_identity() {
        let p = product_numbered(vec![Arc::new(c2()), c3()]).unwrap();
        let iso = ProductIso::new(p.clone(), p.clone(), Functor::identity(p.carrier())).unwrap();
        let s = p.carrier().object_id("(a,0)").unwrap();
        let cs = cross_slice(&iso, s, 0, 0).unwrap();
        assert_eq!(cs.x_ab.category.num_morphisms(), 3);
        assert_eq!(cs.fwd, Functor::identity(&cs.x_ab.category));
        let off = cross_slice(&iso, s, 0, 1).unwrap();
        assert!(off.x_ab.category.is_terminal());
        assert_eq!(off.x_ab.category.object_name(ObjectId(0)), "a");
        assert!(off.y_ba.category.is_terminal());
        assert_eq!(off.y_ba.category.object_name(ObjectId(0)), "0");
    }

    #[test]
    fn cross_slices_under_swap() {
        let p = product_numbered(vec![Arc::new(c2()), Arc::new(c2())]).unwrap();
        let iso = ProductIso::new(p.clone(), p.clone(), swap(&p)).unwrap();
        let s = p.carrier().object_id("(a,a)").unwrap();
        assert!(cross_slice(&iso, s, 0, 0)
            .unwrap()
            .x_ab
            .category
            .is_terminal());
        let cs = cross_slice(&iso, s, 0, 1).unwrap();
        assert!(are_isomorphic(&cs.x_ab.category, &Arc::new(c2())).unwrap());
    }

    #[test]
    fn swap_refinement() {
        let p = product_numbered(vec![Arc::new(c2()), Arc::new(c2())]).unwrap();
        let c = p.carrier().clone();
        let psi_a = Decomposition::new(c.clone(), p.clone(), Functor::identity(&c)).unwrap();
        let psi_b = Decomposition::new(c.clone(), p.clone(), swap(&p)).unwrap();
        let r = refine(&c, &psi_a, &psi_b, None).unwrap();
        assert!(
            r.report.all_passed(),
            "{:?}",
            r.report.failures().collect::<Vec<_>>()
        );
        assert!(r.z[0][0].is_terminal() && r.z[1][1].is_terminal());
        assert_eq!(r.nontrivial_entries(), vec![(0, 1), (1, 0)]);
        let c2a = Arc::new(c2());
        assert!(are_isomorphic(&r.z[0][1], &c2a).unwrap());
        assert!(are_isomorphic(&r.z[1][0], &c2a).unwrap());
        assert_eq!(r.base_object_name(), "(a,a)");
    }

    #[test]
    fn single_factor_refinement() {
        let c = c3();
        let psi = Decomposition::trivial(c.clone(), "1").unwrap();
        let r = refine(&c, &psi, &psi, None).unwrap();
        assert!(r.report.all_passed());
        assert!(are_isomorphic(&r.z[0][0], &c).unwrap());
    }

    #[test]
    fn corrupted_component_is_pinpointed() {
        let p = product_numbered(vec![Arc::new(c2()), Arc::new(c2())]).unwrap();
        let c = p.carrier().clone();
        let psi_a = Decomposition::new(c.clone(), p.clone(), Functor::identity(&c)).unwrap();
        let psi_b = Decomposition::new(c.clone(), p.clone(), swap(&p)).unwrap();
        let r = refine(&c, &psi_a, &psi_b, None).unwrap();
        let mut a = r.a.clone();
        let f = &a[0];
        let src = f.source();
        let fm = src.morphism_id("f").unwrap();
        let mut mmap = f.morphism_map().to_vec();
        // send f to an identity of the target
        mmap[fm.index()] = f.target().identity(f.obj(src.dom(fm)));
        a[0] = Functor::from_maps_unchecked(
            src.clone(),
            f.target().clone(),
            f.object_map().to_vec(),
            mmap,
        );
        let report = verify_parts(&r.a_indices, &r.b_indices, &r.z, &a, &r.b, &psi_a, &psi_b);
        assert!(!report.all_passed());
        let diagram = report
            .checks
            .iter()
            .find(|c| c.name.starts_with("(∏b)"))
            .unwrap();
        assert!(!diagram.passed);
        assert!(diagram.witness.as_ref().unwrap().contains("morphism"));
        assert!(report
            .checks
            .iter()
            .any(|c| c.name == "a[1] is a functor" && !c.passed));
    }

    #[test]
    fn disconnected_is_refused() {
        let c = Arc::new(
            FinCat::validate(&raw(
                &["a", "b", "c", "d"],
                &[("f", "a", "b"), ("g", "c", "d")],
                &[],
            ))
            .unwrap(),
        );
        let psi = Decomposition::trivial(c.clone(), "1").unwrap();
        assert!(matches!(
            refine(&c, &psi, &psi, None),
            Err(Error::NotConnected(_))
        ));
    }
}
