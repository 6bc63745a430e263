//! Executable oracles for the lemmas the refinement rests on. Each returns
//! `false` (or a counterexample) only when the implementation is wrong.

use std::collections::HashSet;

use crate::category::{MorphId, ObjectId};
use crate::error::{Error, Result};
use crate::functor::{same_cat, Functor, Subcat};
use crate::product::ProductCat;

use super::{Check, ProductIso, RefinementResult};

/// `π_λ Φ⁻¹(Φ(f1)[μ := Φ(f2)_μ]) = π_λ f1`, given `π_λ f1 = π_λ f2`.
pub fn proj_cont_check(
    iso: &ProductIso,
    f1: MorphId,
    f2: MorphId,
    lambda: usize,
    mu: usize,
) -> Result<bool> {
    let (x, y) = (&iso.x, &iso.y);
    for f in [f1, f2] {
        if f.index() >= x.carrier().num_morphisms() {
            return Err(Error::UnknownMorphism(format!("#{}", f.0)));
        }
    }
    if lambda >= x.arity() {
        return Err(Error::IndexUnknown(format!("#{lambda}")));
    }
    if mu >= y.arity() {
        return Err(Error::IndexUnknown(format!("#{mu}")));
    }
    let p = x.morphism_component(f1, lambda);
    if x.morphism_component(f2, lambda) != p {
        return Err(Error::PreconditionViolated(format!(
            "components at `{}` differ",
            x.indices()[lambda]
        )));
    }
    let mixed = y.substitute_morphism(
        iso.phi.mor(f1),
        mu,
        y.morphism_component(iso.phi.mor(f2), mu),
    )?;
    Ok(x.morphism_component(iso.phi_inv.mor(mixed), lambda) == p)
}

/// `Φ` regrouped as `P × Q → U × V` with `P = X_λ` and `U = Y_μ`.
#[derive(Debug, Clone)]
pub struct BinaryReduction {
    pub pq: ProductCat,
    /// The factors of `Q`, as a product in their own right.
    pub rest: ProductCat,
    pub uv: ProductCat,
    /// `δ_μ⁻¹ ∘ Φ ∘ δ_λ`.
    pub psi: Functor,
    pub psi_inv: Functor,
}

impl BinaryReduction {
    pub fn new(iso: &ProductIso, lambda: usize, mu: usize) -> Result<Self> {
        let (pq, rest, delta_l) = iso.x.split_off(lambda)?;
        let (uv, _, delta_m) = iso.y.split_off(mu)?;
        let psi = delta_m.invert()?.after(&iso.phi.after(&delta_l)?)?;
        let psi_inv = psi.invert()?;
        Ok(BinaryReduction {
            pq,
            rest,
            uv,
            psi,
            psi_inv,
        })
    }

    /// `π_U Ψ(p, q)`.
    fn u_of(&self, p: MorphId, q: MorphId) -> MorphId {
        self.uv
            .morphism_component(self.psi.mor(self.pq.morphism_of(&[p, q])), 0)
    }

    fn constant_over(&self, q_prime: &Subcat, p: MorphId) -> bool {
        let mut it = q_prime.morphisms().iter();
        let Some(&q0) = it.next() else {
            return true;
        };
        let u0 = self.u_of(p, q0);
        it.all(|&q| self.u_of(p, q) == u0)
    }

    /// If `π_U Ψ(p, –)` is constant on `q_prime`, so is `π_U Ψ(p′, –)`.
    pub fn ext_iso(&self, q_prime: &Subcat, p: MorphId, p_prime: MorphId) -> Result<bool> {
        if !same_cat(q_prime.parent(), self.pq.factor(1)) {
            return Err(Error::SourceTargetMismatch(
                "Q′ must be a subcategory of the complementary factor".into(),
            ));
        }
        let pcat = self.pq.factor(0);
        for m in [p, p_prime] {
            if m.index() >= pcat.num_morphisms() {
                return Err(Error::UnknownMorphism(format!("#{}", m.0)));
            }
        }
        if !q_prime.is_connected() {
            return Err(Error::NotConnected("Q′".into()));
        }
        Ok(!self.constant_over(q_prime, p) || self.constant_over(q_prime, p_prime))
    }

    /// Exhaustive identity-decomposition check over every `(f, g)` of
    /// `U × V`. Returns the number of antecedents met and the counterexamples.
    pub fn id_decomposition(&self) -> (usize, Vec<String>) {
        let (u, v) = (self.uv.factor(0), self.uv.factor(1));
        let pcat = self.pq.factor(0);
        let p_of = |f: MorphId, g: MorphId| {
            self.pq
                .morphism_component(self.psi_inv.mor(self.uv.morphism_of(&[f, g])), 0)
        };
        let mut met = 0;
        let mut bad = Vec::new();
        for f in u.morphisms() {
            for g in v.morphisms() {
                let p = p_of(f, g);
                if !pcat.is_identity(p) {
                    continue;
                }
                met += 1;
                let variants = [
                    (f, v.identity(v.cod(g))),
                    (f, v.identity(v.dom(g))),
                    (u.identity(u.cod(f)), g),
                    (u.identity(u.dom(f)), g),
                ];
                for (f2, g2) in variants {
                    if p_of(f2, g2) != p {
                        bad.push(format!(
                            "({}, {}) ↦ {} but ({}, {}) ↦ {}",
                            u.morphism_name(f),
                            v.morphism_name(g),
                            pcat.morphism_name(p),
                            u.morphism_name(f2),
                            v.morphism_name(g2),
                            pcat.morphism_name(p_of(f2, g2))
                        ));
                    }
                }
            }
        }
        (met, bad)
    }
}

/// Wrapper regrouping at `(λ, μ)` before running the extension check.
pub fn ext_iso_check(
    iso: &ProductIso,
    lambda: usize,
    mu: usize,
    q_prime: &Subcat,
    p: MorphId,
    p_prime: MorphId,
) -> Result<bool> {
    BinaryReduction::new(iso, lambda, mu)?.ext_iso(q_prime, p, p_prime)
}

const PSI_EQ_SAMPLE_CAP: usize = 4096;

/// Restriction, faithfulness and component checks on a finished refinement.
pub(crate) fn refinement_lemma_checks(
    iso: &ProductIso,
    r: &RefinementResult,
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let (x, y) = (&iso.x, &iso.y);
    let s = r.base_object;
    let gamma_inv = r.gamma.invert()?;
    let back = gamma_inv.after(&r.psi1.after(&iso.phi)?)?;

    for lambda in 0..x.arity() {
        let name = format!(
            "Φ restricted to the slice at {} is onto ∏ Y",
            x.indices()[lambda]
        );
        let xl = x.factor(lambda);
        let mut images = HashSet::new();
        let mut witness = None;
        for f in xl.morphisms() {
            let t: Vec<MorphId> = (0..y.arity())
                .map(|b| r.cross[lambda][b].fwd_full.mor(f))
                .collect();
            if !images.insert(t) {
                witness = Some(format!("`{}` collides", xl.morphism_name(f)));
                break;
            }
        }
        let expected: usize = (0..y.arity())
            .map(|b| r.cross[lambda][b].y_ba.category.num_morphisms())
            .product();
        if witness.is_none() && images.len() != expected {
            witness = Some(format!(
                "{} images for {} morphisms of ∏ Y",
                images.len(),
                expected
            ));
        }
        checks.push(match witness {
            None => Check::pass(name),
            Some(w) => Check::fail(name, w),
        });

        let name = format!("slice faithfulness at {}", x.indices()[lambda]);
        let f = r
            .rows
            .outer
            .projection(lambda)?
            .after(&back.after(&x.section(s, lambda)?)?)?;
        checks.push(if f.is_faithful() {
            Check::pass(name)
        } else {
            Check::fail(name, "two slice morphisms share an image")
        });
    }

    let s_t = x.object_tuple(s);
    for mu in 0..y.arity() {
        let name = format!("components on ∏ X^{}", y.indices()[mu]);
        let lists: Vec<Vec<MorphId>> = (0..x.arity())
            .map(|a| r.cross[a][mu].x_ab.inclusion.morphism_map().to_vec())
            .collect();
        let mut witness = None;
        let mut counter = vec![0usize; lists.len()];
        let mut seen = 0;
        'outer: while seen < PSI_EQ_SAMPLE_CAP {
            let t: Vec<MorphId> = counter.iter().zip(&lists).map(|(&i, l)| l[i]).collect();
            let f = x.morphism_of(&t);
            for (label, map) in [("Ψ₂", &r.psi2), ("γ⁻¹Ψ₁Φ", &back)] {
                if let Err(w) = check_components(r, map.mor(f), &t, &s_t, mu) {
                    witness = Some(format!(
                        "{label} at `{}`: {w}",
                        x.carrier().morphism_name(f)
                    ));
                    break 'outer;
                }
            }
            seen += 1;
            let mut i = counter.len();
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                counter[i] += 1;
                if counter[i] < lists[i].len() {
                    break;
                }
                counter[i] = 0;
            }
        }
        checks.push(match witness {
            None => Check::pass(name),
            Some(w) => Check::fail(name, w),
        });
    }
    Ok(checks)
}

/// `(α, β)`-component of `img` is `f_α` when `β = μ`, else `id_{s_α}`.
fn check_components(
    r: &RefinementResult,
    img: MorphId,
    f: &[MorphId],
    s: &[ObjectId],
    mu: usize,
) -> std::result::Result<(), String> {
    for (alpha, inner) in r.rows.inner.iter().enumerate() {
        let row = r.rows.outer.morphism_component(img, alpha);
        for beta in 0..inner.arity() {
            let got = inner.morphism_component(row, beta);
            let ex = &r.cross[alpha][beta].x_ab;
            let want = if beta == mu {
                ex.local_morphism(f[alpha])
            } else {
                ex.local_object(s[alpha]).map(|o| ex.category.identity(o))
            };
            if want != Some(got) {
                return Err(format!(
                    "entry ({}, {})",
                    r.a_indices[alpha], r.b_indices[beta]
                ));
            }
        }
    }
    Ok(())
}
