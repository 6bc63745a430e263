//! Randomized harness for the lemma oracles.
//!
//! Iteration `i` draws from `ChaCha8Rng` seeded with `seed` on stream `i`,
//! so iterations are independent and may run in parallel without changing
//! the report.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::category::MorphId;
use crate::error::Result;
use crate::functor::Subcat;
use crate::gen::{random_decomposition, random_leaves};
use crate::hashimoto::lemmas::{proj_cont_check, BinaryReduction};
use crate::hashimoto::ProductIso;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub iterations: u64,
    /// Leaves per product, at least 2.
    pub max_factors: usize,
    pub max_factor_morphisms: usize,
    /// Sampled tuples per lemma and iteration.
    pub samples: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 1,
            iterations: 10,
            max_factors: 3,
            max_factor_morphisms: 8,
            samples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub iteration: u64,
    pub lemma: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub iterations: u64,
    pub proj_cont_checks: u64,
    pub ext_iso_checks: u64,
    /// Extension checks whose hypothesis held.
    pub ext_iso_antecedents: u64,
    pub id_decomposition_checks: u64,
    pub counterexamples: Vec<Counterexample>,
}

impl FuzzReport {
    pub fn total_checks(&self) -> u64 {
        self.proj_cont_checks + self.ext_iso_checks + self.id_decomposition_checks
    }

    fn merge(&mut self, other: FuzzReport) {
        self.iterations += other.iterations;
        self.proj_cont_checks += other.proj_cont_checks;
        self.ext_iso_checks += other.ext_iso_checks;
        self.ext_iso_antecedents += other.ext_iso_antecedents;
        self.id_decomposition_checks += other.id_decomposition_checks;
        self.counterexamples.extend(other.counterexamples);
    }
}

/// The random product isomorphism used by iteration `i`.
pub fn iteration_iso(cfg: &FuzzConfig, i: u64) -> Result<ProductIso> {
    let mut rng = iteration_rng(cfg.seed, i);
    random_iso(cfg, &mut rng)
}

fn iteration_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

fn random_iso(cfg: &FuzzConfig, rng: &mut ChaCha8Rng) -> Result<ProductIso> {
    let k = rng.gen_range(2..=cfg.max_factors.max(2));
    let leaves = random_leaves(k, cfg.max_factor_morphisms, rng)?;
    let psi_a = random_decomposition(&leaves, "X", rng)?;
    let psi_b = random_decomposition(&leaves, "Y", rng)?;
    let phi = psi_b.iso.after(&psi_a.iso.invert()?)?;
    ProductIso::new(psi_a.product, psi_b.product, phi)
}

pub fn fuzz_lemmas(cfg: &FuzzConfig) -> Result<FuzzReport> {
    let parts: Vec<FuzzReport> = (0..cfg.iterations)
        .into_par_iter()
        .map(|i| {
            let mut rng = iteration_rng(cfg.seed, i);
            let iso = random_iso(cfg, &mut rng)?;
            run_oracles(&iso, cfg.samples, i, &mut rng)
        })
        .collect::<Result<_>>()?;
    let mut report = FuzzReport::default();
    for p in parts {
        report.merge(p);
    }
    Ok(report)
}

/// Runs every oracle on `iso`: `samples` projection checks, `samples`
/// extension checks, and the exhaustive identity check on one regrouping.
pub fn run_oracles(
    iso: &ProductIso,
    samples: usize,
    iteration: u64,
    rng: &mut impl Rng,
) -> Result<FuzzReport> {
    let mut report = FuzzReport {
        iterations: 1,
        ..FuzzReport::default()
    };
    let (x, y) = (&iso.x, &iso.y);
    let nm = x.carrier().num_morphisms() as u32;
    let fail = |lemma: &str, detail: String, report: &mut FuzzReport| {
        report.counterexamples.push(Counterexample {
            iteration,
            lemma: lemma.into(),
            detail,
        });
    };

    for _ in 0..samples {
        let lambda = rng.gen_range(0..x.arity());
        let mu = rng.gen_range(0..y.arity());
        let f1 = MorphId(rng.gen_range(0..nm));
        let other = MorphId(rng.gen_range(0..nm));
        let f2 = x.substitute_morphism(other, lambda, x.morphism_component(f1, lambda))?;
        report.proj_cont_checks += 1;
        if !proj_cont_check(iso, f1, f2, lambda, mu)? {
            let c = x.carrier();
            fail(
                "proj-cont",
                format!(
                    "f1 `{}`, f2 `{}`, λ={}, μ={}",
                    c.morphism_name(f1),
                    c.morphism_name(f2),
                    x.indices()[lambda],
                    y.indices()[mu]
                ),
                &mut report,
            );
        }
    }

    let lambda = rng.gen_range(0..x.arity());
    let mu = rng.gen_range(0..y.arity());
    let bin = BinaryReduction::new(iso, lambda, mu)?;
    let q = bin.pq.factor(1).clone();
    let q_rest = &bin.rest;
    let mut subcats: Vec<Subcat> = vec![Subcat::full_on(q.clone(), q.objects().collect())?];
    for o in q.objects() {
        subcats.push(Subcat::full_on(q.clone(), [o].into_iter().collect())?);
    }
    for o in q.objects() {
        for j in 0..q_rest.arity() {
            // slices of the complementary product, re-expressed in `q`
            let sl = q_rest.slice_subcategory(o, j)?;
            subcats.push(Subcat::new(
                q.clone(),
                sl.subcat.objects().clone(),
                sl.subcat.morphisms().clone(),
            )?);
        }
    }
    let p = bin.pq.factor(0);
    let np = p.num_morphisms() as u32;
    for _ in 0..samples {
        let sub = subcats.choose(rng).expect("non-empty");
        let (a, b) = (MorphId(rng.gen_range(0..np)), MorphId(rng.gen_range(0..np)));
        report.ext_iso_checks += 1;
        let sub_ok = bin.ext_iso(sub, a, b)?;
        if !sub_ok {
            fail(
                "ext-iso",
                format!(
                    "p `{}`, p′ `{}`, Q′ with {} morphisms",
                    p.morphism_name(a),
                    p.morphism_name(b),
                    sub.morphisms().len()
                ),
                &mut report,
            );
        }
        if held(&bin, sub, a) {
            report.ext_iso_antecedents += 1;
        }
    }

    let (met, bad) = bin.id_decomposition();
    report.id_decomposition_checks += met as u64;
    for d in bad {
        fail("id-decomposition", d, &mut report);
    }
    Ok(report)
}

fn held(bin: &BinaryReduction, sub: &Subcat, p: MorphId) -> bool {
    let mut images = sub.morphisms().iter().map(|&q| {
        bin.uv
            .morphism_component(bin.psi.mor(bin.pq.morphism_of(&[p, q])), 0)
    });
    let first = images.next();
    images.all(|u| Some(u) == first)
}
