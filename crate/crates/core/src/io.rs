//! JSON documents for categories, functors and refinement bundles, plus
//! Graphviz export.
//!
//! A functor document names its source and target either by a path
//! (relative to the document) or, for products, by
//! `{"product": [[index, ref], …]}`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::{FinCat, RawCategory, Violation, ViolationKind};
use crate::error::Error;
use crate::factor::Factorization;
use crate::functor::{Functor, FunctorViolation, RawFunctor};
use crate::hashimoto::{verify_parts, Check, RefinementResult, VerificationReport};
use crate::product::{product, Decomposition, ProductCat};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("{location}: invalid category: {}", describe_violations(.violations))]
    InvalidCategory {
        location: String,
        violations: Vec<Violation>,
    },
    #[error("{location}: invalid functor: {}", join(.violations))]
    InvalidFunctor {
        location: String,
        violations: Vec<FunctorViolation>,
    },
    #[error(transparent)]
    Core(#[from] Error),
}

impl IoError {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            IoError::Read { .. } => "read",
            IoError::Write { .. } => "write",
            IoError::Parse { .. } => "parse",
            IoError::InvalidCategory { .. } => "invalid_category",
            IoError::InvalidFunctor { .. } => "invalid_functor",
            IoError::Core(e) => e.kind(),
        }
    }
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Document field a violation points at.
pub fn violation_field(v: &Violation) -> &'static str {
    match v {
        Violation::DuplicateObject(_) => "objects",
        Violation::EmptyToken(_) | Violation::DuplicateMorphism(_) => "morphisms",
        Violation::DanglingReference { context, .. } if context.starts_with("comp") => "comp",
        Violation::DanglingReference { context, .. } if context.starts_with("identit") => {
            "identities"
        }
        Violation::DanglingReference { .. } => "morphisms",
        v => match v.kind() {
            ViolationKind::Identity => "identities",
            ViolationKind::Totality | ViolationKind::Associativity => "comp",
            _ => "morphisms",
        },
    }
}

fn describe_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(|v| format!("[{}] {v}", violation_field(v)))
        .collect::<Vec<_>>()
        .join("; ")
}

type IoResult<T> = std::result::Result<T, IoError>;

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, location: &str) -> IoResult<T> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        location: format!("{location}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Parses and validates a category document.
pub fn parse_category(text: &str, location: &str) -> IoResult<FinCat> {
    let raw: RawCategory = parse_json(text, location)?;
    let ends: HashMap<&str, (&str, &str)> = raw
        .morphisms
        .iter()
        .map(|m| (m.name.as_str(), (m.dom.as_str(), m.cod.as_str())))
        .collect();
    for (i, [g, f, _]) in raw.comp.iter().enumerate() {
        if let (Some(&(gd, _)), Some(&(_, fc))) = (ends.get(g.as_str()), ends.get(f.as_str())) {
            if gd != fc {
                return Err(IoError::Parse {
                    location: format!("{location}: comp[{i}]"),
                    message: format!(
                        "({g}, {f}) is not composable: cod({f}) = {fc}, dom({g}) = {gd}"
                    ),
                });
            }
        }
    }
    FinCat::validate(&raw).map_err(|violations| IoError::InvalidCategory {
        location: location.to_string(),
        violations,
    })
}

/// Canonical text of a category.
pub fn serialize_category(c: &FinCat) -> String {
    let mut s = serde_json::to_string_pretty(&c.to_raw()).expect("serializable");
    s.push('\n');
    s
}

/// Source or target of a functor document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CatRef {
    Path(String),
    Product { product: Vec<(String, CatRef)> },
}

impl CatRef {
    pub fn product_of(parts: impl IntoIterator<Item = (String, String)>) -> CatRef {
        CatRef::Product {
            product: parts
                .into_iter()
                .map(|(i, p)| (i, CatRef::Path(p)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctorDoc {
    pub source_ref: CatRef,
    pub target_ref: CatRef,
    pub omap: BTreeMap<String, String>,
    pub mmap: BTreeMap<String, String>,
}

impl FunctorDoc {
    pub fn new(f: &Functor, source_ref: CatRef, target_ref: CatRef) -> Self {
        let RawFunctor { omap, mmap } = f.to_raw();
        FunctorDoc {
            source_ref,
            target_ref,
            omap,
            mmap,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

/// A resolved [`CatRef`].
#[derive(Debug, Clone)]
pub enum Resolved {
    Plain(Arc<FinCat>),
    Product(ProductCat),
}

impl Resolved {
    pub fn category(&self) -> &Arc<FinCat> {
        match self {
            Resolved::Plain(c) => c,
            Resolved::Product(p) => p.carrier(),
        }
    }

    pub fn as_product(&self) -> Option<&ProductCat> {
        match self {
            Resolved::Product(p) => Some(p),
            Resolved::Plain(_) => None,
        }
    }
}

/// A functor read from disk with its resolved endpoints.
#[derive(Debug, Clone)]
pub struct LoadedFunctor {
    pub functor: Functor,
    pub source: Resolved,
    pub target: Resolved,
}

/// Reads documents, sharing every category and product it has already
/// loaded so that functors referring to the same file compose.
#[derive(Debug, Default)]
pub struct Loader {
    cats: HashMap<PathBuf, Arc<FinCat>>,
    products: HashMap<String, ProductCat>,
}

pub fn read_text(path: &Path) -> IoResult<String> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> IoResult<()> {
    fs::write(path, text).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn key_path(path: &Path) -> PathBuf {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

impl Loader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn category(&mut self, path: &Path) -> IoResult<Arc<FinCat>> {
        let key = key_path(path);
        if let Some(c) = self.cats.get(&key) {
            return Ok(c.clone());
        }
        let text = read_text(path)?;
        let c = Arc::new(parse_category(&text, &path.display().to_string())?);
        self.cats.insert(key, c.clone());
        Ok(c)
    }

    fn product_key(&self, r: &CatRef, dir: &Path) -> String {
        match r {
            CatRef::Path(p) => key_path(&dir.join(p)).display().to_string(),
            CatRef::Product { product } => {
                let parts: Vec<String> = product
                    .iter()
                    .map(|(i, r)| format!("{i:?}={}", self.product_key(r, dir)))
                    .collect();
                format!("[{}]", parts.join(","))
            }
        }
    }

    pub fn resolve(&mut self, r: &CatRef, dir: &Path) -> IoResult<Resolved> {
        match r {
            CatRef::Path(p) => Ok(Resolved::Plain(self.category(&dir.join(p))?)),
            CatRef::Product { product: parts } => {
                let key = self.product_key(r, dir);
                if let Some(p) = self.products.get(&key) {
                    return Ok(Resolved::Product(p.clone()));
                }
                let mut factors = Vec::with_capacity(parts.len());
                for (i, sub) in parts {
                    factors.push((i.clone(), self.resolve(sub, dir)?.category().clone()));
                }
                let p = product(factors)?;
                self.products.insert(key, p.clone());
                Ok(Resolved::Product(p))
            }
        }
    }

    /// Loads a functor document. With `checked = false` only token
    /// resolution is enforced, so broken functors can still be inspected.
    pub fn functor(&mut self, path: &Path, checked: bool) -> IoResult<LoadedFunctor> {
        let location = path.display().to_string();
        let doc: FunctorDoc = parse_json(&read_text(path)?, &location)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let source = self.resolve(&doc.source_ref, dir)?;
        let target = self.resolve(&doc.target_ref, dir)?;
        let raw = RawFunctor {
            omap: doc.omap,
            mmap: doc.mmap,
        };
        let (s, t) = (source.category().clone(), target.category().clone());
        let result = if checked {
            Functor::validate(&raw, s, t)
        } else {
            Functor::resolve(&raw, s, t)
        };
        let functor = result.map_err(|violations| IoError::InvalidFunctor {
            location,
            violations,
        })?;
        Ok(LoadedFunctor {
            functor,
            source,
            target,
        })
    }
}

/// Index name made safe for a file name.
pub fn file_stem(index: &str) -> String {
    index
        .chars()
        .map(|ch| {
            if ch.is_ascii_alphanumeric() || ch == '-' || ch == '_' {
                ch
            } else {
                '_'
            }
        })
        .collect()
}

/// Graphviz DOT of the objects and non-identity morphisms.
pub fn to_dot(c: &FinCat) -> String {
    let q = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
    let mut out = String::from("digraph {\n");
    for x in c.objects() {
        let _ = writeln!(out, "  {};", q(c.object_name(x)));
    }
    for f in c.morphisms() {
        if c.is_identity(f) {
            continue;
        }
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            q(c.object_name(c.dom(f))),
            q(c.object_name(c.cod(f))),
            q(c.morphism_name(f))
        );
    }
    out.push_str("}\n");
    out
}

/// File stems for a list of indices, made unique by suffixing the position
/// when two indices sanitize to the same stem.
fn unique_stems(indices: &[String]) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    indices
        .iter()
        .enumerate()
        .map(|(i, ix)| {
            let mut stem = file_stem(ix);
            if !seen.insert(stem.clone()) {
                stem = format!("{stem}_{i}");
                seen.insert(stem.clone());
            }
            stem
        })
        .collect()
}

fn json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn write_decomposition(
    dir: &Path,
    d: &Decomposition,
    name: &str,
    prefix: &str,
    base_file: &str,
) -> IoResult<Vec<String>> {
    let stems = unique_stems(d.product.indices());
    let mut parts = Vec::with_capacity(stems.len());
    for (i, stem) in stems.iter().enumerate() {
        let file = format!("{prefix}_{stem}.json");
        write_text(&dir.join(&file), &serialize_category(d.product.factor(i)))?;
        parts.push((d.product.indices()[i].clone(), file));
    }
    let doc = FunctorDoc::new(
        &d.iso,
        CatRef::Path(base_file.into()),
        CatRef::product_of(parts),
    );
    write_text(&dir.join(name), &doc.to_text())?;
    Ok(stems)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDoc {
    pub base_object: String,
    pub all_passed: bool,
    pub checks: Vec<Check>,
}

/// Writes a refinement bundle: the inputs `base.json`, `X_<α>.json`,
/// `Y_<β>.json`, `psiA.json`, `psiB.json` and the outputs
/// `Z_<α>_<β>.json`, `a_<α>.json`, `b_<β>.json`, `report.json`.
pub fn write_refinement_bundle(
    dir: &Path,
    psi_a: &Decomposition,
    psi_b: &Decomposition,
    r: &RefinementResult,
) -> IoResult<()> {
    fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    write_text(&dir.join("base.json"), &serialize_category(&psi_a.base))?;
    let sa = write_decomposition(dir, psi_a, "psiA.json", "X", "base.json")?;
    let sb = write_decomposition(dir, psi_b, "psiB.json", "Y", "base.json")?;
    let z_file = |i: usize, j: usize| format!("Z_{}_{}.json", sa[i], sb[j]);
    for (i, row) in r.z.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            write_text(&dir.join(z_file(i, j)), &serialize_category(z))?;
        }
    }
    for (i, a) in r.a.iter().enumerate() {
        let target = CatRef::product_of(
            r.b_indices
                .iter()
                .enumerate()
                .map(|(j, b)| (b.clone(), z_file(i, j))),
        );
        let doc = FunctorDoc::new(a, CatRef::Path(format!("X_{}.json", sa[i])), target);
        write_text(&dir.join(format!("a_{}.json", sa[i])), &doc.to_text())?;
    }
    for (j, b) in r.b.iter().enumerate() {
        let target = CatRef::product_of(
            r.a_indices
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), z_file(i, j))),
        );
        let doc = FunctorDoc::new(b, CatRef::Path(format!("Y_{}.json", sb[j])), target);
        write_text(&dir.join(format!("b_{}.json", sb[j])), &doc.to_text())?;
    }
    let report = ReportDoc {
        base_object: r.base_object_name().to_string(),
        all_passed: r.report.all_passed(),
        checks: r.report.checks.clone(),
    };
    write_text(&dir.join("report.json"), &json_line(&report))
}

/// Loads a decomposition document whose source must be `base`.
pub fn load_decomposition(
    loader: &mut Loader,
    base: &Arc<FinCat>,
    path: &Path,
) -> IoResult<Decomposition> {
    let loaded = loader.functor(path, true)?;
    let Resolved::Product(product) = loaded.target else {
        return Err(Error::PreconditionViolated(format!(
            "{}: target_ref of a decomposition must be a product",
            path.display()
        ))
        .into());
    };
    if **loaded.functor.source() != **base {
        return Err(Error::SourceTargetMismatch(format!(
            "{}: source_ref is not the base category",
            path.display()
        ))
        .into());
    }
    Ok(Decomposition::new(base.clone(), product, loaded.functor)?)
}

/// Re-reads a bundle written by [`write_refinement_bundle`] and checks it
/// from the files alone. Component functors are loaded unchecked so that a
/// broken one shows up as a failed check rather than a load error.
pub fn verify_bundle(dir: &Path) -> IoResult<VerificationReport> {
    let mut loader = Loader::new();
    let base = loader.category(&dir.join("base.json"))?;
    let psi_a = load_decomposition(&mut loader, &base, &dir.join("psiA.json"))?;
    let psi_b = load_decomposition(&mut loader, &base, &dir.join("psiB.json"))?;
    let a_ix = psi_a.product.indices().to_vec();
    let b_ix = psi_b.product.indices().to_vec();
    let (sa, sb) = (unique_stems(&a_ix), unique_stems(&b_ix));
    let mut z = Vec::with_capacity(sa.len());
    for s in &sa {
        let mut row = Vec::with_capacity(sb.len());
        for t in &sb {
            row.push(loader.category(&dir.join(format!("Z_{s}_{t}.json")))?);
        }
        z.push(row);
    }
    let a = sa
        .iter()
        .map(|s| {
            Ok(loader
                .functor(&dir.join(format!("a_{s}.json")), false)?
                .functor)
        })
        .collect::<IoResult<Vec<_>>>()?;
    let b = sb
        .iter()
        .map(|t| {
            Ok(loader
                .functor(&dir.join(format!("b_{t}.json")), false)?
                .functor)
        })
        .collect::<IoResult<Vec<_>>>()?;
    Ok(verify_parts(&a_ix, &b_ix, &z, &a, &b, &psi_a, &psi_b))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorSummary {
    pub base_object: String,
    pub factors: Vec<FactorEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorEntry {
    pub index: String,
    pub file: String,
    pub objects: usize,
    pub morphisms: usize,
    pub irreducible: bool,
}

/// Writes `base.json`, `factor_<k>.json`, `iso.json` (the decomposition
/// onto the product of the factor files) and `summary.json`.
pub fn write_factorization(dir: &Path, f: &Factorization) -> IoResult<FactorSummary> {
    fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    write_text(&dir.join("base.json"), &serialize_category(&f.base))?;
    let p = &f.decomposition.product;
    let mut entries = Vec::with_capacity(f.factors.len());
    for (k, c) in f.factors.iter().enumerate() {
        let file = format!("factor_{}.json", k + 1);
        write_text(&dir.join(&file), &serialize_category(c))?;
        entries.push(FactorEntry {
            index: p.indices()[k].clone(),
            file,
            objects: c.num_objects(),
            morphisms: c.num_morphisms(),
            irreducible: f.irreducible[k],
        });
    }
    let doc = FunctorDoc::new(
        &f.decomposition.iso,
        CatRef::Path("base.json".into()),
        CatRef::product_of(entries.iter().map(|e| (e.index.clone(), e.file.clone()))),
    );
    write_text(&dir.join("iso.json"), &doc.to_text())?;
    let summary = FactorSummary {
        base_object: f.base.object_name(f.base_object).to_string(),
        factors: entries,
    };
    write_text(&dir.join("summary.json"), &json_line(&summary))?;
    Ok(summary)
}
