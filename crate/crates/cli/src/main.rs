use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lfcat::fence::morphism_components;
use lfcat::fuzz::{fuzz_lemmas, FuzzConfig};
use lfcat::gen;
use lfcat::io::{self, violation_field, IoError, Loader};
use lfcat::{
    find_isomorphism_with, is_connected, prime_factorization, product, refine, Error, FinCat,
    IsoOptions, ObjectId,
};

#[derive(Parser)]
#[command(
    name = "lfcat",
    version,
    about = "Finite loop-free categories: products, refinements, factorization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a category document; exits 1 and lists violations if invalid.
    Validate { file: PathBuf },
    /// Exit 0 if the category is connected, 1 otherwise.
    Connected { file: PathBuf },
    /// Product of the given categories, indexed 1..n.
    Product {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Search for an isomorphism; exits 1 if there is none.
    Iso {
        f1: PathBuf,
        f2: PathBuf,
        /// Search time limit in seconds.
        #[arg(long, default_value_t = 10.0)]
        timeout: f64,
    },
    /// Common refinement of two product decompositions of one category.
    Refine {
        #[arg(long)]
        base_cat: PathBuf,
        #[arg(long = "psiA")]
        psi_a: PathBuf,
        #[arg(long = "psiB")]
        psi_b: PathBuf,
        /// Object of the base category; defaults to the least object.
        #[arg(long)]
        base_object: Option<String>,
        #[arg(short)]
        o: PathBuf,
    },
    /// Re-check a refinement bundle from its files.
    VerifyRefinement { dir: PathBuf },
    /// Prime factorization of a connected category.
    Factor {
        file: PathBuf,
        #[arg(long)]
        base_object: Option<String>,
        #[arg(short)]
        o: PathBuf,
    },
    /// Generate a category.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Object count; for grids a list of chain lengths such as `2,3`.
        #[arg(long)]
        size: String,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Run the randomized lemma oracles.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        iters: u64,
        #[arg(long, default_value_t = 3)]
        max_factors: usize,
        #[arg(long, default_value_t = 8)]
        max_morphisms: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Graphviz DOT of the objects and non-identity morphisms.
    ExportDot {
        file: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Chain,
    Grid,
    #[value(alias = "free_dag")]
    FreeDag,
    #[value(alias = "random_poset")]
    RandomPoset,
}

type Run = Result<ExitCode, IoError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            ExitCode::from(2)
        }
    }
}

fn report_error(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": kind, "message": message }));
}

fn verdict(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn emit(o: Option<&Path>, text: &str) -> Result<(), IoError> {
    match o {
        Some(p) => io::write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Arc<FinCat>, IoError> {
    Loader::new().category(path)
}

fn object(c: &FinCat, name: &str) -> Result<ObjectId, IoError> {
    c.object_id(name)
        .ok_or_else(|| Error::UnknownObject(name.to_string()).into())
}

fn run(cmd: Command) -> Run {
    match cmd {
        Command::Validate { file } => validate(&file),
        Command::Connected { file } => {
            let c = load(&file)?;
            let (count, _) = morphism_components(&c);
            let ok = is_connected(&c);
            print(&json!({ "connected": ok, "components": count }));
            Ok(verdict(ok))
        }
        Command::Product { files, o } => {
            let mut loader = Loader::new();
            let factors = files
                .iter()
                .enumerate()
                .map(|(i, f)| Ok(((i + 1).to_string(), loader.category(f)?)))
                .collect::<Result<Vec<_>, IoError>>()?;
            let p = product(factors)?;
            emit(o.as_deref(), &io::serialize_category(p.carrier()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Iso { f1, f2, timeout } => {
            let mut loader = Loader::new();
            let (c, d) = (loader.category(&f1)?, loader.category(&f2)?);
            if !(timeout > 0.0 && timeout.is_finite()) {
                return Err(Error::ParamOutOfRange("timeout must be positive".into()).into());
            }
            let opts = IsoOptions {
                time_limit: Some(Duration::from_secs_f64(timeout)),
            };
            match find_isomorphism_with(&c, &d, &[], &opts)? {
                Some(f) => {
                    let raw = f.to_raw();
                    print(&json!({ "isomorphic": true, "omap": raw.omap, "mmap": raw.mmap }));
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    print(&json!({ "isomorphic": false }));
                    Ok(verdict(false))
                }
            }
        }
        Command::Refine {
            base_cat,
            psi_a,
            psi_b,
            base_object,
            o,
        } => {
            let mut loader = Loader::new();
            let base = loader.category(&base_cat)?;
            let da = io::load_decomposition(&mut loader, &base, &psi_a)?;
            let db = io::load_decomposition(&mut loader, &base, &psi_b)?;
            let s = match base_object {
                Some(name) => Some(da.iso.obj(object(&base, &name)?)),
                None => None,
            };
            let r = refine(&base, &da, &db, s)?;
            io::write_refinement_bundle(&o, &da, &db, &r)?;
            let failed: Vec<&str> = r.report.failures().map(|c| c.name.as_str()).collect();
            print(&json!({
                "base_object": r.base_object_name(),
                "all_passed": r.report.all_passed(),
                "failed": failed,
                "nontrivial": r.nontrivial_entries().iter()
                    .map(|&(i, j)| [r.a_indices[i].clone(), r.b_indices[j].clone()])
                    .collect::<Vec<_>>(),
            }));
            Ok(verdict(r.report.all_passed()))
        }
        Command::VerifyRefinement { dir } => {
            let report = io::verify_bundle(&dir)?;
            print(&json!({ "all_passed": report.all_passed(), "checks": report.checks }));
            Ok(verdict(report.all_passed()))
        }
        Command::Factor {
            file,
            base_object,
            o,
        } => {
            let c = load(&file)?;
            let s = match base_object {
                Some(name) => Some(object(&c, &name)?),
                None => None,
            };
            let f = prime_factorization(&c, s)?;
            let summary = io::write_factorization(&o, &f)?;
            print(&serde_json::to_value(&summary).expect("serializable"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen {
            kind,
            seed,
            size,
            density,
            o,
        } => {
            let n = || {
                size.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::ParamOutOfRange(format!("size `{size}` is not a count")))
            };
            let c = match kind {
                Kind::Chain => gen::chain(n()?)?,
                Kind::Grid => {
                    let dims = size
                        .split([',', 'x'])
                        .map(|d| d.trim().parse::<usize>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| {
                            Error::ParamOutOfRange(format!(
                                "grid size `{size}` is not a list of lengths"
                            ))
                        })?;
                    gen::grid(&dims)?
                }
                Kind::FreeDag => gen::free_dag(n()?, density, seed)?,
                Kind::RandomPoset => gen::random_poset(n()?, density, seed)?,
            };
            emit(o.as_deref(), &io::serialize_category(&c))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fuzz {
            seed,
            iters,
            max_factors,
            max_morphisms,
            samples,
        } => {
            let cfg = FuzzConfig {
                seed,
                iterations: iters,
                max_factors,
                max_factor_morphisms: max_morphisms,
                samples,
            };
            let report = fuzz_lemmas(&cfg)?;
            let mut v = serde_json::to_value(&report).expect("serializable");
            v["total_checks"] = json!(report.total_checks());
            print(&v);
            Ok(verdict(report.counterexamples.is_empty()))
        }
        Command::ExportDot { file, o } => {
            let c = load(&file)?;
            emit(o.as_deref(), &io::to_dot(&c))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn validate(file: &Path) -> Run {
    let text = io::read_text(file)?;
    match io::parse_category(&text, &file.display().to_string()) {
        Ok(c) => {
            print(
                &json!({ "valid": true, "objects": c.num_objects(), "morphisms": c.num_morphisms() }),
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(IoError::InvalidCategory {
            location,
            violations,
        }) => {
            let list: Vec<Value> = violations
                .iter()
                .map(|v| {
                    json!({
                        "field": violation_field(v),
                        "kind": format!("{:?}", v.kind()),
                        "message": v.to_string(),
                    })
                })
                .collect();
            print(&json!({ "valid": false, "violations": list }));
            report_error(
                "invalid_category",
                &format!(
                    "{location}: {} violation(s), first: {}",
                    violations.len(),
                    violations[0]
                ),
            );
            Ok(verdict(false))
        }
        Err(e) => Err(e),
    }
}
