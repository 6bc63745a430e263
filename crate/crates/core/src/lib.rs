//! Finite loop-free categories: validation, products, isomorphism search,
//! common refinements of product decompositions and prime factorization.

pub mod category;
pub mod error;
pub mod factor;
pub mod fence;
pub mod functor;
pub mod fuzz;
pub mod gen;
pub mod hashimoto;
pub mod io;
pub mod iso;
pub mod product;
pub mod reflection;

pub use category::{
    FinCat, MorphId, MorphismEntry, ObjectId, RawCategory, Violation, ViolationKind,
};
pub use error::{Error, Result};
pub use factor::{
    binary_decomposition, candidate_partition_pairs, is_irreducible, prime_factorization,
    Factorization, PartitionPair,
};
pub use fence::{find_fence, is_connected, Fence};
pub use functor::{
    compose, full_subcategory, Extracted, Functor, FunctorViolation, RawFunctor, Subcat,
};
pub use hashimoto::{
    cross_slice, refine, verify_refinement, CrossSlice, ProductIso, RefinementResult,
    VerificationReport,
};
pub use io::{parse_category, serialize_category, IoError};
pub use iso::{are_isomorphic, find_isomorphism, find_isomorphism_with, IsoOptions};
pub use product::{product, product_map, transpose, Decomposition, NestedProduct, ProductCat};
pub use reflection::poset_reflection;
