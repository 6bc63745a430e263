//! Poset reflection: identify parallel morphisms.

use std::collections::HashMap;
use std::sync::Arc;

use crate::category::{FinCat, MorphId, ObjectId};
use crate::functor::Functor;

/// The quotient of `c` with at most one morphism per ordered pair of
/// objects, and the quotient functor. Objects keep their tokens; the
/// morphism `x → y` is named `x→y`.
pub fn poset_reflection(c: &Arc<FinCat>) -> (Arc<FinCat>, Functor) {
    let mut pairs: Vec<(ObjectId, ObjectId)> =
        c.morphisms().map(|f| (c.dom(f), c.cod(f))).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let index: HashMap<(ObjectId, ObjectId), MorphId> = pairs
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, MorphId(i as u32)))
        .collect();
    let morphisms = pairs
        .iter()
        .map(|&(x, y)| (format!("{}→{}", c.object_name(x), c.object_name(y)), x, y))
        .collect();
    let identities = c.objects().map(|x| index[&(x, x)]).collect();
    let mut comp = HashMap::new();
    for &(x, y) in &pairs {
        for &(y2, z) in &pairs {
            if y == y2 {
                comp.insert((index[&(y, z)], index[&(x, y)]), index[&(x, z)]);
            }
        }
    }
    let objects = c.objects().map(|x| c.object_name(x).to_string()).collect();
    let q = Arc::new(FinCat::from_tables(objects, morphisms, identities, comp));
    let functor = Functor::from_maps_unchecked(
        c.clone(),
        q.clone(),
        c.objects().collect(),
        c.morphisms()
            .map(|f| index[&(c.dom(f), c.cod(f))])
            .collect(),
    );
    (q, functor)
}

/// True when every hom-set has at most one element.
pub fn is_poset(c: &FinCat) -> bool {
    c.objects().all(|x| {
        let mut cods: Vec<ObjectId> = c.out_morphisms(x).iter().map(|&f| c.cod(f)).collect();
        let n = cods.len();
        cods.sort_unstable();
        cods.dedup();
        cods.len() == n
    })
}
