use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lfcat::gen::{self, random_decomposition, random_leaves, shuffled_copy};
use lfcat::{find_isomorphism, prime_factorization, product, refine};

fn bench_product(c: &mut Criterion) {
    let c3 = Arc::new(gen::chain(3).unwrap());
    let c4 = Arc::new(gen::chain(4).unwrap());
    c.bench_function("product C3×C4×C3", |b| {
        b.iter(|| {
            product(vec![
                ("1".into(), c3.clone()),
                ("2".into(), c4.clone()),
                ("3".into(), c3.clone()),
            ])
            .unwrap()
        })
    });
}

fn bench_iso(c: &mut Criterion) {
    let g = Arc::new(gen::grid(&[3, 3, 2]).unwrap());
    let (h, _) = shuffled_copy(&g, "s", &mut ChaCha8Rng::seed_from_u64(7));
    c.bench_function("iso grid 3×3×2", |b| {
        b.iter(|| find_isomorphism(black_box(&g), &h, &[]).unwrap())
    });
}

fn bench_refine(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let leaves = random_leaves(3, 12, &mut rng).unwrap();
    let da = random_decomposition(&leaves, "X", &mut rng).unwrap();
    let db = random_decomposition(&leaves, "Y", &mut rng).unwrap();
    c.bench_function("refine 3 leaves", |b| {
        b.iter(|| refine(leaves.carrier(), black_box(&da), &db, None).unwrap())
    });
}

fn bench_factor(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = Arc::new(gen::grid(&[2, 3, 4]).unwrap());
    let (g, _) = shuffled_copy(&g, "t", &mut rng);
    let p = random_leaves(3, 12, &mut rng).unwrap();
    c.bench_function("factor grid 2×3×4", |b| {
        b.iter(|| prime_factorization(black_box(&g), None).unwrap())
    });
    c.bench_function("factor random 3 leaves", |b| {
        b.iter(|| prime_factorization(black_box(p.carrier()), None).unwrap())
    });
}

criterion_group!(
    benches,
    bench_product,
    bench_iso,
    bench_refine,
    bench_factor
);
criterion_main!(benches);
