//! Geometry and Jacobi assembly on the default pool against a one-thread pool.

use cmc_index_lab::ambient::catalog_space;
use cmc_index_lab::hodge::DiscreteSurface;
use cmc_index_lab::jacobi::{assemble, JacobiOptions};
use cmc_index_lab::surface::{compute_geometry, generate_surface};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use serde_json::json;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let all = rayon::current_num_threads();
    let mut out = vec![("sequential".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    out.push((format!("rayon-{all}"), rayon::ThreadPoolBuilder::new().num_threads(all).build().unwrap()));
    out
}

fn bench(c: &mut Criterion) {
    let s3 = catalog_space("s3", &json!({})).unwrap();
    let mesh = generate_surface(&s3, "clifford-torus", &json!({}), 96).unwrap();
    let surface = DiscreteSurface::new(mesh.clone()).unwrap();

    let mut group = c.benchmark_group("clifford-96");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("geometry", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| compute_geometry(&mesh).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("assembly", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| assemble(&surface, JacobiOptions::default()).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
