use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::Rng;

use reff_core::ansatz::Model;
use reff_core::cost::empirical_cost;
use reff_core::data::generate_dataset;
use reff_core::hamiltonian::{build_heisenberg_chain, build_xy_chain};
use reff_core::train::full_gradient;
use reff_core::{CostKind, InputSource, RngSeed, TrotterConfig, VffAnsatz};

fn gradients(c: &mut Criterion) {
    let cfg = TrotterConfig::new(0.1, 2, 1);
    let cases = [
        ("heisenberg_n4_global_N5", build_heisenberg_chain(4, true).unwrap(), Model::Heisenberg, CostKind::Global, 5),
        ("xy_n6_local_N1", build_xy_chain(6, false).unwrap(), Model::Xy, CostKind::Local, 1),
    ];
    for (name, h, model, kind, count) in cases {
        let a = VffAnsatz::build(h.n(), model, 0.1, None).unwrap();
        let data = generate_dataset(&h, &cfg, count, InputSource::HaarProduct, RngSeed(5)).unwrap();
        let mut rng = RngSeed(6).rng();
        let theta: Vec<f64> = (0..a.n_theta()).map(|_| rng.random_range(-0.1..0.1)).collect();
        let gamma: Vec<f64> = (0..a.n_gamma()).map(|_| rng.random_range(-0.1..0.1)).collect();
        c.bench_function(&format!("cost_{name}"), |b| {
            b.iter(|| black_box(empirical_cost(kind, &a, &theta, &gamma, 0.1, &data).unwrap()))
        });
        c.bench_function(&format!("gradient_{name}"), |b| {
            b.iter(|| black_box(full_gradient(kind, &a, &theta, &gamma, 0.1, &data).unwrap()))
        });
    }
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = gradients
}
criterion_main!(benches);
