use criterion::{criterion_group, criterion_main, Criterion};

use cvcluster_core::gaussian::{apply_beamsplitter_graph, graph_to_covariance, tmss_graph};

fn graph_pipeline(c: &mut Criterion) {
    c.bench_function("graph_expand_4_modes", |b| {
        let pair = tmss_graph(1.0).unwrap();
        let g = pair.union(&tmss_graph(1.0).unwrap()).unwrap();
        let g = apply_beamsplitter_graph(&g, 1, 2).unwrap();
        b.iter(|| graph_to_covariance(&g.expand().unwrap()).unwrap());
    });
}

criterion_group!(benches, graph_pipeline);
criterion_main!(benches);
