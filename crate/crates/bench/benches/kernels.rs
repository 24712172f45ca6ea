use acml_core::classify::classify;
use acml_core::connections::{
    interior_metric_connection, levi_civita_adapted, parallel_transport, square_loop, ExtendedConnection,
};
use acml_core::exprcore::Expr;
use acml_core::fixtures;
use acml_core::lift::{lift, lifted_nijenhuis_check};
use acml_core::sampling::SampleSpec;
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn jets(c: &mut Criterion) {
    let e = Expr::parse("sin(exp(0.3*x1) + x2^2) * sqrt(2 + cos(x1*x3)) / (1 + x2^2)", 3).unwrap();
    let p = [0.3, -0.2, 0.7];
    for order in [1, 2, 3] {
        c.bench_function(&format!("expr jet order {order}"), |b| b.iter(|| e.eval_jet(black_box(&p), order).unwrap()));
    }
}

fn structures(c: &mut Criterion) {
    let f = fixtures::fixture_f();
    let spec = SampleSpec::cube(5, -1.0, 1.0, 20, 1).unwrap();
    c.bench_function("classify F (20 points)", |b| b.iter(|| classify(black_box(&f), &spec).unwrap()));
    let r = fixtures::random_structure(5, 3);
    let lc = levi_civita_adapted(&r);
    let p = [0.1, 0.2, -0.3, 0.4, 0.5];
    c.bench_function("levi-civita random n=5", |b| b.iter(|| lc.values(black_box(&p)).unwrap()));
}

fn transport(c: &mut Criterion) {
    let s = fixtures::curved();
    let ec = ExtendedConnection::new(interior_metric_connection(&s));
    let curve = square_loop(&[0.05, 0.1, 0.0], (0, 1), 0.1);
    c.bench_function("transport square 4x100 steps", |b| {
        b.iter(|| parallel_transport(&ec, black_box(&curve), &[0.6, 0.8], 100).unwrap())
    });
}

fn lifted(c: &mut Criterion) {
    let l = lift(&fixtures::fixture_d()).unwrap();
    let spec = l.sample_spec(&SampleSpec::cube(3, -1.0, 1.0, 5, 1).unwrap()).unwrap();
    let mut g = c.benchmark_group("lift");
    g.sample_size(10);
    g.bench_function("lift nijenhuis D (5 points)", |b| {
        b.iter(|| lifted_nijenhuis_check(black_box(&l), &spec).unwrap())
    });
    g.finish();
}

criterion_group!(benches, jets, structures, transport, lifted);
criterion_main!(benches);
