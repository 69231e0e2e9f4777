use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qk_bench::{call, registry, trotter};
use qk_core::{
    backend_by_name, corpus, execute, extract_composite, parse_operator, ArgValue, BackendConfig, ExecOptions,
    KernelRegistry, QJit,
};

fn trotter_composition(c: &mut Criterion) {
    let mut g = c.benchmark_group("trotter");
    for (name, text) in [("deuteron", corpus::DEUTERON_H), ("h2", corpus::H2)] {
        let op = parse_operator(text).unwrap();
        for steps in [1, 4, 16] {
            let (r, b) = trotter(&op, steps);
            g.bench_with_input(BenchmarkId::new(name, steps), &steps, |bench, _| {
                bench.iter(|| extract_composite(&r, black_box(&b), false).unwrap())
            });
        }
    }
    g.finish();
}

fn compilation(c: &mut Criterion) {
    let mut g = c.benchmark_group("compile");
    for (file, src) in corpus::KERNEL_FILES {
        g.bench_function(BenchmarkId::new("cold", file), |bench| {
            bench.iter(|| KernelRegistry::new().compile_source(black_box(src)).unwrap())
        });
    }
    let jit = QJit::new(Arc::new(KernelRegistry::new()), None);
    jit.compile_source(corpus::GROVER).unwrap();
    g.bench_function("memory-hit/grover", |bench| {
        bench.iter(|| jit.compile_source(black_box(corpus::GROVER)).unwrap())
    });
    g.finish();
}

fn grover_execution(c: &mut Criterion) {
    let r = registry(corpus::GROVER);
    let b = call(
        &r,
        "run_grover",
        vec![
            ("q", ArgValue::Qreg(3)),
            ("oracle_var", ArgValue::Kernel("cz_oracle".into())),
            ("iterations", ArgValue::Int(1)),
        ],
    );
    let qpp = backend_by_name("qpp", BackendConfig::default()).unwrap();
    let opts = ExecOptions {
        shots: 1024,
        seed: 1,
        ..ExecOptions::default()
    };
    c.bench_function("execute/grover-1024-shots", |bench| {
        bench.iter(|| execute(&r, black_box(&b), qpp.as_ref(), &opts).unwrap())
    });
}

criterion_group!(benches, trotter_composition, compilation, grover_execution);
criterion_main!(benches);
