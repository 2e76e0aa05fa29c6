use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lrdht_bench::gaussian_path;
use lrdht_core::kernel::kernel_cross_sum;
use lrdht_core::linproc::{ConvolutionMethod, Convolver};
use lrdht_core::statistic::marcinkiewicz_trace;
use lrdht_core::{CoefficientSpec, RunningMeanConfig};

fn convolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("convolution");
    group.sample_size(10);
    let n = 1 << 14;
    for m in [64u64, 1024, 8192] {
        let taps = CoefficientSpec::standard(0.8, m).unwrap().taps(m).unwrap();
        let input = gaussian_path(n + 2 * m as usize, 0.8, 0, 1);
        for (name, method) in [("direct", ConvolutionMethod::Direct), ("fft", ConvolutionMethod::Fft)] {
            let conv = Convolver::new(taps.clone(), n, method);
            group.bench_with_input(BenchmarkId::new(name, m), &input, |b, x| b.iter(|| conv.apply(black_box(x))));
        }
    }
    group.finish();
}

fn statistic(c: &mut Criterion) {
    let cfg = RunningMeanConfig::default();
    let x = gaussian_path(2601, 0.8, 2000, 2);
    c.bench_function("marcinkiewicz_trace n=2601 s=2", |b| {
        b.iter(|| marcinkiewicz_trace(black_box(&x), 2, 0.7, &cfg).unwrap())
    });
}

fn kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_cross_sum");
    group.sample_size(10);
    for radius in [10_000u64, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(radius), &radius, |b, &r| {
            b.iter(|| kernel_cross_sum(0, black_box(100), 0.75, 0.75, r).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, convolution, statistic, kernel);
criterion_main!(benches);
