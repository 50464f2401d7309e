//! Grid-evaluation benchmarks: the rayon-parallel entry points against an
//! explicitly sequential map over the same point evaluators. Build with
//! `--no-default-features` to confirm the sequential fallback matches the
//! sequential baseline.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use qdad::dad::{eta_closed_form, DadSpec};
use qdad::momentum::TransmissionAmplitude;
use qdad::precision::{rat_i64, PrecisionCtx, Rat};
use qdad::pulse::{eval_grid, linspace, GaussianEnvelope, Normalization, TransmittedPulse};

fn fig3a_pulse() -> TransmittedPulse {
    let spec = DadSpec::real(30, rat_i64(1), rat_i64(120)).unwrap();
    let dad = eta_closed_form(&spec, &PrecisionCtx::exact()).unwrap();
    let env = GaussianEnvelope::new(rat_i64(60)).unwrap();
    TransmittedPulse::new(dad, env, Normalization::BestProbabilityScaled)
}

fn envelope_grid(c: &mut Criterion) {
    let ctx = PrecisionCtx::exact();
    let pulse = fig3a_pulse();
    let mut group = c.benchmark_group("envelope_grid");
    group.sample_size(10);
    for n in [64usize, 256] {
        let xs: Vec<Rat> = linspace(&rat_i64(-330), &rat_i64(420), n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("parallel_entry", n), &xs, |b, xs| {
            b.iter(|| eval_grid(&pulse, xs, &ctx).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential_map", n), &xs, |b, xs| {
            let ev = pulse.evaluator(&ctx).unwrap();
            b.iter(|| {
                xs.iter()
                    .map(|x| ev.eval_real(x).unwrap())
                    .collect::<Vec<_>>()
            })
        });
    }
    group.finish();
}

fn transmission_curve(c: &mut Criterion) {
    let ctx = PrecisionCtx::exact();
    let pulse = fig3a_pulse();
    let amp = TransmissionAmplitude::new(&pulse.dad, &ctx).unwrap();
    let mut group = c.benchmark_group("transmission_curve");
    group.sample_size(10);
    for n in [64usize, 256] {
        let ps: Vec<Rat> = linspace(&Rat::new((-2).into(), 10.into()), &Rat::new(2.into(), 10.into()), n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("parallel_entry", n), &ps, |b, ps| {
            b.iter(|| amp.curve(ps).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential_map", n), &ps, |b, ps| {
            b.iter(|| {
                ps.iter()
                    .map(|p| amp.at(p).unwrap())
                    .collect::<Vec<_>>()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, envelope_grid, transmission_curve);
criterion_main!(benches);
