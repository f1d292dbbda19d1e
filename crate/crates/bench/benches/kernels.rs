use criterion::{black_box, criterion_group, criterion_main, Criterion};
use kstab_bench::{case, corpus_dir};
use kstab_core::caserunner::{compute, numeric_oracle, run_corpus, RunOptions};
use kstab_core::exact::{q, Rational};
use kstab_core::threefold::{verify_chambers, volume_poly};
use kstab_core::zariski::{sweep, volume};
use kstab_core::{build_blowup_plane, build_blowup_quadric, DivisorClass};

fn rationals(c: &mut Criterion) {
    let xs: Vec<Rational> = (1..200).map(|k| q(k * 7 - 500, k + 3)).collect();
    c.bench_function("rational sum of 200", |b| {
        b.iter(|| xs.iter().fold(Rational::ZERO, |acc, x| &acc + &(x * x)))
    });
}

fn surfaces(c: &mut Criterion) {
    c.bench_function("build degree 2 quadric model", |b| b.iter(|| build_blowup_quadric(black_box(6)).unwrap()));
    let m = build_blowup_plane(6).unwrap();
    let d = DivisorClass::from_ints(m.basis(), &[4, -1, -1, -1, -1, -1, 0]).unwrap();
    let z = DivisorClass::from_ints(m.basis(), &[1, -1, -1, 0, 0, 0, 0]).unwrap();
    c.bench_function("cubic surface volume", |b| b.iter(|| volume(&m, black_box(&d))));
    c.bench_function("cubic surface sweep", |b| b.iter(|| sweep(&m, black_box(&d), &z).unwrap()));
}

fn threefolds(c: &mut Criterion) {
    let spec = case("II/IIc_F_s_divisor.toml").spec.unwrap();
    c.bench_function("verify chambers and integrate", |b| {
        b.iter(|| volume_poly(&verify_chambers(black_box(&spec)).unwrap()).unwrap().integrate())
    });
    let curve = case("III/F_curve_S.toml");
    c.bench_function("s_curve with ord bound", |b| b.iter(|| compute(black_box(&curve)).unwrap()));
}

fn corpus(c: &mut Criterion) {
    let dir = corpus_dir();
    c.bench_function("verify corpus", |b| b.iter(|| run_corpus(&dir, None, RunOptions::default()).unwrap()));
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let remark = case("III/E1_remark.toml");
    group.bench_function("threefold midpoint oracle", |b| b.iter(|| numeric_oracle(&remark).unwrap()));
    group.finish();
}

criterion_group!(benches, rationals, surfaces, threefolds, corpus);
criterion_main!(benches);
