use criterion::{black_box, criterion_group, criterion_main, Criterion};

use cosetcov_core::cover::{build_instance, exact_cover, greedy_cover, ExactLimits};
use cosetcov_core::presets::parse_roster;
use cosetcov_core::walk::{exact_coset_distribution, simulate_walk};
use cosetcov_core::{ball, MarkedGroup, SubgroupOracle, WalkConfig, WalkMeasure};

fn balls(c: &mut Criterion) {
    let f2 = MarkedGroup::from_registry("free:2").unwrap();
    let heis = MarkedGroup::from_registry("heisenberg").unwrap();
    c.bench_function("ball free:2 r=9", |b| {
        b.iter(|| ball(&f2, black_box(9)).unwrap().len())
    });
    c.bench_function("ball heisenberg r=12", |b| {
        b.iter(|| ball(&heis, black_box(12)).unwrap().len())
    });
}

fn covers(c: &mut Criterion) {
    let z2 = MarkedGroup::from_registry("Z^2").unwrap();
    let roster = parse_roster(z2.family(), "lines2").unwrap();
    c.bench_function("build_instance Z^2 lines2 r=8", |b| {
        b.iter(|| build_instance(&z2, ball(&z2, 8).unwrap(), &roster).unwrap())
    });
    let inst = build_instance(&z2, ball(&z2, 4).unwrap(), &roster).unwrap();
    c.bench_function("greedy Z^2 lines2 r=4", |b| {
        b.iter(|| greedy_cover(&inst).unwrap().chosen.len())
    });
    c.bench_function("exact Z^2 lines2 r=4", |b| {
        b.iter(|| {
            exact_cover(&inst, ExactLimits::default())
                .unwrap()
                .chosen
                .len()
        })
    });
}

fn walks(c: &mut Criterion) {
    let z2 = MarkedGroup::from_registry("Z^2").unwrap();
    let f2 = MarkedGroup::from_registry("free:2").unwrap();
    let mu = WalkMeasure::uniform(&z2).unwrap();
    let h = SubgroupOracle::parse(z2.family(), "lattice:[[0,1]]").unwrap();
    c.bench_function("exact coset chain Z^2 vertical n=256", |b| {
        b.iter(|| {
            exact_coset_distribution(&z2, &mu, &h, black_box(256))
                .unwrap()
                .1
                .step
        })
    });
    let mu_f = WalkMeasure::uniform(&f2).unwrap();
    let hf = SubgroupOracle::parse(f2.family(), "freegens:[a]").unwrap();
    c.bench_function("lumped chain free:2 <a> n=256", |b| {
        b.iter(|| {
            exact_coset_distribution(&f2, &mu_f, &hf, black_box(256))
                .unwrap()
                .1
                .step
        })
    });
    let mut g = c.benchmark_group("monte carlo");
    g.sample_size(10);
    g.bench_function("Z^2 n=1000 trials=10^4", |b| {
        b.iter(|| {
            simulate_walk(&z2, &mu, &WalkConfig::new(1000, 10_000, 1))
                .unwrap()
                .trials
        })
    });
    g.finish();
}

criterion_group!(benches, balls, covers, walks);
criterion_main!(benches);
