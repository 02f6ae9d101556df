use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use vmimo_core::config::default_game_config;
use vmimo_core::equilibrium::{enumerate_nash_bruteforce, find_equilibrium, verify_nash};
use vmimo_core::game::{threshold_power, utility_vmimo, GameConfig, StrategyGrid, StrategyProfile};
use vmimo_core::modulation::{bit_error_probability, ModulationScheme};
use vmimo_core::montecarlo::{simulate_frames, stream_rng};

fn ber(c: &mut Criterion) {
    let gammas: Vec<f64> = (0..1000).map(|i| 0.03 + 0.03 * i as f64).collect();
    let mut group = c.benchmark_group("ber_1000_points");
    for scheme in ModulationScheme::ALL {
        group.bench_function(scheme.name(), |b| {
            b.iter(|| {
                gammas
                    .iter()
                    .map(|&g| bit_error_probability(scheme, black_box(g)).unwrap())
                    .sum::<f64>()
            })
        });
    }
    group.finish();
}

fn utility(c: &mut Criterion) {
    let cfg = default_game_config();
    c.bench_function("utility_vmimo", |b| {
        b.iter(|| utility_vmimo(black_box(15.0), &cfg).unwrap())
    });
    c.bench_function("threshold_power", |b| {
        b.iter(|| threshold_power(black_box(&cfg)).unwrap())
    });
}

fn equilibrium(c: &mut Criterion) {
    let mut group = c.benchmark_group("equilibrium");
    for levels in [20usize, 100] {
        let cfg = GameConfig {
            grid: StrategyGrid::uniform(1.0, 100.0, levels).unwrap(),
            n_players: 2,
            ..default_game_config()
        };
        let start = StrategyProfile::all_silent(2);
        group.bench_with_input(BenchmarkId::new("find", levels), &cfg, |b, cfg| {
            b.iter(|| find_equilibrium(cfg, &start, 100).unwrap())
        });
        let eq = find_equilibrium(&cfg, &start, 100).unwrap().profile;
        group.bench_with_input(BenchmarkId::new("verify", levels), &cfg, |b, cfg| {
            b.iter(|| verify_nash(&eq, cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("bruteforce", levels), &cfg, |b, cfg| {
            b.iter(|| enumerate_nash_bruteforce(cfg).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    c.bench_function("simulate_10k_frames", |b| {
        b.iter(|| simulate_frames(0.01, 40, 10_000, &mut stream_rng(1, 0)).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = ber, utility, equilibrium, monte_carlo
}
criterion_main!(benches);
