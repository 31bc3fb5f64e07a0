use std::hint::black_box;

use chialvo_core::entropy::count_matches;
use chialvo_core::network::{draw_couplings, network_step};
use chialvo_core::{
    max_lyapunov, run, run_sweep, sample_entropy, step, Axis, ChialvoMap, MetricsReport, NetworkConfig, NeuronParams,
    NeuronState, SampEnConfig, SweepParam, SweepSpec, CounterRng,
};
use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};

fn network(n: usize) -> NetworkConfig {
    NetworkConfig {
        n_nodes: n,
        r_neighbors: 2,
        sigma0: -0.01,
        mu0: 0.001,
        d_sigma: 0.005,
        d_mu: 0.005,
        p_sigma: 2.0 / 3.0,
        p_mu: 1.0,
        seed: 1,
        ..Default::default()
    }
}

fn neuron(c: &mut Criterion) {
    let p = NeuronParams::with_k(-1.0);
    c.bench_function("neuron_step", |b| b.iter(|| step(black_box(&NeuronState::default()), &p)));
    c.bench_function("lyapunov_10k", |b| b.iter(|| max_lyapunov(NeuronState::default(), &p, 1000, 10_000)));
}

fn network_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("network_step");
    for n in [100, 1000] {
        let cfg = network(n);
        let rng = CounterRng::new(1);
        let states: Vec<_> = (0..n).map(|i| NeuronState::new(0.3 + 0.001 * i as f64, 1.0, 1.0)).collect();
        g.bench_with_input(BenchmarkId::new("draw_and_step", n), &n, |b, _| {
            b.iter(|| network_step(&states, &draw_couplings(&cfg, &rng, 7), &cfg))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("run");
    g.sample_size(10);
    let cfg = NetworkConfig {
        n_total: 4000,
        n_transient: 2000,
        ..network(100)
    };
    g.bench_function("n100_4000_steps", |b| b.iter(|| run(&cfg)));
    let traj = run(&cfg).unwrap();
    g.bench_function("metrics_n100_2000_steps", |b| {
        b.iter(|| MetricsReport::compute_with_entropy(&traj, &SampEnConfig::default()))
    });
    g.finish();
}

fn entropy(c: &mut Criterion) {
    let orbit = ChialvoMap::new(NeuronParams::with_k(-1.0)).orbit(NeuronState::default(), 20_000).unwrap();
    let xs: Vec<f64> = orbit[10_000..].iter().map(|s| s.x).collect();
    let mut g = c.benchmark_group("sample_entropy");
    g.sample_size(20);
    g.bench_function("quasiperiodic_10k", |b| b.iter(|| sample_entropy(&xs, &SampEnConfig::default())));
    let noisy: Vec<f64> = (0..10_000).map(|i| ((i as f64) * 12.9898).sin().fract()).collect();
    g.bench_function("irregular_10k_counts", |b| b.iter(|| count_matches(&noisy, 2, 0.05)));
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    let base = NetworkConfig {
        n_nodes: 30,
        n_total: 1000,
        n_transient: 500,
        ..network(30)
    };
    let spec = SweepSpec::grid(
        Axis::new(SweepParam::Sigma0, -0.01, 0.01, 4),
        Axis::new(SweepParam::Mu0, -0.001, 0.001, 4),
        base,
    );
    g.bench_function("grid_4x4", |b| b.iter_batched(|| spec.clone(), |s| run_sweep(&s, None), BatchSize::SmallInput));
    g.finish();
}

criterion_group!(benches, neuron, network_kernels, entropy, sweep);
criterion_main!(benches);
