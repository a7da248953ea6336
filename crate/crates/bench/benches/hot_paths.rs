use criterion::{criterion_group, criterion_main, Criterion};
use kuramoto2c_core::selfcons::{find_all_solutions, Psi, SymmetricCoupling};
use kuramoto2c_core::{
    evolve, k_star_of_l, CouplingConfig, DensityField, DisorderKind, DisorderSpec, InitialSpec,
    SimulationConfig, Simulator,
};
use std::hint::black_box;

fn bench_v(c: &mut Criterion) {
    c.bench_function("v_fn(3.7)", |b| {
        b.iter(|| kuramoto2c_core::v_fn(black_box(3.7)))
    });
}

fn bench_solution_search(c: &mut Criterion) {
    let coupling = SymmetricCoupling::new(5.5, -2.0, Psi::Zero).unwrap();
    c.bench_function("find_all_solutions(5.5, -2)", |b| {
        b.iter(|| find_all_solutions(black_box(&coupling)))
    });
}

fn bench_branch_point(c: &mut Criterion) {
    c.bench_function("k_star_of_l(-2)", |b| {
        b.iter(|| k_star_of_l(black_box(-2.0)).unwrap())
    });
}

fn bench_sde_step(c: &mut Criterion) {
    let cfg = SimulationConfig {
        n1: 1000,
        n2: 1000,
        dt: 0.01,
        steps: 1,
        seed: 1,
        initial: [
            InitialSpec::VonMises {
                mean: 0.0,
                concentration: 4.0,
            },
            InitialSpec::VonMises {
                mean: 0.0,
                concentration: 4.0,
            },
        ],
        coupling: CouplingConfig::symmetric(5.0, 2.0, 1.0).unwrap(),
        disorder: DisorderSpec::new(DisorderKind::PointMassZero).unwrap(),
        community_seeds: None,
        allow_degenerate: false,
    };
    let mut sim = Simulator::new(cfg).unwrap();
    c.bench_function("sde step (2000 oscillators)", |b| {
        b.iter(|| sim.step().unwrap())
    });
}

fn bench_pde_steps(c: &mut Criterion) {
    let mu = DisorderSpec::new(DisorderKind::PointMassZero).unwrap();
    let coupling = CouplingConfig::symmetric(5.0, 2.0, 1.0).unwrap();
    let field = DensityField::von_mises(64, &mu, 0.0, 2.0).unwrap();
    let dt = 0.999 * 0.5 / (64.0 * 64.0);
    c.bench_function("pde 16 steps (64 modes)", |b| {
        b.iter(|| evolve(black_box(&field), &coupling, &mu, dt, 16.0 * dt).unwrap())
    });
}

criterion_group!(
    benches,
    bench_v,
    bench_solution_search,
    bench_branch_point,
    bench_sde_step,
    bench_pde_steps
);
criterion_main!(benches);
