use criterion::{black_box, criterion_group, criterion_main, Criterion};
use hfon_cli::{builtin, parse_scenario, seeded_initials};
use hfon_core::*;

fn ramp_opinions(n: usize) -> Vec<FuzzyOpinion> {
    ramp(n, 5.0, 25.0).into_iter().map(|center| FuzzyOpinion { center, sigma: 1.0 }).collect()
}

fn flat(c: &mut Criterion) {
    let state = NetworkState::uniform(ramp_opinions(200), AgentParams::new(0.3, 0.01).unwrap()).unwrap();
    c.bench_function("step_bcfon n=200", |b| {
        b.iter(|| step_bcfon(black_box(&state), &ReferenceScheme::Local, 0).unwrap())
    });

    let cfg = BlfgConfig::new(0.6, 0.01, &ReferenceScheme::Leader, LeaderSignal::Constant(10.0)).unwrap();
    let followers = cfg.followers(ramp_opinions(156)).unwrap();
    c.bench_function("step_blfg n=156", |b| b.iter(|| step_blfg(black_box(&followers), 10.0, &cfg).unwrap()));
}

fn hierarchies(c: &mut Criterion) {
    let spec = build_uniform_hierarchy(&[5, 5, 5], 10.0).unwrap();
    let level = LevelDynamics::new(0.6, 0.01, &ReferenceScheme::Local).unwrap();
    let state = TdState::ramp(&spec, 5.0, 25.0, 1.0, level).unwrap();
    c.bench_function("step_td 4 levels", |b| b.iter(|| step_td(black_box(&state), &spec).unwrap()));

    let config = parse_scenario(builtin("example3").unwrap()).unwrap();
    let seed = config.seed.unwrap();
    let structure = &config.structure;
    let ops = seeded_initials(&config.initial, seed, structure.followers.unwrap());
    let phases: Vec<Phase> = structure.phases.as_ref().unwrap().iter().map(|p| Phase { d: p.d, steps: p.steps }).collect();
    let first = phases[0].d;
    let state = NetworkState::uniform(ops, AgentParams::new(first, config.dynamics.b).unwrap()).unwrap();
    let schedule = PhaseSchedule::new(phases, config.dynamics.b).unwrap();
    let mut group = c.benchmark_group("bottom-up");
    group.sample_size(20);
    group.bench_function("run_bu example3", |b| b.iter(|| run_bu(black_box(&state), &schedule).unwrap()));
    group.finish();
}

criterion_group!(benches, flat, hierarchies);
criterion_main!(benches);
