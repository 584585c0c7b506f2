mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vqa_noise::bounds::{fidelity_bounds, hessian_trace_diag, leading_error};
use vqa_noise::cost::second_derivative;
use vqa_noise::harness::{build_toy_hamiltonian, optimize_noiseless, optimize_noisy, spearman, ToyModelSpec};
use vqa_noise::mitigation::mitigate_stochastic;
use vqa_noise::bounds::VarianceMapping;
use vqa_noise::noise::ChannelSpec;
use vqa_noise::{insert_noise, EvalMode, NoiseSpec, NoisyCircuit, NoisyEvaluator, OptimizerConfig};

use common::random_theta;

#[test]
fn noiseless_optimization_reaches_ground_energy() {
    let seeds = 20;
    let mut hits = 0;
    for seed in 0..seeds {
        let model = build_toy_hamiltonian(&ToyModelSpec::default().reseeded(seed)).unwrap();
        let cf = model.cost_function();
        let res = optimize_noiseless(&cf, &OptimizerConfig::default(), seed).unwrap();
        if res.best.value - 1.0 <= 1e-6 {
            hits += 1;
            let h: Vec<f64> = (0..cf.n_params())
                .map(|i| second_derivative(&cf, &res.best.theta, i).unwrap())
                .collect();
            assert!(h.iter().all(|v| *v >= -1e-8), "{h:?}");
            assert!(hessian_trace_diag(&cf, &res.best.theta, 1e-5).unwrap() >= -8e-8);
        }
    }
    assert!(hits * 10 >= seeds * 9, "{hits}/{seeds}");
}

#[test]
fn ground_state_at_theta_opt() {
    let model = build_toy_hamiltonian(&ToyModelSpec::default()).unwrap();
    let cf = model.cost_function();
    assert!((cf.eval(&model.theta_opt).unwrap() - 1.0).abs() < 1e-12);
    let (lo, hi) = fidelity_bounds(cf.eval(&model.theta_opt).unwrap(), &model.spectrum()).unwrap();
    assert!(lo.abs() < 1e-12 && hi.abs() < 1e-12);
}

#[test]
fn leading_error_within_remainder_at_random_theta() {
    let model = build_toy_hamiltonian(&ToyModelSpec::default()).unwrap();
    let cf = model.cost_function();
    let nc = insert_noise(&model.circuit, &NoiseSpec::depolarizing(1e-4, 1e-3, 1e-3)).unwrap();
    let ev = NoisyEvaluator::new(cf.clone(), nc.clone(), EvalMode::Exact).unwrap();
    let slots = nc.noise_slots();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let theta = random_theta(cf.n_params(), &mut rng);
        let eps = ev.eval(&theta).unwrap().value - cf.eval(&theta).unwrap();
        let le = leading_error(&cf, &nc, &theta, &slots).unwrap();
        assert!((eps - le.leading).abs() <= le.remainder_bound, "{eps} {le:?}");
    }
}

fn uniform_noise(model_circuit: &vqa_noise::Circuit, sigma2: f64) -> NoisyCircuit {
    let template = insert_noise(model_circuit, &NoiseSpec::depolarizing(1e-4, 1e-3, 1e-3)).unwrap();
    let specs = template
        .registry()
        .entries()
        .iter()
        .map(|e| ChannelSpec {
            placement: e.placement,
            generator: e.generator.clone(),
            sigma2,
            origin: e.origin.clone(),
        })
        .collect();
    NoisyCircuit::with_channels(model_circuit.clone(), specs).unwrap()
}

#[test]
fn hessian_trace_tracks_leading_error() {
    let (mut traces, mut leads) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let spec = ToyModelSpec {
            e1: 1.0 + 5.0 * (1 + seed % 10) as f64,
            ..ToyModelSpec::default().reseeded(seed)
        };
        let model = build_toy_hamiltonian(&spec).unwrap();
        let cf = model.cost_function();
        let nc = uniform_noise(&model.circuit, 1e-4);
        traces.push(hessian_trace_diag(&cf, &model.theta_opt, 1e-6).unwrap());
        leads.push(leading_error(&cf, &nc, &model.theta_opt, &nc.noise_slots()).unwrap().leading);
    }
    let rho = spearman(&traces, &leads).unwrap();
    assert!(rho > 0.0, "{rho}");
}

#[test]
fn mitigation_improves_optimized_error() {
    let noise = NoiseSpec::depolarizing(1e-4, 1e-3, 1e-3);
    let mut better = 0;
    let mut worst_grad = 0.0f64;
    for seed in 0..100 {
        let model = build_toy_hamiltonian(&ToyModelSpec::default().reseeded(seed)).unwrap();
        let cf = model.cost_function();
        let nc = insert_noise(&model.circuit, &noise).unwrap();
        let ev = NoisyEvaluator::new(cf.clone(), nc, EvalMode::Exact).unwrap();
        let cfg = OptimizerConfig {
            restarts: 2,
            ..OptimizerConfig::default()
        };
        let best = optimize_noisy(&ev, &cfg, seed).unwrap().best;
        worst_grad = worst_grad.max(best.grad_norm);
        let probs: Vec<f64> = ev.noisy_circuit().registry().entries().iter().map(|e| e.p).collect();
        let rep = mitigate_stochastic(&ev, &best.theta, &probs, VarianceMapping::Exact).unwrap();
        let clean = cf.eval(&best.theta).unwrap();
        if (rep.mitigated - clean).abs() < (rep.raw_noisy - clean).abs() {
            better += 1;
        }
    }
    assert!(better >= 95, "{better}/100");
    assert!(worst_grad < 1e-5, "{worst_grad}");
}
