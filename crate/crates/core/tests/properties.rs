use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use feasvqc::ansatz::{build_facility_ansatz, build_family_ansatz, build_layered_ansatz};
use feasvqc::circuit::{Angle, Circuit, CircuitBuilder, GateInstance, GateKind};
use feasvqc::experiment::{summarize, Method, RunRecord};
use feasvqc::problems::{
    brute_force_extrema, enumerate_feasible, ConstraintSpec, DiagonalHamiltonian, FacilityInstance, Family,
    PenaltyConfig,
};
use feasvqc::sim::{self, Statevector};
use feasvqc::vqe::{self, estimate_energy, metrics, normalize, VqeConfig};

fn random_gate(rng: &mut impl Rng, n: usize) -> GateInstance {
    let mut qubits: Vec<usize> = (0..n).collect();
    qubits.shuffle(rng);
    let angle = rng.gen_range(-7.0..7.0);
    let choices: &[GateKind] = match n {
        1 => &[GateKind::X, GateKind::H, GateKind::Ry],
        2 => &[
            GateKind::X,
            GateKind::H,
            GateKind::Ry,
            GateKind::Cnot,
            GateKind::Cry,
        ],
        _ => &[
            GateKind::X,
            GateKind::H,
            GateKind::Ry,
            GateKind::Cnot,
            GateKind::Cry,
            GateKind::Cswap,
        ],
    };
    match choices[rng.gen_range(0..choices.len())] {
        GateKind::X => GateInstance::x(qubits[0]),
        GateKind::H => GateInstance::h(qubits[0]),
        GateKind::Ry => GateInstance::ry(qubits[0], angle),
        GateKind::Cnot => GateInstance::cnot(qubits[0], qubits[1]),
        GateKind::Cry => GateInstance::cry(qubits[0], qubits[1], angle),
        GateKind::Cswap => GateInstance::cswap(qubits[0], qubits[1], qubits[2]),
    }
}

fn random_circuit(num_qubits: usize, num_gates: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = CircuitBuilder::new(num_qubits);
    for _ in 0..num_gates {
        b.push(random_gate(&mut rng, num_qubits)).unwrap();
    }
    b.finish()
}

fn random_params(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect()
}

/// Family and dims small enough to enumerate quickly.
fn family_dims() -> impl Strategy<Value = (Family, usize, usize)> {
    prop_oneof![
        (1usize..=3).prop_map(|n| (Family::Tsp, n, n)),
        (1usize..=4).prop_flat_map(|n| (Just(Family::Assignment), Just(n), 1..=n)),
        (1usize..=4).prop_flat_map(|n| (Just(Family::Shift), Just(n), 1..=n)),
        (1usize..=3, 1usize..=3).prop_map(|(n, m)| (Family::Facility, n, m)),
        (1usize..=5).prop_map(|n| (Family::ProductChain, n, 1)),
    ]
}

fn random_instance(n: usize, m: usize, seed: u64) -> FacilityInstance {
    feasvqc::problems::generate_instances(n, m, 1, seed)
        .unwrap()
        .remove(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gates_preserve_norm(n in 1usize..=12, gates in 0usize..40, seed in any::<u64>()) {
        let state = sim::run_circuit(&random_circuit(n, gates, seed), &[]).unwrap();
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn gate_then_inverse_is_identity(n in 1usize..=8, prep in 0usize..20, seed in any::<u64>()) {
        let state = sim::run_circuit(&random_circuit(n, prep, seed), &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let gate = random_gate(&mut rng, n);
        let mut after = state.clone();
        after.apply(&gate, &[]).unwrap();
        after.apply(&gate.inverse(), &[]).unwrap();
        for (a, b) in state.amplitudes().iter().zip(after.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn binding_is_pure(
        (family, n, m) in family_dims(),
        seed in any::<u64>(),
    ) {
        let bundle = build_family_ansatz(family, n, m).unwrap();
        let before = bundle.circuit.to_json().unwrap();
        let params = random_params(bundle.circuit.num_parameters(), seed);
        let bound = bundle.circuit.bind(&params).unwrap();
        prop_assert_eq!(before, bundle.circuit.to_json().unwrap());
        prop_assert_eq!(bound.num_parameters(), 0);
        let lhs = sim::run_circuit(&bundle.circuit, &params).unwrap();
        let rhs = sim::run_circuit(&bound, &[]).unwrap();
        prop_assert_eq!(lhs.amplitudes(), rhs.amplitudes());
    }

    #[test]
    fn w_rotations_cancel_after_binding(
        (family, n, m) in family_dims(),
        seed in any::<u64>(),
    ) {
        // parameters referenced twice are W links: +θ and −θ on one qubit
        let circuit = build_family_ansatz(family, n, m).unwrap().circuit;
        let params = random_params(circuit.num_parameters(), seed);
        let bound = circuit.bind(&params).unwrap();
        for p in 0..circuit.num_parameters() {
            let uses: Vec<usize> = circuit
                .gates()
                .iter()
                .enumerate()
                .filter(|(_, g)| matches!(g.angle, Some(Angle::Param(r)) if r.index == p))
                .map(|(i, _)| i)
                .collect();
            if uses.len() == 2 {
                let angle = |i: usize| match bound.gates()[i].angle {
                    Some(Angle::Literal(v)) => v,
                    other => panic!("unbound angle {other:?}"),
                };
                prop_assert_eq!(angle(uses[0]) + angle(uses[1]), 0.0);
                prop_assert_eq!(&bound.gates()[uses[0]].qubits, &bound.gates()[uses[1]].qubits);
            } else {
                prop_assert_eq!(uses.len(), 1);
            }
        }
    }

    #[test]
    fn ansatz_support_is_feasible(
        (family, n, m) in family_dims(),
        seed in any::<u64>(),
    ) {
        let bundle = build_family_ansatz(family, n, m).unwrap();
        let spec = ConstraintSpec::new(family, n, m).unwrap();
        let params = random_params(bundle.circuit.num_parameters(), seed);
        let state = sim::run_circuit(&bundle.circuit, &params).unwrap();
        for basis in state.support(1e-12) {
            prop_assert!(spec.is_feasible(bundle.layout.project(basis)), "basis {basis:b}");
        }
    }

    #[test]
    fn penalty_vanishes_exactly_on_feasible(
        (family, n, m) in family_dims().prop_filter("penalty defined", |f| f.0 != Family::ProductChain),
        bits_seed in any::<u64>(),
        lambda in 0.1f64..50.0,
    ) {
        let spec = ConstraintSpec::new(family, n, m).unwrap();
        let bits = bits_seed & ((1u64 << spec.num_bits()) - 1);
        let p = spec.penalty(bits, lambda).unwrap();
        if spec.is_feasible(bits) {
            prop_assert_eq!(p, 0.0);
        } else {
            prop_assert!(p >= lambda - 1e-12, "penalty {p} for infeasible {bits:b}");
        }
    }

    #[test]
    fn optimal_rate_never_exceeds_feasible_rate(
        counts in prop::collection::vec(0u64..50, 1 << 5),
        optimal_mask in any::<u32>(),
    ) {
        let spec = ConstraintSpec::facility(2, 1).unwrap();
        let hist: sim::Histogram = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(b, &c)| (b as u64, c))
            .collect();
        prop_assume!(!hist.is_empty());
        let optimal: BTreeSet<u64> = (0..32).filter(|b| optimal_mask >> b & 1 == 1).collect();
        let (f, o) = metrics(&hist, &spec, &optimal).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(o <= f);
    }

    #[test]
    fn normalized_energy_is_bounded(
        seed in any::<u64>(),
        lambda in prop::sample::select(vec![5.0, 10.0, 15.0, 20.0]),
        layers in 0usize..3,
    ) {
        let inst = random_instance(2, 2, seed);
        let penalty = PenaltyConfig::new(lambda).unwrap();
        let ex = brute_force_extrema(&inst, penalty).unwrap();
        let bundle = build_layered_ansatz(inst.num_bits(), layers).unwrap();
        let h = DiagonalHamiltonian::facility_penalized(&inst, penalty, inst.num_bits()).unwrap();
        let params = random_params(bundle.circuit.num_parameters(), seed);
        let e = estimate_energy(&bundle, &params, &h, 0, 0).unwrap();
        let eps = normalize(e, ex.e_min, ex.e_max).unwrap().value();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&eps), "eps = {eps}");
    }

    #[test]
    fn aggregation_matches_records(
        rates in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..30),
    ) {
        let methods = [Method::Proposed];
        let records: Vec<RunRecord> = rates
            .iter()
            .enumerate()
            .map(|(i, &(f, o))| RunRecord {
                instance: i,
                method: Method::Proposed,
                feasible_rate: f,
                optimal_rate: o.min(f),
                energy_trace: vec![0.0],
                normalized: vec![],
            })
            .collect();
        let s = &summarize(&methods, &records, records.len())[0];
        let f = 100.0 * records.iter().map(|r| r.feasible_rate).sum::<f64>() / records.len() as f64;
        let o = 100.0 * records.iter().map(|r| r.optimal_rate).sum::<f64>() / records.len() as f64;
        prop_assert!((s.feasible_pct - f).abs() <= 1e-12);
        prop_assert!((s.optimal_pct - o).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn sampled_mean_within_five_standard_errors(seed in any::<u64>()) {
        const SHOTS: usize = 1_000_000;
        let state: Statevector = sim::run_circuit(&random_circuit(5, 25, seed), &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table: Vec<f64> = (0..32).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let h = DiagonalHamiltonian::new(5, 5, table).unwrap();
        let exact = sim::expectation_diagonal(&state, &h).unwrap();
        let second: f64 = state
            .probabilities()
            .iter()
            .enumerate()
            .map(|(b, p)| p * h.value(b as u64).powi(2))
            .sum();
        let se = ((second - exact * exact).max(0.0) / SHOTS as f64).sqrt();
        let hist = sim::sample(&state, SHOTS, seed).unwrap();
        let sampled = vqe::histogram_mean(&hist, &h);
        prop_assert!((sampled - exact).abs() <= 5.0 * se + 1e-12, "{sampled} vs {exact} (se {se})");
    }

    #[test]
    fn optimizer_never_ends_above_its_start(seed in any::<u64>()) {
        let inst = random_instance(2, 2, seed);
        let bundle = build_facility_ansatz(2, 2).unwrap();
        let h = DiagonalHamiltonian::facility_cost(&inst, bundle.circuit.num_qubits()).unwrap();
        let config = VqeConfig { shots: 0, max_iterations: 60, init_seed: seed, ..Default::default() };
        let r = vqe::optimize(&bundle, &h, &config, None).unwrap();
        prop_assert!(r.best_energy <= r.energy_trace[0]);
        prop_assert!(r.energy_trace.contains(&r.best_energy));
        prop_assert_eq!(estimate_energy(&bundle, &r.best_params, &h, 0, 0).unwrap(), r.best_energy);
        let mut best = f64::INFINITY;
        for &e in &r.energy_trace {
            let next = best.min(e);
            prop_assert!(next <= best);
            best = next;
        }
        prop_assert!(r.energy_trace.len() <= 60);
    }
}

#[test]
fn feasible_counts_match_brute_force() {
    for (family, n, m, count) in [
        (Family::Assignment, 3, 2, 6),
        (Family::Shift, 3, 2, 12),
        (Family::Tsp, 3, 3, 6),
        (Family::ProductChain, 3, 1, 8),
        (Family::Facility, 3, 3, 54),
    ] {
        let spec = ConstraintSpec::new(family, n, m).unwrap();
        assert_eq!(enumerate_feasible(&spec).unwrap().len(), count, "{family:?}");
    }
}
