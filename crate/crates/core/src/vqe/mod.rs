//! Variational loop: energy estimation, derivative-free optimization and
//! sampled feasibility/optimality metrics.

pub mod optimizer;

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzBundle;
use crate::problems::{ConstraintSpec, DiagonalHamiltonian};
use crate::sim::{self, Histogram};
use crate::{Error, Result};

use self::optimizer::{CobylaOptions, NelderMeadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Cobyla,
    NelderMead,
}

/// `shots == 0` evaluates the objective exactly. `max_iterations` caps
/// objective evaluations per restart. Initial parameters are uniform in
/// `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    pub shots: usize,
    pub max_iterations: usize,
    pub optimizer: OptimizerKind,
    pub init_seed: u64,
    pub restarts: usize,
    /// Shots for the final measurement at the best parameters.
    pub final_shots: usize,
    /// Initial trust-region radius (COBYLA) or simplex edge (Nelder–Mead).
    pub initial_step: f64,
}

impl Default for VqeConfig {
    fn default() -> Self {
        VqeConfig {
            shots: 2000,
            max_iterations: 300,
            optimizer: OptimizerKind::Cobyla,
            init_seed: 0,
            restarts: 1,
            final_shots: 2000,
            initial_step: 1.0,
        }
    }
}

impl VqeConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::argument("max_iterations must be >= 1"));
        }
        if self.restarts == 0 {
            return Err(Error::argument("restarts must be >= 1"));
        }
        if self.final_shots == 0 {
            return Err(Error::argument("final_shots must be >= 1"));
        }
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return Err(Error::argument("initial_step must be > 0"));
        }
        Ok(())
    }
}

/// What the final histogram is scored against.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub spec: ConstraintSpec,
    pub optimal_set: BTreeSet<u64>,
    pub e_min: f64,
    pub e_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub best_params: Vec<f64>,
    /// Objective value the optimizer recorded at `best_params`.
    pub best_energy: f64,
    /// Objective value of every evaluation, in call order.
    pub energy_trace: Vec<f64>,
    pub final_histogram: Histogram,
    pub feasible_rate: f64,
    pub optimal_rate: f64,
    /// `energy_trace` min-max normalized against the target's spectrum;
    /// empty without a target.
    pub normalized_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct NormalizedEnergy(pub f64);

impl NormalizedEnergy {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `(⟨H⟩ − E_min) / (E_max − E_min)`.
pub fn normalize(h_expect: f64, e_min: f64, e_max: f64) -> Result<NormalizedEnergy> {
    if e_max == e_min {
        return Err(Error::DegenerateSpectrum(e_min));
    }
    if e_max < e_min {
        return Err(Error::argument(format!("e_max {e_max} < e_min {e_min}")));
    }
    Ok(NormalizedEnergy((h_expect - e_min) / (e_max - e_min)))
}

/// Mixes a base seed with a stream index (SplitMix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        ^ stream
            .wrapping_add(0x9e37_79b9_7f4a_7c15)
            .wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sampled mean of `h` over `shots` measurements, or the exact expectation
/// when `shots == 0`.
pub fn estimate_energy(
    bundle: &AnsatzBundle,
    params: &[f64],
    h: &DiagonalHamiltonian,
    shots: usize,
    seed: u64,
) -> Result<f64> {
    let state = sim::run_circuit(&bundle.circuit, params)?;
    if shots == 0 {
        return sim::expectation_diagonal(&state, h);
    }
    if h.num_qubits() != state.num_qubits() {
        return Err(Error::Dimension {
            context: "hamiltonian qubit count",
            expected: state.num_qubits(),
            actual: h.num_qubits(),
        });
    }
    let hist = sim::sample(&state, shots, seed)?;
    Ok(histogram_mean(&hist, h))
}

pub fn histogram_mean(hist: &Histogram, h: &DiagonalHamiltonian) -> f64 {
    let total: u64 = hist.values().sum();
    hist.iter().map(|(&b, &c)| h.value(b) * c as f64).sum::<f64>() / total as f64
}

/// Fraction of shots whose problem-variable projection is feasible, and the
/// fraction that lands in `optimal_set`.
pub fn metrics(
    histogram: &Histogram,
    spec: &ConstraintSpec,
    optimal_set: &BTreeSet<u64>,
) -> Result<(f64, f64)> {
    let total: u64 = histogram.values().sum();
    if total == 0 {
        return Err(Error::argument("empty histogram"));
    }
    let layout = spec.layout();
    let (mut feasible, mut optimal) = (0u64, 0u64);
    for (&basis, &count) in histogram {
        let bits = layout.project(basis);
        if spec.is_feasible(bits) {
            feasible += count;
            if optimal_set.contains(&bits) {
                optimal += count;
            }
        }
    }
    Ok((feasible as f64 / total as f64, optimal as f64 / total as f64))
}

/// Runs the variational loop from uniform-random initial parameters.
///
/// With `shots > 0`, evaluation `k` of restart `r` samples with a seed
/// derived from `(init_seed, r, k)`. The final histogram is a fresh
/// `final_shots` sample at the best parameters. With several restarts the
/// result (and its trace) comes from the restart with the lowest recorded
/// objective.
pub fn optimize(
    bundle: &AnsatzBundle,
    h: &DiagonalHamiltonian,
    config: &VqeConfig,
    target: Option<&Target>,
) -> Result<VqeResult> {
    config.validate()?;
    if h.num_qubits() != bundle.circuit.num_qubits() {
        return Err(Error::Dimension {
            context: "hamiltonian qubit count",
            expected: bundle.circuit.num_qubits(),
            actual: h.num_qubits(),
        });
    }
    let num_params = bundle.circuit.num_parameters();
    let mut best: Option<(Vec<f64>, f64, Vec<f64>)> = None;

    for restart in 0..config.restarts as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.init_seed, restart));
        let x0: Vec<f64> = (0..num_params).map(|_| rng.gen_range(0.0..TAU)).collect();
        let eval_base = derive_seed(config.init_seed, restart.wrapping_add(1 << 32));

        let trace = RefCell::new(Vec::with_capacity(config.max_iterations));
        let failure = RefCell::new(None);
        let objective = |x: &[f64]| -> f64 {
            let k = trace.borrow().len() as u64;
            match estimate_energy(bundle, x, h, config.shots, derive_seed(eval_base, k)) {
                Ok(e) => {
                    trace.borrow_mut().push(e);
                    e
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::INFINITY
                }
            }
        };
        let outcome = match config.optimizer {
            OptimizerKind::Cobyla => optimizer::cobyla(
                objective,
                &x0,
                CobylaOptions {
                    rho_begin: config.initial_step,
                    max_evaluations: config.max_iterations,
                    ..Default::default()
                },
            ),
            OptimizerKind::NelderMead => optimizer::nelder_mead(
                objective,
                &x0,
                NelderMeadOptions {
                    initial_step: config.initial_step,
                    max_evaluations: config.max_iterations,
                    ..Default::default()
                },
            ),
        };
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        if best.as_ref().is_none_or(|b| outcome.fx < b.1) {
            best = Some((outcome.x, outcome.fx, trace.into_inner()));
        }
    }

    let (best_params, best_energy, energy_trace) = best.expect("restarts >= 1");
    let state = sim::run_circuit(&bundle.circuit, &best_params)?;
    let final_histogram = sim::sample(
        &state,
        config.final_shots,
        derive_seed(config.init_seed, u64::MAX),
    )?;
    let (feasible_rate, optimal_rate, normalized_trace) = match target {
        Some(t) => {
            let (f, o) = metrics(&final_histogram, &t.spec, &t.optimal_set)?;
            let norm = energy_trace
                .iter()
                .map(|&e| normalize(e, t.e_min, t.e_max).map(NormalizedEnergy::value))
                .collect::<Result<Vec<_>>>()?;
            (f, o, norm)
        }
        None => (0.0, 0.0, Vec::new()),
    };
    Ok(VqeResult {
        best_params,
        best_energy,
        energy_trace,
        final_histogram,
        feasible_rate,
        optimal_rate,
        normalized_trace,
    })
}
