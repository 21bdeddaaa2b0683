//! Dense statevector simulation.
//!
//! Qubit `q` is bit `q` of the basis index. `Ry(θ)` is
//! `[[cos θ/2, -sin θ/2], [sin θ/2, cos θ/2]]`. CSWAP is applied as a native
//! permutation kernel; its CNOT decomposition only exists in cost accounting.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, GateInstance, GateKind};
use crate::problems::DiagonalHamiltonian;
use crate::{Error, Result};

pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Basis-state index → shot count.
pub type Histogram = BTreeMap<u64, u64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// `|0…0⟩` on `num_qubits` qubits, capped at [`DEFAULT_MAX_QUBITS`].
pub fn init_zero(num_qubits: usize) -> Result<Statevector> {
    Statevector::zero_with_cap(num_qubits, DEFAULT_MAX_QUBITS)
}

/// Applies one gate with a literal angle, consuming the state.
pub fn apply_gate(mut state: Statevector, gate: &GateInstance) -> Result<Statevector> {
    state.apply(gate, &[])?;
    Ok(state)
}

/// Runs `circuit` from `|0…0⟩` with its parameter references resolved
/// against `params`.
pub fn run_circuit(circuit: &Circuit, params: &[f64]) -> Result<Statevector> {
    circuit.check_params(params)?;
    let mut state = init_zero(circuit.num_qubits())?;
    for g in circuit.gates() {
        state.apply(g, params)?;
    }
    Ok(state)
}

/// `Σ_b |amp_b|² h(b)`.
pub fn expectation_diagonal(state: &Statevector, h: &DiagonalHamiltonian) -> Result<f64> {
    if h.num_qubits() != state.num_qubits {
        return Err(Error::Dimension {
            context: "hamiltonian qubit count",
            expected: state.num_qubits,
            actual: h.num_qubits(),
        });
    }
    Ok(state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(b, a)| a.norm_sqr() * h.value(b as u64))
        .sum())
}

/// Draws `shots` measurements in the computational basis.
pub fn sample(state: &Statevector, shots: usize, rng_seed: u64) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::argument("shots must be >= 1"));
    }
    let probs = state.probabilities();
    let dist =
        WeightedIndex::new(&probs).map_err(|e| Error::argument(format!("cannot sample state: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut hist = Histogram::new();
    for _ in 0..shots {
        *hist.entry(dist.sample(&mut rng) as u64).or_insert(0) += 1;
    }
    Ok(hist)
}

impl Statevector {
    pub fn zero_with_cap(num_qubits: usize, max_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > max_qubits {
            return Err(Error::Capacity {
                what: "num_qubits",
                requested: num_qubits,
                limit: max_qubits,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes; the length must be a power of two. No
    /// normalization is applied.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::argument(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > DEFAULT_MAX_QUBITS {
            return Err(Error::Capacity {
                what: "num_qubits",
                requested: num_qubits,
                limit: DEFAULT_MAX_QUBITS,
            });
        }
        Ok(Statevector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, basis: u64) -> Complex64 {
        self.amplitudes[basis as usize]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Basis states with probability above `threshold`.
    pub fn support(&self, threshold: f64) -> impl Iterator<Item = u64> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(move |(_, a)| a.norm_sqr() > threshold)
            .map(|(b, _)| b as u64)
    }

    /// Applies `gate` in place, resolving parameter references against
    /// `params`.
    pub fn apply(&mut self, gate: &GateInstance, params: &[f64]) -> Result<()> {
        gate.validate()?;
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::Index {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        let q = &gate.qubits;
        match gate.kind {
            GateKind::X => self.apply_x(q[0], 0),
            GateKind::Cnot => self.apply_x(q[1], 1 << q[0]),
            GateKind::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                self.apply_real_1q([[s, s], [s, -s]], q[0], 0)
            }
            GateKind::Ry => {
                let theta = gate.angle.expect("validated").resolve(params)?;
                self.apply_real_1q(ry_matrix(theta), q[0], 0)
            }
            GateKind::Cry => {
                let theta = gate.angle.expect("validated").resolve(params)?;
                self.apply_real_1q(ry_matrix(theta), q[1], 1 << q[0])
            }
            GateKind::Cswap => self.apply_cswap(q[0], q[1], q[2]),
        }
        Ok(())
    }

    fn apply_x(&mut self, target: usize, control_mask: usize) {
        let t = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & t == 0 && i & control_mask == control_mask {
                self.amplitudes.swap(i, i | t);
            }
        }
    }

    fn apply_real_1q(&mut self, m: [[f64; 2]; 2], target: usize, control_mask: usize) {
        let t = 1usize << target;
        for i in 0..self.amplitudes.len() {
            if i & t == 0 && i & control_mask == control_mask {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | t];
                self.amplitudes[i] = a0 * m[0][0] + a1 * m[0][1];
                self.amplitudes[i | t] = a0 * m[1][0] + a1 * m[1][1];
            }
        }
    }

    fn apply_cswap(&mut self, control: usize, a: usize, b: usize) {
        let (c, a, b) = (1usize << control, 1usize << a, 1usize << b);
        for i in 0..self.amplitudes.len() {
            // control set, a set, b clear  <->  control set, a clear, b set
            if i & c != 0 && i & a != 0 && i & b == 0 {
                self.amplitudes.swap(i, (i & !a) | b);
            }
        }
    }
}

fn ry_matrix(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [[c, -s], [s, c]]
}
