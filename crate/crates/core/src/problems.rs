//! Constraint families, brute-force oracles and diagonal Hamiltonians.
//!
//! A problem-variable bitstring is a `u64` laid out by
//! [`QubitLayout`]: `x_{i,j}` at bit `j·n + i`, then `y_i`, with auxiliary
//! qubits (if any) above the problem register.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::QubitLayout;
use crate::{Error, Result};

/// Largest problem register the exhaustive oracles will scan.
pub const MAX_ENUMERATION_BITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Tsp,
    Assignment,
    Shift,
    Facility,
    ProductChain,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Tsp,
        Family::Assignment,
        Family::Shift,
        Family::Facility,
        Family::ProductChain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Tsp => "tsp",
            Family::Assignment => "assignment",
            Family::Shift => "shift",
            Family::Facility => "facility",
            Family::ProductChain => "product_chain",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s || f.name().replace('_', "-") == s)
            .ok_or_else(|| Error::argument(format!("unknown family '{s}'")))
    }
}

/// A constraint family with its dimensions.
///
/// * TSP: `n` cities, `m == n`.
/// * Assignment / shift: `n` workers, `m` jobs or shifts, `m <= n`.
/// * Facility: `n` facilities, `m` customers.
/// * Product chain: `n` factors, `m == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub family: Family,
    pub n: usize,
    pub m: usize,
}

impl ConstraintSpec {
    pub fn new(family: Family, n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::argument("dimensions must be >= 1"));
        }
        match family {
            Family::Tsp if n != m => Err(Error::argument("tsp requires n == m")),
            Family::ProductChain if m != 1 => Err(Error::argument("product chain requires m == 1")),
            Family::Assignment | Family::Shift if m > n => Err(Error::argument(format!(
                "{} requires m <= n (got n={n}, m={m})",
                family.name()
            ))),
            _ => Ok(ConstraintSpec { family, n, m }),
        }
    }

    pub fn tsp(n: usize) -> Result<Self> {
        Self::new(Family::Tsp, n, n)
    }

    pub fn assignment(n: usize, m: usize) -> Result<Self> {
        Self::new(Family::Assignment, n, m)
    }

    pub fn shift(n: usize, m: usize) -> Result<Self> {
        Self::new(Family::Shift, n, m)
    }

    pub fn facility(n: usize, m: usize) -> Result<Self> {
        Self::new(Family::Facility, n, m)
    }

    pub fn product_chain(n: usize) -> Result<Self> {
        Self::new(Family::ProductChain, n, 1)
    }

    /// Full ansatz layout, including auxiliary qubits.
    pub fn layout(&self) -> QubitLayout {
        match self.family {
            Family::Tsp | Family::Assignment => QubitLayout::assignment(self.n, self.m),
            Family::Shift => QubitLayout::shift(self.n, self.m),
            Family::Facility => QubitLayout::facility(self.n, self.m),
            Family::ProductChain => QubitLayout::product_chain(self.n),
        }
    }

    pub fn num_bits(&self) -> usize {
        self.layout().problem_bits()
    }

    /// Feasibility of a problem-variable index (bits above the problem
    /// register are ignored).
    pub fn is_feasible(&self, bits: u64) -> bool {
        let l = self.layout();
        let (n, m) = (self.n, self.m);
        let x = |i, j| l.x(bits, i, j) as usize;
        let col_sum = |j| (0..n).map(|i| x(i, j)).sum::<usize>();
        let row_sum = |i| (0..m).map(|j| x(i, j)).sum::<usize>();
        let columns_one_hot = || (0..m).all(|j| col_sum(j) == 1);
        match self.family {
            Family::Tsp => columns_one_hot() && (0..n).all(|i| row_sum(i) == 1),
            Family::Assignment => columns_one_hot() && (0..n).all(|i| row_sum(i) <= 1),
            Family::Shift => columns_one_hot() && (0..n).all(|i| row_sum(i) <= l.y(bits, i) as usize),
            Family::Facility => {
                columns_one_hot() && (0..n).all(|i| l.y(bits, i) || (0..m).all(|j| x(i, j) == 0))
            }
            Family::ProductChain => l.y(bits, 0) == (0..n).all(|i| x(i, 0) == 1),
        }
    }

    /// λ-weighted constraint-violation penalty of a problem-variable index.
    ///
    /// Column one-hot constraints use `λ(Σ_i x_ij − 1)²`; "at most one per
    /// row" uses `λ Σ_{k<j} x_ij x_ik`; `x_ij ≤ y_i` uses `λ x_ij (1 − y_i)`.
    /// Shift scheduling sums the last two. TSP rows reuse the squared form.
    pub fn penalty(&self, bits: u64, lambda: f64) -> Result<f64> {
        let l = self.layout();
        let (n, m) = (self.n, self.m);
        let x = |i, j| l.x(bits, i, j) as i64;
        let sq = |v: i64| (v - 1) * (v - 1);
        let columns: i64 = (0..m).map(|j| sq((0..n).map(|i| x(i, j)).sum())).sum();
        let row_pairs = || -> i64 {
            (0..n)
                .map(|i| {
                    let s: i64 = (0..m).map(|j| x(i, j)).sum();
                    s * (s - 1) / 2
                })
                .sum()
        };
        let coupling = || -> i64 {
            (0..n)
                .filter(|&i| !l.y(bits, i))
                .map(|i| (0..m).map(|j| x(i, j)).sum::<i64>())
                .sum()
        };
        let units = match self.family {
            Family::Tsp => columns + (0..n).map(|i| sq((0..m).map(|j| x(i, j)).sum())).sum::<i64>(),
            Family::Assignment => columns + row_pairs(),
            Family::Shift => columns + row_pairs() + coupling(),
            Family::Facility => columns + coupling(),
            Family::ProductChain => return Err(Error::argument("no penalty encoding for product chain")),
        };
        Ok(lambda * units as f64)
    }

    fn index_from_bits(&self, bits: &[bool]) -> Result<u64> {
        bits_to_index(bits, self.num_bits())
    }
}

pub(crate) fn bits_to_index(bits: &[bool], expected: usize) -> Result<u64> {
    if bits.len() != expected {
        return Err(Error::Dimension {
            context: "problem bitstring",
            expected,
            actual: bits.len(),
        });
    }
    Ok(bits
        .iter()
        .enumerate()
        .fold(0u64, |acc, (k, &b)| acc | ((b as u64) << k)))
}

/// Bit `k` of the returned vector is bit `k` of `index`.
pub fn index_to_bits(index: u64, len: usize) -> Vec<bool> {
    (0..len).map(|k| index >> k & 1 == 1).collect()
}

pub fn check_feasible(spec: &ConstraintSpec, bits: &[bool]) -> Result<bool> {
    Ok(spec.is_feasible(spec.index_from_bits(bits)?))
}

/// Exhaustive scan of the problem register.
pub fn enumerate_feasible(spec: &ConstraintSpec) -> Result<BTreeSet<u64>> {
    let bits = spec.num_bits();
    if bits > MAX_ENUMERATION_BITS {
        return Err(Error::Capacity {
            what: "problem register bits",
            requested: bits,
            limit: MAX_ENUMERATION_BITS,
        });
    }
    Ok((0..1u64 << bits).filter(|&b| spec.is_feasible(b)).collect())
}

/// Facility-location instance: `n` facilities, `m` customers, opening costs
/// `A` and assignment costs `B[i][j]` (facility `i`, customer `j`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FacilityInstance {
    n: usize,
    m: usize,
    #[serde(rename = "A")]
    a: Vec<i64>,
    #[serde(rename = "B")]
    b: Vec<Vec<i64>>,
}

impl FacilityInstance {
    pub fn new(a: Vec<i64>, b: Vec<Vec<i64>>) -> Result<Self> {
        let n = a.len();
        if n == 0 || b.len() != n {
            return Err(Error::Dimension {
                context: "B rows (one per facility)",
                expected: n,
                actual: b.len(),
            });
        }
        let m = b[0].len();
        if m == 0 {
            return Err(Error::argument("instance needs at least one customer"));
        }
        if let Some(row) = b.iter().find(|r| r.len() != m) {
            return Err(Error::Dimension {
                context: "B columns (one per customer)",
                expected: m,
                actual: row.len(),
            });
        }
        Ok(FacilityInstance { n, m, a, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn opening_costs(&self) -> &[i64] {
        &self.a
    }

    pub fn assignment_costs(&self) -> &[Vec<i64>] {
        &self.b
    }

    pub fn spec(&self) -> ConstraintSpec {
        ConstraintSpec {
            family: Family::Facility,
            n: self.n,
            m: self.m,
        }
    }

    pub fn num_bits(&self) -> usize {
        self.n * self.m + self.n
    }

    /// `Σ A_i y_i + Σ B_ij x_ij` of a problem-variable index.
    pub fn energy_of(&self, bits: u64) -> i64 {
        let l = self.spec().layout();
        let open: i64 = (0..self.n).filter(|&i| l.y(bits, i)).map(|i| self.a[i]).sum();
        let assign: i64 = (0..self.n)
            .flat_map(|i| (0..self.m).map(move |j| (i, j)))
            .filter(|&(i, j)| l.x(bits, i, j))
            .map(|(i, j)| self.b[i][j])
            .sum();
        open + assign
    }

    pub fn penalized_energy_of(&self, bits: u64, penalty: PenaltyConfig) -> f64 {
        let p = self
            .spec()
            .penalty(bits, penalty.lambda())
            .expect("facility penalty is defined");
        self.energy_of(bits) as f64 + p
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl<'de> Deserialize<'de> for FacilityInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            m: usize,
            #[serde(rename = "A")]
            a: Vec<i64>,
            #[serde(rename = "B")]
            b: Vec<Vec<i64>>,
        }
        let raw = Raw::deserialize(d)?;
        let inst = FacilityInstance::new(raw.a, raw.b).map_err(serde::de::Error::custom)?;
        if (inst.n, inst.m) != (raw.n, raw.m) {
            return Err(serde::de::Error::custom(format!(
                "declared dims ({}, {}) disagree with A/B shape ({}, {})",
                raw.n, raw.m, inst.n, inst.m
            )));
        }
        Ok(inst)
    }
}

pub fn save_instances(path: &Path, instances: &[FacilityInstance]) -> Result<()> {
    let s = serde_json::to_string_pretty(instances)?;
    fs::write(path, s + "\n").map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn load_instances(path: &Path) -> Result<Vec<FacilityInstance>> {
    let s = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(serde_json::from_str(&s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    lambda: f64,
}

impl PenaltyConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::argument(format!(
                "penalty lambda must be >= 0, got {lambda}"
            )));
        }
        Ok(PenaltyConfig { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

pub fn energy(instance: &FacilityInstance, bits: &[bool]) -> Result<i64> {
    Ok(instance.energy_of(bits_to_index(bits, instance.num_bits())?))
}

pub fn penalized_energy(instance: &FacilityInstance, bits: &[bool], penalty: PenaltyConfig) -> Result<f64> {
    Ok(instance.penalized_energy_of(bits_to_index(bits, instance.num_bits())?, penalty))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    /// Minimum of the penalized energy over all bitstrings.
    pub e_min: f64,
    /// Maximum of the penalized energy over all bitstrings.
    pub e_max: f64,
    /// Constrained optimum of the unpenalized cost.
    pub optimal_energy: i64,
    /// Feasible bitstrings attaining `optimal_energy`.
    pub optimal_set: BTreeSet<u64>,
    /// Bitstrings attaining `e_min`.
    pub penalized_argmin: BTreeSet<u64>,
}

pub fn brute_force_extrema(instance: &FacilityInstance, penalty: PenaltyConfig) -> Result<Extrema> {
    let bits = instance.num_bits();
    if bits > MAX_ENUMERATION_BITS {
        return Err(Error::Capacity {
            what: "problem register bits",
            requested: bits,
            limit: MAX_ENUMERATION_BITS,
        });
    }
    let spec = instance.spec();
    let mut e_min = f64::INFINITY;
    let mut e_max = f64::NEG_INFINITY;
    let mut argmin = BTreeSet::new();
    let mut best = i64::MAX;
    let mut optimal = BTreeSet::new();
    for b in 0..1u64 << bits {
        let e = instance.penalized_energy_of(b, penalty);
        if e < e_min {
            e_min = e;
            argmin.clear();
        }
        if e == e_min {
            argmin.insert(b);
        }
        e_max = e_max.max(e);
        if spec.is_feasible(b) {
            let c = instance.energy_of(b);
            if c < best {
                best = c;
                optimal.clear();
            }
            if c == best {
                optimal.insert(b);
            }
        }
    }
    Ok(Extrema {
        e_min,
        e_max,
        optimal_energy: best,
        optimal_set: optimal,
        penalized_argmin: argmin,
    })
}

/// Random instances with `A_i ∈ {1..5}` and `B_ij ∈ {0,1,2}`, uniform.
pub fn generate_instances(n: usize, m: usize, count: usize, seed: u64) -> Result<Vec<FacilityInstance>> {
    if count == 0 {
        return Err(Error::argument("instance count must be >= 1"));
    }
    if n == 0 || m == 0 {
        return Err(Error::argument("dimensions must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let a = (0..n).map(|_| rng.gen_range(1..=5)).collect();
            let b = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(0..=2)).collect())
                .collect();
            FacilityInstance { n, m, a, b }
        })
        .collect())
}

/// Diagonal observable. `value(b)` looks up the low `register_bits` of the
/// basis index `b`; higher (auxiliary) bits are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHamiltonian {
    num_qubits: usize,
    register_bits: usize,
    table: Vec<f64>,
}

impl DiagonalHamiltonian {
    pub fn new(num_qubits: usize, register_bits: usize, table: Vec<f64>) -> Result<Self> {
        if register_bits > num_qubits {
            return Err(Error::Dimension {
                context: "hamiltonian register bits",
                expected: num_qubits,
                actual: register_bits,
            });
        }
        if table.len() != 1 << register_bits {
            return Err(Error::Dimension {
                context: "hamiltonian table",
                expected: 1 << register_bits,
                actual: table.len(),
            });
        }
        Ok(DiagonalHamiltonian {
            num_qubits,
            register_bits,
            table,
        })
    }

    pub fn from_fn(num_qubits: usize, register_bits: usize, f: impl Fn(u64) -> f64) -> Result<Self> {
        if register_bits > MAX_ENUMERATION_BITS {
            return Err(Error::Capacity {
                what: "hamiltonian register bits",
                requested: register_bits,
                limit: MAX_ENUMERATION_BITS,
            });
        }
        Self::new(
            num_qubits,
            register_bits,
            (0..1u64 << register_bits).map(f).collect(),
        )
    }

    pub fn constant(num_qubits: usize, c: f64) -> Self {
        DiagonalHamiltonian {
            num_qubits,
            register_bits: 0,
            table: vec![c],
        }
    }

    /// The facility cost `Σ A_i y_i + Σ B_ij x_ij` on a `num_qubits` register.
    pub fn facility_cost(instance: &FacilityInstance, num_qubits: usize) -> Result<Self> {
        Self::from_fn(num_qubits, instance.num_bits(), |b| instance.energy_of(b) as f64)
    }

    /// The facility cost plus constraint penalties.
    pub fn facility_penalized(
        instance: &FacilityInstance,
        penalty: PenaltyConfig,
        num_qubits: usize,
    ) -> Result<Self> {
        Self::from_fn(num_qubits, instance.num_bits(), |b| {
            instance.penalized_energy_of(b, penalty)
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn register_bits(&self) -> usize {
        self.register_bits
    }

    #[inline]
    pub fn value(&self, basis: u64) -> f64 {
        self.table[(basis & ((1u64 << self.register_bits) - 1)) as usize]
    }
}
