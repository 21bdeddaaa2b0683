//! Fully feasible ansatz builders and the layered baseline.
//!
//! Every fully feasible family is grown one forwarding step at a time: a new
//! one-hot column is prepared as a parameterized W state, fresh qubits join
//! the register, and CSWAPs controlled by the new column move the row that
//! would otherwise violate a constraint into the fresh slot. CSWAPs within a
//! step are emitted in ascending `(u, v)` order.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitBuilder, GateInstance};
use crate::problems::{ConstraintSpec, Family};
use crate::{Error, Result};

/// Maps problem variables onto qubits.
///
/// `x_{i,j}` (row `i < rows`, column `j < cols`) sits at `j·rows + i`,
/// followed by `y_0..y_{y_count}` and then the auxiliary qubits. The problem
/// register is therefore the contiguous low `rows·cols + y_count` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    pub rows: usize,
    pub cols: usize,
    pub y_count: usize,
    pub aux_count: usize,
}

impl QubitLayout {
    pub fn assignment(n: usize, m: usize) -> Self {
        QubitLayout {
            rows: n,
            cols: m,
            y_count: 0,
            aux_count: 0,
        }
    }

    pub fn shift(n: usize, m: usize) -> Self {
        QubitLayout {
            y_count: n,
            ..Self::assignment(n, m)
        }
    }

    pub fn facility(n: usize, m: usize) -> Self {
        QubitLayout {
            rows: n,
            cols: m,
            y_count: n,
            aux_count: m,
        }
    }

    /// `x_i` at `i`, `y` at `n`, then `n − 1` auxiliary qubits.
    pub fn product_chain(n: usize) -> Self {
        QubitLayout {
            rows: n,
            cols: 1,
            y_count: 1,
            aux_count: n.saturating_sub(1),
        }
    }

    /// A register with no problem structure (all qubits are `x_{i,0}`).
    pub fn plain(num_qubits: usize) -> Self {
        Self::assignment(num_qubits, 1)
    }

    pub fn without_aux(self) -> Self {
        QubitLayout { aux_count: 0, ..self }
    }

    #[inline]
    pub fn x_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.rows && j < self.cols);
        j * self.rows + i
    }

    #[inline]
    pub fn y_index(&self, i: usize) -> usize {
        debug_assert!(i < self.y_count);
        self.rows * self.cols + i
    }

    #[inline]
    pub fn aux_index(&self, k: usize) -> usize {
        debug_assert!(k < self.aux_count);
        self.problem_bits() + k
    }

    pub fn problem_bits(&self) -> usize {
        self.rows * self.cols + self.y_count
    }

    pub fn total_qubits(&self) -> usize {
        self.problem_bits() + self.aux_count
    }

    /// Drops auxiliary bits from a basis index.
    #[inline]
    pub fn project(&self, basis: u64) -> u64 {
        basis & ((1u64 << self.problem_bits()) - 1)
    }

    #[inline]
    pub fn x(&self, bits: u64, i: usize, j: usize) -> bool {
        bits >> self.x_index(i, j) & 1 == 1
    }

    #[inline]
    pub fn y(&self, bits: u64, i: usize) -> bool {
        bits >> self.y_index(i) & 1 == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    FullyFeasible,
    Layered { layers: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzBundle {
    pub circuit: Circuit,
    pub layout: QubitLayout,
    /// Constraint family encoded by `layout`; `None` for a bare register.
    pub family: Option<Family>,
    pub dims: (usize, usize),
    pub kind: AnsatzKind,
}

/// Parameterized W state on `d` local qubits, consuming parameters
/// `first_param_index..first_param_index + d − 1`.
///
/// From `|0…0⟩` the output is supported on the `d` one-hot strings; local
/// qubit 0 carries `cos θ₁`, qubit `j` carries `± sin θ₁ ⋯ sin θ_j cos θ_{j+1}`
/// and the last carries `± sin θ₁ ⋯ sin θ_{d−1}`. For `d = 3`:
/// `cos θ₁|100⟩ − sin θ₁ cos θ₂|010⟩ + sin θ₁ sin θ₂|001⟩`.
///
/// Each link between neighbours `a → b` is `Ry(θ)_b · CZ_{ab} · Ry(−θ)_b`
/// followed by `CNOT_{b→a}`, with `CZ = H_b CNOT_{a→b} H_b`: one X gate and
/// `2d − 2` each of H, Ry and CNOT in total.
pub fn build_parameterized_w(d: usize, first_param_index: usize) -> Result<Circuit> {
    if d == 0 {
        return Err(Error::argument("W state needs d >= 1"));
    }
    let mut b = CircuitBuilder::new(d);
    b.reserve_parameters(first_param_index);
    b.push(GateInstance::x(0))?;
    for j in 1..d {
        let (a, t) = (j - 1, j);
        let theta = b.new_parameter();
        b.push(GateInstance::ry(t, theta))?;
        b.push(GateInstance::h(t))?;
        b.push(GateInstance::cnot(a, t))?;
        b.push(GateInstance::h(t))?;
        b.push(GateInstance::ry(t, theta.negated()))?;
        b.push(GateInstance::cnot(t, a))?;
    }
    Ok(b.finish())
}

fn append_w(b: &mut CircuitBuilder, qubits: &[usize]) -> Result<()> {
    let w = build_parameterized_w(qubits.len(), b.num_parameters())?;
    b.append_mapped(&w, qubits)?;
    Ok(())
}

/// Permutation-matrix ansatz for an `n`-city tour.
pub fn build_tsp_ansatz(n: usize) -> Result<AnsatzBundle> {
    if n == 0 {
        return Err(Error::argument("tsp needs n >= 1"));
    }
    let mut bundle = build_assignment_ansatz(n, n)?;
    bundle.family = Some(Family::Tsp);
    Ok(bundle)
}

/// `n` workers, `m ≤ n` jobs: every job gets exactly one worker, every worker
/// at most one job.
pub fn build_assignment_ansatz(n: usize, m: usize) -> Result<AnsatzBundle> {
    check_rows_cols(n, m)?;
    let layout = QubitLayout::assignment(n, m);
    let mut b = CircuitBuilder::new(layout.total_qubits());
    for k in 0..m {
        // rows 0..=fresh are active after this step
        let fresh = n - m + k;
        let column: Vec<_> = (0..=fresh).map(|u| layout.x_index(u, k)).collect();
        append_w(&mut b, &column)?;
        for u in 0..fresh {
            for v in 0..k {
                b.push(GateInstance::cswap(
                    layout.x_index(u, k),
                    layout.x_index(u, v),
                    layout.x_index(fresh, v),
                ))?;
            }
        }
    }
    Ok(bundle(b, layout, Family::Assignment, (n, m)))
}

/// `n` workers, `m ≤ n` shifts: one worker per shift, a worker takes at most
/// one shift and only if employed (`y_i`).
pub fn build_shift_ansatz(n: usize, m: usize) -> Result<AnsatzBundle> {
    check_rows_cols(n, m)?;
    let layout = QubitLayout::shift(n, m);
    let mut b = CircuitBuilder::new(layout.total_qubits());
    for i in 0..n - m {
        let phi = b.new_parameter();
        b.push(GateInstance::ry(layout.y_index(i), phi))?;
    }
    for k in 0..m {
        let fresh = n - m + k;
        let column: Vec<_> = (0..=fresh).map(|u| layout.x_index(u, k)).collect();
        append_w(&mut b, &column)?;
        b.push(GateInstance::x(layout.y_index(fresh)))?;
        for u in 0..fresh {
            let control = layout.x_index(u, k);
            for v in 0..k {
                b.push(GateInstance::cswap(
                    control,
                    layout.x_index(u, v),
                    layout.x_index(fresh, v),
                ))?;
            }
            b.push(GateInstance::cswap(
                control,
                layout.y_index(u),
                layout.y_index(fresh),
            ))?;
        }
    }
    Ok(bundle(b, layout, Family::Shift, (n, m)))
}

/// `n` facilities, `m` customers: each customer is served by exactly one
/// facility and only by an open one. Auxiliary qubits end in either value.
pub fn build_facility_ansatz(n: usize, m: usize) -> Result<AnsatzBundle> {
    if n == 0 || m == 0 {
        return Err(Error::argument("facility needs n >= 1 and m >= 1"));
    }
    let layout = QubitLayout::facility(n, m);
    let mut b = CircuitBuilder::new(layout.total_qubits());
    for i in 0..n {
        let phi = b.new_parameter();
        b.push(GateInstance::ry(layout.y_index(i), phi))?;
    }
    for k in 0..m {
        let column: Vec<_> = (0..n).map(|u| layout.x_index(u, k)).collect();
        append_w(&mut b, &column)?;
        let aux = layout.aux_index(k);
        b.push(GateInstance::x(aux))?;
        for u in 0..n {
            b.push(GateInstance::cswap(layout.x_index(u, k), layout.y_index(u), aux))?;
        }
    }
    Ok(bundle(b, layout, Family::Facility, (n, m)))
}

/// `y = Π x_i` over `n` free binary variables.
pub fn build_product_chain_ansatz(n: usize) -> Result<AnsatzBundle> {
    if n == 0 {
        return Err(Error::argument("product chain needs n >= 1"));
    }
    let layout = QubitLayout::product_chain(n);
    let mut b = CircuitBuilder::new(layout.total_qubits());
    for i in 0..n {
        let phi = b.new_parameter();
        b.push(GateInstance::ry(layout.x_index(i, 0), phi))?;
    }
    let y = layout.y_index(0);
    b.push(GateInstance::cnot(layout.x_index(0, 0), y))?;
    for k in 1..n {
        // x_k = 0 moves the running product out into a fresh |0⟩ auxiliary
        let x = layout.x_index(k, 0);
        b.push(GateInstance::x(x))?;
        b.push(GateInstance::cswap(x, y, layout.aux_index(k - 1)))?;
        b.push(GateInstance::x(x))?;
    }
    Ok(bundle(b, layout, Family::ProductChain, (n, 1)))
}

/// Hardware-efficient baseline on a bare register: an Ry layer, then `l`
/// repetitions of a linear CNOT chain (`q → q+1`) and an Ry layer.
pub fn build_layered_ansatz(num_qubits: usize, l: usize) -> Result<AnsatzBundle> {
    build_layered_for(QubitLayout::plain(num_qubits), None, l)
}

/// The layered baseline over a problem layout (auxiliary qubits dropped).
pub fn build_layered_for(layout: QubitLayout, family: Option<Family>, l: usize) -> Result<AnsatzBundle> {
    let layout = layout.without_aux();
    let q = layout.total_qubits();
    if q == 0 {
        return Err(Error::argument("layered ansatz needs at least one qubit"));
    }
    let mut b = CircuitBuilder::new(q);
    let ry_layer = |b: &mut CircuitBuilder| -> Result<()> {
        for i in 0..q {
            let p = b.new_parameter();
            b.push(GateInstance::ry(i, p))?;
        }
        Ok(())
    };
    ry_layer(&mut b)?;
    for _ in 0..l {
        for i in 0..q - 1 {
            b.push(GateInstance::cnot(i, i + 1))?;
        }
        ry_layer(&mut b)?;
    }
    Ok(AnsatzBundle {
        circuit: b.finish(),
        layout,
        family,
        dims: (layout.rows, layout.cols),
        kind: AnsatzKind::Layered { layers: l },
    })
}

/// Dispatches to the family builder; dims are checked like [`ConstraintSpec::new`].
pub fn build_family_ansatz(family: Family, n: usize, m: usize) -> Result<AnsatzBundle> {
    ConstraintSpec::new(family, n, m)?;
    match family {
        Family::Tsp => build_tsp_ansatz(n),
        Family::Assignment => build_assignment_ansatz(n, m),
        Family::Shift => build_shift_ansatz(n, m),
        Family::Facility => build_facility_ansatz(n, m),
        Family::ProductChain => build_product_chain_ansatz(n),
    }
}

fn check_rows_cols(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::argument(format!("need 1 <= m <= n, got n={n}, m={m}")));
    }
    Ok(())
}

fn bundle(b: CircuitBuilder, layout: QubitLayout, family: Family, dims: (usize, usize)) -> AnsatzBundle {
    let circuit = b.finish();
    debug_assert_eq!(circuit.num_qubits(), layout.total_qubits());
    AnsatzBundle {
        circuit,
        layout,
        family: Some(family),
        dims,
        kind: AnsatzKind::FullyFeasible,
    }
}
