//! Gate-level circuit representation.
//!
//! Rotation angles are either literals or references into a shared parameter
//! vector. A reference carries a multiplier, so a pair of rotations can share
//! one variational parameter with opposite signs (the zero-sum pairs inside
//! every parameterized W state).
//!
//! Circuits serialize to JSON as
//!
//! ```json
//! {"num_qubits": 2, "num_parameters": 1, "gates": [
//!   {"kind": "ry", "qubits": [1], "angle": {"param": {"index": 0, "multiplier": 1.0}}},
//!   {"kind": "cnot", "qubits": [0, 1]},
//!   {"kind": "ry", "qubits": [0], "angle": {"literal": 0.25}}
//! ]}
//! ```
//!
//! Controls precede targets in `qubits`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ansatz::{self, AnsatzBundle};
use crate::problems::Family;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    X,
    H,
    Ry,
    Cnot,
    Cswap,
    Cry,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::X | GateKind::H | GateKind::Ry => 1,
            GateKind::Cnot | GateKind::Cry => 2,
            GateKind::Cswap => 3,
        }
    }

    pub fn has_angle(self) -> bool {
        matches!(self, GateKind::Ry | GateKind::Cry)
    }

    /// CNOTs needed after decomposition into {CNOT, SU(2)}.
    ///
    /// CSWAP uses the 7-CNOT Fredkin decomposition; CRy uses the two-CNOT
    /// controlled-rotation identity.
    pub fn cnot_cost(self) -> usize {
        match self {
            GateKind::X | GateKind::H | GateKind::Ry => 0,
            GateKind::Cnot => 1,
            GateKind::Cry => 2,
            GateKind::Cswap => 7,
        }
    }

    /// Single-qubit gates after the same decomposition.
    pub fn single_qubit_cost(self) -> usize {
        match self {
            GateKind::X | GateKind::H | GateKind::Ry => 1,
            GateKind::Cnot => 0,
            GateKind::Cry => 2,
            GateKind::Cswap => 9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterRef {
    pub index: usize,
    pub multiplier: f64,
}

impl ParameterRef {
    pub fn new(index: usize) -> Self {
        ParameterRef {
            index,
            multiplier: 1.0,
        }
    }

    pub fn negated(self) -> Self {
        ParameterRef {
            multiplier: -self.multiplier,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Angle {
    Literal(f64),
    Param(ParameterRef),
}

impl Angle {
    /// Resolves the angle against a parameter vector.
    pub fn resolve(&self, params: &[f64]) -> Result<f64> {
        match *self {
            Angle::Literal(v) => Ok(v),
            Angle::Param(r) => params
                .get(r.index)
                .map(|p| r.multiplier * p)
                .ok_or(Error::Dimension {
                    context: "parameter reference",
                    expected: r.index + 1,
                    actual: params.len(),
                }),
        }
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Angle::Literal(v)
    }
}

impl From<ParameterRef> for Angle {
    fn from(r: ParameterRef) -> Self {
        Angle::Param(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateInstance {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<Angle>,
}

impl GateInstance {
    /// Checks arity, distinct qubit roles and angle presence.
    pub fn new(kind: GateKind, qubits: Vec<usize>, angle: Option<Angle>) -> Result<Self> {
        let gate = GateInstance { kind, qubits, angle };
        gate.validate()?;
        Ok(gate)
    }

    pub fn x(q: usize) -> Self {
        Self::unchecked(GateKind::X, vec![q], None)
    }

    pub fn h(q: usize) -> Self {
        Self::unchecked(GateKind::H, vec![q], None)
    }

    pub fn ry(q: usize, angle: impl Into<Angle>) -> Self {
        Self::unchecked(GateKind::Ry, vec![q], Some(angle.into()))
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::unchecked(GateKind::Cnot, vec![control, target], None)
    }

    pub fn cswap(control: usize, a: usize, b: usize) -> Self {
        Self::unchecked(GateKind::Cswap, vec![control, a, b], None)
    }

    pub fn cry(control: usize, target: usize, angle: impl Into<Angle>) -> Self {
        Self::unchecked(GateKind::Cry, vec![control, target], Some(angle.into()))
    }

    fn unchecked(kind: GateKind, qubits: Vec<usize>, angle: Option<Angle>) -> Self {
        GateInstance { kind, qubits, angle }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::Arity(format!(
                "{:?} takes {} qubit(s), got {}",
                self.kind,
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if self.qubits[..i].contains(q) {
                return Err(Error::Arity(format!(
                    "{:?} uses qubit {q} in more than one role",
                    self.kind
                )));
            }
        }
        if self.kind.has_angle() != self.angle.is_some() {
            return Err(Error::Arity(format!(
                "{:?} {} an angle",
                self.kind,
                if self.kind.has_angle() {
                    "requires"
                } else {
                    "does not take"
                }
            )));
        }
        Ok(())
    }

    /// The inverse gate. Parameter references are negated.
    pub fn inverse(&self) -> Self {
        let angle = self.angle.map(|a| match a {
            Angle::Literal(v) => Angle::Literal(-v),
            Angle::Param(r) => Angle::Param(r.negated()),
        });
        GateInstance {
            angle,
            ..self.clone()
        }
    }
}

/// Immutable circuit. Build with [`CircuitBuilder`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    num_qubits: usize,
    num_parameters: usize,
    gates: Vec<GateInstance>,
}

impl Circuit {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_parameters(&self) -> usize {
        self.num_parameters
    }

    pub fn gates(&self) -> &[GateInstance] {
        &self.gates
    }

    /// Replaces every parameter reference by `multiplier * params[index]`.
    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        self.check_params(params)?;
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let angle = match g.angle {
                    Some(a) => Some(Angle::Literal(a.resolve(params)?)),
                    None => None,
                };
                Ok(GateInstance { angle, ..g.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit {
            num_qubits: self.num_qubits,
            num_parameters: 0,
            gates,
        })
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_parameters {
            return Err(Error::Dimension {
                context: "parameter vector",
                expected: self.num_parameters,
                actual: params.len(),
            });
        }
        Ok(())
    }

    pub fn cnot_cost(&self) -> usize {
        self.gates.iter().map(|g| g.kind.cnot_cost()).sum()
    }

    pub fn gate_counts(&self) -> BTreeMap<GateKind, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.gates {
            *counts.entry(g.kind).or_insert(0) += 1;
        }
        counts
    }

    pub fn cost(&self) -> CostReport {
        CostReport {
            num_qubits: self.num_qubits,
            num_parameters: self.num_parameters,
            cnot_count: self.cnot_cost(),
            single_qubit_count: self.gates.iter().map(|g| g.kind.single_qubit_cost()).sum(),
            raw_gate_counts: self.gate_counts(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates a circuit document.
    pub fn from_json(s: &str) -> Result<Circuit> {
        #[derive(Deserialize)]
        struct Raw {
            num_qubits: usize,
            num_parameters: usize,
            gates: Vec<GateInstance>,
        }
        let raw: Raw = serde_json::from_str(s)?;
        let mut b = CircuitBuilder::new(raw.num_qubits);
        b.reserve_parameters(raw.num_parameters);
        for g in raw.gates {
            b.push(g)?;
        }
        Ok(b.finish())
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        Circuit::from_json(&v.to_string()).map_err(serde::de::Error::custom)
    }
}

/// Append-only circuit builder.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    num_qubits: usize,
    num_parameters: usize,
    gates: Vec<GateInstance>,
}

impl CircuitBuilder {
    pub fn new(num_qubits: usize) -> Self {
        CircuitBuilder {
            num_qubits,
            num_parameters: 0,
            gates: Vec::new(),
        }
    }

    /// Allocates a fresh variational parameter.
    pub fn new_parameter(&mut self) -> ParameterRef {
        self.num_parameters += 1;
        ParameterRef::new(self.num_parameters - 1)
    }

    pub fn num_parameters(&self) -> usize {
        self.num_parameters
    }

    pub fn reserve_parameters(&mut self, count: usize) {
        self.num_parameters = self.num_parameters.max(count);
    }

    pub fn push(&mut self, gate: GateInstance) -> Result<&mut Self> {
        gate.validate()?;
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::Index {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        if let Some(Angle::Param(r)) = gate.angle {
            if r.index >= self.num_parameters {
                return Err(Error::Dimension {
                    context: "parameter reference",
                    expected: self.num_parameters,
                    actual: r.index + 1,
                });
            }
        }
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends `fragment` with its local qubit `i` mapped to `qubit_map[i]`.
    /// Parameter references are kept as-is; the parameter count grows to
    /// cover them.
    pub fn append_mapped(&mut self, fragment: &Circuit, qubit_map: &[usize]) -> Result<&mut Self> {
        if qubit_map.len() != fragment.num_qubits {
            return Err(Error::Dimension {
                context: "fragment qubit map",
                expected: fragment.num_qubits,
                actual: qubit_map.len(),
            });
        }
        self.reserve_parameters(fragment.num_parameters);
        for g in &fragment.gates {
            self.push(GateInstance {
                qubits: g.qubits.iter().map(|&q| qubit_map[q]).collect(),
                ..g.clone()
            })?;
        }
        Ok(self)
    }

    pub fn finish(self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            num_parameters: self.num_parameters,
            gates: self.gates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub num_qubits: usize,
    pub num_parameters: usize,
    pub cnot_count: usize,
    /// Single-qubit gates after decomposition (CSWAP: 9, CRy: 2).
    pub single_qubit_count: usize,
    pub raw_gate_counts: BTreeMap<GateKind, usize>,
}

/// How `(n, m)` map onto facility-location roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacilityRoles {
    /// `n` facilities, `m` customers (the builder's native convention).
    #[default]
    FacilitiesN,
    /// `n` customers, `m` facilities (the convention of the summary table).
    CustomersN,
}

/// Closed-form qubit, parameter and CNOT counts for a fully feasible ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub num_qubits: usize,
    pub num_parameters: usize,
    pub cnot_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostComparison {
    pub family: Family,
    /// Facilities for the facility family; otherwise the builder's `n`.
    pub n: usize,
    pub m: usize,
    pub measured: CostReport,
    pub closed_form: ClosedForm,
}

impl CostComparison {
    pub fn qubits_match(&self) -> bool {
        self.measured.num_qubits == self.closed_form.num_qubits
    }

    pub fn parameters_match(&self) -> bool {
        self.measured.num_parameters == self.closed_form.num_parameters
    }

    pub fn cnot_within_bound(&self) -> bool {
        self.measured.cnot_count <= self.closed_form.cnot_bound
    }

    /// The builders emit the maximal gate pattern, so the bound is attained.
    pub fn cnot_tight(&self) -> bool {
        self.measured.cnot_count == self.closed_form.cnot_bound
    }
}

/// Closed-form costs. Facility dims are `(facilities, customers)`.
///
/// Polynomials with fractional coefficients are evaluated over a common
/// denominator so the counts stay exact.
pub fn closed_form(family: Family, n: usize, m: usize) -> ClosedForm {
    let (ni, mi) = (n as i64, m as i64);
    let exact = |num: i64, den: i64| -> usize {
        debug_assert_eq!(num % den, 0, "closed form not integral");
        (num / den) as usize
    };
    match family {
        // mn - m^2/2 - m/2 ; 7m^2n/2 - 7m^3/6 - 3mn/2 - m^2 + m/6
        Family::Assignment | Family::Tsp => ClosedForm {
            num_qubits: n * m,
            num_parameters: exact(2 * mi * ni - mi * mi - mi, 2),
            cnot_bound: exact(
                21 * mi * mi * ni - 7 * mi.pow(3) - 9 * mi * ni - 6 * mi * mi + mi,
                6,
            ),
        },
        // mn - m^2/2 + n - 3m/2 ; W part 2mn - m^2 - m plus CSWAP part
        // 7m^2n/2 - 7m^3/6 + 7mn/2 - 7m^2/2 - 7m/3
        Family::Shift => ClosedForm {
            num_qubits: n * m + n,
            num_parameters: exact(2 * mi * ni - mi * mi + 2 * ni - 3 * mi, 2),
            cnot_bound: exact(
                21 * mi * mi * ni - 7 * mi.pow(3) + 33 * mi * ni - 27 * mi * mi - 20 * mi,
                6,
            ),
        },
        // mn + n - m ; 9mn - 2m
        Family::Facility => ClosedForm {
            num_qubits: n * m + n + m,
            num_parameters: n * m + n - m,
            cnot_bound: 9 * n * m - 2 * m,
        },
        // one CNOT copies x_1 into y, then one CSWAP per further variable
        Family::ProductChain => ClosedForm {
            num_qubits: 2 * n,
            num_parameters: n,
            cnot_bound: 1 + 7 * (n - 1),
        },
    }
}

/// Builds the family ansatz and reports measured costs next to the closed
/// forms. `roles` only matters for the facility family.
pub fn cost_report(family: Family, n: usize, m: usize, roles: FacilityRoles) -> Result<CostComparison> {
    let (n, m) = match (family, roles) {
        (Family::Facility, FacilityRoles::CustomersN) => (m, n),
        _ => (n, m),
    };
    let bundle: AnsatzBundle = match family {
        Family::Tsp => {
            if n != m {
                return Err(Error::argument("tsp requires n == m"));
            }
            ansatz::build_tsp_ansatz(n)?
        }
        Family::Assignment => ansatz::build_assignment_ansatz(n, m)?,
        Family::Shift => ansatz::build_shift_ansatz(n, m)?,
        Family::Facility => ansatz::build_facility_ansatz(n, m)?,
        Family::ProductChain => ansatz::build_product_chain_ansatz(n)?,
    };
    Ok(CostComparison {
        family,
        n,
        m,
        measured: bundle.circuit.cost(),
        closed_form: closed_form(family, n, m),
    })
}
