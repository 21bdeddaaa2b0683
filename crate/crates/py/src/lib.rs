//! Python bindings.
//!
//! Structured results (costs, extrema, VQE results) cross the boundary as
//! JSON and come out as plain dicts and lists.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use feasvqc::ansatz::{build_family_ansatz, build_layered_ansatz, build_parameterized_w, AnsatzBundle};
use feasvqc::circuit::{cost_report, FacilityRoles};
use feasvqc::problems::{self, ConstraintSpec, Family, PenaltyConfig};
use feasvqc::vqe::{self, OptimizerKind, Target, VqeConfig};
use feasvqc::{sim, Error};

fn py_err(e: Error) -> PyErr {
    let msg = format!("{}: {e}", e.kind());
    match e {
        Error::Io { .. } => PyIOError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(value).map_err(|e| py_err(e.into()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn family(name: &str) -> PyResult<Family> {
    name.parse().map_err(py_err)
}

/// A parameterized circuit plus the qubit layout it was built for.
#[pyclass(name = "Circuit", module = "feasvqc_py", frozen)]
struct PyCircuit {
    bundle: AnsatzBundle,
}

#[pymethods]
impl PyCircuit {
    #[getter]
    fn num_qubits(&self) -> usize {
        self.bundle.circuit.num_qubits()
    }

    #[getter]
    fn num_parameters(&self) -> usize {
        self.bundle.circuit.num_parameters()
    }

    #[getter]
    fn cnot_count(&self) -> usize {
        self.bundle.circuit.cnot_cost()
    }

    /// Number of problem qubits (the low bits of each basis index).
    #[getter]
    fn problem_bits(&self) -> usize {
        self.bundle.layout.problem_bits()
    }

    fn gate_counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.bundle.circuit.cost().raw_gate_counts)
    }

    fn to_json(&self) -> PyResult<String> {
        self.bundle.circuit.to_json().map_err(py_err)
    }

    /// Final amplitudes as `(re, im)` pairs.
    fn simulate(&self, params: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
        let state = sim::run_circuit(&self.bundle.circuit, &params).map_err(py_err)?;
        Ok(state.amplitudes().iter().map(|a| (a.re, a.im)).collect())
    }

    fn probabilities(&self, params: Vec<f64>) -> PyResult<Vec<f64>> {
        let state = sim::run_circuit(&self.bundle.circuit, &params).map_err(py_err)?;
        Ok(state.probabilities())
    }

    /// Basis indices with probability above `threshold`, projected onto the
    /// problem register.
    #[pyo3(signature = (params, threshold = 1e-12))]
    fn support(&self, params: Vec<f64>, threshold: f64) -> PyResult<Vec<u64>> {
        let state = sim::run_circuit(&self.bundle.circuit, &params).map_err(py_err)?;
        let mut out: Vec<u64> = state
            .support(threshold)
            .map(|b| self.bundle.layout.project(b))
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Shot counts keyed by full basis index.
    fn sample<'py>(
        &self,
        py: Python<'py>,
        params: Vec<f64>,
        shots: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let state = sim::run_circuit(&self.bundle.circuit, &params).map_err(py_err)?;
        let hist = sim::sample(&state, shots, seed).map_err(py_err)?;
        let dict = PyDict::new(py);
        for (k, v) in hist {
            dict.set_item(k, v)?;
        }
        Ok(dict)
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(qubits={}, parameters={}, gates={})",
            self.bundle.circuit.num_qubits(),
            self.bundle.circuit.num_parameters(),
            self.bundle.circuit.gates().len()
        )
    }
}

/// Fully feasible ansatz for a constraint family.
#[pyfunction]
fn build_ansatz(family_name: &str, n: usize, m: usize) -> PyResult<PyCircuit> {
    let bundle = build_family_ansatz(family(family_name)?, n, m).map_err(py_err)?;
    Ok(PyCircuit { bundle })
}

/// Hardware-efficient baseline on `num_qubits` qubits.
#[pyfunction]
fn build_layered(num_qubits: usize, layers: usize) -> PyResult<PyCircuit> {
    let bundle = build_layered_ansatz(num_qubits, layers).map_err(py_err)?;
    Ok(PyCircuit { bundle })
}

/// W-state preparation over `d` qubits with `d - 1` parameters.
#[pyfunction]
fn build_w_state(d: usize) -> PyResult<PyCircuit> {
    let circuit = build_parameterized_w(d, 0).map_err(py_err)?;
    let mut bundle = build_layered_ansatz(d, 0).map_err(py_err)?;
    bundle.circuit = circuit;
    Ok(PyCircuit { bundle })
}

#[pyfunction]
fn enumerate_feasible(family_name: &str, n: usize, m: usize) -> PyResult<Vec<u64>> {
    let spec = ConstraintSpec::new(family(family_name)?, n, m).map_err(py_err)?;
    Ok(problems::enumerate_feasible(&spec)
        .map_err(py_err)?
        .into_iter()
        .collect())
}

#[pyfunction]
fn is_feasible(family_name: &str, n: usize, m: usize, bits: u64) -> PyResult<bool> {
    let spec = ConstraintSpec::new(family(family_name)?, n, m).map_err(py_err)?;
    Ok(spec.is_feasible(bits))
}

/// Measured and closed-form costs; `n` counts facilities for the facility family.
#[pyfunction]
fn cost<'py>(py: Python<'py>, family_name: &str, n: usize, m: usize) -> PyResult<Bound<'py, PyAny>> {
    let report = cost_report(family(family_name)?, n, m, FacilityRoles::FacilitiesN).map_err(py_err)?;
    to_py(py, &report)
}

/// Random facility instances as a list of `{n, m, A, B}` dicts.
#[pyfunction]
fn generate_instances<'py>(
    py: Python<'py>,
    n: usize,
    m: usize,
    count: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let instances = problems::generate_instances(n, m, count, seed).map_err(py_err)?;
    to_py(py, &instances)
}

fn parse_instance(json: &str) -> PyResult<problems::FacilityInstance> {
    problems::FacilityInstance::from_json(json).map_err(py_err)
}

/// Penalized extrema of an instance given as a JSON string.
#[pyfunction]
fn extrema<'py>(py: Python<'py>, instance_json: &str, lam: f64) -> PyResult<Bound<'py, PyAny>> {
    let inst = parse_instance(instance_json)?;
    let ex =
        problems::brute_force_extrema(&inst, PenaltyConfig::new(lam).map_err(py_err)?).map_err(py_err)?;
    to_py(py, &ex)
}

/// Optimizes the proposed ansatz on a facility instance. `lam` only sets the
/// normalization of the returned trace.
#[pyfunction]
#[pyo3(signature = (instance_json, shots = 2000, max_iterations = 300, seed = 0, lam = 5.0, nelder_mead = false))]
fn run_vqe<'py>(
    py: Python<'py>,
    instance_json: &str,
    shots: usize,
    max_iterations: usize,
    seed: u64,
    lam: f64,
    nelder_mead: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let inst = parse_instance(instance_json)?;
    let ex =
        problems::brute_force_extrema(&inst, PenaltyConfig::new(lam).map_err(py_err)?).map_err(py_err)?;
    let result = py
        .detach(|| {
            let bundle = feasvqc::ansatz::build_facility_ansatz(inst.n(), inst.m())?;
            let h = problems::DiagonalHamiltonian::facility_cost(&inst, bundle.circuit.num_qubits())?;
            let config = VqeConfig {
                shots,
                max_iterations,
                init_seed: seed,
                optimizer: if nelder_mead {
                    OptimizerKind::NelderMead
                } else {
                    OptimizerKind::Cobyla
                },
                ..Default::default()
            };
            let target = Target {
                spec: inst.spec(),
                optimal_set: ex.optimal_set.clone(),
                e_min: ex.e_min,
                e_max: ex.e_max,
            };
            vqe::optimize(&bundle, &h, &config, Some(&target))
        })
        .map_err(py_err)?;
    to_py(py, &result)
}

#[pymodule]
fn feasvqc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircuit>()?;
    m.add_function(wrap_pyfunction!(build_ansatz, m)?)?;
    m.add_function(wrap_pyfunction!(build_layered, m)?)?;
    m.add_function(wrap_pyfunction!(build_w_state, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(is_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(cost, m)?)?;
    m.add_function(wrap_pyfunction!(generate_instances, m)?)?;
    m.add_function(wrap_pyfunction!(extrema, m)?)?;
    m.add_function(wrap_pyfunction!(run_vqe, m)?)?;
    Ok(())
}
