//! Experiment harness: proposed ansatz versus layered penalty baselines on
//! random facility-location instances, plus the circuit-cost table.
//!
//! Output schemas:
//!
//! * `report.json` – the serialized [`ExperimentReport`] (plan, instances,
//!   summary, aggregated traces, per-run records).
//! * `summary.csv` – `method,layers,lambda,feasible_pct,optimal_pct`, one row
//!   per method; `lambda` is empty for the proposed ansatz.
//! * `traces.csv` – `method,layers,lambda,iteration,mean,std`, one row per
//!   trace series and iteration (1-based). The proposed ansatz has one series
//!   per λ since each λ normalizes against its own spectrum.
//!
//! Rates are averaged per instance, then across instances. Traces shorter
//! than `max_iterations` (early optimizer stop) are padded with their last
//! value; `std` is the population standard deviation across instances.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_facility_ansatz, build_layered_for, QubitLayout};
use crate::circuit::{closed_form, cost_report, CostComparison, FacilityRoles};
use crate::problems::{
    brute_force_extrema, generate_instances, DiagonalHamiltonian, Extrema, FacilityInstance, Family,
    PenaltyConfig, MAX_ENUMERATION_BITS,
};
use crate::sim::DEFAULT_MAX_QUBITS;
use crate::vqe::{self, derive_seed, normalize, OptimizerKind, Target, VqeConfig};
use crate::{Error, Result};

pub const DEFAULT_LAMBDAS: [f64; 4] = [5.0, 10.0, 15.0, 20.0];
pub const DEFAULT_LAYERS: [usize; 3] = [1, 2, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub family: Family,
    /// Facilities.
    pub n: usize,
    /// Customers.
    pub m: usize,
    pub instance_count: usize,
    pub seed: u64,
    pub shots: usize,
    pub max_iterations: usize,
    pub lambdas: Vec<f64>,
    pub layers: Vec<usize>,
    pub include_proposed: bool,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    /// Explicit instances; generated from `seed` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<Vec<FacilityInstance>>,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            family: Family::Facility,
            n: 3,
            m: 3,
            instance_count: 20,
            seed: 0,
            shots: 2000,
            max_iterations: 300,
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            layers: DEFAULT_LAYERS.to_vec(),
            include_proposed: true,
            optimizer: OptimizerKind::Cobyla,
            instances: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Proposed,
    Layered { layers: usize, lambda: f64 },
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Proposed => "proposed".to_string(),
            Method::Layered { layers, .. } => format!("{layers}-layer"),
        }
    }

    pub fn layers(&self) -> Option<usize> {
        match self {
            Method::Proposed => None,
            Method::Layered { layers, .. } => Some(*layers),
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self {
            Method::Proposed => None,
            Method::Layered { lambda, .. } => Some(*lambda),
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.family != Family::Facility {
            return Err(Error::argument(format!(
                "experiments need a cost Hamiltonian; only the facility family has one (got {})",
                self.family.name()
            )));
        }
        if self.n == 0 || self.m == 0 {
            return Err(Error::argument("dimensions must be >= 1"));
        }
        let qubits = QubitLayout::facility(self.n, self.m).total_qubits();
        if qubits > DEFAULT_MAX_QUBITS {
            return Err(Error::Capacity {
                what: "ansatz qubits",
                requested: qubits,
                limit: DEFAULT_MAX_QUBITS,
            });
        }
        if self.n * self.m + self.n > MAX_ENUMERATION_BITS {
            return Err(Error::Capacity {
                what: "problem register bits",
                requested: self.n * self.m + self.n,
                limit: MAX_ENUMERATION_BITS,
            });
        }
        if self.instance_count == 0 {
            return Err(Error::argument("instance_count must be >= 1"));
        }
        if self.max_iterations == 0 {
            return Err(Error::argument("max_iterations must be >= 1"));
        }
        if self.lambdas.is_empty() {
            return Err(Error::argument("at least one lambda is needed for normalization"));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::argument(format!("lambda must be > 0, got {l}")));
        }
        if !self.include_proposed && self.layers.is_empty() {
            return Err(Error::argument("plan has no methods"));
        }
        if let Some(inst) = &self.instances {
            if inst.len() != self.instance_count {
                return Err(Error::Dimension {
                    context: "explicit instances",
                    expected: self.instance_count,
                    actual: inst.len(),
                });
            }
            if let Some(bad) = inst.iter().find(|i| (i.n(), i.m()) != (self.n, self.m)) {
                return Err(Error::argument(format!(
                    "instance dims ({}, {}) differ from plan ({}, {})",
                    bad.n(),
                    bad.m(),
                    self.n,
                    self.m
                )));
            }
        }
        Ok(())
    }

    /// Proposed first, then layered baselines ordered by `(layers, λ)`.
    pub fn methods(&self) -> Vec<Method> {
        let mut methods = Vec::new();
        if self.include_proposed {
            methods.push(Method::Proposed);
        }
        for &layers in &self.layers {
            for &lambda in &self.lambdas {
                methods.push(Method::Layered { layers, lambda });
            }
        }
        methods
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSeries {
    pub lambda: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: usize,
    pub method: Method,
    pub feasible_rate: f64,
    pub optimal_rate: f64,
    pub energy_trace: Vec<f64>,
    /// One series per λ for the proposed ansatz, one for a baseline.
    pub normalized: Vec<NormalizedSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub feasible_pct: f64,
    pub optimal_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub method: Method,
    pub lambda: f64,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub plan: ExperimentPlan,
    pub instances: Vec<FacilityInstance>,
    pub summary: Vec<MethodSummary>,
    pub traces: Vec<TraceSummary>,
    pub records: Vec<RunRecord>,
}

impl ExperimentReport {
    pub fn summary_for(&self, method: &Method) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| &s.method == method)
    }

    pub fn trace_for(&self, method: &Method, lambda: f64) -> Option<&TraceSummary> {
        self.traces
            .iter()
            .find(|t| &t.method == method && t.lambda == lambda)
    }
}

struct Prepared {
    instance: FacilityInstance,
    /// Indexed like `plan.lambdas`.
    extrema: Vec<Extrema>,
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let instances = match &plan.instances {
        Some(v) => v.clone(),
        None => generate_instances(plan.n, plan.m, plan.instance_count, plan.seed)?,
    };
    let prepared = instances
        .par_iter()
        .map(|inst| {
            let extrema = plan
                .lambdas
                .iter()
                .map(|&l| brute_force_extrema(inst, PenaltyConfig::new(l)?))
                .collect::<Result<Vec<_>>>()?;
            Ok(Prepared {
                instance: inst.clone(),
                extrema,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let methods = plan.methods();
    let jobs: Vec<(usize, usize)> = (0..prepared.len())
        .flat_map(|i| (0..methods.len()).map(move |k| (i, k)))
        .collect();
    // rayon's indexed collect keeps (instance, method) order
    let records = jobs
        .par_iter()
        .map(|&(i, k)| run_one(plan, i, &prepared[i], methods[k], k))
        .collect::<Result<Vec<_>>>()?;

    let summary = summarize(&methods, &records, plan.instance_count);
    let traces = aggregate_traces(plan, &methods, &records);
    Ok(ExperimentReport {
        plan: plan.clone(),
        instances,
        summary,
        traces,
        records,
    })
}

fn run_one(
    plan: &ExperimentPlan,
    index: usize,
    prep: &Prepared,
    method: Method,
    method_index: usize,
) -> Result<RunRecord> {
    let inst = &prep.instance;
    let spec = inst.spec();
    let config = VqeConfig {
        shots: plan.shots,
        max_iterations: plan.max_iterations,
        optimizer: plan.optimizer,
        init_seed: derive_seed(derive_seed(plan.seed, index as u64), method_index as u64),
        final_shots: if plan.shots == 0 { 2000 } else { plan.shots },
        ..Default::default()
    };
    let (bundle, h, lambda_slot) = match method {
        Method::Proposed => {
            let bundle = build_facility_ansatz(plan.n, plan.m)?;
            let h = DiagonalHamiltonian::facility_cost(inst, bundle.circuit.num_qubits())?;
            (bundle, h, 0)
        }
        Method::Layered { layers, lambda } => {
            let slot = plan
                .lambdas
                .iter()
                .position(|&l| l == lambda)
                .expect("methods are built from plan.lambdas");
            let bundle = build_layered_for(spec.layout(), Some(Family::Facility), layers)?;
            let penalty = PenaltyConfig::new(lambda)?;
            let h = DiagonalHamiltonian::facility_penalized(inst, penalty, bundle.circuit.num_qubits())?;
            (bundle, h, slot)
        }
    };
    let ex = &prep.extrema[lambda_slot];
    let target = Target {
        spec,
        optimal_set: ex.optimal_set.clone(),
        e_min: ex.e_min,
        e_max: ex.e_max,
    };
    let result = vqe::optimize(&bundle, &h, &config, Some(&target))?;

    let normalized = match method {
        Method::Proposed => plan
            .lambdas
            .iter()
            .zip(&prep.extrema)
            .map(|(&lambda, ex)| {
                let values = result
                    .energy_trace
                    .iter()
                    .map(|&e| normalize(e, ex.e_min, ex.e_max).map(|v| v.value()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(NormalizedSeries { lambda, values })
            })
            .collect::<Result<Vec<_>>>()?,
        Method::Layered { lambda, .. } => vec![NormalizedSeries {
            lambda,
            values: result.normalized_trace.clone(),
        }],
    };
    Ok(RunRecord {
        instance: index,
        method,
        feasible_rate: result.feasible_rate,
        optimal_rate: result.optimal_rate,
        energy_trace: result.energy_trace,
        normalized,
    })
}

/// Per-method mean rates in percent.
pub fn summarize(methods: &[Method], records: &[RunRecord], instance_count: usize) -> Vec<MethodSummary> {
    methods
        .iter()
        .map(|method| {
            let runs: Vec<_> = records.iter().filter(|r| &r.method == method).collect();
            debug_assert_eq!(runs.len(), instance_count);
            let mean =
                |f: fn(&RunRecord) -> f64| 100.0 * runs.iter().map(|r| f(r)).sum::<f64>() / runs.len() as f64;
            MethodSummary {
                method: *method,
                feasible_pct: mean(|r| r.feasible_rate),
                optimal_pct: mean(|r| r.optimal_rate),
            }
        })
        .collect()
}

fn aggregate_traces(plan: &ExperimentPlan, methods: &[Method], records: &[RunRecord]) -> Vec<TraceSummary> {
    let mut out = Vec::new();
    for method in methods {
        let lambdas: Vec<f64> = match method {
            Method::Proposed => plan.lambdas.clone(),
            Method::Layered { lambda, .. } => vec![*lambda],
        };
        for lambda in lambdas {
            let series: Vec<Vec<f64>> = records
                .iter()
                .filter(|r| &r.method == method)
                .filter_map(|r| r.normalized.iter().find(|s| s.lambda == lambda))
                .map(|s| pad(&s.values, plan.max_iterations))
                .collect();
            let count = series.len() as f64;
            let mean: Vec<f64> = (0..plan.max_iterations)
                .map(|t| series.iter().map(|s| s[t]).sum::<f64>() / count)
                .collect();
            let std = (0..plan.max_iterations)
                .map(|t| {
                    let var = series.iter().map(|s| (s[t] - mean[t]).powi(2)).sum::<f64>() / count;
                    var.sqrt()
                })
                .collect();
            out.push(TraceSummary {
                method: *method,
                lambda,
                mean,
                std,
            });
        }
    }
    out
}

fn pad(values: &[f64], len: usize) -> Vec<f64> {
    let last = *values.last().expect("every run evaluates at least once");
    let mut v: Vec<f64> = values.iter().copied().take(len).collect();
    v.resize(len, last);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::argument(format!("unknown format '{s}' (json|csv)"))),
        }
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the report into `dir` and returns the written paths.
pub fn emit_report(report: &ExperimentReport, dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_owned(),
        source,
    })?;
    match format {
        ReportFormat::Json => {
            let path = dir.join("report.json");
            let s = serde_json::to_string_pretty(report)? + "\n";
            write_file(&path, s.as_bytes())?;
            Ok(vec![path])
        }
        ReportFormat::Csv => {
            let mut summary = String::from("method,layers,lambda,feasible_pct,optimal_pct\n");
            for s in &report.summary {
                let _ = writeln!(
                    summary,
                    "{},{},{},{},{}",
                    s.method.label(),
                    fmt_opt(s.method.layers()),
                    fmt_opt(s.method.lambda()),
                    s.feasible_pct,
                    s.optimal_pct
                );
            }
            let mut traces = String::from("method,layers,lambda,iteration,mean,std\n");
            for t in &report.traces {
                for (k, (mean, std)) in t.mean.iter().zip(&t.std).enumerate() {
                    let _ = writeln!(
                        traces,
                        "{},{},{},{},{},{}",
                        t.method.label(),
                        fmt_opt(t.method.layers()),
                        t.lambda,
                        k + 1,
                        mean,
                        std
                    );
                }
            }
            let (sp, tp) = (dir.join("summary.csv"), dir.join("traces.csv"));
            write_file(&sp, summary.as_bytes())?;
            write_file(&tp, traces.as_bytes())?;
            Ok(vec![sp, tp])
        }
    }
}

pub fn load_report(path: &Path) -> Result<ExperimentReport> {
    let s = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(serde_json::from_str(&s)?)
}

/// Feasible/optimal percentages laid out with one column per method.
pub fn format_summary_table(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let header: Vec<String> = report
        .summary
        .iter()
        .map(|s| match s.method {
            Method::Proposed => "proposed".to_string(),
            Method::Layered { layers, lambda } => format!("l={layers},λ={lambda}"),
        })
        .collect();
    let _ = write!(out, "{:<16}", "");
    for h in &header {
        let _ = write!(out, "{h:>14}");
    }
    out.push('\n');
    for (name, pick) in [
        (
            "feasible (%)",
            (|s: &MethodSummary| s.feasible_pct) as fn(&MethodSummary) -> f64,
        ),
        ("optimal (%)", |s: &MethodSummary| s.optimal_pct),
    ] {
        let _ = write!(out, "{name:<16}");
        for s in &report.summary {
            let _ = write!(out, "{:>14.2}", pick(s));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub comparison: CostComparison,
    /// `(l, parameters)` of the layered baseline on the problem register.
    pub layered_parameters: Vec<(usize, usize)>,
}

/// Measured versus closed-form costs for every family and every
/// `1 ≤ m ≤ n ≤ max_n` (TSP: `m = n`; product chain: `m = 1`).
pub fn cost_table(families: &[Family], max_n: usize, layers: &[usize]) -> Result<Vec<CostRow>> {
    let mut rows = Vec::new();
    for &family in families {
        for n in 1..=max_n {
            let ms: Vec<usize> = match family {
                Family::Tsp => vec![n],
                Family::ProductChain => vec![1],
                _ => (1..=n).collect(),
            };
            for m in ms {
                let comparison = cost_report(family, n, m, FacilityRoles::FacilitiesN)?;
                let register =
                    closed_form(family, n, m).num_qubits - if family == Family::Facility { m } else { 0 };
                let register = if family == Family::ProductChain {
                    n + 1
                } else {
                    register
                };
                rows.push(CostRow {
                    comparison,
                    layered_parameters: layers.iter().map(|&l| (l, (l + 1) * register)).collect(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn format_cost_table(rows: &[CostRow]) -> String {
    let mut out = format!(
        "{:<14}{:>3}{:>3} {:>7}{:>7} {:>7}{:>7} {:>6}{:>7}  {:<6} {}\n",
        "family", "n", "m", "qubits", "(cf)", "params", "(cf)", "cnots", "(≤cf)", "check", "layered l:params"
    );
    for r in rows {
        let c = &r.comparison;
        let ok = c.qubits_match() && c.parameters_match() && c.cnot_within_bound();
        let status = match (ok, c.cnot_tight()) {
            (true, true) => "tight",
            (true, false) => "bound",
            (false, _) => "FAIL",
        };
        let layered: Vec<String> = r
            .layered_parameters
            .iter()
            .map(|(l, p)| format!("{l}:{p}"))
            .collect();
        let _ = writeln!(
            out,
            "{:<14}{:>3}{:>3} {:>7}{:>7} {:>7}{:>7} {:>6}{:>7}  {:<6} {}",
            c.family.name(),
            c.n,
            c.m,
            c.measured.num_qubits,
            c.closed_form.num_qubits,
            c.measured.num_parameters,
            c.closed_form.num_parameters,
            c.measured.cnot_count,
            c.closed_form.cnot_bound,
            status,
            layered.join(" ")
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_plan() -> ExperimentPlan {
        ExperimentPlan {
            n: 2,
            m: 2,
            instance_count: 2,
            max_iterations: 5,
            shots: 200,
            lambdas: vec![5.0, 10.0],
            layers: vec![1],
            ..Default::default()
        }
    }

    #[test]
    fn plan_validation() {
        assert!(ExperimentPlan::default().validate().is_ok());
        let bad = [
            ExperimentPlan {
                family: Family::Assignment,
                ..tiny_plan()
            },
            ExperimentPlan {
                instance_count: 0,
                ..tiny_plan()
            },
            ExperimentPlan {
                lambdas: vec![0.0],
                ..tiny_plan()
            },
            ExperimentPlan {
                lambdas: vec![],
                ..tiny_plan()
            },
            ExperimentPlan {
                include_proposed: false,
                layers: vec![],
                ..tiny_plan()
            },
        ];
        for p in bad {
            assert!(matches!(p.validate(), Err(Error::Argument(_))), "{p:?}");
        }
        let too_big = ExperimentPlan {
            n: 4,
            m: 5,
            ..tiny_plan()
        };
        assert!(matches!(too_big.validate(), Err(Error::Capacity { .. })));
    }

    #[test]
    fn method_order() {
        let m = tiny_plan().methods();
        assert_eq!(m[0], Method::Proposed);
        assert_eq!(
            m[1],
            Method::Layered {
                layers: 1,
                lambda: 5.0
            }
        );
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn minimal_plan_has_single_point_trace() {
        let plan = ExperimentPlan {
            instance_count: 1,
            max_iterations: 1,
            layers: vec![],
            ..tiny_plan()
        };
        let report = run_experiment(&plan).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.traces.len(), 2);
        assert!(report.traces.iter().all(|t| t.mean.len() == 1 && t.std[0] == 0.0));
        assert_eq!(report.summary[0].feasible_pct, 100.0);
    }

    #[test]
    fn summary_means_match_records() {
        let report = run_experiment(&tiny_plan()).unwrap();
        for s in &report.summary {
            let runs: Vec<_> = report.records.iter().filter(|r| r.method == s.method).collect();
            assert_eq!(runs.len(), 2);
            let f = 100.0 * runs.iter().map(|r| r.feasible_rate).sum::<f64>() / 2.0;
            assert!((f - s.feasible_pct).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_plans_give_identical_reports() {
        let plan = ExperimentPlan {
            instance_count: 1,
            ..tiny_plan()
        };
        assert_eq!(run_experiment(&plan).unwrap(), run_experiment(&plan).unwrap());
    }

    #[test]
    fn emitted_reports_round_trip() {
        let report = run_experiment(&tiny_plan()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let first = emit_report(&report, dir.path(), ReportFormat::Json).unwrap();
        let loaded = load_report(&first[0]).unwrap();
        assert_eq!(loaded, report);
        let again = dir.path().join("again");
        let second = emit_report(&loaded, &again, ReportFormat::Json).unwrap();
        assert_eq!(fs::read(&first[0]).unwrap(), fs::read(&second[0]).unwrap());

        let csv = emit_report(&report, dir.path(), ReportFormat::Csv).unwrap();
        let traces = fs::read_to_string(&csv[1]).unwrap();
        // proposed has one series per λ, each baseline one
        assert_eq!(traces.lines().count(), 1 + (2 + 2) * 5);
        assert!(matches!(
            emit_report(&report, &csv[0].join("nested"), ReportFormat::Json),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn padding_repeats_last_value() {
        assert_eq!(pad(&[1.0, 2.0], 4), vec![1.0, 2.0, 2.0, 2.0]);
        assert_eq!(pad(&[1.0, 2.0, 3.0], 2), vec![1.0, 2.0]);
    }

    #[test]
    fn cost_table_rows() {
        let rows = cost_table(&[Family::Facility], 3, &[1, 2, 3]).unwrap();
        let r = rows
            .iter()
            .find(|r| r.comparison.n == 3 && r.comparison.m == 3)
            .unwrap();
        assert_eq!(r.comparison.measured.num_qubits, 15);
        assert_eq!(r.comparison.measured.num_parameters, 9);
        assert_eq!(r.layered_parameters, vec![(1, 24), (2, 36), (3, 48)]);
        let text = format_cost_table(&rows);
        assert!(!text.contains("FAIL"));
    }
}
