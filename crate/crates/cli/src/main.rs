//! `feasvqc` command-line harness.
//!
//! Failures print `{"error": <kind>, "message": <text>}` on stderr and exit
//! with status 2 (usage) or 1 (everything else).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use feasvqc::experiment::{
    cost_table, emit_report, format_cost_table, format_summary_table, load_report, run_experiment, CostRow,
    ExperimentPlan, ReportFormat, DEFAULT_LAMBDAS, DEFAULT_LAYERS,
};
use feasvqc::problems::{generate_instances, load_instances, save_instances, Family};
use feasvqc::vqe::OptimizerKind;
use feasvqc::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "feasvqc", version, about = "Feasibility-preserving VQE experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write random facility-location instances as a JSON array.
    GenInstances(GenArgs),
    /// Run the proposed ansatz and the layered baselines; writes report.json.
    Run(RunArgs),
    /// Measured circuit costs beside their closed forms.
    CostTable(CostArgs),
    /// Re-emit a saved report.json as JSON or CSV.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value = "facility", value_parser = parse_family)]
    family: Family,
    /// Facilities.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Customers.
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value = "facility", value_parser = parse_family)]
    family: Family,
    /// Facilities.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Customers.
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Number of generated instances (ignored with --input).
    #[arg(long, default_value_t = 20)]
    instances: usize,
    /// Instance file from `gen-instances`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    shots: usize,
    /// Objective evaluations per run.
    #[arg(long = "max-iter", default_value_t = 300)]
    max_iter: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAMBDAS)]
    lambda: Vec<f64>,
    /// Baseline depths.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAYERS)]
    layers: Vec<usize>,
    /// Skip the layered baselines.
    #[arg(long)]
    no_baselines: bool,
    /// Skip the proposed ansatz.
    #[arg(long)]
    no_proposed: bool,
    #[arg(long)]
    nelder_mead: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Args, Debug)]
struct CostArgs {
    /// Families to tabulate; all when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    family: Vec<Family>,
    /// Largest n of the sweep.
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Keep only rows with this m.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAYERS)]
    layers: Vec<usize>,
    /// text, json or csv.
    #[arg(long, default_value = "text")]
    format: String,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// A report.json written by `run`.
    input: PathBuf,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: ReportFormat,
    #[arg(long)]
    out: PathBuf,
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<ReportFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn gen_instances(args: GenArgs) -> Result<()> {
    if args.family != Family::Facility {
        return Err(Error::argument(format!(
            "only facility instances carry costs (got {})",
            args.family.name()
        )));
    }
    let instances = generate_instances(args.n, args.m, args.instances, args.seed)?;
    save_instances(&args.out, &instances)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let instances = args.input.as_deref().map(load_instances).transpose()?;
    let (n, m, instance_count) = match &instances {
        Some(v) if !v.is_empty() => (v[0].n(), v[0].m(), v.len()),
        Some(_) => return Err(Error::argument("instance file is empty")),
        None => (args.n, args.m, args.instances),
    };
    let plan = ExperimentPlan {
        family: args.family,
        n,
        m,
        instance_count,
        seed: args.seed,
        shots: args.shots,
        max_iterations: args.max_iter,
        lambdas: args.lambda,
        layers: if args.no_baselines {
            Vec::new()
        } else {
            args.layers
        },
        include_proposed: !args.no_proposed,
        optimizer: if args.nelder_mead {
            OptimizerKind::NelderMead
        } else {
            OptimizerKind::Cobyla
        },
        instances,
    };
    let report = run_experiment(&plan)?;
    let mut written = emit_report(&report, &args.out, ReportFormat::Json)?;
    if args.format == ReportFormat::Csv {
        written.extend(emit_report(&report, &args.out, ReportFormat::Csv)?);
    }
    print!("{}", format_summary_table(&report));
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cost_rows_csv(rows: &[CostRow]) -> String {
    let mut out =
        String::from("family,n,m,qubits,qubits_cf,params,params_cf,cnots,cnot_bound,layered_params\n");
    for r in rows {
        let c = &r.comparison;
        let layered: Vec<String> = r
            .layered_parameters
            .iter()
            .map(|(l, p)| format!("{l}:{p}"))
            .collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.family.name(),
            c.n,
            c.m,
            c.measured.num_qubits,
            c.closed_form.num_qubits,
            c.measured.num_parameters,
            c.closed_form.num_parameters,
            c.measured.cnot_count,
            c.closed_form.cnot_bound,
            layered.join(" ")
        );
    }
    out
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_owned(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cost(args: CostArgs) -> Result<()> {
    let families = if args.family.is_empty() {
        Family::ALL.to_vec()
    } else {
        args.family
    };
    let mut rows = cost_table(&families, args.n, &args.layers)?;
    if let Some(m) = args.m {
        rows.retain(|r| r.comparison.m == m);
    }
    let text = match args.format.as_str() {
        "text" => format_cost_table(&rows),
        "json" => serde_json::to_string_pretty(&rows)? + "\n",
        "csv" => cost_rows_csv(&rows),
        other => {
            return Err(Error::argument(format!(
                "unknown format '{other}' (text|json|csv)"
            )))
        }
    };
    write_out(args.out.as_deref(), &text)
}

fn report(args: ReportArgs) -> Result<()> {
    let report = load_report(&args.input)?;
    let written = emit_report(&report, &args.out, args.format)?;
    print!("{}", format_summary_table(&report));
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn error_record(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            eprintln!("{}", error_record("usage", message.trim_end()));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::GenInstances(a) => gen_instances(a),
        Command::Run(a) => run(a),
        Command::CostTable(a) => cost(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_record(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
