//! Command line front end: compute thresholds, print invariant tables,
//! check minimality, export graphs, and drive the random suite.

mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lct_core::constellation::CurveSpec;
use lct_core::dualgraph::{
    build_dual_graph, dot_export, proximity_dot_export, vertex_families, DotAnnotations,
};
use lct_core::gen::{random_spec, GenConfig};
use lct_core::invariants::{contact_pair, point_sets};
use lct_core::lct::{self, Analysis, Flag, LctReport, Method, Rat};

use io::{ErrorDoc, ErrorList, LoadedInput};

#[derive(Parser)]
#[command(
    name = "lct",
    version,
    about = "Exact log-canonical thresholds of plane curve germs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Formula,
    Divisorial,
    Corollary,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the log-canonical threshold of the input curve or ideal.
    Compute {
        input: PathBuf,
        /// Engine to run; `all` reconciles every applicable method.
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Omit the timestamp so identical inputs give identical bytes.
        #[arg(long)]
        deterministic: bool,
    },
    /// Print invariant tables without the threshold computation.
    Invariants {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        deterministic: bool,
    },
    /// Validate the input and report per-point minimality verdicts.
    Check {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        deterministic: bool,
    },
    /// Export the dual and proximity graphs as DOT text.
    Dot {
        input: PathBuf,
        /// Directory for `dual.dot` and `proximity.dot`; stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate random instances and run the full suite on them.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        points: usize,
        #[arg(long, default_value_t = 6)]
        branches: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Directory for the generated instance files.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        deterministic: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(list)) => {
            println!("{}", to_pretty(&list));
            ExitCode::from(2)
        }
        Err(CliError::Disagreement(message)) => {
            println!(
                "{}",
                to_pretty(&ErrorList {
                    errors: vec![ErrorDoc {
                        code: "MethodDisagreement".into(),
                        message,
                    }],
                })
            );
            ExitCode::from(3)
        }
    }
}

enum CliError {
    Validation(ErrorList),
    Disagreement(String),
}

impl From<ErrorList> for CliError {
    fn from(list: ErrorList) -> CliError {
        CliError::Validation(list)
    }
}

impl From<lct_core::Error> for CliError {
    fn from(err: lct_core::Error) -> CliError {
        match err {
            lct_core::Error::MethodDisagreement(message) => CliError::Disagreement(message),
            other => CliError::Validation(ErrorList {
                errors: vec![ErrorDoc {
                    code: io::error_code(&other).into(),
                    message: other.to_string(),
                }],
            }),
        }
    }
}

fn io_error(message: String) -> CliError {
    CliError::Validation(ErrorList {
        errors: vec![ErrorDoc {
            code: "IoError".into(),
            message,
        }],
    })
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialize")
}

fn read_input(path: &Path) -> Result<LoadedInput, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| io_error(format!("cannot read {}: {e}", path.display())))?;
    Ok(io::parse_input(&text)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| io_error(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Caps the selected value by the strict-transform bounds
/// `1/multiplicity`, recording a flag when one bites.
fn apply_multiplicity_bounds(spec: &CurveSpec, value: &mut Rat, flags: &mut Vec<Flag>) {
    let mut bounded = false;
    for b in &spec.branches {
        let bound = Rat::new(1.into(), b.multiplicity.into());
        if bound < *value {
            *value = bound;
            bounded = true;
        }
    }
    if bounded {
        flags.push(Flag::MultiplicityBound);
    }
}

/// Runs the selected engine. Non-reduced inputs go through curvette
/// duplication first; the strict-transform bounds `1/multiplicity` apply
/// to every engine.
fn run_method(spec: &CurveSpec, method: MethodArg) -> Result<LctReport, lct_core::Error> {
    match method {
        MethodArg::All => lct::reconcile(spec),
        MethodArg::Divisorial => {
            // the candidate minimum computes the threshold only for
            // singular curves; the degenerate shapes answer 1
            if spec.check_minimality().excluded.is_some() {
                return lct::reconcile(spec);
            }
            let analysis = Analysis::new(spec)?;
            let (mut value, argmin) = analysis.lct_divisorial()?;
            let mut flags = Vec::new();
            apply_multiplicity_bounds(spec, &mut value, &mut flags);
            let minimality = spec.check_minimality();
            if !minimality.minimal {
                flags.push(Flag::NonMinimal);
            }
            Ok(LctReport {
                lct: value,
                distinguished_vertex: None,
                vertex_kind: None,
                method: Method::Divisorial,
                methods_run: vec![Method::Divisorial],
                candidate_table: analysis.candidate_table_over_f()?,
                sigma_table: Some(analysis.sigma.clone()),
                branch_invariants: analysis.invariants(),
                intersection_matrix: analysis.intersections.clone(),
                delta_table: None,
                argmin,
                flags,
            })
        }
        MethodArg::Formula => {
            let reduced = lct::duplicate_to_reduced(spec);
            let minimality = reduced.check_minimality();
            if let Some(kind) = minimality.excluded {
                return Err(lct_core::Error::ExcludedInput(format!("{kind:?}")));
            }
            if !minimality.minimal {
                return Err(lct_core::Error::ExcludedInput(
                    "resolution is not minimal; run `check` for the trim list".into(),
                ));
            }
            let analysis = Analysis::new(&reduced)?;
            let (mut value, v_k, kind, delta) = analysis.lct_formula()?;
            let mut flags = Vec::new();
            apply_multiplicity_bounds(spec, &mut value, &mut flags);
            Ok(LctReport {
                lct: value,
                distinguished_vertex: Some(v_k),
                vertex_kind: Some(kind),
                method: Method::Formula,
                methods_run: vec![Method::Formula],
                candidate_table: analysis.candidate_table_over_f()?,
                sigma_table: Some(analysis.sigma.clone()),
                branch_invariants: analysis.invariants(),
                intersection_matrix: analysis.intersections.clone(),
                delta_table: delta,
                argmin: Vec::new(),
                flags,
            })
        }
        MethodArg::Corollary => {
            let reduced = lct::duplicate_to_reduced(spec);
            let analysis = Analysis::new(&reduced)?;
            let (mut value, _case) = analysis.lct_two_branch()?;
            let mut flags = Vec::new();
            apply_multiplicity_bounds(spec, &mut value, &mut flags);
            Ok(LctReport {
                lct: value,
                distinguished_vertex: None,
                vertex_kind: None,
                method: Method::TwoBranch,
                methods_run: vec![Method::TwoBranch],
                candidate_table: analysis.candidate_table_over_f()?,
                sigma_table: Some(analysis.sigma.clone()),
                branch_invariants: analysis.invariants(),
                intersection_matrix: analysis.intersections.clone(),
                delta_table: None,
                argmin: Vec::new(),
                flags,
            })
        }
    }
}

fn warnings_for(spec: &CurveSpec) -> Vec<String> {
    let report = spec.check_minimality();
    let mut warnings = Vec::new();
    if !report.minimal {
        let points: Vec<usize> = report
            .unnecessary_points()
            .iter()
            .map(|p| p.index())
            .collect();
        warnings.push(format!("non-minimal: points {points:?} are unnecessary"));
    }
    warnings
}

fn cmd_compute(
    input: &Path,
    method: MethodArg,
    out: &Option<PathBuf>,
    deterministic: bool,
) -> Result<(), CliError> {
    // an ideal denotes the reduced curve of its general curves; every
    // engine then applies uniformly
    let spec = match read_input(input)? {
        LoadedInput::Curve(spec) => spec,
        LoadedInput::Ideal(constellation, exponents) => {
            lct::complete_ideal_spec(&constellation, &exponents)?
        }
    };
    let report = run_method(&spec, method)?;
    let sets = point_sets(&spec)?;
    let graph = build_dual_graph(&spec)?;
    let families = vertex_families(&spec, &graph, &sets);
    let timestamp = (!deterministic).then(now);
    let doc = io::output_document(&spec, &report, &families.v, timestamp, warnings_for(&spec));
    emit(out, &to_pretty(&doc))
}

#[derive(Serialize)]
struct InvariantsDocument {
    version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    branches: Vec<io::BranchInvariantsDoc>,
    contact_pairs: Vec<ContactDoc>,
    intersections: Vec<io::IntersectionEntry>,
    t_points: Vec<usize>,
    s_points: Vec<usize>,
    f_points: Vec<usize>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct ContactDoc {
    i: usize,
    s: usize,
    q: usize,
    c: usize,
}

fn cmd_invariants(
    input: &Path,
    out: &Option<PathBuf>,
    deterministic: bool,
) -> Result<(), CliError> {
    let spec = match read_input(input)? {
        LoadedInput::Curve(spec) => spec,
        LoadedInput::Ideal(constellation, exponents) => {
            lct::complete_ideal_spec(&constellation, &exponents)?
        }
    };
    let analysis = Analysis::new(&spec)?;
    let sets = point_sets(&spec)?;
    let mut contact_pairs = Vec::new();
    for i in 0..spec.branch_count() {
        for s in i + 1..spec.branch_count() {
            let pair = contact_pair(&spec, i, s)?;
            contact_pairs.push(ContactDoc {
                i: i + 1,
                s: s + 1,
                q: pair.q,
                c: pair.c,
            });
        }
    }
    let mut intersections = Vec::new();
    for i in 0..spec.branch_count() {
        for s in i + 1..spec.branch_count() {
            intersections.push(io::IntersectionEntry {
                i: i + 1,
                s: s + 1,
                value: analysis.intersections[i][s].to_string(),
            });
        }
    }
    let mut warnings = warnings_for(&spec);
    match spec.check_minimality().excluded {
        Some(lct_core::constellation::ExcludedKind::SmoothCurve) => {
            warnings.push("SmoothInput".into())
        }
        Some(lct_core::constellation::ExcludedKind::TwoSmoothTransversal) => {
            warnings.push("ExcludedCase".into())
        }
        None => {}
    }
    let doc = InvariantsDocument {
        version: io::SCHEMA_VERSION,
        timestamp: (!deterministic).then(now),
        branches: spec
            .branches
            .iter()
            .zip(analysis.invariants())
            .map(|(b, inv)| io::branch_doc(b, &inv))
            .collect(),
        contact_pairs,
        intersections,
        t_points: sets.t.iter().map(|p| p.index()).collect(),
        s_points: sets.s.iter().map(|p| p.index()).collect(),
        f_points: sets.f.iter().map(|p| p.index()).collect(),
        warnings,
    };
    emit(out, &to_pretty(&doc))
}

#[derive(Serialize)]
struct CheckDocument {
    version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    valid: bool,
    minimal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    excluded: Option<String>,
    points: Vec<VerdictDoc>,
    unnecessary: Vec<usize>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct VerdictDoc {
    point: usize,
    necessary: bool,
    reasons: Vec<String>,
}

fn cmd_check(input: &Path, out: &Option<PathBuf>, deterministic: bool) -> Result<(), CliError> {
    let spec = match read_input(input)? {
        LoadedInput::Curve(spec) => spec,
        LoadedInput::Ideal(constellation, exponents) => {
            lct::complete_ideal_spec(&constellation, &exponents)?
        }
    };
    let report = spec.check_minimality();
    let mut warnings = Vec::new();
    if !report.minimal {
        warnings.push(format!(
            "suggestion: remove points {:?} for the minimal resolution",
            report
                .unnecessary_points()
                .iter()
                .map(|p| p.index())
                .collect::<Vec<_>>()
        ));
    }
    let doc = CheckDocument {
        version: io::SCHEMA_VERSION,
        timestamp: (!deterministic).then(now),
        valid: true,
        minimal: report.minimal,
        excluded: report.excluded.map(|k| format!("{k:?}")),
        points: report
            .verdicts
            .iter()
            .map(|v| VerdictDoc {
                point: v.point.index(),
                necessary: v.necessary,
                reasons: v.reasons.iter().map(|r| format!("{r:?}")).collect(),
            })
            .collect(),
        unnecessary: report
            .unnecessary_points()
            .iter()
            .map(|p| p.index())
            .collect(),
        warnings,
    };
    emit(out, &to_pretty(&doc))
}

fn cmd_dot(input: &Path, out: &Option<PathBuf>) -> Result<(), CliError> {
    let spec = match read_input(input)? {
        LoadedInput::Curve(spec) => spec,
        LoadedInput::Ideal(constellation, exponents) => {
            lct::complete_ideal_spec(&constellation, &exponents)?
        }
    };
    let graph = build_dual_graph(&spec)?;
    let sets = point_sets(&spec)?;
    let families = vertex_families(&spec, &graph, &sets);
    let invariants: Vec<_> = (0..spec.branch_count())
        .map(|i| lct_core::invariants::branch_invariants(&spec, i))
        .collect::<Result<_, _>>()?;
    let sigma = lct_core::dualgraph::sigma_table(&spec, &graph, &families, &invariants)?;
    let annotations = DotAnnotations {
        sigma: sigma.values.clone(),
        t: families.v_t.clone(),
        s: families.v_s.clone(),
        v: families.v.clone(),
    };
    let dual = dot_export(&graph, &annotations);
    let proximity = proximity_dot_export(&spec);
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| io_error(format!("cannot create {}: {e}", dir.display())))?;
            std::fs::write(dir.join("dual.dot"), &dual)
                .map_err(|e| io_error(format!("cannot write dual.dot: {e}")))?;
            std::fs::write(dir.join("proximity.dot"), &proximity)
                .map_err(|e| io_error(format!("cannot write proximity.dot: {e}")))?;
            Ok(())
        }
        None => {
            println!("{}", dual.trim_end());
            println!("{}", proximity.trim_end());
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct GenSummary {
    version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    seed: u64,
    count: usize,
    all_agree: usize,
    failures: Vec<GenFailure>,
    terminal_satellite_cases: usize,
    initial_separating_cases: usize,
    instances: Vec<GenInstance>,
}

#[derive(Serialize)]
struct GenInstance {
    seed: u64,
    points: usize,
    branches: usize,
    lct: io::RationalDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

#[derive(Serialize)]
struct GenFailure {
    seed: u64,
    message: String,
}

fn cmd_gen(
    seed: u64,
    points: usize,
    branches: usize,
    count: usize,
    out: &Option<PathBuf>,
    deterministic: bool,
) -> Result<(), CliError> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)
            .map_err(|e| io_error(format!("cannot create {}: {e}", dir.display())))?;
    }
    let mut summary = GenSummary {
        version: io::SCHEMA_VERSION,
        timestamp: (!deterministic).then(now),
        seed,
        count,
        all_agree: 0,
        failures: Vec::new(),
        terminal_satellite_cases: 0,
        initial_separating_cases: 0,
        instances: Vec::new(),
    };
    for k in 0..count {
        let instance_seed = seed.wrapping_add(k as u64);
        let cfg = GenConfig {
            seed: instance_seed,
            max_points: points,
            max_branches: branches,
        };
        let spec = random_spec(&cfg)?;
        let file = match out {
            Some(dir) => {
                let name = format!("instance_{k:05}.json");
                let doc = io::spec_to_document(&spec);
                std::fs::write(dir.join(&name), to_pretty(&doc))
                    .map_err(|e| io_error(format!("cannot write {name}: {e}")))?;
                Some(name)
            }
            None => None,
        };
        match lct_core::verify::check_instance(&spec) {
            Ok(result) => {
                summary.all_agree += 1;
                match result.vertex_kind {
                    lct_core::lct::VertexKind::TerminalSatellite => {
                        summary.terminal_satellite_cases += 1
                    }
                    lct_core::lct::VertexKind::InitialSeparating => {
                        summary.initial_separating_cases += 1
                    }
                }
                summary.instances.push(GenInstance {
                    seed: instance_seed,
                    points: spec.constellation.len(),
                    branches: spec.branch_count(),
                    lct: io::RationalDoc::from_rat(&result.lct),
                    file,
                });
            }
            Err(message) => summary.failures.push(GenFailure {
                seed: instance_seed,
                message,
            }),
        }
    }
    println!("{}", to_pretty(&summary));
    if summary.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Disagreement(format!(
            "{} of {count} instances failed the suite",
            summary.failures.len()
        )))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compute {
            input,
            method,
            out,
            deterministic,
        } => cmd_compute(&input, method, &out, deterministic),
        Command::Invariants {
            input,
            out,
            deterministic,
        } => cmd_invariants(&input, &out, deterministic),
        Command::Check {
            input,
            out,
            deterministic,
        } => cmd_check(&input, &out, deterministic),
        Command::Dot { input, out } => cmd_dot(&input, &out),
        Command::Gen {
            seed,
            points,
            branches,
            count,
            out,
            deterministic,
        } => cmd_gen(seed, points, branches, count, &out, deterministic),
    }
}
