//! `levilab` command-line front end.
//!
//! Every verb prints one JSON report (schema version "1"). Exit codes:
//! 0 analysis completed, 1 property violated or counterexample found,
//! 2 usage or input error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use levilab::disc::{kontinuitats_sequence, small_disc_search, AnalyticDisc, DiscTestConfig, SequenceConfig, Verdict};
use levilab::domain::{BoundaryPoint, DomainSpec, GRAD_FLOOR};
use levilab::expr::{lipschitz_exponent, parse, DIFFERENCE_ZERO_REL};
use levilab::finite_type::{bloom_graham_check, geometric_type, TypeConfig, SOLVE_TOL};
use levilab::forms::{classify_point, hartogs_check, HartogsConfig, DEFECT_REL_TOL};
use levilab::linalg::to_complex;
use levilab::par::{num_threads, Execution};
use levilab::scenarios::{run_scenario, ScenarioOptions, CENTRE_TOL};
use levilab::Error;

const SCHEMA_VERSION: &str = "1";

#[derive(Parser, Debug)]
#[command(
    name = "levilab",
    version,
    about = "Boundary geometry of domains in C^n",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock timing in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum Cmd {
    /// Hessian and Levi form classification at a boundary point.
    Analyze {
        /// Catalog URI or path to a domain JSON file.
        input: String,
        /// Real coordinates x1,..,x2n.
        #[arg(long, value_delimiter = ',', required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = levilab::forms::DEFAULT_TOL_EIG)]
        tol_eig: f64,
    },
    /// Geometric and commutator type at a boundary point.
    Type {
        input: String,
        #[arg(long, value_delimiter = ',', required = true)]
        point: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        cutoff: usize,
        /// Cutoff of the commutator side (defaults to --cutoff).
        #[arg(long)]
        commutator_cutoff: Option<usize>,
        #[arg(long, default_value_t = 6)]
        degree: usize,
        #[arg(long, default_value_t = 4096)]
        max_fields: usize,
    },
    /// Random search for small discs with boundary inside and centre outside.
    DiscTest {
        input: String,
        #[arg(long, default_value_t = 0.1)]
        delta0: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest polynomial degree of the random discs.
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Sampled sub-mean-value test for -log(distance to the boundary).
    Hartogs {
        input: String,
        /// Number of interior sample points.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        lines: usize,
    },
    /// Lipschitz exponent of a function of x1 from dyadic differences.
    Lipschitz {
        /// Expression in x1, e.g. "sqrt(sqrt(x1^2))".
        expr: String,
        #[arg(long, value_delimiter = ',', default_value = "-1,1")]
        interval: Vec<f64>,
        /// Difference order j.
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
    },
    /// Discs pushed into the domain along the inward normal at a point.
    Sequence {
        input: String,
        #[arg(long, value_delimiter = ',', required = true)]
        point: Vec<f64>,
        /// Base disc as JSON or a path to a JSON file; defaults to the
        /// witness disc of the geometric type search.
        #[arg(long)]
        disc: Option<String>,
        #[arg(long, default_value_t = 20)]
        discs: usize,
        #[arg(long, default_value_t = 8)]
        cutoff: usize,
        #[arg(long, default_value_t = 6)]
        degree: usize,
        /// Write the per-disc records as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Scripted end-to-end scenario: example1, example2 or example3.
    Example {
        name: String,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Hartogs samples used by example2.
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
    },
}

#[derive(Serialize, Default)]
struct Diagnostics {
    warnings: Vec<String>,
    saturation: Vec<String>,
    errors: Vec<String>,
    tolerances: Map<String, Value>,
}

#[derive(Serialize)]
struct Report {
    schema_version: &'static str,
    command: Value,
    results: Value,
    diagnostics: Diagnostics,
    timing: Option<Value>,
}

/// Outcome of one verb: the results payload and whether a property failed.
struct Outcome {
    results: Value,
    violated: bool,
}

enum Failure {
    Usage(String),
    Module(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Module(e)
    }
}

type Run<T> = Result<T, Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn load(input: &str, point: Option<&[f64]>) -> Run<DomainSpec> {
    let spec = DomainSpec::load(input)?;
    if let Some(p) = point {
        if p.len() != 2 * spec.n {
            return Err(Failure::Usage(format!(
                "--point needs {} real coordinates for a domain in C^{}, got {}",
                2 * spec.n,
                spec.n,
                p.len()
            )));
        }
    }
    Ok(spec)
}

fn locate(spec: &DomainSpec, x: &[f64], diag: &mut Diagnostics) -> Run<BoundaryPoint> {
    let p = BoundaryPoint::locate(spec, x)?;
    let moved = x
        .iter()
        .zip(&p.coords)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    if moved > 0.0 {
        diag.warnings
            .push(format!("point was not on the boundary; projected by {moved:e}"));
    }
    Ok(p)
}

fn complex_form(x: &[f64]) -> Value {
    json!(to_complex(x).iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

fn tol(diag: &mut Diagnostics, key: &str, v: f64) {
    diag.tolerances.insert(key.into(), json!(v));
}

fn run(cmd: &Cmd, diag: &mut Diagnostics) -> Run<Outcome> {
    match cmd {
        Cmd::Analyze { input, point, tol_eig } => {
            let spec = load(input, Some(point))?;
            tol(diag, "tol_boundary", spec.tol_boundary);
            tol(diag, "grad_floor", GRAD_FLOOR);
            let p = locate(&spec, point, diag)?;
            let r = classify_point(&spec, &p, *tol_eig)?;
            tol(diag, "tol_eig", *tol_eig);
            tol(diag, "hessian_threshold", r.hessian_threshold);
            tol(diag, "levi_threshold", r.levi_threshold);
            let mut v = to_value(&r);
            v["point_complex"] = complex_form(&p.coords);
            Ok(Outcome {
                results: v,
                violated: false,
            })
        }
        Cmd::Type {
            input,
            point,
            cutoff,
            commutator_cutoff,
            degree,
            max_fields,
        } => {
            let spec = load(input, Some(point))?;
            tol(diag, "tol_boundary", spec.tol_boundary);
            tol(diag, "grad_floor", GRAD_FLOOR);
            let p = locate(&spec, point, diag)?;
            let cfg = TypeConfig {
                degree: *degree,
                cutoff: *cutoff,
                commutator_cutoff: *commutator_cutoff,
                max_fields: *max_fields,
                execution: Execution::default(),
            };
            let r = bloom_graham_check(&spec, &p, &cfg)?;
            tol(diag, "pairing_rel_tol", r.pairing_rel_tol);
            tol(diag, "jet_zero_rel", r.jet_zero_rel);
            tol(diag, "solve_tol", SOLVE_TOL);
            if r.geometric_type.saturated {
                diag.saturation
                    .push(format!("geometric_type reached the cutoff {}", r.cutoff));
            }
            if r.commutator_type.saturated {
                diag.saturation
                    .push(format!("commutator_type reached the cutoff {}", r.commutator_cutoff));
            }
            if r.geometric_budget_exhausted || r.commutator_budget_exhausted {
                diag.warnings
                    .push("search budget exhausted; reported types are lower bounds".into());
            }
            if r.comparison != "theorem" {
                diag.warnings
                    .push("type comparison in dimension > 2 is experimental and frame dependent".into());
            }
            let violated = !r.agree && r.comparison == "theorem";
            let mut v = to_value(&r);
            v["point_complex"] = complex_form(&p.coords);
            Ok(Outcome { results: v, violated })
        }
        Cmd::DiscTest {
            input,
            delta0,
            trials,
            seed,
            degree,
        } => {
            let spec = load(input, None)?;
            let cfg = DiscTestConfig {
                delta0: *delta0,
                trials: *trials,
                seed: *seed,
                max_degree: *degree,
                ..Default::default()
            };
            let r = small_disc_search(&spec, &cfg, Execution::default())?;
            tol(diag, "tol_membership", cfg.tol_membership);
            Ok(Outcome {
                violated: r.verdict == Verdict::Counterexample,
                results: to_value(&r),
            })
        }
        Cmd::Hartogs {
            input,
            trials,
            seed,
            lines,
        } => {
            let spec = load(input, None)?;
            let cfg = HartogsConfig {
                samples: *trials,
                seed: *seed,
                lines: *lines,
                ..Default::default()
            };
            let r = hartogs_check(&spec, &cfg, Execution::default())?;
            tol(diag, "defect_rel_tol", DEFECT_REL_TOL);
            if r.skipped > 0 {
                diag.warnings
                    .push(format!("{} circles skipped after distance failures", r.skipped));
            }
            Ok(Outcome {
                violated: r.violations > 0,
                results: to_value(&r),
            })
        }
        Cmd::Lipschitz {
            expr,
            interval,
            order,
            samples,
        } => {
            let [lo, hi] = interval[..] else {
                return Err(Failure::Usage("--interval needs two numbers lo,hi".into()));
            };
            let e = parse(expr)?;
            e.check_vars(1)?;
            let r = lipschitz_exponent(|t| e.eval(&[t]), (lo, hi), *order, *samples)?;
            if r.saturated {
                diag.saturation.push(format!(
                    "differences of order {order} vanish; alpha reported as {order}"
                ));
            }
            diag.warnings
                .push("boundedness is checked on the sampled points only".into());
            tol(diag, "zero_rel_tol", DIFFERENCE_ZERO_REL);
            Ok(Outcome {
                results: to_value(&r),
                violated: false,
            })
        }
        Cmd::Sequence {
            input,
            point,
            disc,
            discs,
            cutoff,
            degree,
            csv,
        } => {
            let spec = load(input, Some(point))?;
            tol(diag, "tol_boundary", spec.tol_boundary);
            tol(diag, "grad_floor", GRAD_FLOOR);
            let p = locate(&spec, point, diag)?;
            let base = match disc {
                Some(src) => {
                    let text = if src.trim_start().starts_with('{') {
                        src.clone()
                    } else {
                        std::fs::read_to_string(src).map_err(|e| Failure::Usage(format!("cannot read '{src}': {e}")))?
                    };
                    AnalyticDisc::from_json(&text)?
                }
                None => {
                    tol(diag, "jet_zero_rel", levilab::expr::curve::JET_ZERO_REL);
                    tol(diag, "solve_tol", SOLVE_TOL);
                    let g = geometric_type(&spec, &p, *degree, *cutoff, Execution::default())?;
                    diag.warnings
                        .push(format!("base disc: geometric type witness (contact order {})", g.value));
                    g.witness
                }
            };
            let cfg = SequenceConfig {
                discs: *discs,
                ..Default::default()
            };
            let r = kontinuitats_sequence(&spec, &p, &base, &cfg)?;
            tol(diag, "tol_membership", cfg.tol_membership);
            if r.insufficient {
                diag.warnings
                    .push("fewer than two records usable for the exponent fit".into());
            }
            if let Some(path) = csv {
                write_csv(path, &r.records).map_err(|e| Failure::Usage(format!("cannot write CSV: {e}")))?;
            }
            let mut v = to_value(&r);
            v["base_disc"] = to_value(&base);
            Ok(Outcome {
                results: v,
                violated: false,
            })
        }
        Cmd::Example {
            name,
            eps,
            seed,
            trials,
        } => {
            let opts = ScenarioOptions {
                eps: *eps,
                seed: *seed,
                hartogs_samples: *trials,
                ..Default::default()
            };
            let r = run_scenario(name, &opts)?;
            tol(diag, "tol_membership", DiscTestConfig::default().tol_membership);
            match name.as_str() {
                "example2" => tol(diag, "defect_rel_tol", DEFECT_REL_TOL),
                "example3" => tol(diag, "centre_tol", CENTRE_TOL),
                _ => {}
            }
            Ok(Outcome {
                violated: !r.passed,
                results: to_value(&r),
            })
        }
    }
}

fn write_csv(path: &PathBuf, records: &[levilab::disc::SequenceRecord]) -> Result<(), csv::Error> {
    #[derive(Serialize)]
    struct Row {
        j: usize,
        radius: f64,
        center_distance: f64,
        diameter: f64,
        hausdorff: f64,
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(Row {
            j: r.j,
            radius: r.radius,
            center_distance: r.center_distance,
            diameter: r.diameter,
            hausdorff: r.hausdorff,
        })?;
    }
    w.flush()?;
    Ok(())
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("LEVILAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| format!("LEVILAB_THREADS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let start = Instant::now();
    let mut diag = Diagnostics::default();
    let (results, code) = match run(&cli.cmd, &mut diag) {
        Ok(o) => (o.results, u8::from(o.violated)),
        Err(Failure::Usage(msg)) => {
            diag.errors.push(msg);
            (Value::Null, 2)
        }
        Err(Failure::Module(e)) => {
            diag.errors.push(e.to_string());
            (Value::Null, if e.is_numeric_failure() { 3 } else { 2 })
        }
    };
    let options = to_value(&cli.cmd);
    let verb = options
        .as_object()
        .and_then(|m| m.keys().next())
        .map(|k| k.replace('_', "-"));
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: json!({
            "verb": verb,
            "args": argv.get(1..).unwrap_or_default(),
            "options": options,
        }),
        results,
        diagnostics: diag,
        timing: cli.timing.then(|| {
            json!({
                "seconds": start.elapsed().as_secs_f64(),
                "threads": num_threads(),
            })
        }),
    };
    for e in &report.diagnostics.errors {
        eprintln!("error: {e}");
    }
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write '{}': {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}
