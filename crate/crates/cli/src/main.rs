use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use antipode_core::bounds::{best_bounds, bounds_csv, bounds_table, BoundRecord};
use antipode_core::circle::{
    cross_check_hull, delta_invariant_check, solve_roots_of_unity, verify_certificate, CircleOptions, ConvexCertificate,
    Tolerances,
};
use antipode_core::hull::{min_diameter_search, DiameterSearchOptions};
use antipode_core::manifold::{build_simplex_problem, solve_simplex_theorem, ManifoldOptions};
use antipode_core::odd_map::{binomial, OddMapDescriptor};
use antipode_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_USAGE: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

/// Witness sets and certificates for odd maps from spheres.
///
/// Exit codes: 0 success, 1 usage, 2 solver failure, 3 verification
/// failure, 4 search did not converge. Outputs are byte-identical for the
/// same command and seed at `--threads 1`.
#[derive(Parser, Debug)]
#[command(name = "antipode", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed for random maps, audits and restarts.
    #[arg(long, global = true, env = "ANTIPODE_SEED", default_value_t = 0)]
    seed: u64,
    /// Residual tolerance of the certificate.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output directory; every written path is relative to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for restart loops.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Witness for an odd map S^1 -> R^{2k+1} on the roots of unity.
    SolveCircle {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "random-trig")]
        map: CircleMap,
        /// Map descriptor JSON; overrides --map.
        #[arg(long)]
        map_file: Option<PathBuf>,
        /// Degree of the random map (default 2k+1).
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Witness for an odd map S^{n-1} -> R^{n+2^r-1} over a regular simplex.
    SolveSimplex {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "random-trig")]
        map: SimplexMap,
        #[arg(long)]
        map_file: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        /// Objective evaluations per restart.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
    },
    /// Re-check a certificate independently.
    Verify {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Best known bounds on delta(m, n).
    Bounds {
        #[arg(long, requires = "n", conflicts_with = "table")]
        m: Option<usize>,
        #[arg(long, requires = "m")]
        n: Option<usize>,
        /// Rows m = 1..=M, columns n = 2..=N+1.
        #[arg(long, num_args = 2, value_names = ["M", "N"], required_unless_present = "m")]
        table: Option<Vec<usize>>,
        #[arg(long, conflicts_with = "json")]
        csv: bool,
        #[arg(long)]
        json: bool,
    },
    /// Search for small-diameter witness sets.
    SearchMinDiameter {
        #[arg(long, value_enum)]
        map: SearchMap,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
        /// Codomain of random-trig maps.
        #[arg(long)]
        d: Option<usize>,
        /// Points per configuration.
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 4000)]
        steps: usize,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum CircleMap {
    RandomTrig,
    PolyEval,
    InclusionPad,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SimplexMap {
    RandomTrig,
    Inclusion,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SearchMap {
    PolyEval,
    PerturbedInclusion,
    Inclusion,
    TensorPower,
    RandomTrig,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    argv: Vec<String>,
    seed: u64,
    threads: usize,
    tolerances: Tolerances,
    versions: Value,
    wall_time_s: f64,
    outputs: Vec<String>,
    status: String,
    #[serde(skip_serializing_if = "Value::is_null")]
    report: Value,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
            Error::InvalidParameter(_) | Error::DimensionMismatch { .. } | Error::CapExceeded { .. } => EXIT_USAGE,
            _ => EXIT_SOLVER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Collects output files and writes the manifest last.
struct Run {
    command: &'static str,
    global: Global,
    tolerances: Tolerances,
    start: Instant,
    outputs: Vec<String>,
}

impl Run {
    fn new(command: &'static str, global: &Global) -> Self {
        let mut tolerances = Tolerances::default();
        if let Some(t) = global.tol {
            tolerances.residual = t;
        }
        Run {
            command,
            global: global.clone(),
            tolerances,
            start: Instant::now(),
            outputs: Vec::new(),
        }
    }

    fn dir(&self) -> PathBuf {
        self.global.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let dir = self.dir();
        fs::create_dir_all(&dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, status: &str, report: Value) -> Result<(), Failure> {
        let manifest = Manifest {
            command: self.command.into(),
            argv: std::env::args().collect(),
            seed: self.global.seed,
            threads: self.global.threads,
            tolerances: self.tolerances,
            versions: json!({ "antipode": env!("CARGO_PKG_VERSION"), "certificate": 1 }),
            wall_time_s: self.start.elapsed().as_secs_f64(),
            outputs: self.outputs.clone(),
            status: status.into(),
            report,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        self.write("manifest.json", &text)
    }
}

fn load_descriptor(path: &Path) -> Result<OddMapDescriptor, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid map descriptor {}: {e}", path.display())))
}

fn pad_to(desc: OddMapDescriptor, codomain: usize) -> Result<OddMapDescriptor, Failure> {
    if desc.codomain_dim == codomain {
        Ok(desc)
    } else {
        Ok(desc.padded(codomain)?)
    }
}

/// Verifies, writes the certificate and manifest, and maps the verdict to
/// an exit status.
fn emit_certificate(mut run: Run, cert: &ConvexCertificate, mut report: Value) -> Result<(), Failure> {
    let verification = verify_certificate(cert);
    let hull = cross_check_hull(cert).map(|h| h.is_inside()).unwrap_or(false);
    run.write("certificate.json", &cert.to_json()?)?;
    let passed = verification.passed && hull;
    report["residual"] = json!(cert.residual);
    report["diameter"] = json!(cert.diameter);
    report["diameter_bound"] = json!(cert.diameter_bound);
    report["verified"] = json!(passed);
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    run.finish(if passed { "ok" } else { "verification-failed" }, report)?;
    if passed {
        Ok(())
    } else {
        let failed: Vec<String> = verification.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        Err(Failure {
            code: EXIT_VERIFY,
            message: format!("certificate failed verification: {}", failed.join("; ")),
        })
    }
}

fn solve_circle(
    g: &Global,
    k: usize,
    map: CircleMap,
    map_file: Option<PathBuf>,
    degree: Option<usize>,
) -> Result<(), Failure> {
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let run = Run::new("solve-circle", g);
    let d = 2 * k + 1;
    let desc = match (&map_file, map) {
        (Some(p), _) => pad_to(load_descriptor(p)?, d)?,
        (None, CircleMap::RandomTrig) => OddMapDescriptor::random_trig(2, d, degree.unwrap_or(d), g.seed)?,
        (None, CircleMap::PolyEval) => OddMapDescriptor::poly_eval(k)?.padded(d)?,
        (None, CircleMap::InclusionPad) => OddMapDescriptor::inclusion(2, d)?,
    };
    let compiled = desc.compile()?;
    let opts = CircleOptions {
        grid: None,
        tolerances: run.tolerances,
        seed: g.seed,
    };
    let cert = solve_roots_of_unity(&compiled, &opts)?;
    let mut report = json!({ "map": desc.kind_name(), "k": k, "theta": cert.theta, "flags": cert.flags });
    if map_file.is_none() && matches!(map, CircleMap::PolyEval) {
        let spread = delta_invariant_check(&cert.witness_points(), &cert.lambdas)?;
        report["delta_invariant_spread"] = json!(spread);
    }
    emit_certificate(run, &cert, report)
}

fn solve_simplex(
    g: &Global,
    n: usize,
    map: SimplexMap,
    map_file: Option<PathBuf>,
    degree: usize,
    restarts: usize,
    budget: usize,
) -> Result<(), Failure> {
    let mut run = Run::new("solve-simplex", g);
    let problem = build_simplex_problem(n)?;
    let d = n + (1 << problem.r) - 1;
    let desc = match (&map_file, map) {
        (Some(p), _) => pad_to(load_descriptor(p)?, d)?,
        (None, SimplexMap::RandomTrig) => OddMapDescriptor::random_trig(n, d, degree, g.seed)?,
        (None, SimplexMap::Inclusion) => OddMapDescriptor::inclusion(n, d)?,
    };
    let opts = ManifoldOptions {
        restarts,
        budget,
        tolerances: run.tolerances,
        seed: g.seed,
        threads: g.threads.max(1),
    };
    let report = json!({ "map": desc.kind_name(), "n": n, "r": problem.r, "codomain": d });
    match solve_simplex_theorem(&desc.compile()?, &opts) {
        Ok(cert) => emit_certificate(run, &cert, report),
        Err(Error::NotConverged {
            best_residual,
            restarts,
            best,
        }) => {
            run.write("certificate.json", &best.to_json()?)?;
            let mut report = report;
            report["best_residual"] = json!(best_residual);
            report["restarts"] = json!(restarts);
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            run.finish("not-converged", report)?;
            Err(Failure {
                code: EXIT_NOT_CONVERGED,
                message: format!("no restart converged; best residual {best_residual:e}"),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn verify(g: &Global, path: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let cert = ConvexCertificate::from_json(&text).map_err(|e| Failure {
        code: EXIT_VERIFY,
        message: format!("unreadable certificate: {e}"),
    })?;
    let report = verify_certificate(&cert);
    let hull = cross_check_hull(&cert);
    let hull_inside = hull.as_ref().map(|h| h.is_inside()).unwrap_or(false);
    let passed = report.passed && hull_inside;
    let out = json!({
        "passed": passed,
        "checks": report.checks,
        "hull": hull.ok(),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
    if g.out.is_some() {
        Run::new("verify", g).finish(if passed { "ok" } else { "verification-failed" }, out)?;
    }
    if passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: "certificate failed verification".into(),
        })
    }
}

fn bounds(g: &Global, m: Option<usize>, n: Option<usize>, table: Option<Vec<usize>>, csv: bool) -> Result<(), Failure> {
    let records: Vec<BoundRecord> = match (m, n, table) {
        (Some(m), Some(n), _) => vec![best_bounds(m, n)?],
        (_, _, Some(t)) => bounds_table(t[0], t[1])?,
        _ => return Err(usage("give --m and --n, or --table M N")),
    };
    let csv_text = bounds_csv(&records);
    let json_text = serde_json::to_string_pretty(&records).expect("records serialize");
    print!("{}", if csv { csv_text.clone() } else { json_text.clone() + "\n" });
    if g.out.is_some() {
        let mut run = Run::new("bounds", g);
        if csv {
            run.write("bounds.csv", &csv_text)?;
        } else {
            run.write("bounds.json", &json_text)?;
        }
        run.finish("ok", Value::Null)?;
    }
    Ok(())
}

struct SearchSetup {
    desc: OddMapDescriptor,
    cap: usize,
    bound: Option<f64>,
}

fn search_setup(
    g: &Global,
    map: SearchMap,
    k: Option<usize>,
    n: Option<usize>,
    l: Option<usize>,
    d: Option<usize>,
) -> Result<SearchSetup, Failure> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("--{flag} is required for this map")));
    Ok(match map {
        SearchMap::PolyEval => {
            let k = need(k, "k")?;
            SearchSetup {
                desc: OddMapDescriptor::poly_eval(k)?.padded(2 * k + 1)?,
                cap: 2 * k + 1,
                bound: Some(PI - PI / (2 * k + 1) as f64),
            }
        }
        SearchMap::PerturbedInclusion => {
            let n = need(n, "n")?;
            let mut u = vec![0.0; n];
            u[0] = 1.0;
            SearchSetup {
                desc: OddMapDescriptor::perturbed_inclusion(u)?,
                cap: 2 * n + 1,
                bound: Some(PI - (1.0 / n as f64).acos()),
            }
        }
        SearchMap::Inclusion => {
            let n = need(n, "n")?;
            SearchSetup {
                desc: OddMapDescriptor::inclusion(n, d.unwrap_or(n))?,
                cap: 2,
                bound: Some(PI),
            }
        }
        SearchMap::TensorPower => {
            let (n, l) = (need(n, "n")?, need(l, "l")?);
            let kdim = binomial((n + 2 * l) as u128, (n - 1) as u128) as f64;
            let desc = OddMapDescriptor::tensor_power(n, l)?;
            SearchSetup {
                cap: desc.codomain_dim + 1,
                desc,
                bound: Some(PI - kdim.powf(-1.0 / (2 * l + 1) as f64).acos()),
            }
        }
        SearchMap::RandomTrig => {
            let (n, d) = (need(n, "n")?, need(d, "d")?);
            SearchSetup {
                desc: OddMapDescriptor::random_trig(n, d, 3, g.seed)?,
                cap: d + 1,
                bound: None,
            }
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    g: &Global,
    map: SearchMap,
    k: Option<usize>,
    n: Option<usize>,
    l: Option<usize>,
    d: Option<usize>,
    cap: Option<usize>,
    restarts: usize,
    steps: usize,
) -> Result<(), Failure> {
    let mut run = Run::new("search-min-diameter", g);
    let setup = search_setup(g, map, k, n, l, d)?;
    let cap = cap.unwrap_or(setup.cap);
    // Only antipodal pairs are feasible for the inclusion with two points;
    // with more points the simplex bound applies.
    let bound = match (map, n) {
        (SearchMap::Inclusion, Some(n)) if cap > 2 => Some(PI - (1.0 / n as f64).acos()),
        _ => setup.bound,
    };
    let mut opts = DiameterSearchOptions::new(cap);
    opts.restarts = restarts;
    opts.steps = steps;
    opts.seed = g.seed;
    opts.threads = g.threads.max(1);
    let found = min_diameter_search(&setup.desc.compile()?, &opts)?;
    let report = json!({
        "map": setup.desc.kind_name(),
        "cap": cap,
        "restarts": restarts,
        "steps": steps,
        "best_diameter": found.diameter,
        "bound": bound,
        "pass": bound.map(|b| found.diameter >= b - 1e-3),
        "best_restart": found.restart,
        "feasible_restarts": found.feasible_restarts,
        "points": found.best.signed_points(),
        "hull": found.verdict,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{text}");
    run.write("search.json", &text)?;
    run.finish("ok", Value::Null)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match cli.command {
        Command::SolveCircle { k, map, map_file, degree } => solve_circle(g, k, map, map_file, degree),
        Command::SolveSimplex {
            n,
            map,
            map_file,
            degree,
            restarts,
            budget,
        } => solve_simplex(g, n, map, map_file, degree, restarts, budget),
        Command::Verify { cert } => verify(g, &cert),
        Command::Bounds { m, n, table, csv, .. } => bounds(g, m, n, table, csv),
        Command::SearchMinDiameter {
            map,
            k,
            n,
            l,
            d,
            cap,
            restarts,
            steps,
        } => search(g, map, k, n, l, d, cap, restarts, steps),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
