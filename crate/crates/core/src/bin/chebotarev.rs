use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use chebotarev::analysis::{capacity, check_chebotarev_conditions, min_deviation};
use chebotarev::connectivity::{default_tolerance, grid_oracle, is_connected, MembershipParams};
use chebotarev::factor::factorize;
use chebotarev::solver::{enumerate_sign_configs, solve, solve_sweep, ProblemSpec, Solution, SolverError};
use chebotarev::tracer::{arcs_to_csv, build_graph, render_svg, trace, Marker, SvgOptions};
use chebotarev::{Complex64, ComplexPoly};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CHECK: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

/// Spread of the random perturbations used by `--sweep`.
const SWEEP_SPREAD: f64 = 0.1;

#[derive(Parser)]
#[command(name = "chebotarev", version, about = "Minimal-capacity continua as inverse polynomial images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem specification and write solution.json.
    Solve {
        spec: PathBuf,
        /// Residual tolerance (infinity norm) for the solver.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of perturbed starting points to try; the lowest-capacity solution wins.
        #[arg(long)]
        sweep: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run every check on a polynomial and print a JSON report.
    Verify {
        poly: PathBuf,
        /// Connectivity tolerance; defaults to 1e-7 (1 + max |coefficient|).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace the inverse image and write arcs.csv and continuum.svg.
    Trace {
        poly: PathBuf,
        #[arg(long, default_value_t = 512)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List the admissible sign systems for `nu` points and degree `n`.
    Enumerate { nu: usize, n: usize },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl std::fmt::Display) -> Failure {
    Failure { code, message: message.to_string() }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    subcommand: &'a str,
    input: &'a Path,
    out: Option<&'a Path>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

/// Accepted polynomial inputs: `{"coeffs": [[re, im], ...]}`, or a
/// solution document carrying `coefficients`.
#[derive(Deserialize)]
#[serde(untagged)]
enum PolyInput {
    Coeffs { coeffs: ComplexPoly },
    Solution { coefficients: ComplexPoly },
    Written { solution: Box<PolyInput> },
}

impl PolyInput {
    fn into_poly(self) -> ComplexPoly {
        match self {
            PolyInput::Coeffs { coeffs } => coeffs,
            PolyInput::Solution { coefficients } => coefficients,
            PolyInput::Written { solution } => solution.into_poly(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn read_poly(path: &Path) -> Result<ComplexPoly, Failure> {
    let input: PolyInput = serde_json::from_str(&read(path)?)
        .map_err(|e| fail(EXIT_PARSE, format!("{}: not a polynomial file: {e}", path.display())))?;
    let t = input.into_poly();
    if t.degree() == 0 {
        return Err(fail(EXIT_PARSE, format!("{}: constant polynomial", path.display())));
    }
    Ok(t)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| fail(EXIT_FAILURE, format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| fail(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn solver_failure(e: SolverError) -> Failure {
    let code = match e {
        SolverError::DegenerateSolution { .. } => EXIT_DEGENERATE,
        SolverError::NoConvergence { .. }
        | SolverError::NonFinite
        | SolverError::IdentityViolation { .. }
        | SolverError::LevelMismatch { .. }
        | SolverError::NoNegativePoint => EXIT_CHECK,
        _ => EXIT_PARSE,
    };
    fail(code, e)
}

fn fmt_c(z: Complex64) -> String {
    format!("{:+.9} {:+.9}i", z.re, z.im)
}

fn cmd_solve(path: &Path, tol: Option<f64>, seed: u64, sweep: Option<usize>, out: &Path) -> Result<(), Failure> {
    let mut spec: ProblemSpec =
        serde_json::from_str(&read(path)?).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    if let Some(tol) = tol {
        if !(tol > 0.0) {
            return Err(fail(EXIT_PARSE, "--tol must be positive"));
        }
        let mut opts = *spec.options();
        opts.residual_tol = Some(tol);
        spec.set_options(opts);
    }
    let solution: Solution = match sweep {
        Some(count) => solve_sweep(&spec, count, seed, SWEEP_SPREAD)
            .into_iter()
            .next()
            .ok_or_else(|| fail(EXIT_CHECK, format!("no start out of {count} converged")))?,
        None => solve(&spec, &spec.initial_guess()).map_err(solver_failure)?,
    };
    let manifest = RunManifest { subcommand: "solve", input: path, out: Some(out), seed, tol };
    let doc = json!({ "manifest": manifest, "sweep": sweep, "solution": solution });
    let written = write(out, "solution.json", &pretty(&doc))?;

    if let Some(d) = spec.description() {
        println!("{d}");
    }
    println!("{}", solution.config.label());
    for (name, pts) in [("c", &solution.points.c), ("d", &solution.points.d), ("z", &solution.points.z)] {
        for (i, p) in pts.iter().enumerate() {
            println!("  {name}[{i}] = {}", fmt_c(*p));
        }
    }
    println!("tau        = {}", fmt_c(solution.tau));
    println!("capacity   = {:.12}", solution.capacity);
    println!("residual   = {:.3e}", solution.residual_inf_norm);
    println!("iterations = {}", solution.iterations);
    println!("wrote {}", written.display());
    Ok(())
}

fn cmd_verify(path: &Path, tol: Option<f64>, resolution: usize, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let t = read_poly(path)?;
    let tol = tol.unwrap_or_else(|| default_tolerance(&t));
    if !(tol > 0.0) {
        return Err(fail(EXIT_PARSE, "--tol must be positive"));
    }
    let fail_poly = |e: chebotarev::PolyError| fail(EXIT_FAILURE, e);

    let factor = match factorize(&t) {
        Ok(f) => json!({ "pass": true, "ell": f.ell, "odd_points": f.odd_points, "tau": f.tau }),
        Err(e) => json!({ "pass": false, "error": e.to_string() }),
    };
    let verdict = is_connected(&t, tol).map_err(fail_poly)?;
    let worst = verdict.witnesses.iter().map(|w| w.margin).fold(0.0, f64::max);
    let params = MembershipParams::new(tol).expect("positive tolerance");
    let grid = grid_oracle(&t, params, resolution).map_err(fail_poly)?;
    let agrees = (grid.component_count == 1) == verdict.connected;
    let conditions = match check_chebotarev_conditions(&t) {
        Ok(r) => json!({ "pass": r.passed, "max_abs_re_phi": r.max_abs_re_phi,
                         "max_error_estimate": r.max_error_estimate, "threshold": r.threshold, "points": r.points }),
        Err(e) => json!({ "pass": false, "error": e.to_string() }),
    };
    let cap = capacity(&t).map_err(fail_poly)?;
    let passed = factor["pass"] == true && verdict.connected && agrees && conditions["pass"] == true;

    let manifest = RunManifest { subcommand: "verify", input: path, out, seed, tol: Some(tol) };
    let report = json!({
        "manifest": manifest,
        "degree": t.degree(),
        "factorization": factor,
        "connectivity": { "pass": verdict.connected, "tolerance": tol, "max_margin": worst, "witnesses": verdict.witnesses },
        "grid": { "pass": agrees, "resolution": grid.resolution, "components": grid.component_count },
        "conditions": conditions,
        "capacity": cap,
        "min_deviation": min_deviation(&t).map_err(fail_poly)?,
        "passed": passed,
    });
    let text = pretty(&report);
    print!("{text}");
    if let Some(dir) = out {
        write(dir, "verify.json", &text)?;
    }
    if passed {
        Ok(())
    } else {
        Err(fail(EXIT_CHECK, "verification failed"))
    }
}

fn cmd_trace(path: &Path, steps: usize, seed: u64, out: &Path) -> Result<(), Failure> {
    let t = read_poly(path)?;
    let arcs = trace(&t, steps).map_err(|e| fail(EXIT_CHECK, e))?;
    let graph = build_graph(&t, &arcs).map_err(|e| fail(EXIT_FAILURE, e))?;
    let markers = Marker::from_graph(&graph);
    let csv = write(out, "arcs.csv", &arcs_to_csv(&arcs))?;
    let svg = write(out, "continuum.svg", &render_svg(&arcs, &markers, &SvgOptions::default()))?;
    let manifest = RunManifest { subcommand: "trace", input: path, out: Some(out), seed, tol: None };
    let summary = json!({
        "manifest": manifest,
        "steps": steps,
        "arcs": arcs.len(),
        "vertices": graph.vertices.len(),
        "edges": graph.edges.len(),
        "leaves": graph.count_degree(1),
        "branch_vertices": graph.vertices.iter().filter(|v| v.degree >= 3).count(),
        "components": graph.component_count(),
        "tree": graph.is_tree(),
        "tangency_points": graph.tangency_points,
        "crossing_points": graph.crossing_points,
    });
    write(out, "graph.json", &pretty(&summary))?;
    println!(
        "{} arcs, {} leaves, {} branch vertices, {} edges, {} components{}",
        arcs.len(),
        summary["leaves"],
        summary["branch_vertices"],
        graph.edges.len(),
        graph.component_count(),
        if graph.is_tree() { " (tree)" } else { "" }
    );
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}

fn cmd_enumerate(nu: usize, n: usize) -> Result<(), Failure> {
    let configs = enumerate_sign_configs(nu, n).map_err(|e| fail(EXIT_PARSE, e))?;
    println!("{:>4}  {:>8}  {:>8}  {:>8}  signs", "#", "alpha+", "gamma+", "beta+");
    for (i, c) in configs.iter().enumerate() {
        let (a, g, b) = c.plus_counts();
        println!(
            "{:>4}  {:>8}  {:>8}  {:>8}  {}",
            i + 1,
            format!("{a}/{}", c.alpha.len()),
            format!("{g}/{}", c.gamma.len()),
            format!("{b}/{}", c.beta.len()),
            c.label()
        );
    }
    println!("{} systems", configs.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { spec, tol, seed, sweep, out } => cmd_solve(spec, *tol, *seed, *sweep, out),
        Command::Verify { poly, tol, resolution, seed, out } => cmd_verify(poly, *tol, *resolution, *seed, out.as_deref()),
        Command::Trace { poly, steps, seed, out } => cmd_trace(poly, *steps, *seed, out),
        Command::Enumerate { nu, n } => cmd_enumerate(*nu, *n),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

