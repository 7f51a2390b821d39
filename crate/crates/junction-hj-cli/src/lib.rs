//! Implementation of the `junction-hj` command-line tool.
//!
//! Subcommands: `action` (minimal action between two points, JSON on
//! stdout), `solve` (grid solution to CSV), `traffic` (density table and
//! junction flux series to CSV), `verify` (self-verification suites),
//! and `oracle` (brute-force counterparts of `action` and `solve`).
//!
//! Exit codes: `0` success, `1` I/O failure, `2` usage error, `3`
//! scenario validation failure, `4` numerical failure. The environment
//! variable `JUNCTION_HJ_THREADS` caps solver parallelism (`0` = auto).

mod scenario;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use junction_hj::{
    action, brute_force_d0, brute_force_solve, density_field, flux_trace, run_all_suites,
    run_suite, solve_grid, Error as LibError, GridSolution, Junction, OracleConfig, Point,
    VerifyContext, SUITE_NAMES,
};

/// Exit code for I/O failures.
const EXIT_IO: u8 = 1;
/// Exit code for usage errors (clap's convention).
const EXIT_USAGE: u8 = 2;
/// Exit code for scenario validation failures.
const EXIT_SCENARIO: u8 = 3;
/// Exit code for numerical failures.
const EXIT_NUMERICAL: u8 = 4;

/// A failure carrying its process exit code.
pub(crate) struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub(crate) fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }

    pub(crate) fn scenario(message: impl Into<String>) -> Self {
        Self { code: EXIT_SCENARIO, message: message.into() }
    }

    pub(crate) fn numerical(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERICAL, message: message.into() }
    }
}

/// Maps a solver error to an exit code: failed iterations are numerical
/// failures, everything else rejects the inputs that caused it.
pub(crate) fn classify(err: LibError) -> Failure {
    match err {
        LibError::NoConvergence(_) | LibError::TauUndefinedAtOrigin => {
            Failure::numerical(err.to_string())
        }
        other => Failure::scenario(other.to_string()),
    }
}

type CmdResult<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(
    name = "junction-hj",
    version,
    about = "Hamilton-Jacobi solver on a junction of half-lines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal action between two points; prints JSON.
    Action(ActionArgs),
    /// Solve the evolution on a grid; writes `t,branch,x,u` CSV.
    Solve(SolveArgs),
    /// Solve a traffic scenario; writes `t,road,X,rho` CSV and a
    /// junction-flux series next to it.
    Traffic(TrafficArgs),
    /// Run the self-verification suites against a scenario.
    Verify(VerifyArgs),
    /// Brute-force counterparts of `action` and `solve`.
    Oracle(OracleArgs),
}

/// A point of the junction on the command line: `BRANCH:COORD`, or `J`
/// (also `junction`) for the junction point itself.
#[derive(Clone, Debug)]
enum Endpoint {
    Junction,
    Branch(usize, f64),
}

fn parse_endpoint(s: &str) -> Result<Endpoint, String> {
    let text = s.trim();
    if text.eq_ignore_ascii_case("j") || text.eq_ignore_ascii_case("junction") {
        return Ok(Endpoint::Junction);
    }
    let (branch, coord) = text
        .split_once(':')
        .ok_or_else(|| format!("expected BRANCH:COORD or J, got {s:?}"))?;
    let branch: usize = branch
        .trim()
        .parse()
        .map_err(|_| format!("branch must be a positive integer, got {branch:?}"))?;
    let coord: f64 =
        coord.trim().parse().map_err(|_| format!("coordinate must be a number, got {coord:?}"))?;
    Ok(Endpoint::Branch(branch, coord))
}

#[derive(Args)]
struct ActionArgs {
    /// Scenario file (JSON).
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Start point, `BRANCH:COORD` or `J` for the junction point.
    #[arg(long, value_parser = parse_endpoint)]
    from: Endpoint,
    /// End point, `BRANCH:COORD` or `J` for the junction point.
    #[arg(long, value_parser = parse_endpoint)]
    to: Endpoint,
    /// Start time.
    #[arg(long)]
    t0: f64,
    /// End time; must exceed the start time.
    #[arg(long)]
    t1: f64,
}

#[derive(Args)]
struct SolveArgs {
    /// Scenario file (JSON).
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Output CSV path (`t,branch,x,u` rows; branch 0 is the junction
    /// point).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct TrafficArgs {
    /// Scenario file (JSON); must have a "traffic" section.
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Output CSV path (`t,road,X,rho` rows); the junction-flux series
    /// goes to the same path with `_flux` appended to the stem.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Scenario file (JSON).
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Run only the named suite (default: all suites).
    #[arg(long, value_name = "NAME")]
    suite: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(subcommand)]
    command: OracleCommand,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Brute-force action value; prints JSON.
    Action(OracleActionArgs),
    /// Brute-force grid solution; writes `t,branch,x,u` CSV.
    Solve(OracleSolveArgs),
}

#[derive(Args)]
struct OracleActionArgs {
    #[command(flatten)]
    base: ActionArgs,
    /// Switching-time grid nodes per leg.
    #[arg(long, default_value_t = 2000)]
    n_tau: usize,
    /// Window-shrinking refinement rounds.
    #[arg(long, default_value_t = 3)]
    refine: usize,
}

#[derive(Args)]
struct OracleSolveArgs {
    #[command(flatten)]
    base: SolveArgs,
    /// Spatial scan nodes per branch.
    #[arg(long, default_value_t = 4096)]
    n_y: usize,
    /// Spatial scan radius around each target.
    #[arg(long, default_value_t = 10.0)]
    radius: f64,
    /// Window-shrinking refinement rounds.
    #[arg(long, default_value_t = 3)]
    refine: usize,
}

/// Runs the tool and returns its exit code.
pub fn run(args: impl IntoIterator<Item = OsString>) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    init_threads();
    let result = match cli.command {
        Command::Action(args) => cmd_action(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Traffic(args) => cmd_traffic(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Oracle(args) => match args.command {
            OracleCommand::Action(args) => cmd_oracle_action(&args),
            OracleCommand::Solve(args) => cmd_oracle_solve(&args),
        },
    };
    match result {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

/// Applies `JUNCTION_HJ_THREADS` to the global solver pool (`0` or
/// unset = automatic).
fn init_threads() {
    let Ok(value) = std::env::var("JUNCTION_HJ_THREADS") else {
        return;
    };
    match value.trim().parse::<usize>() {
        Ok(0) => {}
        Ok(n) => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Err(_) => {
            eprintln!("warning: ignoring JUNCTION_HJ_THREADS={value:?} (not a number)");
        }
    }
}

fn to_point(jn: &Junction, endpoint: &Endpoint) -> CmdResult<Point> {
    match *endpoint {
        Endpoint::Junction => Ok(Point::junction()),
        Endpoint::Branch(branch, coord) => jn.point(branch, coord).map_err(classify),
    }
}

fn check_span(t0: f64, t1: f64) -> CmdResult<()> {
    if t1 > t0 {
        Ok(())
    } else {
        Err(Failure::scenario(format!("end time {t1} must exceed start time {t0}")))
    }
}

fn cmd_action(args: &ActionArgs) -> CmdResult<()> {
    let loaded = scenario::load(&args.scenario)?;
    check_span(args.t0, args.t1)?;
    let from = to_point(&loaded.junction, &args.from)?;
    let to = to_point(&loaded.junction, &args.to)?;
    let result = action(&loaded.junction, args.t0, from, args.t1, to).map_err(classify)?;
    #[derive(serde::Serialize)]
    struct Output<'a> {
        value: f64,
        regime: &'a str,
        tau1: Option<f64>,
        tau2: Option<f64>,
    }
    let output = Output {
        value: result.value,
        regime: result.regime.as_str(),
        tau1: result.tau1,
        tau2: result.tau2,
    };
    println!("{}", serde_json::to_string(&output).expect("plain numbers serialize"));
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> CmdResult<()> {
    let loaded = scenario::load(&args.scenario)?;
    let sol = solve_grid(&loaded.junction, &loaded.initial, &loaded.grid).map_err(classify)?;
    let rows = write_solution_csv(&args.out, &sol)?;
    println!("wrote {rows} rows to {}", args.out.display());
    Ok(())
}

/// Writes a solved table as `t,branch,x,u` rows: time-major, the
/// junction point first as branch 0, then each branch with ascending
/// coordinates. Returns the number of data rows.
fn write_solution_csv(path: &Path, sol: &GridSolution) -> CmdResult<usize> {
    let mut out = String::from("t,branch,x,u\n");
    let mut rows = 0usize;
    for (r, &t) in sol.times().iter().enumerate() {
        let _ = writeln!(out, "{t},0,0,{}", sol.vertex_value(r));
        rows += 1;
        for b in sol.junction().branch_ids() {
            for (k, &xc) in sol.branch_coords(b).iter().enumerate() {
                let _ = writeln!(out, "{t},{},{xc},{}", b.get(), sol.value(r, b, k));
                rows += 1;
            }
        }
    }
    fs::write(path, out)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))?;
    Ok(rows)
}

/// The flux series goes next to the density table: `densities.csv`
/// becomes `densities_flux.csv`.
fn flux_sibling(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    match path.extension().and_then(|s| s.to_str()) {
        Some(ext) => path.with_file_name(format!("{stem}_flux.{ext}")),
        None => path.with_file_name(format!("{stem}_flux")),
    }
}

fn cmd_traffic(args: &TrafficArgs) -> CmdResult<()> {
    let loaded = scenario::load(&args.scenario)?;
    let sc = loaded.traffic.as_ref().ok_or_else(|| {
        Failure::scenario("the traffic command needs a scenario with a \"traffic\" section")
    })?;
    let sol = solve_grid(&loaded.junction, &loaded.initial, &loaded.grid).map_err(classify)?;

    let field = density_field(sc, &sol).map_err(classify)?;
    let mut out = String::from("t,road,X,rho\n");
    for (r, &t) in field.times().iter().enumerate() {
        for road in 0..sc.roads().len() {
            for (k, &coord) in field.road_coords(road).iter().enumerate() {
                let _ = writeln!(out, "{t},{},{coord},{}", road + 1, field.value(r, road, k));
            }
        }
    }
    fs::write(&args.out, out)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", args.out.display())))?;

    let flux_path = flux_sibling(&args.out);
    let mut series = String::from("t,flux\n");
    for (t, flux) in flux_trace(&sol).map_err(classify)? {
        let _ = writeln!(series, "{t},{flux}");
    }
    fs::write(&flux_path, series)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", flux_path.display())))?;

    println!(
        "wrote densities to {} and junction flux to {}",
        args.out.display(),
        flux_path.display()
    );
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult<()> {
    let loaded = scenario::load(&args.scenario)?;
    let mut ctx = VerifyContext::new(&loaded.junction);
    if let Some(sc) = loaded.traffic.as_ref() {
        ctx = ctx.with_traffic(sc);
    }
    let outcomes = match args.suite.as_deref() {
        Some(name) => {
            if !SUITE_NAMES.contains(&name) {
                return Err(Failure::scenario(format!(
                    "unknown suite {name:?}; valid names: {}",
                    SUITE_NAMES.join(", ")
                )));
            }
            vec![run_suite(&ctx, name).map_err(classify)?]
        }
        None => run_all_suites(&ctx).map_err(classify)?,
    };
    let mut failed = 0usize;
    for outcome in &outcomes {
        let status = if outcome.skipped {
            "SKIP"
        } else if outcome.passed {
            "PASS"
        } else {
            failed += 1;
            "FAIL"
        };
        println!("{status} {}: {}", outcome.name, outcome.detail);
    }
    if failed > 0 {
        return Err(Failure::numerical(format!(
            "{failed} of {} suite(s) failed",
            outcomes.len()
        )));
    }
    Ok(())
}

/// Rescales a point's coordinate by the time span (the scaling that
/// reduces a general span to the unit-horizon action).
fn scaled(jn: &Junction, p: Point, span: f64) -> CmdResult<Point> {
    match p.branch() {
        None => Ok(Point::junction()),
        Some(b) => jn.point(b.get(), p.coord() / span).map_err(classify),
    }
}

fn cmd_oracle_action(args: &OracleActionArgs) -> CmdResult<()> {
    let loaded = scenario::load(&args.base.scenario)?;
    check_span(args.base.t0, args.base.t1)?;
    let from = to_point(&loaded.junction, &args.base.from)?;
    let to = to_point(&loaded.junction, &args.base.to)?;
    let span = args.base.t1 - args.base.t0;
    let cfg =
        OracleConfig { n_tau: args.n_tau, refine: args.refine, ..OracleConfig::default() };
    let y = scaled(&loaded.junction, from, span)?;
    let x = scaled(&loaded.junction, to, span)?;
    let value = span * brute_force_d0(&loaded.junction, y, x, &cfg).map_err(classify)?;
    println!("{}", serde_json::json!({ "value": value }));
    Ok(())
}

fn cmd_oracle_solve(args: &OracleSolveArgs) -> CmdResult<()> {
    let loaded = scenario::load(&args.base.scenario)?;
    let cfg = OracleConfig {
        n_y: args.n_y,
        radius: args.radius,
        refine: args.refine,
        ..OracleConfig::default()
    };
    let jn = &loaded.junction;
    let spec = &loaded.grid;
    let mut out = String::from("t,branch,x,u\n");
    let mut rows = 0usize;
    for &t in spec.times() {
        let vertex =
            brute_force_solve(jn, &loaded.initial, t, Point::junction(), &cfg).map_err(classify)?;
        let _ = writeln!(out, "{t},0,0,{vertex}");
        rows += 1;
        for b in jn.branch_ids() {
            for k in 1..=spec.nx() {
                let coord = k as f64 * spec.xmax() / spec.nx() as f64;
                let x = jn.point(b.get(), coord).map_err(classify)?;
                let value =
                    brute_force_solve(jn, &loaded.initial, t, x, &cfg).map_err(classify)?;
                let _ = writeln!(out, "{t},{},{coord},{value}", b.get());
                rows += 1;
            }
        }
    }
    fs::write(&args.base.out, out)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", args.base.out.display())))?;
    println!("wrote {rows} rows to {}", args.base.out.display());
    Ok(())
}
