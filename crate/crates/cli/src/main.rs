//! `toppkit` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible instance,
//! 3 oracle and solver disagree.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toppkit::harness::{self, Reference};
use toppkit::oracle::{self, Lattice};
use toppkit::retime;
use toppkit::{check_admissible, profile_error, solve_default, Error, PathSpec, Provenance, SpeedProfile};

const EXIT_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_DISAGREE: u8 = 3;

#[derive(Parser)]
#[command(name = "toppkit", version, about = "Time-optimal speed profiles along fixed paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a path on a uniform grid; writes profile.csv and report.json.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Error-vs-resolution sweep; writes sweep.csv.
    Sweep {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated grid sizes, e.g. 11,101,1001.
        #[arg(long, value_delimiter = ',')]
        resolutions: Vec<usize>,
        #[arg(long, default_value = "analytic")]
        reference: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lattice brute-force optimum and its agreement with the solver;
    /// writes oracle.csv and agreement.json.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = oracle::DEFAULT_LEVELS)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time-sample a profile CSV; writes trajectory.csv.
    Retime {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gap to the unrelaxed solve for decreasing relaxations; writes xi.csv.
    XiSweep {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        /// Comma-separated, strictly decreasing, ending at 0.
        #[arg(long, value_delimiter = ',')]
        xis: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure of a command, already mapped to its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Infeasible { .. } => EXIT_INFEASIBLE,
            Error::Sweep { source, .. } if matches!(**source, Error::Infeasible { .. }) => EXIT_INFEASIBLE,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

type CmdResult = Result<(), Failure>;

fn load_spec(path: &Path) -> Result<PathSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    PathSpec::from_json(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Admissibility tolerance, overridable through `TOPPKIT_TOL`.
fn tolerance(default: f64) -> Result<f64, Failure> {
    match std::env::var("TOPPKIT_TOL") {
        Ok(raw) => match raw.trim().parse::<f64>() {
            Ok(tol) if tol >= 0.0 => Ok(tol),
            _ => Err(input_error(format!("TOPPKIT_TOL must be a non-negative number, got {raw:?}"))),
        },
        Err(_) => Ok(default),
    }
}

fn check_size(n: usize) -> CmdResult {
    if n < 2 {
        return Err(input_error(format!("--n must be >= 2, got {n}")));
    }
    Ok(())
}

fn cmd_solve(input: &Path, n: usize, out: &Path) -> CmdResult {
    let spec = load_spec(input)?;
    check_size(n)?;
    let model = spec.build_model()?;
    let grid = spec.uniform_grid(n)?;
    let report = solve_default(&grid, &model, spec.endpoints())?;
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), report.to_json()?)?;
    let Some(profile) = report.profile.as_ref() else {
        return Err(report.into_profile().unwrap_err().into());
    };
    profile.write_csv(create(out, "profile.csv")?)?;

    let tol = tolerance(model.default_tol())?;
    let verdict = check_admissible(profile, &model, tol)?;
    match report.traversal_time {
        Some(t) => println!("traversal time: {t:.6} s"),
        None => println!("traversal time: diverges"),
    }
    match verdict.violation {
        None => println!("admissible at tol {tol:e}"),
        Some(v) => println!("NOT admissible at tol {tol:e}: {v}"),
    }
    Ok(())
}

fn cmd_sweep(input: &Path, resolutions: &[usize], reference: &str, out: &Path) -> CmdResult {
    let spec = load_spec(input)?;
    let reference: Reference = reference.parse()?;
    let rows = harness::convergence_sweep(&spec, resolutions, reference)?;
    harness::write_convergence_csv(&rows, create(out, "sweep.csv")?)?;
    for r in &rows {
        println!("n={:<8} delta={:.3e} rho={:.3e}", r.n, r.delta, r.rho);
    }
    Ok(())
}

fn cmd_oracle(input: &Path, n: usize, levels: usize, out: &Path) -> CmdResult {
    let spec = load_spec(input)?;
    check_size(n)?;
    if levels < oracle::MIN_LEVELS {
        return Err(input_error(format!("--levels must be >= {}, got {levels}", oracle::MIN_LEVELS)));
    }
    let model = spec.build_model()?;
    let grid = spec.uniform_grid(n)?;
    let solved = solve_default(&grid, &model, spec.endpoints())?.into_profile()?;
    let brute = oracle::dp_optimum(&grid, &model, levels, spec.endpoints())?;
    brute.write_csv(create(out, "oracle.csv")?)?;

    let spacing = Lattice::new(&grid, &model, levels)?.spacing();
    let tolerance = oracle::agreement_tolerance(spacing, model.slope_cap(), grid.resolution());
    let rho = profile_error(&brute, &solved)?;
    let within = rho <= tolerance;
    let summary = serde_json::json!({
        "n": n,
        "levels": levels,
        "spacing": spacing,
        "delta": grid.resolution(),
        "slope_cap": model.slope_cap(),
        "rho": rho,
        "tolerance": tolerance,
        "within": within,
    });
    fs::write(out.join("agreement.json"), serde_json::to_string_pretty(&summary).map_err(Error::from)?)?;
    println!("oracle vs solver: rho={rho:.3e} tolerance={tolerance:.3e}");
    if within {
        Ok(())
    } else {
        Err(Failure { code: EXIT_DISAGREE, message: "oracle and solver disagree beyond tolerance".into() })
    }
}

fn cmd_retime(profile: &Path, dt: f64, out: &Path) -> CmdResult {
    let file = File::open(profile).map_err(|e| input_error(format!("{}: {e}", profile.display())))?;
    let profile = SpeedProfile::read_csv(file, Provenance::Synthetic { seed: None })?;
    let samples = retime::sample_trajectory(&profile, dt)?;
    retime::write_trajectory_csv(&samples, create(out, "trajectory.csv")?)?;
    println!("traversal time: {:.6} s", samples[samples.len() - 1].t);
    Ok(())
}

fn cmd_xi_sweep(input: &Path, n: usize, xis: &[f64], out: &Path) -> CmdResult {
    let spec = load_spec(input)?;
    check_size(n)?;
    let grid = spec.uniform_grid(n)?;
    let rows = harness::xi_sweep(&spec, &grid, xis)?;
    harness::write_xi_csv(&rows, create(out, "xi.csv")?)?;
    for r in &rows {
        println!("xi={:.3e} gap={:.3e}", r.xi, r.gap);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Solve { input, n, out } => cmd_solve(input, *n, out),
        Command::Sweep { input, resolutions, reference, out } => cmd_sweep(input, resolutions, reference, out),
        Command::Oracle { input, n, levels, out } => cmd_oracle(input, *n, *levels, out),
        Command::Retime { profile, dt, out } => cmd_retime(profile, *dt, out),
        Command::XiSweep { input, n, xis, out } => cmd_xi_sweep(input, *n, xis, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
