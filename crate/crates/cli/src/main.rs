//! `ncball`: batch front end for the noncommutative-ball metrics.
//!
//! Every subcommand reads JSON documents, prints a text report (or a single
//! JSON object with `--json`) and exits with 0 on success, 1 on a property
//! failure, 2 on malformed input and 3 when an enclosure stays wider than
//! `--tol` within the `--mmax` horizon.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ncball::metrics::DEFAULT_R_GRID;

#[derive(Parser, Debug)]
#[command(name = "ncball", version, about = "Hyperbolic and kernel metrics on the noncommutative unit ball")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Wrap the result in a single JSON object.
    #[arg(long, global = true)]
    pub json: bool,
    /// Target enclosure width.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Horizon budget of the certificate engine (also the deepest corner level).
    #[arg(long, global = true, default_value_t = 20_000)]
    pub mmax: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enclosure of the hyperbolic distance δ(A, B).
    Distance { a: PathBuf, b: PathBuf },
    /// Enclosure of the Harnack gauge ω(A, B) = exp δ(A, B).
    Omega { a: PathBuf, b: PathBuf },
    /// Enclosure of the kernel metric d_H(A, B).
    Dh { a: PathBuf, b: PathBuf },
    /// Joint spectral radius and ball membership of a tuple.
    SpectralRadius {
        x: PathBuf,
        #[arg(long, default_value_t = 200)]
        kmax: usize,
    },
    /// Tests A ≺_c B on finite compressions of the Poisson kernels.
    Harnack {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        c: f64,
        /// Deepest word length of the dense compressions.
        #[arg(long, default_value_t = 6)]
        levels: usize,
        /// Radii to test; defaults to 0.5, 0.9, 0.99.
        #[arg(long = "r", value_delimiter = ',')]
        radii: Vec<f64>,
    },
    /// Free holomorphic automorphisms of the ball.
    Auto {
        #[command(subcommand)]
        action: AutoAction,
    },
    /// Compares δ(F(X), F(Y)) with δ(X, Y) for a polynomial map F.
    SchwarzPick { f: PathBuf, x: PathBuf, y: PathBuf },
    /// CSV of points on the hyperbolic circle of radius rho about a point of the unit ball of C².
    Disk {
        #[arg(long)]
        center: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs the seeded property suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

#[derive(Subcommand, Debug)]
enum AutoAction {
    /// Applies Ψ = Ψ_U ∘ Ψ_λ to X.
    Apply {
        #[arg(long)]
        unitary: PathBuf,
        #[arg(long)]
        lambda: PathBuf,
        x: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let (name, outcome) = match &cli.command {
        Command::Distance { a, b } => ("distance", commands::metric(commands::Metric::Delta, a, b, g)),
        Command::Omega { a, b } => ("omega", commands::metric(commands::Metric::Omega, a, b, g)),
        Command::Dh { a, b } => ("dh", commands::metric(commands::Metric::KernelMetric, a, b, g)),
        Command::SpectralRadius { x, kmax } => ("spectral-radius", commands::spectral_radius(x, *kmax)),
        Command::Harnack { a, b, c, levels, radii } => {
            let grid = if radii.is_empty() { DEFAULT_R_GRID.to_vec() } else { radii.clone() };
            ("harnack", commands::harnack(a, b, *c, *levels, grid))
        }
        Command::Auto { action: AutoAction::Apply { unitary, lambda, x } } => {
            ("auto apply", commands::auto_apply(unitary, lambda, x))
        }
        Command::SchwarzPick { f, x, y } => ("schwarz-pick", commands::schwarz_pick(f, x, y, g)),
        Command::Disk { center, radius, samples, seed } => ("disk", commands::disk(center, *radius, *samples, *seed)),
        Command::Verify { suite, seed, trials } => ("verify", commands::verify(suite, *seed, *trials)),
    };
    let code = match outcome {
        Ok(report) => {
            if g.json {
                println!("{}", json!({ "command": name, "exit_code": report.code, "result": report.json }));
            } else {
                print!("{}", report.text);
            }
            report.code
        }
        Err(e) => {
            let code = e.exit_code();
            if g.json {
                println!("{}", json!({ "command": name, "exit_code": code, "error": e.to_string() }));
            } else {
                eprintln!("error: {e}");
            }
            code
        }
    };
    ExitCode::from(code as u8)
}
