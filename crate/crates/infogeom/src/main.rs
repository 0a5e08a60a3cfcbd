use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use infogeom::commands::{
    self, exit, parse_point, AbilityArgs, CliError, CliResult, DistanceArgs, PathKind, ReproduceArgs, SimulateArgs,
};

/// Fisher-Rao distances, curvature and ability scales for statistical models.
#[derive(Parser)]
#[command(name = "infogeom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Length of a path between two parameter points.
    Distance {
        /// Model-spec JSON file.
        #[arg(long)]
        model: PathBuf,
        /// Start point, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// End point, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        /// line, circle, ellipse, geodesic or custom.
        #[arg(long, default_value = "geodesic")]
        path: String,
        /// Interior point of a custom polyline; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        via: Vec<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Output JSON file (stdout if absent and INFOGEOM_OUT_DIR is unset).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate a published table or figure and check it.
    Reproduce {
        /// table1, normal-paths, ability-grid, cfa-curvature, cfa-sim, twopl, jeffreys or all.
        target: String,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Monte Carlo curvature simulation for a curved family.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// True parameter, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Sample size, overriding the spec.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Gradient tolerance of the fits.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Geodesic ability scale of a Rasch test on a grid.
    AbilityGrid {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Distance { model, from, to, path, via, tol, out } => {
            let path = PathKind::parse(&path).ok_or_else(|| CliError::usage(format!("unknown path kind {path:?}")))?;
            let args = DistanceArgs {
                model,
                from: parse_point(&from)?,
                to: parse_point(&to)?,
                path,
                via: via.iter().map(|v| parse_point(v)).collect::<CliResult<_>>()?,
                tol,
                out,
            };
            commands::distance(&args)?;
            Ok(exit::OK)
        }
        Command::Reproduce { target, out, replicates, seed, tol } => {
            let reports = commands::reproduce_cmd(&ReproduceArgs { target, out, replicates, seed, tol })?;
            let mut ok = true;
            for r in &reports {
                for c in &r.checks {
                    let tag = if c.pass { "PASS" } else { "FAIL" };
                    println!("{tag} {}: {}: computed {:.6e}, expected {:.6e}", r.target, c.name, c.computed, c.expected);
                }
                ok &= r.passed();
            }
            Ok(if ok { exit::OK } else { exit::CHECK_FAILED })
        }
        Command::Simulate { model, theta, n, replicates, seed, tol, out } => {
            let args = SimulateArgs { model, theta: parse_point(&theta)?, n, replicates, seed, tol, out };
            commands::simulate_cmd(&args)?;
            Ok(exit::OK)
        }
        Command::AbilityGrid { model, from, to, step, out } => {
            commands::ability_cmd(&AbilityArgs { model, from, to, step, out })?;
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
