use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdot::solver::SolverOptions;
use sdot::DensitySpec;
use sdot_cli::{run, Command, RunConfig};

#[derive(Parser)]
#[command(name = "sdot", version, about = "Semi-discrete optimal transport on triangulated planar domains")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Instance {
    /// Triangle mesh with per-vertex density (.dmesh)
    #[arg(long)]
    mesh: PathBuf,
    /// Sites CSV with header x,y,nu
    #[arg(long)]
    sites: PathBuf,
    /// Rescale site masses to the mesh mass
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct Solver {
    #[arg(long, default_value_t = SolverOptions::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = SolverOptions::default().max_iter)]
    max_iter: usize,
    #[arg(long, default_value_t = SolverOptions::default().max_halvings)]
    max_halvings: usize,
    #[arg(long, default_value_t = SolverOptions::default().linear_tol)]
    linear_tol: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve for the optimal weights and write a JSON report
    Solve {
        #[command(flatten)]
        instance: Instance,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: Solver,
    },
    /// Print the Wasserstein-2 distance
    Distance {
        #[command(flatten)]
        instance: Instance,
        /// Also write the JSON report
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: Solver,
    },
    /// Render the Laguerre diagram as SVG
    Diagram {
        #[command(flatten)]
        instance: Instance,
        /// Weights from a previous report (solves when absent)
        #[arg(long)]
        psi: Option<PathBuf>,
        #[arg(long)]
        svg: PathBuf,
        #[command(flatten)]
        solver: Solver,
    },
    /// Write displacement-interpolation frames as frame_<k>.csv
    Interpolate {
        #[command(flatten)]
        instance: Instance,
        #[arg(long)]
        psi: Option<PathBuf>,
        /// Number of samples drawn from the source density
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        times: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        solver: Solver,
    },
    /// Generate a unit-square mesh with res×res cells
    MakeMesh {
        #[arg(long)]
        square: usize,
        /// const:<c>, linear-x or linear-y
        #[arg(long, default_value = "const:1")]
        density: DensitySpec,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in diagnostics
    Check,
}

fn apply(cfg: &mut RunConfig, instance: Instance, solver: Solver) {
    cfg.mesh = Some(instance.mesh);
    cfg.sites = Some(instance.sites);
    cfg.normalize = instance.normalize;
    cfg.solver = SolverOptions {
        tol: solver.tol,
        max_iter: solver.max_iter,
        max_halvings: solver.max_halvings,
        linear_tol: solver.linear_tol,
    };
}

fn config(cmd: Cmd) -> RunConfig {
    match cmd {
        Cmd::Solve { instance, out, solver } => {
            let mut cfg = RunConfig::new(Command::Solve);
            apply(&mut cfg, instance, solver);
            cfg.out = Some(out);
            cfg
        }
        Cmd::Distance { instance, out, solver } => {
            let mut cfg = RunConfig::new(Command::Distance);
            apply(&mut cfg, instance, solver);
            cfg.out = out;
            cfg
        }
        Cmd::Diagram {
            instance,
            psi,
            svg,
            solver,
        } => {
            let mut cfg = RunConfig::new(Command::Diagram);
            apply(&mut cfg, instance, solver);
            cfg.psi = psi;
            cfg.svg = Some(svg);
            cfg
        }
        Cmd::Interpolate {
            instance,
            psi,
            n,
            times,
            seed,
            out_dir,
            solver,
        } => {
            let mut cfg = RunConfig::new(Command::Interpolate);
            apply(&mut cfg, instance, solver);
            cfg.psi = psi;
            cfg.n = n;
            cfg.times = times;
            cfg.seed = seed;
            cfg.out_dir = Some(out_dir);
            cfg
        }
        Cmd::MakeMesh { square, density, out } => {
            let mut cfg = RunConfig::new(Command::MakeMesh);
            cfg.square = Some(square);
            cfg.density = density;
            cfg.out = Some(out);
            cfg
        }
        Cmd::Check => RunConfig::new(Command::Check),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let detail: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("error: validation: {}", detail.join(" ").trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    if let Ok(v) = std::env::var("SDOT_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
            _ => {
                eprintln!("error: validation: SDOT_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::from(run(config(cli.command)) as u8)
}
