//! Command-line front end for `sdot`: mesh generation, solving, distances,
//! diagram rendering and displacement interpolation.
//!
//! [`run`] is the whole program minus argument parsing; it never panics on
//! bad input and maps every failure to an exit status plus one line on
//! stderr of the form `error: <category>: <detail>`.

pub mod report;
pub mod svg;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sdot::laguerre::build;
use sdot::solver::{newton, SolveReport, SolverOptions};
use sdot::transport::interpolate;
use sdot::{dual, numfmt, oracle, DensitySpec, Error, Mesh, Point, SiteSet, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Distance,
    Diagram,
    Interpolate,
    MakeMesh,
    Check,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub mesh: Option<PathBuf>,
    pub sites: Option<PathBuf>,
    /// Rescale site masses to the mesh mass instead of rejecting imbalance.
    pub normalize: bool,
    /// Weights from an earlier report; skips the solve.
    pub psi: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub square: Option<usize>,
    pub density: DensitySpec,
    pub n: usize,
    pub times: Vec<f64>,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            mesh: None,
            sites: None,
            normalize: false,
            psi: None,
            out: None,
            svg: None,
            out_dir: None,
            square: None,
            density: DensitySpec::Const(1.0),
            n: 10_000,
            times: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            seed: 0,
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let need = |p: &Option<PathBuf>, flag: &str| {
            if p.is_none() {
                Err(Failure::usage(format!("--{flag} is required")))
            } else {
                Ok(())
            }
        };
        match self.command {
            Command::Solve => {
                need(&self.mesh, "mesh")?;
                need(&self.sites, "sites")?;
                need(&self.out, "out")?;
            }
            Command::Distance => {
                need(&self.mesh, "mesh")?;
                need(&self.sites, "sites")?;
            }
            Command::Diagram => {
                need(&self.mesh, "mesh")?;
                need(&self.sites, "sites")?;
                need(&self.svg, "svg")?;
            }
            Command::Interpolate => {
                need(&self.mesh, "mesh")?;
                need(&self.sites, "sites")?;
                need(&self.out_dir, "out-dir")?;
                if self.n == 0 {
                    return Err(Failure::usage("--n must be positive".into()));
                }
                if self.times.is_empty() {
                    return Err(Failure::usage("--times must list at least one time".into()));
                }
            }
            Command::MakeMesh => {
                need(&self.out, "out")?;
                match self.square {
                    None => return Err(Failure::usage("--square is required".into())),
                    Some(0) => return Err(Failure::usage("--square must be at least 1".into())),
                    Some(_) => {}
                }
            }
            Command::Check => {}
        }
        self.solver.validate().map_err(Failure::from)
    }
}

/// A failed command: exit status plus the diagnostic line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub category: String,
    pub detail: String,
}

impl Failure {
    fn usage(detail: String) -> Self {
        Self {
            code: 1,
            category: "validation".into(),
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!("error: {}: {}", self.category, self.detail)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DisconnectedAdjacency(_) | Error::LinearSolve { .. } | Error::LineSearch { .. } => 2,
            _ => 1,
        };
        Self {
            code,
            category: e.category().into(),
            detail: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 1,
        category: "io".into(),
        detail: format!("{}: {e}", path.display()),
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_failure(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_failure(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_failure(path, e))?;
    tmp.persist(path).map_err(|e| io_failure(path, e.error))?;
    Ok(())
}

fn load_instance(cfg: &RunConfig) -> Result<(Mesh, SiteSet), Failure> {
    let mesh = Mesh::load(cfg.mesh.as_ref().expect("validated"))?;
    let sites = SiteSet::load(cfg.sites.as_ref().expect("validated"), mesh.total_mass(), cfg.normalize)?;
    Ok((mesh, sites))
}

fn load_psi(path: &Path, sites: &SiteSet) -> Result<WeightVector, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let psi = report::parse_psi(&text, &path.display().to_string())?;
    if psi.len() != sites.len() {
        return Err(Failure::usage(format!(
            "{}: {} weights for {} sites",
            path.display(),
            psi.len(),
            sites.len()
        )));
    }
    Ok(psi)
}

fn not_converged(r: &SolveReport) -> Failure {
    Failure {
        code: 2,
        category: "non-convergence".into(),
        detail: format!(
            "gradient sup-norm {} after {} iterations",
            numfmt::real(r.grad_norm),
            r.iterations
        ),
    }
}

fn weights(cfg: &RunConfig, mesh: &Mesh, sites: &SiteSet) -> Result<WeightVector, Failure> {
    match &cfg.psi {
        Some(p) => load_psi(p, sites),
        None => {
            let r = newton(mesh, sites, &cfg.solver)?;
            if r.converged {
                Ok(r.psi)
            } else {
                Err(not_converged(&r))
            }
        }
    }
}

/// Executes the command; stdout receives human-readable results.
pub fn execute(cfg: &RunConfig, stdout: &mut dyn std::io::Write) -> Result<(), Failure> {
    cfg.validate()?;
    let say = |out: &mut dyn std::io::Write, s: String| {
        let _ = writeln!(out, "{s}");
    };
    match cfg.command {
        Command::MakeMesh => {
            let mesh = Mesh::square_grid(cfg.square.expect("validated"), cfg.density)?;
            write_atomic(cfg.out.as_ref().expect("validated"), mesh.to_dmesh().as_bytes())?;
            say(
                stdout,
                format!(
                    "vertices={} triangles={} mass={}",
                    mesh.vertices().len(),
                    mesh.triangle_count(),
                    numfmt::real(mesh.total_mass())
                ),
            );
        }
        Command::Solve | Command::Distance => {
            let (mesh, sites) = load_instance(cfg)?;
            let r = newton(&mesh, &sites, &cfg.solver)?;
            if let Some(out) = &cfg.out {
                write_atomic(out, report::to_json(&r).as_bytes())?;
            }
            if cfg.command == Command::Distance {
                say(stdout, numfmt::real(r.w2));
            } else {
                say(
                    stdout,
                    format!(
                        "converged={} iterations={} grad_norm={} w2={}",
                        r.converged,
                        r.iterations,
                        numfmt::real(r.grad_norm),
                        numfmt::real(r.w2)
                    ),
                );
            }
            if !r.converged {
                return Err(not_converged(&r));
            }
        }
        Command::Diagram => {
            let (mesh, sites) = load_instance(cfg)?;
            let psi = weights(cfg, &mesh, &sites)?;
            let diagram = build(&mesh, &sites, &psi)?;
            let text = svg::render(&diagram, mesh.bbox());
            write_atomic(cfg.svg.as_ref().expect("validated"), text.as_bytes())?;
        }
        Command::Interpolate => {
            let (mesh, sites) = load_instance(cfg)?;
            let psi = weights(cfg, &mesh, &sites)?;
            let frames = interpolate(&mesh, &sites, &psi, cfg.n, &cfg.times, cfg.seed)?;
            let dir = cfg.out_dir.as_ref().expect("validated");
            std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            for (k, frame) in frames.iter().enumerate() {
                let mut csv = String::from("t,x,y,site\n");
                let t = numfmt::real(frame.t);
                for (p, j) in frame.points.iter().zip(&frame.source_site) {
                    let _ = writeln!(csv, "{t},{},{},{j}", numfmt::real(p.x), numfmt::real(p.y));
                }
                write_atomic(&dir.join(format!("frame_{k}.csv")), csv.as_bytes())?;
            }
            say(stdout, format!("frames={} points={}", frames.len(), cfg.n));
        }
        Command::Check => {
            let mut failed = Vec::new();
            for (name, result) in self_check() {
                match result {
                    Ok(detail) => say(stdout, format!("PASS {name}: {detail}")),
                    Err(detail) => {
                        say(stdout, format!("FAIL {name}: {detail}"));
                        failed.push(name);
                    }
                }
            }
            if !failed.is_empty() {
                return Err(Failure {
                    code: 1,
                    category: "check".into(),
                    detail: format!("failed: {}", failed.join(", ")),
                });
            }
        }
    }
    Ok(())
}

/// Built-in diagnostics: analytic gradient against central differences of
/// the dual, and cell masses summing to the mesh mass.
pub fn self_check() -> Vec<(&'static str, Result<String, String>)> {
    let instance = || -> sdot::Result<(Mesh, SiteSet, WeightVector)> {
        let mesh = Mesh::square_grid(3, DensitySpec::LinearX)?;
        let pts = vec![
            Point::new(0.2, 0.3),
            Point::new(0.7, 0.2),
            Point::new(0.5, 0.5),
            Point::new(0.3, 0.8),
            Point::new(0.85, 0.75),
            Point::new(0.1, 0.55),
        ];
        let sites = SiteSet::uniform(pts, mesh.total_mass())?;
        let psi = WeightVector(vec![0.01, -0.02, 0.005, 0.0, 0.015, -0.01]);
        Ok((mesh, sites, psi))
    };
    let fd = || -> sdot::Result<Result<String, String>> {
        let (mesh, sites, psi) = instance()?;
        let g = dual::gradient(&build(&mesh, &sites, &psi)?, &sites);
        let approx = oracle::fd_gradient(&mesh, &sites, &psi, 1e-6)?;
        let err = g.iter().zip(&approx).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let detail = format!("max |g - fd| = {err:e}");
        Ok(if err <= 1e-6 { Ok(detail) } else { Err(detail) })
    };
    let partition = || -> sdot::Result<Result<String, String>> {
        let (mesh, sites, psi) = instance()?;
        let d = build(&mesh, &sites, &psi)?;
        let total: f64 = d.masses().iter().sum();
        let err = (total - mesh.total_mass()).abs() / mesh.total_mass();
        let detail = format!("relative mass defect = {err:e}");
        Ok(if err <= 1e-12 { Ok(detail) } else { Err(detail) })
    };
    let flatten = |r: sdot::Result<Result<String, String>>| r.unwrap_or_else(|e| Err(e.to_string()));
    vec![
        ("fd-gradient", flatten(fd())),
        ("partition-of-mass", flatten(partition())),
    ]
}

/// Runs the command and returns the process exit status.
pub fn run(cfg: RunConfig) -> i32 {
    let stdout = std::io::stdout();
    match execute(&cfg, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", f.line());
            f.code
        }
    }
}
