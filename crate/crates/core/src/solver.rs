//! Damped Newton ascent on the Kantorovich dual.
//!
//! Starting from the Voronoi diagram (`ψ = 0`), each iteration solves the
//! gauge-fixed Newton system and halves the step until the cell masses stay
//! above `ε₀ = ½ min(min_j ν_j, min_j m_j(ψ⁰))` and the gradient sup-norm
//! contracts by `1 − τ/2`. The last site is pinned: `ψ_{n−1} = 0`.

use crate::domain::{Mesh, SiteSet};
use crate::dual::{self, sup_norm, SparseHessian};
use crate::error::{Error, Result};
use crate::laguerre::{DiagramBuilder, LaguerreDiagram, WeightVector};
use crate::linalg::{conjugate_gradient, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop when `‖ν − m‖_∞ ≤ tol · μ(Ω)`.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Relative residual of the inner linear solve.
    pub linear_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            max_halvings: 40,
            linear_tol: 1e-12,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Validation(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if !(self.linear_tol > 0.0 && self.linear_tol < 1.0) {
            return Err(Error::Validation(format!(
                "linear_tol must lie in (0, 1), got {}",
                self.linear_tol
            )));
        }
        if self.max_iter == 0 || self.max_halvings == 0 {
            return Err(Error::Validation("max_iter and max_halvings must be positive".into()));
        }
        Ok(())
    }
}

/// One accepted Newton step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// `‖g‖_∞` before the step.
    pub grad_norm: f64,
    pub tau: f64,
    /// `K(ψ)` before the step.
    pub k_value: f64,
    /// `min_j m_j` after the step.
    pub min_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub psi: WeightVector,
    pub masses: Vec<f64>,
    pub nu: Vec<f64>,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    pub w2: f64,
    /// `‖ν − m‖_∞` at the returned weights.
    pub grad_norm: f64,
    pub converged: bool,
    pub eps0: f64,
    pub mesh_mass: f64,
}

impl SolveReport {
    /// Checks the damping certificate and the mass floor on every row.
    pub fn validate_trace(&self) -> std::result::Result<(), String> {
        for (k, row) in self.trace.iter().enumerate() {
            let next = self.trace.get(k + 1).map_or(self.grad_norm, |r| r.grad_norm);
            if next > (1.0 - 0.5 * row.tau) * row.grad_norm {
                return Err(format!(
                    "step {k}: gradient norm {next:e} exceeds (1 - {}/2) * {:e}",
                    row.tau, row.grad_norm
                ));
            }
            if row.min_mass < self.eps0 {
                return Err(format!("step {k}: min mass {:e} below floor {:e}", row.min_mass, self.eps0));
            }
        }
        Ok(())
    }
}

/// State handed to a [`newton_observed`] callback at every accepted iterate.
pub struct Iterate<'a> {
    pub iter: usize,
    pub diagram: &'a LaguerreDiagram,
    pub gradient: &'a [f64],
}

/// Solves `H d = −g` with the last coordinate pinned to zero.
///
/// The reduced matrix `−H` (last row and column removed) is SPD when the
/// interface graph is connected.
pub fn solve_gauge_fixed(h: &SparseHessian, g: &[f64], linear_tol: f64) -> Result<Vec<f64>> {
    let n = h.dim();
    assert_eq!(g.len(), n);
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let comps = h.components();
    if comps.len() > 1 {
        return Err(Error::DisconnectedAdjacency(comps));
    }
    let pin = n - 1;
    let m = n - 1;
    let mut triplets = Vec::with_capacity(m + 2 * h.entries().len());
    for (i, &d) in h.diag()[..m].iter().enumerate() {
        triplets.push((i, i, -d));
    }
    for &(i, j, w) in h.entries() {
        if i != pin && j != pin {
            triplets.push((i, j, -w));
            triplets.push((j, i, -w));
        }
    }
    let a = CsrMatrix::from_triplets(m, triplets);
    let mut d = conjugate_gradient(&a, &g[..m], linear_tol)?;
    d.push(0.0);
    Ok(d)
}

/// Runs the damped Newton solver from `ψ = 0`.
pub fn newton(mesh: &Mesh, sites: &SiteSet, opts: &SolverOptions) -> Result<SolveReport> {
    newton_observed(mesh, sites, opts, &mut |_| {})
}

/// [`newton`], calling `observer` at the initial and every accepted iterate.
pub fn newton_observed(
    mesh: &Mesh,
    sites: &SiteSet,
    opts: &SolverOptions,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolveReport> {
    opts.validate()?;
    let n = sites.len();
    let mu = mesh.total_mass();
    let builder = DiagramBuilder::new(mesh, sites);
    let mut psi = WeightVector::zeros(n);
    let mut diagram = builder.build(&psi)?;

    let empty: Vec<usize> = (0..n).filter(|&j| diagram.masses()[j] <= 0.0).collect();
    if !empty.is_empty() {
        return Err(Error::EmptyCells(empty));
    }
    let min_nu = sites.masses().iter().copied().fold(f64::INFINITY, f64::min);
    let min_m0 = diagram.masses().iter().copied().fold(f64::INFINITY, f64::min);
    let eps0 = 0.5 * min_nu.min(min_m0);

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut g = dual::gradient(&diagram, sites);
    let mut gnorm = sup_norm(&g);
    let converged = loop {
        observer(&Iterate {
            iter: iterations,
            diagram: &diagram,
            gradient: &g,
        });
        if gnorm <= opts.tol * mu {
            break true;
        }
        if iterations == opts.max_iter {
            break false;
        }
        let k_value = dual::value(&diagram, sites);
        let h = dual::hessian(&diagram);
        let d = solve_gauge_fixed(&h, &g, opts.linear_tol)?;

        let mut tau = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = WeightVector(psi.iter().zip(&d).map(|(p, d)| p + tau * d).collect());
            let trial_diagram = builder.build(&trial)?;
            let min_mass = trial_diagram.masses().iter().copied().fold(f64::INFINITY, f64::min);
            let trial_g = dual::gradient(&trial_diagram, sites);
            let trial_norm = sup_norm(&trial_g);
            if min_mass >= eps0 && trial_norm <= (1.0 - 0.5 * tau) * gnorm {
                accepted = Some((trial, trial_diagram, trial_g, trial_norm, min_mass));
                break;
            }
            tau *= 0.5;
        }
        let Some((trial, trial_diagram, trial_g, trial_norm, min_mass)) = accepted else {
            return Err(Error::LineSearch {
                iteration: iterations,
                halvings: opts.max_halvings,
            });
        };
        trace.push(TraceRow {
            iter: iterations,
            grad_norm: gnorm,
            tau,
            k_value,
            min_mass,
        });
        psi = trial;
        diagram = trial_diagram;
        g = trial_g;
        gnorm = trial_norm;
        iterations += 1;
    };

    let w2 = dual::cost_integrals(&diagram).iter().sum::<f64>().max(0.0).sqrt();
    Ok(SolveReport {
        masses: diagram.masses().to_vec(),
        nu: sites.masses().to_vec(),
        psi,
        iterations,
        trace,
        w2,
        grad_norm: gnorm,
        converged,
        eps0,
        mesh_mass: mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DensitySpec;
    use crate::geom::Point;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two_reduced_system() {
        let h = SparseHessian::from_entries(2, vec![(0, 1, 1.0)]);
        let d = solve_gauge_fixed(&h, &[0.25, -0.25], 1e-12).unwrap();
        assert_relative_eq!(d[0], 0.25, epsilon = 1e-15);
        assert_eq!(d[1], 0.0);
        assert_eq!(solve_gauge_fixed(&h, &[0.0, 0.0], 1e-12).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn three_site_chain() {
        let h = SparseHessian::from_entries(3, vec![(0, 1, 1.0), (1, 2, 1.0)]);
        let g = [1.0, 0.0, -1.0];
        let d = solve_gauge_fixed(&h, &g, 1e-12).unwrap();
        // reduced (−H) on sites 0..1 is [[1,-1],[-1,2]], inverse [[2,1],[1,1]]
        assert_relative_eq!(d[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(d[1], 1.0, epsilon = 1e-12);
        assert_eq!(d[2], 0.0);
        let hd = h.mul_vec(&d);
        for i in 0..2 {
            assert_relative_eq!(-hd[i], g[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn disconnected_graph_is_an_error() {
        let h = SparseHessian::from_entries(4, vec![(0, 1, 1.0), (2, 3, 1.0)]);
        match solve_gauge_fixed(&h, &[1.0, -1.0, 1.0, -1.0], 1e-12) {
            Err(Error::DisconnectedAdjacency(c)) => assert_eq!(c.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn analytic_two_site_solve() {
        let mesh = Mesh::square_grid(1, DensitySpec::Const(1.0)).unwrap();
        let sites = SiteSet::new(vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)], vec![0.75, 0.25]).unwrap();
        let r = newton(&mesh, &sites, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.trace[0].tau, 1.0);
        assert_relative_eq!(r.psi[0], 0.25, epsilon = 1e-12);
        assert_eq!(r.psi[1], 0.0);
        r.validate_trace().unwrap();
    }

    #[test]
    fn already_optimal() {
        let mesh = Mesh::square_grid(1, DensitySpec::Const(1.0)).unwrap();
        let sites = SiteSet::new(vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)], vec![0.5, 0.5]).unwrap();
        let r = newton(&mesh, &sites, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert!(r.trace.is_empty());
        assert_eq!(r.psi.0, vec![0.0, 0.0]);
    }

    #[test]
    fn empty_voronoi_cell_is_an_initialization_error() {
        let mesh = Mesh::square_grid(1, DensitySpec::Const(1.0)).unwrap();
        // the third site's Voronoi cell misses the square entirely
        let sites = SiteSet::new(
            vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5), Point::new(5.0, 0.5)],
            vec![0.4, 0.4, 0.2],
        )
        .unwrap();
        match newton(&mesh, &sites, &SolverOptions::default()) {
            Err(Error::EmptyCells(c)) => assert_eq!(c, vec![2]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let mesh = Mesh::square_grid(2, DensitySpec::LinearX).unwrap();
        let pts = vec![
            Point::new(0.1, 0.2),
            Point::new(0.8, 0.3),
            Point::new(0.4, 0.9),
            Point::new(0.6, 0.6),
        ];
        let sites = SiteSet::uniform(pts, mesh.total_mass()).unwrap();
        let opts = SolverOptions {
            max_iter: 1,
            ..Default::default()
        };
        let r = newton(&mesh, &sites, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.trace.len(), 1);
        r.validate_trace().unwrap();
    }

    #[test]
    fn bad_options() {
        let opts = SolverOptions {
            tol: 2.0,
            ..Default::default()
        };
        assert!(opts.validate().is_err());
    }
}
