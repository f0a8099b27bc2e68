//! Semi-discrete optimal transport in the plane.
//!
//! A piecewise-linear density on a triangle mesh is transported to a finite
//! set of weighted sites. The transport map is encoded by one weight per
//! site: the Laguerre diagram of the weighted sites, restricted to the mesh,
//! assigns every point of the domain to its destination. Weights are found
//! by maximizing the concave Kantorovich dual with a damped Newton method.
//!
//! ```
//! use sdot::{DensitySpec, Mesh, Point, SiteSet, SolverOptions};
//!
//! let mesh = Mesh::square_grid(1, DensitySpec::Const(1.0)).unwrap();
//! let sites = SiteSet::new(
//!     vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)],
//!     vec![0.75, 0.25],
//! )
//! .unwrap();
//! let report = sdot::solver::newton(&mesh, &sites, &SolverOptions::default()).unwrap();
//! assert!(report.converged);
//! assert!((report.psi[0] - 0.25).abs() < 1e-10);
//! ```

pub mod domain;
pub mod dual;
pub mod error;
pub mod geom;
pub mod laguerre;
pub mod linalg;
pub mod numfmt;
pub mod oracle;
pub mod solver;
pub mod transport;

pub use domain::{DensitySpec, Mesh, SiteSet};
pub use error::{Error, Result};
pub use geom::{Affine, ConvexPolygon, HalfPlane, Point};
pub use laguerre::{DiagramBuilder, LaguerreDiagram, WeightVector};
pub use solver::{SolveReport, SolverOptions};
