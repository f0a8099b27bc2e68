//! Verification oracles that do not share code paths with the diagram
//! construction: Monte-Carlo cell masses, finite differences of the dual,
//! and brute-force nearest-site classification.

use crate::domain::{Mesh, SiteSet};
use crate::dual;
use crate::error::Result;
use crate::geom::Point;
use crate::laguerre::{build, power_argmin, power_distance, WeightVector};

#[derive(Debug, Clone, PartialEq)]
pub struct McMasses {
    pub masses: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
}

/// Estimates cell masses by sampling `μ` and classifying each sample by
/// power-distance argmin.
pub fn mc_masses(mesh: &Mesh, sites: &SiteSet, psi: &WeightVector, n: usize, seed: u64) -> McMasses {
    assert!(n >= 1, "need at least one sample");
    let mut counts = vec![0usize; sites.len()];
    for x in mesh.sample(n, seed) {
        counts[power_argmin(x, sites.positions(), psi)] += 1;
    }
    let mu = mesh.total_mass();
    let nf = n as f64;
    let masses = counts.iter().map(|&c| mu * c as f64 / nf).collect();
    let stderr = counts
        .iter()
        .map(|&c| {
            let p = c as f64 / nf;
            mu * (p * (1.0 - p) / nf).sqrt()
        })
        .collect();
    McMasses {
        masses,
        stderr,
        samples: n,
    }
}

/// Central differences of `K` along each coordinate.
pub fn fd_gradient(mesh: &Mesh, sites: &SiteSet, psi: &WeightVector, h: f64) -> Result<Vec<f64>> {
    assert!(h > 0.0);
    let k = |p: &WeightVector| -> Result<f64> { Ok(dual::value(&build(mesh, sites, p)?, sites)) };
    (0..psi.len())
        .map(|j| {
            let mut plus = psi.clone();
            let mut minus = psi.clone();
            plus[j] += h;
            minus[j] -= h;
            Ok((k(&plus)? - k(&minus)?) / (2.0 * h))
        })
        .collect()
}

/// Central differences of the analytic gradient: row `j` holds `∂g/∂ψ_j`.
pub fn fd_hessian(mesh: &Mesh, sites: &SiteSet, psi: &WeightVector, h: f64) -> Result<Vec<Vec<f64>>> {
    assert!(h > 0.0);
    let g = |p: &WeightVector| -> Result<Vec<f64>> { Ok(dual::gradient(&build(mesh, sites, p)?, sites)) };
    (0..psi.len())
        .map(|j| {
            let mut plus = psi.clone();
            let mut minus = psi.clone();
            plus[j] += h;
            minus[j] -= h;
            let (gp, gm) = (g(&plus)?, g(&minus)?);
            Ok(gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
        })
        .collect()
}

/// Nearest site by power distance, together with the distance from `x` to
/// the bisector separating it from the runner-up.
pub fn classify(x: Point, sites: &[Point], psi: &[f64]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    let mut second = (usize::MAX, f64::INFINITY);
    for (j, (&y, &w)) in sites.iter().zip(psi).enumerate() {
        let d = power_distance(x, y, w);
        if d < best.1 {
            second = best;
            best = (j, d);
        } else if d < second.1 {
            second = (j, d);
        }
    }
    if second.0 == usize::MAX {
        return (best.0, f64::INFINITY);
    }
    // the power difference grows at rate 2‖y_i − y_j‖ across the bisector
    let gap = (second.1 - best.1) / (2.0 * sites[best.0].dist(sites[second.0]));
    (best.0, gap)
}
