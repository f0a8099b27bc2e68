//! Products of a solved transport problem: W₂, cell barycenters and
//! displacement interpolation.

use crate::domain::{Mesh, SiteSet};
use crate::dual::cost_integrals;
use crate::error::{Error, Result};
use crate::geom::{first_moments, Point};
use crate::laguerre::{power_argmin, LaguerreDiagram, WeightVector};

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSummary {
    pub w2: f64,
    pub cell_barycenters: Vec<Point>,
    pub cell_masses: Vec<f64>,
}

/// `sqrt(Σ_j ∫_{Lag_j} ‖x − y_j‖² dμ)` for the diagram's cells.
pub fn wasserstein2(diagram: &LaguerreDiagram) -> f64 {
    cost_integrals(diagram).iter().sum::<f64>().max(0.0).sqrt()
}

/// `μ`-barycenter of every cell. Fails on the first empty cell.
pub fn barycenters(diagram: &LaguerreDiagram) -> Result<Vec<Point>> {
    let n = diagram.site_count();
    let mut moments = vec![Point::default(); n];
    for f in diagram.fragments() {
        moments[f.site] = moments[f.site] + first_moments(&f.polygon, &f.density);
    }
    moments
        .into_iter()
        .zip(diagram.masses())
        .enumerate()
        .map(|(j, (m, &mass))| {
            if mass > 0.0 {
                Ok((1.0 / mass) * m)
            } else {
                Err(Error::ZeroMassCell(j))
            }
        })
        .collect()
}

pub fn summarize(diagram: &LaguerreDiagram) -> Result<TransportSummary> {
    Ok(TransportSummary {
        w2: wasserstein2(diagram),
        cell_barycenters: barycenters(diagram)?,
        cell_masses: diagram.masses().to_vec(),
    })
}

/// Points of the displacement interpolation at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationFrame {
    pub t: f64,
    pub points: Vec<Point>,
    pub source_site: Vec<usize>,
}

/// Samples `n` points from `μ` once and moves each along the straight line
/// to the site of the Laguerre cell that contains it.
pub fn interpolate(
    mesh: &Mesh,
    sites: &SiteSet,
    psi: &WeightVector,
    n: usize,
    times: &[f64],
    seed: u64,
) -> Result<Vec<InterpolationFrame>> {
    if psi.len() != sites.len() {
        return Err(Error::Validation(format!("{} weights for {} sites", psi.len(), sites.len())));
    }
    if let Some(t) = times.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::Validation(format!("interpolation time {t} outside [0, 1]")));
    }
    let samples = mesh.sample(n, seed);
    let owner: Vec<usize> = samples
        .iter()
        .map(|&x| power_argmin(x, sites.positions(), psi))
        .collect();
    Ok(times
        .iter()
        .map(|&t| InterpolationFrame {
            t,
            points: samples
                .iter()
                .zip(&owner)
                .map(|(&x, &j)| {
                    if t == 1.0 {
                        sites.position(j)
                    } else {
                        x.lerp(sites.position(j), t)
                    }
                })
                .collect(),
            source_site: owner.clone(),
        })
        .collect())
}
