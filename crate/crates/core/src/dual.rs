//! The semi-discrete Kantorovich dual for quadratic cost.
//!
//! `K(ψ) = Σ_j ∫_{Lag_j(ψ)} (‖x − y_j‖² − ψ_j) dμ(x) + Σ_j ν_j ψ_j`
//!
//! `K` is concave and maximized; its gradient is `ν − m(ψ)` and its Hessian
//! is negative semidefinite with off-diagonal entries
//! `∫_{Γ_ij} ρ ds / (2‖y_i − y_j‖)`.

use crate::domain::SiteSet;
use crate::geom::integrate_quadratic;
use crate::laguerre::LaguerreDiagram;

/// `∫_{Lag_j} ‖x − y_j‖² dμ(x)` for each site.
pub fn cost_integrals(diagram: &LaguerreDiagram) -> Vec<f64> {
    let mut cost = vec![0.0; diagram.site_count()];
    let sites = diagram.sites();
    for f in diagram.fragments() {
        cost[f.site] += integrate_quadratic(&f.polygon, sites[f.site], &f.density);
    }
    cost
}

/// `K(ψ)` at the weights the diagram was built with.
pub fn value(diagram: &LaguerreDiagram, sites: &SiteSet) -> f64 {
    let psi = diagram.psi();
    let cost = cost_integrals(diagram);
    (0..diagram.site_count())
        .map(|j| cost[j] - psi[j] * diagram.masses()[j] + sites.masses()[j] * psi[j])
        .sum()
}

/// `∇K = ν − m(ψ)`.
pub fn gradient(diagram: &LaguerreDiagram, sites: &SiteSet) -> Vec<f64> {
    sites
        .masses()
        .iter()
        .zip(diagram.masses())
        .map(|(nu, m)| nu - m)
        .collect()
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Symmetric sparse Hessian of `K`: nonnegative off-diagonal entries keyed
/// by site pair and a diagonal equal to minus the off-diagonal row sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHessian {
    n: usize,
    /// `(i, j, w)` with `i < j`, sorted by pair.
    entries: Vec<(usize, usize, f64)>,
    diag: Vec<f64>,
}

impl SparseHessian {
    /// Assembles from upper-triangle entries; the diagonal is derived.
    pub fn from_entries(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        for e in entries.iter_mut() {
            if e.0 > e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
            assert!(e.0 != e.1 && e.1 < n, "invalid Hessian entry {:?}", e);
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut diag = vec![0.0; n];
        for &(i, j, w) in &entries {
            diag[i] -= w;
            diag[j] -= w;
        }
        Self { n, entries, diag }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let key = (i.min(j), i.max(j));
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .map(|k| self.entries[k].2)
            .unwrap_or(0.0)
    }

    /// `H v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.diag.iter().zip(v).map(|(d, x)| d * x).collect();
        for &(i, j, w) in &self.entries {
            out[i] += w * v[j];
            out[j] += w * v[i];
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = self.diag[i];
        }
        for &(i, j, w) in &self.entries {
            m[i][j] = w;
            m[j][i] = w;
        }
        m
    }

    /// Connected components of the graph of positive off-diagonal entries.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(i, j, w) in &self.entries {
            if w > 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..self.n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().collect()
    }
}

/// Hessian of `K` from the diagram's interfaces.
pub fn hessian(diagram: &LaguerreDiagram) -> SparseHessian {
    let entries = diagram
        .interfaces()
        .iter()
        .map(|f| {
            let (i, j) = f.pair;
            (i, j, diagram.interface_weight(i, j))
        })
        .filter(|e| e.2 > 0.0)
        .collect();
    SparseHessian::from_entries(diagram.site_count(), entries)
}
