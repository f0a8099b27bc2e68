//! Laguerre (power) diagrams restricted to a triangle mesh.
//!
//! Cell `j` is `{x : ‖x − y_j‖² − ψ_j ≤ ‖x − y_k‖² − ψ_k for all k}`. Each
//! mesh triangle is intersected with every cell that reaches it by clipping
//! the triangle against the power bisectors of the cell's site. Within a
//! triangle the cells are discovered by a walk over cell adjacency, starting
//! from the cell containing the triangle centroid, and competitors are
//! visited nearest-first until a security radius proves that no further site
//! can cut the fragment.

use std::collections::BTreeMap;
use std::ops::{Deref, DerefMut};

use rayon::prelude::*;

use crate::domain::{Mesh, SiteSet};
use crate::error::{Error, Result};
use crate::geom::{integrate_affine, integrate_affine_segment, Affine, ConvexPolygon, EdgeTag, HalfPlane, Point, UNTAGGED};

/// Vertex merge / on-line tolerance relative to the mesh bounding-box diameter.
pub const MERGE_TOL: f64 = 1e-12;

/// Fragments smaller than this fraction of the mesh bounding-box area are dropped.
pub const MIN_FRAGMENT_AREA: f64 = 1e-14;

// Length of the precomputed nearest-neighbour list per site.
const NEAREST_PREFIX: usize = 48;

/// Kantorovich potentials, one per site.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// `ψ + c·1`
    pub fn shifted(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| v + c).collect())
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for WeightVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for WeightVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Half-plane of points at least as close (in power distance) to `y_i`
/// as to `y_j`:
/// `2(y_j − y_i)·x ≤ ‖y_j‖² − ‖y_i‖² − ψ_j + ψ_i`.
pub fn bisector(y_i: Point, psi_i: f64, y_j: Point, psi_j: f64) -> Result<HalfPlane> {
    let n = y_j - y_i;
    if n.x == 0.0 && n.y == 0.0 {
        return Err(Error::Validation(format!(
            "coincident sites at ({}, {})",
            y_i.x, y_i.y
        )));
    }
    // ‖y_j‖² − ‖y_i‖² = (y_j − y_i)·(y_j + y_i), better conditioned than the difference
    let c = n.dot(y_j + y_i) - psi_j + psi_i;
    Ok(HalfPlane::new(2.0 * n.x, 2.0 * n.y, c))
}

/// `‖x − y‖² − ψ`
#[inline]
pub fn power_distance(x: Point, y: Point, psi: f64) -> f64 {
    x.dist2(y) - psi
}

/// Index of the site with the smallest power distance to `x` (lowest index on ties).
pub fn power_argmin(x: Point, sites: &[Point], psi: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, (&y, &w)) in sites.iter().zip(psi).enumerate() {
        let d = power_distance(x, y, w);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

/// `Lag_j ∩ T` for one site and one mesh triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFragment {
    pub site: usize,
    pub triangle: usize,
    /// Edge tags hold the competing site index for bisector edges and
    /// [`UNTAGGED`] for pieces of the triangle boundary.
    pub polygon: ConvexPolygon,
    pub density: Affine,
}

/// A piece of an interface, with the density of the triangle it lies in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
    pub density: Affine,
}

/// The common boundary `Lag_i ∩ Lag_j` of two cells, `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interface {
    pub pair: (usize, usize),
    pub segments: Vec<Segment>,
}

impl Interface {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.a.dist(s.b)).sum()
    }

    /// `∫_{Γ_ij} ρ ds`
    pub fn density_integral(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| integrate_affine_segment(s.a, s.b, &s.density))
            .sum()
    }
}

/// A Laguerre diagram restricted to a mesh.
#[derive(Debug, Clone)]
pub struct LaguerreDiagram {
    fragments: Vec<CellFragment>,
    interfaces: Vec<Interface>,
    masses: Vec<f64>,
    sites: Vec<Point>,
    psi: WeightVector,
    mesh_mass: f64,
    triangle_count: usize,
}

impl LaguerreDiagram {
    /// Fragments ordered by triangle, then site.
    pub fn fragments(&self) -> &[CellFragment] {
        &self.fragments
    }

    /// Interfaces ordered by site pair.
    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    /// `∫_{Lag_j} dμ` for every site.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn psi(&self) -> &WeightVector {
        &self.psi
    }

    /// `μ(Ω)` of the mesh the diagram was built on.
    pub fn mesh_mass(&self) -> f64 {
        self.mesh_mass
    }

    pub fn triangle_count(&self) -> usize {
        self.triangle_count
    }

    pub fn interface(&self, i: usize, j: usize) -> Option<&Interface> {
        let key = (i.min(j), i.max(j));
        self.interfaces
            .binary_search_by(|f| f.pair.cmp(&key))
            .ok()
            .map(|k| &self.interfaces[k])
    }

    /// `∫_{Γ_ij} ρ ds / (2‖y_i − y_j‖)`, zero for non-adjacent cells.
    pub fn interface_weight(&self, i: usize, j: usize) -> f64 {
        assert_ne!(i, j, "interface weight needs two distinct sites");
        match self.interface(i, j) {
            Some(f) => f.density_integral() / (2.0 * self.sites[i].dist(self.sites[j])),
            None => 0.0,
        }
    }

    /// Fragments belonging to site `j`.
    pub fn cell(&self, j: usize) -> impl Iterator<Item = &CellFragment> {
        self.fragments.iter().filter(move |f| f.site == j)
    }

    /// Sum of fragment areas per triangle.
    pub fn triangle_coverage(&self) -> Vec<f64> {
        let mut cov = vec![0.0; self.triangle_count];
        for f in &self.fragments {
            cov[f.triangle] += f.polygon.area();
        }
        cov
    }

    /// Sites whose cells carry no fragment at all.
    pub fn empty_cells(&self) -> Vec<usize> {
        let mut seen = vec![false; self.sites.len()];
        for f in &self.fragments {
            seen[f.site] = true;
        }
        (0..self.sites.len()).filter(|&j| !seen[j] || self.masses[j] <= 0.0).collect()
    }

    /// Site owning the point `p`, by fragment membership (within `tol`).
    pub fn owner(&self, p: Point, tol: f64) -> Option<usize> {
        self.fragments
            .iter()
            .find(|f| f.polygon.contains(p, tol))
            .map(|f| f.site)
    }
}

/// Reusable diagram constructor for a fixed mesh and site set.
///
/// Holds per-site neighbour orderings so that repeated builds with different
/// weights (as in a Newton loop) do not redo them.
pub struct DiagramBuilder<'a> {
    mesh: &'a Mesh,
    sites: &'a SiteSet,
    nearest: Vec<Vec<u32>>,
    tol: f64,
    min_area: f64,
}

struct TriangleCells {
    fragments: Vec<(usize, ConvexPolygon)>,
}

impl<'a> DiagramBuilder<'a> {
    pub fn new(mesh: &'a Mesh, sites: &'a SiteSet) -> Self {
        let pos = sites.positions();
        let k = NEAREST_PREFIX.min(pos.len().saturating_sub(1));
        let nearest = (0..pos.len())
            .into_par_iter()
            .map(|j| {
                let mut order = neighbour_order(pos, j);
                if order.len() > k {
                    order.select_nth_unstable_by(k, |&a, &b| neighbour_key(pos, j, a).total_cmp(&neighbour_key(pos, j, b)).then(a.cmp(&b)));
                    order.truncate(k);
                }
                order.sort_by(|&a, &b| neighbour_key(pos, j, a).total_cmp(&neighbour_key(pos, j, b)).then(a.cmp(&b)));
                order
            })
            .collect();
        let bbox = mesh.bbox();
        Self {
            mesh,
            sites,
            nearest,
            tol: MERGE_TOL * bbox.diameter(),
            min_area: MIN_FRAGMENT_AREA * bbox.area().max(bbox.diameter() * bbox.diameter()),
        }
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn sites(&self) -> &SiteSet {
        self.sites
    }

    /// Builds the diagram for weights `psi`.
    pub fn build(&self, psi: &WeightVector) -> Result<LaguerreDiagram> {
        let n = self.sites.len();
        if psi.len() != n {
            return Err(Error::Validation(format!("{} weights for {} sites", psi.len(), n)));
        }
        if let Some(j) = psi.iter().position(|w| !w.is_finite()) {
            return Err(Error::Validation(format!("weight {j} is not finite")));
        }
        let psi_max = psi.max();
        let per_triangle: Vec<TriangleCells> = (0..self.mesh.triangle_count())
            .into_par_iter()
            .map(|t| self.triangle_cells(t, psi, psi_max))
            .collect();

        // merge in triangle order so the result does not depend on scheduling
        let mut fragments = Vec::new();
        let mut masses = vec![0.0; n];
        let mut interfaces: BTreeMap<(usize, usize), Vec<Segment>> = BTreeMap::new();
        for (t, cells) in per_triangle.into_iter().enumerate() {
            let density = self.mesh.triangle_density(t);
            for (site, polygon) in cells.fragments {
                masses[site] += integrate_affine(&polygon, &density);
                for (a, b, tag) in polygon.edges() {
                    if tag != UNTAGGED && (tag as usize) > site {
                        interfaces
                            .entry((site, tag as usize))
                            .or_default()
                            .push(Segment { a, b, density });
                    }
                }
                fragments.push(CellFragment {
                    site,
                    triangle: t,
                    polygon,
                    density,
                });
            }
        }
        Ok(LaguerreDiagram {
            fragments,
            interfaces: interfaces
                .into_iter()
                .map(|(pair, segments)| Interface { pair, segments })
                .collect(),
            masses,
            sites: self.sites.positions().to_vec(),
            psi: psi.clone(),
            mesh_mass: self.mesh.total_mass(),
            triangle_count: self.mesh.triangle_count(),
        })
    }

    fn triangle_cells(&self, t: usize, psi: &[f64], psi_max: f64) -> TriangleCells {
        let n = self.sites.len();
        let pos = self.sites.positions();
        let tri = self.mesh.triangle_polygon(t);
        let [a, b, c] = self.mesh.triangle(t);
        let centroid = Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);

        let mut visited = vec![false; n];
        let seed = power_argmin(centroid, pos, psi);
        let mut queue = vec![seed];
        visited[seed] = true;
        let mut fragments = Vec::new();
        let mut covered = 0.0;
        while let Some(j) = queue.pop() {
            let poly = self.clip_cell(&tri, j, psi, psi_max);
            for &tag in poly.tags() {
                if tag != UNTAGGED && !visited[tag as usize] {
                    visited[tag as usize] = true;
                    queue.push(tag as usize);
                }
            }
            let area = poly.area();
            if area > self.min_area {
                covered += area;
                fragments.push((j, poly));
            }
        }

        // Adjacency walk missed area (degenerate contacts); fall back to all sites.
        let tri_area = tri.area();
        if (tri_area - covered).abs() > 1e-11 * tri_area {
            for j in (0..n).filter(|&j| !visited[j]) {
                let poly = self.clip_cell(&tri, j, psi, psi_max);
                if poly.area() > self.min_area {
                    fragments.push((j, poly));
                }
            }
        }
        fragments.sort_by_key(|f| f.0);
        TriangleCells { fragments }
    }

    /// Clips `tri` to the cell of site `j`.
    fn clip_cell(&self, tri: &ConvexPolygon, j: usize, psi: &[f64], psi_max: f64) -> ConvexPolygon {
        let pos = self.sites.positions();
        let yj = pos[j];
        let mut poly = tri.clone();
        let prefix = &self.nearest[j];
        let mut full: Option<Vec<u32>> = None;
        let mut idx = 0;
        loop {
            let k = if idx < prefix.len() {
                prefix[idx] as usize
            } else {
                if prefix.len() + 1 >= pos.len() {
                    break;
                }
                let order = full.get_or_insert_with(|| {
                    let mut o = neighbour_order(pos, j);
                    o.sort_by(|&a, &b| neighbour_key(pos, j, a).total_cmp(&neighbour_key(pos, j, b)).then(a.cmp(&b)));
                    o
                });
                match order.get(idx) {
                    Some(&k) => k as usize,
                    None => break,
                }
            };
            idx += 1;

            // No point of `poly` can be closer to y_k than to y_j in power
            // distance once ‖y_k − y_j‖ ≥ R + sqrt(R² + ψ_max − ψ_j).
            let r2 = poly.vertices().iter().map(|v| v.dist2(yj)).fold(0.0, f64::max);
            let r = r2.sqrt();
            let reach = r + (r2 + psi_max - psi[j]).max(0.0).sqrt();
            if yj.dist(pos[k]) > reach * (1.0 + 1e-12) {
                break;
            }
            let h = bisector(yj, psi[j], pos[k], psi[k]).expect("sites are distinct");
            poly = poly.clip_tagged(&h, k as EdgeTag, self.tol);
            if poly.is_empty() {
                break;
            }
        }
        poly
    }
}

fn neighbour_order(pos: &[Point], j: usize) -> Vec<u32> {
    (0..pos.len() as u32).filter(|&k| k as usize != j).collect()
}

fn neighbour_key(pos: &[Point], j: usize, k: u32) -> f64 {
    pos[j].dist2(pos[k as usize])
}

/// One-shot diagram construction.
pub fn build(mesh: &Mesh, sites: &SiteSet, psi: &WeightVector) -> Result<LaguerreDiagram> {
    DiagramBuilder::new(mesh, sites).build(psi)
}
