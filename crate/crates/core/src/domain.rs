//! The two measures: a triangle mesh with a piecewise-linear density (the
//! continuous source) and a set of weighted sites (the discrete target).

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geom::{integrate_affine, signed_area, Affine, BoundingBox, ConvexPolygon, Point};
use crate::numfmt;

/// Relative tolerance on `Σ ν_j = μ(Ω)`.
pub const BALANCE_TOL: f64 = 1e-9;

/// Coincidence threshold for sites, relative to their bounding-box diameter.
pub const COINCIDENT_TOL: f64 = 1e-12;

/// A triangulated planar domain carrying a nonnegative per-vertex density.
///
/// The density is interpolated linearly inside each triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    densities: Vec<f64>,
    triangles: Vec<[usize; 3]>,
    tri_density: Vec<Affine>,
    tri_mass: Vec<f64>,
    total_mass: f64,
    bbox: BoundingBox,
}

impl Mesh {
    /// Validates and assembles a mesh. Clockwise triangles are flipped.
    pub fn new(vertices: Vec<Point>, densities: Vec<f64>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.is_empty() || triangles.is_empty() {
            return Err(Error::Validation("mesh needs at least one vertex and one triangle".into()));
        }
        if densities.len() != vertices.len() {
            return Err(Error::Validation(format!(
                "{} densities for {} vertices",
                densities.len(),
                vertices.len()
            )));
        }
        for (i, p) in vertices.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::Validation(format!("vertex {i} has a non-finite coordinate")));
            }
        }
        for (i, &rho) in densities.iter().enumerate() {
            if !rho.is_finite() || rho < 0.0 {
                return Err(Error::Validation(format!("vertex {i} has invalid density {rho}")));
            }
        }
        let bbox = BoundingBox::of(&vertices).expect("nonempty");
        let min_area = 1e-14 * bbox.area().max(bbox.diameter() * bbox.diameter());
        for (t, tri) in triangles.iter_mut().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::Validation(format!(
                    "triangle {t} references vertex {bad} but there are {} vertices",
                    vertices.len()
                )));
            }
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a.abs() <= min_area {
                return Err(Error::Validation(format!("triangle {t} {:?} has zero area", tri)));
            }
            if a < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut tri_density = Vec::with_capacity(triangles.len());
        let mut tri_mass = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let pts = tri.map(|i| vertices[i]);
            let rho = Affine::interpolate(pts, tri.map(|i| densities[i]));
            tri_mass.push(integrate_affine(&ConvexPolygon::new(pts.to_vec()), &rho));
            tri_density.push(rho);
        }
        let total_mass: f64 = tri_mass.iter().sum();
        if total_mass.is_nan() || total_mass <= 0.0 {
            return Err(Error::Validation("mesh has zero total mass".into()));
        }
        Ok(Self {
            vertices,
            densities,
            triangles,
            tri_density,
            tri_mass,
            total_mass,
            bbox,
        })
    }

    /// A `res x res` grid of squares on `[0, 1]²`, each split along its
    /// lower-left to upper-right diagonal.
    pub fn square_grid(res: usize, density: DensitySpec) -> Result<Self> {
        if res == 0 {
            return Err(Error::Validation("grid resolution must be at least 1".into()));
        }
        let n = res + 1;
        let h = 1.0 / res as f64;
        let mut vertices = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                // exact endpoints, no accumulated rounding
                let x = if i == res { 1.0 } else { i as f64 * h };
                let y = if j == res { 1.0 } else { j as f64 * h };
                vertices.push(Point::new(x, y));
            }
        }
        let densities = vertices.iter().map(|&p| density.eval(p)).collect();
        let mut triangles = Vec::with_capacity(2 * res * res);
        for j in 0..res {
            for i in 0..res {
                let v00 = j * n + i;
                let (v10, v01, v11) = (v00 + 1, v00 + n, v00 + n + 1);
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        Self::new(vertices, densities, triangles)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Corner points of triangle `t`, counter-clockwise.
    pub fn triangle(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn triangle_polygon(&self, t: usize) -> ConvexPolygon {
        ConvexPolygon::new(self.triangle(t).to_vec())
    }

    /// The affine density on triangle `t`.
    pub fn triangle_density(&self, t: usize) -> Affine {
        self.tri_density[t]
    }

    pub fn triangle_mass(&self, t: usize) -> f64 {
        self.tri_mass[t]
    }

    pub fn triangle_masses(&self) -> &[f64] {
        &self.tri_mass
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        signed_area(a, b, c)
    }

    /// `μ(Ω)`, the integral of the density over the mesh.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    /// Index of a triangle containing `p` (within `tol`), by linear scan.
    pub fn locate(&self, p: Point, tol: f64) -> Option<usize> {
        (0..self.triangles.len()).find(|&t| self.triangle_polygon(t).contains(p, tol))
    }

    /// Draws `n` i.i.d. points distributed according to the density: a
    /// triangle by mass, then a point by rejection against the triangle's
    /// largest vertex density. Deterministic for a given seed.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Point> {
        if n == 0 {
            return Vec::new();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picker = WeightedIndex::new(&self.tri_mass).expect("positive total mass");
        let rho_max: Vec<f64> = self
            .triangles
            .iter()
            .map(|tri| tri.iter().map(|&i| self.densities[i]).fold(0.0, f64::max))
            .collect();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let t = picker.sample(&mut rng);
            let [a, b, c] = self.triangle(t);
            // rejection stays inside the chosen triangle so that triangle
            // frequencies remain proportional to triangle masses
            loop {
                let (mut r1, mut r2): (f64, f64) = (rng.random(), rng.random());
                if r1 + r2 > 1.0 {
                    r1 = 1.0 - r1;
                    r2 = 1.0 - r2;
                }
                let p = a + r1 * (b - a) + r2 * (c - a);
                let u: f64 = rng.random();
                if u * rho_max[t] <= self.tri_density[t].eval(p) {
                    out.push(p);
                    break;
                }
            }
        }
        out
    }

    /// Reads a `.dmesh` file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses `.dmesh` text; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse {
            path: origin.to_string(),
            line,
            msg,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hl, header) = lines.next().ok_or_else(|| perr(1, "missing `nv nt` header".into()))?;
        let counts = parse_fields::<usize>(header, 2).map_err(|m| perr(hl, m))?;
        let (nv, nt) = (counts[0], counts[1]);

        let mut vertices = Vec::with_capacity(nv);
        let mut densities = Vec::with_capacity(nv);
        for k in 0..nv {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| perr(hl, format!("expected {nv} vertex lines, found {k}")))?;
            let f = parse_fields::<f64>(l, 3).map_err(|m| perr(ln, m))?;
            vertices.push(Point::new(f[0], f[1]));
            densities.push(f[2]);
        }
        let mut triangles = Vec::with_capacity(nt);
        for k in 0..nt {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| perr(hl, format!("expected {nt} triangle lines, found {k}")))?;
            let f = parse_fields::<usize>(l, 3).map_err(|m| perr(ln, m))?;
            triangles.push([f[0], f[1], f[2]]);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(perr(ln, "unexpected trailing content".into()));
        }
        Self::new(vertices, densities, triangles)
    }

    /// Serializes to `.dmesh` text with 17 significant digits.
    pub fn to_dmesh(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {}", self.vertices.len(), self.triangles.len()).unwrap();
        for (p, rho) in self.vertices.iter().zip(&self.densities) {
            writeln!(s, "{} {} {}", numfmt::real(p.x), numfmt::real(p.y), numfmt::real(*rho)).unwrap();
        }
        for t in &self.triangles {
            writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        s
    }
}

fn parse_fields<T: FromStr>(line: &str, expected: usize) -> std::result::Result<Vec<T>, String> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != expected {
        return Err(format!("expected {expected} fields, found {}", tokens.len()));
    }
    tokens
        .iter()
        .map(|t| t.parse::<T>().map_err(|_| format!("cannot parse `{t}`")))
        .collect()
}

/// Density choices for generated meshes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensitySpec {
    Const(f64),
    LinearX,
    LinearY,
}

impl DensitySpec {
    pub fn eval(&self, p: Point) -> f64 {
        match *self {
            DensitySpec::Const(c) => c,
            DensitySpec::LinearX => p.x,
            DensitySpec::LinearY => p.y,
        }
    }
}

impl FromStr for DensitySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear-x" => Ok(DensitySpec::LinearX),
            "linear-y" => Ok(DensitySpec::LinearY),
            _ => {
                let c = s
                    .strip_prefix("const:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|c| c.is_finite() && *c > 0.0)
                    .ok_or_else(|| {
                        Error::Validation(format!(
                            "unknown density `{s}` (expected const:<c> with c > 0, linear-x or linear-y)"
                        ))
                    })?;
                Ok(DensitySpec::Const(c))
            }
        }
    }
}

/// Dirac locations `y_j` with masses `ν_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet {
    positions: Vec<Point>,
    masses: Vec<f64>,
}

#[derive(Deserialize)]
struct SiteRecord {
    x: f64,
    y: f64,
    nu: f64,
}

impl SiteSet {
    /// Validates positivity of masses and pairwise distinctness.
    pub fn new(positions: Vec<Point>, masses: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Validation("site set is empty".into()));
        }
        if positions.len() != masses.len() {
            return Err(Error::Validation(format!(
                "{} masses for {} sites",
                masses.len(),
                positions.len()
            )));
        }
        for (j, (p, &m)) in positions.iter().zip(&masses).enumerate() {
            if !p.is_finite() {
                return Err(Error::Validation(format!("site {j} has a non-finite coordinate")));
            }
            if !m.is_finite() || m <= 0.0 {
                return Err(Error::Validation(format!("site {j} has non-positive mass {m}")));
            }
        }
        if let Some((i, j)) = find_coincident(&positions) {
            return Err(Error::CoincidentSites(i, j));
        }
        Ok(Self { positions, masses })
    }

    /// Like [`SiteSet::new`], then either rescales masses to `mesh_mass`
    /// (`normalize`) or checks the balance to [`BALANCE_TOL`].
    pub fn balanced(positions: Vec<Point>, masses: Vec<f64>, mesh_mass: f64, normalize: bool) -> Result<Self> {
        let mut s = Self::new(positions, masses)?;
        let total = s.total_mass();
        if normalize {
            let scale = mesh_mass / total;
            s.masses.iter_mut().for_each(|m| *m *= scale);
        } else if (total - mesh_mass).abs() > BALANCE_TOL * mesh_mass {
            return Err(Error::Imbalance {
                sites_total: total,
                mesh_mass,
            });
        }
        Ok(s)
    }

    /// Sites with equal masses summing to `total`.
    pub fn uniform(positions: Vec<Point>, total: f64) -> Result<Self> {
        let n = positions.len().max(1);
        Self::new(positions, vec![total / n as f64; n])
    }

    /// Reads a sites CSV (`x,y,nu`).
    pub fn load(path: impl AsRef<Path>, mesh_mass: f64, normalize: bool) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text, &path.display().to_string(), mesh_mass, normalize)
    }

    pub fn parse_csv(text: &str, origin: &str, mesh_mass: f64, normalize: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| csv_error(origin, e))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "y", "nu"] {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: 1,
                msg: format!("expected header `x,y,nu`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut positions = Vec::new();
        let mut masses = Vec::new();
        for rec in rdr.deserialize::<SiteRecord>() {
            let rec = rec.map_err(|e| csv_error(origin, e))?;
            positions.push(Point::new(rec.x, rec.y));
            masses.push(rec.nu);
        }
        Self::balanced(positions, masses, mesh_mass, normalize)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,nu\n");
        for (p, m) in self.positions.iter().zip(&self.masses) {
            writeln!(s, "{},{},{}", numfmt::real(p.x), numfmt::real(p.y), numfmt::real(*m)).unwrap();
        }
        s
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, j: usize) -> Point {
        self.positions[j]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Reorders the sites: new site `k` is old site `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            positions: perm.iter().map(|&k| self.positions[k]).collect(),
            masses: perm.iter().map(|&k| self.masses[k]).collect(),
        }
    }
}

fn csv_error(origin: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        path: origin.to_string(),
        line,
        msg: e.to_string(),
    }
}

fn find_coincident(positions: &[Point]) -> Option<(usize, usize)> {
    let diam = BoundingBox::of(positions)?.diameter();
    let tol = COINCIDENT_TOL * diam;
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&a, &b| positions[a].x.total_cmp(&positions[b].x));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if positions[j].x - positions[i].x > tol {
                break;
            }
            if positions[i].dist(positions[j]) <= tol {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}
