#![allow(dead_code)]

pub mod lp;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdot::geom::{integrate_affine, ConvexPolygon};
use sdot::{DensitySpec, Mesh, Point, SiteSet, WeightVector};

pub fn unit_square() -> Mesh {
    Mesh::square_grid(1, DensitySpec::Const(1.0)).unwrap()
}

/// Sites (0.25, 0.5) and (0.75, 0.5) with masses (0.75, 0.25): optimal
/// split at x = 0.75, ψ = (0.25, 0).
pub fn analytic_pair() -> SiteSet {
    SiteSet::new(vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)], vec![0.75, 0.25]).unwrap()
}

pub fn random_points(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new(rng.random_range(lo..hi), rng.random_range(lo..hi)))
        .collect()
}

/// A random instance on the unit square: `n` sites in `[0.05, 0.95]²`
/// with uniform masses, on a grid mesh with a density picked by `seed`.
pub fn random_instance(n: usize, seed: u64) -> (Mesh, SiteSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let density = match seed % 3 {
        0 => DensitySpec::Const(1.0),
        1 => DensitySpec::LinearX,
        _ => DensitySpec::LinearY,
    };
    let res = 2 + (seed % 3) as usize;
    let mesh = Mesh::square_grid(res, density).unwrap();
    let pts = random_points(n, 0.05, 0.95, &mut rng);
    let sites = SiteSet::uniform(pts, mesh.total_mass()).unwrap();
    (mesh, sites)
}

pub fn random_weights(n: usize, scale: f64, seed: u64) -> WeightVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    WeightVector((0..n).map(|_| rng.random_range(-scale..scale)).collect())
}

/// Splits every mesh triangle into `k²` congruent sub-triangles and places
/// each sub-triangle's exact mass at its centroid.
pub fn discretize(mesh: &Mesh, k: usize) -> Vec<(Point, f64)> {
    let mut out = Vec::with_capacity(mesh.triangle_count() * k * k);
    for t in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle(t);
        let rho = mesh.triangle_density(t);
        let at = |i: usize, j: usize| a + (i as f64 / k as f64) * (b - a) + (j as f64 / k as f64) * (c - a);
        let mut push = |p: [Point; 3]| {
            let poly = ConvexPolygon::new(p.to_vec());
            let centroid = Point::new((p[0].x + p[1].x + p[2].x) / 3.0, (p[0].y + p[1].y + p[2].y) / 3.0);
            out.push((centroid, integrate_affine(&poly, &rho)));
        };
        for i in 0..k {
            for j in 0..k - i {
                push([at(i, j), at(i + 1, j), at(i, j + 1)]);
                if i + j + 2 <= k {
                    push([at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
