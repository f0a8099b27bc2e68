//! Planar geometry kernel: points, half-planes, convex polygon clipping and
//! exact integration of low-degree polynomials over convex polygons.
//!
//! Every predicate is plain `f64` with an explicit tolerance. Polygons carry
//! one [`EdgeTag`] per edge so that callers can tell which clipping plane
//! produced a given edge; the Laguerre builder uses this to recover cell
//! interfaces.

use std::ops::{Add, Mul, Sub};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist2(self, other: Point) -> f64 {
        (self - other).norm2()
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// `(1 - t) * self + t * other`
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            (1.0 - t) * self.x + t * other.x,
            (1.0 - t) * self.y + t * other.y,
        )
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, p: Point) -> Point {
        Point::new(self * p.x, self * p.y)
    }
}

/// The closed half-plane `{ (x, y) : a*x + b*y <= c }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HalfPlane {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        debug_assert!(a != 0.0 || b != 0.0, "degenerate half-plane normal");
        Self { a, b, c }
    }

    /// `a*x + b*y - c`: nonpositive inside.
    pub fn eval(&self, p: Point) -> f64 {
        self.a * p.x + self.b * p.y - self.c
    }

    /// Signed Euclidean distance to the boundary line, negative inside.
    pub fn signed_distance(&self, p: Point) -> f64 {
        self.eval(p) / self.a.hypot(self.b)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.eval(p) <= 0.0
    }

    /// The opposite closed half-plane; both share the boundary line.
    pub fn complement(&self) -> HalfPlane {
        HalfPlane::new(-self.a, -self.b, -self.c)
    }
}

/// An affine function `a*x + b*y + c`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Affine {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub const fn constant(c: f64) -> Self {
        Self { a: 0.0, b: 0.0, c }
    }

    /// The affine interpolant of `values` at the triangle `p`.
    ///
    /// The triangle must be nondegenerate.
    pub fn interpolate(p: [Point; 3], values: [f64; 3]) -> Self {
        let e1 = p[1] - p[0];
        let e2 = p[2] - p[0];
        let det = e1.cross(e2);
        let d1 = values[1] - values[0];
        let d2 = values[2] - values[0];
        let a = (d1 * e2.y - d2 * e1.y) / det;
        let b = (e1.x * d2 - e2.x * d1) / det;
        let c = values[0] - a * p[0].x - b * p[0].y;
        Self { a, b, c }
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.a * p.x + self.b * p.y + self.c
    }
}

/// Tag carried by a polygon edge: which clip plane created it.
pub type EdgeTag = u32;

/// Tag for edges that were not produced by a tagged clip.
pub const UNTAGGED: EdgeTag = EdgeTag::MAX;

/// A convex polygon with counter-clockwise vertices.
///
/// `tags[i]` labels the edge from `vertices[i]` to `vertices[i + 1]`
/// (wrapping around).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
    tags: Vec<EdgeTag>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    In,
    On,
    Out,
}

impl ConvexPolygon {
    /// Builds a polygon from CCW vertices with untagged edges.
    pub fn new(vertices: Vec<Point>) -> Self {
        let tags = vec![UNTAGGED; vertices.len()];
        Self { vertices, tags }
    }

    pub fn with_tags(vertices: Vec<Point>, tags: Vec<EdgeTag>) -> Self {
        assert_eq!(vertices.len(), tags.len());
        Self { vertices, tags }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn tags(&self) -> &[EdgeTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    /// True when the polygon has fewer than three vertices.
    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Iterates over `(start, end, tag)` for every edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point, EdgeTag)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n], self.tags[i]))
    }

    /// Shoelace area; zero for fewer than three vertices.
    pub fn area(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let p0 = self.vertices[0];
        let mut twice = 0.0;
        for w in self.vertices[1..].windows(2) {
            twice += (w[0] - p0).cross(w[1] - p0);
        }
        (0.5 * twice).max(0.0)
    }

    /// Whether `p` lies in the polygon, allowing `tol` outside each edge.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        self.edges().all(|(a, b, _)| {
            let e = b - a;
            let len = e.norm();
            len == 0.0 || e.cross(p - a) / len >= -tol
        })
    }

    /// `self ∩ h`, with edges on the boundary of `h` carrying `tag`.
    ///
    /// Vertices within `tol` of the boundary line are treated as lying on it,
    /// and consecutive output vertices closer than `tol` are merged.
    pub fn clip_tagged(&self, h: &HalfPlane, tag: EdgeTag, tol: f64) -> ConvexPolygon {
        let n = self.vertices.len();
        if n < 3 {
            return ConvexPolygon::empty();
        }
        let inv = 1.0 / h.a.hypot(h.b);
        let dist: Vec<f64> = self.vertices.iter().map(|&p| h.eval(p) * inv).collect();
        let side = |d: f64| {
            if d > tol {
                Side::Out
            } else if d < -tol {
                Side::In
            } else {
                Side::On
            }
        };
        if dist.iter().all(|&d| side(d) == Side::In) {
            return self.clone();
        }

        let mut out_v = Vec::with_capacity(n + 1);
        let mut out_t = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            let (cur, nxt) = (self.vertices[i], self.vertices[j]);
            let (sc, sn) = (side(dist[i]), side(dist[j]));
            let edge_tag = self.tags[i];
            match sc {
                Side::In | Side::On => {
                    let t = match (sc, sn) {
                        (Side::On, Side::On) | (Side::On, Side::Out) => tag,
                        _ => edge_tag,
                    };
                    out_v.push(cur);
                    out_t.push(t);
                    if sc == Side::In && sn == Side::Out {
                        out_v.push(intersect(cur, nxt, dist[i], dist[j]));
                        out_t.push(tag);
                    }
                }
                Side::Out => {
                    if sn == Side::In {
                        out_v.push(intersect(cur, nxt, dist[i], dist[j]));
                        out_t.push(edge_tag);
                    }
                }
            }
        }
        merge_close(&mut out_v, &mut out_t, tol);
        if out_v.len() < 3 {
            return ConvexPolygon::empty();
        }
        ConvexPolygon {
            vertices: out_v,
            tags: out_t,
        }
    }

    /// `self ∩ h` with exact-duplicate merging only.
    pub fn clip(&self, h: &HalfPlane) -> ConvexPolygon {
        self.clip_tagged(h, UNTAGGED, 0.0)
    }

    /// Fan triangles `(v0, vi, vi+1)`.
    pub fn fan(&self) -> impl Iterator<Item = [Point; 3]> + '_ {
        let n = if self.is_empty() { 0 } else { self.vertices.len() };
        (1..n.saturating_sub(1)).map(move |i| [self.vertices[0], self.vertices[i], self.vertices[i + 1]])
    }
}

fn intersect(a: Point, b: Point, da: f64, db: f64) -> Point {
    let t = da / (da - db);
    a.lerp(b, t)
}

fn merge_close(v: &mut Vec<Point>, t: &mut Vec<EdgeTag>, tol: f64) {
    if v.is_empty() {
        return;
    }
    let tol2 = tol * tol;
    let mut mv: Vec<Point> = Vec::with_capacity(v.len());
    let mut mt: Vec<EdgeTag> = Vec::with_capacity(v.len());
    for (&p, &tag) in v.iter().zip(t.iter()) {
        match mv.last() {
            Some(&last) if last.dist2(p) <= tol2 => {
                // the short edge last->p vanishes; last inherits p's outgoing edge
                *mt.last_mut().unwrap() = tag;
            }
            _ => {
                mv.push(p);
                mt.push(tag);
            }
        }
    }
    while mv.len() > 1 && mv[mv.len() - 1].dist2(mv[0]) <= tol2 {
        mv.pop();
        mt.pop();
    }
    *v = mv;
    *t = mt;
}

/// Signed area of the triangle `(a, b, c)`, positive when CCW.
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// Exact integral of an affine function over a convex polygon.
pub fn integrate_affine(poly: &ConvexPolygon, f: &Affine) -> f64 {
    poly.fan()
        .map(|[a, b, c]| signed_area(a, b, c) * (f.eval(a) + f.eval(b) + f.eval(c)) / 3.0)
        .sum()
}

/// Exact line integral of an affine function along the segment `a -> b`.
pub fn integrate_affine_segment(a: Point, b: Point, f: &Affine) -> f64 {
    let len = a.dist(b);
    if len == 0.0 {
        return 0.0;
    }
    len * 0.5 * (f.eval(a) + f.eval(b))
}

// Degree-3 rule on a triangle (barycentric points, weights sum to 1).
const CUBIC_RULE: [([f64; 3], f64); 4] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], -27.0 / 48.0),
    ([0.6, 0.2, 0.2], 25.0 / 48.0),
    ([0.2, 0.6, 0.2], 25.0 / 48.0),
    ([0.2, 0.2, 0.6], 25.0 / 48.0),
];

/// Integrates `f` over the triangle, exactly for polynomials of total
/// degree at most 3.
pub fn integrate_cubic_triangle<F: Fn(Point) -> f64>(tri: [Point; 3], f: &F) -> f64 {
    let area = signed_area(tri[0], tri[1], tri[2]);
    let mut acc = 0.0;
    for (l, w) in CUBIC_RULE {
        let p = Point::new(
            l[0] * tri[0].x + l[1] * tri[1].x + l[2] * tri[2].x,
            l[0] * tri[0].y + l[1] * tri[1].y + l[2] * tri[2].y,
        );
        acc += w * f(p);
    }
    area * acc
}

/// Integrates `f` over a convex polygon, exactly for polynomials of total
/// degree at most 3.
pub fn integrate_cubic<F: Fn(Point) -> f64>(poly: &ConvexPolygon, f: F) -> f64 {
    poly.fan().map(|t| integrate_cubic_triangle(t, &f)).sum()
}

/// `∫_poly ‖x − center‖² · density(x) dx`, exact for affine density.
pub fn integrate_quadratic(poly: &ConvexPolygon, center: Point, density: &Affine) -> f64 {
    // Shift to the center so the quadratic factor stays well conditioned.
    integrate_cubic(poly, |p| (p - center).norm2() * density.eval(p))
}

/// First moments `(∫ x ρ, ∫ y ρ)` over the polygon.
pub fn first_moments(poly: &ConvexPolygon, density: &Affine) -> Point {
    Point::new(
        integrate_cubic(poly, |p| p.x * density.eval(p)),
        integrate_cubic(poly, |p| p.y * density.eval(p)),
    )
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn of(points: &[Point]) -> Option<Self> {
        let first = *points.first()?;
        let mut bb = BoundingBox {
            min: first,
            max: first,
        };
        for p in &points[1..] {
            bb.min.x = bb.min.x.min(p.x);
            bb.min.y = bb.min.y.min(p.y);
            bb.max.x = bb.max.x.max(p.x);
            bb.max.y = bb.max.y.max(p.y);
        }
        Some(bb)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}
