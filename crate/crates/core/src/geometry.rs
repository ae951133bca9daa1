//! Polygon and triangle primitives in normalized patch coordinates.
//!
//! Every patch has its own coordinate frame with both axes spanning [-1, 1]:
//! x grows with the pixel column, y with the pixel row. Polygons are allowed
//! to be degenerate (repeated vertices, zero area, self-intersections); no
//! operation here may panic or return a non-finite value for them.

use rand::Rng;

use crate::error::{Error, Result};

/// A polygon vertex in normalized patch coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
}

impl Vertex {
    pub fn new(x: f64, y: f64) -> Self {
        Vertex { x, y }
    }

    fn sub(self, o: Vertex) -> (f64, f64) {
        (self.x - o.x, self.y - o.y)
    }
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

/// A closed polygon with at least three vertices, listed in order.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchPolygon {
    vertices: Vec<Vertex>,
}

impl PatchPolygon {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::invalid(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        Ok(PatchPolygon { vertices })
    }

    /// Regular k-gon of the given radius, centered at the origin, vertices at
    /// angles (2v+1)·pi/k.
    pub fn regular(k: usize, radius: f64) -> Result<Self> {
        let vertices = (0..k)
            .map(|v| {
                let angle = (2 * v + 1) as f64 * std::f64::consts::PI / k as f64;
                Vertex::new(radius * angle.cos(), radius * angle.sin())
            })
            .collect();
        PatchPolygon::new(vertices)
    }

    pub fn k(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Side `i` runs from vertex `i` to vertex `(i + 1) % k`.
    pub fn side(&self, i: usize) -> (Vertex, Vertex) {
        (self.vertices[i], self.vertices[(i + 1) % self.vertices.len()])
    }
}

/// Fixed triangulation of a k-gon as vertex-index triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    k: usize,
    triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }
}

/// Fan triangulation {(0, i, i+1)} of a k-gon. All vertices of a regular
/// polygon are cocircular, so any triangulation of it is Delaunay-valid; the
/// fan is the deterministic, index-stable pick.
pub fn regular_polygon_triangulation(k: usize) -> Result<Triangulation> {
    if k < 3 {
        return Err(Error::invalid(format!("triangulation needs k >= 3, got {k}")));
    }
    let triangles = (1..k - 1).map(|i| [0, i, i + 1]).collect();
    Ok(Triangulation { k, triangles })
}

/// Euclidean distance from `p` to the closed segment `[a, b]`. A zero-length
/// segment degenerates to the distance to the point.
pub fn point_segment_distance(p: Vertex, a: Vertex, b: Vertex) -> f64 {
    let ab = b.sub(a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(p.sub(a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let qx = a.x + t * ab.0;
    let qy = a.y + t * ab.1;
    ((p.x - qx).powi(2) + (p.y - qy).powi(2)).sqrt()
}

/// Distance from `p` to segment `[a, b]` together with its derivative with
/// respect to the endpoints. At `dist == 0` the derivative is taken as zero.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SegmentDistance {
    pub dist: f64,
    /// d(dist)/d(a.x, a.y)
    pub grad_a: (f64, f64),
    /// d(dist)/d(b.x, b.y)
    pub grad_b: (f64, f64),
}

pub(crate) fn segment_distance_with_grad(p: Vertex, a: Vertex, b: Vertex) -> SegmentDistance {
    let ab = b.sub(a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(p.sub(a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let qx = a.x + t * ab.0;
    let qy = a.y + t * ab.1;
    let dist = ((p.x - qx).powi(2) + (p.y - qy).powi(2)).sqrt();
    if dist == 0.0 {
        return SegmentDistance {
            dist,
            grad_a: (0.0, 0.0),
            grad_b: (0.0, 0.0),
        };
    }
    // Unit vector from p to the closest point; by the envelope theorem the
    // clamped parameter t can be held fixed when differentiating.
    let ux = (qx - p.x) / dist;
    let uy = (qy - p.y) / dist;
    SegmentDistance {
        dist,
        grad_a: ((1.0 - t) * ux, (1.0 - t) * uy),
        grad_b: (t * ux, t * uy),
    }
}

/// Inside-or-boundary test via sign-consistent edge cross products;
/// orientation independent. A degenerate (zero-area) triangle contains only
/// the points of its collapsed edges.
pub fn point_in_triangle(p: Vertex, a: Vertex, b: Vertex, c: Vertex) -> bool {
    let area2 = cross(b.sub(a), c.sub(a));
    if area2 == 0.0 {
        return point_segment_distance(p, a, b) == 0.0
            || point_segment_distance(p, b, c) == 0.0
            || point_segment_distance(p, c, a) == 0.0;
    }
    let c1 = cross(b.sub(a), p.sub(a));
    let c2 = cross(c.sub(b), p.sub(b));
    let c3 = cross(a.sub(c), p.sub(c));
    (c1 >= 0.0 && c2 >= 0.0 && c3 >= 0.0) || (c1 <= 0.0 && c2 <= 0.0 && c3 <= 0.0)
}

/// Signed distance to a triangle: positive strictly inside, negative outside,
/// zero on the boundary; |d| is the distance to the nearest edge. Degenerate
/// triangles never yield a positive value.
pub fn triangle_signed_distance(p: Vertex, a: Vertex, b: Vertex, c: Vertex) -> f64 {
    let d = point_segment_distance(p, a, b)
        .min(point_segment_distance(p, b, c))
        .min(point_segment_distance(p, c, a));
    if point_in_triangle(p, a, b, c) {
        d
    } else {
        -d
    }
}

/// Random convex polygon: k points at sorted random angles on a random
/// axis-aligned ellipse, jittered center. Always strictly inside (-1, 1)^2.
pub fn random_convex_polygon<R: Rng>(k: usize, rng: &mut R) -> PatchPolygon {
    let mut angles: Vec<f64> = (0..k)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ax: f64 = rng.gen_range(0.2..0.6);
    let ay: f64 = rng.gen_range(0.2..0.6);
    let slack = 0.8 - ax.max(ay);
    let cx = rng.gen_range(-slack..slack);
    let cy = rng.gen_range(-slack..slack);
    let vertices = angles
        .iter()
        .map(|t| Vertex::new(cx + ax * t.cos(), cy + ay * t.sin()))
        .collect();
    PatchPolygon::new(vertices).expect("k >= 3")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: f64, y: f64) -> Vertex {
        Vertex::new(x, y)
    }

    #[test]
    fn fan_triangulation_examples() {
        assert_eq!(regular_polygon_triangulation(3).unwrap().triangles(), &[[0, 1, 2]]);
        assert_eq!(
            regular_polygon_triangulation(4).unwrap().triangles(),
            &[[0, 1, 2], [0, 2, 3]]
        );
        assert_eq!(
            regular_polygon_triangulation(5).unwrap().triangles(),
            &[[0, 1, 2], [0, 2, 3], [0, 3, 4]]
        );
    }

    #[test]
    fn triangulation_rejects_small_k() {
        assert!(regular_polygon_triangulation(2).is_err());
        assert!(regular_polygon_triangulation(0).is_err());
    }

    #[test]
    fn triangulation_counts_and_index_ranges() {
        for k in 3..=64 {
            let tri = regular_polygon_triangulation(k).unwrap();
            assert_eq!(tri.triangles().len(), k - 2);
            for t in tri.triangles() {
                assert!(t.iter().all(|&i| i < k));
                assert!(t[0] != t[1] && t[1] != t[2] && t[0] != t[2]);
            }
        }
    }

    /// Union of the fan triangles reproduces the regular k-gon area, checked
    /// by a deterministic stratified grid over [-1, 1]^2.
    #[test]
    fn fan_covers_regular_polygon() {
        let side = 320; // 102_400 samples
        for k in 3..=64 {
            let poly = PatchPolygon::regular(k, 0.9).unwrap();
            let tri = regular_polygon_triangulation(k).unwrap();
            let mut hits = 0usize;
            for i in 0..side {
                for j in 0..side {
                    let p = v(
                        (2 * j + 1) as f64 / side as f64 - 1.0,
                        (2 * i + 1) as f64 / side as f64 - 1.0,
                    );
                    let inside = tri.triangles().iter().any(|t| {
                        point_in_triangle(
                            p,
                            poly.vertices()[t[0]],
                            poly.vertices()[t[1]],
                            poly.vertices()[t[2]],
                        )
                    });
                    if inside {
                        hits += 1;
                    }
                }
            }
            let estimate = 4.0 * hits as f64 / (side * side) as f64;
            let exact = k as f64 / 2.0 * (std::f64::consts::TAU / k as f64).sin() * 0.81;
            assert!(
                (estimate - exact).abs() / exact < 0.01,
                "k={k}: estimated {estimate}, exact {exact}"
            );
        }
    }

    #[test]
    fn signed_distance_inside_point() {
        // Both slanted edges of this triangle are equidistant from the
        // origin; the brute-force oracle below pins the value at 1/sqrt(5).
        let (a, b, c) = (v(-1.0, -1.0), v(1.0, -1.0), v(0.0, 1.0));
        let d = triangle_signed_distance(v(0.0, 0.0), a, b, c);
        let oracle = brute_force_edge_distance(v(0.0, 0.0), &[(a, b), (b, c), (c, a)]);
        assert!((d - oracle).abs() < 1e-6);
        assert!((d - 1.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn signed_distance_on_vertex_is_zero() {
        let (a, b, c) = (v(-1.0, -1.0), v(1.0, -1.0), v(0.0, 1.0));
        assert_eq!(triangle_signed_distance(a, a, b, c), 0.0);
    }

    #[test]
    fn signed_distance_degenerate_triangle() {
        let o = v(0.0, 0.0);
        let d = triangle_signed_distance(v(0.3, 0.4), o, o, o);
        assert!((d - (-0.5)).abs() < 1e-12);
    }

    #[test]
    fn point_in_triangle_examples() {
        let (a, b, c) = (v(-1.0, -1.0), v(1.0, -1.0), v(0.0, 1.0));
        assert!(point_in_triangle(v(0.0, 0.0), a, b, c));
        assert!(!point_in_triangle(v(1.0, 1.0), a, b, c));
        assert!(point_in_triangle(v(0.0, -1.0), a, b, c)); // on the bottom edge
    }

    #[test]
    fn degenerate_triangle_contains_only_its_segment() {
        let (a, b) = (v(0.0, 0.0), v(1.0, 0.0));
        assert!(point_in_triangle(v(0.5, 0.0), a, b, a));
        assert!(!point_in_triangle(v(0.5, 0.1), a, b, a));
        assert!(!point_in_triangle(v(0.3, 0.4), a, a, a));
    }

    /// Independent distance oracle: coarse scan over sampled edge points,
    /// then ternary refinement (the distance along a segment is convex in t).
    fn brute_force_edge_distance(p: Vertex, edges: &[(Vertex, Vertex)]) -> f64 {
        let at = |a: Vertex, b: Vertex, t: f64| {
            let qx = a.x + t * (b.x - a.x);
            let qy = a.y + t * (b.y - a.y);
            ((p.x - qx).powi(2) + (p.y - qy).powi(2)).sqrt()
        };
        let mut best = f64::INFINITY;
        for &(a, b) in edges {
            let mut best_t = 0.0;
            for i in 0..=2000 {
                let t = i as f64 / 2000.0;
                if at(a, b, t) < at(a, b, best_t) {
                    best_t = t;
                }
            }
            let (mut lo, mut hi) = ((best_t - 1e-3).max(0.0), (best_t + 1e-3).min(1.0));
            for _ in 0..200 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                if at(a, b, m1) < at(a, b, m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            best = best.min(at(a, b, (lo + hi) / 2.0));
        }
        best
    }

    #[test]
    fn sign_agrees_with_containment_and_magnitude_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 10_000 {
            let rnd = |r: &mut ChaCha8Rng| v(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            let (a, b, c) = (rnd(&mut rng), rnd(&mut rng), rnd(&mut rng));
            if cross(b.sub(a), c.sub(a)).abs() < 1e-3 {
                continue; // keep triangles non-degenerate for the sign check
            }
            let p = rnd(&mut rng);
            let d = triangle_signed_distance(p, a, b, c);
            if d > 0.0 {
                assert!(point_in_triangle(p, a, b, c));
            } else if d < 0.0 {
                assert!(!point_in_triangle(p, a, b, c));
            }
            // Cheap brute force on a subset keeps the runtime sane.
            if checked % 100 == 0 {
                let oracle = brute_force_edge_distance(p, &[(a, b), (b, c), (c, a)]);
                assert!((d.abs() - oracle).abs() < 1e-9, "p={p:?} abc=({a:?},{b:?},{c:?})");
            }
            checked += 1;
        }
    }

    #[test]
    fn segment_distance_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        for _ in 0..200 {
            let rnd = |r: &mut ChaCha8Rng| v(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            let (p, a, b) = (rnd(&mut rng), rnd(&mut rng), rnd(&mut rng));
            if point_segment_distance(p, a, b) < 1e-3 {
                continue;
            }
            let g = segment_distance_with_grad(p, a, b);
            let fd_ax = (point_segment_distance(p, v(a.x + h, a.y), b)
                - point_segment_distance(p, v(a.x - h, a.y), b))
                / (2.0 * h);
            let fd_by = (point_segment_distance(p, a, v(b.x, b.y + h))
                - point_segment_distance(p, a, v(b.x, b.y - h)))
                / (2.0 * h);
            assert!((g.grad_a.0 - fd_ax).abs() < 1e-6);
            assert!((g.grad_b.1 - fd_by).abs() < 1e-6);
        }
    }

    #[test]
    fn random_convex_polygons_are_convex_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let poly = random_convex_polygon(5, &mut rng);
            for w in poly.vertices() {
                assert!(w.x.abs() < 1.0 && w.y.abs() < 1.0);
            }
            // All cross products of consecutive sides share a sign (points on
            // an ellipse in angular order are in convex position).
            let k = poly.k();
            let mut signs = Vec::new();
            for i in 0..k {
                let (a, b) = poly.side(i);
                let (_, c) = poly.side((i + 1) % k);
                signs.push(cross(b.sub(a), c.sub(b)) >= 0.0);
            }
            assert!(signs.iter().all(|&s| s) || signs.iter().all(|&s| !s));
        }
    }
}
