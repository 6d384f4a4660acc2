//! Hausdorff distance between a mesh and a geodesic sphere.

use nalgebra::Vector3;
use rayon::prelude::*;

use super::SurfaceMesh;
use crate::error::{Error, Result};
use crate::spaceform::Point;

type V3 = Vector3<f64>;

/// Symmetric Hausdorff estimate between `mesh` and the geodesic sphere `S(p0, r0)`.
///
/// Both sets are compared in Riemannian normal coordinates at `p0`, where the
/// sphere is an exact round sphere. The mesh-to-sphere side is exact at the
/// vertices. The sphere-to-mesh side uses a Fibonacci sample with at least ten
/// points per vertex and exact point-to-triangle distances, so the result
/// approaches the true value from below under refinement.
pub fn hausdorff_to_geodesic_sphere(mesh: &SurfaceMesh, p0: &Point, r0: f64) -> Result<f64> {
    if !(r0 > 0.0) {
        return Err(Error::domain(format!("sphere radius must be positive, got {r0}")));
    }
    let model = mesh.ambient();
    model.check_point(p0)?;
    let basis = model.tangent_basis(p0);
    let coords: Vec<V3> = mesh
        .vertices()
        .iter()
        .map(|v| V3::from(model.normal_coordinates(p0, &basis, v)))
        .collect();
    let to_sphere = mesh
        .vertices()
        .iter()
        .map(|v| (model.distance(p0, v) - r0).abs())
        .fold(0.0f64, f64::max);

    let bvh = TriangleBvh::new(&coords, mesh.faces());
    let n = (10 * mesh.n_vertices()).max(2000);
    let to_mesh = (0..n)
        .into_par_iter()
        .map(|i| bvh.distance(&(fibonacci_point(i, n) * r0)))
        .reduce(|| 0.0, f64::max);
    Ok(to_sphere.max(to_mesh))
}

/// `i`-th of `n` quasi-uniform points on the unit sphere.
pub fn fibonacci_point(i: usize, n: usize) -> V3 {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = golden * i as f64;
    V3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Closest point on triangle `abc` to `p` (Ericson, Real-Time Collision Detection 5.1.5).
pub fn closest_point_on_triangle(p: &V3, a: &V3, b: &V3, c: &V3) -> V3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Bounding-volume hierarchy over triangles for nearest-triangle queries.
pub struct TriangleBvh<'a> {
    pts: &'a [V3],
    faces: &'a [[usize; 3]],
    nodes: Vec<Node>,
    order: Vec<usize>,
}

struct Node {
    lo: V3,
    hi: V3,
    /// Children for inner nodes, `order` range for leaves.
    a: usize,
    b: usize,
    leaf: bool,
}

const LEAF_SIZE: usize = 4;

impl<'a> TriangleBvh<'a> {
    pub fn new(pts: &'a [V3], faces: &'a [[usize; 3]]) -> Self {
        let centroids: Vec<V3> = faces.iter().map(|f| (pts[f[0]] + pts[f[1]] + pts[f[2]]) / 3.0).collect();
        let mut bvh = TriangleBvh { pts, faces, nodes: Vec::new(), order: (0..faces.len()).collect() };
        if !faces.is_empty() {
            bvh.build(&centroids, 0, faces.len());
        }
        bvh
    }

    fn build(&mut self, centroids: &[V3], start: usize, end: usize) -> usize {
        let mut lo = V3::repeat(f64::INFINITY);
        let mut hi = V3::repeat(f64::NEG_INFINITY);
        for &fi in &self.order[start..end] {
            for &v in &self.faces[fi] {
                lo = lo.inf(&self.pts[v]);
                hi = hi.sup(&self.pts[v]);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node { lo, hi, a: start, b: end, leaf: true });
        if end - start > LEAF_SIZE {
            let axis = (hi - lo).imax();
            let mid = (start + end) / 2;
            self.order[start..end].select_nth_unstable_by(mid - start, |&x, &y| {
                centroids[x][axis].total_cmp(&centroids[y][axis])
            });
            let a = self.build(centroids, start, mid);
            let b = self.build(centroids, mid, end);
            self.nodes[id] = Node { lo, hi, a, b, leaf: false };
        }
        id
    }

    fn box_dist2(&self, n: usize, q: &V3) -> f64 {
        let node = &self.nodes[n];
        V3::from_fn(|k, _| (node.lo[k] - q[k]).max(q[k] - node.hi[k]).max(0.0)).norm_squared()
    }

    fn tri_dist2(&self, fi: usize, q: &V3) -> f64 {
        let f = self.faces[fi];
        let c = closest_point_on_triangle(q, &self.pts[f[0]], &self.pts[f[1]], &self.pts[f[2]]);
        (c - q).norm_squared()
    }

    /// Euclidean distance from `q` to the nearest triangle.
    pub fn distance(&self, q: &V3) -> f64 {
        if self.nodes.is_empty() {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        let mut stack = vec![(0usize, self.box_dist2(0, q))];
        while let Some((n, d2)) = stack.pop() {
            if d2 >= best {
                continue;
            }
            let node = &self.nodes[n];
            if node.leaf {
                for &fi in &self.order[node.a..node.b] {
                    best = best.min(self.tri_dist2(fi, q));
                }
            } else {
                let (da, db) = (self.box_dist2(node.a, q), self.box_dist2(node.b, q));
                // nearer child on top
                if da <= db {
                    stack.push((node.b, db));
                    stack.push((node.a, da));
                } else {
                    stack.push((node.a, da));
                    stack.push((node.b, db));
                }
            }
        }
        best.sqrt()
    }
}
