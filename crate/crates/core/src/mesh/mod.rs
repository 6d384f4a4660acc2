//! Closed oriented triangle meshes immersed in a space-form chart.

pub mod generate;
pub mod hausdorff;
pub mod io;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spaceform::{AmbientModel, Point};

/// Faces smaller than this fraction of the mean face area are rejected.
const MIN_RELATIVE_FACE_AREA: f64 = 1e-12;
/// Tolerance on the model constraint for mesh vertices.
const VERTEX_CONSTRAINT_TOL: f64 = 1e-8;

/// Triangle mesh `M` with vertices in the chart of `ambient`.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    vertices: Vec<Point>,
    faces: Vec<[usize; 3]>,
    ambient: AmbientModel,
    closed: bool,
}

/// Barycentric dual areas, one per vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexMeasure {
    pub dual_area: Vec<f64>,
}

impl VertexMeasure {
    pub fn total(&self) -> f64 {
        self.dual_area.iter().sum()
    }

    /// Normalized integral `(1/|M|) Σ a_v f_v`.
    pub fn mean(&self, values: &[f64]) -> f64 {
        self.integral(values) / self.total()
    }

    /// Discrete integral `Σ a_v f_v`.
    pub fn integral(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.dual_area.len());
        self.dual_area.iter().zip(values).map(|(a, f)| a * f).sum()
    }
}

/// Vertex adjacency in compressed form.
#[derive(Debug, Clone)]
pub struct Topology {
    face_offsets: Vec<usize>,
    face_list: Vec<usize>,
    nbr_offsets: Vec<usize>,
    nbr_list: Vec<usize>,
}

impl Topology {
    /// Faces incident to `v`.
    pub fn faces_of(&self, v: usize) -> &[usize] {
        &self.face_list[self.face_offsets[v]..self.face_offsets[v + 1]]
    }

    /// Sorted one-ring neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.nbr_list[self.nbr_offsets[v]..self.nbr_offsets[v + 1]]
    }

    /// Vertices within `k` edges of `v`, excluding `v`, in breadth-first order.
    pub fn ring(&self, v: usize, k: usize) -> Vec<usize> {
        let mut seen = vec![v];
        let mut frontier = vec![v];
        for _ in 0..k {
            let mut next = Vec::new();
            for &u in &frontier {
                for &w in self.neighbors(u) {
                    if !seen.contains(&w) {
                        seen.push(w);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        seen.remove(0);
        seen
    }
}

impl SurfaceMesh {
    /// Closed, oriented, connected mesh. Every invariant is checked.
    pub fn new(ambient: AmbientModel, vertices: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = SurfaceMesh { vertices, faces, ambient, closed: true };
        mesh.check_common()?;
        mesh.check_closed_oriented()?;
        mesh.check_connected()?;
        Ok(mesh)
    }

    /// Mesh with boundary, used for open test patches. Orientation is still
    /// required to be consistent on interior edges.
    pub fn new_open(ambient: AmbientModel, vertices: Vec<Point>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = SurfaceMesh { vertices, faces, ambient, closed: false };
        mesh.check_common()?;
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &mesh.faces {
            for k in 0..3 {
                *directed.entry((f[k], f[(k + 1) % 3])).or_default() += 1;
            }
        }
        if let Some(((a, b), _)) = directed.iter().find(|(_, &c)| c > 1) {
            return Err(Error::InvalidMesh(format!(
                "directed edge ({a}, {b}) used twice: inconsistent orientation"
            )));
        }
        Ok(mesh)
    }

    fn check_common(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.faces.is_empty() {
            return Err(Error::InvalidMesh("mesh has no faces".into()));
        }
        for (i, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&v| v >= n) {
                return Err(Error::InvalidMesh(format!("face {i} references a missing vertex")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::InvalidMesh(format!("face {i} repeats a vertex")));
            }
        }
        for (i, p) in self.vertices.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
            }
            let v = self.ambient.constraint_violation(p);
            if v > VERTEX_CONSTRAINT_TOL {
                return Err(Error::InvalidMesh(format!(
                    "vertex {i} violates the model constraint by {v:e}"
                )));
            }
        }
        let areas = self.face_areas();
        let mean = areas.iter().sum::<f64>() / areas.len() as f64;
        if let Some(i) = areas.iter().position(|&a| !(a >= MIN_RELATIVE_FACE_AREA * mean)) {
            return Err(Error::InvalidMesh(format!(
                "face {i} is degenerate (area {:e}, mean {mean:e})",
                areas[i]
            )));
        }
        Ok(())
    }

    fn check_closed_oriented(&self) -> Result<()> {
        let mut directed: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| (0..3).map(move |k| (f[k], f[(k + 1) % 3])))
            .collect();
        directed.sort_unstable();
        if let Some(w) = directed.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidMesh(format!(
                "edge ({}, {}) is traversed twice in the same direction",
                w[0].0, w[0].1
            )));
        }
        for &(a, b) in &directed {
            if directed.binary_search(&(b, a)).is_err() {
                return Err(Error::InvalidMesh(format!(
                    "edge ({a}, {b}) has no opposite half-edge: mesh is not closed"
                )));
            }
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut used = vec![false; n];
        for f in &self.faces {
            for k in 0..3 {
                used[f[k]] = true;
                let (a, b) = (find(&mut parent, f[k]), find(&mut parent, f[(k + 1) % 3]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no face")));
        }
        let root = find(&mut parent, 0);
        if (0..n).any(|v| find(&mut parent, v) != root) {
            return Err(Error::InvalidMesh("mesh has more than one component".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    #[inline]
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    #[inline]
    pub fn ambient(&self) -> &AmbientModel {
        &self.ambient
    }

    #[inline]
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    #[inline]
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut e: Vec<[usize; 2]> = self
            .faces
            .iter()
            .flat_map(|f| {
                (0..3).map(move |k| {
                    let (a, b) = (f[k], f[(k + 1) % 3]);
                    [a.min(b), a.max(b)]
                })
            })
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.edges().len() as i64 + self.n_faces() as i64
    }

    pub fn topology(&self) -> Topology {
        let n = self.n_vertices();
        let mut face_count = vec![0usize; n];
        for f in &self.faces {
            for &v in f {
                face_count[v] += 1;
            }
        }
        let mut face_offsets = vec![0usize; n + 1];
        for v in 0..n {
            face_offsets[v + 1] = face_offsets[v] + face_count[v];
        }
        let mut face_list = vec![0usize; face_offsets[n]];
        let mut fill = face_offsets.clone();
        for (i, f) in self.faces.iter().enumerate() {
            for &v in f {
                face_list[fill[v]] = i;
                fill[v] += 1;
            }
        }
        let mut nbr_offsets = vec![0usize; n + 1];
        let mut nbr_list = Vec::with_capacity(2 * face_list.len());
        for v in 0..n {
            let mut nb: Vec<usize> = face_list[face_offsets[v]..face_offsets[v + 1]]
                .iter()
                .flat_map(|&fi| self.faces[fi])
                .filter(|&w| w != v)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nbr_list.extend_from_slice(&nb);
            nbr_offsets[v + 1] = nbr_list.len();
        }
        Topology { face_offsets, face_list, nbr_offsets, nbr_list }
    }

    /// Intrinsic length of the edge `(a, b)`: the ambient geodesic distance.
    #[inline]
    pub fn edge_length(&self, a: usize, b: usize) -> f64 {
        self.ambient.distance(&self.vertices[a], &self.vertices[b])
    }

    /// Lengths of the edges opposite to each corner of face `f`.
    pub fn face_lengths(&self, f: usize) -> [f64; 3] {
        let [a, b, c] = self.faces[f];
        [self.edge_length(b, c), self.edge_length(c, a), self.edge_length(a, b)]
    }

    /// Face areas from intrinsic edge lengths.
    pub fn face_areas(&self) -> Vec<f64> {
        (0..self.faces.len())
            .into_par_iter()
            .map(|f| heron(self.face_lengths(f)))
            .collect()
    }

    pub fn total_area(&self) -> f64 {
        self.face_areas().iter().sum()
    }

    /// `4√3·area / Σ l²` of face `f`: 1 for an equilateral triangle, 0 when degenerate.
    pub fn face_quality(&self, f: usize) -> f64 {
        let l = self.face_lengths(f);
        let sq: f64 = l.iter().map(|x| x * x).sum();
        4.0 * 3f64.sqrt() * heron(l) / sq
    }

    pub fn min_face_quality(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_quality(f)).fold(f64::INFINITY, f64::min)
    }

    /// Barycentric dual areas (one third of each incident face).
    pub fn vertex_measures(&self) -> VertexMeasure {
        let areas = self.face_areas();
        let mut dual = vec![0.0; self.n_vertices()];
        for (f, a) in self.faces.iter().zip(&areas) {
            for &v in f {
                dual[v] += a / 3.0;
            }
        }
        VertexMeasure { dual_area: dual }
    }

    /// Mixed Voronoi areas: circumcentric cells on non-obtuse faces, with the
    /// usual half/quarter split on obtuse ones. They sum to the total area.
    pub fn mixed_voronoi_areas(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_vertices()];
        for (fi, f) in self.faces.iter().enumerate() {
            let l = self.face_lengths(fi);
            let area = heron(l);
            let sq = l.map(|x| x * x);
            let cot = [0, 1, 2].map(|k| (sq[(k + 1) % 3] + sq[(k + 2) % 3] - sq[k]) / (4.0 * area));
            match (0..3).find(|&k| cot[k] < 0.0) {
                None => {
                    for k in 0..3 {
                        // edges at corner k are opposite corners k+1 and k+2
                        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
                        out[f[k]] += (sq[a] * cot[a] + sq[b] * cot[b]) / 8.0;
                    }
                }
                Some(obtuse) => {
                    for k in 0..3 {
                        out[f[k]] += if k == obtuse { area / 2.0 } else { area / 4.0 };
                    }
                }
            }
        }
        out
    }

    /// Unit normal of each face at its first vertex, oriented by the vertex order.
    pub fn face_normal_at(&self, f: usize, corner: usize) -> Point {
        let face = self.faces[f];
        let v = face[corner];
        let p = &self.vertices[v];
        let a = self.ambient.log(p, &self.vertices[face[(corner + 1) % 3]]);
        let b = self.ambient.log(p, &self.vertices[face[(corner + 2) % 3]]);
        self.ambient.oriented_normal(p, &a, &b)
    }

    /// Area-weighted unit vertex normals, tangent to the model at each vertex.
    pub fn vertex_normals(&self) -> Vec<Point> {
        let topo = self.topology();
        (0..self.n_vertices())
            .into_par_iter()
            .map(|v| {
                let mut sum = Point::zeros();
                for &f in topo.faces_of(v) {
                    let corner = self.faces[f].iter().position(|&w| w == v).unwrap();
                    sum += self.face_normal_at(f, corner);
                }
                let s = self.ambient.project_tangent(&self.vertices[v], &sum);
                s / self.ambient.norm(&s)
            })
            .collect()
    }

    /// Same surface with reversed orientation.
    pub fn flipped(&self) -> SurfaceMesh {
        SurfaceMesh {
            vertices: self.vertices.clone(),
            faces: self.faces.iter().map(|f| [f[0], f[2], f[1]]).collect(),
            ambient: self.ambient,
            closed: self.closed,
        }
    }

    /// Applies `f` to every vertex; the result is re-validated.
    pub fn map_vertices(&self, f: impl Fn(&Point) -> Point) -> Result<SurfaceMesh> {
        let vertices = self.vertices.iter().map(|p| self.ambient.project_point(&f(p))).collect();
        if self.closed {
            SurfaceMesh::new(self.ambient, vertices, self.faces.clone())
        } else {
            SurfaceMesh::new_open(self.ambient, vertices, self.faces.clone())
        }
    }

    /// Area of `{x in M : dist(x0, x) <= s}` with distances interpolated
    /// linearly inside each face.
    pub fn extrinsic_ball_area(&self, x0: &Point, s: f64) -> f64 {
        let d: Vec<f64> = self.vertices.iter().map(|p| self.ambient.distance(x0, p)).collect();
        let areas = self.face_areas();
        self.faces
            .iter()
            .zip(&areas)
            .map(|(f, a)| a * sublevel_fraction([d[f[0]], d[f[1]], d[f[2]]], s))
            .sum()
    }

    /// Shortest-path distances along mesh edges from a set of source vertices.
    pub fn graph_distances(&self, sources: &[usize]) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl PartialOrd for Item {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }
        impl Ord for Item {
            fn cmp(&self, o: &Self) -> Ordering {
                o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
            }
        }
        let topo = self.topology();
        let mut dist = vec![f64::INFINITY; self.n_vertices()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Item(0.0, s));
        }
        while let Some(Item(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &w in topo.neighbors(v) {
                let nd = d + self.edge_length(v, w);
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Item(nd, w));
                }
            }
        }
        dist
    }
}

/// Triangle area from side lengths (Kahan's stable Heron formula).
pub(crate) fn heron(l: [f64; 3]) -> f64 {
    let mut s = l;
    s.sort_by(|a, b| b.total_cmp(a));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * p.max(0.0).sqrt()
}

/// Fraction of a triangle where the linear interpolant of `d` is at most `s`.
pub(crate) fn sublevel_fraction(mut d: [f64; 3], s: f64) -> f64 {
    d.sort_by(f64::total_cmp);
    let [d0, d1, d2] = d;
    if s <= d0 {
        0.0
    } else if s >= d2 {
        1.0
    } else if s <= d1 {
        (s - d0) * (s - d0) / ((d1 - d0) * (d2 - d0))
    } else {
        1.0 - (d2 - s) * (d2 - s) / ((d2 - d0) * (d2 - d1))
    }
}
