//! Discrete extrinsic curvature.
//!
//! `H` is the normalized mean curvature `(κ₁ + κ₂)/2`, positive on a round
//! sphere with outward normal. Principal curvatures follow the same sign
//! convention.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{SurfaceMesh, VertexMeasure};
use crate::spaceform::Point;

/// Per-vertex curvature from the quadric fit.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureField {
    /// `(κ₁ + κ₂)/2`.
    pub h: Vec<f64>,
    /// `|B| = sqrt(κ₁² + κ₂²)`.
    pub b_norm: Vec<f64>,
    /// `[κ₁, κ₂]` with `κ₁ ≥ κ₂`.
    pub principal: Vec<[f64; 2]>,
}

/// Mean curvature from the cotangent Laplacian of the position, measured in
/// normal coordinates at each vertex and projected on the vertex normal.
pub fn mean_curvature(mesh: &SurfaceMesh) -> Result<Vec<f64>> {
    if !mesh.is_closed() {
        return Err(Error::InvalidMesh("mean curvature needs a closed mesh".into()));
    }
    let model = mesh.ambient();
    let v = mesh.vertices();
    let faces = mesh.faces();
    let n = model.surface_dim() as f64;
    // per face: for each corner k, half-cotangent-weighted logs at the two edge ends
    let contrib: Vec<[(usize, Point); 6]> = (0..faces.len())
        .into_par_iter()
        .map(|f| {
            let l = mesh.face_lengths(f);
            let area = crate::mesh::heron(l);
            let sq = l.map(|x| x * x);
            let face = faces[f];
            let mut out = [(0usize, Point::zeros()); 6];
            for k in 0..3 {
                let w = (sq[(k + 1) % 3] + sq[(k + 2) % 3] - sq[k]) / (8.0 * area);
                let (a, b) = (face[(k + 1) % 3], face[(k + 2) % 3]);
                out[2 * k] = (a, model.log(&v[a], &v[b]) * w);
                out[2 * k + 1] = (b, model.log(&v[b], &v[a]) * w);
            }
            out
        })
        .collect();
    let mut lap = vec![Point::zeros(); v.len()];
    for c in &contrib {
        for (i, x) in c {
            lap[*i] += x;
        }
    }
    // Voronoi cells keep the normalization consistent at irregular vertices
    let area = mesh.mixed_voronoi_areas();
    let normals = mesh.vertex_normals();
    Ok((0..v.len())
        .map(|i| -model.inner(&lap[i], &normals[i]) / (n * area[i]))
        .collect())
}

/// Fits `h = ½ uᵀ A u + gᵀ u` to the neighbors of a vertex in its tangent frame.
fn fit_quadric(us: &[Vector2<f64>], hs: &[f64]) -> Option<(Matrix2<f64>, Vector2<f64>)> {
    let m = us.len();
    if m < 5 {
        return None;
    }
    let scale = us.iter().map(|u| u.norm()).fold(0.0f64, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    // scaled unknowns keep the system well conditioned
    let a = DMatrix::from_fn(m, 5, |i, j| {
        let (x, y) = (us[i][0] / scale, us[i][1] / scale);
        match j {
            0 => 0.5 * x * x,
            1 => x * y,
            2 => 0.5 * y * y,
            3 => x,
            _ => y,
        }
    });
    let b = DVector::from_iterator(m, hs.iter().map(|h| h / scale));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-8 * smax) {
        return None;
    }
    let x = svd.solve(&b, 0.0).ok()?;
    let hess = Matrix2::new(x[0], x[1], x[1], x[2]) / scale;
    Some((hess, Vector2::new(x[3], x[4])))
}

/// Principal curvatures from a local quadric fit over the 2-ring (3-ring when
/// the 2-ring is rank deficient), using the mesh vertex normal as fitting axis.
pub fn shape_operator(mesh: &SurfaceMesh) -> Result<CurvatureField> {
    let model = mesh.ambient();
    let v = mesh.vertices();
    let normals = mesh.vertex_normals();
    let topo = mesh.topology();
    let results: Vec<Result<[f64; 2]>> = (0..v.len())
        .into_par_iter()
        .map(|i| {
            let p = &v[i];
            let nu = normals[i];
            let frame = model.tangent_basis(p);
            // first tangent axis: the frame vector least aligned with ν
            let pick = (0..3)
                .min_by(|&a, &b| model.inner(&frame[a], &nu).abs().total_cmp(&model.inner(&frame[b], &nu).abs()))
                .unwrap();
            let mut e1 = frame[pick] - nu * model.inner(&frame[pick], &nu);
            e1 /= model.norm(&e1);
            let e2 = model.oriented_normal(p, &nu, &e1);
            let e2 = e2 / model.norm(&e2);
            for k in [2usize, 3] {
                let ring = topo.ring(i, k);
                let mut us = Vec::with_capacity(ring.len());
                let mut hs = Vec::with_capacity(ring.len());
                for &j in &ring {
                    let y = model.log(p, &v[j]);
                    us.push(Vector2::new(model.inner(&y, &e1), model.inner(&y, &e2)));
                    hs.push(model.inner(&y, &nu));
                }
                if let Some((hess, g)) = fit_quadric(&us, &hs) {
                    let w = (1.0 + g.norm_squared()).sqrt();
                    let second = hess / w;
                    let first = Matrix2::identity() + g * g.transpose();
                    let shape = -first.try_inverse().unwrap() * second;
                    // similar to a symmetric matrix, so eigenvalues are real
                    let tr = shape.trace();
                    let det = shape.determinant();
                    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
                    return Ok([0.5 * tr + disc, 0.5 * tr - disc]);
                }
            }
            Err(Error::Degenerate(format!("curvature stencil at vertex {i} is rank deficient")))
        })
        .collect();
    let principal = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CurvatureField {
        h: principal.iter().map(|k| 0.5 * (k[0] + k[1])).collect(),
        b_norm: principal.iter().map(|k| k[0].hypot(k[1])).collect(),
        principal,
    })
}

/// `max |H|`.
pub fn h_infty(h: &[f64]) -> f64 {
    h.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Normalized `L^q` norm `((1/|M|) ∫ |B|^q)^{1/q}`; `q = ∞` gives the maximum.
pub fn norm_b_q(field: &CurvatureField, measure: &VertexMeasure, q: f64) -> Result<f64> {
    norm_q(&field.b_norm, &measure.dual_area, q)
}

/// Normalized `L^q` norm of nonnegative per-vertex values under weights `w`.
pub fn norm_q(values: &[f64], w: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::domain(format!("q must be positive, got {q}")));
    }
    if q.is_infinite() {
        return Ok(values.iter().zip(w).filter(|(_, &a)| a > 0.0).fold(0.0f64, |m, (x, _)| m.max(x.abs())));
    }
    let total: f64 = w.iter().sum();
    let s: f64 = values.iter().zip(w).map(|(x, a)| a * x.abs().powf(q)).sum();
    Ok((s / total).powf(1.0 / q))
}
