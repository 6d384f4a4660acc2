//! Center of mass with respect to the modified distance `Φ_δ`, and the
//! position vector field `X = s_δ(r) ∇r` about it.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{generate::chord_centroid, SurfaceMesh, VertexMeasure};
use crate::spaceform::{phi_delta_unchecked, s_delta_unchecked, Point};

/// Solver settings for [`solve_center`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterOptions {
    /// Stop once `|Y| / |M|` falls below this.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for CenterOptions {
    fn default() -> Self {
        CenterOptions { tol: 1e-11, max_iterations: 1000 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CenterResult {
    pub p0: Point,
    pub energy: f64,
    /// `|Y(p0)| / |M|`.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub balance_residual: f64,
    /// Energy after each accepted step, starting at the initial point.
    pub trace: Vec<f64>,
    /// Largest distance from `p0` to a vertex.
    pub extent: f64,
    /// `extent ≤ π/(4 sqrt δ)` when `δ > 0`; always true otherwise.
    pub within_convexity_radius: bool,
}

/// Position field about a center.
#[derive(Debug, Clone, Serialize)]
pub struct PositionField {
    pub x: Vec<Point>,
    pub x_tan: Vec<Point>,
    pub r: Vec<f64>,
    /// Vertex normals used for the tangential split.
    pub normals: Vec<Point>,
}

impl PositionField {
    /// `|X|` at each vertex.
    pub fn x_norm(&self, mesh: &SurfaceMesh) -> Vec<f64> {
        self.x.iter().map(|x| mesh.ambient().norm(x)).collect()
    }

    /// `|∇^M r| = |X^⊤| / s_δ(r)` at each vertex.
    pub fn grad_m_r(&self, mesh: &SurfaceMesh) -> Vec<f64> {
        let d = mesh.ambient().curvature();
        self.x_tan
            .iter()
            .zip(&self.r)
            .map(|(t, r)| mesh.ambient().norm(t) / s_delta_unchecked(d, *r))
            .collect()
    }
}

fn check_reach(mesh: &SurfaceMesh, r: f64) -> Result<()> {
    let d = mesh.ambient().curvature();
    if d > 0.0 && r >= std::f64::consts::FRAC_PI_2 / d.sqrt() {
        return Err(Error::domain(format!(
            "distance {r} exceeds π/(2√δ); the energy is not convex there"
        )));
    }
    Ok(())
}

/// `F(q) = Σ_v a_v Φ_δ(dist(q, v))`.
pub fn energy(mesh: &SurfaceMesh, measure: &VertexMeasure, q: &Point) -> Result<f64> {
    let model = mesh.ambient();
    model.check_point(q)?;
    let d = model.curvature();
    let mut total = 0.0;
    for (p, a) in mesh.vertices().iter().zip(&measure.dual_area) {
        let r = model.distance(q, p);
        check_reach(mesh, r)?;
        total += a * phi_delta_unchecked(d, r);
    }
    Ok(total)
}

/// `Y(q) = Σ_v a_v (s_δ(r)/r) exp_q⁻¹(v)`, the negative gradient of [`energy`].
pub fn gradient_y(mesh: &SurfaceMesh, measure: &VertexMeasure, q: &Point) -> Result<Point> {
    let model = mesh.ambient();
    model.check_point(q)?;
    let d = model.curvature();
    let mut y = Point::zeros();
    for (i, (p, a)) in mesh.vertices().iter().zip(&measure.dual_area).enumerate() {
        let r = model.distance(q, p);
        if r < 1e-14 {
            return Err(Error::Degenerate(format!("probe point coincides with vertex {i}")));
        }
        check_reach(mesh, r)?;
        y += model.log(q, p) * (a * s_delta_unchecked(d, r) / r);
    }
    Ok(y)
}

/// Norm of `Σ_v a_v (s_δ(r)/r) x_v` in normal coordinates at `p0`.
pub fn balance_residual(mesh: &SurfaceMesh, measure: &VertexMeasure, p0: &Point) -> Result<f64> {
    let model = mesh.ambient();
    model.check_point(p0)?;
    let basis = model.tangent_basis(p0);
    let d = model.curvature();
    let mut acc = [0.0f64; 3];
    for (p, a) in mesh.vertices().iter().zip(&measure.dual_area) {
        let x = model.normal_coordinates(p0, &basis, p);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r < 1e-14 {
            continue;
        }
        let w = a * s_delta_unchecked(d, r) / r;
        for k in 0..3 {
            acc[k] += w * x[k];
        }
    }
    Ok((acc[0] * acc[0] + acc[1] * acc[1] + acc[2] * acc[2]).sqrt())
}

/// Minimizes [`energy`] by gradient descent along geodesics with backtracking,
/// starting from the chord centroid.
pub fn solve_center(mesh: &SurfaceMesh, measure: &VertexMeasure, opts: &CenterOptions) -> Result<CenterResult> {
    let model = *mesh.ambient();
    let area = measure.total();
    let mut q = chord_centroid(mesh);
    let mut f = energy(mesh, measure, &q)?;
    let mut y = gradient_y(mesh, measure, &q)?;
    let mut trace = vec![f];
    let mut iterations = 0;
    while model.norm(&y) / area > opts.tol {
        if iterations >= opts.max_iterations {
            return Err(Error::CenterNoConvergence { iterations, gradient: model.norm(&y) / area });
        }
        iterations += 1;
        // Y/|M| is the exact Newton step in the flat chart
        let dir = y / area;
        let mut t = 1.0;
        loop {
            let cand = model.exp(&q, &(dir * t));
            let fc = energy(mesh, measure, &cand);
            let yc = fc.as_ref().ok().and_then(|_| gradient_y(mesh, measure, &cand).ok());
            if let (Ok(fc), Some(yc)) = (fc, yc) {
                let armijo = fc <= f - 1e-4 * t * model.norm(&y).powi(2) / area;
                // near the minimum energy differences drop below roundoff
                let flat = fc <= f * (1.0 + 1e-15) && model.norm(&yc) < model.norm(&y);
                if armijo || flat {
                    q = cand;
                    f = fc;
                    y = yc;
                    trace.push(f);
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::CenterNoConvergence { iterations, gradient: model.norm(&y) / area });
            }
        }
    }
    let extent = mesh.vertices().iter().map(|p| model.distance(&q, p)).fold(0.0f64, f64::max);
    let d = model.curvature();
    Ok(CenterResult {
        p0: q,
        energy: f,
        gradient_norm: model.norm(&y) / area,
        iterations,
        balance_residual: balance_residual(mesh, measure, &q)?,
        trace,
        extent,
        within_convexity_radius: d <= 0.0 || extent <= std::f64::consts::FRAC_PI_4 / d.sqrt(),
    })
}

/// `X = s_δ(r) ∇r` about `p0` and its tangential part.
pub fn position_field(mesh: &SurfaceMesh, p0: &Point) -> Result<PositionField> {
    let model = mesh.ambient();
    model.check_point(p0)?;
    let d = model.curvature();
    let normals = mesh.vertex_normals();
    let parts: Vec<Result<(Point, Point, f64)>> = mesh
        .vertices()
        .par_iter()
        .zip(&normals)
        .map(|(p, nu)| {
            let rd = model.radial_data(p0, p)?;
            let x = rd.grad_r * s_delta_unchecked(d, rd.r);
            let tan = x - nu * model.inner(&x, nu);
            Ok((x, tan, rd.r))
        })
        .collect();
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(PositionField {
        x: parts.iter().map(|t| t.0).collect(),
        x_tan: parts.iter().map(|t| t.1).collect(),
        r: parts.iter().map(|t| t.2).collect(),
        normals,
    })
}
