//! Constant-curvature ambient geometry.
//!
//! Every model is realized as a global chart inside a four-dimensional
//! coordinate space so that points and tangent vectors share one
//! representation ([`Point`]):
//!
//! * `delta = 0`: Euclidean 3-space, the fourth coordinate is always zero.
//! * `delta > 0`: the sphere of radius `1/sqrt(delta)` in Euclidean 4-space.
//! * `delta < 0`: the upper sheet of the hyperboloid `<p,p> = 1/delta` in
//!   Minkowski 4-space, with the time coordinate stored last.
//!
//! With this normalization the exponential map has the same form in all three
//! charts, `exp_p(v) = c_delta(|v|) p + s_delta(|v|) v/|v|`.

use std::f64::consts::PI;

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ambient point or tangent vector in chart coordinates.
pub type Point = Vector4<f64>;

/// Below this radius `c_delta/s_delta` switches to its Laurent series.
const COT_SERIES_RADIUS: f64 = 1e-4;

/// Sectional curvature of a space form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CurvatureParam(f64);

impl CurvatureParam {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::domain(format!("curvature must be finite, got {delta}")));
        }
        Ok(CurvatureParam(delta))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `pi/sqrt(delta)` for positive curvature, infinity otherwise.
    pub fn max_radius(self) -> f64 {
        if self.0 > 0.0 {
            PI / self.0.sqrt()
        } else {
            f64::INFINITY
        }
    }

    fn check_radius(self, r: f64) -> Result<()> {
        if !(r >= 0.0) {
            return Err(Error::domain(format!("radius must be nonnegative, got {r}")));
        }
        if r >= self.max_radius() {
            return Err(Error::domain(format!(
                "radius {r} outside (0, pi/sqrt(delta)) for delta = {}",
                self.0
            )));
        }
        Ok(())
    }
}

impl From<CurvatureParam> for f64 {
    fn from(d: CurvatureParam) -> f64 {
        d.0
    }
}

/// δ-sine: `sin(sqrt(δ) r)/sqrt(δ)`, `r`, or `sinh(sqrt(-δ) r)/sqrt(-δ)`.
pub fn s_delta(delta: CurvatureParam, r: f64) -> Result<f64> {
    delta.check_radius(r)?;
    Ok(s_delta_unchecked(delta.0, r))
}

/// δ-cosine, the derivative of [`s_delta`].
pub fn c_delta(delta: CurvatureParam, r: f64) -> Result<f64> {
    delta.check_radius(r)?;
    Ok(c_delta_unchecked(delta.0, r))
}

/// Modified distance `Φ_δ(r) = ∫_0^r s_δ`.
pub fn phi_delta(delta: CurvatureParam, r: f64) -> Result<f64> {
    delta.check_radius(r)?;
    Ok(phi_delta_unchecked(delta.0, r))
}

/// `c_δ/s_δ`, using `1/r - δ r/3` near the origin.
pub fn cot_delta(delta: CurvatureParam, r: f64) -> Result<f64> {
    delta.check_radius(r)?;
    if r == 0.0 {
        return Err(Error::domain("c_delta/s_delta is singular at r = 0"));
    }
    Ok(cot_delta_unchecked(delta.0, r))
}

/// Principal-branch inverse of [`s_delta`].
pub fn s_delta_inverse(delta: CurvatureParam, v: f64) -> Result<f64> {
    let d = delta.0;
    if !(v >= 0.0) {
        return Err(Error::domain(format!("s_delta_inverse needs v >= 0, got {v}")));
    }
    if d > 0.0 {
        let k = d.sqrt();
        let x = k * v;
        if x > 1.0 + 1e-12 {
            return Err(Error::domain(format!(
                "{v} exceeds the maximum 1/sqrt(delta) = {} of s_delta",
                1.0 / k
            )));
        }
        Ok(x.min(1.0).asin() / k)
    } else if d < 0.0 {
        let k = (-d).sqrt();
        Ok((k * v).asinh() / k)
    } else {
        Ok(v)
    }
}

#[inline]
pub(crate) fn s_delta_unchecked(d: f64, r: f64) -> f64 {
    if d > 0.0 {
        let k = d.sqrt();
        (k * r).sin() / k
    } else if d < 0.0 {
        let k = (-d).sqrt();
        (k * r).sinh() / k
    } else {
        r
    }
}

#[inline]
pub(crate) fn c_delta_unchecked(d: f64, r: f64) -> f64 {
    if d > 0.0 {
        (d.sqrt() * r).cos()
    } else if d < 0.0 {
        ((-d).sqrt() * r).cosh()
    } else {
        1.0
    }
}

#[inline]
pub(crate) fn phi_delta_unchecked(d: f64, r: f64) -> f64 {
    // (1 - c)/δ written without cancellation
    if d > 0.0 {
        let s = (0.5 * d.sqrt() * r).sin();
        2.0 * s * s / d
    } else if d < 0.0 {
        let s = (0.5 * (-d).sqrt() * r).sinh();
        2.0 * s * s / (-d)
    } else {
        0.5 * r * r
    }
}

#[inline]
pub(crate) fn cot_delta_unchecked(d: f64, r: f64) -> f64 {
    if r < COT_SERIES_RADIUS {
        1.0 / r - d * r / 3.0
    } else {
        c_delta_unchecked(d, r) / s_delta_unchecked(d, r)
    }
}

/// Chart realizing a space form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    EuclideanCoordinates,
    SphereEmbedding,
    HyperboloidEmbedding,
}

/// Ambient space form `N^{n+1}` of constant curvature `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientModel {
    delta: CurvatureParam,
    dim: usize,
    chart: Chart,
}

/// Distance to a center together with its gradient and Hessian coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialData {
    pub r: f64,
    /// Unit tangent at the evaluation point pointing away from the center.
    pub grad_r: Point,
    /// `c_δ(r)/s_δ(r)`: the Hessian of `r` is this multiple of the metric on `grad_r^⊥`.
    pub hess_coeff: f64,
}

impl AmbientModel {
    /// Space form of curvature `delta` and dimension `dim = n + 1`.
    ///
    /// Only `dim = 3` (surfaces) is implemented.
    pub fn new(delta: f64, dim: usize) -> Result<Self> {
        let delta = CurvatureParam::new(delta)?;
        if dim != 3 {
            return Err(Error::NotImplemented(format!(
                "ambient dimension {dim}; only dimension 3 is supported"
            )));
        }
        let chart = if delta.0 > 0.0 {
            Chart::SphereEmbedding
        } else if delta.0 < 0.0 {
            Chart::HyperboloidEmbedding
        } else {
            Chart::EuclideanCoordinates
        };
        Ok(AmbientModel { delta, dim, chart })
    }

    pub fn euclidean() -> Self {
        AmbientModel::new(0.0, 3).expect("flat model is always valid")
    }

    #[inline]
    pub fn delta(&self) -> CurvatureParam {
        self.delta
    }

    #[inline]
    pub fn curvature(&self) -> f64 {
        self.delta.0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Hypersurface dimension `n`.
    #[inline]
    pub fn surface_dim(&self) -> usize {
        self.dim - 1
    }

    #[inline]
    pub fn chart(&self) -> Chart {
        self.chart
    }

    /// Radius of the embedded model, `1/sqrt(|delta|)`; zero for the flat chart.
    pub fn embedding_radius(&self) -> f64 {
        let d = self.delta.0;
        if d == 0.0 {
            0.0
        } else {
            1.0 / d.abs().sqrt()
        }
    }

    /// Ambient inner product of chart vectors (Minkowski for the hyperboloid).
    #[inline]
    pub fn inner(&self, a: &Point, b: &Point) -> f64 {
        match self.chart {
            Chart::HyperboloidEmbedding => a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3],
            _ => a.dot(b),
        }
    }

    /// Norm of a tangent vector.
    #[inline]
    pub fn norm(&self, v: &Point) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// Distinguished base point of the chart.
    pub fn origin(&self) -> Point {
        match self.chart {
            Chart::EuclideanCoordinates => Point::zeros(),
            _ => Point::new(0.0, 0.0, 0.0, self.embedding_radius()),
        }
    }

    /// Relative violation of the model constraint at `p`.
    pub fn constraint_violation(&self, p: &Point) -> f64 {
        match self.chart {
            Chart::EuclideanCoordinates => p[3].abs(),
            Chart::SphereEmbedding => (self.delta.0 * p.dot(p) - 1.0).abs(),
            Chart::HyperboloidEmbedding => {
                let v = (self.delta.0 * self.inner(p, p) - 1.0).abs();
                if p[3] > 0.0 {
                    v
                } else {
                    v.max(1.0)
                }
            }
        }
    }

    /// Errors when `p` violates the model constraint beyond `1e-8`.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        let v = self.constraint_violation(p);
        if !(v <= 1e-8) {
            return Err(Error::OffModel(v));
        }
        Ok(())
    }

    /// Pulls a chart vector back onto the model (renormalizes the embedding).
    pub fn project_point(&self, p: &Point) -> Point {
        match self.chart {
            Chart::EuclideanCoordinates => Point::new(p[0], p[1], p[2], 0.0),
            Chart::SphereEmbedding => p * (self.embedding_radius() / p.norm()),
            Chart::HyperboloidEmbedding => {
                let a = self.embedding_radius();
                let spatial = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                Point::new(p[0], p[1], p[2], (a * a + spatial).sqrt())
            }
        }
    }

    /// Orthogonal projection of a chart vector onto `T_p N`.
    pub fn project_tangent(&self, p: &Point, v: &Point) -> Point {
        match self.chart {
            Chart::EuclideanCoordinates => Point::new(v[0], v[1], v[2], 0.0),
            _ => {
                let pp = self.inner(p, p);
                v - p * (self.inner(v, p) / pp)
            }
        }
    }

    /// Geodesic distance between two model points.
    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let diff = q - p;
        match self.chart {
            Chart::EuclideanCoordinates => diff.norm(),
            Chart::SphereEmbedding => {
                let a = self.embedding_radius();
                let chord = diff.norm();
                2.0 * a * (chord / (2.0 * a)).min(1.0).asin()
            }
            Chart::HyperboloidEmbedding => {
                let a = self.embedding_radius();
                let chord = self.inner(&diff, &diff).max(0.0).sqrt();
                2.0 * a * (chord / (2.0 * a)).asinh()
            }
        }
    }

    /// Checked distance: both points must lie on the model.
    pub fn checked_distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.distance(p, q))
    }

    /// Riemannian exponential map at `p`.
    pub fn exp(&self, p: &Point, v: &Point) -> Point {
        let t = self.norm(v);
        if t == 0.0 {
            return *p;
        }
        match self.chart {
            Chart::EuclideanCoordinates => p + v,
            _ => {
                let d = self.delta.0;
                let q = p * c_delta_unchecked(d, t) + v * (s_delta_unchecked(d, t) / t);
                self.project_point(&q)
            }
        }
    }

    /// Inverse exponential map `exp_p^{-1}(q)`.
    pub fn log(&self, p: &Point, q: &Point) -> Point {
        let diff = q - p;
        match self.chart {
            Chart::EuclideanCoordinates => Point::new(diff[0], diff[1], diff[2], 0.0),
            _ => {
                let r = self.distance(p, q);
                if r == 0.0 {
                    return Point::zeros();
                }
                let u = self.project_tangent(p, &diff);
                let nu = self.norm(&u);
                if nu == 0.0 {
                    return Point::zeros();
                }
                u * (r / nu)
            }
        }
    }

    /// Distance to `center` at `x`, with the unit radial gradient and Hessian coefficient.
    pub fn radial_data(&self, center: &Point, x: &Point) -> Result<RadialData> {
        let r = self.distance(center, x);
        if r <= 1e-14 * (1.0 + self.embedding_radius()) {
            return Err(Error::Degenerate("radial data requested at the center".into()));
        }
        if r >= self.delta.max_radius() * (1.0 - 1e-12) {
            return Err(Error::Degenerate("antipodal point: radial gradient undefined".into()));
        }
        let back = self.log(x, center);
        let grad_r = back * (-1.0 / r);
        Ok(RadialData {
            r,
            grad_r,
            hess_coeff: cot_delta_unchecked(self.delta.0, r),
        })
    }

    /// Orthonormal basis of `T_p N` (three vectors).
    pub fn tangent_basis(&self, p: &Point) -> [Point; 3] {
        let mut candidates: Vec<Point> = (0..4)
            .map(|i| {
                let mut e = Point::zeros();
                e[i] = 1.0;
                self.project_tangent(p, &e)
            })
            .collect();
        if self.chart == Chart::EuclideanCoordinates {
            candidates.truncate(3);
        }
        let mut basis: Vec<Point> = Vec::with_capacity(3);
        // Gram-Schmidt, always taking the longest remaining candidate.
        while basis.len() < 3 {
            let (idx, _) = candidates
                .iter()
                .enumerate()
                .map(|(i, c)| (i, self.norm(c)))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let v = candidates.remove(idx);
            let n = self.norm(&v);
            let e = v / n;
            for c in candidates.iter_mut() {
                *c -= e * self.inner(c, &e);
            }
            basis.push(e);
        }
        // fix the handedness so that b0, b1, b2 is positively oriented
        let b2 = self.oriented_normal(p, &basis[0], &basis[1]);
        [basis[0], basis[1], b2 / self.norm(&b2)]
    }

    /// Coordinates of `log_p(x)` in `basis`; Riemannian normal coordinates at `p`.
    pub fn normal_coordinates(&self, p: &Point, basis: &[Point; 3], x: &Point) -> [f64; 3] {
        let v = self.log(p, x);
        [
            self.inner(&v, &basis[0]),
            self.inner(&v, &basis[1]),
            self.inner(&v, &basis[2]),
        ]
    }

    /// Point with normal coordinates `coords` at `p` in `basis`.
    pub fn from_normal_coordinates(&self, p: &Point, basis: &[Point; 3], coords: [f64; 3]) -> Point {
        let v = basis[0] * coords[0] + basis[1] * coords[1] + basis[2] * coords[2];
        self.exp(p, &v)
    }

    /// Unit vector at `x` that is orthogonal (in the ambient metric) to the
    /// tangent vectors `a`, `b` of `T_x N`, oriented like `a × b` in the flat chart.
    pub fn oriented_normal(&self, x: &Point, a: &Point, b: &Point) -> Point {
        match self.chart {
            Chart::EuclideanCoordinates => {
                let c = a.xyz().cross(&b.xyz());
                Point::new(c[0], c[1], c[2], 0.0)
            }
            Chart::SphereEmbedding => -cross4(a, b, &(x * self.delta.0.sqrt())),
            Chart::HyperboloidEmbedding => {
                let c = -cross4(a, b, &(x * (-self.delta.0).sqrt()));
                Point::new(c[0], c[1], c[2], -c[3])
            }
        }
    }
}

/// Vector `n` with `n · w = det[a; b; c; w]` for all `w`.
fn cross4(a: &Point, b: &Point, c: &Point) -> Point {
    let m = |i: usize, j: usize, k: usize| {
        a[i] * (b[j] * c[k] - b[k] * c[j]) - a[j] * (b[i] * c[k] - b[k] * c[i])
            + a[k] * (b[i] * c[j] - b[j] * c[i])
    };
    Point::new(-m(1, 2, 3), m(0, 2, 3), -m(0, 1, 3), m(0, 1, 2))
}

/// Mean curvature and first eigenvalue of the geodesic sphere of radius `r0`
/// in the space form of curvature `delta`, for an `n`-dimensional sphere.
pub fn geodesic_sphere_reference(delta: CurvatureParam, n: usize, r0: f64) -> Result<(f64, f64)> {
    if r0 <= 0.0 {
        return Err(Error::domain(format!("sphere radius must be positive, got {r0}")));
    }
    let s = s_delta(delta, r0)?;
    let c = c_delta(delta, r0)?;
    Ok((c / s, n as f64 / (s * s)))
}
