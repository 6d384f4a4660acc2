//! The glued-spheres family `M_ε`: two nearly unit spheres, one inside the
//! other, joined near the north pole by a catenoid neck of waist `ε²`.
//!
//! The meridian is built from four regions on each sheet, by distance `r` to
//! the axis:
//!
//! * (i) catenoid, `r ∈ [ε², ε]`: `z = 1 ± ε² arccosh(r/ε²)`;
//! * (ii) first gluing, `r ∈ [ε, 2ε]`: a quartic flattening to `z = 1 ± a₀`;
//! * (iii) second gluing, `r ∈ [2ε, 3ε]`: a quartic bending onto the sphere;
//! * (iv) the sphere of radius `r₀^±` centered on the circle `r = 3ε, z = 0`.
//!
//! The profile is C² across every junction. The two holes left at the south
//! poles are closed by flat disks of radius `3ε`.
//!
//! Curvatures use the orientation pointing out of the thin shell between
//! the sheets: up on the `+` sheet, down on the `−` sheet. To leading order
//! in ε, with `τ = r/ε − 1` in (ii) and `τ = r/ε − 2` in (iii):
//!
//! | region | `+` sheet `(κ_mer, κ_par)` | `−` sheet `(κ_mer, κ_par)` |
//! |---|---|---|
//! | (i) | `(ε²/r², −ε²/r²)` | `(ε²/r², −ε²/r²)` |
//! | (ii) | `(1+2τ−3τ², −(1−τ)²)` | same as `+` |
//! | (iii) | `(−2τ+3τ², (−τ²+τ³)/(2+τ))` | negated |
//! | (iv) | `(1, 1−3ε/r)` | negated |
//!
//! So `H = 0` on the neck while `H = 2τ(1−τ)` on (ii) for both sheets.
//! The inner sphere has `H ≈ −1`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::curvature::CurvatureField;
use crate::error::{Error, Result};
use crate::mesh::{heron, SurfaceMesh, VertexMeasure};
use crate::spaceform::AmbientModel;
use crate::spectral::{assemble, rayleigh_quotient};

/// Closed-form coefficients of the glued profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileCoefficients {
    pub eps: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1_plus: f64,
    pub b2_plus: f64,
    pub b1_minus: f64,
    pub b2_minus: f64,
    pub r0_plus: f64,
    pub r0_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    fn sign(self) -> f64 {
        match self {
            Sheet::Plus => 1.0,
            Sheet::Minus => -1.0,
        }
    }
}

/// Meridian regions; the caps close the south holes and are not part of
/// the analytic profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Catenoid,
    FirstGluing,
    SecondGluing,
    Sphere,
    Cap,
}

fn sphere_radius(level: f64, eps: f64) -> f64 {
    0.5 * level + 0.5 * (level * level + eps * eps / 3.0).sqrt()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Evaluates the profile coefficients and re-checks the matching conditions.
pub fn coefficients(eps: f64) -> Result<ProfileCoefficients> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::domain(format!("eps must lie in (0, 0.25], got {eps}")));
    }
    let e2 = eps * eps;
    let w = (1.0 - e2).powf(1.5);
    let a1 = (2.0 - 3.0 * e2) / (3.0 * eps * w);
    let a2 = (1.0 - 2.0 * e2) / (4.0 * e2 * w);
    let a0 = a1 * eps.powi(3) - a2 * eps.powi(4) + e2 * (1.0 / eps).acosh();
    let r0_plus = sphere_radius(1.0 + a0, eps);
    let r0_minus = sphere_radius(1.0 - a0, eps);
    let c = ProfileCoefficients {
        eps,
        a0,
        a1,
        a2,
        b1_plus: 1.0 / (3.0 * eps * r0_plus),
        b2_plus: -1.0 / (4.0 * e2 * r0_plus),
        b1_minus: 1.0 / (3.0 * eps * r0_minus),
        b2_minus: -1.0 / (4.0 * e2 * r0_minus),
        r0_plus,
        r0_minus,
    };
    let j = Junction::standard(&c);
    for sheet in [Sheet::Plus, Sheet::Minus] {
        let r0 = c.r0(sheet);
        let lvl = 1.0 + sheet.sign() * a0;
        let pairs = [
            (r0 * r0, lvl * r0 + e2 / 12.0),
            (j.branch(Region::Catenoid, sheet, eps)[0], j.branch(Region::FirstGluing, sheet, eps)[0]),
            (j.branch(Region::Catenoid, sheet, eps)[1], j.branch(Region::FirstGluing, sheet, eps)[1]),
            (j.branch(Region::Catenoid, sheet, eps)[2], j.branch(Region::FirstGluing, sheet, eps)[2]),
            (j.branch(Region::SecondGluing, sheet, 3.0 * eps)[0], r0),
            (j.branch(Region::SecondGluing, sheet, 3.0 * eps)[1], 0.0),
            (j.branch(Region::SecondGluing, sheet, 3.0 * eps)[2], -1.0 / r0),
        ];
        if let Some(k) = pairs.iter().position(|(a, b)| !close(*a, *b)) {
            return Err(Error::Numerical(format!(
                "profile matching condition {k} fails on the {sheet:?} sheet: {} vs {}",
                pairs[k].0, pairs[k].1
            )));
        }
    }
    Ok(c)
}

impl ProfileCoefficients {
    pub fn r0(&self, sheet: Sheet) -> f64 {
        match sheet {
            Sheet::Plus => self.r0_plus,
            Sheet::Minus => self.r0_minus,
        }
    }

    /// Region containing `r` on the given sheet.
    pub fn region(&self, sheet: Sheet, r: f64) -> Result<Region> {
        let e = self.eps;
        let top = 3.0 * e + self.r0(sheet);
        if !(r >= e * e && r <= top) {
            return Err(Error::domain(format!("r = {r} outside [{}, {top}]", e * e)));
        }
        Ok(if r <= e {
            Region::Catenoid
        } else if r <= 2.0 * e {
            Region::FirstGluing
        } else if r <= 3.0 * e {
            Region::SecondGluing
        } else {
            Region::Sphere
        })
    }
}

/// One neck between two consecutive spheres, in the frame where it opens
/// upward at height `level`.
#[derive(Debug, Clone, Copy)]
struct Junction {
    eps: f64,
    a0: f64,
    a1: f64,
    a2: f64,
    level: f64,
    r_plus: f64,
    r_minus: f64,
}

impl Junction {
    fn standard(c: &ProfileCoefficients) -> Self {
        Junction {
            eps: c.eps,
            a0: c.a0,
            a1: c.a1,
            a2: c.a2,
            level: 1.0,
            r_plus: c.r0_plus,
            r_minus: c.r0_minus,
        }
    }

    /// `[z, z', z'']` of one branch's formula at `r`, regardless of its range.
    fn branch(&self, region: Region, sheet: Sheet, r: f64) -> [f64; 3] {
        let e = self.eps;
        let e2 = e * e;
        let s = sheet.sign();
        let r0 = match sheet {
            Sheet::Plus => self.r_plus,
            Sheet::Minus => self.r_minus,
        };
        match region {
            Region::Catenoid => {
                let q = (r * r - e2 * e2).max(0.0);
                [
                    self.level + s * e2 * (r / e2).acosh(),
                    s * e2 / q.sqrt(),
                    -s * e2 * r / q.powf(1.5),
                ]
            }
            Region::FirstGluing => {
                let x = r - 2.0 * e;
                [
                    self.level + s * (self.a1 * x.powi(3) + self.a2 * x.powi(4) + self.a0),
                    s * (3.0 * self.a1 * x * x + 4.0 * self.a2 * x.powi(3)),
                    s * (6.0 * self.a1 * x + 12.0 * self.a2 * x * x),
                ]
            }
            Region::SecondGluing => {
                let x = r - 2.0 * e;
                let b1 = 1.0 / (3.0 * e * r0);
                let b2 = -1.0 / (4.0 * e2 * r0);
                [
                    self.level + b1 * x.powi(3) + b2 * x.powi(4) + s * self.a0,
                    3.0 * b1 * x * x + 4.0 * b2 * x.powi(3),
                    6.0 * b1 * x + 12.0 * b2 * x * x,
                ]
            }
            Region::Sphere | Region::Cap => {
                let y = r - 3.0 * e;
                let z = (r0 * r0 - y * y).max(0.0).sqrt();
                [z, -y / z, -r0 * r0 / z.powi(3)]
            }
        }
    }
}

/// Height of the given sheet at distance `r` from the axis.
pub fn profile(coeffs: &ProfileCoefficients, sheet: Sheet, r: f64) -> Result<f64> {
    let region = coeffs.region(sheet, r)?;
    Ok(Junction::standard(coeffs).branch(region, sheet, r)[0])
}

/// Leading-order principal curvatures `(κ_mer, κ_par)` from the sign table in
/// the module docs.
pub fn analytic_regional_curvatures(coeffs: &ProfileCoefficients, sheet: Sheet, r: f64) -> Result<(f64, f64)> {
    let e = coeffs.eps;
    let s = sheet.sign();
    Ok(match coeffs.region(sheet, r)? {
        Region::Catenoid => (e * e / (r * r), -e * e / (r * r)),
        Region::FirstGluing => {
            let t = r / e - 1.0;
            (1.0 + 2.0 * t - 3.0 * t * t, -(1.0 - t) * (1.0 - t))
        }
        Region::SecondGluing => {
            let t = r / e - 2.0;
            (s * (-2.0 * t + 3.0 * t * t), s * (-t * t + t.powi(3)) / (2.0 + t))
        }
        _ => (s, s * (1.0 - 3.0 * e / r)),
    })
}

/// Exact principal curvatures `(κ_mer, κ_par)` of the profile, same
/// orientation as [`analytic_regional_curvatures`].
pub fn exact_regional_curvatures(coeffs: &ProfileCoefficients, sheet: Sheet, r: f64) -> Result<(f64, f64)> {
    let s = sheet.sign();
    let region = coeffs.region(sheet, r)?;
    if region == Region::Sphere {
        let r0 = coeffs.r0(sheet);
        return Ok((s / r0, s * (1.0 - 3.0 * coeffs.eps / r) / r0));
    }
    let [_, d1, d2] = Junction::standard(coeffs).branch(region, sheet, r);
    let w = (1.0 + d1 * d1).sqrt();
    Ok((-s * d2 / w.powi(3), -s * d1 / (r * w)))
}

/// `∫_{N_ε} |B|^q` over both catenoid sheets, by quadrature in `r`.
///
/// The substitution `r = ε² + u²` removes the square-root singularity at
/// the waist; composite Simpson on 4000 panels follows.
pub fn neck_bq_quadrature(eps: f64, q: f64) -> f64 {
    let e4 = eps.powi(4);
    let umax = (eps - eps * eps).sqrt();
    let g = |u: f64| {
        let r = eps * eps + u * u;
        // dμ = r²/√(r²−ε⁴) dr dθ and dr = 2u du
        (2.0 * e4 / r.powi(4)).powf(0.5 * q) * r * r * 2.0 / (r + eps * eps).sqrt()
    };
    let n = 4000;
    let h = umax / n as f64;
    let mut s = g(0.0) + g(umax);
    for k in 1..n {
        s += g(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * 2.0 * PI * s * h / 3.0
}

/// `∫_{N_ε} |B|² = 8π √(1 − ε²)`, cross-checked against [`neck_bq_quadrature`].
pub fn neck_b2_integral(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::domain(format!("eps must lie in (0, 0.25], got {eps}")));
    }
    let exact = 8.0 * PI * (1.0 - eps * eps).sqrt();
    let quad = neck_bq_quadrature(eps, 2.0);
    if (quad / exact - 1.0).abs() > 5e-3 {
        return Err(Error::Numerical(format!("neck quadrature {quad} disagrees with 8π√(1−ε²) = {exact}")));
    }
    Ok(exact)
}

/// Logarithmic cutoff: 0 below `ε`, 1 above `√ε`, `log(s/ε)/log(ε^{-1/2})`
/// in between.
///
/// # Panics
/// If `eps` is not in `(0, 1)`.
pub fn courtois_cutoff(eps: f64, s: f64) -> f64 {
    assert!(eps > 0.0 && eps < 1.0, "cutoff scale must lie in (0, 1)");
    if s <= eps {
        0.0
    } else if s >= eps.sqrt() {
        1.0
    } else {
        -2.0 / eps.ln() * (s / eps).ln()
    }
}

/// Upper bound `8π(1+ε)/|log ε|` on the Dirichlet energy of the cutoff test
/// function, from `r ≤ (1+ε) d` on the ramp.
pub fn courtois_dirichlet_bound(eps: f64) -> f64 {
    8.0 * PI * (1.0 + eps) / eps.ln().abs()
}

/// Family parameters: `l` necks between each pair, `p` spheres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyParams {
    pub eps: f64,
    pub l: u32,
    pub p: u32,
    pub n_r: usize,
    pub n_theta: usize,
}

impl FamilyParams {
    /// One neck, two spheres, resolution `(128, 128)`.
    pub fn new(eps: f64) -> Self {
        FamilyParams { eps, l: 1, p: 2, n_r: 128, n_theta: 128 }
    }

    pub fn with_resolution(mut self, n_r: usize, n_theta: usize) -> Self {
        self.n_r = n_r;
        self.n_theta = n_theta;
        self
    }
}

/// A built family member with its per-vertex labels.
#[derive(Debug, Clone)]
pub struct GluedMesh {
    pub mesh: SurfaceMesh,
    pub coeffs: ProfileCoefficients,
    pub params: FamilyParams,
    /// Index of the sphere each vertex belongs to, counted from the outside.
    pub sphere: Vec<usize>,
    pub region: Vec<Region>,
    /// Distance to the axis.
    pub axis_distance: Vec<f64>,
    /// `+1` before the first throat along the meridian, `−1` after, `0` on it.
    pub half: Vec<i8>,
    /// Vertices of the first throat ring.
    pub throat: Vec<usize>,
    /// Fewest meridian samples on one side of a neck, throat included.
    pub neck_rings: usize,
    /// Smallest `4√3·area / Σ l²` over all faces (1 for equilateral).
    pub min_quality: f64,
    /// Largest `l_max / h_min` over faces inside the necks.
    pub max_neck_aspect: f64,
}

impl GluedMesh {
    /// Sheet of a vertex in the two-sphere family.
    pub fn sheet(&self, v: usize) -> Sheet {
        if self.sphere[v].is_multiple_of(2) {
            Sheet::Plus
        } else {
            Sheet::Minus
        }
    }

    /// True for vertices in region (i).
    pub fn neck_mask(&self) -> Vec<bool> {
        self.region.iter().map(|r| *r == Region::Catenoid).collect()
    }

    /// `Σ_{neck} a_v |B|_v^q`, the discrete counterpart of [`neck_bq_quadrature`].
    pub fn neck_bq_discrete(&self, field: &CurvatureField, measure: &VertexMeasure, q: f64) -> f64 {
        self.region
            .iter()
            .zip(&field.b_norm)
            .zip(&measure.dual_area)
            .filter(|((r, _), _)| **r == Region::Catenoid)
            .map(|((_, b), a)| a * b.powf(q))
            .sum()
    }

    /// Mean relative error of the discrete `|B|` against `√2 ε²/r²` on the necks.
    pub fn neck_b_error(&self, field: &CurvatureField) -> f64 {
        let e2 = self.coeffs.eps.powi(2);
        let (mut sum, mut count) = (0.0, 0usize);
        for v in 0..self.region.len() {
            if self.region[v] == Region::Catenoid {
                let r = self.axis_distance[v];
                let exact = 2f64.sqrt() * e2 / (r * r);
                sum += (field.b_norm[v] / exact - 1.0).abs();
                count += 1;
            }
        }
        sum / count.max(1) as f64
    }
}

struct Piece {
    f: Box<dyn Fn(f64) -> [f64; 2]>,
    t0: f64,
    t1: f64,
    sphere: usize,
    region: Region,
    floor: f64,
}

/// Samples a piece so consecutive points are about `spacing(r)` apart.
fn sample_piece(piece: &Piece, spacing: &dyn Fn(f64) -> f64) -> Vec<[f64; 2]> {
    const N: usize = 4096;
    let ts: Vec<f64> = (0..=N).map(|i| piece.t0 + (piece.t1 - piece.t0) * i as f64 / N as f64).collect();
    let pts: Vec<[f64; 2]> = ts.iter().map(|t| (piece.f)(*t)).collect();
    let mut cost = vec![0.0; N + 1];
    for i in 1..=N {
        let ds = (pts[i][0] - pts[i - 1][0]).hypot(pts[i][1] - pts[i - 1][1]);
        let rm = 0.5 * (pts[i][0] + pts[i - 1][0]);
        cost[i] = cost[i - 1] + ds / spacing(rm.max(piece.floor));
    }
    let m = (cost[N].ceil() as usize).max(1);
    let mut out = Vec::with_capacity(m + 1);
    out.push(pts[0]);
    let mut i = 1;
    for k in 1..m {
        let target = cost[N] * k as f64 / m as f64;
        while cost[i] < target {
            i += 1;
        }
        let w = (target - cost[i - 1]) / (cost[i] - cost[i - 1]);
        out.push((piece.f)(ts[i - 1] + w * (ts[i] - ts[i - 1])));
    }
    out.push(pts[N]);
    out
}

/// Builds the meridian of the family and revolves it.
///
/// Spacing along the meridian is `min(2π/n_r, (√3/2)(2π/n_θ)·r)`, so rings
/// grade geometrically into the neck and triangles stay near equilateral
/// wherever the first term is inactive. For `p > 2` the spheres nest with
/// levels `1 + a₀ − 2k·a₀`, and consecutive necks alternate between the north
/// and south poles.
pub fn build_mesh(params: &FamilyParams) -> Result<GluedMesh> {
    let c = coefficients(params.eps)?;
    let eps = params.eps;
    let l_max = (1.0 / eps).ln().sqrt().ceil() as u32;
    if params.l < 1 || params.l > l_max {
        return Err(Error::domain(format!("neck count l must lie in [1, {l_max}], got {}", params.l)));
    }
    if params.l > 1 {
        return Err(Error::NotImplemented(
            "several necks between one pair of spheres: no placement rule is available".into(),
        ));
    }
    if params.p < 2 {
        return Err(Error::domain(format!("need at least two spheres, got p = {}", params.p)));
    }
    if params.n_r < 64 || params.n_theta < 16 {
        return Err(Error::Resolution(format!(
            "need n_r ≥ 64 and n_theta ≥ 16, got ({}, {})",
            params.n_r, params.n_theta
        )));
    }
    let p = params.p as usize;
    let levels: Vec<f64> = (0..p).map(|k| 1.0 + c.a0 - 2.0 * k as f64 * c.a0).collect();
    if levels[p - 1] < 0.5 {
        return Err(Error::domain(format!("{p} nested spheres do not fit at eps = {eps}")));
    }
    let radii: Vec<f64> = levels.iter().map(|l| sphere_radius(*l, eps)).collect();

    let e3 = 3.0 * eps;
    let tmax = (1.0 / eps).acosh();
    let mut pieces: Vec<Piece> = Vec::new();
    let mut throat_piece = None;
    let r_first = radii[0];
    pieces.push(Piece {
        f: Box::new(move |t| [t, -r_first]),
        t0: 0.0,
        t1: e3,
        sphere: 0,
        region: Region::Cap,
        floor: 0.75 * e3,
    });
    for k in 0..p {
        let rk = radii[k];
        let from_south = k % 2 == 0;
        let (p0, p1) = if from_south { (-PI / 2.0, PI / 2.0) } else { (PI / 2.0, -PI / 2.0) };
        pieces.push(Piece {
            f: Box::new(move |t| [e3 + rk * t.cos(), rk * t.sin()]),
            t0: p0,
            t1: p1,
            sphere: k,
            region: Region::Sphere,
            floor: 0.0,
        });
        if k + 1 == p {
            let z = if from_south { rk } else { -rk };
            pieces.push(Piece {
                f: Box::new(move |t| [t, z]),
                t0: e3,
                t1: 0.0,
                sphere: k,
                region: Region::Cap,
                floor: 0.75 * e3,
            });
            break;
        }
        let j = Junction {
            level: levels[k] - c.a0,
            r_plus: radii[k],
            r_minus: radii[k + 1],
            ..Junction::standard(&c)
        };
        let flip = if from_south { 1.0 } else { -1.0 };
        for (region, t0, t1) in [(Region::SecondGluing, e3, 2.0 * eps), (Region::FirstGluing, 2.0 * eps, eps)] {
            pieces.push(Piece {
                f: Box::new(move |r| [r, flip * j.branch(region, Sheet::Plus, r)[0]]),
                t0,
                t1,
                sphere: k,
                region,
                floor: 0.0,
            });
        }
        let e2 = eps * eps;
        let lvl = j.level;
        for (sphere, t0, t1) in [(k, tmax, 0.0), (k + 1, 0.0, -tmax)] {
            pieces.push(Piece {
                f: Box::new(move |t| [e2 * t.cosh(), flip * (lvl + e2 * t)]),
                t0,
                t1,
                sphere,
                region: Region::Catenoid,
                floor: 0.0,
            });
        }
        if k == 0 {
            throat_piece = Some(pieces.len() - 2);
        }
        for (region, t0, t1) in [(Region::FirstGluing, eps, 2.0 * eps), (Region::SecondGluing, 2.0 * eps, e3)] {
            pieces.push(Piece {
                f: Box::new(move |r| [r, flip * j.branch(region, Sheet::Minus, r)[0]]),
                t0,
                t1,
                sphere: k + 1,
                region,
                floor: 0.0,
            });
        }
    }

    let coarse = 2.0 * PI / params.n_r as f64;
    let fine = 0.5 * 3f64.sqrt() * 2.0 * PI / params.n_theta as f64;
    let spacing = move |r: f64| coarse.min(fine * r);
    let mut curve: Vec<[f64; 2]> = Vec::new();
    let mut labels: Vec<(usize, Region)> = Vec::new();
    let mut throat_sample = 0;
    for (i, piece) in pieces.iter().enumerate() {
        let pts = sample_piece(piece, &spacing);
        let skip = if i == 0 { 0 } else { 1 };
        for q in &pts[skip..] {
            curve.push(*q);
            labels.push((piece.sphere, piece.region));
        }
        if Some(i) == throat_piece {
            throat_sample = curve.len() - 1;
        }
    }
    // the sampled endpoints at the axis are exact zeros
    let last = curve.len() - 1;
    curve[0][0] = 0.0;
    curve[last][0] = 0.0;

    // each neck is one run of catenoid samples split by its throat
    let mut neck_rings = usize::MAX;
    let mut s = 0;
    while s < labels.len() {
        if labels[s].1 != Region::Catenoid {
            s += 1;
            continue;
        }
        let start = s;
        while s < labels.len() && labels[s].1 == Region::Catenoid {
            s += 1;
        }
        let waist = (start..s).min_by(|a, b| curve[*a][0].total_cmp(&curve[*b][0])).unwrap();
        neck_rings = neck_rings.min(waist - start + 1).min(s - waist);
    }
    if neck_rings < 8 {
        return Err(Error::Resolution(format!(
            "neck under-resolved: {neck_rings} rings in [ε², ε]; raise n_theta"
        )));
    }

    let model = AmbientModel::euclidean();
    let mesh = crate::mesh::generate::generate_revolution(&model, &curve, params.n_theta)?;
    let nt = params.n_theta;
    let mut sphere = Vec::with_capacity(mesh.n_vertices());
    let mut region = Vec::with_capacity(mesh.n_vertices());
    let mut axis_distance = Vec::with_capacity(mesh.n_vertices());
    let mut half = Vec::with_capacity(mesh.n_vertices());
    let mut throat = Vec::new();
    for (s, (q, lab)) in curve.iter().zip(&labels).enumerate() {
        let count = if q[0] == 0.0 { 1 } else { nt };
        let side = match s.cmp(&throat_sample) {
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => -1,
        };
        if s == throat_sample {
            throat.extend(sphere.len()..sphere.len() + count);
        }
        for _ in 0..count {
            sphere.push(lab.0);
            region.push(lab.1);
            axis_distance.push(q[0]);
            half.push(side);
        }
    }

    let mut min_quality = f64::INFINITY;
    let mut max_neck_aspect: f64 = 0.0;
    for (f, face) in mesh.faces().iter().enumerate() {
        let l = mesh.face_lengths(f);
        let area = heron(l);
        min_quality = min_quality.min(mesh.face_quality(f));
        if face.iter().all(|v| region[*v] == Region::Catenoid) {
            let lmax = l.iter().cloned().fold(0.0, f64::max);
            max_neck_aspect = max_neck_aspect.max(lmax * lmax / (2.0 * area));
        }
    }

    Ok(GluedMesh {
        mesh,
        coeffs: c,
        params: *params,
        sphere,
        region,
        axis_distance,
        half,
        throat,
        neck_rings,
        min_quality,
        max_neck_aspect,
    })
}

/// `f = f₀ · χ_ε(d)`, with `f₀ = ±1` on the two halves and `d` the edge-graph
/// distance to the throat ring.
pub fn test_function(glued: &GluedMesh) -> Result<Vec<f64>> {
    let n = glued.mesh.n_vertices();
    if glued.half.len() != n || glued.throat.is_empty() {
        return Err(Error::domain("mesh carries no half-labeling"));
    }
    let d = glued.mesh.graph_distances(&glued.throat);
    let eps = glued.params.eps;
    Ok(glued.half.iter().zip(&d).map(|(h, d)| *h as f64 * courtois_cutoff(eps, *d)).collect())
}

/// Discrete Rayleigh quotient of [`test_function`], an upper bound for `λ₁`.
pub fn lambda1_upper_bound_via_test_function(glued: &GluedMesh) -> Result<f64> {
    let f = test_function(glued)?;
    let op = assemble(&glued.mesh)?;
    Ok(rayleigh_quotient(&op, &f)?.value)
}

/// Which part of the surface a curvature norm is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormScope {
    /// The whole surface.
    Surface,
    /// Only the catenoid region, still normalized by the total area.
    Neck,
}

/// `‖B‖_q` across a sweep and its log–log slope against `ε`.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupRate {
    pub eps: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Normalized `‖B‖_q` of a built family member over the given scope.
pub fn glued_norm_bq(glued: &GluedMesh, field: &CurvatureField, measure: &VertexMeasure, q: f64, scope: NormScope) -> Result<f64> {
    match scope {
        NormScope::Surface => crate::curvature::norm_b_q(field, measure, q),
        NormScope::Neck => {
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::domain(format!("q must be positive and finite, got {q}")));
            }
            Ok((glued.neck_bq_discrete(field, measure, q) / measure.total()).powf(1.0 / q))
        }
    }
}

/// Measures `‖B‖_q` on each family member and fits the log–log slope.
///
/// Fails with a resolution error when the discrete neck curvature is more
/// than 10% off the catenoid's on average.
pub fn bq_blowup_rate(eps_list: &[f64], q: f64, resolution: (usize, usize), scope: NormScope) -> Result<BlowupRate> {
    if eps_list.len() < 3 {
        return Err(Error::domain("need at least three values of eps"));
    }
    if q == 2.0 {
        return Err(Error::domain("q = 2 is scale invariant; there is no rate to fit"));
    }
    let mut norms = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let g = build_mesh(&FamilyParams::new(eps).with_resolution(resolution.0, resolution.1))?;
        let field = crate::curvature::shape_operator(&g.mesh)?;
        let err = g.neck_b_error(&field);
        if err > 0.1 {
            return Err(Error::Resolution(format!(
                "discrete neck curvature is {:.1}% off the catenoid at eps = {eps}",
                100.0 * err
            )));
        }
        norms.push(glued_norm_bq(&g, &field, &g.mesh.vertex_measures(), q, scope)?);
    }
    let lx: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    Ok(BlowupRate { eps: eps_list.to_vec(), norms, slope: fit_slope(&lx, &ly) })
}
