//! Pinching diagnostics and the assembled report.
//!
//! Every normalized integral is a mass-weighted mean `(1/|M|) Σ a_v f_v` with
//! barycentric dual areas `a_v`. Sums run sequentially over collected
//! per-vertex values so reports are reproducible bit for bit.

use serde::Serialize;

use crate::barycenter::{position_field, solve_center, CenterOptions, PositionField};
use crate::curvature::{h_infty, mean_curvature, norm_b_q, shape_operator};
use crate::error::{Error, Result, StageExt};
use crate::mesh::hausdorff::hausdorff_to_geodesic_sphere;
use crate::mesh::{SurfaceMesh, VertexMeasure};
use crate::spaceform::{
    c_delta_unchecked, cot_delta_unchecked, s_delta_inverse, s_delta_unchecked, CurvatureParam, Point,
};
use crate::spectral::{assemble, lambda1};

/// Spectral defect and the comparison radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPinch {
    /// `n(δ + ‖H‖∞²)/λ₁ − 1`, signed.
    pub eps_spec: f64,
    /// `s_δ⁻¹(1/√(δ + ‖H‖∞²))`.
    pub r0: f64,
}

/// Compares `λ₁` with `n(δ + ‖H‖∞²)`.
pub fn spectral_pinch(lambda1: f64, h_infty: f64, delta: f64, n: usize) -> Result<SpectralPinch> {
    if !(lambda1 > 0.0) {
        return Err(Error::domain(format!("lambda1 must be positive, got {lambda1}")));
    }
    let k = delta + h_infty * h_infty;
    if !(k > 0.0) {
        return Err(Error::Hypothesis(format!(
            "δ + ‖H‖∞² = {k:e} is not positive; no comparison sphere exists"
        )));
    }
    Ok(SpectralPinch {
        eps_spec: n as f64 * k / lambda1 - 1.0,
        r0: s_delta_inverse(CurvatureParam::new(delta)?, 1.0 / k.sqrt())?,
    })
}

/// Mean square of the position vector and its defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L2Pinch {
    /// `h²‖X‖₂² − 1`.
    pub eps_l2: f64,
    /// `‖X‖₂`.
    pub x_l2: f64,
}

pub fn l2_pinch(mesh: &SurfaceMesh, field: &PositionField, measure: &VertexMeasure, h: f64) -> L2Pinch {
    let sq: Vec<f64> = field.x_norm(mesh).iter().map(|x| x * x).collect();
    let m = measure.mean(&sq);
    L2Pinch { eps_l2: h * h * m - 1.0, x_l2: m.sqrt() }
}

/// Size of the tangential part of `X` against `2 max(ε_L2, 0)/‖H‖∞²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentialCheck {
    pub xtan_l2sq: f64,
    pub bound: f64,
    pub ok: bool,
}

pub fn tangential_bound_check(
    mesh: &SurfaceMesh,
    field: &PositionField,
    measure: &VertexMeasure,
    h_infty: f64,
    eps_l2: f64,
    slack: f64,
) -> TangentialCheck {
    let sq: Vec<f64> = field.x_tan.iter().map(|t| mesh.ambient().inner(t, t)).collect();
    let xtan_l2sq = measure.mean(&sq);
    let bound = 2.0 * eps_l2.max(0.0) / (h_infty * h_infty);
    TangentialCheck { xtan_l2sq, bound, ok: xtan_l2sq <= bound + slack }
}

/// `ψ = |X|^{1/2} · ||X| − 1/h|` per vertex.
#[derive(Debug, Clone, Serialize)]
pub struct PsiField {
    pub psi: Vec<f64>,
    pub psi_infty: f64,
    /// `max | h|X| − 1 |`.
    pub position_dev: f64,
}

pub fn psi_field(mesh: &SurfaceMesh, field: &PositionField, h: f64) -> Result<PsiField> {
    if !(h > 0.0) {
        return Err(Error::domain(format!("h must be positive, got {h}")));
    }
    let norms = field.x_norm(mesh);
    let psi: Vec<f64> = norms.iter().map(|x| x.sqrt() * (x - 1.0 / h).abs()).collect();
    Ok(PsiField {
        psi_infty: psi.iter().cloned().fold(0.0, f64::max),
        position_dev: norms.iter().map(|x| (h * x - 1.0).abs()).fold(0.0, f64::max),
        psi,
    })
}

/// `∫ (c_δ(r) − |H| s_δ(r))`, which is nonpositive for closed hypersurfaces.
pub fn heintze_integrated_defect(mesh: &SurfaceMesh, measure: &VertexMeasure, field: &PositionField, h: &[f64]) -> f64 {
    let d = mesh.ambient().curvature();
    let f: Vec<f64> = field
        .r
        .iter()
        .zip(h)
        .map(|(r, hv)| c_delta_unchecked(d, *r) - hv.abs() * s_delta_unchecked(d, *r))
        .collect();
    measure.integral(&f)
}

/// Ambient `Δr` on the mesh and its mean deviation from the sphere value.
#[derive(Debug, Clone, Serialize)]
pub struct LaplaceDeviation {
    /// `Δr = n c_δ(r)/s_δ(r)` at each vertex.
    pub delta_r: Vec<f64>,
    /// `(1/|M|) ∫ |c_δ/s_δ(R₀) − Δr/n|`.
    pub deviation: f64,
}

/// Uses the Laplacian of `r` in the ambient space form, which is exactly
/// `n c_δ/s_δ(r)`.
pub fn laplace_deviation(mesh: &SurfaceMesh, measure: &VertexMeasure, field: &PositionField, r0: f64) -> Result<LaplaceDeviation> {
    let model = mesh.ambient();
    let d = model.curvature();
    let n = model.surface_dim() as f64;
    if let Some(i) = field.r.iter().position(|r| *r < 1e-12) {
        return Err(Error::Degenerate(format!("vertex {i} sits at the center")));
    }
    let delta_r: Vec<f64> = field.r.iter().map(|r| n * cot_delta_unchecked(d, *r)).collect();
    let target = cot_delta_unchecked(d, r0);
    let dev: Vec<f64> = delta_r.iter().map(|x| (target - x / n).abs()).collect();
    Ok(LaplaceDeviation { deviation: measure.mean(&dev), delta_r })
}

/// Mean squares of `Y = ‖H‖∞² X − H c_δ ν` and
/// `W = |X|^{1/2}(δX + H c_δ ν − h X/|X|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YwNorms {
    pub y_l2sq: f64,
    pub w_l2sq: f64,
}

pub fn yw_diagnostics(
    mesh: &SurfaceMesh,
    measure: &VertexMeasure,
    field: &PositionField,
    h_vals: &[f64],
    h: f64,
    h_infty: f64,
) -> YwNorms {
    let model = mesh.ambient();
    let d = model.curvature();
    let (mut ys, mut ws) = (Vec::with_capacity(h_vals.len()), Vec::with_capacity(h_vals.len()));
    for (i, &hv) in h_vals.iter().enumerate() {
        let x = field.x[i];
        let nu = field.normals[i];
        let c = c_delta_unchecked(d, field.r[i]);
        let y = x * (h_infty * h_infty) - nu * (hv * c);
        let xn = model.norm(&x);
        let w = (x * d + nu * (hv * c) - x * (h / xn)) * xn.sqrt();
        ys.push(model.inner(&y, &y));
        ws.push(model.inner(&w, &w));
    }
    YwNorms { y_l2sq: measure.mean(&ys), w_l2sq: measure.mean(&ws) }
}

/// Distortion of the radial projection onto `S(p0, R₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionDistortion {
    /// `max |∇^M r|`.
    pub grad_r_infty: f64,
    /// `max over edges of |(projected length / length)² − 1|`.
    pub distortion: f64,
    /// `⟨∇r, ν⟩ > 0` at every vertex.
    pub star_shaped: bool,
}

pub fn radial_projection_distortion(mesh: &SurfaceMesh, field: &PositionField, p0: &Point, r0: f64) -> Result<ProjectionDistortion> {
    let model = mesh.ambient();
    let d = model.curvature();
    let projected: Vec<Point> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let v = model.log(p0, x);
            let l = model.norm(&v);
            if l < 1e-14 {
                return Err(Error::Degenerate(format!("vertex {i} sits at the center")));
            }
            Ok(model.exp(p0, &(v * (r0 / l))))
        })
        .collect::<Result<_>>()?;
    let mut distortion: f64 = 0.0;
    for [a, b] in mesh.edges() {
        let l = mesh.edge_length(a, b);
        let lp = model.distance(&projected[a], &projected[b]);
        distortion = distortion.max(((lp / l).powi(2) - 1.0).abs());
    }
    let star_shaped = field
        .x
        .iter()
        .zip(&field.normals)
        .all(|(x, nu)| model.inner(x, nu) > 0.0);
    let grad_r_infty = field
        .x_tan
        .iter()
        .zip(&field.r)
        .map(|(t, r)| model.norm(t) / s_delta_unchecked(d, *r))
        .fold(0.0, f64::max);
    Ok(ProjectionDistortion { grad_r_infty, distortion, star_shaped })
}

/// Settings for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchOptions {
    /// Relative residual target of the eigensolver.
    pub eig_tol: f64,
    pub center: CenterOptions,
    /// Additive slack in the inequality checks.
    pub slack: f64,
    /// Bound `A` in `|M|^{1/n} ‖H‖∞ ≤ A`; only flagged when set.
    pub area_bound: Option<f64>,
}

impl Default for PinchOptions {
    fn default() -> Self {
        PinchOptions { eig_tol: 1e-10, center: CenterOptions::default(), slack: 0.02, area_bound: None }
    }
}

/// Hypothesis and inequality checks recorded in a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// The mesh reaches past `π/(4√δ)` from the center.
    OutsideConvexityRadius,
    /// The enclosing radius exceeds `π/(8√δ)`.
    EnclosingRadiusTooLarge,
    /// `|M|^{1/n} ‖H‖∞` exceeds the configured bound.
    AreaCurvatureBound,
    NotStarShaped,
    /// Some cotangent weights were clamped to zero.
    ClampedEdges,
    /// `eps_spec` is below `−slack`.
    SpectralBoundViolated,
    /// `‖H‖∞ < c_δ/s_δ(2R)` beyond 3%.
    MeanCurvatureBelowSupport,
    /// `‖H‖∞/h` outside `[min(1, c_δ(2R)), max(1, c_δ(2R))]` beyond 3%.
    MeanCurvatureRatio,
    /// `h²‖X‖₂²` outside `[1, 1 + 4 eps_spec]` beyond the slack.
    L2PinchChain,
    /// `‖X^⊤‖₂²` above `2 eps_L2/‖H‖∞²` plus slack.
    TangentialBound,
    /// `eps_spec > 1/2`; the L² checks are not evaluated.
    LargeDefect,
}

/// All scalar diagnostics of one mesh.
#[derive(Debug, Clone, Serialize)]
pub struct PinchReport {
    pub schema: &'static str,
    pub n_vertices: usize,
    pub n_faces: usize,
    pub area: f64,
    pub delta: f64,
    pub dim: usize,
    pub lambda1: f64,
    pub eig_residual: f64,
    pub clamped_edges: usize,
    pub h_infty: f64,
    pub b_l2: f64,
    pub b_infty: f64,
    pub h: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub eps_spec: f64,
    #[serde(rename = "eps_L2")]
    pub eps_l2: f64,
    #[serde(rename = "X_l2")]
    pub x_l2: f64,
    #[serde(rename = "Xtan_l2sq")]
    pub xtan_l2sq: f64,
    #[serde(rename = "Xtan_bound")]
    pub xtan_bound: f64,
    pub psi_infty: f64,
    pub position_dev: f64,
    pub heintze_defect: f64,
    pub laplace_dev: f64,
    #[serde(rename = "Y_l2sq")]
    pub y_l2sq: f64,
    #[serde(rename = "W_l2sq")]
    pub w_l2sq: f64,
    pub grad_r_infty: f64,
    pub hausdorff: f64,
    #[serde(rename = "dF_distortion")]
    pub df_distortion: f64,
    pub center: [f64; 4],
    pub center_iterations: usize,
    pub balance_residual: f64,
    /// Largest distance from the center to a vertex.
    pub enclosing_radius: f64,
    /// `c_δ/s_δ(2R)`, absent when `2R` reaches the conjugate radius.
    pub h_support_bound: Option<f64>,
    /// `‖H‖∞ / h`.
    pub h_ratio: f64,
    /// `|M|^{1/n} ‖H‖∞`.
    pub area_h_product: f64,
    pub flags: Vec<Flag>,
}

/// Per-vertex fields behind a report.
#[derive(Debug, Clone, Serialize)]
pub struct VertexFields {
    pub h: Vec<f64>,
    pub b_norm: Vec<f64>,
    pub x_norm: Vec<f64>,
    pub psi: Vec<f64>,
    pub delta_r: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: PinchReport,
    pub fields: VertexFields,
}

pub const REPORT_SCHEMA: &str = "pinchlab-report/1";

/// Runs every stage on a closed mesh. Errors carry the name of the failing
/// stage.
pub fn analyze(mesh: &SurfaceMesh, opts: &PinchOptions) -> Result<Analysis> {
    if !mesh.is_closed() {
        return Err(Error::InvalidMesh("the report needs a closed mesh".into())).stage("input");
    }
    let model = mesh.ambient();
    let n = model.surface_dim();
    let delta = model.curvature();
    let measure = mesh.vertex_measures();

    let op = assemble(mesh).stage("spectral")?;
    let eig = lambda1(&op, opts.eig_tol).stage("spectral")?;

    let h_vals = mean_curvature(mesh).stage("curvature")?;
    let h_inf = h_infty(&h_vals);
    let shape = shape_operator(mesh).stage("curvature")?;
    let b_l2 = norm_b_q(&shape, &measure, 2.0).stage("curvature")?;
    let b_infty = norm_b_q(&shape, &measure, f64::INFINITY).stage("curvature")?;

    let sp = spectral_pinch(eig.lambda1, h_inf, delta, n).stage("pinch")?;
    let h = (delta + h_inf * h_inf).sqrt();

    let center = solve_center(mesh, &measure, &opts.center).stage("center")?;
    let field = position_field(mesh, &center.p0).stage("position")?;

    let l2 = l2_pinch(mesh, &field, &measure, h);
    let tan = tangential_bound_check(mesh, &field, &measure, h_inf, l2.eps_l2, opts.slack);
    let psi = psi_field(mesh, &field, h).stage("pinch")?;
    let heintze = heintze_integrated_defect(mesh, &measure, &field, &h_vals);
    let lap = laplace_deviation(mesh, &measure, &field, sp.r0).stage("pinch")?;
    let yw = yw_diagnostics(mesh, &measure, &field, &h_vals, h, h_inf);
    let hausdorff = hausdorff_to_geodesic_sphere(mesh, &center.p0, sp.r0).stage("hausdorff")?;
    let proj = radial_projection_distortion(mesh, &field, &center.p0, sp.r0).stage("projection")?;

    let radius = center.extent;
    let max_r = model.delta().max_radius();
    let support = (2.0 * radius < max_r).then(|| cot_delta_unchecked(delta, 2.0 * radius));
    let h_ratio = h_inf / h;
    let area = measure.total();
    let area_h_product = area.powf(1.0 / n as f64) * h_inf;

    let mut flags = Vec::new();
    if !center.within_convexity_radius {
        flags.push(Flag::OutsideConvexityRadius);
    }
    // relative tolerance so a sphere of radius exactly π/(8√δ) passes
    if delta > 0.0 && radius > std::f64::consts::PI / (8.0 * delta.sqrt()) * (1.0 + 1e-9) {
        flags.push(Flag::EnclosingRadiusTooLarge);
    }
    if opts.area_bound.is_some_and(|a| area_h_product > a) {
        flags.push(Flag::AreaCurvatureBound);
    }
    if !proj.star_shaped {
        flags.push(Flag::NotStarShaped);
    }
    if op.clamped_edges() > 0 {
        flags.push(Flag::ClampedEdges);
    }
    if sp.eps_spec < -opts.slack {
        flags.push(Flag::SpectralBoundViolated);
    }
    if let Some(lower) = support {
        if h_inf < lower * 0.97 {
            flags.push(Flag::MeanCurvatureBelowSupport);
        }
        let c2 = c_delta_unchecked(delta, 2.0 * radius);
        if h_ratio < 1f64.min(c2) - 0.03 || h_ratio > 1f64.max(c2) + 0.03 {
            flags.push(Flag::MeanCurvatureRatio);
        }
    }
    if sp.eps_spec <= 0.5 {
        let chain = h * h * l2.x_l2 * l2.x_l2;
        if chain < 1.0 - opts.slack || chain > 1.0 + 4.0 * sp.eps_spec + opts.slack {
            flags.push(Flag::L2PinchChain);
        }
        if !tan.ok {
            flags.push(Flag::TangentialBound);
        }
    } else {
        flags.push(Flag::LargeDefect);
    }

    let report = PinchReport {
        schema: REPORT_SCHEMA,
        n_vertices: mesh.n_vertices(),
        n_faces: mesh.n_faces(),
        area,
        delta,
        dim: n,
        lambda1: eig.lambda1,
        eig_residual: eig.residual,
        clamped_edges: op.clamped_edges(),
        h_infty: h_inf,
        b_l2,
        b_infty,
        h,
        r0: sp.r0,
        eps_spec: sp.eps_spec,
        eps_l2: l2.eps_l2,
        x_l2: l2.x_l2,
        xtan_l2sq: tan.xtan_l2sq,
        xtan_bound: tan.bound,
        psi_infty: psi.psi_infty,
        position_dev: psi.position_dev,
        heintze_defect: heintze,
        laplace_dev: lap.deviation,
        y_l2sq: yw.y_l2sq,
        w_l2sq: yw.w_l2sq,
        grad_r_infty: proj.grad_r_infty,
        hausdorff,
        df_distortion: proj.distortion,
        center: [center.p0[0], center.p0[1], center.p0[2], center.p0[3]],
        center_iterations: center.iterations,
        balance_residual: center.balance_residual,
        enclosing_radius: radius,
        h_support_bound: support,
        h_ratio,
        area_h_product,
        flags,
    };
    let fields = VertexFields {
        x_norm: field.x_norm(mesh),
        h: h_vals,
        b_norm: shape.b_norm,
        psi: psi.psi,
        delta_r: lap.delta_r,
    };
    Ok(Analysis { report, fields })
}

/// [`analyze`] without the per-vertex fields.
pub fn assemble_report(mesh: &SurfaceMesh, opts: &PinchOptions) -> Result<PinchReport> {
    analyze(mesh, opts).map(|a| a.report)
}
