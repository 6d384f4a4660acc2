//! Radial Riccati comparison and the quantitative rigidity certificate, plus
//! the weighted extrinsic volume monotonicity check.
//!
//! The Riccati quantity `ρ = J'/J` is obtained from the linear Jacobi equation
//! `J'' = -k(t) J`, `J(0) = 0`, `J'(0) = 1`, integrated with classical RK4 from
//! `t = 0`. This is equivalent to integrating `ρ' = -k - ρ²` but has no singular
//! start, so the scheme keeps its fourth order all the way down to `t → 0`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;
use crate::spaceform::{s_delta_unchecked, Point};

/// Shape of the radial sectional curvature `k(t)`.
#[derive(Clone)]
pub enum ProfileKind {
    Constant(f64),
    /// `μ` at `t = 0` rising linearly to `δ` at `t = R`.
    Linear,
    /// `δ − depth·exp(−((t − center)/width)²)`.
    Bump { center: f64, width: f64, depth: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::Constant(k) => write!(f, "Constant({k})"),
            ProfileKind::Linear => write!(f, "Linear"),
            ProfileKind::Bump { center, width, depth } => {
                write!(f, "Bump {{ center: {center}, width: {width}, depth: {depth} }}")
            }
            ProfileKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Radial curvature `k(t) ∈ [μ, δ]` on `[0, R]`.
#[derive(Debug, Clone)]
pub struct RadialCurvatureProfile {
    pub mu: f64,
    pub delta: f64,
    pub radius: f64,
    /// Hypersurface dimension entering the boundary hypothesis.
    pub n: usize,
    pub kind: ProfileKind,
}

impl RadialCurvatureProfile {
    /// Checks `μ ≤ δ`, `R > 0` and `μ ≤ k ≤ δ` on 1000 samples.
    ///
    /// `R` beyond the first conjugate point is accepted here; integration then
    /// reports the focal point.
    pub fn new(mu: f64, delta: f64, radius: f64, kind: ProfileKind) -> Result<Self> {
        if !(mu.is_finite() && delta.is_finite() && mu <= delta) {
            return Err(Error::domain(format!("need finite mu <= delta, got {mu}, {delta}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("radius must be positive, got {radius}")));
        }
        let p = RadialCurvatureProfile { mu, delta, radius, n: 2, kind };
        let slack = 1e-12 * (1.0 + mu.abs().max(delta.abs()));
        for i in 0..=1000 {
            let t = radius * i as f64 / 1000.0;
            let k = p.k(t);
            if !(k >= mu - slack && k <= delta + slack) {
                return Err(Error::domain(format!("k({t}) = {k} outside [{mu}, {delta}]")));
            }
        }
        Ok(p)
    }

    pub fn constant(k: f64, radius: f64) -> Result<Self> {
        Self::new(k, k, radius, ProfileKind::Constant(k))
    }

    pub fn linear(mu: f64, delta: f64, radius: f64) -> Result<Self> {
        Self::new(mu, delta, radius, ProfileKind::Linear)
    }

    pub fn bump(mu: f64, delta: f64, radius: f64, center: f64, width: f64, depth: f64) -> Result<Self> {
        if !(width > 0.0) || !(0.0..=delta - mu).contains(&depth) {
            return Err(Error::domain(format!("bad bump width {width} or depth {depth}")));
        }
        Self::new(mu, delta, radius, ProfileKind::Bump { center, width, depth })
    }

    pub fn k(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant(k) => *k,
            ProfileKind::Linear => self.mu + (self.delta - self.mu) * (t / self.radius),
            ProfileKind::Bump { center, width, depth } => {
                let z = (t - center) / width;
                self.delta - depth * (-z * z).exp()
            }
            ProfileKind::Custom(f) => f(t),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ProfileKind::Constant(k) => format!("constant(k={k})"),
            ProfileKind::Linear => format!("linear(mu={},delta={})", self.mu, self.delta),
            ProfileKind::Bump { center, width, depth } => {
                format!("bump(center={center:.6},width={width:.6},depth={depth:.6e})")
            }
            ProfileKind::Custom(_) => "custom".to_string(),
        }
    }
}

/// Radial Jacobi data on the grid `t_i = i·R/N`, `i = 1..=N`.
#[derive(Debug, Clone, Serialize)]
pub struct RiccatiSolution {
    pub grid: Vec<f64>,
    pub rho: Vec<f64>,
    pub j: Vec<f64>,
    pub j_prime: Vec<f64>,
    /// Auxiliary function started at `d0`.
    pub f_aux: Vec<f64>,
    pub d0: f64,
    pub mu: f64,
    pub delta: f64,
    pub n: usize,
    /// Largest violation of `c_δ/s_δ ≤ ρ ≤ c_μ/s_μ` on the grid.
    pub sandwich_violation: f64,
}

impl RiccatiSolution {
    pub fn radius(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// `ρ(R) − c_δ/s_δ(R)`.
    pub fn boundary_gap(&self) -> f64 {
        let r = self.radius();
        self.rho.last().unwrap() - cot(self.delta, r)
    }

    /// `J` at an arbitrary time by cubic Hermite interpolation.
    pub fn j_at(&self, t: f64) -> f64 {
        let i = self.grid.partition_point(|&g| g < t);
        let (t0, j0, d0) = if i == 0 { (0.0, 0.0, 1.0) } else { (self.grid[i - 1], self.j[i - 1], self.j_prime[i - 1]) };
        if i >= self.grid.len() {
            return j0;
        }
        let (t1, j1, d1) = (self.grid[i], self.j[i], self.j_prime[i]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * j0 + h10 * h * d0 + h01 * j1 + h11 * h * d1
    }

    /// `F(t) = (ρ − φ)·exp(∫_{d0}^t (ρ + φ)) = (ρ − φ)·J s_δ / (J(d0) s_δ(d0))`.
    ///
    /// `d0 = 0` returns the unnormalized product `(ρ − φ)·J s_δ`.
    pub fn f_aux_from(&self, d0: f64) -> Vec<f64> {
        let norm = if d0 > 0.0 { self.j_at(d0) * s_delta_unchecked(self.delta, d0) } else { 1.0 };
        self.grid
            .iter()
            .zip(&self.rho)
            .zip(&self.j)
            .map(|((&t, &rho), &j)| (rho - cot(self.delta, t)) * j * s_delta_unchecked(self.delta, t) / norm)
            .collect()
    }

    /// Rows `(t, rho, J, F_aux, s_delta(t), J/s_delta)`.
    pub fn rows(&self) -> Vec<[f64; 6]> {
        (0..self.grid.len())
            .map(|i| {
                let s = s_delta_unchecked(self.delta, self.grid[i]);
                [self.grid[i], self.rho[i], self.j[i], self.f_aux[i], s, self.j[i] / s]
            })
            .collect()
    }
}

fn cot(d: f64, t: f64) -> f64 {
    crate::spaceform::cot_delta_unchecked(d, t)
}

/// Integrates the Jacobi equation along the profile and derives `ρ` and `F`.
pub fn integrate_riccati(profile: &RadialCurvatureProfile, dt: f64) -> Result<RiccatiSolution> {
    let r = profile.radius;
    if !(dt > 0.0 && dt <= r / 1000.0) {
        return Err(Error::domain(format!("time step {dt} must lie in (0, R/1000] with R = {r}")));
    }
    let steps = (r / dt).ceil() as usize;
    let h = r / steps as f64;
    let rhs = |t: f64, y: [f64; 2]| [y[1], -profile.k(t) * y[0]];
    let mut y = [0.0, 1.0];
    let mut comp = [0.0f64; 2];
    let mut grid = Vec::with_capacity(steps);
    let mut j = Vec::with_capacity(steps);
    let mut jp = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, y);
        let k2 = rhs(t + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(t + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        // compensated update keeps ρ − c_δ/s_δ free of accumulated roundoff
        let mut next = y;
        for c in 0..2 {
            let inc = h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]) - comp[c];
            next[c] = y[c] + inc;
            comp[c] = (next[c] - y[c]) - inc;
        }
        if !(next[0] > 0.0) {
            // ρ → −∞ where J crosses zero
            let tz = if i == 0 { h } else { t + h * y[0] / (y[0] - next[0]) };
            return Err(Error::FocalPoint(tz));
        }
        y = next;
        grid.push((i + 1) as f64 * h);
        j.push(y[0]);
        jp.push(y[1]);
    }
    let rho: Vec<f64> = j.iter().zip(&jp).map(|(a, b)| b / a).collect();
    let (mu, delta) = (profile.mu, profile.delta);
    let sandwich_violation = grid
        .iter()
        .zip(&rho)
        .map(|(&t, &p)| {
            let lo = cot(delta, t);
            let hi = if mu > 0.0 && t >= std::f64::consts::PI / mu.sqrt() { f64::INFINITY } else { cot(mu, t) };
            (lo - p).max(p - hi).max(0.0) / (1.0 + lo.abs())
        })
        .fold(0.0f64, f64::max);
    let mut sol = RiccatiSolution {
        grid,
        rho,
        j,
        j_prime: jp,
        f_aux: Vec::new(),
        d0: (10.0 * h).max(1e-4 * r),
        mu,
        delta,
        n: profile.n,
        sandwich_violation,
    };
    sol.f_aux = sol.f_aux_from(sol.d0);
    Ok(sol)
}

/// Outcome of [`rigidity_certificate`].
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub ok: bool,
    pub eps: f64,
    /// `(ρ(R) − c_δ/s_δ(R)) / n`.
    pub boundary_defect: f64,
    pub d0: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub f_monotone: bool,
    pub f_max: f64,
    /// `nε s_μ(R) s_δ(R) / (s_μ(d0) s_δ(d0))`.
    pub f_bound: f64,
    pub c_explicit: f64,
    /// `exp(C_explicit √ε)`.
    pub bound: f64,
}

/// Checks the almost-isometry bound `s_δ ≤ J ≤ e^{C√ε} s_δ` with an explicit `C`.
///
/// `d0` is the largest time with `log(s_μ/s_δ)(d0) ≤ √ε`, which behaves like
/// `sqrt(6/(δ−μ))·ε^{1/4}`. On `[d0, R]` the monotone auxiliary function gives
/// `ρ − φ ≤ F(R)·s_μ(d0)s_δ(d0)/s_δ(t)²`, whose integral is explicit, so
///
/// `C√ε = log(s_μ/s_δ)(d0) + nε·s_μ(R)s_δ(R)·(φ(d0) − φ(R))`, `φ = c_δ/s_δ`.
pub fn rigidity_certificate(solution: &RiccatiSolution, eps: f64) -> Result<Certificate> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("eps must be finite and nonnegative, got {eps}")));
    }
    let (mu, delta, n) = (solution.mu, solution.delta, solution.n as f64);
    let r = solution.radius();
    let gap = solution.boundary_gap();
    let phi_r = cot(delta, r);
    if gap > n * eps + 1e-9 * (1.0 + phi_r.abs()) {
        return Err(Error::Hypothesis(format!(
            "boundary value rho(R) - c/s(R) = {gap:e} exceeds n*eps = {:e}",
            n * eps
        )));
    }
    if mu > 0.0 && r >= std::f64::consts::PI / mu.sqrt() {
        return Err(Error::domain("R reaches the conjugate radius of the lower bound"));
    }
    let log_ratio = |t: f64| (s_delta_unchecked(mu, t) / s_delta_unchecked(delta, t)).ln();
    let (d0, log_bound) = if eps == 0.0 {
        (0.0, 0.0)
    } else {
        let target = eps.sqrt();
        let d0 = if log_ratio(r) <= target {
            r
        } else {
            let (mut lo, mut hi) = (0.0, r);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid > 0.0 && log_ratio(mid) <= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let s_prod_r = s_delta_unchecked(mu, r) * s_delta_unchecked(delta, r);
        let tail = if d0 < r { n * eps * s_prod_r * (cot(delta, d0) - phi_r) } else { 0.0 };
        (d0, log_ratio(d0).max(0.0) + tail)
    };
    let start = solution.grid.partition_point(|&t| t < d0).min(solution.grid.len() - 1);
    // monotonicity is scale free, so test the unnormalized product (ρ − φ)·J·s_δ
    let g = solution.f_aux_from(0.0);
    let f_monotone = g[start..].windows(2).all(|w| w[1] >= w[0] - 1e-9 * (1.0 + w[0].abs()));
    let f = solution.f_aux_from(d0);
    let f_max = f[start..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let f_bound = if d0 > 0.0 {
        n * eps * s_delta_unchecked(mu, r) * s_delta_unchecked(delta, r)
            / (s_delta_unchecked(mu, d0) * s_delta_unchecked(delta, d0))
    } else {
        0.0
    };
    let ratios: Vec<f64> = solution
        .grid
        .iter()
        .zip(&solution.j)
        .map(|(&t, &j)| j / s_delta_unchecked(delta, t))
        .collect();
    let max_ratio = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let bound = log_bound.exp();
    let ok = min_ratio >= 1.0 - 1e-9
        && max_ratio <= bound * (1.0 + 1e-9)
        && f_monotone
        && f_max <= f_bound + 1e-9 * (1.0 + f_bound);
    Ok(Certificate {
        ok,
        eps,
        boundary_defect: gap / n,
        d0,
        max_ratio,
        min_ratio,
        f_monotone,
        f_max,
        f_bound,
        c_explicit: if eps > 0.0 { log_bound / eps.sqrt() } else { 0.0 },
        bound,
    })
}

/// Bump profile whose boundary defect `(ρ(R) − φ(R))/n` is as close to `target`
/// as the admissible depth range allows, found by bisection on the depth.
pub fn calibrated_bump(
    mu: f64,
    delta: f64,
    radius: f64,
    center: f64,
    width: f64,
    target: f64,
    dt: f64,
) -> Result<(RadialCurvatureProfile, RiccatiSolution)> {
    let build = |depth: f64| -> Result<(RadialCurvatureProfile, RiccatiSolution)> {
        let p = RadialCurvatureProfile::bump(mu, delta, radius, center, width, depth)?;
        let s = integrate_riccati(&p, dt)?;
        Ok((p, s))
    };
    let defect = |s: &RiccatiSolution| s.boundary_gap() / s.n as f64;
    let full = build(delta - mu)?;
    if defect(&full.1) <= target {
        return Ok(full);
    }
    let (mut lo, mut hi) = (0.0, delta - mu);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if defect(&build(mid)?.1) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    build(lo)
}

/// Seeded random admissible profile with boundary defect in `[1e-6, 1e-2]`.
///
/// Returns the profile with its solution (at `dt = R/2000`) and the defect.
pub fn random_admissible(seed: u64, index: u64) -> Result<(RadialCurvatureProfile, RiccatiSolution, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    for _ in 0..64 {
        let delta = [-1.0, 0.0, 1.0][rng.random_range(0..3)];
        let mu = delta - rng.random_range(0.5..2.0);
        let radius = if delta > 0.0 { rng.random_range(0.5..1.2) } else { rng.random_range(0.5..2.0) };
        let center = radius * rng.random_range(0.2..1.0);
        let width = radius * rng.random_range(0.1..0.4);
        let target = 10f64.powf(rng.random_range(-6.0..-2.0));
        let (p, s) = calibrated_bump(mu, delta, radius, center, width, target, radius / 2000.0)?;
        let eps = s.boundary_gap() / s.n as f64;
        if (1e-6..=1e-2).contains(&eps) {
            return Ok((p, s, eps));
        }
    }
    Err(Error::Numerical("could not draw an admissible profile in the defect range".into()))
}

/// Result of [`volume_monotonicity_check`].
#[derive(Debug, Clone, Serialize)]
pub struct VolumeCheck {
    pub ok: bool,
    /// Smallest `bound(s)/F(s)`; the check passes when it is at least `1/1.03`.
    pub worst_margin: f64,
    pub radii: Vec<f64>,
    pub f: Vec<f64>,
}

/// Samples `F(s) = |B(x0, s) ∩ M| / s_δ(s)ⁿ` at `samples` radii in `(0, r0]` and
/// checks `F(s) ≤ F(r0)·exp((nΛ + sqrt(max(0, −δ)))(r0 − s))` with 3% slack.
pub fn volume_monotonicity_check(
    mesh: &SurfaceMesh,
    x0: &Point,
    lambda: f64,
    r0: f64,
    samples: usize,
) -> Result<VolumeCheck> {
    let model = mesh.ambient();
    model.check_point(x0)?;
    let d = model.curvature();
    if !(lambda >= 0.0) || !(r0 > 0.0) || samples < 2 {
        return Err(Error::domain("need lambda >= 0, r0 > 0 and at least two samples"));
    }
    if d > 0.0 && r0 > std::f64::consts::FRAC_PI_2 / d.sqrt() {
        return Err(Error::domain(format!("r0 = {r0} exceeds π/(2√δ)")));
    }
    let n = model.surface_dim() as i32;
    let rate = n as f64 * lambda + (-d).max(0.0).sqrt();
    let radii: Vec<f64> = (1..=samples).map(|i| r0 * i as f64 / samples as f64).collect();
    let f: Vec<f64> = radii
        .iter()
        .map(|&s| mesh.extrinsic_ball_area(x0, s) / s_delta_unchecked(d, s).powi(n))
        .collect();
    let f_r0 = *f.last().unwrap();
    let worst_margin = radii
        .iter()
        .zip(&f)
        .take(samples - 1)
        .filter(|(_, &fs)| fs > 0.0)
        .map(|(&s, &fs)| f_r0 * (rate * (r0 - s)).exp() / fs)
        .fold(f64::INFINITY, f64::min);
    Ok(VolumeCheck { ok: worst_margin >= 1.0 / 1.03, worst_margin, radii, f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_profiles_are_exact() {
        let s = integrate_riccati(&RadialCurvatureProfile::constant(0.0, 1.0).unwrap(), 1e-4).unwrap();
        for ((t, rho), j) in s.grid.iter().zip(&s.rho).zip(&s.j) {
            assert!((rho - 1.0 / t).abs() < 1e-8 * (1.0 / t).max(1.0));
            assert!((j - t).abs() < 1e-8);
        }
        let s = integrate_riccati(&RadialCurvatureProfile::constant(1.0, PI / 4.0).unwrap(), PI / 4e4).unwrap();
        for ((t, rho), j) in s.grid.iter().zip(&s.rho).zip(&s.j) {
            assert!((rho - 1.0 / t.tan()).abs() < 1e-6);
            assert!((j - t.sin()).abs() < 1e-6);
        }
        let s = integrate_riccati(&RadialCurvatureProfile::constant(-1.0, 1.5).unwrap(), 1.5e-4).unwrap();
        for ((t, rho), j) in s.grid.iter().zip(&s.rho).zip(&s.j) {
            assert!((rho - 1.0 / t.tanh()).abs() < 1e-6);
            assert!((j - t.sinh()).abs() < 1e-6);
        }
    }

    #[test]
    fn focal_point_is_reported() {
        let p = RadialCurvatureProfile::constant(1.0, 3.5).unwrap();
        match integrate_riccati(&p, 3.5e-3) {
            Err(Error::FocalPoint(t)) => assert!((t - PI).abs() < 1e-2),
            other => panic!("expected focal failure, got {other:?}"),
        }
    }

    #[test]
    fn sandwich_and_monotone_f_on_linear_profile() {
        let p = RadialCurvatureProfile::linear(-1.0, 0.0, 1.0).unwrap();
        let s = integrate_riccati(&p, 1e-4).unwrap();
        assert!(s.sandwich_violation < 1e-6);
        let eps = s.boundary_gap() / 2.0;
        let c = rigidity_certificate(&s, eps).unwrap();
        assert!(c.ok && c.f_monotone, "{c:?}");
        assert!(rigidity_certificate(&s, eps * 0.5).is_err());
    }

    #[test]
    fn zero_defect_rigidity() {
        for d in [-1.0, 0.0, 1.0] {
            let s = integrate_riccati(&RadialCurvatureProfile::constant(d, 1.0).unwrap(), 1e-4).unwrap();
            let c = rigidity_certificate(&s, 0.0).unwrap();
            assert!(c.ok && (c.max_ratio - 1.0).abs() < 1e-8, "{c:?}");
            let fm = s.f_aux_from(0.0).iter().fold(0.0f64, |m, f| m.max(f.abs()));
            assert!(fm < 1e-12, "{d} {fm:e}");
        }
    }

    #[test]
    fn calibration_hits_target() {
        let (_, s) = calibrated_bump(-1.0, 0.0, 1.0, 0.7, 0.2, 1e-4, 5e-4).unwrap();
        let eps = s.boundary_gap() / 2.0;
        assert!((eps / 1e-4 - 1.0).abs() < 1e-6);
        let (_, s, eps) = random_admissible(1, 0).unwrap();
        assert!(rigidity_certificate(&s, eps).unwrap().ok);
    }

    #[test]
    fn hermite_interpolation_of_j() {
        let s = integrate_riccati(&RadialCurvatureProfile::constant(1.0, 1.0).unwrap(), 1e-3).unwrap();
        for t in [1e-5, 0.01234, 0.5555, 0.9999] {
            assert!((s.j_at(t) - t.sin()).abs() < 1e-10);
        }
    }
}
