//! Cotangent Laplace–Beltrami operator and its first nonzero eigenvalue.

use faer::sparse::{SparseColMat, Triplet};
use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

/// Largest problem the dense oracle accepts.
pub const DENSE_ORACLE_LIMIT: usize = 2000;
const MAX_ITERATIONS: usize = 500;
const BLOCK_SIZE: usize = 8;

/// Stiffness (cotangent weights) and lumped mass (barycentric dual areas).
///
/// The stiffness is stored as its off-diagonal edge weights `w_ij ≥ 0`; the
/// matrix is `S = Σ w_ij (e_i − e_j)(e_i − e_j)ᵀ`, so constants lie in its
/// kernel exactly and symmetry holds by construction.
#[derive(Debug, Clone)]
pub struct LaplaceOperator {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    mass: Vec<f64>,
    clamped_edges: usize,
}

/// First nonzero eigenpair of `S v = λ M v`.
#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub lambda1: f64,
    /// M-orthonormal, M-orthogonal to constants.
    pub eigenvector: Vec<f64>,
    /// `‖(S − λ₁M)v‖ / ‖Mv‖`.
    pub residual: f64,
    pub iterations: usize,
    /// Ritz values of the converged block, ascending, starting with `lambda1`.
    pub ritz_values: Vec<f64>,
}

/// Rayleigh quotient of a centered test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayleighQuotient {
    pub value: f64,
    /// Set when the function is numerically constant; `value` is then 0.
    pub degenerate: bool,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Cotangent stiffness and lumped mass of a closed mesh.
pub fn assemble(mesh: &SurfaceMesh) -> Result<LaplaceOperator> {
    if !mesh.is_closed() {
        return Err(Error::InvalidMesh("the Laplace operator needs a closed mesh".into()));
    }
    let edges = mesh.edges();
    let faces = mesh.faces();
    // (half-cotangent at each corner, area) per face
    let per_face: Vec<([f64; 3], f64)> = (0..faces.len())
        .into_par_iter()
        .map(|f| {
            let l = mesh.face_lengths(f);
            let area = crate::mesh::heron(l);
            let sq = l.map(|x| x * x);
            let cot = [0, 1, 2].map(|k| (sq[(k + 1) % 3] + sq[(k + 2) % 3] - sq[k]) / (4.0 * area));
            (cot.map(|c| 0.5 * c), area)
        })
        .collect();
    let mut weights = vec![0.0; edges.len()];
    let mut mass = vec![0.0; mesh.n_vertices()];
    for (f, (half_cot, area)) in faces.iter().zip(&per_face) {
        for k in 0..3 {
            let (a, b) = (f[(k + 1) % 3], f[(k + 2) % 3]);
            let key = [a.min(b), a.max(b)];
            let e = edges.binary_search(&key).expect("edge list covers every face edge");
            weights[e] += half_cot[k];
            mass[f[k]] += area / 3.0;
        }
    }
    let mut clamped_edges = 0;
    let edges = edges
        .iter()
        .zip(weights)
        .map(|(e, w)| {
            let w = if w < 0.0 {
                clamped_edges += 1;
                0.0
            } else {
                w
            };
            (e[0], e[1], w)
        })
        .collect();
    Ok(LaplaceOperator { n: mesh.n_vertices(), edges, mass, clamped_edges })
}

impl LaplaceOperator {
    /// Operator from explicit edge weights and masses.
    pub fn from_parts(n: usize, edges: Vec<(usize, usize, f64)>, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != n || mass.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::domain("mass entries must be positive, one per vertex"));
        }
        if edges.iter().any(|&(i, j, w)| i >= n || j >= n || i == j || !(w >= 0.0)) {
            return Err(Error::domain("edge weights must be nonnegative on valid index pairs"));
        }
        Ok(LaplaceOperator { n, edges, mass, clamped_edges: 0 })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn edge_weights(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Number of edges whose cotangent weight was negative and set to zero.
    pub fn clamped_edges(&self) -> usize {
        self.clamped_edges
    }

    /// `S f`.
    pub fn apply_stiffness(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for &(i, j, w) in &self.edges {
            let d = w * (f[i] - f[j]);
            out[i] += d;
            out[j] -= d;
        }
        out
    }

    /// Dirichlet energy `fᵀ S f`.
    pub fn energy(&self, f: &[f64]) -> f64 {
        self.edges.iter().map(|&(i, j, w)| w * (f[i] - f[j]).powi(2)).sum()
    }

    fn mass_mean(&self, f: &[f64]) -> f64 {
        let num: f64 = self.mass.iter().zip(f).map(|(m, x)| m * x).sum();
        num / self.mass.iter().sum::<f64>()
    }

    fn mass_norm2(&self, f: &[f64]) -> f64 {
        self.mass.iter().zip(f).map(|(m, x)| m * x * x).sum()
    }

    /// Relative residual `‖(S − λM)v‖ / ‖Mv‖`.
    pub fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let sv = self.apply_stiffness(v);
        let num: f64 = sv
            .iter()
            .zip(&self.mass)
            .zip(v)
            .map(|((s, m), x)| (s - lambda * m * x).powi(2))
            .sum();
        let den: f64 = self.mass.iter().zip(v).map(|(m, x)| (m * x).powi(2)).sum();
        (num / den).sqrt()
    }
}

/// Generalized Rayleigh quotient of `f` after removing its mass-weighted mean.
pub fn rayleigh_quotient(op: &LaplaceOperator, f: &[f64]) -> Result<RayleighQuotient> {
    if f.len() != op.n {
        return Err(Error::domain("test function length differs from the vertex count"));
    }
    let raw = op.mass_norm2(f);
    if !(raw > 0.0) {
        return Err(Error::domain("Rayleigh quotient of the zero function"));
    }
    let mean = op.mass_mean(f);
    let centered: Vec<f64> = f.iter().map(|x| x - mean).collect();
    let norm2 = op.mass_norm2(&centered);
    if norm2 <= 1e-24 * raw {
        return Ok(RayleighQuotient { value: 0.0, degenerate: true });
    }
    Ok(RayleighQuotient { value: op.energy(&centered) / norm2, degenerate: false })
}

/// Sparse Cholesky of the stiffness with vertex 0 grounded.
struct GroundedSolver {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    n: usize,
}

impl GroundedSolver {
    fn new(op: &LaplaceOperator) -> Result<Self> {
        let n = op.n;
        let m = n - 1;
        let mut diag = vec![0.0; n];
        let mut trip = Vec::with_capacity(2 * op.edges.len() + n);
        for &(i, j, w) in &op.edges {
            diag[i] += w;
            diag[j] += w;
            if i > 0 && j > 0 && w != 0.0 {
                trip.push(Triplet::new(i - 1, j - 1, -w));
                trip.push(Triplet::new(j - 1, i - 1, -w));
            }
        }
        for (i, d) in diag.iter().enumerate().skip(1) {
            trip.push(Triplet::new(i - 1, i - 1, *d));
        }
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(m, m, &trip)
            .map_err(|e| Error::Numerical(format!("stiffness assembly failed: {e:?}")))?;
        let llt = a.sp_cholesky(Side::Lower).map_err(|e| {
            Error::Numerical(format!(
                "grounded stiffness is not positive definite ({e:?}); the weighted edge graph may be disconnected"
            ))
        })?;
        Ok(GroundedSolver { llt, n })
    }

    /// Solves `S X = B` column by column for right-hand sides with zero sum;
    /// the solutions have vertex 0 fixed at zero.
    fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let k = b.ncols();
        let mut rhs = Mat::<f64>::from_fn(self.n - 1, k, |i, j| b[(i + 1, j)]);
        self.llt.solve_in_place(rhs.as_mut());
        DMatrix::from_fn(self.n, k, |i, j| if i == 0 { 0.0 } else { rhs[(i - 1, j)] })
    }
}

/// Smallest nonzero eigenvalue of `S v = λ M v` by block shift-invert subspace
/// iteration on the mass-orthogonal complement of the constants.
///
/// The start block is a fixed hash of the vertex indices, so results are
/// reproducible bit for bit.
pub fn lambda1(op: &LaplaceOperator, tol: f64) -> Result<EigenResult> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::domain(format!("tolerance {tol:e} outside [1e-12, 1e-4]")));
    }
    let n = op.n;
    if n < 3 {
        return Err(Error::domain("need at least three vertices"));
    }
    let k = BLOCK_SIZE.min(n - 1);
    let solver = GroundedSolver::new(op)?;
    let total_mass: f64 = op.mass.iter().sum();
    let deflate = |v: &mut DMatrix<f64>| {
        for mut c in v.column_iter_mut() {
            let mean = c.iter().zip(&op.mass).map(|(x, m)| x * m).sum::<f64>() / total_mass;
            c.add_scalar_mut(-mean);
        }
    };

    let mut v = DMatrix::from_fn(n, k, |i, j| {
        let h = splitmix64((i as u64) ^ ((j as u64 + 1) << 40));
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sign * ((h >> 11) as f64 / (1u64 << 53) as f64)
    });
    deflate(&mut v);

    let mut last_residual = f64::INFINITY;
    for iter in 1..=MAX_ITERATIONS {
        // w = S⁺ M v
        let mut mv = v.clone();
        for (i, m) in op.mass.iter().enumerate() {
            mv.row_mut(i).scale_mut(*m);
        }
        for mut c in mv.column_iter_mut() {
            let s = c.sum() / n as f64;
            c.add_scalar_mut(-s);
        }
        let mut w = solver.solve(&mv);
        deflate(&mut w);

        let (vals, vecs) = rayleigh_ritz(op, &w)?;
        v = vecs;
        let v0: Vec<f64> = v.column(0).iter().copied().collect();
        last_residual = op.residual(vals[0], &v0);
        if last_residual <= tol {
            let norm = op.mass_norm2(&v0).sqrt();
            let mut eigenvector: Vec<f64> = v0.iter().map(|x| x / norm).collect();
            // fixed sign for reproducible output
            let pivot = eigenvector
                .iter()
                .copied()
                .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            if pivot < 0.0 {
                eigenvector.iter_mut().for_each(|x| *x = -*x);
            }
            return Ok(EigenResult {
                lambda1: vals[0],
                eigenvector,
                residual: last_residual,
                iterations: iter,
                ritz_values: vals,
            });
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, residual: last_residual })
}

/// Ritz pairs of `(S, M)` on the span of `w`, ascending, M-orthonormal.
fn rayleigh_ritz(op: &LaplaceOperator, w: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let k = w.ncols();
    // M-orthonormalize twice so the projected mass matrix is close to identity
    let mut w = w.clone();
    for _ in 0..2 {
        for j in 0..k {
            for i in 0..j {
                let proj: f64 = (0..op.n).map(|r| w[(r, i)] * op.mass[r] * w[(r, j)]).sum();
                let ci = w.column(i).clone_owned();
                w.column_mut(j).axpy(-proj, &ci, 1.0);
            }
            let nrm: f64 = (0..op.n).map(|r| op.mass[r] * w[(r, j)].powi(2)).sum::<f64>().sqrt();
            if !(nrm > 0.0) {
                return Err(Error::Numerical("iteration block lost rank".into()));
            }
            w.column_mut(j).scale_mut(1.0 / nrm);
        }
    }
    let w = &w;
    let mut sw = DMatrix::zeros(op.n, k);
    let mut mw = DMatrix::zeros(op.n, k);
    for j in 0..k {
        let col: Vec<f64> = w.column(j).iter().copied().collect();
        sw.set_column(j, &DVector::from_vec(op.apply_stiffness(&col)));
        mw.set_column(j, &DVector::from_iterator(op.n, col.iter().zip(&op.mass).map(|(x, m)| x * m)));
    }
    let a = w.transpose() * &sw;
    let b = w.transpose() * &mw;
    let a = (&a + a.transpose()) * 0.5;
    let b = (&b + b.transpose()) * 0.5;
    let chol = b
        .cholesky()
        .ok_or_else(|| Error::Numerical("iteration block lost rank".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("iteration block lost rank".into()))?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(k, k, |i, j| eig.eigenvectors[(i, order[j])]);
    let coeffs = linv.transpose() * y;
    Ok((vals, w * coeffs))
}

/// Full generalized spectrum by a dense symmetric solve of `M^{-1/2} S M^{-1/2}`.
pub fn dense_spectrum_oracle(op: &LaplaceOperator) -> Result<Vec<f64>> {
    let n = op.n;
    if n > DENSE_ORACLE_LIMIT {
        return Err(Error::domain(format!(
            "dense oracle limited to {DENSE_ORACLE_LIMIT} vertices, got {n}"
        )));
    }
    let s: Vec<f64> = op.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut a = Mat::<f64>::zeros(n, n);
    for &(i, j, w) in &op.edges {
        a[(i, i)] += w * s[i] * s[i];
        a[(j, j)] += w * s[j] * s[j];
        a[(i, j)] -= w * s[i] * s[j];
        a[(j, i)] -= w * s[i] * s[j];
    }
    let mut vals = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("dense eigen solve failed: {e:?}")))?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}
