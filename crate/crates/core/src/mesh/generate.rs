//! Fixture generators: geodesic icospheres, surfaces of revolution and
//! radial perturbations.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SurfaceMesh;
use crate::error::{Error, Result};
use crate::spaceform::{AmbientModel, Chart, Point};

/// Unit icosahedron with vertices at the poles `±e_z`, subdivided `k` times
/// and projected to the unit sphere. Faces are outward oriented.
pub fn unit_icosphere(subdivisions: u32) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let z = 1.0 / 5f64.sqrt();
    let rho = 2.0 * z;
    let mut v = vec![Vector3::new(0.0, 0.0, 1.0)];
    for k in 0..5 {
        let a = 2.0 * PI * k as f64 / 5.0;
        v.push(Vector3::new(rho * a.cos(), rho * a.sin(), z));
    }
    for k in 0..5 {
        let a = 2.0 * PI * (k as f64 + 0.5) / 5.0;
        v.push(Vector3::new(rho * a.cos(), rho * a.sin(), -z));
    }
    v.push(Vector3::new(0.0, 0.0, -1.0));
    let up = |k: usize| 1 + k % 5;
    let lo = |k: usize| 6 + k % 5;
    let mut f = Vec::with_capacity(20);
    for k in 0..5 {
        f.push([0, up(k), up(k + 1)]);
        f.push([up(k), lo(k), up(k + 1)]);
        f.push([up(k + 1), lo(k), lo(k + 1)]);
        f.push([11, lo(k + 1), lo(k)]);
    }
    for t in f.iter_mut() {
        let n = (v[t[1]] - v[t[0]]).cross(&(v[t[2]] - v[t[0]]));
        if n.dot(&(v[t[0]] + v[t[1]] + v[t[2]])) < 0.0 {
            t.swap(1, 2);
        }
    }
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, v: &mut Vec<Vector3<f64>>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                v.push((v[a] + v[b]).normalize());
                v.len() - 1
            })
        };
        let mut next = Vec::with_capacity(4 * f.len());
        for &[a, b, c] in &f {
            let ab = midpoint(a, b, &mut v);
            let bc = midpoint(b, c, &mut v);
            let ca = midpoint(c, a, &mut v);
            next.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        f = next;
    }
    (v, f)
}

/// Geodesic sphere `S(center, radius)` triangulated as a subdivided icosahedron.
///
/// Directions are taken in the tangent frame of `center`, so the poles lie
/// along its third basis vector.
pub fn generate_icosphere(
    model: &AmbientModel,
    center: &Point,
    radius: f64,
    subdivisions: u32,
) -> Result<SurfaceMesh> {
    if subdivisions > 8 {
        return Err(Error::domain(format!("subdivisions must be at most 8, got {subdivisions}")));
    }
    if !(radius > 0.0 && radius < model.delta().max_radius()) {
        return Err(Error::domain(format!(
            "radius {radius} outside (0, {})",
            model.delta().max_radius()
        )));
    }
    model.check_point(center)?;
    let basis = model.tangent_basis(center);
    let (dirs, faces) = unit_icosphere(subdivisions);
    let vertices = dirs
        .iter()
        .map(|u| {
            let v = basis[0] * (radius * u[0]) + basis[1] * (radius * u[1]) + basis[2] * (radius * u[2]);
            model.exp(center, &v)
        })
        .collect();
    SurfaceMesh::new(*model, vertices, faces)
}

/// Surface of revolution about the `z` axis of the flat chart.
///
/// `curve` lists `(r, z)` samples in order. An endpoint with `r = 0` becomes a
/// pole; the surface is closed exactly when both endpoints are poles. Rings
/// are staggered by half a step so the triangles stay close to equilateral.
/// The outward side is `e_theta × T`, with `T` the direction of travel along
/// the curve, so a sphere is traversed from its south pole to its north pole.
pub fn generate_revolution(model: &AmbientModel, curve: &[[f64; 2]], n_theta: usize) -> Result<SurfaceMesh> {
    if model.chart() != Chart::EuclideanCoordinates {
        return Err(Error::domain("surfaces of revolution need the flat chart"));
    }
    if n_theta < 3 {
        return Err(Error::domain("need at least three samples around the axis"));
    }
    if curve.len() < 3 {
        return Err(Error::domain("profile curve needs at least three samples"));
    }
    let k = curve.len();
    for (i, p) in curve.iter().enumerate() {
        if !(p[0] >= 0.0) || !p[1].is_finite() {
            return Err(Error::domain(format!("profile sample {i} is invalid: {p:?}")));
        }
        if p[0] < 1e-8 && p[0] != 0.0 {
            return Err(Error::domain(format!(
                "profile sample {i} is within 1e-8 of the axis without meeting it"
            )));
        }
        if p[0] == 0.0 && i != 0 && i != k - 1 {
            return Err(Error::domain(format!("interior profile sample {i} lies on the axis")));
        }
    }
    let start_pole = curve[0][0] == 0.0;
    let end_pole = curve[k - 1][0] == 0.0;

    let mut vertices = Vec::new();
    let mut ring_start = vec![usize::MAX; k];
    for (i, p) in curve.iter().enumerate() {
        ring_start[i] = vertices.len();
        if p[0] == 0.0 {
            vertices.push(Point::new(0.0, 0.0, p[1], 0.0));
            continue;
        }
        let offset = (i % 2) as f64 / 2.0;
        for j in 0..n_theta {
            let t = 2.0 * PI * (j as f64 + offset) / n_theta as f64;
            vertices.push(Point::new(p[0] * t.cos(), p[0] * t.sin(), p[1], 0.0));
        }
    }
    let at = |i: usize, j: usize| ring_start[i] + j % n_theta;

    let mut faces = Vec::new();
    for i in 0..k - 1 {
        let (a_pole, b_pole) = (curve[i][0] == 0.0, curve[i + 1][0] == 0.0);
        for j in 0..n_theta {
            match (a_pole, b_pole) {
                (true, true) => return Err(Error::domain("consecutive poles in the profile")),
                (true, false) => faces.push([ring_start[i], at(i + 1, j + 1), at(i + 1, j)]),
                (false, true) => faces.push([at(i, j), at(i, j + 1), ring_start[i + 1]]),
                (false, false) if i % 2 == 0 => {
                    faces.push([at(i, j), at(i, j + 1), at(i + 1, j)]);
                    faces.push([at(i, j + 1), at(i + 1, j + 1), at(i + 1, j)]);
                }
                (false, false) => {
                    faces.push([at(i, j), at(i, j + 1), at(i + 1, j + 1)]);
                    faces.push([at(i, j), at(i + 1, j + 1), at(i + 1, j)]);
                }
            }
        }
    }
    if start_pole && end_pole {
        SurfaceMesh::new(*model, vertices, faces)
    } else {
        SurfaceMesh::new_open(*model, vertices, faces)
    }
}

/// Radial displacement field for [`perturb_radially`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Wave {
    /// Zonal harmonic `P_l(cos θ)` about the third frame axis (maximum 1 at the poles).
    Zonal(u32),
    /// Seeded combination of rotated zonal harmonics of degrees 2 and 3,
    /// scaled so its maximum modulus over the vertices is 1.
    Random(u64),
}

fn legendre(l: u32, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Center used for radial perturbation: the chord centroid pulled back to the model.
pub fn chord_centroid(mesh: &SurfaceMesh) -> Point {
    let sum: Point = mesh.vertices().iter().sum();
    mesh.ambient().project_point(&(sum / mesh.n_vertices() as f64))
}

/// Moves each vertex along the geodesic from the centroid by
/// `amplitude · field(direction)` with `|field| ≤ 1`.
///
/// Self-intersections are not detected.
pub fn perturb_radially(mesh: &SurfaceMesh, amplitude: f64, wave: Wave) -> Result<SurfaceMesh> {
    if amplitude == 0.0 {
        return Ok(mesh.clone());
    }
    let model = *mesh.ambient();
    let c = chord_centroid(mesh);
    let basis = model.tangent_basis(&c);
    let logs: Vec<Point> = mesh.vertices().iter().map(|p| model.log(&c, p)).collect();
    let inradius = logs.iter().map(|v| model.norm(v)).fold(f64::INFINITY, f64::min);
    if !(amplitude.abs() < 0.5 * inradius) {
        return Err(Error::domain(format!(
            "amplitude {amplitude} must stay below half the inradius {inradius}"
        )));
    }
    let dirs: Vec<Vector3<f64>> = logs
        .iter()
        .map(|v| {
            let u = Vector3::new(model.inner(v, &basis[0]), model.inner(v, &basis[1]), model.inner(v, &basis[2]));
            u.normalize()
        })
        .collect();
    let field: Vec<f64> = match wave {
        Wave::Zonal(l) => dirs.iter().map(|u| legendre(l, u[2])).collect(),
        Wave::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let terms: Vec<(u32, Vector3<f64>, f64)> = [2u32, 2, 3, 3]
                .iter()
                .map(|&l| {
                    let z: f64 = rng.random_range(-1.0..1.0);
                    let phi: f64 = rng.random_range(0.0..2.0 * PI);
                    let s = (1.0 - z * z).sqrt();
                    let axis = Vector3::new(s * phi.cos(), s * phi.sin(), z);
                    let coeff: f64 = rng.random_range(0.5..1.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
                    (l, axis, coeff)
                })
                .collect();
            let raw: Vec<f64> = dirs
                .iter()
                .map(|u| terms.iter().map(|(l, a, c)| c * legendre(*l, u.dot(a))).sum())
                .collect();
            let max = raw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            raw.iter().map(|x| x / max).collect()
        }
    };
    let vertices = logs
        .iter()
        .zip(&field)
        .map(|(v, f)| {
            let r = model.norm(v);
            model.exp(&c, &(v * ((r + amplitude * f) / r)))
        })
        .collect();
    SurfaceMesh::new(model, vertices, mesh.faces().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        let e = AmbientModel::euclidean();
        for k in 0..4u32 {
            let m = generate_icosphere(&e, &e.origin(), 1.0, k).unwrap();
            assert_eq!(m.n_vertices(), 10 * 4usize.pow(k) + 2);
            assert_eq!(m.n_faces(), 20 * 4usize.pow(k));
            assert_eq!(m.euler_characteristic(), 2);
            let topo = m.topology();
            for v in 0..m.n_vertices() {
                let val = topo.neighbors(v).len();
                assert!(val == 5 || val == 6);
            }
        }
        assert!(generate_icosphere(&e, &e.origin(), 1.0, 9).is_err());
    }

    #[test]
    fn icosphere_area_converges_from_below() {
        let e = AmbientModel::euclidean();
        let errs: Vec<f64> = (2..6)
            .map(|k| 4.0 * PI - generate_icosphere(&e, &e.origin(), 1.0, k).unwrap().total_area())
            .collect();
        assert!(errs.iter().all(|&x| x > 0.0));
        assert!(errs[3] < 4.0 * PI * 1e-3);
        for w in errs.windows(2) {
            let ratio = w[1] / w[0];
            assert!((ratio - 0.25).abs() < 0.02, "ratio {ratio}");
        }
    }

    #[test]
    fn curved_icospheres_lie_on_geodesic_spheres() {
        for &(delta, r) in &[(1.0, PI / 4.0), (-1.0, 1.0), (0.5, 1.2)] {
            let m = AmbientModel::new(delta, 3).unwrap();
            let c = m.exp(&m.origin(), &Point::new(0.1, -0.2, 0.05, 0.0));
            let c = m.project_point(&c);
            let mesh = generate_icosphere(&m, &c, r, 3).unwrap();
            for p in mesh.vertices() {
                assert!(m.constraint_violation(p) < 1e-10);
                assert!((m.distance(&c, p) - r).abs() < 1e-10);
            }
        }
        let s = AmbientModel::new(1.0, 3).unwrap();
        let mesh = generate_icosphere(&s, &s.origin(), PI / 4.0, 5).unwrap();
        assert!((mesh.total_area() / (2.0 * PI) - 1.0).abs() < 0.01);
    }

    fn semicircle(n: usize) -> Vec<[f64; 2]> {
        (0..=n)
            .map(|i| {
                let phi = -PI / 2.0 + PI * i as f64 / n as f64;
                let r = if i == 0 || i == n { 0.0 } else { phi.cos() };
                [r, phi.sin()]
            })
            .collect()
    }

    #[test]
    fn revolution_sphere_and_cylinder() {
        let e = AmbientModel::euclidean();
        let m = generate_revolution(&e, &semicircle(128), 128).unwrap();
        assert!(m.is_closed());
        assert_eq!(m.euler_characteristic(), 2);
        assert!((m.total_area() / (4.0 * PI) - 1.0).abs() < 0.01);
        // outward orientation
        let normals = m.vertex_normals();
        for (p, n) in m.vertices().iter().zip(&normals) {
            assert!(p.dot(n) > 0.0);
        }

        let h = 2.0;
        let cyl: Vec<[f64; 2]> = (0..=64).map(|i| [1.0, h * i as f64 / 64.0]).collect();
        let c = generate_revolution(&e, &cyl, 128).unwrap();
        assert!(!c.is_closed());
        assert!((c.total_area() / (2.0 * PI * h) - 1.0).abs() < 0.01);
    }

    #[test]
    fn revolution_rejects_bad_profiles() {
        let e = AmbientModel::euclidean();
        let mut bad = semicircle(16);
        bad[0][0] = 1e-10;
        assert!(generate_revolution(&e, &bad, 32).is_err());
        let s = AmbientModel::new(1.0, 3).unwrap();
        assert!(generate_revolution(&s, &semicircle(16), 32).is_err());
    }

    #[test]
    fn zonal_perturbation_has_exact_amplitude() {
        let e = AmbientModel::euclidean();
        let m = generate_icosphere(&e, &e.origin(), 1.0, 3).unwrap();
        let same = perturb_radially(&m, 0.0, Wave::Zonal(2)).unwrap();
        assert_eq!(same.vertices(), m.vertices());
        let a = 0.07;
        let p = perturb_radially(&m, a, Wave::Zonal(2)).unwrap();
        let dev = p
            .vertices()
            .iter()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0f64, f64::max);
        assert!((dev - a).abs() < 1e-10);
        assert!(perturb_radially(&m, 0.6, Wave::Zonal(2)).is_err());
    }

    #[test]
    fn random_perturbation_is_seeded_and_increases_area() {
        let e = AmbientModel::euclidean();
        let m = generate_icosphere(&e, &e.origin(), 1.0, 4).unwrap();
        let a = perturb_radially(&m, 0.1, Wave::Random(7)).unwrap();
        let b = perturb_radially(&m, 0.1, Wave::Random(7)).unwrap();
        assert_eq!(a.vertices(), b.vertices());
        assert!(a.total_area() > 4.0 * PI);
        let dev = a.vertices().iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0f64, f64::max);
        assert!((dev - 0.1).abs() < 1e-10);
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre(0, 0.3), 1.0);
        assert_eq!(legendre(1, 0.3), 0.3);
        assert!((legendre(2, 0.3) - (3.0 * 0.09 - 1.0) / 2.0).abs() < 1e-15);
        assert!((legendre(3, 0.3) - (5.0 * 0.027 - 3.0 * 0.3) / 2.0).abs() < 1e-15);
    }
}
