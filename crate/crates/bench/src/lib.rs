//! Shared fixtures for the benchmarks.

use pinchlab::{generate_icosphere, perturb_radially, AmbientModel, SurfaceMesh, Wave};

/// Unit icosphere in R^3, perturbed radially by `amplitude` with a fixed seed.
pub fn perturbed_sphere(subdiv: u32, amplitude: f64) -> SurfaceMesh {
    let e = AmbientModel::euclidean();
    let m = generate_icosphere(&e, &e.origin(), 1.0, subdiv).expect("icosphere");
    perturb_radially(&m, amplitude, Wave::Random(7)).expect("perturbation")
}
