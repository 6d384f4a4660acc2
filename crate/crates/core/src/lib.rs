//! Eigenvalue pinching diagnostics for discrete hypersurfaces in space forms.
//!
//! A closed triangle mesh in `R³`, `S³(1/√δ)` or `H³(−1/√|δ|)` goes through
//! the cotangent spectrum and the center of mass, and comes out as a
//! [`PinchReport`] that measures how far the surface is from a geodesic sphere.
//!
//! ```
//! use pinchlab::{assemble_report, generate_icosphere, AmbientModel, PinchOptions};
//!
//! let model = AmbientModel::euclidean();
//! let mesh = generate_icosphere(&model, &model.origin(), 1.0, 3).unwrap();
//! let report = assemble_report(&mesh, &PinchOptions::default()).unwrap();
//! assert!(report.eps_spec.abs() < 0.05);
//! assert!((report.r0 - 1.0).abs() < 0.05);
//! ```

pub mod barycenter;
pub mod curvature;
pub mod error;
pub mod glued;
pub mod mesh;
pub mod pinch;
pub mod report;
pub mod rigidity;
pub mod spaceform;
pub mod spectral;

pub use barycenter::{
    balance_residual, energy, gradient_y, position_field, solve_center, CenterOptions, CenterResult, PositionField,
};
pub use curvature::{h_infty, mean_curvature, norm_b_q, shape_operator, CurvatureField};
pub use error::{Error, Result};
pub use glued::{build_mesh, FamilyParams, GluedMesh, NormScope};
pub use mesh::generate::{generate_icosphere, generate_revolution, perturb_radially, Wave};
pub use mesh::hausdorff::hausdorff_to_geodesic_sphere;
pub use mesh::io::{read_mesh_file, read_obj, read_off, write_obj, write_off, RawMesh};
pub use mesh::{SurfaceMesh, VertexMeasure};
pub use pinch::{analyze, assemble_report, Analysis, Flag, PinchOptions, PinchReport, VertexFields, REPORT_SCHEMA};
pub use report::{report_json, write_columns_csv, write_reports_csv, write_vertex_fields_csv};
pub use rigidity::{
    integrate_riccati, random_admissible, rigidity_certificate, volume_monotonicity_check, Certificate,
    RadialCurvatureProfile, RiccatiSolution, VolumeCheck,
};
pub use spaceform::{
    c_delta, cot_delta, geodesic_sphere_reference, phi_delta, s_delta, s_delta_inverse, AmbientModel,
    CurvatureParam, Point, RadialData,
};
pub use spectral::{
    assemble, dense_spectrum_oracle, lambda1, rayleigh_quotient, EigenResult, LaplaceOperator,
};
