//! Generalized coherent states of the polarization group and of the
//! biphoton groups, their D-coefficients, overlaps and completeness.

mod build;
mod checks;
mod dfunc;
mod rotation;
mod spec;

pub use build::{build_gcs, build_gcs_series, rotated_glauber_amplitudes, series_deficit, GcsContext, Orbit};
pub use checks::{exact_node_counts, identity_resolution_check, identity_resolution_check_with, x_biphoton_expansion_check};
pub use dfunc::{d_coefficients, max_classical_coefficient, overlap_closed_form, SemiLabel};
pub use rotation::{eta, su2_displacement, xi, Rotator};
pub use spec::{Cplx, Family, GcsSpec, Sign};
