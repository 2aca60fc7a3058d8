//! Mode structure of degenerate M/N cavities at the midplane.

mod calibrate;
mod frft;
mod geometry;
mod greens;
pub mod hermite;
mod image;

pub use calibrate::{calibrate_center_waist, calibration_cost, Calibration, CalibrationOptions};
pub use frft::{frft_apply, frft_chirp, symmetry_average, symmetry_project, FrftBasis};
pub use geometry::{family_frequency, CavityGeometry, ModeIndex, Q0Parity, SPEED_OF_LIGHT};
pub use greens::{
    family_greens, greens_47_nonlocal, greens_nonlocal_terms, local_weight, mehler_kernel,
    midplane_interaction_matrix, NonlocalTerm,
};
pub use image::ComplexFieldImage;
