//! Synthesis of emitted-field images from spin configurations and recovery of
//! spins from images by least-squares fitting.

mod fit;
mod model;
mod synth;

pub use fit::{fit_spins, local_spin_map, FitOptions, FitResult, FittedSite};
pub use model::ImagingGrid;
pub use synth::{synthesize_field, NoiseSpec};
