//! Statistics of coupling-matrix ensembles: eigenvalue spectra against the
//! semicircle law, bond-sign frustration and the disorder-width sweep.

mod frustration;
mod spectrum;
mod sweep;

pub use frustration::{frustration_stats, FrustrationStats};
pub use spectrum::{eigen_spectrum_normalized, hellinger_to_semicircle, semicircle_cdf, SpectrumBins};
pub use sweep::{sweep_w, SweepCell, SweepOptions, SweepResult};
