//! Replica statistics: overlaps and their distributions, the Parisi function,
//! ultrametricity, clustering, entropy and magnetization.

mod bootstrap;
mod cluster;
mod entropy;
mod histogram;
mod kcorr;
mod magnetization;
mod overlap;
mod parisi;

pub use bootstrap::bootstrap_errors;
pub(crate) use bootstrap::column_std;
pub use cluster::{cluster_replicas, Dendrogram, Linkage, Merge};
pub use entropy::{shannon_entropy_jackknife, EntropyEstimate};
pub use histogram::Histogram;
pub use kcorr::{k_correlator, kde_fwhm, KCorrelator};
pub use magnetization::{magnetization_stats, MagnetizationStats};
pub use overlap::{overlap_distribution, overlap_distribution_bootstrap, overlap_matrix, OverlapMatrix};
pub use parisi::{parisi_distribution, parisi_function, ParisiFit, ParisiFunction};
