//! Spin positions, atomic densities, the coupling matrix J and the threshold
//! quantities derived from it.

mod density;
mod jmatrix;
mod physics;
mod positions;

pub use density::{density_overlap, DensityProfile};
pub use jmatrix::{
    assemble_j, gaussian_pair_nonlocal, point_source_j, CouplingMatrix, QuadratureConfig,
};
pub use physics::{collapse_rates, critical_pump, CollapseRates, PhysicalParams};
pub use positions::{
    j1_fixture, sample_positions, PositionConstraints, PositionGroup, PositionGroupParams, SpinSite,
};
