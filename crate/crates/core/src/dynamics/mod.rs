//! Replica generation: pump schedules and the two spin-dynamics engines.

mod descent;
mod ensemble;
mod integrator;
mod schedule;
mod semiclassical;

pub use descent::{descend, DescentOptions, DescentOutcome};
pub use ensemble::{
    binarize, binarize_ensemble, default_replica_count, evolve_replica, generate_ensemble, random_sign_ensemble, Engine,
    ReplicaEnsemble, SpinConfiguration,
};
pub use schedule::RampSchedule;
pub use semiclassical::{integrate_semiclassical, SemiclassicalOptions, Trajectory};
