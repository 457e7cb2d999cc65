//! Random walks on groups and on coset spaces.

mod bounds;
mod chain;
mod measure;
mod probe;
mod simulate;

pub use bounds::{
    c_speed_bound, certify_ball_probability, t_speed_bound, thm_a_bound, CSpeedBound,
    Certification, CertificationRow, MonotoneTable, TSpeedBound,
};
pub use chain::{
    exact_coset_distribution, ChainMode, CosetChain, CosetDistribution, DEFAULT_CHAIN_BUDGET,
};
pub use measure::WalkMeasure;
pub use probe::{
    cautiousness_probe, lyons_bound, lyons_check, lyons_holds, speed_table, CautiousProbe,
    CautiousRow, LyonsRow, LyonsTable, McEstimate, SpeedRow, SpeedTable, Z_SIGMAS,
};
pub use simulate::{checkpoints, simulate_walk, CheckpointStats, Moments, WalkConfig, WalkStats};
