//! The block construction: parameters, Γ_M, Δ, its entropy, tracing and
//! empirical-measure checks.

pub mod blocks;
pub mod entropy;
pub mod params;
pub mod proximity;
pub mod tracing;

pub use blocks::{block_distance, build_delta, sample_block_set, BlockMeta, BlockSubshift, DeltaPoint, SampleSpec, SAMPLING_BUDGET};
pub use entropy::{
    delta_pattern_count, delta_pattern_count_brute, grid_pattern_count_enumerated, separated_pair_check, verify_sandwich,
    window_pattern_count,
    SandwichReport, SeparatedPairsReport,
};
pub use params::{choose_params, smallest_k, ConstructionParams, ModeFlag, ParamCheck, ParamInput};
pub use proximity::{
    disjointness_experiment, membership_z, proximity_check, sample_point, DisjointReport, DisjointSpec, ProximityReport, ProximitySpec,
    ZReport,
};
pub use tracing::{trace_targets, Trace, TraceSystem};
