//! The Bernoulli convolution `ν_λ`: dyadic histogram, branching counters
//! and local/Frostman exponent estimates.

mod counting;
mod histogram;
mod local;
mod sampled;

pub use counting::{
    count_d, count_expansions, count_nk, count_nk_with_budget, enumerate_d, BranchCount, DEFAULT_NODE_BUDGET,
};
pub use histogram::{build_histogram, default_iterations, DyadicHistogram, MAX_LEVEL, RESIDUAL_TOLERANCE};
pub use sampled::{sample_nk, SampledCount, MAX_PROBE_STEPS, MIN_PROBES};
pub use local::{frostman_exponent, local_dim_estimate, FrostmanReport, LocalDimFit};
