//! Shrinking targets: preimages, covers, box counting, the Cantor measures
//! on the return set and the probes built on them.

mod boxcount;
mod cover;
mod energy;
mod measure;
mod probe;
mod target;

pub use boxcount::{
    attractor_depth, attractor_rects, box_count, dim_box_estimate, dim_f_estimate, occupied_cells, render_pgm, BoxDimFit,
    MAX_BOX_LEVEL, MAX_PROJECTED_CELLS,
};
pub use cover::{best_strategy, cover_count, covers_to_csv, estimate_log_nk, CoverCount, NkEstimate, Strategy, NK_NODE_BUDGET, NK_PROBES};
pub use target::{dynamical_membership, preimage_rects, TargetSpec, MAX_PREIMAGE_DEPTH};
pub use measure::{Cursor, MeasureCase, MeasureSpec, Schedule, DEFAULT_GROWTH, MAX_BLOCK_MEMBERS, MAX_COVERAGE, MAX_RETURNS};
pub use probe::{ball_depth, local_dim_probe, mu_ball, mu_ball_with_budget, sampled_probes, BallMass, ProbeReport, ProbeRow, MU_BALL_NODE_BUDGET};
pub use energy::{energy_estimate, energy_estimate_with, energy_trend, EnergyEstimate, EnergyMethod, EnergyTrend, GROWTH_RATIO, MIN_PAIRS};
