//! Numerical library for dyadic oscillation functionals: BMO-type norms and
//! weak oscillation functionals over dyadic step functions, an explicit
//! locally convex sub-solution of the associated extremal problem on a
//! parabolic strip, gauge regularization, rising-sun decompositions, and two
//! counterexample constructions — all at desk scale with pinned tolerances.

pub mod bellman;
pub mod counterexample;
pub mod dyadic;
pub mod error;
pub mod gauge;
pub mod oscillation;
pub mod regularize;
pub mod rising_sun;
pub mod util;

pub use bellman::{
    bellman_induction_check, bellman_oracle, g_eval, local_convexity_fuzz, lower_bound_a,
    omega_contains, seam_continuity_check, segment_domain_check, GEvaluator, OracleResult,
    SlopeFunction,
};
pub use counterexample::{
    adversarial_ratio_search, dip_gauge, haar_series_audit, haar_series_build, section6_gauge,
    verify_sqrt10m, HaarAuditReport, HaarSeriesSpec, Sqrt10MReport,
};
pub use dyadic::{all_cubes, max_depth, DyadicCube, DyadicSimpleFunction};
pub use error::{Error, Result};
pub use gauge::{
    audit_flags, log_grid, triangle_inequality_audit, FlagAuditReport, GaugeFlags,
    OscillationGauge, TriangleAudit,
};
pub use oscillation::{
    bmo_dyadic, bmo_grid, grid_cap, k_h_dyadic, k_h_grid, per_cube_table, truncation_gap_check,
    OscillationReport, PerCubeRow, TruncationGapReport, Witness,
};
pub use regularize::{regularize, RegularizedGauge};
pub use rising_sun::{rising_sun, rising_sun_pieces};
pub use util::{pairwise_sum, pairwise_sum_by, rng_for};
