//! Random instance generators, brute-force oracles and seeded fuzz campaigns.

mod campaign;
mod gen;
mod oracle;

pub use campaign::{
    fuzz_campaign, replay, CampaignConfig, CampaignReport, Family, Outcome, Target, TargetSummary, TrialRow, Violation,
};
pub use gen::{
    gen_interval, gen_monotone_fn, gen_nonnegative_fn, gen_plin_outer, gen_power_profile, gen_sequence,
    gen_unsorted_raw, gen_weight_fn, Smoothness, MAX_LINEAR_KNOTS, MAX_STEP_PIECES, WEIGHT_FLOOR,
};
pub use oracle::{
    oracle_continuous, oracle_continuous_with, oracle_discrete, oracle_discrete_raw, OracleOptions, OracleValue,
};
