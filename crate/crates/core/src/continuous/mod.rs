//! Integral forms: sampled functions, quadrature, bound search over `s`,
//! step approximation and the classical/derived estimates.

mod bounds;
mod classical;
mod function;
mod quadrature;
mod step;

pub use bounds::{
    bound_for_triple, bound_nondecreasing, candidate_continuous, candidate_suffix, induced_sequence, lhs_integral,
    lower_bound_cont, upper_bound_cont, BoundOptions, SGrid, DEFAULT_CONT_TOL_REL, DEFAULT_S_GRID, REFINE_POINTS,
    TAIL_FRACTION,
};
pub use classical::{classical_chebyshev, derived_estimates, ClassicalReport, EstimatesReport, Relation};
pub use function::{Interval, Monotonicity, SampledFunction, Side, WeightedTriple, MONOTONE_SLACK, VALIDATION_SAMPLES};
pub use quadrature::{integrate, quadrature, Cumulative, Factor, Integrand, DEFAULT_PANELS};
pub use step::{step_approximation, step_approximation_with, StepApproximation, DEFAULT_STEP_SAMPLES};
