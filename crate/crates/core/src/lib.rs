//! Evaluation and verification engine for Chebyshev-type integral and sum
//! inequalities with convex or concave outer functions.
//!
//! * [`curvature`]: outer functions `M` with `M(0) = 0` and a curvature tag.
//! * [`discrete`]: weighted sequences, prefix-sum bounds, the merge reduction.
//! * [`continuous`]: sampled functions, quadrature, integral bounds, step approximation.
//! * [`conditions`]: Steffensen-type ratio conditions and the power-function bounds they imply.
//! * [`lab`]: random instance generators, brute-force oracles and fuzz campaigns.
//! * [`io`]: CSV/TOML input and report rows.

pub mod conditions;
pub mod continuous;
pub mod curvature;
pub mod discrete;
pub mod error;
pub mod io;
pub mod lab;
pub mod report;
pub mod sum;

pub use curvature::{Curvature, CurvedFunction};
pub use discrete::WeightedSequence;
pub use error::{Error, Result};
pub use report::{BoundKind, BoundReport, Extremum};
