//! Construction and verification of (t, α)-undominated committees for
//! ordinal elections.
//!
//! A committee `C` is (t, α)-undominated when, for every candidate `a`
//! outside `C`, at most ⌊α·n⌋ voters rank fewer than `t` members of `C`
//! above `a`. For `t = 1` and `α = 1/2` this is a Condorcet winning set.
//!
//! The crate computes approximate Lindahl equilibria with ordinal
//! preferences (and their scaled, capped variant), rounds the resulting
//! fractional allocations into committees, and checks every committee with
//! an exhaustive verifier. It also evaluates the analytic committee-size
//! bounds and builds the cyclic lower-bound instance.
//!
//! ## Modules
//!
//! - [`election`]: profiles, t-preference, undominance checks, brute-force oracle
//! - [`income`]: piecewise-linear income distributions on `[0, 1]`
//! - [`equilibrium`]: ordinal demand, producer response, fixed-point solver
//! - [`rounding`]: i.i.d. lottery sampling and dependent (pipage) rounding
//! - [`builder`]: the three committee constructions
//! - [`analytics`]: α(k), ω(γ, t), s1, s2, δ(t), η_t and the lower bound
//! - [`adversarial`]: the cyclic lower-bound profile and its certification
//! - [`cli`]: command-line front end and run reports

pub mod adversarial;
pub mod analytics;
pub mod builder;
pub mod cli;
pub mod election;
pub mod equilibrium;
pub mod error;
pub mod income;
pub mod ratio;
pub mod rounding;
pub mod seed;
pub mod subsets;

pub use election::{Committee, Election, UndominanceReport};
pub use error::{Error, Result};
pub use income::IncomeDistribution;
pub use ratio::Alpha;
