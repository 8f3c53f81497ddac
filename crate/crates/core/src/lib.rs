//! Bandits with knapsacks through the lens of the primal and dual LPs.
//!
//! The crate is organised bottom-up:
//!
//! * [`lp`]: dense two-phase simplex (Bland's rule) plus a vertex-enumeration oracle.
//! * [`instance`]: problem instances with the null-arm/time-row convention, the
//!   LP family built from them and the problem-dependent diagnostics.
//! * [`environment`]: the stochastic knapsack process and its stopping time.
//! * [`estimators`]: empirical means, projected confidence intervals and the
//!   confidence-bound LPs.
//! * [`policy`]: the two-phase and one-phase adaptive policies and baselines.
//! * [`harness`]: seeded episodes, replication sweeps, regret reports and fits.
//! * [`config`]: experiment configuration used by the `bwk` binary.
//!
//! Arms and constraints are indexed from zero. Constraint 0 is the time
//! resource and arm `m - 1` is the null arm.

pub mod config;
pub mod environment;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod instance;
pub mod lp;
pub mod policy;
pub mod rng;

pub use error::{Error, Result};
