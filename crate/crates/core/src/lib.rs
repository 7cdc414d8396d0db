//! Age of information under a budget-constrained jamming adversary.
//!
//! A base station serves one of `N` users per slot, picked uniformly at
//! random. An oblivious adversary commits in advance to a binary blocking
//! matrix that jams at most `floor(alpha * T)` slots, never more than one row
//! per slot. This crate computes the resulting expected-age trajectories
//! exactly, searches the adversary's strategy space exhaustively on small
//! instances, simulates the scheduler, and evaluates the closed-form bounds.
//!
//! | module | contents |
//! |---|---|
//! | [`model`] | configuration, blocking matrices, feasibility |
//! | [`exact_age`] | rational age recursion and train decomposition |
//! | [`adversary`] | block transformations, exhaustive optimum search |
//! | [`sim`] | seeded Monte Carlo of randomized and round-robin schedulers |
//! | [`bounds`] | lower/upper bounds, renewal quantities, optimality ratios |
//! | [`experiment`] | experiment specs, sweeps and artifact writers used by the `aoi` binary |
//! | [`verify`] | the structural claim suite |
//!
//! ```
//! use aoi_adversary::{exact_age, model::{BlockingMatrix, SystemConfig}, rational};
//!
//! let config = SystemConfig::with_budget(2, 3, 0).unwrap();
//! let sigma = BlockingMatrix::unblocked(&config);
//! let traj = exact_age::age_by_recursion(&config, &sigma).unwrap();
//! assert_eq!(traj.overall_mean(exact_age::Indexing::Raw), rational::frac(17, 12));
//! ```

pub mod adversary;
pub mod bounds;
pub mod error;
pub mod exact_age;
pub mod experiment;
pub mod model;
pub mod rational;
pub mod sim;
pub mod verify;

pub use error::{Error, Result, Violation};
pub use exact_age::{AgeTrajectory, Indexing};
pub use model::{BlockingMatrix, CbsDescriptor, SystemConfig};
pub use rational::Rational;
