//! Energy-efficiency maximization for D2D pairs reusing cellular uplink RBs.
//!
//! The crate is organized bottom-up:
//!
//! - [`channel`]: cell drops, pathloss/shadowing gains and link rates.
//! - [`cubic`]: closed-form real roots of cubics.
//! - [`power`]: optimal per-(pair, RB) transmit power for a fixed EE ratio.
//! - [`assignment`]: one-RB-per-pair maximum-weight assignment.
//! - [`dinkelbach`]: the outer EE-ratio iteration and a brute-force oracle.
//! - [`experiment`]: seeded Monte-Carlo sweeps with CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod channel;
pub mod cubic;
pub mod dinkelbach;
pub mod error;
pub mod experiment;
pub mod power;

pub use assignment::{max_weight_assignment, Assignment, AssignmentPolicy};
pub use channel::{generate_scenario, CellConfig, ProblemInstance, Scenario};
pub use cubic::{real_roots, CubicCoefficients};
pub use dinkelbach::{solve, Solution, SolverConfig};
pub use error::{Error, Result};
pub use power::{PowerDecision, RateMode};
