//! Matching under rankings-dependent utility.
//!
//! Agents are matched one-to-one to goods by random serial dictatorship (RSD)
//! or the Boston (immediate acceptance) mechanism. An agent receiving good `x`
//! that it listed `j`-th gets `v(x) + rho(j)`, so the submitted list itself
//! carries utility. The crate provides:
//!
//! * [`mechanisms`]: deterministic engines, seeded random runs, exact
//!   expectations by enumerating tie-break orders;
//! * [`equilibrium`]: closed-form and brute-force equilibria of the symmetric
//!   two-popular-goods environment, with welfare comparisons;
//! * [`simulation`]: seeded Monte Carlo over strategy profiles;
//! * [`elicitation`]: multiple price list decoding and task payment rules;
//! * [`analysis`]: session data ingestion, net values, truth-telling rates,
//!   rank tests and least squares.

pub mod analysis;
pub mod cli;
pub mod elicitation;
pub mod equilibrium;
pub mod error;
pub mod market;
pub mod mechanisms;
pub mod money;
pub mod rng;
pub mod simulation;

pub use error::{Error, Result};
pub use market::{
    outcome_welfare, received_rank, utility, Good, MarketInstance, Matching, Outcome, RankList,
    RhoSchedule, ValueMatrix, WelfareBreakdown,
};
pub use mechanisms::{MechanismKind, TieBreakOrder};
pub use money::{Cents, Exact};
