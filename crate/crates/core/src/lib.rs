//! Cooperative spectrum sensing and sharing for cognitive radios, modeled as a
//! transferable-utility coalitional game.
//!
//! The pipeline runs once per time slot:
//!
//! 1. [`detection`] maps per-SU sensing SNRs to detection probabilities and
//!    fuses hard local decisions with the OR rule.
//! 2. [`game`] turns the detection probabilities, the fused decisions and the
//!    sensing map into an entropy-based characteristic function.
//! 3. [`solutions`] distributes the grand coalition's worth (Shapley value,
//!    τ-value, nucleolus) and checks core membership.
//! 4. [`auction`] sells the idle channels to bidding SUs with a sequential
//!    second-price-plus-increment auction and settles the wallets.
//! 5. [`simulator`] drives the whole loop over many slots and compares the
//!    game-theoretic allocation with four baseline access models.

pub mod auction;
pub mod coalition;
pub mod detection;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod properties;
pub mod simulator;
pub mod solutions;

pub use error::{Error, Result};
