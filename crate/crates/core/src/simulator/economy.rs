//! Game payoffs, wallets, buffers and the auction, slot after slot.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::environment::SlotEnvironment;
use super::streams::{slot_rng, Stream};
use super::ScenarioConfig;
use crate::auction::{normalized_balance, run_vcg, settle_wallets, AuctionOutcome};
use crate::game::{characteristic_function, CharacteristicFunction};
use crate::solutions::{normalize_100, PayoffVector};
use crate::Result;

/// Outgoing data buffer per SU, the demand proxy behind each bid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferState {
    pub levels: Vec<f64>,
}

impl BufferState {
    pub fn new(n_sus: usize, initial_level: f64) -> Self {
        Self {
            levels: vec![initial_level.max(0.0); n_sus],
        }
    }
}

/// Advances each buffer by one reflected Gaussian step and bids the wallet
/// fraction `min(1, level / level_cap)`.
pub fn update_bids<R: Rng + ?Sized>(
    buffers: &mut BufferState,
    wallets: &PayoffVector,
    rng: &mut R,
    cfg: &ScenarioConfig,
) -> Vec<f64> {
    let step = Normal::new(0.0, cfg.bid_walk_sigma).expect("validated sigma");
    buffers
        .levels
        .iter_mut()
        .zip(&wallets.values)
        .map(|(level, &wallet)| {
            *level = (*level + step.sample(rng)).max(0.0);
            wallet.max(0.0) * (*level / cfg.level_cap).min(1.0)
        })
        .collect()
}

/// Everything the game-theoretic side decided in one slot.
#[derive(Debug, Clone)]
pub struct SlotEconomy {
    pub game: CharacteristicFunction,
    /// Normalized payoff of the chosen solution; `None` when `v(N) = 0`.
    pub game_payoff: Option<PayoffVector>,
    /// Bidding budget after averaging with the previous balance.
    pub wallets: PayoffVector,
    pub bids: Vec<f64>,
    pub auction: AuctionOutcome,
}

#[derive(Debug, Clone)]
pub struct Economy {
    pub buffers: BufferState,
    pub prev_balance: Option<PayoffVector>,
}

impl Economy {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        Self {
            buffers: BufferState::new(cfg.n_sus, cfg.initial_level),
            prev_balance: None,
        }
    }

    pub fn step(&mut self, cfg: &ScenarioConfig, env: &SlotEnvironment, slot: u64) -> Result<SlotEconomy> {
        let game = characteristic_function(&env.pd, &env.decisions, &env.map)?;
        let game_payoff = if game.grand_worth() > 0.0 {
            let raw = cfg.solution.solve(&game)?;
            // Clip round-off negatives from the LP before rescaling.
            let clipped = PayoffVector::raw(raw.values.iter().map(|x| x.max(0.0)).collect());
            normalize_100(&clipped).ok()
        } else {
            None
        };
        let wallets = match (&game_payoff, &self.prev_balance) {
            (Some(g), prev) => settle_wallets(prev.as_ref(), g)?,
            // Nothing earned this slot: keep last slot's balance.
            (None, Some(prev)) => prev.clone(),
            (None, None) => PayoffVector::normalized(vec![100.0 / cfg.n_sus as f64; cfg.n_sus]),
        };
        let bids = self.bids_for(cfg, &wallets, slot);
        let auction = run_vcg(
            &wallets.values,
            &bids,
            &env.idle_channels(),
            &env.capacities,
            &cfg.auction,
        )?;
        self.prev_balance = normalized_balance(&auction);
        Ok(SlotEconomy {
            game,
            game_payoff,
            wallets,
            bids,
            auction,
        })
    }

    fn bids_for(&mut self, cfg: &ScenarioConfig, wallets: &PayoffVector, slot: u64) -> Vec<f64> {
        let mut rng = slot_rng(cfg.seed, Stream::Buffers, slot);
        update_bids(&mut self.buffers, wallets, &mut rng, cfg)
    }
}
