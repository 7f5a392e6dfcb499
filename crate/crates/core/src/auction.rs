//! Sequential second-price channel auction run by the fusion center.
//!
//! Each round the highest remaining bidder takes the unallocated idle channel
//! with the best capacity estimate for it and pays the runner-up's bid plus
//! an increment. The price is deducted from its bid and the bids are ranked
//! again until either the idle channels or the positive bids run out.

use serde::{Deserialize, Serialize};

use crate::solutions::{normalize_100, PayoffVector};
use crate::{Error, Result};

/// Per-(SU, channel) achievable rate estimates in Mbps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimates {
    n_sus: usize,
    n_channels: usize,
    entries: Vec<f64>,
}

impl CapacityEstimates {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_channels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_channels) {
            return Err(Error::DimensionMismatch(
                "capacity rows have unequal lengths".into(),
            ));
        }
        if let Some(c) = rows.iter().flatten().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidConfig(format!("capacity estimate {c} is not a finite non-negative rate")));
        }
        Ok(Self {
            n_sus: rows.len(),
            n_channels,
            entries: rows.concat(),
        })
    }

    pub fn get(&self, su: usize, channel: usize) -> f64 {
        self.entries[su * self.n_channels + channel]
    }

    pub fn n_sus(&self) -> usize {
        self.n_sus
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.n_channels.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// Channel in `candidates` with the largest estimate for `su`, lowest index on ties.
    pub fn best_for(&self, su: usize, candidates: impl IntoIterator<Item = usize>) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in candidates {
            best = match best {
                Some(b) if self.get(su, j) > self.get(su, b) || (self.get(su, j) == self.get(su, b) && j < b) => Some(j),
                Some(b) => Some(b),
                None => Some(j),
            };
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuctionConfig {
    pub increment: f64,
    /// Price charged when nobody else holds a positive bid: the increment, or
    /// nothing at all.
    pub sole_bidder_pays_increment: bool,
}

impl Default for AuctionConfig {
    fn default() -> Self {
        Self {
            increment: 1e-4,
            sole_bidder_pays_increment: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionRound {
    pub winner: usize,
    pub channel: usize,
    pub price: f64,
    /// Winner's bid when the round opened.
    pub bid: f64,
    /// Winner's bid after paying.
    pub residual: f64,
    /// Every SU's bid when the round opened.
    pub bids: Vec<f64>,
    /// Winner's capacity estimate on the channel.
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub rounds: Vec<AuctionRound>,
    /// Winning SU per channel, `None` when the channel was not sold.
    pub allocation: Vec<Option<usize>>,
    /// Wallets after paying.
    pub balances: Vec<f64>,
    /// Bids left over after the last round.
    pub residual_bids: Vec<f64>,
}

impl AuctionOutcome {
    pub fn channels_won(&self, su: usize) -> usize {
        self.allocation.iter().filter(|a| **a == Some(su)).count()
    }

    pub fn paid_by(&self, su: usize) -> f64 {
        self.rounds
            .iter()
            .filter(|r| r.winner == su)
            .map(|r| r.price)
            .sum()
    }
}

pub fn run_vcg(
    wallets: &[f64],
    bids: &[f64],
    idle: &[usize],
    caps: &CapacityEstimates,
    cfg: &AuctionConfig,
) -> Result<AuctionOutcome> {
    let n = wallets.len();
    if bids.len() != n || caps.n_sus() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} wallets, {} bids, {} capacity rows",
            bids.len(),
            caps.n_sus()
        )));
    }
    if !(cfg.increment > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "bid increment must be positive, got {}",
            cfg.increment
        )));
    }
    for (i, (&b, &w)) in bids.iter().zip(wallets).enumerate() {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::InvalidBid(format!("SU {} bids {b}", i + 1)));
        }
        if b > w * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::InvalidBid(format!(
                "SU {} bids {b} with only {w} in its wallet",
                i + 1
            )));
        }
    }
    if let Some(&j) = idle.iter().find(|&&j| j >= caps.n_channels()) {
        return Err(Error::DimensionMismatch(format!(
            "idle channel {j} out of range for {} channels",
            caps.n_channels()
        )));
    }

    let mut current = bids.to_vec();
    let mut balances = wallets.to_vec();
    let mut allocation = vec![None; caps.n_channels()];
    let mut unallocated: Vec<usize> = idle.to_vec();
    unallocated.sort_unstable();
    unallocated.dedup();
    let mut rounds = Vec::new();

    while !unallocated.is_empty() {
        let Some(winner) = highest_bidder(&current, None) else {
            break;
        };
        let bid = current[winner];
        let runner_up = highest_bidder(&current, Some(winner)).map(|i| current[i]);
        let price = match runner_up {
            Some(second) => (second + cfg.increment).min(bid),
            None if cfg.sole_bidder_pays_increment => cfg.increment.min(bid),
            None => 0.0,
        };
        let channel = caps
            .best_for(winner, unallocated.iter().copied())
            .expect("unallocated is non-empty");
        unallocated.retain(|&j| j != channel);
        allocation[channel] = Some(winner);
        let opening_bids = current.clone();
        current[winner] = (bid - price).max(0.0);
        balances[winner] -= price;
        rounds.push(AuctionRound {
            winner,
            channel,
            price,
            bid,
            residual: current[winner],
            bids: opening_bids,
            capacity: caps.get(winner, channel),
        });
    }

    Ok(AuctionOutcome {
        rounds,
        allocation,
        balances,
        residual_bids: current,
    })
}

/// Highest positive bid, lowest SU index on ties.
fn highest_bidder(bids: &[f64], excluding: Option<usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &b) in bids.iter().enumerate() {
        if Some(i) == excluding || b <= 0.0 {
            continue;
        }
        if best.is_none_or(|k| b > bids[k]) {
            best = Some(i);
        }
    }
    best
}

/// Bidding budget for the coming slot.
///
/// First slot: the normalized game payoff. Afterwards: the component-wise mean
/// of the previous slot's normalized post-auction balance and the current
/// normalized game payoff. An absent or all-zero balance falls back to the
/// game payoff.
pub fn settle_wallets(
    prev_norm_balance: Option<&PayoffVector>,
    game_payoff_norm: &PayoffVector,
) -> Result<PayoffVector> {
    let Some(prev) = prev_norm_balance.filter(|p| p.total() > 0.0) else {
        return Ok(PayoffVector::normalized(game_payoff_norm.values.clone()));
    };
    if prev.len() != game_payoff_norm.len() {
        return Err(Error::DimensionMismatch(format!(
            "previous balance has {} entries, game payoff {}",
            prev.len(),
            game_payoff_norm.len()
        )));
    }
    Ok(PayoffVector::normalized(
        prev.values
            .iter()
            .zip(&game_payoff_norm.values)
            .map(|(a, b)| 0.5 * (a + b))
            .collect(),
    ))
}

/// Post-auction balances rescaled to 100, or `None` when nothing is left.
pub fn normalized_balance(outcome: &AuctionOutcome) -> Option<PayoffVector> {
    normalize_100(&PayoffVector::raw(
        outcome.balances.iter().map(|b| b.max(0.0)).collect(),
    ))
    .ok()
}
