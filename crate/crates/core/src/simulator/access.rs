//! Channel access under each allocation model.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::economy::SlotEconomy;
use super::environment::SlotEnvironment;
use super::report::{Access, SlotMetrics};
use super::streams::{slot_rng, Stream};
use super::{Model, ScenarioConfig};
use crate::auction::CapacityEstimates;
use crate::{Error, Result};

/// Backoff model for uncoordinated (CSMA-like) access.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentionConfig {
    pub max_rounds: usize,
    /// Probability that a contender sits out a round.
    pub defer_prob: f64,
    /// Share of the slot lost per elapsed backoff round.
    pub penalty_per_round: f64,
}

impl Default for ContentionConfig {
    fn default() -> Self {
        Self {
            max_rounds: 3,
            defer_prob: 0.5,
            penalty_per_round: 0.25,
        }
    }
}

impl ContentionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0
            || !(0.0..1.0).contains(&self.defer_prob)
            || !(0.0..=1.0).contains(&self.penalty_per_round)
        {
            return Err(Error::InvalidConfig(format!("bad contention model {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContentionResult {
    /// Contender `index` got the channel after `rounds` rounds and keeps
    /// `rate_factor` of the slot.
    Won {
        index: usize,
        rounds: usize,
        rate_factor: f64,
    },
    /// Nobody got through in time; the channel is wasted for this slot.
    Wasted,
}

/// Each round every contender defers independently; a round with exactly one
/// transmitter resolves the contention.
pub fn resolve_contention<R: Rng + ?Sized>(
    n_contenders: usize,
    cfg: &ContentionConfig,
    rng: &mut R,
) -> ContentionResult {
    if n_contenders == 1 {
        return ContentionResult::Won {
            index: 0,
            rounds: 0,
            rate_factor: 1.0,
        };
    }
    for round in 1..=cfg.max_rounds {
        let transmitting: Vec<usize> = (0..n_contenders)
            .filter(|_| !rng.random_bool(cfg.defer_prob))
            .collect();
        if let [only] = transmitting[..] {
            return ContentionResult::Won {
                index: only,
                rounds: round,
                rate_factor: (1.0 - cfg.penalty_per_round * round as f64).max(0.0),
            };
        }
    }
    ContentionResult::Wasted
}

/// Hamilton apportionment of `seats` by `weights`: floors first, leftovers to
/// the largest remainders (lowest index on ties). Zero weights get nothing.
pub fn apportion_largest_remainder(weights: &[f64], seats: usize) -> Vec<usize> {
    let total: f64 = weights.iter().filter(|w| **w > 0.0).sum();
    if total <= 0.0 || seats == 0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights
        .iter()
        .map(|&w| if w > 0.0 { w / total * seats as f64 } else { 0.0 })
        .collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q.floor() as usize).min(seats)).collect();
    let mut left = seats.saturating_sub(counts.iter().sum());
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for i in order {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// `su`'s `k` best channels among `candidates`, best first.
fn top_channels(caps: &CapacityEstimates, su: usize, candidates: &[usize], k: usize) -> Vec<usize> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|&a, &b| caps.get(su, b).total_cmp(&caps.get(su, a)).then(a.cmp(&b)));
    sorted.truncate(k);
    sorted
}

/// Deals `idle` channels in index order starting at SU `*next`, advancing the
/// pointer so turns carry over to the next slot.
pub fn jsrr_allocate(idle: &[usize], n_sus: usize, next: &mut usize) -> Vec<(usize, usize)> {
    idle.iter()
        .map(|&j| {
            let su = *next % n_sus;
            *next = (su + 1) % n_sus;
            (su, j)
        })
        .collect()
}

/// Each idle channel to the SU with the highest estimate on it.
pub fn jsrm_allocate(idle: &[usize], caps: &CapacityEstimates) -> Vec<(usize, usize)> {
    idle.iter()
        .map(|&j| {
            let su = (0..caps.n_sus())
                .max_by(|&a, &b| caps.get(a, j).total_cmp(&caps.get(b, j)).then(b.cmp(&a)))
                .expect("at least one SU");
            (su, j)
        })
        .collect()
}

pub(super) fn run_access(
    cfg: &ScenarioConfig,
    model: Model,
    env: &SlotEnvironment,
    econ: &SlotEconomy,
    rr_next: &mut usize,
    slot: u64,
) -> SlotMetrics {
    let n = cfg.n_sus;
    let idle = env.idle_channels();
    let mut metrics = SlotMetrics::new(slot, n, idle.len(), &econ.bids, &econ.wallets.values);
    let caps = &env.capacities;

    let grant = |metrics: &mut SlotMetrics, su: usize, channel: usize, factor: f64| {
        metrics.channels_won[su] += 1;
        let free = !env.pu_present[channel];
        let rate = if free { caps.get(su, channel) * factor } else { 0.0 };
        if free {
            metrics.rates[su] += rate;
        } else {
            metrics.missed_detections[su] += 1;
        }
        metrics.accesses.push(Access {
            su,
            channel,
            channel_free: free,
            rate_mbps: rate,
        });
    };

    match model {
        Model::Cgjsja => {
            for r in &econ.auction.rounds {
                grant(&mut metrics, r.winner, r.channel, 1.0);
            }
        }
        Model::Jsrr => {
            for (su, j) in jsrr_allocate(&idle, n, rr_next) {
                grant(&mut metrics, su, j, 1.0);
            }
        }
        Model::Jsrm => {
            for (su, j) in jsrm_allocate(&idle, caps) {
                grant(&mut metrics, su, j, 1.0);
            }
        }
        Model::Jspa | Model::Ispa => {
            let targets: Vec<Vec<usize>> = if model == Model::Jspa {
                let k = apportion_largest_remainder(&econ.bids, idle.len());
                (0..n).map(|i| top_channels(caps, i, &idle, k[i])).collect()
            } else {
                let total: f64 = econ.bids.iter().sum();
                (0..n)
                    .map(|i| {
                        let own = env.locally_idle(i);
                        let k = if total > 0.0 {
                            ((econ.bids[i] / total * own.len() as f64).round() as usize).min(own.len())
                        } else {
                            0
                        };
                        top_channels(caps, i, &own, k)
                    })
                    .collect()
            };
            let mut rng = slot_rng(cfg.seed, Stream::Backoff(model), slot);
            for j in 0..cfg.n_channels {
                let contenders: Vec<usize> = (0..n).filter(|&i| targets[i].contains(&j)).collect();
                if contenders.is_empty() {
                    continue;
                }
                if env.pu_present[j] {
                    // Missed detection: the PU is there, every transmission is lost.
                    for &i in &contenders {
                        grant(&mut metrics, i, j, 0.0);
                    }
                    continue;
                }
                if contenders.len() > 1 {
                    for &i in &contenders {
                        metrics.collisions[i] += 1;
                    }
                }
                if let ContentionResult::Won {
                    index, rate_factor, ..
                } = resolve_contention(contenders.len(), &cfg.contention, &mut rng)
                {
                    grant(&mut metrics, contenders[index], j, rate_factor);
                }
            }
        }
    }
    metrics
}
