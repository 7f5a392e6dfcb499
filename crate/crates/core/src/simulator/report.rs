//! Per-slot metrics, summaries and CSV output.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::Model;
use crate::{Error, Result};

/// What one model achieved in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotMetrics {
    pub slot: u64,
    /// Channels declared idle by the fused decision.
    pub idle_count: usize,
    /// Achieved rate per SU in Mbps.
    pub rates: Vec<f64>,
    pub channels_won: Vec<usize>,
    pub collisions: Vec<usize>,
    pub missed_detections: Vec<usize>,
    pub bids: Vec<f64>,
    pub wallets: Vec<f64>,
    /// Every channel use in the slot; not part of the CSV output.
    #[serde(skip)]
    pub accesses: Vec<Access>,
}

/// One SU transmitting on one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Access {
    pub su: usize,
    pub channel: usize,
    /// False when the PU was active, so the transmission was lost.
    pub channel_free: bool,
    pub rate_mbps: f64,
}

impl SlotMetrics {
    pub fn new(slot: u64, n_sus: usize, idle_count: usize, bids: &[f64], wallets: &[f64]) -> Self {
        Self {
            slot,
            idle_count,
            rates: vec![0.0; n_sus],
            channels_won: vec![0; n_sus],
            collisions: vec![0; n_sus],
            missed_detections: vec![0; n_sus],
            bids: bids.to_vec(),
            wallets: wallets.to_vec(),
            accesses: Vec::new(),
        }
    }

    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn total_missed(&self) -> usize {
        self.missed_detections.iter().sum()
    }
}

/// Five-number summary plus mean, with linearly interpolated quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxStats {
    /// `None` for an empty sample.
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let quantile = |q: f64| {
            let pos = q * (s.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
        };
        Some(Self {
            min: s[0],
            q1: quantile(0.25),
            median: quantile(0.5),
            mean: s.iter().sum::<f64>() / s.len() as f64,
            q3: quantile(0.75),
            max: s[s.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuSummary {
    pub su: usize,
    pub rate: BoxStats,
    pub cumulative_rate: f64,
    pub channels_won: usize,
    pub collisions: usize,
    pub missed_detections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub model: Model,
    pub n_slots: usize,
    pub per_su: Vec<SuSummary>,
    pub cumulative_sum_rate: f64,
    pub total_missed_detections: usize,
    pub total_collisions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterRecord {
    pub slot: u64,
    pub su: usize,
    /// Bid as a share of all bids in the slot.
    pub normalized_bid: f64,
    pub channels_won: usize,
    pub idle_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub model: Model,
    pub n_sus: usize,
    pub slots: Vec<SlotMetrics>,
}

impl SimulationResult {
    pub fn new(model: Model, n_sus: usize, slots: Vec<SlotMetrics>) -> Self {
        Self { model, n_sus, slots }
    }

    pub fn summary(&self) -> SimulationSummary {
        let per_su: Vec<SuSummary> = (0..self.n_sus)
            .map(|i| {
                let rates: Vec<f64> = self.slots.iter().map(|s| s.rates[i]).collect();
                SuSummary {
                    su: i,
                    rate: BoxStats::from_samples(&rates).unwrap_or(BoxStats {
                        min: 0.0,
                        q1: 0.0,
                        median: 0.0,
                        mean: 0.0,
                        q3: 0.0,
                        max: 0.0,
                    }),
                    cumulative_rate: rates.iter().sum(),
                    channels_won: self.slots.iter().map(|s| s.channels_won[i]).sum(),
                    collisions: self.slots.iter().map(|s| s.collisions[i]).sum(),
                    missed_detections: self.slots.iter().map(|s| s.missed_detections[i]).sum(),
                }
            })
            .collect();
        SimulationSummary {
            model: self.model,
            n_slots: self.slots.len(),
            cumulative_sum_rate: per_su.iter().map(|s| s.cumulative_rate).sum(),
            total_missed_detections: per_su.iter().map(|s| s.missed_detections).sum(),
            total_collisions: per_su.iter().map(|s| s.collisions).sum(),
            per_su,
        }
    }

    /// Running total of each SU's rate, one row per slot.
    pub fn cumulative_series(&self) -> Vec<Vec<f64>> {
        let mut acc = vec![0.0; self.n_sus];
        self.slots
            .iter()
            .map(|s| {
                for (a, r) in acc.iter_mut().zip(&s.rates) {
                    *a += r;
                }
                acc.clone()
            })
            .collect()
    }

    /// Slots where nobody bid are skipped.
    pub fn scatter(&self) -> Vec<ScatterRecord> {
        self.slots
            .iter()
            .flat_map(|s| {
                let total: f64 = s.bids.iter().sum();
                (0..self.n_sus).filter(move |_| total > 0.0).map(move |i| ScatterRecord {
                    slot: s.slot,
                    su: i,
                    normalized_bid: s.bids[i] / total,
                    channels_won: s.channels_won[i],
                    idle_count: s.idle_count,
                })
            })
            .collect()
    }

    /// Rank correlation between normalized bid and channels won over the slots
    /// with exactly `idle_count` idle channels.
    pub fn bid_channel_correlation(&self, idle_count: usize) -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .scatter()
            .into_iter()
            .filter(|r| r.idle_count == idle_count)
            .map(|r| (r.normalized_bid, r.channels_won as f64))
            .unzip();
        spearman(&x, &y)
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        // Ties share the average of their 1-based ranks.
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

/// Spearman's rho with average ranks for ties. `None` when either sample is
/// constant or the lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidConfig(format!("csv output failed: {e}"))
}

#[derive(Serialize)]
struct SlotRow {
    slot: u64,
    su: usize,
    rate_mbps: f64,
    n_channels_won: usize,
    bid: f64,
    wallet: f64,
    collisions: usize,
    missed_detections: usize,
}

pub fn write_slots_csv<W: Write>(result: &SimulationResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in &result.slots {
        for su in 0..result.n_sus {
            w.serialize(SlotRow {
                slot: s.slot,
                su,
                rate_mbps: s.rates[su],
                n_channels_won: s.channels_won[su],
                bid: s.bids[su],
                wallet: s.wallets[su],
                collisions: s.collisions[su],
                missed_detections: s.missed_detections[su],
            })
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| csv_err(e.into()))
}

pub fn write_scatter_csv<W: Write>(result: &SimulationResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in result.scatter() {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| csv_err(e.into()))
}

/// One row per (model, slot, su) with the running rate total.
pub fn write_cumulative_csv<W: Write>(results: &[SimulationResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model", "slot", "su", "cumulative_rate_mbps"])
        .map_err(csv_err)?;
    for r in results {
        for (s, row) in r.slots.iter().zip(r.cumulative_series()) {
            for (su, c) in row.iter().enumerate() {
                w.write_record([
                    r.model.key().to_string(),
                    s.slot.to_string(),
                    su.to_string(),
                    c.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(|e| csv_err(e.into()))
}
