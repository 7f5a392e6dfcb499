//! Autocorrelation detector model for CP-OFDM primary users.
//!
//! The detector is modeled at the test-statistic level: the normalized
//! autocorrelation at lag `T_d` is Gaussian with mean 0 under H0 and mean
//! `μ₁ = T_cp/(T_d+T_cp) · γ/(1+γ)` under H1, with common standard deviation
//! `σ = 1/√(2K)` over `K = n_blocks·(T_d+T_cp)` samples. The threshold is set
//! Neyman-Pearson style for a fixed false-alarm rate.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::SQRT_2;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Useful OFDM symbol length `T_d`, in samples.
    pub useful_symbol_len: u32,
    /// Cyclic prefix length `T_cp`, in samples.
    pub cp_len: u32,
    /// Number of OFDM blocks in one sensing period.
    pub n_blocks: u32,
    pub p_fa: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            useful_symbol_len: 32,
            cp_len: 8,
            n_blocks: 100,
            p_fa: 0.05,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.useful_symbol_len == 0 || self.n_blocks == 0 {
            return Err(Error::InvalidConfig(
                "symbol length and block count must be positive".into(),
            ));
        }
        if self.cp_len == 0 || self.cp_len > self.useful_symbol_len {
            return Err(Error::InvalidConfig(format!(
                "cyclic prefix length {} must be in 1..={}",
                self.cp_len, self.useful_symbol_len
            )));
        }
        if !(self.p_fa > 0.0 && self.p_fa < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "false-alarm probability {} must lie in (0, 1)",
                self.p_fa
            )));
        }
        Ok(())
    }

    /// Samples entering the autocorrelation estimate.
    pub fn n_samples(&self) -> u64 {
        self.n_blocks as u64 * (self.useful_symbol_len + self.cp_len) as u64
    }

    /// Standard deviation of the statistic, identical under both hypotheses.
    pub fn sigma(&self) -> f64 {
        1.0 / (2.0 * self.n_samples() as f64).sqrt()
    }

    /// Mean of the statistic under H1 at the given SNR.
    pub fn h1_mean(&self, snr_db: f64) -> f64 {
        let gamma = db_to_linear(snr_db);
        let cp_fraction = self.cp_len as f64 / (self.useful_symbol_len + self.cp_len) as f64;
        cp_fraction * gamma / (1.0 + gamma)
    }

    pub fn threshold(&self) -> f64 {
        threshold_for_pfa(self, self.sigma())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Threshold `η` with `½·erfc(η/(√2σ)) = p_fa`.
pub fn threshold_for_pfa(cfg: &DetectorConfig, sigma: f64) -> f64 {
    threshold_at(cfg.p_fa, sigma)
}

fn threshold_at(p_fa: f64, sigma: f64) -> f64 {
    SQRT_2 * sigma * erfc_inv(2.0 * p_fa)
}

fn tail_probability(threshold: f64, mean: f64, sigma: f64) -> f64 {
    0.5 * erfc((threshold - mean) / (SQRT_2 * sigma))
}

/// Detection probability at a fixed false-alarm rate.
pub fn pd_from_snr(cfg: &DetectorConfig, snr_db: f64) -> f64 {
    let sigma = cfg.sigma();
    tail_probability(threshold_for_pfa(cfg, sigma), cfg.h1_mean(snr_db), sigma)
}

/// Hard local decision of one SU on one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Decision {
    /// PU present, `+1`.
    Present,
    /// PU absent, `-1`.
    Absent,
}

impl Decision {
    pub fn sign(self) -> f64 {
        match self {
            Decision::Present => 1.0,
            Decision::Absent => -1.0,
        }
    }

    pub fn is_idle(self) -> bool {
        self == Decision::Absent
    }
}

impl TryFrom<i8> for Decision {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Decision::Present),
            -1 => Ok(Decision::Absent),
            other => Err(format!("decision must be +1 or -1, got {other}")),
        }
    }
}

impl From<Decision> for i8 {
    fn from(d: Decision) -> i8 {
        match d {
            Decision::Present => 1,
            Decision::Absent => -1,
        }
    }
}

/// Draws one detector statistic and thresholds it.
pub fn simulate_local_decision<R: Rng + ?Sized>(
    cfg: &DetectorConfig,
    snr_db: f64,
    pu_present: bool,
    rng: &mut R,
) -> Decision {
    let sigma = cfg.sigma();
    let mean = if pu_present { cfg.h1_mean(snr_db) } else { 0.0 };
    let statistic = Normal::new(mean, sigma)
        .expect("sigma is positive for a validated config")
        .sample(rng);
    if statistic > threshold_for_pfa(cfg, sigma) {
        Decision::Present
    } else {
        Decision::Absent
    }
}

/// OR fusion over the SUs that sensed one channel. Nobody sensing it counts as
/// occupied so that no SU is ever sent onto a channel blind.
pub fn fuse_or(local_decisions: &[Decision]) -> Decision {
    if local_decisions.is_empty() || local_decisions.contains(&Decision::Present) {
        Decision::Present
    } else {
        Decision::Absent
    }
}

/// Fused decision per channel, `D_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionVector(pub Vec<Decision>);

impl DecisionVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> Decision {
        self.0[j]
    }

    pub fn idle_channels(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| self.0[j].is_idle()).collect()
    }

    /// Applies [`fuse_or`] column by column to an N×M grid of optional local
    /// decisions (`None` where the SU did not sense the channel).
    pub fn fuse(local: &[Vec<Option<Decision>>], n_channels: usize) -> Self {
        let decisions = (0..n_channels)
            .map(|j| {
                let column: Vec<Decision> = local.iter().filter_map(|row| row[j]).collect();
                fuse_or(&column)
            })
            .collect();
        DecisionVector(decisions)
    }
}

/// Probability assigned to every cell nobody sensed.
pub const UNSENSED_PD: f64 = 0.5;

/// Per-(SU, channel) detection probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdMatrix {
    n_sus: usize,
    n_channels: usize,
    entries: Vec<f64>,
    sensed: Vec<bool>,
}

impl PdMatrix {
    /// All cells unsensed.
    pub fn unsensed(n_sus: usize, n_channels: usize) -> Self {
        Self {
            n_sus,
            n_channels,
            entries: vec![UNSENSED_PD; n_sus * n_channels],
            sensed: vec![false; n_sus * n_channels],
        }
    }

    /// Builds the matrix from row-major tables. Unsensed cells must hold 0.5.
    pub fn from_rows(entries: &[Vec<f64>], sensed: &[Vec<bool>]) -> Result<Self> {
        let n_sus = entries.len();
        let n_channels = entries.first().map_or(0, Vec::len);
        if sensed.len() != n_sus {
            return Err(Error::DimensionMismatch(format!(
                "{} rows of probabilities but {} rows of sensing flags",
                n_sus,
                sensed.len()
            )));
        }
        let mut m = Self::unsensed(n_sus, n_channels);
        for (i, (row, flags)) in entries.iter().zip(sensed).enumerate() {
            if row.len() != n_channels || flags.len() != n_channels {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} probabilities and {} flags, expected {n_channels}",
                    row.len(),
                    flags.len()
                )));
            }
            for (j, (&p, &s)) in row.iter().zip(flags).enumerate() {
                if s {
                    m.set(i, j, p)?;
                } else if p != UNSENSED_PD {
                    return Err(Error::InvalidConfig(format!(
                        "unsensed cell ({i}, {j}) holds {p}, expected {UNSENSED_PD}"
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Records a sensed probability.
    pub fn set(&mut self, su: usize, channel: usize, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        let k = su * self.n_channels + channel;
        self.entries[k] = p;
        self.sensed[k] = true;
        Ok(())
    }

    pub fn n_sus(&self) -> usize {
        self.n_sus
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn get(&self, su: usize, channel: usize) -> f64 {
        self.entries[su * self.n_channels + channel]
    }

    pub fn is_sensed(&self, su: usize, channel: usize) -> bool {
        self.sensed[su * self.n_channels + channel]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.n_channels.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn sensed_rows(&self) -> Vec<Vec<bool>> {
        self.sensed
            .chunks(self.n_channels.max(1))
            .map(<[bool]>::to_vec)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub p_fa: f64,
    pub p_d: f64,
}

/// ROC of the detector at one SNR. False-alarm rates are swept on the
/// uniform interior grid `k/(n_points+1)`, `k = 1..=n_points`.
pub fn roc_curve(cfg: &DetectorConfig, snr_db: f64, n_points: usize) -> Result<Vec<RocPoint>> {
    if n_points < 2 {
        return Err(Error::InvalidConfig(format!(
            "ROC needs at least 2 points, got {n_points}"
        )));
    }
    let sigma = cfg.sigma();
    let mean = cfg.h1_mean(snr_db);
    Ok((1..=n_points)
        .map(|k| {
            let p_fa = k as f64 / (n_points + 1) as f64;
            let p_d = tail_probability(threshold_at(p_fa, sigma), mean, sigma);
            RocPoint { p_fa, p_d }
        })
        .collect())
}
