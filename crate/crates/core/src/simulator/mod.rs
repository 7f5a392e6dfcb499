//! Multi-slot simulation of joint sensing and access.
//!
//! Every slot draws a shared environment (PU activity, sensing map, sensing
//! and transmission SNRs, local decisions), fuses it, plays the sensing game,
//! settles wallets and runs the auction. The access step then differs per
//! model:
//!
//! - `CG-JSJA`: channels go to auction winners.
//! - `JSPA`: fused idle set, bid-proportional self-selection, CSMA contention.
//! - `ISPA`: like JSPA but each SU trusts only its own decisions.
//! - `JSRR`: fused idle set dealt round-robin.
//! - `JSRM`: each fused idle channel to the SU with the best capacity on it.
//!
//! The game, wallets and bids evolve identically under every model, so the
//! baselines see exactly the bids the game-theoretic model would have used.

mod access;
mod economy;
mod environment;
mod report;
pub mod streams;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::auction::AuctionConfig;
use crate::detection::DetectorConfig;
use crate::solutions::SolutionConcept;
use crate::{Error, Result};

pub use access::{
    apportion_largest_remainder, jsrm_allocate, jsrr_allocate, resolve_contention,
    ContentionConfig, ContentionResult,
};
pub use economy::{update_bids, BufferState, Economy, SlotEconomy};
pub use environment::{build_sensing_map, estimate_capacities, SlotEnvironment};
pub use report::{
    spearman, write_cumulative_csv, write_scatter_csv, write_slots_csv, Access, BoxStats,
    ScatterRecord, SimulationResult, SimulationSummary, SlotMetrics, SuSummary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Cgjsja,
    Jspa,
    Ispa,
    Jsrr,
    Jsrm,
}

impl Model {
    pub const ALL: [Model; 5] = [
        Model::Cgjsja,
        Model::Jspa,
        Model::Ispa,
        Model::Jsrr,
        Model::Jsrm,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Model::Cgjsja => "CG-JSJA",
            Model::Jspa => "JSPA",
            Model::Ispa => "ISPA",
            Model::Jsrr => "JSRR",
            Model::Jsrm => "JSRM",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Model::Cgjsja => "cgjsja",
            Model::Jspa => "jspa",
            Model::Ispa => "ispa",
            Model::Jsrr => "jsrr",
            Model::Jsrm => "jsrm",
        }
    }

    /// Whether access relies on the fused decision.
    pub fn joint_sensing(self) -> bool {
        self != Model::Ispa
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Model::ALL
            .into_iter()
            .find(|m| m.key() == key)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_sus: usize,
    pub n_channels: usize,
    pub n_slots: usize,
    pub snr_low_db: f64,
    pub snr_high_db: f64,
    pub bandwidth_hz: f64,
    /// Probability that the PU occupies a channel in a slot.
    pub pu_activity_prob: f64,
    /// Standard deviation of one buffer random-walk step.
    pub bid_walk_sigma: f64,
    /// Buffer level at which an SU bids its whole wallet.
    pub level_cap: f64,
    pub initial_level: f64,
    /// Channels each SU asks to sense; defaults to ⌈2M/3⌉ for everyone.
    pub sensing_prefs: Option<Vec<usize>>,
    pub seed: u64,
    pub model: Model,
    pub solution: SolutionConcept,
    pub auction: AuctionConfig,
    pub detector: DetectorConfig,
    pub contention: ContentionConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_sus: 3,
            n_channels: 5,
            n_slots: 1000,
            snr_low_db: -25.0,
            snr_high_db: -5.0,
            bandwidth_hz: 7e6,
            pu_activity_prob: 0.5,
            bid_walk_sigma: 1.0,
            level_cap: 4.0,
            initial_level: 2.0,
            sensing_prefs: None,
            seed: 0,
            model: Model::Cgjsja,
            solution: SolutionConcept::Nucleolus,
            auction: AuctionConfig::default(),
            detector: DetectorConfig::default(),
            contention: ContentionConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_sus == 0 || self.n_channels == 0 || self.n_slots == 0 {
            return fail("SU, channel and slot counts must be positive".into());
        }
        if self.n_sus > crate::solutions::MAX_GAME_PLAYERS {
            return fail(format!(
                "at most {} SUs are supported",
                crate::solutions::MAX_GAME_PLAYERS
            ));
        }
        if !(self.snr_low_db < self.snr_high_db) {
            return fail(format!(
                "SNR range [{}, {}] is empty",
                self.snr_low_db, self.snr_high_db
            ));
        }
        if !(self.bandwidth_hz > 0.0) {
            return fail("bandwidth must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.pu_activity_prob) {
            return fail(format!("PU activity probability {}", self.pu_activity_prob));
        }
        if !(self.bid_walk_sigma > 0.0) || !(self.level_cap > 0.0) || !(self.initial_level >= 0.0) {
            return fail("buffer walk parameters must be positive".into());
        }
        if let Some(prefs) = &self.sensing_prefs {
            if prefs.len() != self.n_sus {
                return fail(format!(
                    "{} sensing preferences for {} SUs",
                    prefs.len(),
                    self.n_sus
                ));
            }
            if let Some(p) = prefs.iter().find(|&&p| p > self.n_channels) {
                return fail(format!(
                    "preference {p} exceeds the {} channels",
                    self.n_channels
                ));
            }
        }
        if !(self.auction.increment > 0.0) {
            return fail("bid increment must be positive".into());
        }
        self.detector.validate()?;
        self.contention.validate()
    }

    pub fn sensing_prefs(&self) -> Vec<usize> {
        self.sensing_prefs
            .clone()
            .unwrap_or_else(|| vec![(2 * self.n_channels).div_ceil(3); self.n_sus])
    }
}

/// Runs `cfg.model` for `cfg.n_slots` slots.
pub fn run_simulation(cfg: &ScenarioConfig) -> Result<SimulationResult> {
    let mut results = run_models(cfg, &[cfg.model])?;
    Ok(results.pop().expect("one model requested"))
}

/// Runs several access models over one shared slot trajectory. Each result is
/// identical to running that model alone with the same seed.
pub fn run_models(cfg: &ScenarioConfig, models: &[Model]) -> Result<Vec<SimulationResult>> {
    cfg.validate()?;
    let mut economy = Economy::new(cfg);
    let mut rr_next = vec![0usize; models.len()];
    let mut slots: Vec<Vec<SlotMetrics>> = models
        .iter()
        .map(|_| Vec::with_capacity(cfg.n_slots))
        .collect();
    for slot in 0..cfg.n_slots as u64 {
        let env = SlotEnvironment::draw(cfg, slot)?;
        let step = economy.step(cfg, &env, slot)?;
        for (k, &model) in models.iter().enumerate() {
            let metrics = access::run_access(cfg, model, &env, &step, &mut rr_next[k], slot);
            slots[k].push(metrics);
        }
    }
    Ok(models
        .iter()
        .zip(slots)
        .map(|(&model, slots)| SimulationResult::new(model, cfg.n_sus, slots))
        .collect())
}
