//! Randomized checks of the structural properties of the sensing game.
//!
//! Each instance draws a sensing map, per-cell SNRs (mapped to detection
//! probabilities) and a decision vector, builds the characteristic function
//! and checks non-negativity, monotonicity, the per-capita bound behind
//! balancedness, super-additivity, plus efficiency of every solution and core
//! membership of the nucleolus.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::detection::{pd_from_snr, Decision, DecisionVector, DetectorConfig, PdMatrix};
use crate::game::{characteristic_function_with, CharacteristicFunction, Gating, SensingMap};
use crate::solutions::{core_contains_tol, SolutionConcept, CORE_TOL};
use crate::{Error, Result};

/// Tolerance for the game inequalities.
pub const GAME_TOL: f64 = 1e-9;
/// Tolerance for efficiency of the solutions.
pub const EFFICIENCY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyConfig {
    pub n_instances: usize,
    pub seed: u64,
    pub min_sus: usize,
    pub max_sus: usize,
    pub min_channels: usize,
    pub max_channels: usize,
    pub snr_low_db: f64,
    pub snr_high_db: f64,
    /// Probability that a given SU senses a given channel.
    pub sense_prob: f64,
    pub gating: Gating,
    /// Also run the solvers on each game.
    pub check_solutions: bool,
}

impl Default for PropertyConfig {
    fn default() -> Self {
        Self {
            n_instances: 10_000,
            seed: 0,
            min_sus: 2,
            max_sus: 6,
            min_channels: 1,
            max_channels: 8,
            snr_low_db: -25.0,
            snr_high_db: -5.0,
            sense_prob: 0.5,
            gating: Gating::Agreement,
            check_solutions: true,
        }
    }
}

impl PropertyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_instances == 0 {
            return Err(Error::InvalidConfig("need at least one instance".into()));
        }
        if self.min_sus == 0 || self.min_sus > self.max_sus || self.max_sus > crate::solutions::MAX_GAME_PLAYERS {
            return Err(Error::InvalidConfig(format!(
                "SU range {}..={} is not usable",
                self.min_sus, self.max_sus
            )));
        }
        if self.min_channels == 0 || self.min_channels > self.max_channels {
            return Err(Error::InvalidConfig(format!(
                "channel range {}..={} is not usable",
                self.min_channels, self.max_channels
            )));
        }
        if !(self.snr_low_db <= self.snr_high_db) || !(0.0..=1.0).contains(&self.sense_prob) {
            return Err(Error::InvalidConfig("bad SNR range or sensing probability".into()));
        }
        Ok(())
    }
}

/// One random sensing scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub index: usize,
    pub pd: PdMatrix,
    pub decisions: DecisionVector,
    pub map: SensingMap,
}

impl Instance {
    pub fn game(&self, gating: Gating) -> Result<CharacteristicFunction> {
        characteristic_function_with(&self.pd, &self.decisions, &self.map, gating)
    }
}

/// Instance `index` of the stream seeded by `cfg.seed`; independent of the
/// other instances.
pub fn random_instance(cfg: &PropertyConfig, index: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let n = rng.random_range(cfg.min_sus..=cfg.max_sus);
    let m = rng.random_range(cfg.min_channels..=cfg.max_channels);
    let detector = DetectorConfig::default();
    let mut map = SensingMap::empty(n, m);
    let mut pd = PdMatrix::unsensed(n, m);
    for i in 0..n {
        for j in 0..m {
            let snr = rng.random_range(cfg.snr_low_db..=cfg.snr_high_db);
            if rng.random_bool(cfg.sense_prob) {
                map.set(i, j, true);
                pd.set(i, j, pd_from_snr(&detector, snr)).expect("valid probability");
            }
        }
    }
    let decisions = DecisionVector(
        (0..m)
            .map(|_| if rng.random_bool(0.5) { Decision::Present } else { Decision::Absent })
            .collect(),
    );
    Instance {
        index,
        pd,
        decisions,
        map,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    NonNegativity,
    Monotonicity,
    PerCapita,
    SuperAdditivity,
    Efficiency,
    NucleolusInCore,
    SolverError,
}

impl Property {
    pub const GAME: [Property; 4] = [
        Property::NonNegativity,
        Property::Monotonicity,
        Property::PerCapita,
        Property::SuperAdditivity,
    ];
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::NonNegativity => "non-negativity",
            Property::Monotonicity => "monotonicity",
            Property::PerCapita => "per-capita bound",
            Property::SuperAdditivity => "super-additivity",
            Property::Efficiency => "efficiency",
            Property::NucleolusInCore => "nucleolus in core",
            Property::SolverError => "solver error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub property: Property,
    pub detail: String,
    pub instance: Instance,
    /// The full game, keyed by coalition bitmask.
    pub game: BTreeMap<u32, f64>,
}

/// First violation of each game property, as `(property, detail)`.
pub fn check_game(v: &CharacteristicFunction) -> Vec<(Property, String)> {
    let n = v.n_players();
    let mut found = Vec::new();
    let all: Vec<Coalition> = Coalition::all_nonempty(n).collect();

    if let Some(s) = all.iter().find(|s| v.worth(**s) < -GAME_TOL) {
        found.push((Property::NonNegativity, format!("v({s}) = {}", v.worth(*s))));
    }

    'mono: for &t in &all {
        for s in t.subsets() {
            if v.worth(s) > v.worth(t) + GAME_TOL {
                found.push((
                    Property::Monotonicity,
                    format!("v({s}) = {} > v({t}) = {}", v.worth(s), v.worth(t)),
                ));
                break 'mono;
            }
        }
    }

    let bound = v.grand_worth() / n as f64;
    if let Some(s) = all
        .iter()
        .find(|s| v.worth(**s) / s.len() as f64 > bound + GAME_TOL)
    {
        found.push((
            Property::PerCapita,
            format!(
                "v({s})/{} = {} > v(N)/{n} = {bound}",
                s.len(),
                v.worth(*s) / s.len() as f64
            ),
        ));
    }

    'sup: for &s in &all {
        // Each unordered pair once: T ranges over non-empty subsets of the
        // complement with a larger lowest bit than S.
        let rest = Coalition(v.grand().bits() & !s.bits());
        for t in rest.subsets() {
            if t.is_empty() || t.bits() < s.bits() {
                continue;
            }
            let joint = v.worth(s.union(t));
            if joint < v.worth(s) + v.worth(t) - GAME_TOL {
                found.push((
                    Property::SuperAdditivity,
                    format!(
                        "v({}) = {joint} < v({s}) + v({t}) = {}",
                        s.union(t),
                        v.worth(s) + v.worth(t)
                    ),
                ));
                break 'sup;
            }
        }
    }
    found
}

/// Efficiency of every solver and core membership of the nucleolus.
pub fn check_solutions(v: &CharacteristicFunction) -> Vec<(Property, String)> {
    let mut found = Vec::new();
    let tol = EFFICIENCY_TOL * (1.0 + v.grand_worth().abs());
    for concept in SolutionConcept::ALL {
        match concept.solve(v) {
            Ok(x) => {
                let gap = x.total() - v.grand_worth();
                if gap.abs() > tol {
                    found.push((
                        Property::Efficiency,
                        format!("{} sums to {} instead of {}", concept.name(), x.total(), v.grand_worth()),
                    ));
                }
                if concept == SolutionConcept::Nucleolus {
                    let check = core_contains_tol(v, &x, CORE_TOL);
                    if !check.in_core {
                        found.push((
                            Property::NucleolusInCore,
                            format!("nucleolus {:?} fails: {check:?}", x.values),
                        ));
                    }
                }
            }
            Err(e) => found.push((Property::SolverError, format!("{}: {e}", concept.name()))),
        }
    }
    found
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub instances: usize,
    /// Violation count per property, every checked property listed.
    pub counts: BTreeMap<Property, usize>,
    /// Every violation found, in instance order.
    pub violations: Vec<Violation>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn run_properties(cfg: &PropertyConfig) -> Result<PropertyReport> {
    cfg.validate()?;
    let mut counts: BTreeMap<Property, usize> = Property::GAME.iter().map(|&p| (p, 0)).collect();
    if cfg.check_solutions {
        for p in [Property::Efficiency, Property::NucleolusInCore, Property::SolverError] {
            counts.insert(p, 0);
        }
    }
    let mut violations = Vec::new();
    for index in 0..cfg.n_instances {
        let instance = random_instance(cfg, index);
        let v = instance.game(cfg.gating)?;
        let mut found = check_game(&v);
        if cfg.check_solutions {
            found.extend(check_solutions(&v));
        }
        for (property, detail) in found {
            *counts.entry(property).or_default() += 1;
            violations.push(Violation {
                property,
                detail,
                instance: instance.clone(),
                game: v.to_map(),
            });
        }
    }
    Ok(PropertyReport {
        instances: cfg.n_instances,
        counts,
        violations,
    })
}
