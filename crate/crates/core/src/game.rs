//! Entropy-based characteristic function of the sensing game.
//!
//! A coalition `S` is worth `|S|` times the sum over channels of the
//! uncertainty reduction `1 − H(p)` achieved by its best member on that
//! channel, divided by the number of entities sensing the channel. A reward is
//! only paid when the coalition's probability agrees with the fused decision.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::coalition::Coalition;
use crate::detection::{Decision, DecisionVector, PdMatrix};
use crate::{Error, Result};

/// Largest player count accepted by the bitmask enumeration.
pub const MAX_PLAYERS: usize = 20;

/// Which SU senses which channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensingMap {
    n_sus: usize,
    n_channels: usize,
    cells: Vec<bool>,
}

impl SensingMap {
    pub fn empty(n_sus: usize, n_channels: usize) -> Self {
        Self {
            n_sus,
            n_channels,
            cells: vec![false; n_sus * n_channels],
        }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n_channels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_channels) {
            return Err(Error::DimensionMismatch(
                "sensing map rows have unequal lengths".into(),
            ));
        }
        Ok(Self {
            n_sus: rows.len(),
            n_channels,
            cells: rows.concat(),
        })
    }

    pub fn set(&mut self, su: usize, channel: usize, sensed: bool) {
        self.cells[su * self.n_channels + channel] = sensed;
    }

    pub fn senses(&self, su: usize, channel: usize) -> bool {
        self.cells[su * self.n_channels + channel]
    }

    pub fn n_sus(&self) -> usize {
        self.n_sus
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn row_count(&self, su: usize) -> usize {
        (0..self.n_channels).filter(|&j| self.senses(su, j)).count()
    }

    /// SUs sensing `channel`, as a coalition.
    pub fn sensors_of(&self, channel: usize) -> Coalition {
        Coalition::from_members((0..self.n_sus).filter(|&i| self.senses(i, channel)))
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        self.cells
            .chunks(self.n_channels.max(1))
            .map(<[bool]>::to_vec)
            .collect()
    }
}

/// Worth of every coalition of an `n`-player TU game, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicFunction {
    n_players: usize,
    worth: Vec<f64>,
}

impl CharacteristicFunction {
    /// `worth[mask]` for every mask in `0..2^n`; `worth[0]` must be 0.
    pub fn new(n_players: usize, worth: Vec<f64>) -> Result<Self> {
        if n_players == 0 || n_players > MAX_PLAYERS {
            return Err(Error::TooManyPlayers(n_players, MAX_PLAYERS));
        }
        if worth.len() != 1 << n_players {
            return Err(Error::DimensionMismatch(format!(
                "{} worths for {} players, expected {}",
                worth.len(),
                n_players,
                1usize << n_players
            )));
        }
        if worth[0] != 0.0 {
            return Err(Error::InvalidConfig("the empty coalition must be worth 0".into()));
        }
        if let Some(w) = worth.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite worth {w}")));
        }
        Ok(Self { n_players, worth })
    }

    pub fn from_fn(n_players: usize, mut f: impl FnMut(Coalition) -> f64) -> Result<Self> {
        if n_players == 0 || n_players > MAX_PLAYERS {
            return Err(Error::TooManyPlayers(n_players, MAX_PLAYERS));
        }
        let mut worth = vec![0.0; 1 << n_players];
        for s in Coalition::all_nonempty(n_players) {
            worth[s.index()] = f(s);
        }
        Self::new(n_players, worth)
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn worth(&self, s: Coalition) -> f64 {
        self.worth[s.index()]
    }

    pub fn grand_worth(&self) -> f64 {
        self.worth[Coalition::grand(self.n_players).index()]
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.n_players)
    }

    pub fn worths(&self) -> &[f64] {
        &self.worth
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n_players: self.n_players,
            worth: self.worth.iter().map(|w| w * c).collect(),
        }
    }

    /// `{"1": v({1}), "2": v({2}), "3": v({1,2}), ...}` keyed by decimal bitmask.
    pub fn to_map(&self) -> BTreeMap<u32, f64> {
        Coalition::all_nonempty(self.n_players)
            .map(|s| (s.bits(), self.worth(s)))
            .collect()
    }

    /// Inverse of [`to_map`](Self::to_map); every non-empty coalition must be present.
    pub fn from_map(map: &BTreeMap<u32, f64>) -> Result<Self> {
        let max = map.keys().copied().max().unwrap_or(0);
        let n_players = (32 - max.leading_zeros()) as usize;
        if n_players == 0 || max != Coalition::grand(n_players).bits() {
            return Err(Error::InvalidConfig(
                "worth table must contain the grand coalition as its largest key".into(),
            ));
        }
        if map.len() != (1usize << n_players) - 1 || map.contains_key(&0) {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for {} players, expected {}",
                map.len(),
                n_players,
                (1usize << n_players) - 1
            )));
        }
        let mut worth = vec![0.0; 1 << n_players];
        for (&k, &w) in map {
            worth[k as usize] = w;
        }
        Self::new(n_players, worth)
    }
}

/// Binary entropy in bits, with `0·log₂0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    Ok(term(p) + term(1.0 - p))
}

/// Whether rewards are withheld when a probability contradicts the fused decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gating {
    #[default]
    Agreement,
    /// Plain `1 − H(p)` with no agreement check.
    Disabled,
}

/// Uncertainty reduction `1 − H(p)`, paid only when `p` agrees with `d`:
/// `p ≥ 0.5` for a PU-present decision, `p ≤ 0.5` for PU-absent.
pub fn gated_reward(p: f64, d: Decision) -> f64 {
    reward(p, d, Gating::Agreement)
}

fn reward(p: f64, d: Decision, gating: Gating) -> f64 {
    let agrees = match d {
        Decision::Present => p >= 0.5,
        Decision::Absent => p <= 0.5,
    };
    if gating == Gating::Agreement && !agrees {
        return 0.0;
    }
    1.0 - binary_entropy(p.clamp(0.0, 1.0)).expect("clamped")
}

/// `|max_{i∈S} p_ij·D_j|`: the largest member probability when the PU was
/// declared present, the smallest when declared absent.
pub fn coalition_effective_pd(
    s: Coalition,
    channel: usize,
    pd: &PdMatrix,
    d: &DecisionVector,
) -> f64 {
    let sign = d.get(channel).sign();
    s.members()
        .map(|i| pd.get(i, channel) * sign)
        .fold(f64::NEG_INFINITY, f64::max)
        .abs()
}

/// Entities sensing `channel`: the coalition itself (if any member senses
/// it) plus every outside SU that senses it.
pub fn entity_count(s: Coalition, channel: usize, map: &SensingMap) -> usize {
    let sensors = map.sensors_of(channel);
    let inside = usize::from(!sensors.is_disjoint(s));
    let outside = (sensors.bits() & !s.bits()).count_ones() as usize;
    inside + outside
}

pub fn characteristic_function(
    pd: &PdMatrix,
    d: &DecisionVector,
    map: &SensingMap,
) -> Result<CharacteristicFunction> {
    characteristic_function_with(pd, d, map, Gating::Agreement)
}

pub fn characteristic_function_with(
    pd: &PdMatrix,
    d: &DecisionVector,
    map: &SensingMap,
    gating: Gating,
) -> Result<CharacteristicFunction> {
    let (n, m) = (pd.n_sus(), pd.n_channels());
    if map.n_sus() != n || map.n_channels() != m || d.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "P_d is {n}x{m}, sensing map is {}x{}, {} decisions",
            map.n_sus(),
            map.n_channels(),
            d.len()
        )));
    }
    for i in 0..n {
        for j in 0..m {
            if map.senses(i, j) != pd.is_sensed(i, j) {
                return Err(Error::DimensionMismatch(format!(
                    "sensing map and P_d matrix disagree on cell ({i}, {j})"
                )));
            }
        }
    }
    if n > MAX_PLAYERS {
        return Err(Error::TooManyPlayers(n, MAX_PLAYERS));
    }
    let sensors: Vec<Coalition> = (0..m).map(|j| map.sensors_of(j)).collect();
    CharacteristicFunction::from_fn(n, |s| {
        let per_capita: f64 = (0..m)
            .filter(|&j| !sensors[j].is_disjoint(s))
            .map(|j| {
                let p = coalition_effective_pd(s, j, pd, d);
                reward(p, d.get(j), gating) / entity_count(s, j, map) as f64
            })
            .sum();
        s.len() as f64 * per_capita
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::PaperExample;
    use Decision::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.0734).unwrap() - 0.3785).abs() < 5e-4);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn gated_reward_examples() {
        assert_eq!(gated_reward(0.5, Present), 0.0);
        assert_eq!(gated_reward(0.5, Absent), 0.0);
        assert_eq!(gated_reward(0.7054, Absent), 0.0);
        assert!((gated_reward(0.0968, Absent) - 0.5412).abs() < 5e-4);
        assert_eq!(gated_reward(0.0968, Present), 0.0);
        assert!(gated_reward(0.9, Present) > 0.5);
    }

    #[test]
    fn effective_pd_examples() {
        let ex = PaperExample::default();
        let (pd, d) = (ex.pd_matrix().unwrap(), ex.decision_vector());
        let s12 = Coalition::from_members([0, 1]);
        let s23 = Coalition::from_members([1, 2]);
        assert_eq!(coalition_effective_pd(s12, 0, &pd, &d), 0.0734);
        assert_eq!(coalition_effective_pd(s23, 0, &pd, &d), 0.5);
        assert_eq!(coalition_effective_pd(Coalition::grand(3), 1, &pd, &d), 0.8837);
    }

    #[test]
    fn entity_count_examples() {
        let map = PaperExample::default().sensing_map().unwrap();
        assert_eq!(entity_count(Coalition::singleton(0), 0, &map), 2);
        assert_eq!(entity_count(Coalition::from_members([0, 2]), 0, &map), 1);
        assert_eq!(entity_count(Coalition::singleton(1), 2, &map), 1);
        assert_eq!(entity_count(Coalition::singleton(0), 2, &map), 1);
    }

    #[test]
    fn worked_example_worths() {
        let v = PaperExample::default().characteristic_function().unwrap();
        let expected = [0.3107, 0.7819, 2.1851, 0.0, 1.2427, 2.0450, 4.9316];
        for (mask, want) in (1u32..=7).zip(expected) {
            let got = v.worth(Coalition(mask));
            assert!((got - want).abs() < 1e-3, "{}: {got} vs {want}", Coalition(mask));
        }
    }

    #[test]
    fn zero_information_game() {
        let n = 3;
        let m = 4;
        let map = SensingMap::from_rows(&vec![vec![true; m]; n]).unwrap();
        let pd = PdMatrix::from_rows(&vec![vec![0.5; m]; n], &map.rows()).unwrap();
        let d = DecisionVector(vec![Present, Absent, Present, Absent]);
        let v = characteristic_function(&pd, &d, &map).unwrap();
        assert!(v.worths().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn full_certainty_single_player() {
        let map = SensingMap::from_rows(&[vec![true]]).unwrap();
        let pd = PdMatrix::from_rows(&[vec![0.0]], &[vec![true]]).unwrap();
        let v = characteristic_function(&pd, &DecisionVector(vec![Absent]), &map).unwrap();
        assert_eq!(v.worth(Coalition(1)), 1.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let ex = PaperExample::default();
        let pd = ex.pd_matrix().unwrap();
        let map = ex.sensing_map().unwrap();
        let short = DecisionVector(vec![Absent, Present]);
        assert!(matches!(
            characteristic_function(&pd, &short, &map),
            Err(Error::DimensionMismatch(_))
        ));
        let other_map = SensingMap::from_rows(&vec![vec![true; 3]; 3]).unwrap();
        assert!(characteristic_function(&pd, &ex.decision_vector(), &other_map).is_err());
    }

    #[test]
    fn map_round_trip() {
        let v = PaperExample::default().characteristic_function().unwrap();
        let back = CharacteristicFunction::from_map(&v.to_map()).unwrap();
        assert_eq!(v, back);
        let mut broken = v.to_map();
        broken.remove(&3);
        assert!(CharacteristicFunction::from_map(&broken).is_err());
    }
}
