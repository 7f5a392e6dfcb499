//! One-point solutions of TU games and the helpers around them.

mod nucleolus;
pub mod simplex;

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::coalition::Coalition;
use crate::game::CharacteristicFunction;
use crate::{Error, Result};

pub use nucleolus::{nucleolus, nucleolus_with, NucleolusOptions, MAX_NUCLEOLUS_PLAYERS};

/// Largest game every solution concept accepts.
pub const MAX_GAME_PLAYERS: usize = MAX_NUCLEOLUS_PLAYERS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffKind {
    Raw,
    /// Scaled so that the components sum to 100.
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffVector {
    pub values: Vec<f64>,
    pub kind: PayoffKind,
}

impl PayoffVector {
    pub fn raw(values: Vec<f64>) -> Self {
        Self {
            values,
            kind: PayoffKind::Raw,
        }
    }

    pub fn normalized(values: Vec<f64>) -> Self {
        Self {
            values,
            kind: PayoffKind::Normalized,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn coalition_total(&self, s: Coalition) -> f64 {
        s.members().map(|i| self.values[i]).sum()
    }
}

/// Rescales a non-negative payoff so it sums to 100.
pub fn normalize_100(x: &PayoffVector) -> Result<PayoffVector> {
    let total = x.total();
    if x.values.iter().any(|&v| v < 0.0 || !v.is_finite()) || total <= 0.0 {
        return Err(Error::DegeneratePayoff(total));
    }
    Ok(PayoffVector::normalized(
        x.values.iter().map(|v| v * 100.0 / total).collect(),
    ))
}

/// Which one-point solution drives the wallets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionConcept {
    Shapley,
    Tau,
    #[default]
    Nucleolus,
}

impl SolutionConcept {
    pub const ALL: [SolutionConcept; 3] = [Self::Shapley, Self::Tau, Self::Nucleolus];

    pub fn solve(self, v: &CharacteristicFunction) -> Result<PayoffVector> {
        match self {
            Self::Shapley => Ok(shapley(v)),
            Self::Tau => tau_value(v),
            Self::Nucleolus => nucleolus(v),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Shapley => "shapley",
            Self::Tau => "tau",
            Self::Nucleolus => "nucleolus",
        }
    }
}

impl fmt::Display for SolutionConcept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolutionConcept {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "shapley" => Ok(Self::Shapley),
            "tau" | "τ" => Ok(Self::Tau),
            "nucleolus" => Ok(Self::Nucleolus),
            other => Err(Error::InvalidConfig(format!("unknown solution concept {other:?}"))),
        }
    }
}

/// Shapley value from the subset formula
/// `φ_i = Σ_{S∌i} |S|!(n−|S|−1)!/n! · (v(S∪{i}) − v(S))`.
pub fn shapley(v: &CharacteristicFunction) -> PayoffVector {
    let n = v.n_players();
    // weight[k] = k!(n-k-1)!/n!, built by ratios to stay well inside f64 range.
    let mut weight = vec![0.0; n];
    weight[0] = 1.0 / n as f64;
    for k in 1..n {
        weight[k] = weight[k - 1] * k as f64 / (n - k) as f64;
    }
    let mut phi = vec![0.0; n];
    for mask in 0..(1u32 << n) {
        let s = Coalition(mask);
        let w = weight.get(s.len()).copied().unwrap_or(0.0);
        let base = v.worth(s);
        for (i, p) in phi.iter_mut().enumerate() {
            if !s.contains(i) {
                *p += w * (v.worth(s.with(i)) - base);
            }
        }
    }
    PayoffVector::raw(phi)
}

/// Utopia payoffs `M_i = v(N) − v(N∖{i})`.
pub fn utopia_payoffs(v: &CharacteristicFunction) -> Vec<f64> {
    let grand = v.grand();
    (0..v.n_players())
        .map(|i| v.grand_worth() - v.worth(grand.without(i)))
        .collect()
}

/// Minimal rights `m_i = max_{S∋i} (v(S) − Σ_{j∈S∖{i}} M_j)`.
pub fn minimal_rights(v: &CharacteristicFunction, utopia: &[f64]) -> Vec<f64> {
    (0..v.n_players())
        .map(|i| {
            Coalition::all_nonempty(v.n_players())
                .filter(|s| s.contains(i))
                .map(|s| v.worth(s) - s.without(i).members().map(|j| utopia[j]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

const QUASI_BALANCE_TOL: f64 = 1e-9;

/// τ-value: the efficient point on the segment from minimal rights to utopia
/// payoffs. Requires a quasi-balanced game.
pub fn tau_value(v: &CharacteristicFunction) -> Result<PayoffVector> {
    let upper = utopia_payoffs(v);
    let lower = minimal_rights(v, &upper);
    let grand = v.grand_worth();
    let tol = QUASI_BALANCE_TOL * (1.0 + grand.abs());
    if let Some(i) = (0..upper.len()).find(|&i| lower[i] > upper[i] + tol) {
        return Err(Error::NotQuasiBalanced(format!(
            "minimal right {} of player {} exceeds utopia payoff {}",
            lower[i],
            i + 1,
            upper[i]
        )));
    }
    let (sum_lower, sum_upper): (f64, f64) = (lower.iter().sum(), upper.iter().sum());
    if sum_lower > grand + tol || grand > sum_upper + tol {
        return Err(Error::NotQuasiBalanced(format!(
            "need Σm = {sum_lower} ≤ v(N) = {grand} ≤ ΣM = {sum_upper}"
        )));
    }
    let gap = sum_upper - sum_lower;
    if gap.abs() <= tol {
        return Ok(PayoffVector::raw(upper));
    }
    let alpha = ((grand - sum_lower) / gap).clamp(0.0, 1.0);
    Ok(PayoffVector::raw(
        lower
            .iter()
            .zip(&upper)
            .map(|(m, u)| m + alpha * (u - m))
            .collect(),
    ))
}

/// Excesses `e(S, x) = v(S) − x(S)` of every proper non-empty coalition.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessProfile {
    pub excesses: Vec<(Coalition, f64)>,
}

impl ExcessProfile {
    pub fn new(v: &CharacteristicFunction, x: &PayoffVector) -> Self {
        Self {
            excesses: Coalition::all_proper(v.n_players())
                .map(|s| (s, v.worth(s) - x.coalition_total(s)))
                .collect(),
        }
    }

    /// Excess values in non-increasing order.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.excesses.iter().map(|&(_, e)| e).collect();
        e.sort_by(|a, b| b.total_cmp(a));
        e
    }

    pub fn max_excess(&self) -> Option<(Coalition, f64)> {
        self.excesses
            .iter()
            .copied()
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Lexicographic comparison of the sorted excess vectors, treating
    /// entries within `tol` as equal.
    pub fn lex_cmp(&self, other: &Self, tol: f64) -> Ordering {
        for (a, b) in self.sorted_desc().iter().zip(other.sorted_desc()) {
            if (a - b).abs() > tol {
                return a.total_cmp(&b);
            }
        }
        Ordering::Equal
    }
}

pub const CORE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoreCheck {
    pub in_core: bool,
    /// Most violated coalition and its violation `v(S) − x(S)`, when not in the core.
    pub worst: Option<(u32, f64)>,
    pub efficiency_gap: f64,
}

pub fn core_contains(v: &CharacteristicFunction, x: &PayoffVector) -> CoreCheck {
    core_contains_tol(v, x, CORE_TOL)
}

pub fn core_contains_tol(v: &CharacteristicFunction, x: &PayoffVector, tol: f64) -> CoreCheck {
    let efficiency_gap = x.total() - v.grand_worth();
    let worst = Coalition::all_nonempty(v.n_players())
        .map(|s| (s, v.worth(s) - x.coalition_total(s)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .filter(|&(_, e)| e > tol)
        .map(|(s, e)| (s.bits(), e));
    CoreCheck {
        in_core: worst.is_none() && efficiency_gap.abs() <= tol,
        worst,
        efficiency_gap,
    }
}
