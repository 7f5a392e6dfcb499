//! The 3-SU, 3-channel worked example and a table-by-table regression check.

use serde::Serialize;

use crate::auction::{normalized_balance, run_vcg, AuctionConfig, CapacityEstimates};
use crate::coalition::Coalition;
use crate::detection::{pd_from_snr, Decision, DecisionVector, DetectorConfig, PdMatrix};
use crate::game::{characteristic_function_with, CharacteristicFunction, Gating, SensingMap};
use crate::solutions::{core_contains, normalize_100, nucleolus, shapley, tau_value};
use crate::Result;

/// Inputs of the worked example, plus the values it reports.
#[derive(Debug, Clone)]
pub struct PaperExample {
    pub sensing: Vec<Vec<bool>>,
    /// Sensing SNRs in dB, `None` where the SU did not sense.
    pub snr_db: Vec<Vec<Option<f64>>>,
    pub pd: Vec<Vec<f64>>,
    pub decisions: Vec<i8>,
    pub capacities: Vec<Vec<f64>>,
    pub bids: Vec<f64>,
    /// Normalized nucleolus used as the first-slot wallets.
    pub wallets: Vec<f64>,
    pub idle_channels: Vec<usize>,
    pub gating: Gating,
}

impl Default for PaperExample {
    fn default() -> Self {
        Self {
            sensing: vec![
                vec![true, false, false],
                vec![false, true, true],
                vec![true, true, false],
            ],
            snr_db: vec![
                vec![Some(-19.5949), None, None],
                vec![None, Some(-7.2246), Some(-17.0642)],
                vec![Some(-8.5656), Some(-17.1763), None],
            ],
            pd: vec![
                vec![0.0734, 0.5, 0.5],
                vec![0.5, 0.8837, 0.0968],
                vec![0.7054, 0.0953, 0.5],
            ],
            decisions: vec![-1, 1, -1],
            capacities: vec![
                vec![0.0547, 0.0429, 0.0974],
                vec![0.7187, 0.0143, 0.4765],
                vec![2.0485, 0.9998, 0.0318],
            ],
            bids: vec![24.7943, 6.9917, 22.3673],
            wallets: vec![32.2484, 41.8029, 25.9487],
            idle_channels: vec![0, 2],
            gating: Gating::Agreement,
        }
    }
}

/// Reported characteristic function, bitmask order 1..=7.
pub const EXPECTED_WORTHS: [(u32, f64); 7] = [
    (0b001, 0.3107),
    (0b010, 0.7819),
    (0b100, 0.0),
    (0b011, 2.1851),
    (0b101, 1.2427),
    (0b110, 2.0450),
    (0b111, 4.9316),
];
pub const EXPECTED_SHAPLEY: [f64; 3] = [30.5526, 43.4645, 25.9830];
pub const EXPECTED_TAU: [f64; 3] = [30.6662, 43.3531, 25.9807];
pub const EXPECTED_NUCLEOLUS: [f64; 3] = [32.2484, 41.8029, 25.9487];
/// (winner, channel, price, residual bid) per auction round, 0-based.
pub const EXPECTED_ROUNDS: [(usize, usize, f64, f64); 2] =
    [(0, 2, 22.3674, 2.4269), (2, 0, 6.9918, 15.3755)];
pub const EXPECTED_BALANCES: [f64; 3] = [9.8810, 41.8029, 18.9569];
pub const EXPECTED_NORM_BALANCES: [f64; 3] = [13.9876, 59.1767, 26.8357];

impl PaperExample {
    pub fn pd_matrix(&self) -> Result<PdMatrix> {
        PdMatrix::from_rows(&self.pd, &self.sensing)
    }

    pub fn sensing_map(&self) -> Result<SensingMap> {
        SensingMap::from_rows(&self.sensing)
    }

    pub fn decision_vector(&self) -> DecisionVector {
        DecisionVector(
            self.decisions
                .iter()
                .map(|&d| Decision::try_from(d).expect("fixture decisions are ±1"))
                .collect(),
        )
    }

    pub fn capacity_estimates(&self) -> Result<CapacityEstimates> {
        CapacityEstimates::from_rows(&self.capacities)
    }

    pub fn characteristic_function(&self) -> Result<CharacteristicFunction> {
        characteristic_function_with(
            &self.pd_matrix()?,
            &self.decision_vector(),
            &self.sensing_map()?,
            self.gating,
        )
    }

    /// Sets one detection probability (0-based indices) and marks it sensed
    /// or unsensed according to whether it is 0.5.
    pub fn with_pd(mut self, su: usize, channel: usize, p: f64) -> Self {
        self.pd[su][channel] = p;
        self.sensing[su][channel] = p != 0.5 || self.sensing[su][channel];
        self
    }
}

/// Tolerances of each table comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FixtureTolerances {
    pub detection: f64,
    pub worths: f64,
    pub shapley_tau: f64,
    pub nucleolus: f64,
    pub auction: f64,
}

impl Default for FixtureTolerances {
    fn default() -> Self {
        Self {
            detection: 3e-3,
            worths: 1e-3,
            shapley_tau: 0.01,
            nucleolus: 0.02,
            auction: 1e-3,
        }
    }
}

impl FixtureTolerances {
    pub fn scaled(self, k: f64) -> Self {
        Self {
            detection: self.detection * k,
            worths: self.worths * k,
            shapley_tau: self.shapley_tau * k,
            nucleolus: self.nucleolus * k,
            auction: self.auction * k,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableCheck {
    pub name: &'static str,
    pub passed: bool,
    pub tolerance: f64,
    pub max_deviation: f64,
    pub details: Vec<String>,
}

struct Collector {
    tol: f64,
    max_dev: f64,
    details: Vec<String>,
    failed: bool,
}

impl Collector {
    fn new(tol: f64) -> Self {
        Self {
            tol,
            max_dev: 0.0,
            details: Vec::new(),
            failed: false,
        }
    }

    fn compare(&mut self, label: String, got: f64, want: f64) {
        let dev = (got - want).abs();
        self.max_dev = self.max_dev.max(dev);
        let ok = dev <= self.tol;
        self.failed |= !ok;
        self.details.push(format!(
            "{} {label}: got {got:.4}, expected {want:.4}",
            if ok { "ok  " } else { "FAIL" }
        ));
    }

    fn require(&mut self, label: String, ok: bool) {
        self.failed |= !ok;
        self.details
            .push(format!("{} {label}", if ok { "ok  " } else { "FAIL" }));
    }

    fn finish(self, name: &'static str) -> TableCheck {
        TableCheck {
            name,
            passed: !self.failed,
            tolerance: self.tol,
            max_deviation: self.max_dev,
            details: self.details,
        }
    }

    fn error(name: &'static str, tol: f64, err: impl std::fmt::Display) -> TableCheck {
        TableCheck {
            name,
            passed: false,
            tolerance: tol,
            max_deviation: f64::INFINITY,
            details: vec![format!("FAIL {err}")],
        }
    }
}

/// Runs the example through detection, game, solutions and auction and
/// compares each stage with the reported tables.
pub fn check_paper_example(ex: &PaperExample, tol: FixtureTolerances) -> Vec<TableCheck> {
    let mut checks = Vec::with_capacity(5);

    let mut c = Collector::new(tol.detection);
    let det = DetectorConfig::default();
    for (i, row) in ex.snr_db.iter().enumerate() {
        for (j, snr) in row.iter().enumerate() {
            if let Some(snr) = snr {
                c.compare(
                    format!("P_d[SU{} ch{}] at {snr} dB", i + 1, j + 1),
                    pd_from_snr(&det, *snr),
                    PaperExample::default().pd[i][j],
                );
            }
        }
    }
    checks.push(c.finish("detection probabilities (Tables I-II)"));

    let v = match ex.characteristic_function() {
        Ok(v) => v,
        Err(e) => {
            checks.push(Collector::error("characteristic function", tol.worths, e));
            return checks;
        }
    };
    let mut c = Collector::new(tol.worths);
    for (mask, want) in EXPECTED_WORTHS {
        c.compare(format!("v({})", Coalition(mask)), v.worth(Coalition(mask)), want);
    }
    checks.push(c.finish("characteristic function"));

    let mut c = Collector::new(tol.shapley_tau.max(tol.nucleolus));
    let solved = (|| -> Result<_> {
        Ok((
            normalize_100(&shapley(&v))?,
            normalize_100(&tau_value(&v)?)?,
            nucleolus(&v)?,
        ))
    })();
    match solved {
        Ok((sh, tau, nu)) => {
            let nu_norm = normalize_100(&nu).unwrap_or_else(|_| nu.clone());
            let mut compare = |label: &str, got: &[f64], want: &[f64; 3], t: f64| {
                for k in 0..3 {
                    let dev = (got[k] - want[k]).abs();
                    c.max_dev = c.max_dev.max(dev);
                    let ok = dev <= t;
                    c.failed |= !ok;
                    c.details.push(format!(
                        "{} {label} SU{}: got {:.4}, expected {:.4} (tol {t})",
                        if ok { "ok  " } else { "FAIL" },
                        k + 1,
                        got[k],
                        want[k]
                    ));
                }
            };
            compare("Shapley", &sh.values, &EXPECTED_SHAPLEY, tol.shapley_tau);
            compare("tau", &tau.values, &EXPECTED_TAU, tol.shapley_tau);
            compare("nucleolus", &nu_norm.values, &EXPECTED_NUCLEOLUS, tol.nucleolus);
            c.require("nucleolus lies in the core".into(), core_contains(&v, &nu).in_core);
            checks.push(c.finish("one-point solutions (Table III)"));
        }
        Err(e) => checks.push(Collector::error("one-point solutions (Table III)", tol.nucleolus, e)),
    }

    let outcome = ex.capacity_estimates().and_then(|caps| {
        run_vcg(
            &ex.wallets,
            &ex.bids,
            &ex.idle_channels,
            &caps,
            &AuctionConfig::default(),
        )
    });
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            checks.push(Collector::error("auction trace (Tables IV-V)", tol.auction, e));
            return checks;
        }
    };
    let mut c = Collector::new(tol.auction);
    c.require(
        format!("{} rounds played", outcome.rounds.len()),
        outcome.rounds.len() == EXPECTED_ROUNDS.len(),
    );
    for (k, (r, (winner, channel, price, residual))) in
        outcome.rounds.iter().zip(EXPECTED_ROUNDS).enumerate()
    {
        c.require(
            format!(
                "round {}: SU{} wins ch{} (expected SU{} ch{})",
                k + 1,
                r.winner + 1,
                r.channel + 1,
                winner + 1,
                channel + 1
            ),
            r.winner == winner && r.channel == channel,
        );
        c.compare(format!("round {} price", k + 1), r.price, price);
        c.compare(format!("round {} residual bid", k + 1), r.residual, residual);
    }
    checks.push(c.finish("auction trace (Tables IV-V)"));

    let mut c = Collector::new(tol.auction);
    for (k, want) in EXPECTED_BALANCES.iter().enumerate() {
        c.compare(format!("balance SU{}", k + 1), outcome.balances[k], *want);
    }
    match normalized_balance(&outcome) {
        Some(norm) => {
            for (k, want) in EXPECTED_NORM_BALANCES.iter().enumerate() {
                c.compare(format!("normalized balance SU{}", k + 1), norm.values[k], *want);
            }
        }
        None => c.require("normalized balance defined".into(), false),
    }
    checks.push(c.finish("balances (Table V)"));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_tables_pass() {
        let checks = check_paper_example(&PaperExample::default(), FixtureTolerances::default());
        assert_eq!(checks.len(), 5);
        for c in &checks {
            assert!(c.passed, "{}: {:#?}", c.name, c.details);
        }
    }

    #[test]
    fn perturbed_p11_zeroes_first_worth() {
        let ex = PaperExample::default().with_pd(0, 0, 0.5);
        let v = ex.characteristic_function().unwrap();
        assert_eq!(v.worth(Coalition(1)), 0.0);
        let checks = check_paper_example(&ex, FixtureTolerances::default());
        let cf = checks.iter().find(|c| c.name == "characteristic function").unwrap();
        assert!(!cf.passed);
        assert!(cf.details.iter().any(|d| d.contains("v({1}): got 0.0000")));
    }

    #[test]
    fn zero_tolerance_fails_table_iii() {
        let checks = check_paper_example(&PaperExample::default(), FixtureTolerances::default().scaled(0.0));
        let t3 = checks.iter().find(|c| c.name.contains("Table III")).unwrap();
        assert!(!t3.passed);
    }

    #[test]
    fn ungated_game_misses_the_table() {
        let ex = PaperExample {
            gating: Gating::Disabled,
            ..PaperExample::default()
        };
        let checks = check_paper_example(&ex, FixtureTolerances::default());
        assert!(!checks.iter().find(|c| c.name == "characteristic function").unwrap().passed);
    }
}
