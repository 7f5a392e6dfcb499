//! Per-slot draws shared by every access model.

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Uniform};

use super::streams::{slot_rng, Stream};
use super::ScenarioConfig;
use crate::auction::CapacityEstimates;
use crate::detection::{
    db_to_linear, pd_from_snr, simulate_local_decision, Decision, DecisionVector, PdMatrix,
};
use crate::game::SensingMap;
use crate::Result;

/// Gives each SU its preferred number of channels, walking one shared pointer
/// around the band so consecutive SUs start where the previous one stopped.
/// The starting channel is drawn from `rng`.
pub fn build_sensing_map<R: Rng + ?Sized>(prefs: &[usize], n_channels: usize, rng: &mut R) -> SensingMap {
    let mut map = SensingMap::empty(prefs.len(), n_channels);
    if n_channels == 0 {
        return map;
    }
    let mut pointer = rng.random_range(0..n_channels);
    for (su, &count) in prefs.iter().enumerate() {
        for k in 0..count.min(n_channels) {
            map.set(su, (pointer + k) % n_channels, true);
        }
        pointer = (pointer + count) % n_channels;
    }
    map
}

/// Shannon capacity in Mbps of an AWGN channel.
pub fn shannon_capacity_mbps(bandwidth_hz: f64, snr_db: f64) -> f64 {
    bandwidth_hz * (1.0 + db_to_linear(snr_db)).log2() / 1e6
}

/// Independent uniform-dB transmission SNR per (SU, channel), mapped through
/// the Shannon formula.
pub fn estimate_capacities<R: Rng + ?Sized>(rng: &mut R, cfg: &ScenarioConfig) -> CapacityEstimates {
    let snr = Uniform::new(cfg.snr_low_db, cfg.snr_high_db).expect("validated SNR range");
    let rows: Vec<Vec<f64>> = (0..cfg.n_sus)
        .map(|_| {
            (0..cfg.n_channels)
                .map(|_| shannon_capacity_mbps(cfg.bandwidth_hz, snr.sample(rng)))
                .collect()
        })
        .collect();
    CapacityEstimates::from_rows(&rows).expect("capacities are finite and non-negative")
}

#[derive(Debug, Clone)]
pub struct SlotEnvironment {
    pub pu_present: Vec<bool>,
    pub map: SensingMap,
    pub sensing_snr_db: Vec<Vec<f64>>,
    pub pd: PdMatrix,
    /// Local hard decisions, `None` where the SU did not sense.
    pub local: Vec<Vec<Option<Decision>>>,
    pub decisions: DecisionVector,
    pub capacities: CapacityEstimates,
}

impl SlotEnvironment {
    pub fn draw(cfg: &ScenarioConfig, slot: u64) -> Result<Self> {
        let (n, m) = (cfg.n_sus, cfg.n_channels);
        let mut pu_rng = slot_rng(cfg.seed, Stream::PuActivity, slot);
        let active = Bernoulli::new(cfg.pu_activity_prob).expect("validated probability");
        let pu_present: Vec<bool> = (0..m).map(|_| active.sample(&mut pu_rng)).collect();

        let map = build_sensing_map(
            &cfg.sensing_prefs(),
            m,
            &mut slot_rng(cfg.seed, Stream::SensingMap, slot),
        );

        // Every cell is drawn so the streams stay aligned whatever the map is.
        let snr = Uniform::new(cfg.snr_low_db, cfg.snr_high_db).expect("validated SNR range");
        let mut snr_rng = slot_rng(cfg.seed, Stream::SensingSnr, slot);
        let sensing_snr_db: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| snr.sample(&mut snr_rng)).collect())
            .collect();

        let mut pd = PdMatrix::unsensed(n, m);
        let mut decision_rng = slot_rng(cfg.seed, Stream::LocalDecisions, slot);
        let mut local = vec![vec![None; m]; n];
        for i in 0..n {
            for j in 0..m {
                let snr = sensing_snr_db[i][j];
                let d = simulate_local_decision(&cfg.detector, snr, pu_present[j], &mut decision_rng);
                if map.senses(i, j) {
                    pd.set(i, j, pd_from_snr(&cfg.detector, snr))?;
                    local[i][j] = Some(d);
                }
            }
        }
        let decisions = DecisionVector::fuse(&local, m);
        let capacities = estimate_capacities(&mut slot_rng(cfg.seed, Stream::TransmissionSnr, slot), cfg);
        Ok(Self {
            pu_present,
            map,
            sensing_snr_db,
            pd,
            local,
            decisions,
            capacities,
        })
    }

    /// Channels the fusion center declared idle.
    pub fn idle_channels(&self) -> Vec<usize> {
        self.decisions.idle_channels()
    }

    /// Channels one SU sensed and found idle on its own.
    pub fn locally_idle(&self, su: usize) -> Vec<usize> {
        (0..self.pu_present.len())
            .filter(|&j| self.local[su][j] == Some(Decision::Absent))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sensing_map_row_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let map = build_sensing_map(&[1, 2, 2], 3, &mut rng);
            assert_eq!((0..3).map(|i| map.row_count(i)).collect::<Vec<_>>(), vec![1, 2, 2]);
        }
        let full = build_sensing_map(&[4, 4], 4, &mut rng);
        assert!(full.rows().iter().flatten().all(|&s| s));
    }

    #[test]
    fn sensing_map_spreads_coverage() {
        // 3 SUs × 2 channels over 6 channels must cover everything exactly once.
        let map = build_sensing_map(&[2, 2, 2], 6, &mut ChaCha8Rng::seed_from_u64(9));
        for j in 0..6 {
            assert_eq!(map.sensors_of(j).len(), 1);
        }
    }

    #[test]
    fn capacity_formula() {
        // 7 MHz at −5 dB: 7·log2(1 + 10^−0.5) = 2.77486 Mbps
        assert!((shannon_capacity_mbps(7e6, -5.0) - 2.774_864).abs() < 1e-5);
        assert!(shannon_capacity_mbps(7e6, -300.0) < 1e-20);
    }

    #[test]
    fn capacities_within_range() {
        let cfg = ScenarioConfig::default();
        let caps = estimate_capacities(&mut ChaCha8Rng::seed_from_u64(3), &cfg);
        let lo = shannon_capacity_mbps(7e6, -25.0);
        let hi = shannon_capacity_mbps(7e6, -5.0);
        for row in caps.rows() {
            for c in row {
                assert!(c >= lo && c <= hi);
            }
        }
    }

    #[test]
    fn environment_is_consistent() {
        let cfg = ScenarioConfig::default();
        for slot in 0..50 {
            let env = SlotEnvironment::draw(&cfg, slot).unwrap();
            for i in 0..cfg.n_sus {
                for j in 0..cfg.n_channels {
                    assert_eq!(env.map.senses(i, j), env.pd.is_sensed(i, j));
                    assert_eq!(env.map.senses(i, j), env.local[i][j].is_some());
                }
            }
            // channels sensed by nobody are never declared idle
            for j in env.idle_channels() {
                assert!(!env.map.sensors_of(j).is_empty());
            }
        }
        let a = SlotEnvironment::draw(&cfg, 5).unwrap();
        let b = SlotEnvironment::draw(&cfg, 5).unwrap();
        assert_eq!(a.sensing_snr_db, b.sensing_snr_db);
        assert_eq!(a.decisions, b.decisions);
    }
}
