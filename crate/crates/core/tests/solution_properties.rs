use std::cmp::Ordering;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectrum_game::coalition::Coalition;
use spectrum_game::game::{CharacteristicFunction, Gating};
use spectrum_game::properties::{random_instance, PropertyConfig};
use spectrum_game::solutions::{
    core_contains, nucleolus, shapley, tau_value, ExcessProfile, PayoffVector,
};

fn game(seed: u64, index: usize) -> CharacteristicFunction {
    let cfg = PropertyConfig {
        seed,
        ..PropertyConfig::default()
    };
    random_instance(&cfg, index).game(Gating::Agreement).unwrap()
}

/// Average marginal contribution over every arrival order.
fn shapley_by_permutations(v: &CharacteristicFunction) -> Vec<f64> {
    let n = v.n_players();
    let mut order: Vec<usize> = (0..n).collect();
    let mut phi = vec![0.0; n];
    let mut count = 0usize;
    let mut visit = |order: &[usize]| {
        let mut s = Coalition::EMPTY;
        for &i in order {
            let next = s.with(i);
            phi[i] += v.worth(next) - v.worth(s);
            s = next;
        }
        count += 1;
    };
    // Heap's algorithm.
    let mut c = vec![0usize; n];
    visit(&order);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            visit(&order);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    phi.iter().map(|p| p / count as f64).collect()
}

fn relabel(v: &CharacteristicFunction, perm: &[usize]) -> CharacteristicFunction {
    // Player i of the new game is player perm[i] of the old one.
    CharacteristicFunction::from_fn(v.n_players(), |s| {
        v.worth(Coalition::from_members(s.members().map(|i| perm[i])))
    })
    .unwrap()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shapley_matches_permutation_oracle(seed in any::<u64>(), index in 0usize..1000) {
        let v = game(seed, index);
        assert_close(&shapley(&v).values, &shapley_by_permutations(&v), 1e-9);
    }

    #[test]
    fn solutions_are_efficient_and_nucleolus_in_core(seed in any::<u64>(), index in 0usize..1000) {
        let v = game(seed, index);
        let tol = 1e-7 * (1.0 + v.grand_worth());
        for x in [shapley(&v), tau_value(&v).unwrap(), nucleolus(&v).unwrap()] {
            prop_assert!((x.total() - v.grand_worth()).abs() <= tol);
        }
        let nu = nucleolus(&v).unwrap();
        prop_assert!(core_contains(&v, &nu).in_core);
    }

    #[test]
    fn scaling_covariance(seed in any::<u64>(), index in 0usize..1000, c in 0.1f64..10.0) {
        let v = game(seed, index);
        let w = v.scaled(c);
        let scale = |x: PayoffVector| x.values.iter().map(|a| a * c).collect::<Vec<_>>();
        assert_close(&shapley(&w).values, &scale(shapley(&v)), 1e-7 * c.max(1.0));
        assert_close(&tau_value(&w).unwrap().values, &scale(tau_value(&v).unwrap()), 1e-7 * c.max(1.0));
        assert_close(&nucleolus(&w).unwrap().values, &scale(nucleolus(&v).unwrap()), 1e-7 * c.max(1.0));
    }

    #[test]
    fn solutions_follow_relabeling(seed in any::<u64>(), index in 0usize..1000, rot in 0usize..6) {
        let v = game(seed, index);
        let n = v.n_players();
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let w = relabel(&v, &perm);
        let permuted = |x: &[f64]| perm.iter().map(|&p| x[p]).collect::<Vec<_>>();
        assert_close(&shapley(&w).values, &permuted(&shapley(&v).values), 1e-9);
        assert_close(&nucleolus(&w).unwrap().values, &permuted(&nucleolus(&v).unwrap().values), 1e-6);
    }
}

#[test]
fn symmetric_players_get_equal_shapley_payoffs() {
    for index in 0..200 {
        let v = game(3, index);
        // Symmetrize players 1 and 2 by summing the game with its relabeled copy.
        let n = v.n_players();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(0, 1);
        let swapped = relabel(&v, &perm);
        let sym = CharacteristicFunction::from_fn(n, |s| v.worth(s) + swapped.worth(s)).unwrap();
        let phi = shapley(&sym).values;
        assert!((phi[0] - phi[1]).abs() <= 1e-12 * (1.0 + phi[0].abs()), "{phi:?}");
    }
}

#[test]
fn nucleolus_beats_nearby_efficient_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for index in 0..20 {
        let v = game(5, index);
        let n = v.n_players();
        let nu = nucleolus(&v).unwrap();
        let base = ExcessProfile::new(&v, &nu);
        for _ in 0..1000 {
            // Zero-sum direction of length 1e-3 keeps efficiency.
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mean = raw.iter().sum::<f64>() / n as f64;
            let dir: Vec<f64> = raw.iter().map(|d| d - mean).collect();
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            let y = PayoffVector::raw(
                nu.values.iter().zip(&dir).map(|(x, d)| x + 1e-3 * d / norm).collect(),
            );
            let other = ExcessProfile::new(&v, &y);
            assert_ne!(
                other.lex_cmp(&base, 1e-9),
                Ordering::Less,
                "instance {index}: {:?} beats {:?}",
                y.values,
                nu.values
            );
        }
    }
}
