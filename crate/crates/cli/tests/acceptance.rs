//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::cmp::Ordering;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectrum_game::auction::{normalized_balance, run_vcg, AuctionConfig};
use spectrum_game::coalition::Coalition;
use spectrum_game::detection::{pd_from_snr, simulate_local_decision, Decision, DetectorConfig};
use spectrum_game::fixtures::PaperExample;
use spectrum_game::game::{CharacteristicFunction, Gating};
use spectrum_game::properties::{random_instance, PropertyConfig};
use spectrum_game::simulator::{run_models, Model, ScenarioConfig};
use spectrum_game::solutions::{normalize_100, nucleolus, shapley, tau_value, PayoffVector};

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Self {
            passed,
            summary: summary.into(),
            details: Vec::new(),
        }
    }
}

/// Median wall time of `reps` calls after one warm-up call.
fn median_time<T>(reps: usize, mut f: impl FnMut() -> T) -> Duration {
    f();
    let mut times: Vec<Duration> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed()
        })
        .collect();
    times.sort();
    times[reps / 2]
}

fn max_dev(got: &[f64], want: &[f64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

// 1. Characteristic function of the worked example.

const WORTHS: [f64; 7] = [0.3107, 0.7819, 2.1851, 0.0, 1.2427, 2.0450, 4.9316];

fn criterion_1() -> Outcome {
    let ex = PaperExample::default();
    let (pd, map, d) = (
        ex.pd_matrix().unwrap(),
        ex.sensing_map().unwrap(),
        ex.decision_vector(),
    );
    let v = spectrum_game::game::characteristic_function(&pd, &d, &map).unwrap();
    let got: Vec<f64> = (1..=7).map(|m| v.worth(Coalition(m))).collect();
    let dev = max_dev(&got, &WORTHS);
    let time = median_time(101, || spectrum_game::game::characteristic_function(&pd, &d, &map));
    let ok = dev <= 1e-3 && time < Duration::from_millis(1);
    Outcome::new(
        ok,
        format!(
            "characteristic function: max |dv| = {dev:.2e} (tol 1e-3), {:.3} ms (limit 1 ms)",
            time.as_secs_f64() * 1e3
        ),
    )
}

// 2. One-point solutions.

fn criterion_2() -> Outcome {
    let v = PaperExample::default().characteristic_function().unwrap();
    let norm = |x: PayoffVector| normalize_100(&x).unwrap().values;
    let sh = norm(shapley(&v));
    let tau = norm(tau_value(&v).unwrap());
    let nu = norm(nucleolus(&v).unwrap());
    let d_sh = max_dev(&sh, &[30.5526, 43.4645, 25.9830]);
    let d_tau = max_dev(&tau, &[30.6662, 43.3531, 25.9807]);
    let d_nu = max_dev(&nu, &[32.2484, 41.8029, 25.9487]);
    let time = median_time(21, || {
        (shapley(&v), tau_value(&v).unwrap(), nucleolus(&v).unwrap())
    });
    let ok = d_sh <= 0.01 && d_tau <= 0.01 && d_nu <= 0.02 && time < Duration::from_millis(100);
    Outcome::new(
        ok,
        format!(
            "one-point solutions: Shapley {d_sh:.4} (tol 0.01), tau {d_tau:.4} (tol 0.01), nucleolus {d_nu:.4} (tol 0.02), {:.3} ms (limit 100 ms)",
            time.as_secs_f64() * 1e3
        ),
    )
}

// 3. Auction trace.

fn criterion_3() -> Outcome {
    let ex = PaperExample::default();
    let caps = ex.capacity_estimates().unwrap();
    let wallets = [32.2484, 41.8029, 25.9487];
    let cfg = AuctionConfig {
        increment: 1e-4,
        ..AuctionConfig::default()
    };
    let run = || run_vcg(&wallets, &ex.bids, &[0, 2], &caps, &cfg).unwrap();
    let out = run();
    let time = median_time(101, run);
    let trace_ok = out.rounds.len() == 2
        && (out.rounds[0].winner, out.rounds[0].channel) == (0, 2)
        && (out.rounds[1].winner, out.rounds[1].channel) == (2, 0);
    let prices: Vec<f64> = out.rounds.iter().map(|r| r.price).collect();
    let d_price = if prices.len() == 2 {
        max_dev(&prices, &[22.3674, 6.9918])
    } else {
        f64::INFINITY
    };
    let d_bal = max_dev(&out.balances, &[9.8810, 41.8029, 18.9569]);
    let norm = normalized_balance(&out).map(|x| x.values).unwrap_or_default();
    let d_norm = if norm.len() == 3 {
        max_dev(&norm, &[13.9876, 59.1767, 26.8357])
    } else {
        f64::INFINITY
    };
    let dev = d_price.max(d_bal).max(d_norm);
    let ok = trace_ok && dev <= 1e-3 && time < Duration::from_millis(1);
    Outcome::new(
        ok,
        format!(
            "auction trace: winners {}, max |d| over prices and balances = {dev:.2e} (tol 1e-3), {:.3} ms (limit 1 ms)",
            if trace_ok { "SU1->ch3, SU3->ch1" } else { "WRONG" },
            time.as_secs_f64() * 1e3
        ),
    )
}

// 4 and 5 share the random instances.

const N_INSTANCES: usize = 10_000;
const PROPERTY_SEED: u64 = 20_240_601;

fn instances() -> Vec<CharacteristicFunction> {
    let cfg = PropertyConfig {
        n_instances: N_INSTANCES,
        seed: PROPERTY_SEED,
        min_sus: 2,
        max_sus: 6,
        min_channels: 1,
        max_channels: 8,
        snr_low_db: -25.0,
        snr_high_db: -5.0,
        ..PropertyConfig::default()
    };
    (0..N_INSTANCES)
        .map(|k| random_instance(&cfg, k).game(Gating::Agreement).unwrap())
        .collect()
}

fn worth(v: &CharacteristicFunction, mask: u32) -> f64 {
    v.worths()[mask as usize]
}

/// Counts of (non-negativity, monotonicity, per-capita, super-additivity)
/// violations, by plain loops over bitmasks.
fn structural_violations(v: &CharacteristicFunction, tol: f64) -> [usize; 4] {
    let n = v.n_players();
    let full = (1u32 << n) - 1;
    let grand = worth(v, full);
    let mut bad = [0usize; 4];
    for s in 1..=full {
        if worth(v, s) < -tol {
            bad[0] += 1;
        }
        if worth(v, s) / s.count_ones() as f64 > grand / n as f64 + tol {
            bad[2] += 1;
        }
        for t in 1..=full {
            if s & t == s && s != t && worth(v, s) > worth(v, t) + tol {
                bad[1] += 1;
            }
            if s & t == 0 && s < t && worth(v, s | t) < worth(v, s) + worth(v, t) - tol {
                bad[3] += 1;
            }
        }
    }
    bad
}

fn criterion_4(games: &[CharacteristicFunction], generation: Duration) -> Outcome {
    let start = Instant::now();
    let mut totals = [0usize; 4];
    let mut first = None;
    for (k, v) in games.iter().enumerate() {
        let bad = structural_violations(v, 1e-9);
        for (t, b) in totals.iter_mut().zip(bad) {
            *t += b;
        }
        if first.is_none() && bad.iter().any(|&b| b > 0) {
            first = Some((k, v.to_map()));
        }
    }
    let time = start.elapsed() + generation;
    let ok = totals.iter().all(|&t| t == 0) && time < Duration::from_secs(60);
    let mut out = Outcome::new(
        ok,
        format!(
            "game properties on {N_INSTANCES} instances: violations non-negativity {}, monotonicity {}, per-capita {}, super-additivity {} (tol 1e-9), {:.2} s (limit 60 s)",
            totals[0], totals[1], totals[2], totals[3],
            time.as_secs_f64()
        ),
    );
    if let Some((k, game)) = first {
        out.details.push(format!("first counterexample, instance {k}: {game:?}"));
    }
    out
}

/// Average marginal contribution over all n! orders (Heap's algorithm).
fn shapley_oracle(v: &CharacteristicFunction) -> Vec<f64> {
    let n = v.n_players();
    let mut order: Vec<usize> = (0..n).collect();
    let mut phi = vec![0.0; n];
    let mut count = 0usize;
    let mut visit = |order: &[usize]| {
        let mut s = 0u32;
        for &i in order {
            phi[i] += worth(v, s | 1 << i) - worth(v, s);
            s |= 1 << i;
        }
        count += 1;
    };
    let mut c = vec![0usize; n];
    visit(&order);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            order.swap(if i % 2 == 0 { 0 } else { c[i] }, i);
            visit(&order);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    phi.into_iter().map(|p| p / count as f64).collect()
}

fn sorted_excesses(v: &CharacteristicFunction, x: &[f64; 3]) -> [f64; 6] {
    let mut e = [0.0; 6];
    for (k, s) in (1u32..7).enumerate() {
        let xs: f64 = (0..3).filter(|i| s >> i & 1 == 1).map(|i| x[i]).sum();
        e[k] = worth(v, s) - xs;
    }
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

fn lex(a: &[f64; 6], b: &[f64; 6], tol: f64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > tol {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

/// Lexicographic minimizer of the sorted excess vector over the imputation
/// triangle, by successively finer grids around the incumbent.
fn nucleolus_grid_oracle(v: &CharacteristicFunction) -> [f64; 3] {
    let lo = [worth(v, 1), worth(v, 2), worth(v, 4)];
    let grand = worth(v, 7);
    let slack = grand - lo.iter().sum::<f64>();
    if slack <= 1e-12 {
        return lo;
    }
    let point = |a: f64, b: f64| [lo[0] + a, lo[1] + b, lo[2] + slack - a - b];
    let (mut ca, mut cb) = (slack / 3.0, slack / 3.0);
    let mut half = slack;
    const K: i32 = 40;
    while half > 1e-7 * slack {
        let step = half / K as f64;
        let mut cands: Vec<([f64; 6], f64, f64)> = Vec::new();
        for i in -K..=K {
            for j in -K..=K {
                let (a, b) = (ca + i as f64 * step, cb + j as f64 * step);
                if a >= 0.0 && b >= 0.0 && a + b <= slack {
                    cands.push((sorted_excesses(v, &point(a, b)), a, b));
                }
            }
        }
        // Position by position, keep the candidates within a grid-sized
        // tolerance of the smallest entry.
        for pos in 0..6 {
            let m = cands.iter().map(|c| c.0[pos]).fold(f64::INFINITY, f64::min);
            cands.retain(|c| c.0[pos] <= m + 2.0 * step);
        }
        let best = cands
            .into_iter()
            .min_by(|x, y| lex(&x.0, &y.0, 0.0))
            .expect("the centre is always feasible");
        let (_, a, b) = best;
        ca = a;
        cb = b;
        half /= 4.0;
    }
    point(ca, cb)
}

fn criterion_5(games: &[CharacteristicFunction]) -> Outcome {
    let mut shapley_dev: f64 = 0.0;
    let mut core_fail = 0;
    let mut eff_dev: f64 = 0.0;
    let mut grid_dev: f64 = 0.0;
    let mut grid_cases = 0;
    let mut errors = Vec::new();
    for (k, v) in games.iter().enumerate() {
        let n = v.n_players();
        let full = (1u32 << n) - 1;
        let grand = worth(v, full);
        let sh = shapley(v);
        shapley_dev = shapley_dev.max(max_dev(&sh.values, &shapley_oracle(v)));
        let (tau, nu) = match (tau_value(v), nucleolus(v)) {
            (Ok(t), Ok(x)) => (t, x),
            (t, x) => {
                errors.push(format!("instance {k}: tau {:?}, nucleolus {:?}", t.err(), x.err()));
                continue;
            }
        };
        for x in [&sh, &tau, &nu] {
            eff_dev = eff_dev.max((x.total() - grand).abs());
        }
        let in_core = (1..=full).all(|s| {
            let xs: f64 = (0..n).filter(|i| s >> i & 1 == 1).map(|i| nu.values[i]).sum();
            worth(v, s) - xs <= 1e-7
        }) && (nu.total() - grand).abs() <= 1e-7;
        if !in_core {
            core_fail += 1;
        }
        if n == 3 {
            grid_cases += 1;
            grid_dev = grid_dev.max(max_dev(&nu.values, &nucleolus_grid_oracle(v)));
        }
    }
    let ok = errors.is_empty() && shapley_dev <= 1e-9 && core_fail == 0 && eff_dev <= 1e-7 && grid_dev <= 2e-4;
    let mut out = Outcome::new(
        ok,
        format!(
            "solution properties: Shapley vs permutations {shapley_dev:.1e} (tol 1e-9), nucleolus outside core {core_fail} (tol 1e-7), efficiency {eff_dev:.1e} (tol 1e-7), 3-player nucleolus vs grid {grid_dev:.1e} over {grid_cases} games (tol 2e-4)"
        ),
    );
    out.details = errors.into_iter().take(5).collect();
    out
}

// 6. Detector.

fn criterion_6() -> Outcome {
    let cfg = DetectorConfig::default();
    let floor = (pd_from_snr(&cfg, -200.0) - 0.05).abs();
    let grid: Vec<f64> = (0..=40).map(|k| pd_from_snr(&cfg, -25.0 + 0.5 * k as f64)).collect();
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);
    let draws = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let alarms = (0..draws)
        .filter(|_| simulate_local_decision(&cfg, -10.0, false, &mut rng) == Decision::Present)
        .count();
    let rate = alarms as f64 / draws as f64;
    let se = (0.05 * 0.95 / draws as f64).sqrt();
    let ok = floor <= 1e-6 && increasing && (rate - 0.05).abs() <= 3.0 * se;
    Outcome::new(
        ok,
        format!(
            "detector: |P_d(-200 dB) - 0.05| = {floor:.1e} (tol 1e-6), strictly increasing on 0.5 dB grid: {increasing}, false-alarm rate {rate:.5} vs 0.05 +- {:.5} (3 s.e.)",
            3.0 * se
        ),
    )
}

// 7. Simulation-level comparison.

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..20).collect();
    let mut ordering_ok = 0;
    let mut ispa_missed = Vec::new();
    let mut rho_positive = 0;
    let mut details = Vec::new();
    for &seed in &seeds {
        let cfg = ScenarioConfig {
            n_sus: 3,
            n_channels: 5,
            n_slots: 1000,
            seed,
            ..ScenarioConfig::default()
        };
        let results = run_models(&cfg, &Model::ALL).unwrap();
        let rate = |m: Model| {
            results
                .iter()
                .find(|r| r.model == m)
                .unwrap()
                .summary()
                .cumulative_sum_rate
        };
        let (jsrm, cg, jsrr, jspa, ispa) = (
            rate(Model::Jsrm),
            rate(Model::Cgjsja),
            rate(Model::Jsrr),
            rate(Model::Jspa),
            rate(Model::Ispa),
        );
        let ordered = jsrm >= cg && cg >= jsrr && jsrr >= jspa.max(ispa);
        ordering_ok += usize::from(ordered);
        let ispa_result = results.iter().find(|r| r.model == Model::Ispa).unwrap();
        ispa_missed.push(ispa_result.summary().total_missed_detections);
        let cg_result = results.iter().find(|r| r.model == Model::Cgjsja).unwrap();
        let rho = cg_result.bid_channel_correlation(4);
        rho_positive += usize::from(rho.is_some_and(|r| r > 0.0));
        details.push(format!(
            "seed {seed}: JSRM {jsrm:.1}, CG-JSJA {cg:.1}, JSRR {jsrr:.1}, JSPA {jspa:.1}, ISPA {ispa:.1}; ISPA missed {}; rho(idle=4) {}",
            ispa_missed.last().unwrap(),
            rho.map_or("n/a".to_string(), |r| format!("{r:.3}"))
        ));
    }
    let time = start.elapsed();
    let need = (0.95 * seeds.len() as f64).ceil() as usize;
    let a = ordering_ok >= need;
    let b = ispa_missed.iter().all(|&m| m > 0 && (500..=8000).contains(&m));
    let c = rho_positive >= need;
    let ok = a && b && c && time < Duration::from_secs(120);
    let mut out = Outcome::new(
        ok,
        format!(
            "simulation: (a) JSRM >= CG-JSJA >= JSRR >= max(JSPA, ISPA) in {ordering_ok}/20 seeds (need {need}) {}; (b) ISPA missed detections {}..{} (need all in [500, 8000]) {}; (c) Spearman > 0 at idle=4 in {rho_positive}/20 (need {need}) {}; {:.1} s (limit 120 s)",
            if a { "ok" } else { "FAIL" },
            ispa_missed.iter().min().unwrap(),
            ispa_missed.iter().max().unwrap(),
            if b { "ok" } else { "FAIL" },
            if c { "ok" } else { "FAIL" },
            time.as_secs_f64()
        ),
    );
    if !ok {
        out.details = details;
    }
    out
}

// 8. Determinism through the binary.

fn simulate(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_spectrum-game"))
        .arg("simulate")
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (std::fs::read(a), std::fs::read(b)) {
        (Ok(x), Ok(y)) => !x.is_empty() && x == y,
        _ => false,
    }
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let flags = ["--model", "cgjsja", "--slots", "300", "--seed", "7"];
    let mut ran = simulate(&[&flags[..], &["--out", first.to_str().unwrap()]].concat());
    let manifest = first.join("manifest.json");
    ran &= simulate(&["--manifest", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    let files = ["slots.csv", "scatter.csv"];
    let identical: Vec<bool> = files
        .iter()
        .map(|f| same_file(&first.join(f), &second.join(f)))
        .collect();
    let ok = ran && identical.iter().all(|&x| x);
    Outcome::new(
        ok,
        format!(
            "determinism: re-run from manifest gives byte-identical slots.csv {} and scatter.csv {}",
            identical[0], identical[1]
        ),
    )
}

fn main() {
    let mut results = Vec::new();
    let mut run = |id: usize, f: &mut dyn FnMut() -> Outcome| {
        let out = f();
        println!(
            "{} criterion {id}: {}",
            if out.passed { "PASS" } else { "FAIL" },
            out.summary
        );
        for d in &out.details {
            println!("    {d}");
        }
        results.push(out.passed);
    };
    run(1, &mut criterion_1);
    run(2, &mut criterion_2);
    run(3, &mut criterion_3);
    let start = Instant::now();
    let games = instances();
    let generation = start.elapsed();
    run(4, &mut || criterion_4(&games, generation));
    run(5, &mut || criterion_5(&games));
    run(6, &mut criterion_6);
    run(7, &mut criterion_7);
    run(8, &mut criterion_8);
    let failed = results.iter().filter(|&&p| !p).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

