//! One-shot commands: detector curves, game, solutions, auction, checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;
use spectrum_game::auction::{normalized_balance, run_vcg, AuctionConfig, AuctionOutcome, CapacityEstimates};
use spectrum_game::coalition::Coalition;
use spectrum_game::detection::{pd_from_snr, roc_curve, DecisionVector, DetectorConfig, PdMatrix};
use spectrum_game::fixtures::{check_paper_example, FixtureTolerances, PaperExample};
use spectrum_game::game::{characteristic_function_with, CharacteristicFunction, Gating, SensingMap};
use spectrum_game::properties::{run_properties, PropertyConfig};
use spectrum_game::solutions::{core_contains, normalize_100, CoreCheck, SolutionConcept};

use crate::io::{emit, fmt4, read_json, write_json, AuctionInput, GameInput};

pub fn roc(snr: f64, points: usize, out: Option<&Path>) -> Result<bool> {
    let curve = roc_curve(&DetectorConfig::default(), snr, points)?;
    let mut text = String::from("p_fa,p_d\n");
    for p in curve {
        writeln!(text, "{},{}", p.p_fa, p.p_d)?;
    }
    emit(out, &text)?;
    Ok(true)
}

pub fn pdmap(from: f64, to: f64, step: f64, pfa: f64, out: Option<&Path>) -> Result<bool> {
    ensure!(step > 0.0 && from <= to, "need step > 0 and from <= to");
    let cfg = DetectorConfig {
        p_fa: pfa,
        ..DetectorConfig::default()
    };
    cfg.validate()?;
    let mut text = String::from("snr_db,p_d\n");
    let n = ((to - from) / step + 1e-9).floor() as usize;
    for k in 0..=n {
        let snr = from + k as f64 * step;
        writeln!(text, "{snr},{}", pd_from_snr(&cfg, snr))?;
    }
    emit(out, &text)?;
    Ok(true)
}

fn game_table(v: &CharacteristicFunction) -> String {
    let mut text = format!("{:<16} {:>10}\n", "coalition", "worth");
    for s in Coalition::all_nonempty(v.n_players()) {
        writeln!(text, "{:<16} {:>10.4}", s.to_string(), v.worth(s)).unwrap();
    }
    text
}

pub fn game(input: &Path, ungated: bool, json: bool, out: Option<&Path>) -> Result<bool> {
    let doc: GameInput = read_json(input)?;
    let pd = PdMatrix::from_rows(&doc.pd_matrix, &doc.sensed)?;
    let map = SensingMap::from_rows(&doc.sensed)?;
    let gating = if ungated { Gating::Disabled } else { Gating::Agreement };
    let v = characteristic_function_with(&pd, &DecisionVector(doc.decisions), &map, gating)?;
    let worths = v.to_map();
    if let Some(path) = out {
        write_json(path, &worths)?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&worths)?);
    } else {
        print!("{}", game_table(&v));
    }
    Ok(true)
}

#[derive(Serialize)]
struct SolutionReport {
    concept: &'static str,
    raw: Vec<f64>,
    normalized: Option<Vec<f64>>,
    core: CoreCheck,
}

#[derive(Serialize)]
struct SolveReport {
    grand_worth: f64,
    solutions: Vec<SolutionReport>,
}

pub fn solve(input: &Path, json: bool, out: Option<&Path>) -> Result<bool> {
    let map: BTreeMap<u32, f64> = read_json(input)?;
    let v = CharacteristicFunction::from_map(&map)?;
    let mut solutions = Vec::new();
    for concept in SolutionConcept::ALL {
        let raw = concept
            .solve(&v)
            .with_context(|| format!("computing the {}", concept.name()))?;
        solutions.push(SolutionReport {
            concept: concept.name(),
            normalized: normalize_100(&raw).ok().map(|x| x.values),
            core: core_contains(&v, &raw),
            raw: raw.values,
        });
    }
    let report = SolveReport {
        grand_worth: v.grand_worth(),
        solutions,
    };
    if let Some(path) = out {
        write_json(path, &report)?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(true);
    }
    let n = v.n_players();
    let header: Vec<String> = (1..=n).map(|i| format!("{:>10}", format!("SU{i}"))).collect();
    println!("{:<12} {:<10} {}  in core", "solution", "scale", header.join(" "));
    for s in &report.solutions {
        println!("{:<12} {:<10} {}  {}", s.concept, "raw", fmt4(&s.raw), s.core.in_core);
        if let Some(norm) = &s.normalized {
            println!("{:<12} {:<10} {}", "", "normalized", fmt4(norm));
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct AuctionReport<'a> {
    outcome: &'a AuctionOutcome,
    normalized_balances: Option<Vec<f64>>,
}

pub fn auction(input: &Path, increment: Option<f64>, json: bool, out: Option<&Path>) -> Result<bool> {
    let doc: AuctionInput = read_json(input)?;
    let cfg = AuctionConfig {
        increment: increment.or(doc.increment).unwrap_or(AuctionConfig::default().increment),
        ..AuctionConfig::default()
    };
    ensure!(cfg.increment > 0.0, "bid increment must be positive");
    let caps = CapacityEstimates::from_rows(&doc.capacity_estimates)?;
    let outcome = run_vcg(&doc.wallets, &doc.bids, &doc.idle_channels, &caps, &cfg)?;
    let report = AuctionReport {
        outcome: &outcome,
        normalized_balances: normalized_balance(&outcome).map(|x| x.values),
    };
    if let Some(path) = out {
        write_json(path, &report)?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(true);
    }
    println!("{:<6} {:<8} {:<8} {:>10} {:>10} {:>10}", "round", "winner", "channel", "bid", "price", "residual");
    for (k, r) in outcome.rounds.iter().enumerate() {
        println!(
            "{:<6} {:<8} {:<8} {:>10.4} {:>10.4} {:>10.4}",
            k + 1,
            format!("SU{}", r.winner + 1),
            format!("ch{}", r.channel + 1),
            r.bid,
            r.price,
            r.residual
        );
    }
    println!("balance            {}", fmt4(&outcome.balances));
    if let Some(norm) = &report.normalized_balances {
        println!("normalized balance {}", fmt4(norm));
    }
    Ok(true)
}

fn parse_override(spec: &str) -> Result<(usize, usize, f64)> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [su, ch, p] = parts[..] else {
        bail!("override {spec:?} is not SU,CH,VALUE");
    };
    let (su, ch): (usize, usize) = (su.parse()?, ch.parse()?);
    ensure!(su >= 1 && ch >= 1, "SU and channel are 1-based");
    Ok((su - 1, ch - 1, p.parse()?))
}

pub fn fixture(tolerance_scale: f64, overrides: &[String], ungated: bool) -> Result<bool> {
    ensure!(tolerance_scale >= 0.0, "tolerance scale must be non-negative");
    let mut ex = PaperExample::default();
    for spec in overrides {
        let (su, ch, p) = parse_override(spec)?;
        ensure!(su < ex.pd.len() && ch < ex.pd[0].len(), "cell {spec:?} is outside the example");
        ensure!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
        ex = ex.with_pd(su, ch, p);
    }
    if ungated {
        ex.gating = Gating::Disabled;
    }
    let checks = check_paper_example(&ex, FixtureTolerances::default().scaled(tolerance_scale));
    let mut all = true;
    for c in &checks {
        all &= c.passed;
        println!(
            "{} {} (tolerance {:.0e}, max deviation {:.2e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.tolerance,
            c.max_deviation
        );
        for d in c.details.iter().filter(|d| !c.passed || d.starts_with("FAIL")) {
            println!("    {d}");
        }
    }
    Ok(all)
}

pub fn properties(cfg: PropertyConfig, report_path: Option<&Path>) -> Result<bool> {
    let report = run_properties(&cfg)?;
    println!("{} instances, seed {}", report.instances, cfg.seed);
    for (property, count) in &report.counts {
        println!("{:<20} {count} violations", property.to_string());
    }
    // Counterexamples in full, capped so a broken build does not flood the terminal.
    for v in report.violations.iter().take(5) {
        println!("\n{} in instance {}: {}", v.property, v.instance.index, v.detail);
        println!("  P_d       {:?}", v.instance.pd.rows());
        println!("  sensed    {:?}", v.instance.map.rows());
        println!("  decisions {:?}", v.instance.decisions.0.iter().map(|d| i8::from(*d)).collect::<Vec<_>>());
        println!("  game      {}", serde_json::to_string(&v.game)?);
    }
    if report.violations.len() > 5 {
        println!("\n... {} more; see --report", report.violations.len() - 5);
    }
    if let Some(path) = report_path {
        write_json(path, &report)?;
    }
    Ok(report.passed())
}

