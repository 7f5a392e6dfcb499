//! `simulate` and `compare`, with run manifests.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spectrum_game::simulator::{
    run_models, run_simulation, write_cumulative_csv, write_scatter_csv, write_slots_csv, Model,
    ScenarioConfig, SimulationSummary,
};

use crate::io::{read_json, write_json};
use crate::{CompareArgs, ScenarioArgs, SimulateArgs};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: ScenarioConfig,
    pub seed: u64,
    /// Seeds covered by a `compare` run.
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// File names inside the output directory.
    pub artifacts: Vec<String>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    fn new(command: &str, config: &ScenarioConfig, seeds: Vec<u64>, artifacts: &[&str]) -> Self {
        Self {
            command: command.into(),
            config: config.clone(),
            seed: config.seed,
            seeds,
            artifacts: artifacts.iter().map(|a| a.to_string()).collect(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }
}

const MANIFEST: &str = "manifest.json";

fn apply(args: &ScenarioArgs, mut cfg: ScenarioConfig) -> ScenarioConfig {
    if let Some(v) = args.slots {
        cfg.n_slots = v;
    }
    if let Some(v) = args.sus {
        cfg.n_sus = v;
    }
    if let Some(v) = args.channels {
        cfg.n_channels = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.solution {
        cfg.solution = v;
    }
    if let Some(v) = args.increment {
        cfg.auction.increment = v;
    }
    cfg
}

fn base_config(args: &ScenarioArgs) -> Result<ScenarioConfig> {
    let cfg = match &args.config {
        Some(path) => read_json(path)?,
        None => ScenarioConfig::default(),
    };
    Ok(apply(args, cfg))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn print_summary(s: &SimulationSummary) {
    println!(
        "{}: {} slots, cumulative sum rate {:.4} Mbps, {} missed detections, {} collisions",
        s.model, s.n_slots, s.cumulative_sum_rate, s.total_missed_detections, s.total_collisions
    );
    println!(
        "{:<5} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>12}",
        "SU", "min", "q1", "median", "mean", "q3", "max", "cumulative"
    );
    for su in &s.per_su {
        let r = su.rate;
        println!(
            "{:<5} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>12.4}",
            su.su + 1,
            r.min,
            r.q1,
            r.median,
            r.mean,
            r.q3,
            r.max,
            su.cumulative_rate
        );
    }
}

pub fn simulate(args: SimulateArgs) -> Result<bool> {
    let mut cfg = match &args.manifest {
        Some(path) => apply(&args.scenario, read_json::<RunManifest>(path)?.config),
        None => base_config(&args.scenario)?,
    };
    if let Some(model) = args.model {
        cfg.model = model;
    }
    cfg.validate()?;
    let result = run_simulation(&cfg)?;
    let summary = result.summary();

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_slots_csv(&result, create(&args.out, "slots.csv")?)?;
    write_scatter_csv(&result, create(&args.out, "scatter.csv")?)?;
    write_json(&args.out.join("summary.json"), &summary)?;
    let manifest = RunManifest::new(
        "simulate",
        &cfg,
        vec![cfg.seed],
        &["slots.csv", "scatter.csv", "summary.json"],
    );
    write_json(&args.out.join(MANIFEST), &manifest)?;
    print_summary(&summary);
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
struct ModelRow {
    model: Model,
    mean_cumulative_sum_rate: f64,
    min_cumulative_sum_rate: f64,
    max_cumulative_sum_rate: f64,
    mean_missed_detections: f64,
    mean_collisions: f64,
    /// Jain's index over per-SU cumulative rates, averaged over seeds.
    mean_fairness: f64,
}

#[derive(Debug, Clone, Serialize)]
struct CompareReport {
    seeds: Vec<u64>,
    models: Vec<ModelRow>,
    /// Models by decreasing mean cumulative sum rate.
    ranking: Vec<Model>,
    /// Seeds where JSRM ≥ CG-JSJA ≥ JSRR ≥ max(JSPA, ISPA) in cumulative sum rate.
    reference_ordering_seeds: usize,
    per_seed: Vec<Vec<SimulationSummary>>,
}

fn jain(values: &[f64]) -> f64 {
    let sum: f64 = values.iter().sum();
    let sq: f64 = values.iter().map(|v| v * v).sum();
    if sq == 0.0 {
        1.0
    } else {
        sum * sum / (values.len() as f64 * sq)
    }
}

fn reference_ordering(summaries: &[SimulationSummary]) -> bool {
    let rate = |m: Model| {
        summaries
            .iter()
            .find(|s| s.model == m)
            .map(|s| s.cumulative_sum_rate)
            .unwrap_or(f64::NAN)
    };
    rate(Model::Jsrm) >= rate(Model::Cgjsja)
        && rate(Model::Cgjsja) >= rate(Model::Jsrr)
        && rate(Model::Jsrr) >= rate(Model::Jspa).max(rate(Model::Ispa))
}

pub fn compare(args: CompareArgs) -> Result<bool> {
    let cfg = base_config(&args.scenario)?;
    cfg.validate()?;
    anyhow::ensure!(args.seeds >= 1, "need at least one seed");
    let seeds: Vec<u64> = (0..args.seeds).map(|k| cfg.seed.wrapping_add(k)).collect();
    let runs = seeds
        .par_iter()
        .map(|&seed| run_models(&ScenarioConfig { seed, ..cfg.clone() }, &Model::ALL))
        .collect::<spectrum_game::Result<Vec<_>>>()?;
    let per_seed: Vec<Vec<SimulationSummary>> = runs
        .iter()
        .map(|results| results.iter().map(|r| r.summary()).collect())
        .collect();

    let k = per_seed.len() as f64;
    let mut models: Vec<ModelRow> = Model::ALL
        .iter()
        .enumerate()
        .map(|(m, &model)| {
            let col: Vec<&SimulationSummary> = per_seed.iter().map(|s| &s[m]).collect();
            let rates: Vec<f64> = col.iter().map(|s| s.cumulative_sum_rate).collect();
            ModelRow {
                model,
                mean_cumulative_sum_rate: rates.iter().sum::<f64>() / k,
                min_cumulative_sum_rate: rates.iter().copied().fold(f64::INFINITY, f64::min),
                max_cumulative_sum_rate: rates.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_missed_detections: col.iter().map(|s| s.total_missed_detections as f64).sum::<f64>() / k,
                mean_collisions: col.iter().map(|s| s.total_collisions as f64).sum::<f64>() / k,
                mean_fairness: col
                    .iter()
                    .map(|s| jain(&s.per_su.iter().map(|u| u.cumulative_rate).collect::<Vec<_>>()))
                    .sum::<f64>()
                    / k,
            }
        })
        .collect();
    let mut ranked = models.clone();
    ranked.sort_by(|a, b| b.mean_cumulative_sum_rate.total_cmp(&a.mean_cumulative_sum_rate));
    let report = CompareReport {
        seeds: seeds.clone(),
        ranking: ranked.iter().map(|r| r.model).collect(),
        reference_ordering_seeds: per_seed.iter().filter(|s| reference_ordering(s)).count(),
        models: std::mem::take(&mut models),
        per_seed,
    };

    println!(
        "{} seeds, {} SUs x {} channels x {} slots",
        seeds.len(),
        cfg.n_sus,
        cfg.n_channels,
        cfg.n_slots
    );
    println!(
        "{:<8} {:>6} {:>14} {:>10} {:>10} {:>9}  sensing / access",
        "model", "rank", "sum rate", "missed", "collisions", "fairness"
    );
    for row in &report.models {
        let rank = report.ranking.iter().position(|&m| m == row.model).unwrap() + 1;
        let style = match row.model {
            Model::Cgjsja => "joint / auction",
            Model::Jspa => "joint / contention",
            Model::Ispa => "individual / contention",
            Model::Jsrr => "joint / round robin",
            Model::Jsrm => "joint / rate maximizing",
        };
        println!(
            "{:<8} {:>6} {:>14.4} {:>10.1} {:>10.1} {:>9.4}  {style}",
            row.model.label(),
            rank,
            row.mean_cumulative_sum_rate,
            row.mean_missed_detections,
            row.mean_collisions,
            row.mean_fairness
        );
    }
    println!(
        "JSRM >= CG-JSJA >= JSRR >= max(JSPA, ISPA) in {} of {} seeds",
        report.reference_ordering_seeds,
        seeds.len()
    );

    if let Some(out) = &args.out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        write_json(&out.join("compare.json"), &report)?;
        // Cumulative series of the first seed.
        write_cumulative_csv(&runs[0], create(out, "cumulative.csv")?)?;
        let manifest = RunManifest::new("compare", &cfg, seeds, &["compare.json", "cumulative.csv"]);
        write_json(&out.join(MANIFEST), &manifest)?;
    }
    Ok(true)
}
