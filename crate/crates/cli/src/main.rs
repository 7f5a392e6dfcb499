//! Command-line front end for the spectrum sensing game.

mod analysis;
mod io;
mod sim;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spectrum_game::simulator::Model;
use spectrum_game::solutions::SolutionConcept;

/// Exit status when a check ran and failed.
pub const EXIT_CHECK_FAILED: u8 = 1;
/// Exit status for unreadable or invalid input.
pub const EXIT_INVALID_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "spectrum-game", version, about = "Cooperative spectrum sensing game, channel auction and access simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ROC curve of the detector at one SNR, as CSV.
    Roc {
        #[arg(long, allow_hyphen_values = true)]
        snr: f64,
        #[arg(long, default_value_t = 99)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detection probability over an SNR grid at the configured false-alarm rate, as CSV.
    Pdmap {
        #[arg(long, default_value_t = -25.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[arg(long, default_value_t = 0.05)]
        pfa: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Characteristic function from a JSON {pd_matrix, sensed, decisions} document.
    Game {
        input: PathBuf,
        /// Pay 1 − H(p) even when p contradicts the decision.
        #[arg(long)]
        ungated: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Shapley value, τ-value and nucleolus of a game written by `game`.
    Solve {
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sequential second-price auction from a JSON description.
    Auction {
        input: PathBuf,
        #[arg(long)]
        increment: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Multi-slot simulation of one access model.
    Simulate(SimulateArgs),
    /// All five access models on matched seeds.
    Compare(CompareArgs),
    /// Runs the built-in worked example and diffs it against the reference tables.
    FixturePaperExample {
        /// Multiplies every reference tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Replace one detection probability, as SU,CHANNEL,VALUE (1-based).
        #[arg(long, value_name = "SU,CH,P")]
        override_pd: Vec<String>,
        #[arg(long)]
        ungated: bool,
    },
    /// Randomized checks of the game's structural properties.
    Properties {
        #[arg(long, default_value_t = 10_000)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        min_sus: usize,
        #[arg(long, default_value_t = 6)]
        max_sus: usize,
        #[arg(long, default_value_t = 8)]
        max_channels: usize,
        #[arg(long)]
        ungated: bool,
        /// Skip the solver checks.
        #[arg(long)]
        game_only: bool,
        /// Write the full report, counterexamples included, as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Also write the JSON result to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct ScenarioArgs {
    /// JSON scenario file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long)]
    sus: Option<usize>,
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    solution: Option<SolutionConcept>,
    #[arg(long)]
    increment: Option<f64>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    model: Option<Model>,
    /// Re-run the scenario recorded in a manifest.
    #[arg(long, conflicts_with = "config")]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct CompareArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Number of consecutive seeds, starting at --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Roc { snr, points, out } => analysis::roc(snr, points, out.as_deref()),
        Command::Pdmap {
            from,
            to,
            step,
            pfa,
            out,
        } => analysis::pdmap(from, to, step, pfa, out.as_deref()),
        Command::Game {
            input,
            ungated,
            output,
        } => analysis::game(&input, ungated, output.json, output.out.as_deref()),
        Command::Solve { input, output } => analysis::solve(&input, output.json, output.out.as_deref()),
        Command::Auction {
            input,
            increment,
            output,
        } => analysis::auction(&input, increment, output.json, output.out.as_deref()),
        Command::Simulate(args) => sim::simulate(args),
        Command::Compare(args) => sim::compare(args),
        Command::FixturePaperExample {
            tolerance_scale,
            override_pd,
            ungated,
        } => analysis::fixture(tolerance_scale, &override_pd, ungated),
        Command::Properties {
            instances,
            seed,
            min_sus,
            max_sus,
            max_channels,
            ungated,
            game_only,
            report,
        } => analysis::properties(
            spectrum_game::properties::PropertyConfig {
                n_instances: instances,
                seed,
                min_sus,
                max_sus,
                max_channels,
                gating: if ungated {
                    spectrum_game::game::Gating::Disabled
                } else {
                    spectrum_game::game::Gating::Agreement
                },
                check_solutions: !game_only,
                ..Default::default()
            },
            report.as_deref(),
        ),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID_INPUT)
        }
    }
}
