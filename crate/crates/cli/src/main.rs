//! Experiment runner for the venue-choice feedback-loop simulator.

mod config;
mod run;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{parse_exclusions, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "venuesim",
    version,
    about = "Simulate the feedback loop between venue choices and a periodically retrained next-venue recommender"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single (eta, algorithm) simulation cell.
    Simulate(CommonArgs),
    /// Run the full eta x algorithm x runs grid and aggregate results.
    Sweep(CommonArgs),
    /// Train each algorithm on the train split and evaluate on the post split.
    Eval(CommonArgs),
    /// Recompute metrics and plot data from a simulated-visit CSV.
    Metrics {
        /// Simulated-visit CSV produced by `simulate` or `sweep`.
        #[arg(long)]
        visits: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write a seeded user subsample of the dataset as canonical CSV.
    Subsample {
        /// Number of users to keep.
        #[arg(short = 'n', long)]
        n: usize,
        /// Output CSV path.
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Generate a synthetic check-in dataset (raw layout plus hierarchy).
    Generate(GenerateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Check-in file (raw 8-column or canonical 6-column layout).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Input layout: raw | canonical | auto.
    #[arg(long)]
    format: Option<String>,
    /// Two-column category hierarchy CSV (second level, first level).
    #[arg(long)]
    hierarchy: Option<PathBuf>,
    /// Comma-separated excluded categories, or "none".
    #[arg(long)]
    exclusions: Option<String>,
    /// Adoption-rate grid, comma separated.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Algorithms, comma separated
    /// (popularity|userknn|itemknn|mf|bprmf|pgn).
    #[arg(long = "algo", value_delimiter = ',')]
    algo: Option<Vec<String>>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replicates per (eta, algorithm) cell.
    #[arg(long)]
    runs: Option<u32>,
    /// Keep only this many users (seeded uniform sample).
    #[arg(long)]
    subsample: Option<usize>,
    /// When subsampling, drop venues nobody in the sample visited.
    #[arg(long)]
    prune_catalog: bool,
    /// Retraining period in days.
    #[arg(long)]
    delta_days: Option<f64>,
    /// Recommendation list length.
    #[arg(long)]
    topk: Option<usize>,
    /// Radius-query anchor: trace | simulated.
    #[arg(long)]
    anchor: Option<String>,
    /// Exploration probability mode: fixed | peruser.
    #[arg(long)]
    explore_mode: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Train-period length in days from the first event.
    #[arg(long)]
    t_train: Option<f64>,
    /// Observation horizon in days from the first event.
    #[arg(long)]
    t_max: Option<f64>,
    /// Jump-length estimation scope: full | train.
    #[arg(long)]
    jump_scope: Option<String>,
    /// Rich-club size (top-degree nodes).
    #[arg(long)]
    rich_h: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Artifact directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::default();
        if let Some(path) = &self.config {
            spec.apply_config_file(path)?;
        }
        if let Some(v) = &self.data {
            spec.data = Some(v.clone());
        }
        if let Some(v) = &self.format {
            spec.format = v.clone();
        }
        if let Some(v) = &self.hierarchy {
            spec.hierarchy = Some(v.clone());
        }
        if let Some(v) = &self.exclusions {
            spec.exclusions = parse_exclusions(v);
        }
        if let Some(v) = &self.eta {
            spec.etas = v.clone();
        }
        if let Some(v) = &self.algo {
            spec.algos = v.iter().flat_map(|s| config::parse_list(s)).collect();
        }
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = self.runs {
            spec.runs = v;
        }
        if let Some(v) = self.subsample {
            spec.subsample = Some(v);
        }
        if self.prune_catalog {
            spec.keep_full_catalog = false;
        }
        if let Some(v) = self.delta_days {
            spec.delta_days = v;
        }
        if let Some(v) = self.topk {
            spec.top_k = v;
        }
        if let Some(v) = &self.anchor {
            spec.anchor = v.clone();
        }
        if let Some(v) = &self.explore_mode {
            spec.explore_mode = v.clone();
        }
        if let Some(v) = self.rho {
            spec.rho = v;
        }
        if let Some(v) = self.gamma {
            spec.gamma = v;
        }
        if let Some(v) = self.t_train {
            spec.t_train_days = v;
        }
        if let Some(v) = self.t_max {
            spec.t_max_days = v;
        }
        if let Some(v) = &self.jump_scope {
            spec.jump_scope = v.clone();
        }
        if let Some(v) = self.rich_h {
            spec.rich_h = v;
        }
        if let Some(v) = self.workers {
            spec.workers = v;
        }
        if let Some(v) = &self.out {
            spec.out = v.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 600)]
    users: usize,
    #[arg(long, default_value_t = 15000)]
    venues: usize,
    #[arg(long, default_value_t = 100)]
    categories: usize,
    #[arg(long, default_value_t = 304.0)]
    days: f64,
    #[arg(long, default_value_t = 150.0)]
    mean_visits: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Zipf exponent of intrinsic venue attractiveness.
    #[arg(long)]
    attractiveness_zipf: Option<f64>,
    /// Median generated jump length, km.
    #[arg(long)]
    jump_median: Option<f64>,
    /// Exploration scale of the generating process.
    #[arg(long)]
    gen_rho: Option<f64>,
    /// Exploration decay of the generating process.
    #[arg(long)]
    gen_gamma: Option<f64>,
    /// Lognormal sigma of per-user activity.
    #[arg(long)]
    activity_sigma: Option<f64>,
    #[arg(long)]
    clusters: Option<usize>,
    /// Fraction of venues scattered uniformly instead of clustered.
    #[arg(long)]
    sprawl: Option<f64>,
    /// Preferred categories per user (0 disables niches).
    #[arg(long)]
    affinity: Option<usize>,
    /// Explore weight of non-preferred categories.
    #[arg(long)]
    affinity_background: Option<f64>,
    /// Dampening exponent on return weights (1 = classic).
    #[arg(long)]
    return_exponent: Option<f64>,
    /// Repertoire size where generated exploration starts to decay.
    #[arg(long)]
    saturation: Option<f64>,
    /// Number of landmark venues with population-wide draw.
    #[arg(long)]
    landmarks: Option<usize>,
    /// Per-visit probability of a landmark trip.
    #[arg(long)]
    landmark_prob: Option<f64>,
    /// Zipf exponent of landmark popularity.
    #[arg(long)]
    landmark_zipf: Option<f64>,
    #[arg(long)]
    cluster_sigma_km: Option<f64>,
    /// Output directory for checkins.tsv and hierarchy.csv.
    #[arg(long, default_value = "data")]
    out: PathBuf,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(args) => run::cmd_simulate(&args.resolve()?),
        Command::Sweep(args) => run::cmd_sweep(&args.resolve()?),
        Command::Eval(args) => run::cmd_eval(&args.resolve()?),
        Command::Metrics { visits, common } => run::cmd_metrics(&visits, &common.resolve()?),
        Command::Subsample { n, output, common } => {
            run::cmd_subsample(&common.resolve()?, n, &output)
        }
        Command::Generate(args) => {
            let mut cfg = venuesim_core::synth::SynthConfig {
                users: args.users,
                venues: args.venues,
                categories: args.categories,
                days: args.days,
                mean_visits_per_user: args.mean_visits,
                seed: args.seed,
                ..venuesim_core::synth::SynthConfig::default()
            };
            if let Some(v) = args.attractiveness_zipf {
                cfg.attractiveness_zipf = v;
            }
            if let Some(v) = args.jump_median {
                cfg.jump_median_km = v;
            }
            if let Some(v) = args.gen_rho {
                cfg.rho = v;
            }
            if let Some(v) = args.gen_gamma {
                cfg.gamma = v;
            }
            if let Some(v) = args.activity_sigma {
                cfg.activity_sigma = v;
            }
            if let Some(v) = args.clusters {
                cfg.clusters = v;
            }
            if let Some(v) = args.sprawl {
                cfg.sprawl_fraction = v;
            }
            if let Some(v) = args.affinity {
                cfg.affinity_categories = v;
            }
            if let Some(v) = args.affinity_background {
                cfg.affinity_background = v;
            }
            if let Some(v) = args.return_exponent {
                cfg.return_exponent = v;
            }
            if let Some(v) = args.saturation {
                cfg.saturation_distinct = v;
            }
            if let Some(v) = args.landmarks {
                cfg.landmark_count = v;
            }
            if let Some(v) = args.landmark_prob {
                cfg.landmark_prob = v;
            }
            if let Some(v) = args.landmark_zipf {
                cfg.landmark_zipf = v;
            }
            if let Some(v) = args.cluster_sigma_km {
                cfg.cluster_sigma_km = v;
            }
            run::cmd_generate(&cfg, &args.out)
        }
    }
}
