//! `superspreader` command-line front end.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use superspreader_core::behavior::TopRule;
use superspreader_core::MetricName;

use config::{PipelineConfig, ScorerMode};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "superspreader", version, about = "Identify and characterize superspreaders of low-credibility content")]
struct Cli {
    /// TOML run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
struct InputArgs {
    /// Line-delimited JSON corpus (repeatable; `.gz` is decompressed).
    #[arg(long = "corpus")]
    corpus: Vec<PathBuf>,
    /// Low-credibility domain list, one domain per line.
    #[arg(long)]
    domains: Option<PathBuf>,
    /// Offline short-link map (`short<TAB>target`).
    #[arg(long)]
    shorteners: Option<PathBuf>,
    /// Skip malformed corpus lines instead of failing.
    #[arg(long)]
    lenient: bool,
    #[arg(long, allow_hyphen_values = true)]
    observation_start: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    observation_end: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    evaluation_start: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    evaluation_end: Option<i64>,
}

#[derive(Debug, Args, Default)]
struct RankArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Metric to rank by (repeatable): fib, influence, popularity, bot_score.
    #[arg(long = "metric")]
    metrics: Vec<MetricName>,
    /// Select the top N accounts per metric.
    #[arg(long, conflicts_with = "top_percent")]
    top_n: Option<usize>,
    /// Select the top percent of accounts with a positive metric value.
    #[arg(long)]
    top_percent: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlternativeArg {
    TwoSided,
    Less,
    Greater,
}

#[derive(Debug, Subcommand)]
enum StatsCommand {
    /// Krippendorff's alpha from `item_id,annotator_id,label` rows.
    Alpha {
        #[arg(long)]
        annotations: PathBuf,
    },
    /// Mann-Whitney U between two groups of a `group,value` CSV.
    Mwu {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        group_a: String,
        #[arg(long)]
        group_b: String,
        #[arg(long, value_enum, default_value = "two-sided")]
        alternative: AlternativeArg,
    },
    /// Two-sample Cramér-von Mises between two groups of a `group,value` CSV.
    Cvm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        group_a: String,
        #[arg(long)]
        group_b: String,
    },
    /// Spearman correlation of an `x,y` CSV.
    Spearman {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Label and split the corpus; write labels and per-period edge lists.
    Ingest(InputArgs),
    /// Compute per-account metrics and rankings for the observation period.
    Rank(RankArgs),
    /// Dismantling curves over the evaluation period.
    Dismantle {
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long)]
        curve_every: Option<usize>,
    },
    /// Prefix CvM scan between two metrics' dismantling curves.
    Scan {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        a: Option<MetricName>,
        #[arg(long)]
        b: Option<MetricName>,
        #[arg(long)]
        max_k: Option<usize>,
        #[arg(long)]
        exact_bound: Option<usize>,
        /// Monte-Carlo permutations beyond the exact bound.
        #[arg(long)]
        permutations: Option<usize>,
    },
    /// Profiles of the top-ranked accounts.
    Characterize {
        #[command(flatten)]
        rank: RankArgs,
        #[arg(long, value_enum)]
        scorer: Option<ScorerMode>,
        #[arg(long)]
        score_cache: Option<PathBuf>,
        #[arg(long)]
        status: Option<PathBuf>,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        follower_threshold: Option<u64>,
        #[arg(long)]
        ratio_window_days: Option<u32>,
    },
    /// Generate a synthetic corpus with ground truth.
    Synth {
        #[arg(long)]
        n_accounts: Option<usize>,
        #[arg(long)]
        n_superspreaders: Option<usize>,
        #[arg(long)]
        planted_residual: Option<f64>,
        /// Write the corpus gzipped.
        #[arg(long)]
        gzip: bool,
    },
    /// Standalone statistical tests.
    Stats {
        #[command(subcommand)]
        test: StatsCommand,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl InputArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        if !self.corpus.is_empty() {
            c.input.corpus = self.corpus.clone();
        }
        if self.domains.is_some() {
            c.input.domains = self.domains.clone();
        }
        if self.shorteners.is_some() {
            c.input.shorteners = self.shorteners.clone();
        }
        c.input.lenient |= self.lenient;
        let p = &mut c.period;
        for (slot, v) in [
            (&mut p.observation_start, self.observation_start),
            (&mut p.observation_end, self.observation_end),
            (&mut p.evaluation_start, self.evaluation_start),
            (&mut p.evaluation_end, self.evaluation_end),
        ] {
            if v.is_some() {
                *slot = v;
            }
        }
    }
}

impl RankArgs {
    fn apply(&self, c: &mut PipelineConfig) {
        self.input.apply(c);
        if !self.metrics.is_empty() {
            c.metrics = self.metrics.clone();
        }
        set(&mut c.top, self.top_n.map(|n| TopRule::TopN { n }));
        set(&mut c.top, self.top_percent.map(|percent| TopRule::TopPercentPositive { percent }));
    }
}

fn resolve(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut c = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    set(&mut c.output, cli.out.clone());
    set(&mut c.seed, cli.seed);
    if cli.workers.is_some() {
        c.workers = cli.workers;
    }
    match &cli.command {
        Command::Ingest(i) => i.apply(&mut c),
        Command::Rank(r) => r.apply(&mut c),
        Command::Dismantle { rank, curve_every } => {
            rank.apply(&mut c);
            set(&mut c.dismantle.curve_every, *curve_every);
        }
        Command::Scan { input, a, b, max_k, exact_bound, permutations } => {
            input.apply(&mut c);
            set(&mut c.scan.a, *a);
            set(&mut c.scan.b, *b);
            if max_k.is_some() {
                c.scan.max_k = *max_k;
            }
            set(&mut c.stats.exact_bound, *exact_bound);
            if permutations.is_some() {
                c.stats.permutations = *permutations;
            }
        }
        Command::Characterize { rank, scorer, score_cache, status, annotations, follower_threshold, ratio_window_days } => {
            rank.apply(&mut c);
            let ch = &mut c.characterize;
            set(&mut ch.scorer, *scorer);
            if score_cache.is_some() {
                ch.score_cache = score_cache.clone();
            }
            if status.is_some() {
                ch.status = status.clone();
            }
            if annotations.is_some() {
                ch.annotations = annotations.clone();
            }
            set(&mut ch.follower_threshold, *follower_threshold);
            set(&mut ch.ratio_window_days, *ratio_window_days);
        }
        Command::Synth { n_accounts, n_superspreaders, planted_residual, .. } => {
            set(&mut c.synth.n_accounts, *n_accounts);
            set(&mut c.synth.n_superspreaders, *n_superspreaders);
            set(&mut c.synth.planted_residual, *planted_residual);
        }
        Command::Stats { .. } => {}
    }
    c.validate()?;
    Ok(c)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    if let Some(n) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::internal(format!("worker pool: {e}")))?;
    }
    std::fs::create_dir_all(&cfg.output).map_err(|e| CliError::internal(format!("{}: {e}", cfg.output.display())))?;
    match cli.command {
        Command::Ingest(_) => commands::ingest(&cfg),
        Command::Rank(_) => commands::rank(&cfg),
        Command::Dismantle { .. } => commands::dismantle(&cfg),
        Command::Scan { .. } => commands::scan(&cfg),
        Command::Characterize { .. } => commands::characterize(&cfg),
        Command::Synth { gzip, .. } => commands::synth(&cfg, gzip),
        Command::Stats { test } => match test {
            StatsCommand::Alpha { annotations } => commands::stats_alpha(&cfg, &annotations),
            StatsCommand::Mwu { input, group_a, group_b, alternative } => {
                use superspreader_core::stats::Alternative;
                let alt = match alternative {
                    AlternativeArg::TwoSided => Alternative::TwoSided,
                    AlternativeArg::Less => Alternative::Less,
                    AlternativeArg::Greater => Alternative::Greater,
                };
                commands::stats_two_sample(&cfg, &input, &group_a, &group_b, Some(alt))
            }
            StatsCommand::Cvm { input, group_a, group_b } => commands::stats_two_sample(&cfg, &input, &group_a, &group_b, None),
            StatsCommand::Spearman { input } => commands::stats_spearman(&cfg, &input),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("superspreader: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
