use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{DateTime, NaiveDate, Utc};
use clap::{Args, Parser, Subcommand};

use topic_lifecycle::embedding::DivisorMode;
use topic_lifecycle::pipeline::{write_synthetic, Pipeline, PipelineConfig, PipelineError, StageStatus};
use topic_lifecycle::synth::SynthSpec;

/// Hashtag topic clustering and per-community topic lifecycle analysis.
///
/// Exit status: 0 success, 1 invalid configuration, 2 missing upstream
/// stage, 3 I/O error, 4 internal invariant violation.
#[derive(Parser)]
#[command(name = "topic-lifecycle", version)]
struct Cli {
    /// TOML config file; relative paths inside it resolve against its directory.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags override the config file.
#[derive(Args)]
struct Overrides {
    /// Tweet file (SNAP three-line records, optionally gzipped).
    #[arg(long, global = true)]
    tweets: Option<PathBuf>,
    /// Follower edge file, `user<TAB>follower` per line.
    #[arg(long, global = true)]
    edges: Option<PathBuf>,
    /// Word-vector file, `word v1 .. vd` per line.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Directory for stage artifacts [default: output].
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Drop tweets before this instant (RFC 3339 or YYYY-MM-DD); also the slot epoch.
    #[arg(long, global = true, value_parser = parse_instant)]
    window_start: Option<DateTime<Utc>>,
    /// Drop tweets at or after this instant (RFC 3339 or YYYY-MM-DD).
    #[arg(long, global = true, value_parser = parse_instant)]
    window_end: Option<DateTime<Utc>>,
    /// Timeslot width in hours [default: 24].
    #[arg(long, global = true)]
    slot_width_hours: Option<u32>,
    /// Least total occurrences for a hashtag to be retained [default: 40].
    #[arg(long, global = true)]
    min_count: Option<u64>,
    /// Most total occurrences for a hashtag to be retained [default: 1000].
    #[arg(long, global = true)]
    max_count: Option<u64>,
    /// Comma-separated k values for k-means [default: 200,400,...,2000].
    #[arg(long, global = true, value_delimiter = ',')]
    k_values: Option<Vec<usize>>,
    /// Largest slot distance at which two hashtags count as temporally related [default: 2].
    #[arg(long, global = true)]
    gap_threshold: Option<u32>,
    /// k-means seed [default: 0].
    #[arg(long, global = true)]
    kmeans_seed: Option<u64>,
    /// k-means iteration cap [default: 100].
    #[arg(long, global = true)]
    kmeans_max_iterations: Option<usize>,
    /// k-means restarts per k; the best objective wins [default: 1].
    #[arg(long, global = true)]
    kmeans_restarts: Option<usize>,
    /// Louvain seed [default: 0].
    #[arg(long, global = true)]
    community_seed: Option<u64>,
    /// Louvain visit orders tried; the highest modularity wins [default: 8].
    #[arg(long, global = true)]
    community_restarts: Option<usize>,
    /// Smallest community that gets its own timeline scope [default: 10].
    #[arg(long, global = true)]
    min_community_size: Option<usize>,
    /// Word-vector dimension [default: 200].
    #[arg(long, global = true)]
    lexicon_dimension: Option<usize>,
    /// Embedding divisor: covered (lexicon-covered tokens) or all_tokens [default: covered].
    #[arg(long, global = true, value_parser = parse_divisor)]
    divisor: Option<DivisorMode>,
    /// Compare dominant hashtags across silent slots when detecting morphs.
    #[arg(long, global = true)]
    morph_across_gaps: bool,
    /// Write an SVG plot per (topic, scope) in the report stage.
    #[arg(long, global = true)]
    emit_svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse tweets, filter hashtags by frequency, keep tweets carrying a retained hashtag.
    Ingest,
    /// Embed each retained hashtag as the mean word vector of its tweets.
    Embed,
    /// Spherical k-means over the embeddings for every configured k.
    Cluster,
    /// Split semantic clusters into temporally connected topics.
    Split {
        #[arg(long)]
        k: usize,
    },
    /// Louvain communities over the follower graph of retained users.
    Communities,
    /// Per-scope hashtag and topic usage series.
    Timelines {
        #[arg(long)]
        k: usize,
    },
    /// Lifecycle report: intensity, dominant hashtags, morph and death events.
    Report {
        #[arg(long)]
        k: usize,
    },
    /// Write a synthetic corpus with ground truth and a matching pipeline.toml.
    Synth {
        /// TOML synthetic spec; defaults to two communities and three topics.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "synthetic")]
        out: PathBuf,
    },
    /// Every stage in order; per-k stages run for --k or for every configured k.
    All {
        #[arg(long)]
        k: Option<usize>,
    },
}

fn parse_instant(s: &str) -> Result<DateTime<Utc>, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
        .map_err(|_| format!("expected RFC 3339 or YYYY-MM-DD, got {s:?}"))
}

fn parse_divisor(s: &str) -> Result<DivisorMode, String> {
    match s {
        "covered" => Ok(DivisorMode::Covered),
        "all_tokens" | "all-tokens" => Ok(DivisorMode::AllTokens),
        _ => Err(format!("expected covered or all_tokens, got {s:?}")),
    }
}

impl Overrides {
    fn apply(self, c: &mut PipelineConfig) {
        macro_rules! set {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = self.$field { c.$target = v; })*
            };
        }
        macro_rules! set_some {
            ($($field:ident),* $(,)?) => {
                $(if let Some(v) = self.$field { c.$field = Some(v); })*
            };
        }
        set_some!(tweets, edges, lexicon, window_start, window_end);
        set!(
            output_dir => output_dir,
            slot_width_hours => slot_width_hours,
            min_count => min_count,
            max_count => max_count,
            k_values => k_values,
            gap_threshold => gap_threshold_slots,
            kmeans_seed => kmeans_seed,
            kmeans_max_iterations => kmeans_max_iterations,
            kmeans_restarts => kmeans_restarts,
            community_seed => community_seed,
            community_restarts => community_restarts,
            min_community_size => min_community_size,
            lexicon_dimension => lexicon_dimension,
            divisor => divisor,
        );
        c.morph_across_gaps |= self.morph_across_gaps;
        c.emit_svg |= self.emit_svg;
    }
}

fn synth(spec: Option<PathBuf>, seed: Option<u64>, out: PathBuf) -> Result<(), PipelineError> {
    let mut spec = match spec {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|source| PipelineError::Io { path, source })?;
            toml::from_str::<SynthSpec>(&text).map_err(|e| PipelineError::Config(vec![e.message().to_string()]))?
        }
        None => SynthSpec::default(),
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let config = write_synthetic(&spec, &out)?;
    println!("synthetic corpus written to {}", out.display());
    println!("run it with: topic-lifecycle --config {} all", config.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| PipelineError::Config(vec![format!("--threads: {e}")]))?;
    }
    if let Command::Synth { spec, seed, out } = cli.command {
        return synth(spec, seed, out);
    }
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::from_toml_file(path)?,
        None => PipelineConfig::default(),
    };
    cli.overrides.apply(&mut config);
    let pipeline = Pipeline::new(config)?;
    let log: Vec<(String, StageStatus)> = match cli.command {
        Command::Ingest => vec![("ingest".into(), pipeline.ingest()?)],
        Command::Embed => vec![("embed".into(), pipeline.embed()?)],
        Command::Cluster => vec![("cluster".into(), pipeline.cluster()?)],
        Command::Split { k } => vec![(format!("split --k {k}"), pipeline.split(k)?)],
        Command::Communities => vec![("communities".into(), pipeline.communities()?)],
        Command::Timelines { k } => vec![(format!("timelines --k {k}"), pipeline.timelines(k)?)],
        Command::Report { k } => vec![(format!("report --k {k}"), pipeline.report(k)?)],
        Command::All { k } => pipeline.all(k)?,
        Command::Synth { .. } => unreachable!("handled above"),
    };
    for (stage, status) in log {
        println!("{stage}: {}", status.as_str());
    }
    println!("artifacts in {}", pipeline.output_dir().display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
