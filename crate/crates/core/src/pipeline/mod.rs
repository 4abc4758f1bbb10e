//! Staged batch pipeline. Each stage writes its artifacts under
//! `output_dir/<stage>/` together with a `manifest.json` that records a
//! content hash of everything the stage read. A stage whose inputs and
//! parameters hash the same as last time is skipped.

mod config;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{Needs, PipelineConfig};

use crate::clustering::{
    read_clusters_csv, sweep_k_with, write_clusters_csv, ClusteringError, KMeansConfig,
};
use crate::community::{
    louvain, read_partition_csv, write_partition_csv, CommunityError, CommunitySummary, LouvainConfig,
    Partition,
};
use crate::corpus::{
    filter_hashtags, load_social_graph, midnight_utc, open_input, parse_tweet_stream, write_tweet,
    CorpusError, CorpusSummary, FilterBounds, HashtagId, Slotting, Tweet,
};
use crate::embedding::{
    build_documents, embed_all, load_lexicon_filtered, read_embeddings, write_embeddings, EmbeddingError,
};
use crate::synth::{generate, SynthError, SynthSpec};
use crate::temporal::{build_all_usage_series, read_topics_csv, split_all, write_topics_csv, TopicCluster};
use crate::timeline::{
    build_hashtag_timeline, lifecycle_report, read_hashtag_timeline_csv, render_svg,
    write_hashtag_timeline_csv, write_topic_timeline_csv, HashtagTimeline, Scope, TimelineSpec,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("stage `{stage}` needs {} from stage `{needs}`; run `{needs}` first", .missing.display())]
    Prerequisite {
        stage: String,
        needs: String,
        missing: PathBuf,
    },
    #[error("I/O error on {}: {source}", .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl PipelineError {
    /// 0 success, 1 validation, 2 prerequisite, 3 I/O, 4 invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Prerequisite { .. } => 2,
            PipelineError::Io { .. } => 3,
            PipelineError::Invariant(_) => 4,
        }
    }

    pub(crate) fn io(path: &Path) -> impl FnOnce(io::Error) -> PipelineError {
        let path = path.to_path_buf();
        move |source| PipelineError::Io { path, source }
    }

    fn corpus(path: &Path) -> impl FnOnce(CorpusError) -> PipelineError {
        let path = path.to_path_buf();
        move |e| match e {
            CorpusError::Io(source) => PipelineError::Io { path, source },
            CorpusError::InvalidBounds { .. } | CorpusError::InvalidSlotWidth => {
                PipelineError::Config(vec![e.to_string()])
            }
            other => PipelineError::Invariant(other.to_string()),
        }
    }

    fn csv(path: &Path) -> impl FnOnce(csv::Error) -> PipelineError {
        let path = path.to_path_buf();
        move |e| {
            if e.is_io_error() {
                match e.into_kind() {
                    csv::ErrorKind::Io(source) => PipelineError::Io { path, source },
                    other => PipelineError::Invariant(format!("{other:?}")),
                }
            } else {
                PipelineError::Invariant(format!("corrupt artifact {}: {e}", path.display()))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ran,
    UpToDate,
}

impl StageStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            StageStatus::Ran => "ran",
            StageStatus::UpToDate => "up-to-date",
        }
    }
}

/// Corpus figures plus the slotting later stages reuse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    /// `total_tweets` counts tweets inside the window only.
    #[serde(flatten)]
    pub corpus: CorpusSummary,
    pub out_of_window: u64,
    pub distinct_hashtags: u64,
    pub epoch_start: Option<DateTime<Utc>>,
    pub slot_width_hours: u32,
    pub slot_count: usize,
}

impl IngestSummary {
    pub fn slotting(&self) -> Option<Slotting> {
        let epoch = self.epoch_start?;
        Slotting::new(epoch, Duration::hours(self.slot_width_hours.into())).ok()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    stage: String,
    input_hash: String,
    /// Output path relative to the output dir -> sha256 of its bytes.
    outputs: BTreeMap<String, String>,
}

enum Input {
    Raw(PathBuf),
    Artifact { path: PathBuf, stage: String },
}

fn file_hash(path: &Path) -> Result<String, PipelineError> {
    let mut file = File::open(path).map_err(PipelineError::io(path))?;
    let mut hasher = Sha256::new();
    io::copy(&mut file, &mut hasher).map_err(PipelineError::io(path))?;
    Ok(hex::encode(hasher.finalize()))
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    Ok(BufWriter::new(File::create(path).map_err(PipelineError::io(path))?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), PipelineError> {
    w.flush().map_err(PipelineError::io(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| PipelineError::Invariant(e.to_string()))?;
    fs::write(path, text + "\n").map_err(PipelineError::io(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    let text = fs::read_to_string(path).map_err(PipelineError::io(path))?;
    serde_json::from_str(&text)
        .map_err(|e| PipelineError::Invariant(format!("corrupt artifact {}: {e}", path.display())))
}

/// Reads a tweet artifact written by an earlier stage. Malformed records
/// there mean the artifact was tampered with.
fn read_tweet_artifact(path: &Path) -> Result<Vec<Tweet>, PipelineError> {
    let mut reader = parse_tweet_stream(open_input(path).map_err(PipelineError::io(path))?);
    let tweets = reader
        .by_ref()
        .collect::<Result<Vec<_>, _>>()
        .map_err(PipelineError::corpus(path))?;
    if reader.stats().malformed_skipped > 0 {
        return Err(PipelineError::Invariant(format!(
            "{} has {} malformed records",
            path.display(),
            reader.stats().malformed_skipped
        )));
    }
    Ok(tweets)
}

fn read_hashtag_set(path: &Path) -> Result<BTreeSet<HashtagId>, PipelineError> {
    let file = File::open(path).map_err(PipelineError::io(path))?;
    let mut r = csv::Reader::from_reader(file);
    let mut out = BTreeSet::new();
    for row in r.records() {
        let row = row.map_err(PipelineError::csv(path))?;
        let h = HashtagId::new(&row[0])
            .ok_or_else(|| PipelineError::Invariant(format!("bad hashtag {:?} in {}", &row[0], path.display())))?;
        out.insert(h);
    }
    Ok(out)
}

/// Runs stages against one output directory.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate(Needs::default())?;
        Ok(Pipeline { config })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn output_dir(&self) -> &Path {
        &self.config.output_dir
    }

    fn stage_dir(&self, stage: &str, k: Option<usize>) -> PathBuf {
        let dir = self.config.output_dir.join(stage);
        match k {
            Some(k) => dir.join(format!("k{k}")),
            None => dir,
        }
    }

    pub fn ingest_dir(&self) -> PathBuf {
        self.stage_dir("ingest", None)
    }

    pub fn embed_dir(&self) -> PathBuf {
        self.stage_dir("embed", None)
    }

    pub fn cluster_dir(&self) -> PathBuf {
        self.stage_dir("cluster", None)
    }

    pub fn split_dir(&self, k: usize) -> PathBuf {
        self.stage_dir("split", Some(k))
    }

    pub fn communities_dir(&self) -> PathBuf {
        self.stage_dir("communities", None)
    }

    pub fn timelines_dir(&self, k: usize) -> PathBuf {
        self.stage_dir("timelines", Some(k))
    }

    pub fn report_dir(&self, k: usize) -> PathBuf {
        self.stage_dir("report", Some(k))
    }

    fn artifact(&self, path: PathBuf, stage: &str) -> Input {
        Input::Artifact {
            path,
            stage: stage.to_string(),
        }
    }

    /// Writes `config.resolved.toml` into the output dir.
    fn prepare(&self, needs: Needs) -> Result<(), PipelineError> {
        self.config.validate(needs)?;
        let out = &self.config.output_dir;
        fs::create_dir_all(out).map_err(PipelineError::io(out))?;
        let path = out.join("config.resolved.toml");
        fs::write(&path, self.config.to_toml()).map_err(PipelineError::io(&path))
    }

    fn run_stage<F>(
        &self,
        stage: &str,
        dir: &Path,
        inputs: &[Input],
        params: serde_json::Value,
        body: F,
    ) -> Result<StageStatus, PipelineError>
    where
        F: FnOnce(&Path) -> Result<Vec<PathBuf>, PipelineError>,
    {
        let mut hasher = Sha256::new();
        hasher.update(stage.as_bytes());
        hasher.update(params.to_string().as_bytes());
        for input in inputs {
            let path = match input {
                Input::Raw(p) => {
                    if !p.is_file() {
                        return Err(PipelineError::Io {
                            path: p.clone(),
                            source: io::Error::new(io::ErrorKind::NotFound, "input file not found"),
                        });
                    }
                    p
                }
                Input::Artifact { path, stage: needs } => {
                    if !path.is_file() {
                        return Err(PipelineError::Prerequisite {
                            stage: stage.to_string(),
                            needs: needs.clone(),
                            missing: path.clone(),
                        });
                    }
                    path
                }
            };
            hasher.update(file_hash(path)?.as_bytes());
        }
        let input_hash = hex::encode(hasher.finalize());
        let manifest_path = dir.join("manifest.json");
        if let Ok(previous) = read_json::<Manifest>(&manifest_path) {
            if previous.input_hash == input_hash && self.outputs_intact(&previous)? {
                return Ok(StageStatus::UpToDate);
            }
        }
        if dir.exists() {
            fs::remove_dir_all(dir).map_err(PipelineError::io(dir))?;
        }
        fs::create_dir_all(dir).map_err(PipelineError::io(dir))?;
        let outputs = body(dir)?;
        let mut manifest = Manifest {
            stage: stage.to_string(),
            input_hash,
            outputs: BTreeMap::new(),
        };
        for path in outputs {
            let rel = path
                .strip_prefix(&self.config.output_dir)
                .map_err(|_| PipelineError::Invariant(format!("{} is outside the output dir", path.display())))?;
            let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            manifest.outputs.insert(key, file_hash(&path)?);
        }
        write_json(&manifest_path, &manifest)?;
        Ok(StageStatus::Ran)
    }

    fn outputs_intact(&self, manifest: &Manifest) -> Result<bool, PipelineError> {
        for (rel, hash) in &manifest.outputs {
            let path = self.config.output_dir.join(rel);
            if !path.is_file() || &file_hash(&path)? != hash {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn ingest_summary(&self) -> Result<IngestSummary, PipelineError> {
        read_json(&self.ingest_dir().join("summary.json"))
    }

    /// Parses the corpus, applies the window and frequency filter, and keeps
    /// tweets carrying a retained hashtag.
    pub fn ingest(&self) -> Result<StageStatus, PipelineError> {
        self.prepare(Needs {
            tweets: true,
            ..Needs::default()
        })?;
        let c = &self.config;
        let tweets_path = c.tweets.clone().expect("validated");
        let params = json!({
            "window_start": c.window_start, "window_end": c.window_end,
            "slot_width_hours": c.slot_width_hours, "min_count": c.min_count, "max_count": c.max_count,
        });
        let dir = self.ingest_dir();
        self.run_stage("ingest", &dir, &[Input::Raw(tweets_path.clone())], params, |dir| {
            let in_window = |t: DateTime<Utc>| {
                c.window_start.is_none_or(|s| t >= s) && c.window_end.is_none_or(|e| t < e)
            };
            let open = || open_input(&tweets_path).map_err(PipelineError::io(&tweets_path));

            let mut reader = parse_tweet_stream(open()?);
            let mut counts: BTreeMap<HashtagId, u64> = BTreeMap::new();
            let (mut out_of_window, mut earliest, mut latest) = (0u64, None, None);
            for tweet in reader.by_ref() {
                let tweet = tweet.map_err(PipelineError::corpus(&tweets_path))?;
                if !in_window(tweet.timestamp) {
                    out_of_window += 1;
                    continue;
                }
                for h in tweet.hashtags {
                    *counts.entry(h).or_insert(0) += 1;
                }
                let ts = tweet.timestamp;
                earliest = Some(earliest.map_or(ts, |e: DateTime<Utc>| e.min(ts)));
                latest = Some(latest.map_or(ts, |l: DateTime<Utc>| l.max(ts)));
            }
            let stats = reader.stats();
            let bounds = FilterBounds {
                min_count: c.min_count,
                max_count: c.max_count,
            };
            let retained = filter_hashtags(&counts, bounds).map_err(PipelineError::corpus(&tweets_path))?;

            let width = Duration::hours(c.slot_width_hours.into());
            let epoch = c.window_start.or(earliest.map(midnight_utc));
            let slot_count = match (epoch, c.window_end, latest) {
                (Some(e), Some(end), _) => {
                    let span = (end - e).num_milliseconds();
                    let w = width.num_milliseconds();
                    ((span + w - 1) / w) as usize
                }
                (Some(e), None, Some(last)) => {
                    let slotting = Slotting::new(e, width).map_err(PipelineError::corpus(&tweets_path))?;
                    slotting.assign(last).map_err(PipelineError::corpus(&tweets_path))?.index() + 1
                }
                _ => 0,
            };

            let kept_path = dir.join("retained_tweets.txt");
            let mut out = create(&kept_path)?;
            let mut users = HashSet::new();
            let mut retained_tweets = 0u64;
            for tweet in parse_tweet_stream(open()?) {
                let tweet = tweet.map_err(PipelineError::corpus(&tweets_path))?;
                if in_window(tweet.timestamp) && tweet.hashtags.iter().any(|h| retained.contains(h)) {
                    write_tweet(&mut out, &tweet).map_err(PipelineError::io(&kept_path))?;
                    retained_tweets += 1;
                    users.insert(tweet.author);
                }
            }
            finish(out, &kept_path)?;

            let tags_path = dir.join("retained_hashtags.csv");
            let mut w = csv::Writer::from_writer(create(&tags_path)?);
            w.write_record(["hashtag", "count"]).map_err(PipelineError::csv(&tags_path))?;
            for h in &retained {
                w.write_record([h.as_str(), &counts[h].to_string()])
                    .map_err(PipelineError::csv(&tags_path))?;
            }
            w.flush().map_err(PipelineError::io(&tags_path))?;

            let summary = IngestSummary {
                corpus: CorpusSummary::new(
                    stats.parsed - out_of_window,
                    stats.malformed_skipped,
                    retained.len() as u64,
                    retained_tweets,
                    users.len() as u64,
                ),
                out_of_window,
                distinct_hashtags: counts.len() as u64,
                epoch_start: epoch,
                slot_width_hours: c.slot_width_hours,
                slot_count,
            };
            let summary_path = dir.join("summary.json");
            write_json(&summary_path, &summary)?;
            Ok(vec![kept_path, tags_path, summary_path])
        })
    }

    /// Builds one document per retained hashtag and averages lexicon vectors.
    pub fn embed(&self) -> Result<StageStatus, PipelineError> {
        self.prepare(Needs {
            lexicon: true,
            ..Needs::default()
        })?;
        let c = &self.config;
        let lexicon_path = c.lexicon.clone().expect("validated");
        let ingest = self.ingest_dir();
        let inputs = [
            self.artifact(ingest.join("retained_tweets.txt"), "ingest"),
            self.artifact(ingest.join("retained_hashtags.csv"), "ingest"),
            Input::Raw(lexicon_path.clone()),
        ];
        let params = json!({ "lexicon_dimension": c.lexicon_dimension, "divisor": c.divisor });
        self.run_stage("embed", &self.embed_dir(), &inputs, params, |dir| {
            let tweets = read_tweet_artifact(&ingest.join("retained_tweets.txt"))?;
            let retained = read_hashtag_set(&ingest.join("retained_hashtags.csv"))?;
            let docs = build_documents(&retained, &tweets);
            let vocabulary: HashSet<String> = docs.values().flat_map(|d| d.tokens.iter().cloned()).collect();
            let source = open_input(&lexicon_path).map_err(PipelineError::io(&lexicon_path))?;
            let (lexicon, lexicon_stats) =
                load_lexicon_filtered(source, c.lexicon_dimension, Some(&vocabulary)).map_err(|e| match e {
                    EmbeddingError::Io(source) => PipelineError::Io {
                        path: lexicon_path.clone(),
                        source,
                    },
                    other => PipelineError::Config(vec![format!("{}: {other}", lexicon_path.display())]),
                })?;
            let set = embed_all(&docs, &lexicon, c.divisor);

            let emb_path = dir.join("embeddings.tsv");
            let mut out = create(&emb_path)?;
            write_embeddings(&mut out, set.embeddings.values()).map_err(PipelineError::io(&emb_path))?;
            finish(out, &emb_path)?;

            let excl_path = dir.join("excluded.csv");
            let mut w = csv::Writer::from_writer(create(&excl_path)?);
            w.write_record(["hashtag", "reason"]).map_err(PipelineError::csv(&excl_path))?;
            let mut reasons: BTreeMap<&str, usize> = BTreeMap::new();
            for (h, reason) in &set.excluded {
                w.write_record([h.as_str(), reason.as_str()]).map_err(PipelineError::csv(&excl_path))?;
                *reasons.entry(reason.as_str()).or_insert(0) += 1;
            }
            w.flush().map_err(PipelineError::io(&excl_path))?;

            let summary_path = dir.join("summary.json");
            write_json(
                &summary_path,
                &json!({
                    "documents": docs.len(),
                    "embedded": set.embeddings.len(),
                    "excluded": reasons,
                    "lexicon": lexicon_stats,
                    "divisor": c.divisor,
                }),
            )?;
            Ok(vec![emb_path, excl_path, summary_path])
        })
    }

    /// Spherical k-means for every configured k.
    pub fn cluster(&self) -> Result<StageStatus, PipelineError> {
        self.prepare(Needs::default())?;
        let c = &self.config;
        let emb_path = self.embed_dir().join("embeddings.tsv");
        let inputs = [self.artifact(emb_path.clone(), "embed")];
        let params = json!({
            "k_values": c.k_values, "seed": c.kmeans_seed,
            "max_iterations": c.kmeans_max_iterations, "restarts": c.kmeans_restarts,
        });
        self.run_stage("cluster", &self.cluster_dir(), &inputs, params, |dir| {
            let file = BufReader::new(File::open(&emb_path).map_err(PipelineError::io(&emb_path))?);
            let embeddings = read_embeddings(file).map_err(|e| match e {
                EmbeddingError::Io(source) => PipelineError::Io {
                    path: emb_path.clone(),
                    source,
                },
                other => PipelineError::Invariant(format!("corrupt artifact {}: {other}", emb_path.display())),
            })?;
            let mut k_values = c.k_values.clone();
            k_values.sort_unstable();
            k_values.dedup();
            let mut clusterings = Vec::new();
            let mut per_k = BTreeMap::new();
            let mut infeasible = Vec::new();
            if !embeddings.is_empty() {
                let base = KMeansConfig {
                    max_iterations: c.kmeans_max_iterations,
                    ..KMeansConfig::new(1, c.kmeans_seed)
                };
                for (k, result) in sweep_k_with(&embeddings, &k_values, &base, c.kmeans_restarts) {
                    match result {
                        Ok(run) => {
                            per_k.insert(
                                k.to_string(),
                                json!({
                                    "objective": run.objective(),
                                    "iterations": run.iterations,
                                    "converged": run.converged,
                                    "objective_trace": run.objective_trace,
                                }),
                            );
                            clusterings.push(run);
                        }
                        Err(e @ ClusteringError::TooFewPoints { .. }) => infeasible.push(format!("k = {k}: {e}")),
                        Err(e) => return Err(PipelineError::Invariant(format!("k = {k}: {e}"))),
                    }
                }
            }
            if !infeasible.is_empty() {
                return Err(PipelineError::Config(infeasible));
            }
            let csv_path = dir.join("clusters.csv");
            let refs: Vec<_> = clusterings.iter().collect();
            write_clusters_csv(create(&csv_path)?, &refs).map_err(PipelineError::io(&csv_path))?;
            let summary_path = dir.join("summary.json");
            write_json(
                &summary_path,
                &json!({ "points": embeddings.len(), "k_values": k_values, "runs": per_k }),
            )?;
            Ok(vec![csv_path, summary_path])
        })
    }

    fn check_k(&self, k: usize) -> Result<(), PipelineError> {
        if self.config.k_values.contains(&k) {
            Ok(())
        } else {
            Err(PipelineError::Config(vec![format!(
                "k = {k} is not among k_values {:?}",
                self.config.k_values
            )]))
        }
    }

    /// Splits each semantic cluster of the k-run into temporally connected topics.
    pub fn split(&self, k: usize) -> Result<StageStatus, PipelineError> {
        self.prepare(Needs::default())?;
        self.check_k(k)?;
        let c = &self.config;
        let cluster_dir = self.cluster_dir();
        let ingest = self.ingest_dir();
        let inputs = [
            self.artifact(cluster_dir.join("clusters.csv"), "cluster"),
            self.artifact(cluster_dir.join("summary.json"), "cluster"),
            self.artifact(ingest.join("retained_tweets.txt"), "ingest"),
            self.artifact(ingest.join("summary.json"), "ingest"),
        ];
        let params = json!({ "k": k, "gap_threshold_slots": c.gap_threshold_slots });
        let stage = format!("split --k {k}");
        self.run_stage(&stage, &self.split_dir(k), &inputs, params, |dir| {
            #[derive(Deserialize)]
            struct ClusterSummary {
                k_values: Vec<usize>,
            }
            let cluster_summary: ClusterSummary = read_json(&cluster_dir.join("summary.json"))?;
            if !cluster_summary.k_values.contains(&k) {
                return Err(PipelineError::Prerequisite {
                    stage: stage.clone(),
                    needs: "cluster".to_string(),
                    missing: cluster_dir.join("clusters.csv"),
                });
            }
            let clusters_path = cluster_dir.join("clusters.csv");
            let file = File::open(&clusters_path).map_err(PipelineError::io(&clusters_path))?;
            let clusters = read_clusters_csv(file)
                .map_err(PipelineError::csv(&clusters_path))?
                .remove(&k)
                .unwrap_or_default();
            let summary = self.ingest_summary()?;
            let tweets = read_tweet_artifact(&ingest.join("retained_tweets.txt"))?;
            let members: BTreeSet<HashtagId> = clusters.iter().flat_map(|c| c.members.iter().cloned()).collect();
            let series = match summary.slotting() {
                Some(slotting) => build_all_usage_series(&members, &tweets, &slotting, summary.slot_count),
                None => BTreeMap::new(),
            };
            let topics = split_all(&clusters, k, &series, c.gap_threshold_slots)
                .map_err(|e| PipelineError::Invariant(e.to_string()))?;

            let topics_path = dir.join("topics.csv");
            write_topics_csv(create(&topics_path)?, &topics, &series).map_err(PipelineError::io(&topics_path))?;
            let split_clusters = clusters
                .iter()
                .filter(|s| topics.iter().filter(|t| t.source_semantic_cluster == s.cluster_id).count() > 1)
                .count();
            let summary_path = dir.join("summary.json");
            write_json(
                &summary_path,
                &json!({
                    "k": k,
                    "semantic_clusters": clusters.len(),
                    "topics": topics.len(),
                    "clusters_split": split_clusters,
                    "gap_threshold_slots": c.gap_threshold_slots,
                }),
            )?;
            Ok(vec![topics_path, summary_path])
        })
    }

    /// Louvain over the follower graph induced on retained users.
    pub fn communities(&self) -> Result<StageStatus, PipelineError> {
        self.prepare(Needs {
            edges: true,
            ..Needs::default()
        })?;
        let c = &self.config;
        let edges_path = c.edges.clone().expect("validated");
        let ingest = self.ingest_dir();
        let inputs = [
            self.artifact(ingest.join("retained_tweets.txt"), "ingest"),
            Input::Raw(edges_path.clone()),
        ];
        let params = json!({
            "seed": c.community_seed,
            "restarts": c.community_restarts,
            "min_community_size": c.min_community_size,
        });
        self.run_stage("communities", &self.communities_dir(), &inputs, params, |dir| {
            let tweets = read_tweet_artifact(&ingest.join("retained_tweets.txt"))?;
            let users: BTreeSet<String> = tweets.into_iter().map(|t| t.author).collect();
            let source = open_input(&edges_path).map_err(PipelineError::io(&edges_path))?;
            let (graph, edge_stats) = load_social_graph(source, &users).map_err(PipelineError::corpus(&edges_path))?;
            let config = LouvainConfig {
                seed: c.community_seed,
                restarts: c.community_restarts,
                ..LouvainConfig::default()
            };
            let (partition, modularity, levels) = match louvain(&graph, &config) {
                Ok(o) => (o.partition, o.modularity, o.level_modularity),
                Err(CommunityError::EmptyGraph) => (Partition::singletons(&graph), None, Vec::new()),
                Err(e) => return Err(PipelineError::Invariant(e.to_string())),
            };
            let csv_path = dir.join("partition.csv");
            write_partition_csv(create(&csv_path)?, &partition).map_err(PipelineError::io(&csv_path))?;
            let summary_path = dir.join("summary.json");
            write_json(
                &summary_path,
                &json!({
                    "nodes": graph.node_count(),
                    "edges": graph.edge_count(),
                    "edge_lines": edge_stats,
                    "summary": CommunitySummary::new(&partition, modularity),
                    "level_modularity": levels,
                    "min_community_size": c.min_community_size,
                    "reported_communities": partition.reported(c.min_community_size),
                }),
            )?;
            Ok(vec![csv_path, summary_path])
        })
    }

    fn read_partition(&self) -> Result<Partition, PipelineError> {
        let path = self.communities_dir().join("partition.csv");
        let file = File::open(&path).map_err(PipelineError::io(&path))?;
        read_partition_csv(file).map_err(|e| PipelineError::Invariant(format!("{}: {e}", path.display())))
    }

    fn read_topics(&self, k: usize) -> Result<Vec<TopicCluster>, PipelineError> {
        let path = self.split_dir(k).join("topics.csv");
        let file = File::open(&path).map_err(PipelineError::io(&path))?;
        read_topics_csv(file).map_err(PipelineError::csv(&path))
    }

    /// Per-scope hashtag and topic usage series.
    pub fn timelines(&self, k: usize) -> Result<StageStatus, PipelineError> {
        self.prepare(Needs::default())?;
        self.check_k(k)?;
        let c = &self.config;
        let ingest = self.ingest_dir();
        let split_stage = format!("split --k {k}");
        let inputs = [
            self.artifact(ingest.join("retained_tweets.txt"), "ingest"),
            self.artifact(ingest.join("retained_hashtags.csv"), "ingest"),
            self.artifact(ingest.join("summary.json"), "ingest"),
            self.artifact(self.split_dir(k).join("topics.csv"), &split_stage),
            self.artifact(self.communities_dir().join("partition.csv"), "communities"),
        ];
        let params = json!({ "k": k, "min_community_size": c.min_community_size });
        self.run_stage(&format!("timelines --k {k}"), &self.timelines_dir(k), &inputs, params, |dir| {
            let summary = self.ingest_summary()?;
            let topics = self.read_topics(k)?;
            let partition = self.read_partition()?;
            let retained = read_hashtag_set(&ingest.join("retained_hashtags.csv"))?;
            let timeline = match summary.slotting() {
                Some(slotting) => {
                    let tweets = read_tweet_artifact(&ingest.join("retained_tweets.txt"))?;
                    let spec = TimelineSpec {
                        slotting,
                        slot_count: summary.slot_count,
                        partition: &partition,
                        min_community_size: c.min_community_size,
                        topics: &topics,
                        hashtags: &retained,
                    };
                    build_hashtag_timeline(&tweets, &spec)
                }
                None => HashtagTimeline::empty(0, [], &topics),
            };
            let hashtag_path = dir.join("hashtag_timeline.csv");
            write_hashtag_timeline_csv(create(&hashtag_path)?, &timeline).map_err(PipelineError::io(&hashtag_path))?;
            let topic_path = dir.join("topic_timeline.csv");
            write_topic_timeline_csv(create(&topic_path)?, &timeline).map_err(PipelineError::io(&topic_path))?;
            Ok(vec![hashtag_path, topic_path])
        })
    }

    /// Lifecycle report, morph/death events and optional SVG plots.
    pub fn report(&self, k: usize) -> Result<StageStatus, PipelineError> {
        self.prepare(Needs::default())?;
        self.check_k(k)?;
        let c = &self.config;
        let split_stage = format!("split --k {k}");
        let timelines_stage = format!("timelines --k {k}");
        let inputs = [
            self.artifact(self.timelines_dir(k).join("hashtag_timeline.csv"), &timelines_stage),
            self.artifact(self.split_dir(k).join("topics.csv"), &split_stage),
            self.artifact(self.communities_dir().join("partition.csv"), "communities"),
            self.artifact(self.ingest_dir().join("summary.json"), "ingest"),
        ];
        let params = json!({
            "k": k, "min_community_size": c.min_community_size,
            "morph_across_gaps": c.morph_across_gaps, "emit_svg": c.emit_svg,
        });
        self.run_stage(&format!("report --k {k}"), &self.report_dir(k), &inputs, params, |dir| {
            let summary = self.ingest_summary()?;
            let topics = self.read_topics(k)?;
            let partition = self.read_partition()?;
            let timeline_path = self.timelines_dir(k).join("hashtag_timeline.csv");
            let file = File::open(&timeline_path).map_err(PipelineError::io(&timeline_path))?;
            let records = read_hashtag_timeline_csv(file)
                .map_err(|e| PipelineError::Invariant(format!("{}: {e}", timeline_path.display())))?;
            let scopes = partition.reported(c.min_community_size).into_iter().map(Scope::Community);
            let timeline = HashtagTimeline::from_records(summary.slot_count, scopes, &topics, records);
            let report = lifecycle_report(&timeline, c.morph_across_gaps);

            let report_path = dir.join("lifecycle_report.json");
            write_json(&report_path, &report)?;
            let events_path = dir.join("events.json");
            let events = report.events_json().map_err(|e| PipelineError::Invariant(e.to_string()))?;
            fs::write(&events_path, events + "\n").map_err(PipelineError::io(&events_path))?;
            let mut outputs = vec![report_path, events_path];
            if c.emit_svg {
                let svg_dir = dir.join("svg");
                fs::create_dir_all(&svg_dir).map_err(PipelineError::io(&svg_dir))?;
                for topic in &report.topics {
                    for scope in &topic.scopes {
                        let svg = render_svg(&timeline, &topic.topic_id, scope.scope)
                            .map_err(|e| PipelineError::Invariant(e.to_string()))?;
                        let path = svg_dir.join(format!("{}_{}.svg", topic.topic_id, scope.scope));
                        fs::write(&path, svg).map_err(PipelineError::io(&path))?;
                        outputs.push(path);
                    }
                }
            }
            Ok(outputs)
        })
    }

    /// Every stage in order. Without `k`, the per-k stages run for every
    /// configured k.
    pub fn all(&self, k: Option<usize>) -> Result<Vec<(String, StageStatus)>, PipelineError> {
        self.prepare(Needs {
            tweets: true,
            edges: true,
            lexicon: true,
        })?;
        if let Some(k) = k {
            self.check_k(k)?;
        }
        let mut log = vec![
            ("ingest".to_string(), self.ingest()?),
            ("embed".to_string(), self.embed()?),
            ("cluster".to_string(), self.cluster()?),
            ("communities".to_string(), self.communities()?),
        ];
        let mut ks: Vec<usize> = k.map_or_else(|| self.config.k_values.clone(), |k| vec![k]);
        ks.sort_unstable();
        ks.dedup();
        for k in ks {
            log.push((format!("split --k {k}"), self.split(k)?));
            log.push((format!("timelines --k {k}"), self.timelines(k)?));
            log.push((format!("report --k {k}"), self.report(k)?));
        }
        Ok(log)
    }
}

/// Generates a synthetic corpus into `dir` along with a `pipeline.toml`
/// that runs the full pipeline on it. Returns the config path.
pub fn write_synthetic(spec: &SynthSpec, dir: &Path) -> Result<PathBuf, PipelineError> {
    let corpus = generate(spec).map_err(synth_error)?;
    corpus.write_to(dir).map_err(synth_error)?;
    let path = dir.join("pipeline.toml");
    fs::write(&path, PipelineConfig::for_synthetic(spec).to_toml()).map_err(PipelineError::io(&path))?;
    Ok(path)
}

fn synth_error(e: SynthError) -> PipelineError {
    match e {
        SynthError::Invalid(errs) => PipelineError::Config(errs),
        SynthError::Io(source) => PipelineError::Io {
            path: PathBuf::from("<synthetic corpus>"),
            source,
        },
    }
}
