//! Synthetic corpora with planted communities, topics and per-community
//! hashtag schedules, plus the ground truth they were built from.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::write_tweet;
use crate::corpus::{HashtagId, Tweet};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySpec {
    pub size: usize,
    pub intra_edge_prob: f64,
    pub inter_edge_prob: f64,
}

/// `hashtag` is the scheduled dominant for slots `start..end`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub hashtag: String,
    pub start: u32,
    pub end: u32,
}

impl Segment {
    pub fn new(hashtag: &str, start: u32, end: u32) -> Self {
        Segment {
            hashtag: hashtag.to_string(),
            start,
            end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSpec {
    pub members: Vec<String>,
    pub vocabulary: Vec<String>,
    /// Slots `window_start..window_end` in which the topic may be used.
    pub window_start: u32,
    pub window_end: u32,
    /// One segment list per community. An empty list means the community
    /// never uses the topic.
    pub schedule: Vec<Vec<Segment>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    pub communities: Vec<CommunitySpec>,
    pub topics: Vec<TopicSpec>,
    pub tweets_per_user_per_slot: f64,
    pub slot_count: u32,
    /// Probability that a tweet carries its community's scheduled hashtag
    /// rather than another topic member.
    pub dominant_prob: f64,
    pub words_per_tweet: usize,
    /// Out-of-lexicon filler tokens appended to each tweet.
    pub filler_per_tweet: usize,
    pub lexicon_dimension: usize,
    pub lexicon_noise: f64,
    pub start: DateTime<Utc>,
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|w| w.to_string()).collect()
}

fn two_communities(size: usize) -> Vec<CommunitySpec> {
    vec![
        CommunitySpec {
            size,
            intra_edge_prob: 0.4,
            inter_edge_prob: 0.02,
        };
        2
    ]
}

fn tennis_vocabulary() -> Vec<String> {
    words(&["tennis", "wimbledon", "grass", "serve", "champion", "slam", "court", "final"])
}

fn music_vocabulary() -> Vec<String> {
    words(&["music", "thriller", "pop", "king", "singer", "album", "dance", "legend"])
}

impl Default for SynthSpec {
    /// Two communities of 30 users, three topics, ten daily slots.
    ///
    /// * federer/rogerfederer: community 0 switches at slot 2, community 1 at slot 4.
    /// * mj/michaeljackson: community 0 uses mj throughout; community 1 uses
    ///   michaeljackson and drops the topic at slot 6.
    /// * iranelection/iran: only community 0, switching at slot 6.
    fn default() -> Self {
        SynthSpec {
            seed: 7,
            communities: two_communities(30),
            topics: vec![
                TopicSpec {
                    members: words(&["federer", "rogerfederer"]),
                    vocabulary: tennis_vocabulary(),
                    window_start: 0,
                    window_end: 10,
                    schedule: vec![
                        vec![Segment::new("federer", 0, 2), Segment::new("rogerfederer", 2, 10)],
                        vec![Segment::new("federer", 0, 4), Segment::new("rogerfederer", 4, 10)],
                    ],
                },
                TopicSpec {
                    members: words(&["mj", "michaeljackson"]),
                    vocabulary: music_vocabulary(),
                    window_start: 0,
                    window_end: 10,
                    schedule: vec![
                        vec![Segment::new("mj", 0, 10)],
                        vec![Segment::new("michaeljackson", 0, 6)],
                    ],
                },
                TopicSpec {
                    members: words(&["iranelection", "iran"]),
                    vocabulary: words(&["protest", "vote", "tehran", "ballot", "mousavi", "crowd", "regime", "street"]),
                    window_start: 0,
                    window_end: 10,
                    schedule: vec![
                        vec![Segment::new("iranelection", 0, 6), Segment::new("iran", 6, 10)],
                        vec![],
                    ],
                },
            ],
            tweets_per_user_per_slot: 4.0,
            slot_count: 10,
            dominant_prob: 0.8,
            words_per_tweet: 6,
            filler_per_tweet: 2,
            lexicon_dimension: 25,
            lexicon_noise: 0.1,
            start: Utc.with_ymd_and_hms(2009, 6, 11, 0, 0, 0).unwrap(),
        }
    }
}

impl SynthSpec {
    /// Seven slots, two topics; the federer switch happens at slot 2 in
    /// community 0 and at slot 4 in community 1.
    pub fn federer_example() -> Self {
        SynthSpec {
            topics: vec![
                TopicSpec {
                    members: words(&["federer", "rogerfederer"]),
                    vocabulary: tennis_vocabulary(),
                    window_start: 0,
                    window_end: 7,
                    schedule: vec![
                        vec![Segment::new("federer", 0, 2), Segment::new("rogerfederer", 2, 7)],
                        vec![Segment::new("federer", 0, 4), Segment::new("rogerfederer", 4, 7)],
                    ],
                },
                TopicSpec {
                    members: words(&["mj", "michaeljackson"]),
                    vocabulary: music_vocabulary(),
                    window_start: 0,
                    window_end: 7,
                    schedule: vec![vec![Segment::new("mj", 0, 7)], vec![Segment::new("mj", 0, 7)]],
                },
            ],
            slot_count: 7,
            ..SynthSpec::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Every violation, not only the first.
    pub fn validate(&self) -> Result<(), SynthError> {
        let mut errs = Vec::new();
        if self.communities.is_empty() {
            errs.push("at least one community is required".to_string());
        }
        for (c, cs) in self.communities.iter().enumerate() {
            if cs.size == 0 {
                errs.push(format!("community {c}: size must be positive"));
            }
            for (name, p) in [("intra_edge_prob", cs.intra_edge_prob), ("inter_edge_prob", cs.inter_edge_prob)] {
                if !(0.0..=1.0).contains(&p) {
                    errs.push(format!("community {c}: {name} {p} is outside [0, 1]"));
                }
            }
            if cs.intra_edge_prob <= cs.inter_edge_prob {
                errs.push(format!(
                    "community {c}: intra_edge_prob {} must exceed inter_edge_prob {}",
                    cs.intra_edge_prob, cs.inter_edge_prob
                ));
            }
        }
        if self.slot_count == 0 {
            errs.push("slot_count must be positive".to_string());
        }
        if !(self.tweets_per_user_per_slot.is_finite() && self.tweets_per_user_per_slot > 0.0) {
            errs.push("tweets_per_user_per_slot must be positive".to_string());
        }
        if !(0.0..=1.0).contains(&self.dominant_prob) {
            errs.push("dominant_prob must lie in [0, 1]".to_string());
        }
        if self.words_per_tweet == 0 {
            errs.push("words_per_tweet must be positive".to_string());
        }
        if self.lexicon_dimension == 0 {
            errs.push("lexicon_dimension must be positive".to_string());
        }
        if !(self.lexicon_noise.is_finite() && self.lexicon_noise >= 0.0) {
            errs.push("lexicon_noise must be non-negative".to_string());
        }
        for (t, topic) in self.topics.iter().enumerate() {
            self.validate_topic(t, topic, &mut errs);
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(SynthError::Invalid(errs))
        }
    }

    fn validate_topic(&self, t: usize, topic: &TopicSpec, errs: &mut Vec<String>) {
        if topic.members.is_empty() {
            errs.push(format!("topic {t}: no member hashtags"));
        }
        for m in &topic.members {
            if HashtagId::new(m.as_str()).is_none() {
                errs.push(format!("topic {t}: {m:?} is not a valid hashtag"));
            }
        }
        if topic.vocabulary.is_empty() {
            errs.push(format!("topic {t}: empty vocabulary"));
        }
        for w in &topic.vocabulary {
            if w.is_empty() || !w.chars().all(|c| c.is_alphanumeric()) || w.chars().any(char::is_uppercase) {
                errs.push(format!("topic {t}: vocabulary word {w:?} must be lowercase alphanumeric"));
            }
        }
        if topic.window_start >= topic.window_end || topic.window_end > self.slot_count {
            errs.push(format!(
                "topic {t}: window {}..{} is empty or exceeds slot_count {}",
                topic.window_start, topic.window_end, self.slot_count
            ));
        }
        if topic.schedule.len() != self.communities.len() {
            errs.push(format!(
                "topic {t}: schedule has {} community entries, expected {}",
                topic.schedule.len(),
                self.communities.len()
            ));
        }
        for (c, segments) in topic.schedule.iter().enumerate() {
            let mut last_end = 0;
            for seg in segments {
                if !topic.members.contains(&seg.hashtag) {
                    errs.push(format!("topic {t}, community {c}: scheduled #{} is not a member", seg.hashtag));
                }
                if seg.start >= seg.end || seg.start < topic.window_start || seg.end > topic.window_end {
                    errs.push(format!(
                        "topic {t}, community {c}: #{} scheduled at {}..{} outside window {}..{}",
                        seg.hashtag, seg.start, seg.end, topic.window_start, topic.window_end
                    ));
                }
                if seg.start < last_end {
                    errs.push(format!("topic {t}, community {c}: segments overlap or are out of order"));
                }
                last_end = last_end.max(seg.end);
            }
        }
    }

    /// Scheduled dominant hashtag per slot for one community.
    pub fn schedule_of(&self, topic: usize, community: usize) -> Vec<Option<&str>> {
        let mut out = vec![None; self.slot_count as usize];
        if let Some(segments) = self.topics[topic].schedule.get(community) {
            for seg in segments {
                for s in seg.start..seg.end.min(self.slot_count) {
                    out[s as usize] = Some(seg.hashtag.as_str());
                }
            }
        }
        out
    }

    pub fn user_name(community: usize, index: usize) -> String {
        format!("c{community}u{index:03}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrueMorph {
    pub community: usize,
    pub topic: usize,
    pub slot_from: u32,
    pub slot_to: u32,
    pub from: HashtagId,
    pub to: HashtagId,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrueDeath {
    pub community: usize,
    pub topic: usize,
    pub death_slot: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrueSilence {
    pub community: usize,
    pub topic: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub true_partition: BTreeMap<String, usize>,
    pub true_topics: BTreeMap<HashtagId, usize>,
    pub true_morphs: Vec<TrueMorph>,
    pub true_deaths: Vec<TrueDeath>,
    /// (community, topic) pairs with no scheduled usage at all.
    pub never_active: Vec<TrueSilence>,
}

impl GroundTruth {
    /// Derived from the schedule alone. Morphs compare adjacent scheduled
    /// slots; an unscheduled slot breaks the chain.
    pub fn from_spec(spec: &SynthSpec) -> Self {
        let mut truth = GroundTruth {
            true_partition: BTreeMap::new(),
            true_topics: BTreeMap::new(),
            true_morphs: Vec::new(),
            true_deaths: Vec::new(),
            never_active: Vec::new(),
        };
        for (c, cs) in spec.communities.iter().enumerate() {
            for i in 0..cs.size {
                truth.true_partition.insert(SynthSpec::user_name(c, i), c);
            }
        }
        for (t, topic) in spec.topics.iter().enumerate() {
            for m in &topic.members {
                truth.true_topics.insert(HashtagId::new(m.as_str()).expect("validated"), t);
            }
            for c in 0..spec.communities.len() {
                let schedule = spec.schedule_of(t, c);
                let mut prev: Option<(usize, &str)> = None;
                for (s, d) in schedule.iter().enumerate() {
                    match (prev, d) {
                        (Some((ps, p)), Some(h)) if p != *h => truth.true_morphs.push(TrueMorph {
                            community: c,
                            topic: t,
                            slot_from: ps as u32,
                            slot_to: s as u32,
                            from: HashtagId::new(p).expect("validated"),
                            to: HashtagId::new(*h).expect("validated"),
                        }),
                        _ => {}
                    }
                    prev = d.map(|h| (s, h));
                }
                match schedule.iter().rposition(Option::is_some) {
                    None => truth.never_active.push(TrueSilence { community: c, topic: t }),
                    Some(last) if last + 1 < schedule.len() => truth.true_deaths.push(TrueDeath {
                        community: c,
                        topic: t,
                        death_slot: last as u32 + 1,
                    }),
                    Some(_) => {}
                }
            }
        }
        truth
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub tweets: Vec<Tweet>,
    /// `(user, follower)` pairs.
    pub edges: Vec<(String, String)>,
    pub lexicon: Vec<(String, Vec<f32>)>,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthPaths {
    pub tweets: PathBuf,
    pub edges: PathBuf,
    pub lexicon: PathBuf,
    pub ground_truth: PathBuf,
}

impl SynthPaths {
    pub fn in_dir(dir: &Path) -> Self {
        SynthPaths {
            tweets: dir.join("tweets.txt"),
            edges: dir.join("edges.txt"),
            lexicon: dir.join("lexicon.txt"),
            ground_truth: dir.join("ground_truth.json"),
        }
    }
}

pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let users: Vec<(usize, String)> = spec
        .communities
        .iter()
        .enumerate()
        .flat_map(|(c, cs)| (0..cs.size).map(move |i| (c, SynthSpec::user_name(c, i))))
        .collect();

    let mut edges = Vec::new();
    for (i, (ci, ui)) in users.iter().enumerate() {
        for (cj, uj) in &users[i + 1..] {
            let p = if ci == cj {
                spec.communities[*ci].intra_edge_prob
            } else {
                (spec.communities[*ci].inter_edge_prob + spec.communities[*cj].inter_edge_prob) / 2.0
            };
            if rng.random_bool(p) {
                edges.push((ui.clone(), uj.clone()));
            }
        }
    }

    let lexicon = synth_lexicon(spec, &mut rng);

    let poisson = Poisson::new(spec.tweets_per_user_per_slot).expect("validated rate");
    let schedules: Vec<Vec<Vec<Option<&str>>>> = (0..spec.topics.len())
        .map(|t| (0..spec.communities.len()).map(|c| spec.schedule_of(t, c)).collect())
        .collect();
    let mut tweets = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for slot in 0..spec.slot_count as usize {
        let slot_start = spec.start + Duration::days(slot as i64);
        for (c, user) in &users {
            let active: Vec<usize> = (0..spec.topics.len())
                .filter(|&t| schedules[t][*c][slot].is_some())
                .collect();
            let n = poisson.sample(&mut rng) as usize;
            if active.is_empty() {
                continue;
            }
            for _ in 0..n {
                let t = active[rng.random_range(0..active.len())];
                let topic = &spec.topics[t];
                let scheduled = schedules[t][*c][slot].expect("active topic");
                let others: Vec<&String> = topic.members.iter().filter(|m| m.as_str() != scheduled).collect();
                let tag = if others.is_empty() || rng.random_bool(spec.dominant_prob) {
                    scheduled
                } else {
                    others[rng.random_range(0..others.len())].as_str()
                };
                let mut tokens: Vec<String> = (0..spec.words_per_tweet)
                    .map(|_| topic.vocabulary[rng.random_range(0..topic.vocabulary.len())].clone())
                    .collect();
                let at = rng.random_range(0..=tokens.len());
                tokens.insert(at, format!("#{tag}"));
                for _ in 0..spec.filler_per_tweet {
                    tokens.push(format!("zx{}", rng.random_range(0..1000u32)));
                }
                let ts = slot_start + Duration::seconds(rng.random_range(0..86_400));
                tweets.push(Tweet::new(0, user.clone(), ts, tokens.join(" ")));
            }
        }
    }
    tweets.sort_by(|a, b| (a.timestamp, &a.author, &a.text).cmp(&(b.timestamp, &b.author, &b.text)));
    for (i, t) in tweets.iter_mut().enumerate() {
        t.seq = i as u64;
    }

    Ok(SynthCorpus {
        tweets,
        edges,
        lexicon,
        truth: GroundTruth::from_spec(spec),
    })
}

/// One vector per vocabulary word: its first topic's random unit anchor
/// plus Gaussian noise.
fn synth_lexicon(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<(String, Vec<f32>)> {
    let dim = spec.lexicon_dimension;
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let noise = Normal::new(0.0, spec.lexicon_noise).expect("validated noise");
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for topic in &spec.topics {
        let raw: Vec<f64> = (0..dim).map(|_| unit.sample(rng)).collect();
        let n = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let anchor: Vec<f64> = raw.iter().map(|x| x / n).collect();
        for word in &topic.vocabulary {
            let v: Vec<f32> = anchor.iter().map(|a| (a + noise.sample(rng)) as f32).collect();
            if seen.insert(word.clone()) {
                out.push((word.clone(), v));
            }
        }
    }
    out
}

impl SynthCorpus {
    /// Writes tweets, edges, lexicon and ground truth into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<SynthPaths, SynthError> {
        std::fs::create_dir_all(dir)?;
        let paths = SynthPaths::in_dir(dir);

        let mut w = BufWriter::new(File::create(&paths.tweets)?);
        writeln!(w, "total number:{}", self.tweets.len())?;
        for t in &self.tweets {
            write_tweet(&mut w, t)?;
        }
        w.flush()?;

        let mut w = BufWriter::new(File::create(&paths.edges)?);
        for (u, f) in &self.edges {
            writeln!(w, "{u}\t{f}")?;
        }
        w.flush()?;

        let mut w = BufWriter::new(File::create(&paths.lexicon)?);
        for (word, v) in &self.lexicon {
            write!(w, "{word}")?;
            for x in v {
                write!(w, " {x:.6}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;

        let json = serde_json::to_string_pretty(&self.truth).map_err(io::Error::other)?;
        std::fs::write(&paths.ground_truth, json + "\n")?;
        Ok(paths)
    }
}
