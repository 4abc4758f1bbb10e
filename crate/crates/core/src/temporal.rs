//! Per-hashtag usage series and temporal splitting of semantic clusters.
//!
//! Two hashtags are pairwise related when their active slots overlap or the
//! nearest active slots are at most `gap_threshold_slots` apart. Topic
//! clusters are the connected components of that relation inside a semantic
//! cluster.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::SemanticCluster;
use crate::corpus::{HashtagId, Slotting, Tweet};

pub const DEFAULT_GAP_THRESHOLD_SLOTS: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemporalError {
    #[error("series lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no usage series for {0}")]
    MissingSeries(HashtagId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageSeries {
    pub hashtag: HashtagId,
    /// Incidences per timeslot over the whole analysis window.
    pub counts: Vec<u64>,
}

/// A maximal run of consecutive active slots, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveInterval {
    pub start_slot: u32,
    pub end_slot: u32,
}

impl UsageSeries {
    pub fn new(hashtag: HashtagId, counts: Vec<u64>) -> Self {
        UsageSeries { hashtag, counts }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn is_silent(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn active_slots(&self) -> impl Iterator<Item = u32> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i as u32)
    }

    pub fn first_active(&self) -> Option<u32> {
        self.active_slots().next()
    }

    pub fn last_active(&self) -> Option<u32> {
        self.counts.iter().rposition(|&c| c > 0).map(|i| i as u32)
    }

    pub fn active_intervals(&self) -> Vec<ActiveInterval> {
        let mut out: Vec<ActiveInterval> = Vec::new();
        for s in self.active_slots() {
            match out.last_mut() {
                Some(iv) if iv.end_slot + 1 == s => iv.end_slot = s,
                _ => out.push(ActiveInterval {
                    start_slot: s,
                    end_slot: s,
                }),
            }
        }
        out
    }
}

/// Incidences of `hashtag` per slot. Tweets outside `[0, slot_count)` are
/// ignored.
pub fn build_usage_series<'a, I>(
    hashtag: &HashtagId,
    tweets: I,
    slotting: &Slotting,
    slot_count: usize,
) -> UsageSeries
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let mut counts = vec![0u64; slot_count];
    for tweet in tweets {
        let n = tweet.occurrences(hashtag);
        if n == 0 {
            continue;
        }
        if let Ok(slot) = slotting.assign(tweet.timestamp) {
            if let Some(c) = counts.get_mut(slot.index()) {
                *c += n;
            }
        }
    }
    UsageSeries::new(hashtag.clone(), counts)
}

/// Series for every hashtag in `hashtags` from one pass over the corpus.
pub fn build_all_usage_series<'a, I>(
    hashtags: &BTreeSet<HashtagId>,
    tweets: I,
    slotting: &Slotting,
    slot_count: usize,
) -> BTreeMap<HashtagId, UsageSeries>
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let mut series: BTreeMap<HashtagId, UsageSeries> = hashtags
        .iter()
        .map(|h| (h.clone(), UsageSeries::new(h.clone(), vec![0; slot_count])))
        .collect();
    for tweet in tweets {
        let Ok(slot) = slotting.assign(tweet.timestamp) else {
            continue;
        };
        if slot.index() >= slot_count {
            continue;
        }
        for tag in &tweet.hashtags {
            if let Some(s) = series.get_mut(tag) {
                s.counts[slot.index()] += 1;
            }
        }
    }
    series
}

pub fn pairwise_related(
    a: &UsageSeries,
    b: &UsageSeries,
    gap_threshold_slots: u32,
) -> Result<bool, TemporalError> {
    if a.len() != b.len() {
        return Err(TemporalError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let xs: Vec<u32> = a.active_slots().collect();
    let ys: Vec<u32> = b.active_slots().collect();
    Ok(min_distance(&xs, &ys).is_some_and(|d| d <= gap_threshold_slots))
}

/// Smallest |x - y| over two sorted slot lists.
fn min_distance(xs: &[u32], ys: &[u32]) -> Option<u32> {
    let (mut i, mut j) = (0, 0);
    let mut best: Option<u32> = None;
    while i < xs.len() && j < ys.len() {
        let d = xs[i].abs_diff(ys[j]);
        best = Some(best.map_or(d, |b| b.min(d)));
        if d == 0 {
            break;
        }
        if xs[i] < ys[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    best
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Connected components of the pairwise relation restricted to `hashtags`,
/// ordered by their smallest member.
pub fn temporal_components(
    hashtags: &BTreeSet<HashtagId>,
    series: &BTreeMap<HashtagId, UsageSeries>,
    gap_threshold_slots: u32,
) -> Result<Vec<BTreeSet<HashtagId>>, TemporalError> {
    let members: Vec<&UsageSeries> = hashtags
        .iter()
        .map(|h| series.get(h).ok_or_else(|| TemporalError::MissingSeries(h.clone())))
        .collect::<Result<_, _>>()?;
    let mut sets = DisjointSet::new(members.len());
    for i in 0..members.len() {
        for j in (i + 1)..members.len() {
            if pairwise_related(members[i], members[j], gap_threshold_slots)? {
                sets.union(i, j);
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<HashtagId>> = BTreeMap::new();
    for (i, s) in members.iter().enumerate() {
        groups.entry(sets.find(i)).or_default().insert(s.hashtag.clone());
    }
    let mut out: Vec<BTreeSet<HashtagId>> = groups.into_values().collect();
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicCluster {
    /// `k<k>-s<semantic id>-t<split index>`.
    pub topic_id: String,
    pub members: BTreeSet<HashtagId>,
    pub source_semantic_cluster: usize,
    pub first_active_slot: Option<u32>,
    pub last_active_slot: Option<u32>,
}

pub fn topic_id(k: usize, semantic_id: usize, split_index: usize) -> String {
    format!("k{k}-s{semantic_id}-t{split_index}")
}

/// Splits one semantic cluster into temporally connected topics. Split
/// indices follow earliest activity; silent components come last and ties go
/// to the lexicographically smallest member.
pub fn split_semantic_cluster(
    cluster: &SemanticCluster,
    k: usize,
    series: &BTreeMap<HashtagId, UsageSeries>,
    gap_threshold_slots: u32,
) -> Result<Vec<TopicCluster>, TemporalError> {
    let components = temporal_components(&cluster.members, series, gap_threshold_slots)?;
    let mut keyed: Vec<(Option<u32>, Option<u32>, BTreeSet<HashtagId>)> = components
        .into_iter()
        .map(|members| {
            let first = members.iter().filter_map(|h| series[h].first_active()).min();
            let last = members.iter().filter_map(|h| series[h].last_active()).max();
            (first, last, members)
        })
        .collect();
    keyed.sort_by(|a, b| {
        let ka = (a.0.is_none(), a.0, a.2.first());
        let kb = (b.0.is_none(), b.0, b.2.first());
        ka.cmp(&kb)
    });
    Ok(keyed
        .into_iter()
        .enumerate()
        .map(|(i, (first, last, members))| TopicCluster {
            topic_id: topic_id(k, cluster.cluster_id, i),
            members,
            source_semantic_cluster: cluster.cluster_id,
            first_active_slot: first,
            last_active_slot: last,
        })
        .collect())
}

/// Splits every cluster of a clustering.
pub fn split_all(
    clusters: &[SemanticCluster],
    k: usize,
    series: &BTreeMap<HashtagId, UsageSeries>,
    gap_threshold_slots: u32,
) -> Result<Vec<TopicCluster>, TemporalError> {
    let mut topics = Vec::new();
    for c in clusters {
        topics.extend(split_semantic_cluster(c, k, series, gap_threshold_slots)?);
    }
    Ok(topics)
}

/// Writes `topic_id,hashtag,first_active_slot,last_active_slot` rows, with
/// per-hashtag activity bounds (empty when the hashtag is silent).
pub fn write_topics_csv<W: Write>(
    out: W,
    topics: &[TopicCluster],
    series: &BTreeMap<HashtagId, UsageSeries>,
) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["topic_id", "hashtag", "first_active_slot", "last_active_slot"])?;
    let fmt = |s: Option<u32>| s.map(|v| v.to_string()).unwrap_or_default();
    for t in topics {
        for h in &t.members {
            let s = series.get(h);
            w.write_record([
                t.topic_id.clone(),
                h.to_string(),
                fmt(s.and_then(UsageSeries::first_active)),
                fmt(s.and_then(UsageSeries::last_active)),
            ])?;
        }
    }
    w.flush()
}

/// Reads the rows written by [`write_topics_csv`] back into topic clusters.
pub fn read_topics_csv<R: io::Read>(source: R) -> Result<Vec<TopicCluster>, csv::Error> {
    let mut r = csv::Reader::from_reader(source);
    let mut topics: Vec<TopicCluster> = Vec::new();
    for row in r.records() {
        let row = row?;
        let id = &row[0];
        let hashtag = HashtagId::new(&row[1]).ok_or_else(|| {
            csv::Error::from(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("invalid hashtag {:?}", &row[1]),
            ))
        })?;
        let slot = |s: &str| s.parse::<u32>().ok();
        let (first, last) = (slot(&row[2]), slot(&row[3]));
        if topics.last().is_none_or(|t| t.topic_id != id) {
            let semantic = id
                .split('-')
                .nth(1)
                .and_then(|s| s.strip_prefix('s'))
                .and_then(|s| s.parse().ok())
                .unwrap_or(0);
            topics.push(TopicCluster {
                topic_id: id.to_string(),
                members: BTreeSet::new(),
                source_semantic_cluster: semantic,
                first_active_slot: None,
                last_active_slot: None,
            });
        }
        let t = topics.last_mut().expect("pushed above");
        t.members.insert(hashtag);
        t.first_active_slot = match (t.first_active_slot, first) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        t.last_active_slot = match (t.last_active_slot, last) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }
    Ok(topics)
}
