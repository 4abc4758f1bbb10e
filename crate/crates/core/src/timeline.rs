//! Hashtag and topic usage timelines per scope (overall and per community),
//! dominant hashtags, topic intensity, and morph/death detection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::community::Partition;
use crate::corpus::{HashtagId, Slotting, Tweet};
use crate::temporal::TopicCluster;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimelineError {
    #[error("unknown topic {0}")]
    UnknownTopic(String),
    #[error("malformed timeline row: {0}")]
    Malformed(String),
}

/// Aggregation target of a timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Overall,
    Community(usize),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Overall => f.write_str("overall"),
            Scope::Community(c) => write!(f, "community-{c}"),
        }
    }
}

impl FromStr for Scope {
    type Err = TimelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "overall" {
            return Ok(Scope::Overall);
        }
        s.strip_prefix("community-")
            .and_then(|c| c.parse().ok())
            .map(Scope::Community)
            .ok_or_else(|| TimelineError::Malformed(format!("scope {s:?}")))
    }
}

impl Serialize for Scope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashtagUsageRecord {
    pub scope: Scope,
    pub timeslot: u32,
    pub hashtag: HashtagId,
    pub topic_id: Option<String>,
    pub usage_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicUsageRecord {
    pub scope: Scope,
    pub timeslot: u32,
    pub topic_id: String,
    pub intensity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphEvent {
    pub scope: Scope,
    pub topic_id: String,
    pub slot_from: u32,
    pub slot_to: u32,
    pub dominant_from: HashtagId,
    pub dominant_to: HashtagId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeathEvent {
    pub scope: Scope,
    pub topic_id: String,
    pub death_slot: u32,
}

/// Lifecycle state of a topic within one scope at the end of the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LifeStatus {
    Alive,
    Died { death_slot: u32 },
    NeverActive,
}

/// Usage counts per scope, hashtag and slot, plus topic membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashtagTimeline {
    slot_count: usize,
    scopes: BTreeSet<Scope>,
    counts: BTreeMap<Scope, BTreeMap<HashtagId, Vec<u64>>>,
    topics: BTreeMap<String, BTreeSet<HashtagId>>,
    topic_of: BTreeMap<HashtagId, String>,
}

/// Inputs for [`build_hashtag_timeline`] besides the tweets.
#[derive(Debug, Clone, Copy)]
pub struct TimelineSpec<'a> {
    pub slotting: Slotting,
    pub slot_count: usize,
    pub partition: &'a Partition,
    /// Communities smaller than this get no scope of their own.
    pub min_community_size: usize,
    pub topics: &'a [TopicCluster],
    /// Hashtags to count. Topic members are always counted.
    pub hashtags: &'a BTreeSet<HashtagId>,
}

/// Counts incidences per (scope, slot, hashtag). Every tweet feeds the
/// overall scope; it also feeds its author's community when that community
/// is reported.
pub fn build_hashtag_timeline<'a, I>(tweets: I, spec: &TimelineSpec<'_>) -> HashtagTimeline
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let reported = spec.partition.reported(spec.min_community_size);
    let mut timeline = HashtagTimeline::empty(
        spec.slot_count,
        reported.iter().map(|&c| Scope::Community(c)),
        spec.topics,
    );
    let tracked: BTreeSet<&HashtagId> = spec
        .hashtags
        .iter()
        .chain(timeline.topic_of.keys())
        .collect();
    let tracked: BTreeSet<HashtagId> = tracked.into_iter().cloned().collect();
    for tweet in tweets {
        let Ok(slot) = spec.slotting.assign(tweet.timestamp) else {
            continue;
        };
        if slot.index() >= spec.slot_count {
            continue;
        }
        let community = spec
            .partition
            .community_of(&tweet.author)
            .filter(|c| reported.contains(c));
        for tag in tweet.hashtags.iter().filter(|t| tracked.contains(*t)) {
            timeline.add(Scope::Overall, tag, slot.0, 1);
            if let Some(c) = community {
                timeline.add(Scope::Community(c), tag, slot.0, 1);
            }
        }
    }
    timeline
}

impl HashtagTimeline {
    /// A timeline with no usage. `Overall` is always a scope.
    pub fn empty<I>(slot_count: usize, community_scopes: I, topics: &[TopicCluster]) -> Self
    where
        I: IntoIterator<Item = Scope>,
    {
        let mut scopes: BTreeSet<Scope> = community_scopes.into_iter().collect();
        scopes.insert(Scope::Overall);
        let topic_of = topics
            .iter()
            .flat_map(|t| t.members.iter().map(move |h| (h.clone(), t.topic_id.clone())))
            .collect();
        HashtagTimeline {
            slot_count,
            scopes,
            counts: BTreeMap::new(),
            topics: topics
                .iter()
                .map(|t| (t.topic_id.clone(), t.members.clone()))
                .collect(),
            topic_of,
        }
    }

    /// Rebuilds a timeline from usage records.
    pub fn from_records<I>(
        slot_count: usize,
        community_scopes: impl IntoIterator<Item = Scope>,
        topics: &[TopicCluster],
        records: I,
    ) -> Self
    where
        I: IntoIterator<Item = HashtagUsageRecord>,
    {
        let mut timeline = HashtagTimeline::empty(slot_count, community_scopes, topics);
        for r in records {
            timeline.scopes.insert(r.scope);
            timeline.add(r.scope, &r.hashtag, r.timeslot, r.usage_count);
        }
        timeline
    }

    fn add(&mut self, scope: Scope, tag: &HashtagId, slot: u32, n: u64) {
        if slot as usize >= self.slot_count || n == 0 {
            return;
        }
        let series = self
            .counts
            .entry(scope)
            .or_default()
            .entry(tag.clone())
            .or_insert_with(|| vec![0; self.slot_count]);
        series[slot as usize] += n;
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn scopes(&self) -> impl Iterator<Item = Scope> + '_ {
        self.scopes.iter().copied()
    }

    pub fn topic_ids(&self) -> impl Iterator<Item = &str> {
        self.topics.keys().map(String::as_str)
    }

    pub fn topic_members(&self, topic_id: &str) -> Result<&BTreeSet<HashtagId>, TimelineError> {
        self.topics
            .get(topic_id)
            .ok_or_else(|| TimelineError::UnknownTopic(topic_id.to_string()))
    }

    pub fn topic_of(&self, hashtag: &HashtagId) -> Option<&str> {
        self.topic_of.get(hashtag).map(String::as_str)
    }

    pub fn usage(&self, scope: Scope, hashtag: &HashtagId, slot: u32) -> u64 {
        self.counts
            .get(&scope)
            .and_then(|m| m.get(hashtag))
            .and_then(|s| s.get(slot as usize))
            .copied()
            .unwrap_or(0)
    }

    /// Non-zero records sorted by scope, slot and hashtag.
    pub fn records(&self) -> Vec<HashtagUsageRecord> {
        let mut out = Vec::new();
        for (&scope, by_tag) in &self.counts {
            for slot in 0..self.slot_count {
                for (tag, series) in by_tag {
                    if series[slot] > 0 {
                        out.push(HashtagUsageRecord {
                            scope,
                            timeslot: slot as u32,
                            hashtag: tag.clone(),
                            topic_id: self.topic_of.get(tag).cloned(),
                            usage_count: series[slot],
                        });
                    }
                }
            }
        }
        out
    }

    /// Non-zero topic intensities sorted by scope, slot and topic.
    pub fn topic_records(&self) -> Vec<TopicUsageRecord> {
        let mut out = Vec::new();
        for &scope in &self.scopes {
            let series: Vec<(&String, Vec<u64>)> = self
                .topics
                .keys()
                .map(|id| (id, self.intensity_series(id, scope).expect("known topic")))
                .collect();
            for slot in 0..self.slot_count {
                for (id, s) in &series {
                    if s[slot] > 0 {
                        out.push(TopicUsageRecord {
                            scope,
                            timeslot: slot as u32,
                            topic_id: (*id).clone(),
                            intensity: s[slot],
                        });
                    }
                }
            }
        }
        out
    }

    /// Sum of member usage counts at (scope, slot).
    pub fn topic_intensity(&self, topic_id: &str, scope: Scope, slot: u32) -> Result<u64, TimelineError> {
        let members = self.topic_members(topic_id)?;
        Ok(members.iter().map(|h| self.usage(scope, h, slot)).sum())
    }

    pub fn intensity_series(&self, topic_id: &str, scope: Scope) -> Result<Vec<u64>, TimelineError> {
        let members = self.topic_members(topic_id)?;
        let mut out = vec![0u64; self.slot_count];
        if let Some(by_tag) = self.counts.get(&scope) {
            for h in members {
                if let Some(s) = by_tag.get(h) {
                    for (o, c) in out.iter_mut().zip(s) {
                        *o += c;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Most used member at (scope, slot); ties go to the smallest hashtag.
    /// `None` when the topic has no usage there.
    pub fn dominant_hashtag(
        &self,
        topic_id: &str,
        scope: Scope,
        slot: u32,
    ) -> Result<Option<HashtagId>, TimelineError> {
        let members = self.topic_members(topic_id)?;
        let mut best: Option<(&HashtagId, u64)> = None;
        for h in members {
            let c = self.usage(scope, h, slot);
            if c > 0 && best.is_none_or(|(_, b)| c > b) {
                best = Some((h, c));
            }
        }
        Ok(best.map(|(h, _)| h.clone()))
    }

    pub fn dominant_series(&self, topic_id: &str, scope: Scope) -> Result<Vec<Option<HashtagId>>, TimelineError> {
        (0..self.slot_count as u32)
            .map(|s| self.dominant_hashtag(topic_id, scope, s))
            .collect()
    }

    pub fn detect_morphs(
        &self,
        topic_id: &str,
        scope: Scope,
        across_gaps: bool,
    ) -> Result<Vec<MorphEvent>, TimelineError> {
        let dominants = self.dominant_series(topic_id, scope)?;
        Ok(morph_transitions(&dominants, across_gaps)
            .into_iter()
            .map(|(slot_from, slot_to, from, to)| MorphEvent {
                scope,
                topic_id: topic_id.to_string(),
                slot_from,
                slot_to,
                dominant_from: from,
                dominant_to: to,
            })
            .collect())
    }

    pub fn detect_death(&self, topic_id: &str, scope: Scope) -> Result<LifeStatus, TimelineError> {
        Ok(life_status(&self.intensity_series(topic_id, scope)?))
    }
}

/// Dominant-hashtag changes between live slots. Without `across_gaps`, only
/// adjacent live slots are compared and a silent slot breaks the chain.
pub fn morph_transitions(
    dominants: &[Option<HashtagId>],
    across_gaps: bool,
) -> Vec<(u32, u32, HashtagId, HashtagId)> {
    let mut out = Vec::new();
    let mut last: Option<(usize, &HashtagId)> = None;
    for (slot, d) in dominants.iter().enumerate() {
        match d {
            None => {
                if !across_gaps {
                    last = None;
                }
            }
            Some(h) => {
                if let Some((prev_slot, prev)) = last {
                    if prev != h {
                        out.push((prev_slot as u32, slot as u32, prev.clone(), h.clone()));
                    }
                }
                last = Some((slot, h));
            }
        }
    }
    out
}

/// Death is zero intensity from some slot through the end of the window.
pub fn life_status(intensity: &[u64]) -> LifeStatus {
    match intensity.iter().rposition(|&x| x > 0) {
        None => LifeStatus::NeverActive,
        Some(last) if last + 1 == intensity.len() => LifeStatus::Alive,
        Some(last) => LifeStatus::Died {
            death_slot: last as u32 + 1,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeLifecycle {
    pub scope: Scope,
    pub intensity: Vec<u64>,
    pub dominant: Vec<Option<HashtagId>>,
    pub morphs: Vec<MorphEvent>,
    #[serde(flatten)]
    pub status: LifeStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicLifecycle {
    pub topic_id: String,
    pub members: BTreeSet<HashtagId>,
    /// Scopes where the topic was used at least once.
    pub scopes: Vec<ScopeLifecycle>,
}

/// Communities disagreeing on a topic's fate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeContrast {
    pub topic_id: String,
    pub alive_in: Vec<Scope>,
    pub died_in: Vec<DeathEvent>,
    pub never_active_in: Vec<Scope>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleReport {
    pub slot_count: usize,
    pub scopes: Vec<Scope>,
    pub topics: Vec<TopicLifecycle>,
    pub morphs: Vec<MorphEvent>,
    pub deaths: Vec<DeathEvent>,
    pub contrasts: Vec<ScopeContrast>,
}

#[derive(Debug, Serialize)]
struct EventsRef<'a> {
    morphs: &'a [MorphEvent],
    deaths: &'a [DeathEvent],
}

impl LifecycleReport {
    /// `{"morphs": [...], "deaths": [...]}`.
    pub fn events_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&EventsRef {
            morphs: &self.morphs,
            deaths: &self.deaths,
        })
    }

    pub fn topic(&self, topic_id: &str) -> Option<&TopicLifecycle> {
        self.topics.iter().find(|t| t.topic_id == topic_id)
    }
}

pub fn lifecycle_report(timeline: &HashtagTimeline, morph_across_gaps: bool) -> LifecycleReport {
    let scopes: Vec<Scope> = timeline.scopes().collect();
    let mut report = LifecycleReport {
        slot_count: timeline.slot_count(),
        scopes: scopes.clone(),
        topics: Vec::new(),
        morphs: Vec::new(),
        deaths: Vec::new(),
        contrasts: Vec::new(),
    };
    for topic_id in timeline.topic_ids() {
        let members = timeline.topic_members(topic_id).expect("listed topic").clone();
        let mut lifecycle = TopicLifecycle {
            topic_id: topic_id.to_string(),
            members,
            scopes: Vec::new(),
        };
        let mut contrast = ScopeContrast {
            topic_id: topic_id.to_string(),
            alive_in: Vec::new(),
            died_in: Vec::new(),
            never_active_in: Vec::new(),
        };
        for &scope in &scopes {
            let intensity = timeline.intensity_series(topic_id, scope).expect("listed topic");
            let status = life_status(&intensity);
            match (scope, status) {
                (Scope::Community(_), LifeStatus::Alive) => contrast.alive_in.push(scope),
                (Scope::Community(_), LifeStatus::NeverActive) => contrast.never_active_in.push(scope),
                (Scope::Community(_), LifeStatus::Died { death_slot }) => contrast.died_in.push(DeathEvent {
                    scope,
                    topic_id: topic_id.to_string(),
                    death_slot,
                }),
                _ => {}
            }
            if status == LifeStatus::NeverActive {
                continue;
            }
            if let LifeStatus::Died { death_slot } = status {
                report.deaths.push(DeathEvent {
                    scope,
                    topic_id: topic_id.to_string(),
                    death_slot,
                });
            }
            let morphs = timeline
                .detect_morphs(topic_id, scope, morph_across_gaps)
                .expect("listed topic");
            report.morphs.extend(morphs.iter().cloned());
            lifecycle.scopes.push(ScopeLifecycle {
                scope,
                dominant: timeline.dominant_series(topic_id, scope).expect("listed topic"),
                intensity,
                morphs,
                status,
            });
        }
        let kinds = [
            !contrast.alive_in.is_empty(),
            !contrast.died_in.is_empty(),
            !contrast.never_active_in.is_empty(),
        ];
        let active = kinds[0] || kinds[1];
        if active && kinds.iter().filter(|&&k| k).count() >= 2 {
            report.contrasts.push(contrast);
        }
        if !lifecycle.scopes.is_empty() {
            report.topics.push(lifecycle);
        }
    }
    report
}

/// Writes `scope,slot,hashtag,topic_id,count` rows.
pub fn write_hashtag_timeline_csv<W: Write>(out: W, timeline: &HashtagTimeline) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scope", "slot", "hashtag", "topic_id", "count"])?;
    for r in timeline.records() {
        w.write_record([
            r.scope.to_string(),
            r.timeslot.to_string(),
            r.hashtag.to_string(),
            r.topic_id.unwrap_or_default(),
            r.usage_count.to_string(),
        ])?;
    }
    w.flush()
}

/// Writes `scope,slot,topic_id,intensity` rows.
pub fn write_topic_timeline_csv<W: Write>(out: W, timeline: &HashtagTimeline) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scope", "slot", "topic_id", "intensity"])?;
    for r in timeline.topic_records() {
        w.write_record([
            r.scope.to_string(),
            r.timeslot.to_string(),
            r.topic_id,
            r.intensity.to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_hashtag_timeline_csv<R: Read>(source: R) -> Result<Vec<HashtagUsageRecord>, TimelineError> {
    let mut r = csv::Reader::from_reader(source);
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| TimelineError::Malformed(e.to_string()))?;
        let bad = || TimelineError::Malformed(format!("{row:?}"));
        if row.len() != 5 {
            return Err(bad());
        }
        out.push(HashtagUsageRecord {
            scope: row[0].parse()?,
            timeslot: row[1].parse().map_err(|_| bad())?,
            hashtag: HashtagId::new(&row[2]).ok_or_else(bad)?,
            topic_id: Some(row[3].to_string()).filter(|s| !s.is_empty()),
            usage_count: row[4].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f",
    "#bab0ac",
];

/// Stacked per-hashtag usage bars for one topic in one scope.
pub fn render_svg(timeline: &HashtagTimeline, topic_id: &str, scope: Scope) -> Result<String, TimelineError> {
    let members: Vec<&HashtagId> = timeline.topic_members(topic_id)?.iter().collect();
    let intensity = timeline.intensity_series(topic_id, scope)?;
    let (width, height, margin, legend) = (640.0, 320.0, 40.0, 16.0);
    let max = intensity.iter().copied().max().unwrap_or(0).max(1) as f64;
    let slots = timeline.slot_count().max(1) as f64;
    let bar = (width - 2.0 * margin) / slots;
    let plot_h = height - 2.0 * margin;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"11\">\n",
        height + legend * members.len() as f64
    );
    svg.push_str(&format!(
        "<text x=\"{margin}\" y=\"20\">{topic_id} / {scope}</text>\n<line x1=\"{margin}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"black\"/>\n",
        y = height - margin,
        x2 = width - margin
    ));
    for slot in 0..timeline.slot_count() {
        let mut base = height - margin;
        for (i, h) in members.iter().enumerate() {
            let c = timeline.usage(scope, h, slot as u32);
            if c == 0 {
                continue;
            }
            let bar_h = c as f64 / max * plot_h;
            base -= bar_h;
            svg.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"><title>{h}: {c}</title></rect>\n",
                margin + slot as f64 * bar + 1.0,
                base,
                (bar - 2.0).max(1.0),
                bar_h,
                PALETTE[i % PALETTE.len()]
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{slot}</text>\n",
            margin + (slot as f64 + 0.5) * bar,
            height - margin + 14.0
        ));
    }
    for (i, h) in members.iter().enumerate() {
        let y = height + legend * i as f64;
        svg.push_str(&format!(
            "<rect x=\"{margin}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"{:.2}\">#{h}</text>\n",
            y - 9.0,
            PALETTE[i % PALETTE.len()],
            margin + 14.0,
            y
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
