//! Tweet corpus ingestion: record parsing, hashtag extraction, frequency
//! filtering, timeslot assignment and the follower subgraph.

mod graph;
mod reader;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Duration, NaiveTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::{load_social_graph, EdgeStats, SocialGraph};
pub use reader::{open_input, parse_tweet_stream, write_tweet, ParseStats, TweetReader};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid filter bounds: min_count {min} > max_count {max}")]
    InvalidBounds { min: u64, max: u64 },
    #[error("timestamp {timestamp} precedes epoch start {epoch_start}")]
    BeforeEpoch {
        timestamp: DateTime<Utc>,
        epoch_start: DateTime<Utc>,
    },
    #[error("slot width must be positive")]
    InvalidSlotWidth,
}

/// A hashtag with its leading `#` removed. Identity is case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HashtagId(String);

impl HashtagId {
    /// Builds an id from a bare token (no `#`). Returns `None` when the token
    /// is empty or contains characters that cannot appear in a hashtag.
    pub fn new(token: impl Into<String>) -> Option<Self> {
        let token = token.into();
        if !token.is_empty() && token.chars().all(is_hashtag_char) {
            Some(HashtagId(token))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for HashtagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

impl AsRef<str> for HashtagId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

fn is_hashtag_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tweet {
    /// Ordinal of the record in its source stream.
    pub seq: u64,
    pub author: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub hashtags: Vec<HashtagId>,
}

impl Tweet {
    pub fn new(seq: u64, author: impl Into<String>, timestamp: DateTime<Utc>, text: impl Into<String>) -> Self {
        let text = text.into();
        let hashtags = extract_hashtags(&text);
        Tweet {
            seq,
            author: author.into(),
            timestamp,
            text,
            hashtags,
        }
    }

    /// Number of incidences of `tag` in this tweet.
    pub fn occurrences(&self, tag: &HashtagId) -> u64 {
        self.hashtags.iter().filter(|h| *h == tag).count() as u64
    }
}

/// Every maximal `#` + `[letters, digits, _]+` token, in order, with duplicates.
pub fn extract_hashtags(text: &str) -> Vec<HashtagId> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '#' {
            continue;
        }
        let start = i + 1;
        let mut end = start;
        while let Some(&(j, n)) = chars.peek() {
            if !is_hashtag_char(n) {
                break;
            }
            end = j + n.len_utf8();
            chars.next();
        }
        if end > start {
            out.push(HashtagId(text[start..end].to_string()));
        }
    }
    out
}

/// Incidence counts: a hashtag used twice in one tweet counts twice.
pub fn count_hashtag_usage<'a, I>(tweets: I) -> BTreeMap<HashtagId, u64>
where
    I: IntoIterator<Item = &'a Tweet>,
{
    let mut counts = BTreeMap::new();
    for tweet in tweets {
        for tag in &tweet.hashtags {
            *counts.entry(tag.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// Inclusive occurrence bounds for the retention filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterBounds {
    pub min_count: u64,
    pub max_count: u64,
}

impl Default for FilterBounds {
    fn default() -> Self {
        FilterBounds {
            min_count: 40,
            max_count: 1000,
        }
    }
}

pub fn filter_hashtags(
    counts: &BTreeMap<HashtagId, u64>,
    bounds: FilterBounds,
) -> Result<BTreeSet<HashtagId>, CorpusError> {
    if bounds.min_count > bounds.max_count {
        return Err(CorpusError::InvalidBounds {
            min: bounds.min_count,
            max: bounds.max_count,
        });
    }
    Ok(counts
        .iter()
        .filter(|(_, &c)| c >= bounds.min_count && c <= bounds.max_count)
        .map(|(h, _)| h.clone())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeslotIndex(pub u32);

impl TimeslotIndex {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn slot_start(self, slotting: &Slotting) -> DateTime<Utc> {
        slotting.epoch_start + slotting.slot_width * self.0 as i32
    }
}

impl fmt::Display for TimeslotIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Fixed-width time bucketing anchored at `epoch_start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slotting {
    pub epoch_start: DateTime<Utc>,
    pub slot_width: Duration,
}

impl Slotting {
    pub fn new(epoch_start: DateTime<Utc>, slot_width: Duration) -> Result<Self, CorpusError> {
        if slot_width <= Duration::zero() {
            return Err(CorpusError::InvalidSlotWidth);
        }
        Ok(Slotting {
            epoch_start,
            slot_width,
        })
    }

    /// One-day slots starting at midnight UTC of the earliest timestamp.
    pub fn daily_from_earliest<'a, I>(tweets: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a Tweet>,
    {
        let earliest = tweets.into_iter().map(|t| t.timestamp).min()?;
        Some(Slotting {
            epoch_start: midnight_utc(earliest),
            slot_width: Duration::days(1),
        })
    }

    pub fn assign(&self, timestamp: DateTime<Utc>) -> Result<TimeslotIndex, CorpusError> {
        assign_timeslot(timestamp, self.epoch_start, self.slot_width)
    }
}

pub fn midnight_utc(ts: DateTime<Utc>) -> DateTime<Utc> {
    ts.date_naive().and_time(NaiveTime::MIN).and_utc()
}

pub fn assign_timeslot(
    timestamp: DateTime<Utc>,
    epoch_start: DateTime<Utc>,
    slot_width: Duration,
) -> Result<TimeslotIndex, CorpusError> {
    if slot_width <= Duration::zero() {
        return Err(CorpusError::InvalidSlotWidth);
    }
    if timestamp < epoch_start {
        return Err(CorpusError::BeforeEpoch {
            timestamp,
            epoch_start,
        });
    }
    let offset = (timestamp - epoch_start).num_milliseconds();
    let width = slot_width.num_milliseconds();
    Ok(TimeslotIndex((offset / width) as u32))
}

/// Dataset-level figures reported after the retention filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub total_tweets: u64,
    pub malformed_skipped: u64,
    pub retained_hashtags: u64,
    pub retained_tweets: u64,
    pub retained_users: u64,
    pub avg_tweets_per_user: f64,
}

impl CorpusSummary {
    pub fn new(
        total_tweets: u64,
        malformed_skipped: u64,
        retained_hashtags: u64,
        retained_tweets: u64,
        retained_users: u64,
    ) -> Self {
        let avg = if retained_users == 0 {
            0.0
        } else {
            retained_tweets as f64 / retained_users as f64
        };
        CorpusSummary {
            total_tweets,
            malformed_skipped,
            retained_hashtags,
            retained_tweets,
            retained_users,
            avg_tweets_per_user: avg,
        }
    }
}

/// True when the tweet carries at least one retained hashtag.
pub fn is_retained(tweet: &Tweet, retained: &BTreeSet<HashtagId>) -> bool {
    tweet.hashtags.iter().any(|h| retained.contains(h))
}
