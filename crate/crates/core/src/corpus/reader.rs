use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Tweet};

const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";
const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Opens a file for line reading, transparently decompressing gzip input.
pub fn open_input(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let mut reader = BufReader::new(File::open(path)?);
    let is_gzip = reader.fill_buf()?.starts_with(&GZIP_MAGIC);
    if is_gzip {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(reader))))
    } else {
        Ok(Box::new(reader))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseStats {
    pub parsed: u64,
    pub malformed_skipped: u64,
}

/// Streaming parser over `T`/`U`/`W` records separated by blank lines.
///
/// Only the current record's three lines are buffered. A leading
/// `total number:` header line is ignored.
pub struct TweetReader<R> {
    source: R,
    line: Vec<u8>,
    fields: [Option<String>; 3],
    group_len: usize,
    next_seq: u64,
    stats: ParseStats,
    at_start: bool,
    done: bool,
}

pub fn parse_tweet_stream<R: BufRead>(source: R) -> TweetReader<R> {
    TweetReader::new(source)
}

impl<R: BufRead> TweetReader<R> {
    pub fn new(source: R) -> Self {
        TweetReader {
            source,
            line: Vec::with_capacity(256),
            fields: [None, None, None],
            group_len: 0,
            next_seq: 0,
            stats: ParseStats::default(),
            at_start: true,
            done: false,
        }
    }

    pub fn stats(&self) -> ParseStats {
        self.stats
    }

    fn finish_group(&mut self) -> Option<Tweet> {
        if self.group_len == 0 {
            return None;
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        let well_formed = self.group_len == 3;
        let [t, u, w] = std::mem::take(&mut self.fields);
        self.group_len = 0;
        let parsed = if well_formed {
            build_tweet(seq, t, u, w)
        } else {
            None
        };
        match parsed {
            Some(tweet) => {
                self.stats.parsed += 1;
                Some(tweet)
            }
            None => {
                self.stats.malformed_skipped += 1;
                None
            }
        }
    }

    fn push_line(&mut self, text: &str) {
        if self.group_len < 3 {
            let expected = ['T', 'U', 'W'][self.group_len];
            self.fields[self.group_len] = strip_tag(text, expected).map(str::to_string);
        }
        self.group_len += 1;
    }
}

fn strip_tag(line: &str, tag: char) -> Option<&str> {
    let rest = line.strip_prefix(tag)?;
    let mut chars = rest.chars();
    match chars.next() {
        Some(c) if c == '\t' || c == ' ' => Some(chars.as_str()),
        None => Some(""),
        _ => None,
    }
}

fn build_tweet(seq: u64, t: Option<String>, u: Option<String>, w: Option<String>) -> Option<Tweet> {
    let timestamp = parse_timestamp(t?.trim())?;
    let author = parse_author(u?.trim())?;
    Some(Tweet::new(seq, author, timestamp, w?))
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .ok()
        .map(|dt| dt.and_utc())
}

fn parse_author(s: &str) -> Option<String> {
    let handle = s
        .strip_prefix("http://twitter.com/")
        .or_else(|| s.strip_prefix("https://twitter.com/"))
        .unwrap_or(s)
        .trim_end_matches('/');
    if handle.is_empty() || handle.contains(char::is_whitespace) || handle.contains('/') {
        None
    } else {
        Some(handle.to_string())
    }
}

impl<R: BufRead> Iterator for TweetReader<R> {
    type Item = Result<Tweet, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.line.clear();
            match self.source.read_until(b'\n', &mut self.line) {
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
                Ok(0) => {
                    self.done = true;
                    if let Some(tweet) = self.finish_group() {
                        return Some(Ok(tweet));
                    }
                }
                Ok(_) => {
                    let text = String::from_utf8_lossy(&self.line);
                    let text = text.trim_end_matches(['\n', '\r']);
                    let first = std::mem::replace(&mut self.at_start, false);
                    if text.trim().is_empty() {
                        if let Some(tweet) = self.finish_group() {
                            return Some(Ok(tweet));
                        }
                    } else if !(first && text.starts_with("total number:")) {
                        let owned = text.to_string();
                        self.push_line(&owned);
                    }
                }
            }
        }
        None
    }
}

/// Writes one record in the same layout the reader accepts.
pub fn write_tweet<W: Write>(out: &mut W, tweet: &Tweet) -> io::Result<()> {
    writeln!(out, "T\t{}", tweet.timestamp.format(TIMESTAMP_FORMAT))?;
    writeln!(out, "U\thttp://twitter.com/{}", tweet.author)?;
    writeln!(out, "W\t{}", tweet.text.replace(['\n', '\r'], " "))?;
    writeln!(out)
}
