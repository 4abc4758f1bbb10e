//! Streams a tweet file, counts hashtag incidences and applies the frequency
//! filter.
//!
//! ```text
//! cargo run --example parse_corpus -- tweets.txt.gz 40 1000
//! ```
//!
//! Without arguments a small inline corpus is used.

use std::env;
use std::io::Cursor;
use std::path::Path;

use topic_lifecycle::corpus::{
    count_hashtag_usage, filter_hashtags, is_retained, open_input, parse_tweet_stream, FilterBounds, Slotting,
};

const SAMPLE: &str = "\
T\t2009-06-11 00:00:03
U\thttp://twitter.com/alice
W\tWatching #federer at #wimbledon #federer

T\t2009-06-11 10:14:00
U\thttp://twitter.com/bob
W\t#federer wins again

T\tnot a timestamp
U\thttp://twitter.com/carol
W\tbroken record

T\t2009-06-12 08:00:00
U\thttp://twitter.com/carol
W\t#rogerfederer through to the final
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = env::args().skip(1).collect();
    let bounds = match (args.get(1), args.get(2)) {
        (Some(min), Some(max)) => FilterBounds {
            min_count: min.parse()?,
            max_count: max.parse()?,
        },
        _ if args.is_empty() => FilterBounds {
            min_count: 1,
            max_count: 2,
        },
        _ => FilterBounds::default(),
    };

    let mut reader = match args.first() {
        Some(path) => parse_tweet_stream(open_input(Path::new(path))?),
        None => parse_tweet_stream(Box::new(Cursor::new(SAMPLE)) as Box<dyn std::io::BufRead + Send>),
    };
    let tweets: Vec<_> = reader.by_ref().collect::<Result<_, _>>()?;
    let stats = reader.stats();
    println!("parsed {} tweets, skipped {} malformed records", stats.parsed, stats.malformed_skipped);

    let counts = count_hashtag_usage(&tweets);
    let retained = filter_hashtags(&counts, bounds)?;
    println!(
        "{} distinct hashtags, {} within [{}, {}]",
        counts.len(),
        retained.len(),
        bounds.min_count,
        bounds.max_count
    );
    for (tag, n) in counts.iter().take(20) {
        let mark = if retained.contains(tag) { "kept" } else { "dropped" };
        println!("  #{tag:<20} {n:>6}  {mark}");
    }

    if let Some(slotting) = Slotting::daily_from_earliest(&tweets) {
        println!("slot epoch {}", slotting.epoch_start);
        for t in tweets.iter().filter(|t| is_retained(t, &retained)).take(10) {
            println!("  slot {:>3}  @{:<12} {}", slotting.assign(t.timestamp)?.index(), t.author, t.text);
        }
    }
    Ok(())
}
