//! Per-community timelines for the federer scenario: one community switches
//! to #rogerfederer after two days, the other after four.

use std::collections::BTreeSet;

use topic_lifecycle::community::Partition;
use topic_lifecycle::corpus::{HashtagId, Slotting};
use topic_lifecycle::temporal::{topic_id, TopicCluster};
use topic_lifecycle::timeline::{build_hashtag_timeline, lifecycle_report, LifeStatus, TimelineSpec};
use topic_lifecycle::synth::{generate, SynthSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SynthSpec::federer_example();
    let corpus = generate(&spec)?;

    // Ground-truth communities and topics stand in for the detected ones.
    let partition = Partition::from_labels(corpus.truth.true_partition.iter().map(|(u, &c)| (u.as_str(), c)));
    let topics: Vec<TopicCluster> = (0..spec.topics.len())
        .map(|t| TopicCluster {
            topic_id: topic_id(spec.topics.len(), t, 0),
            members: corpus
                .truth
                .true_topics
                .iter()
                .filter(|(_, &tt)| tt == t)
                .map(|(h, _)| h.clone())
                .collect(),
            source_semantic_cluster: t,
            first_active_slot: None,
            last_active_slot: None,
        })
        .collect();
    let slotting = Slotting::daily_from_earliest(&corpus.tweets).expect("non-empty corpus");
    let timeline = build_hashtag_timeline(
        &corpus.tweets,
        &TimelineSpec {
            slotting,
            slot_count: spec.slot_count as usize,
            partition: &partition,
            min_community_size: 10,
            topics: &topics,
            hashtags: &BTreeSet::new(),
        },
    );

    let report = lifecycle_report(&timeline, false);
    for topic in &report.topics {
        println!("{} {:?}", topic.topic_id, topic.members.iter().map(HashtagId::as_str).collect::<Vec<_>>());
        for scope in &topic.scopes {
            let dominant: Vec<&str> = scope.dominant.iter().map(|d| d.as_ref().map_or("-", HashtagId::as_str)).collect();
            let status = match scope.status {
                LifeStatus::Alive => "alive".to_string(),
                LifeStatus::Died { death_slot } => format!("died at {death_slot}"),
                LifeStatus::NeverActive => "never active".to_string(),
            };
            println!("  {:<12} intensity {:?} ({status})", scope.scope.to_string(), scope.intensity);
            println!("  {:<12} dominant  {}", "", dominant.join(" "));
        }
    }
    println!("morphs:");
    for m in &report.morphs {
        println!("  {} {}: #{} -> #{} at {} -> {}", m.scope, m.topic_id, m.dominant_from, m.dominant_to, m.slot_from, m.slot_to);
    }
    Ok(())
}
