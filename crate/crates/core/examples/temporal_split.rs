//! One semantic cluster holding a hashtag used for two events a week apart
//! splits into two topics once temporal relatedness is applied.

use std::collections::{BTreeMap, BTreeSet};

use topic_lifecycle::clustering::SemanticCluster;
use topic_lifecycle::corpus::HashtagId;
use topic_lifecycle::temporal::{split_semantic_cluster, UsageSeries, DEFAULT_GAP_THRESHOLD_SLOTS};

fn series(tag: &str, counts: &[u64]) -> (HashtagId, UsageSeries) {
    let id = HashtagId::new(tag).unwrap();
    (id.clone(), UsageSeries::new(id, counts.to_vec()))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Golf fills the first days, tennis starts five slots after golf ends.
    let usage: BTreeMap<HashtagId, UsageSeries> = [
        series("usopengolf", &[5, 9, 4, 0, 0, 0, 0, 0, 0, 0, 0]),
        series("tigerwoods", &[2, 3, 1, 0, 0, 0, 0, 0, 0, 0, 0]),
        series("usopentennis", &[0, 0, 0, 0, 0, 0, 0, 6, 8, 3, 0]),
        series("nadal", &[0, 0, 0, 0, 0, 0, 0, 0, 2, 4, 1]),
    ]
    .into_iter()
    .collect();
    let cluster = SemanticCluster {
        cluster_id: 0,
        members: usage.keys().cloned().collect::<BTreeSet<_>>(),
        centroid: Vec::new(),
    };

    for gap in [DEFAULT_GAP_THRESHOLD_SLOTS, 5] {
        let topics = split_semantic_cluster(&cluster, 4, &usage, gap)?;
        println!("gap threshold {gap}: {} topic(s)", topics.len());
        for t in topics {
            let members: Vec<&str> = t.members.iter().map(HashtagId::as_str).collect();
            println!(
                "  {} active {:?}..{:?}: {}",
                t.topic_id,
                t.first_active_slot,
                t.last_active_slot,
                members.join(", ")
            );
        }
    }
    Ok(())
}
