//! Louvain on a planted-partition follower graph, scored against the
//! planted communities.

use std::collections::BTreeSet;

use topic_lifecycle::community::{louvain, LouvainConfig};
use topic_lifecycle::corpus::SocialGraph;
use topic_lifecycle::eval::{adjusted_rand_index, paired_labels};
use topic_lifecycle::synth::{generate, CommunitySpec, SynthSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SynthSpec {
        communities: vec![
            CommunitySpec {
                size: 40,
                intra_edge_prob: 0.3,
                inter_edge_prob: 0.01,
            };
            4
        ],
        topics: Vec::new(),
        ..SynthSpec::default()
    };
    let corpus = generate(&spec)?;
    let users: BTreeSet<&str> = corpus.truth.true_partition.keys().map(String::as_str).collect();
    let graph = SocialGraph::from_edges(users, corpus.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())));
    println!("{} users, {} edges", graph.node_count(), graph.edge_count());

    for seed in 0..3 {
        let outcome = louvain(&graph, &LouvainConfig { seed, ..LouvainConfig::default() })?;
        let (truth, found) = paired_labels(&corpus.truth.true_partition, outcome.partition.assignment());
        println!(
            "seed {seed}: {} communities, Q = {:.4}, levels {:?}, ARI = {:.3}",
            outcome.partition.community_count(),
            outcome.modularity.unwrap_or(0.0),
            outcome.level_modularity.iter().map(|q| format!("{q:.3}")).collect::<Vec<_>>(),
            adjusted_rand_index(&truth, &found)
        );
    }
    Ok(())
}
