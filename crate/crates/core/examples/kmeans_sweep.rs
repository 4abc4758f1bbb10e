//! Sweeps k for spherical k-means over synthetic hashtag embeddings and
//! prints the objective for each k.

use std::collections::BTreeSet;

use topic_lifecycle::clustering::{sweep_k_with, KMeansConfig};
use topic_lifecycle::corpus::HashtagId;
use topic_lifecycle::embedding::{build_documents, embed_all, DivisorMode, EmbeddingLexicon};
use topic_lifecycle::eval::{paired_labels, purity};
use topic_lifecycle::synth::{generate, SynthSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SynthSpec::default();
    let corpus = generate(&spec)?;
    let lexicon = EmbeddingLexicon::from_vectors(spec.lexicon_dimension, corpus.lexicon.clone())?;
    let tags: BTreeSet<HashtagId> = corpus.truth.true_topics.keys().cloned().collect();
    let embeddings = embed_all(&build_documents(&tags, &corpus.tweets), &lexicon, DivisorMode::Covered).vectors();

    let base = KMeansConfig::new(1, 0);
    for (k, run) in sweep_k_with(&embeddings, &[1, 2, 3, 4, 5, 6], &base, 5) {
        let run = run?;
        let (truth, predicted) = paired_labels(&corpus.truth.true_topics, &run.assignments());
        println!(
            "k = {k}: objective {:.4} after {} iterations, purity {:.2}",
            run.objective(),
            run.iterations,
            purity(&truth, &predicted)
        );
        if k == spec.topics.len() {
            for c in &run.clusters {
                let members: Vec<&str> = c.members.iter().map(HashtagId::as_str).collect();
                println!("    cluster {}: {}", c.cluster_id, members.join(", "));
            }
        }
    }
    Ok(())
}
