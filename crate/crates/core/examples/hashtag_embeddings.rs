//! Embeds hashtags as the mean word vector of their tweets and compares
//! them by cosine similarity. Uses the default synthetic corpus.

use std::collections::BTreeSet;

use topic_lifecycle::corpus::HashtagId;
use topic_lifecycle::embedding::{build_documents, cosine_similarity, embed_all, DivisorMode, EmbeddingLexicon};
use topic_lifecycle::synth::{generate, SynthSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SynthSpec::default();
    let corpus = generate(&spec)?;
    let lexicon = EmbeddingLexicon::from_vectors(spec.lexicon_dimension, corpus.lexicon.clone())?;

    let tags: BTreeSet<HashtagId> = corpus.truth.true_topics.keys().cloned().collect();
    let docs = build_documents(&tags, &corpus.tweets);
    let set = embed_all(&docs, &lexicon, DivisorMode::Covered);
    for (tag, e) in &set.embeddings {
        println!(
            "#{tag:<15} {} tokens, {} covered",
            docs[tag].token_count(),
            e.covered_tokens
        );
    }

    let names: Vec<&HashtagId> = set.embeddings.keys().collect();
    print!("{:>15}", "");
    for n in &names {
        print!("{:>15}", n.as_str());
    }
    println!();
    for a in &names {
        print!("{:>15}", a.as_str());
        for b in &names {
            let cos = cosine_similarity(&set.embeddings[*a].vector, &set.embeddings[*b].vector)?;
            print!("{cos:>15.3}");
        }
        println!();
    }
    Ok(())
}
