//! Writes the default synthetic corpus, its ground truth and a pipeline
//! config into a directory.
//!
//! ```text
//! cargo run --example synthetic_corpus -- /tmp/synthetic 42
//! ```

use std::env;
use std::path::PathBuf;

use topic_lifecycle::pipeline::write_synthetic;
use topic_lifecycle::synth::{GroundTruth, SynthSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = env::args().skip(1);
    let dir = args.next().map_or_else(|| env::temp_dir().join("topic-lifecycle-synthetic"), PathBuf::from);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    let spec = SynthSpec::default().with_seed(seed);

    let config = write_synthetic(&spec, &dir)?;
    let truth = GroundTruth::from_spec(&spec);
    println!("wrote corpus to {}", dir.display());
    println!("{} users in {} communities", truth.true_partition.len(), spec.communities.len());
    println!("planted morphs:");
    for m in &truth.true_morphs {
        println!("  community {} topic {}: #{} -> #{} at {} -> {}", m.community, m.topic, m.from, m.to, m.slot_from, m.slot_to);
    }
    for d in &truth.true_deaths {
        println!("planted death: community {} topic {} at slot {}", d.community, d.topic, d.death_slot);
    }
    for s in &truth.never_active {
        println!("never active: community {} topic {}", s.community, s.topic);
    }
    println!("run: topic-lifecycle --config {} all", config.display());
    Ok(())
}
