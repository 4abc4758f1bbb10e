//! Runs every stage on a synthetic corpus and scores the recovered
//! communities, topics and morph events against the planted ones.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;

use topic_lifecycle::community::read_partition_csv;
use topic_lifecycle::eval::{adjusted_rand_index, majority_mapping, paired_labels, purity};
use topic_lifecycle::pipeline::{write_synthetic, Pipeline, PipelineConfig};
use topic_lifecycle::synth::{GroundTruth, SynthSpec};
use topic_lifecycle::temporal::read_topics_csv;
use topic_lifecycle::timeline::{LifecycleReport, Scope};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let spec = SynthSpec::default();
    let config_path = write_synthetic(&spec, dir.path())?;
    let pipeline = Pipeline::new(PipelineConfig::from_toml_file(&config_path)?)?;
    for (stage, status) in pipeline.all(None)? {
        println!("{stage}: {}", status.as_str());
    }
    let truth = GroundTruth::from_spec(&spec);
    let k = spec.topics.len();

    let partition = read_partition_csv(File::open(pipeline.communities_dir().join("partition.csv"))?)?;
    let (t, p) = paired_labels(&truth.true_partition, partition.assignment());
    println!("community ARI {:.3}", adjusted_rand_index(&t, &p));
    let to_true = majority_mapping(&t, &p);

    let topics = read_topics_csv(File::open(pipeline.split_dir(k).join("topics.csv"))?)?;
    let found: BTreeMap<_, usize> = topics
        .iter()
        .enumerate()
        .flat_map(|(i, tc)| tc.members.iter().map(move |h| (h.clone(), i)))
        .collect();
    let (t, p) = paired_labels(&truth.true_topics, &found);
    println!("topic purity {:.3}", purity(&t, &p));

    let report: LifecycleReport = serde_json::from_reader(File::open(pipeline.report_dir(k).join("lifecycle_report.json"))?)?;
    let recovered: BTreeSet<_> = report
        .morphs
        .iter()
        .filter_map(|m| match m.scope {
            Scope::Community(c) => Some((to_true[&c], m.slot_from, m.slot_to, m.dominant_from.clone(), m.dominant_to.clone())),
            Scope::Overall => None,
        })
        .collect();
    let planted: BTreeSet<_> = truth
        .true_morphs
        .iter()
        .map(|m| (m.community, m.slot_from, m.slot_to, m.from.clone(), m.to.clone()))
        .collect();
    println!(
        "morphs: {} planted, {} recovered, {} matching",
        planted.len(),
        recovered.len(),
        planted.intersection(&recovered).count()
    );
    for c in &report.contrasts {
        println!(
            "{}: alive in {:?}, died in {:?}, never active in {:?}",
            c.topic_id,
            c.alive_in.iter().map(Scope::to_string).collect::<Vec<_>>(),
            c.died_in.iter().map(|d| format!("{} at {}", d.scope, d.death_slot)).collect::<Vec<_>>(),
            c.never_active_in.iter().map(Scope::to_string).collect::<Vec<_>>()
        );
    }
    Ok(())
}
