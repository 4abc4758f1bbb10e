//! Acceptance run: one PASS/FAIL/SKIP line per criterion, each timed against
//! its budget. Built without the libtest harness so lines print in order;
//! the process exits non-zero when any criterion fails.
//!
//! Criterion 7 needs the twitter7 June 2009 tweet file. Point
//! `TWITTER7_TWEETS` at it (plain or gzipped) to enable it.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use topic_lifecycle::clustering::{kmeans_best_of, kmeans_cluster, KMeansConfig};
use topic_lifecycle::community::{louvain, modularity, read_partition_csv, LouvainConfig, Partition};
use topic_lifecycle::corpus::{HashtagId, SocialGraph, Slotting, Tweet};
use topic_lifecycle::embedding::{cosine_similarity, embed_hashtag, DivisorMode, EmbeddingLexicon, HashtagDocument};
use topic_lifecycle::eval::{adjusted_rand_index, majority_mapping, paired_labels, purity};
use topic_lifecycle::pipeline::{write_synthetic, IngestSummary, Pipeline, PipelineConfig};
use topic_lifecycle::synth::{generate, GroundTruth, SynthSpec};
use topic_lifecycle::temporal::{read_topics_csv, temporal_components, TopicCluster, UsageSeries};
use topic_lifecycle::timeline::{
    build_hashtag_timeline, HashtagTimeline, HashtagUsageRecord, LifecycleReport, Scope, TimelineSpec,
};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

type AverageCase<'a> = (&'a [&'a str], Vec<(&'a str, Vec<f32>)>, [f64; 2]);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($msg)+));
        }
    };
}

fn tag(s: &str) -> HashtagId {
    HashtagId::new(s).unwrap()
}

fn topic(id: &str, members: &[&str]) -> TopicCluster {
    TopicCluster {
        topic_id: id.to_string(),
        members: members.iter().map(|m| tag(m)).collect(),
        source_semantic_cluster: 0,
        first_active_slot: None,
        last_active_slot: None,
    }
}

fn doc(tokens: &[&str]) -> HashtagDocument {
    HashtagDocument {
        hashtag: tag("h"),
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
        tweet_count: 1,
    }
}

fn lexicon(dim: usize, entries: &[(&str, Vec<f32>)]) -> EmbeddingLexicon {
    EmbeddingLexicon::from_vectors(dim, entries.iter().map(|(w, v)| (w.to_string(), v.clone()))).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

// Criterion 1

#[allow(clippy::approx_constant)]
fn formula_suite() -> Check {
    let mut checked = 0;

    // Averaging: hand examples.
    let cases: [AverageCase; 3] = [
        (&["cat"], vec![("cat", vec![2.0, 4.0])], [2.0, 4.0]),
        (&["cat", "dog"], vec![("cat", vec![0.0, 0.0]), ("dog", vec![2.0, 4.0])], [1.0, 2.0]),
        (&["cat", "cat", "dog"], vec![("cat", vec![0.0, 0.0]), ("dog", vec![3.0, 3.0])], [1.0, 1.0]),
    ];
    for (tokens, entries, want) in cases {
        let got = embed_hashtag(&doc(tokens), &lexicon(2, &entries), DivisorMode::Covered).unwrap();
        ensure!(got.vector == want, "average of {tokens:?} = {:?}, expected {want:?}", got.vector);
        checked += 1;
    }

    // Averaging: convex hull and repetition weighting on random documents.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let words: Vec<String> = (0..10).map(|i| format!("w{i}")).collect();
    for _ in 0..200 {
        let mut entries: Vec<(String, Vec<f32>)> = Vec::new();
        for w in &words {
            if rng.random_bool(0.7) {
                entries.push((w.clone(), (0..3).map(|_| rng.random_range(-5.0f32..5.0)).collect()));
            }
        }
        if entries.is_empty() {
            continue;
        }
        let lex = EmbeddingLexicon::from_vectors(3, entries.clone()).unwrap();
        let vectors: BTreeMap<&str, &Vec<f32>> = entries.iter().map(|(w, v)| (w.as_str(), v)).collect();
        let tokens: Vec<&str> = (0..rng.random_range(1..12)).map(|_| words[rng.random_range(0..10)].as_str()).collect();
        let covered: Vec<&Vec<f32>> = tokens.iter().filter_map(|t| vectors.get(t).copied()).collect();
        let Ok(got) = embed_hashtag(&doc(&tokens), &lex, DivisorMode::Covered) else {
            ensure!(covered.is_empty(), "coverage reported missing for {tokens:?}");
            continue;
        };
        let mean: Vec<f64> = (0..3)
            .map(|d| covered.iter().map(|v| f64::from(v[d])).sum::<f64>() / covered.len() as f64)
            .collect();
        ensure!(close(&got.vector, &mean, 1e-9), "weighted mean mismatch for {tokens:?}");
        for d in 0..3 {
            let lo = covered.iter().map(|v| f64::from(v[d])).fold(f64::INFINITY, f64::min);
            let hi = covered.iter().map(|v| f64::from(v[d])).fold(f64::NEG_INFINITY, f64::max);
            ensure!(got.vector[d] >= lo - 1e-9 && got.vector[d] <= hi + 1e-9, "outside convex hull");
        }
        checked += 1;
    }

    // Cosine.
    for _ in 0..100 {
        let v: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
        ensure!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12, "cos(v, v) != 1");
    }
    ensure!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap() == 0.0, "orthogonal cosine not 0");
    let c = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
    ensure!((c - 0.7071).abs() <= 1e-4, "cos([1,1],[1,0]) = {c}");
    ensure!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).is_err(), "zero vector accepted");
    checked += 103;

    // Dominant hashtag and intensity: hand tables.
    let record = |slot: u32, h: &str, n: u64| HashtagUsageRecord {
        scope: Scope::Overall,
        timeslot: slot,
        hashtag: tag(h),
        topic_id: Some("t".into()),
        usage_count: n,
    };
    let topics = [topic("t", &["a", "b"])];
    let t = HashtagTimeline::from_records(
        3,
        [],
        &topics,
        [record(0, "a", 5), record(0, "b", 3), record(1, "a", 4), record(1, "b", 4)],
    );
    ensure!(t.dominant_hashtag("t", Scope::Overall, 0).unwrap() == Some(tag("a")), "{{a:5,b:3}} dominant");
    ensure!(t.dominant_hashtag("t", Scope::Overall, 1).unwrap() == Some(tag("a")), "{{a:4,b:4}} tie-break");
    ensure!(t.dominant_hashtag("t", Scope::Overall, 2).unwrap().is_none(), "all-zero slot has a dominant");
    let t2 = HashtagTimeline::from_records(2, [], &topics, [record(0, "a", 2), record(0, "b", 3)]);
    ensure!(t2.topic_intensity("t", Scope::Overall, 0).unwrap() == 5, "{{a:2,b:3}} intensity");
    ensure!(t2.topic_intensity("t", Scope::Overall, 1).unwrap() == 0, "empty slot intensity");
    checked += 5;

    // Argmax bound and additivity on random tables.
    let members = ["a", "b", "c", "d"];
    let topics = [topic("t", &members)];
    for _ in 0..200 {
        let table: Vec<[u64; 4]> = (0..4).map(|_| std::array::from_fn(|_| rng.random_range(0..6))).collect();
        let records = table.iter().enumerate().flat_map(|(s, row)| {
            members.iter().zip(row).map(move |(h, &n)| record(s as u32, h, n))
        });
        let t = HashtagTimeline::from_records(4, [], &topics, records.collect::<Vec<_>>());
        for (s, row) in table.iter().enumerate() {
            let s32 = s as u32;
            ensure!(t.topic_intensity("t", Scope::Overall, s32).unwrap() == row.iter().sum::<u64>(), "additivity");
            let max = *row.iter().max().unwrap();
            match t.dominant_hashtag("t", Scope::Overall, s32).unwrap() {
                None => ensure!(max == 0, "missing dominant"),
                Some(d) => {
                    let i = members.iter().position(|m| *m == d.as_str()).unwrap();
                    ensure!(row[i] == max && row.iter().position(|&x| x == max) == Some(i), "argmax bound");
                }
            }
        }
        checked += 1;
    }
    Ok(format!("{checked} formula checks"))
}

// Criterion 2

fn oracle_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let name = |i: usize| tag(&format!("h{i:02}"));
    for case in 0..200 {
        let n = rng.random_range(1..=12);
        let slots = rng.random_range(1..=30);
        let gap = rng.random_range(0..=4);
        let density = rng.random_range(0.02..0.4);
        let counts: Vec<Vec<u64>> = (0..n)
            .map(|_| (0..slots).map(|_| u64::from(rng.random_bool(density)) * rng.random_range(1..4)).collect())
            .collect();
        let series: BTreeMap<HashtagId, UsageSeries> =
            (0..n).map(|i| (name(i), UsageSeries::new(name(i), counts[i].clone()))).collect();
        let members: BTreeSet<HashtagId> = (0..n).map(name).collect();
        let got: BTreeSet<BTreeSet<usize>> = temporal_components(&members, &series, gap)
            .unwrap()
            .into_iter()
            .map(|c| c.iter().map(|h| h.as_str()[1..].parse().unwrap()).collect())
            .collect();
        let want = common::closure_components(n, |i, j| common::slots_within(&counts[i], &counts[j], gap));
        ensure!(got == want, "temporal case {case} differs from closure");
    }

    let graph = |n: usize, edges: &[(usize, usize)]| {
        SocialGraph::from_edges(
            (0..n).map(common::node_name),
            edges.iter().map(|&(a, b)| (common::node_name(a), common::node_name(b))),
        )
    };
    let labelled = |labels: &[usize]| {
        Partition::from_labels(labels.iter().enumerate().map(|(i, &l)| (common::node_name(i), l)))
    };
    let triangles = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)];
    let mut bridged = triangles.to_vec();
    bridged.push((2, 3));
    let q_whole = modularity(&graph(6, &triangles), &labelled(&[0; 6])).unwrap();
    let q_two = modularity(&graph(6, &triangles), &labelled(&[0, 0, 0, 1, 1, 1])).unwrap();
    let q_bridge = modularity(&graph(6, &bridged), &labelled(&[0, 0, 0, 1, 1, 1])).unwrap();
    ensure!(q_whole.abs() <= 1e-9, "single community Q = {q_whole}");
    ensure!((q_two - 0.5).abs() <= 1e-9, "two triangles Q = {q_two}");
    // m = 7; each side holds 3 edges and degree 7: 2 * (3/7 - (7/14)^2).
    ensure!((q_bridge - (6.0 / 7.0 - 0.5)).abs() <= 1e-9, "bridged triangles Q = {q_bridge}");
    ensure!((q_bridge - 0.357).abs() < 1e-3, "bridged triangles Q = {q_bridge}");

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst = f64::INFINITY;
    let mut graphs = 0;
    while graphs < 50 {
        let n = rng.random_range(3..=8);
        let p = rng.random_range(0.2..0.7);
        let edges = common::random_graph(&mut rng, n, p);
        if edges.is_empty() {
            continue;
        }
        graphs += 1;
        let q = louvain(&graph(n, &edges), &LouvainConfig::default()).unwrap().modularity.unwrap();
        let best = common::best_modularity(n, &edges);
        ensure!(q >= 0.95 * best - 1e-12, "Louvain Q {q} < 0.95 x optimum {best} on {edges:?}");
        if best > 1e-9 {
            worst = worst.min(q / best);
        }
    }
    Ok(format!(
        "200 closure instances, Q hand values, Louvain worst ratio {worst:.3} over {graphs} graphs"
    ))
}

// Criterion 3

fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> BTreeMap<HashtagId, Vec<f64>> {
    (0..n)
        .map(|i| {
            let v = loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                if v.iter().any(|x| x.abs() > 1e-3) {
                    break v;
                }
            };
            (tag(&format!("p{i:03}")), v)
        })
        .collect()
}

fn kmeans_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in 0..100u64 {
        let n = rng.random_range(2..60);
        let k = rng.random_range(1..=n.min(8));
        let dim = rng.random_range(2..6);
        let points = random_points(&mut rng, n, dim);
        let config = KMeansConfig::new(k, case);
        let c = kmeans_cluster(&points, &config).unwrap();
        ensure!(
            c.objective_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9),
            "case {case}: trace decreases {:?}",
            c.objective_trace
        );
        let mut seen = BTreeSet::new();
        for cl in &c.clusters {
            for h in &cl.members {
                ensure!(seen.insert(h.clone()), "case {case}: {h} assigned twice");
            }
        }
        ensure!(seen.len() == n && c.clusters.len() == k, "case {case}: not a partition");
        ensure!(kmeans_cluster(&points, &config).unwrap() == c, "case {case}: seed not deterministic");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(97);
    let mut worst = f64::INFINITY;
    for case in 0..30 {
        let n = rng.random_range(3..=10);
        let k = rng.random_range(1..=3.min(n));
        let points = random_points(&mut rng, n, 3);
        let c = kmeans_best_of(&points, &KMeansConfig::new(k, 0), 10).unwrap();
        let assignment: Vec<usize> = points.keys().map(|h| c.cluster_of(h).unwrap()).collect();
        let ordered: Vec<Vec<f64>> = points.values().cloned().collect();
        let got = common::objective_of(&ordered, &assignment, k);
        let best = common::best_spherical_objective(&ordered, k);
        ensure!(got >= 0.999 * best, "case {case}: {got} < 0.999 x {best} (n={n}, k={k})");
        worst = worst.min(got / best);
    }
    Ok(format!("100 instances monotone, partitioned, deterministic; best-of-10 worst ratio {worst:.4} over 30"))
}

// Criterion 4

struct Recovery {
    ari: f64,
    purity: f64,
    precision: f64,
    recall: f64,
    contrasts: bool,
}

fn recover(seed: u64) -> Result<Recovery, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = SynthSpec::default().with_seed(seed);
    let config = write_synthetic(&spec, dir.path()).map_err(|e| e.to_string())?;
    let pipeline = Pipeline::new(PipelineConfig::from_toml_file(&config).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    pipeline.all(None).map_err(|e| e.to_string())?;
    let truth = GroundTruth::from_spec(&spec);
    let k = spec.topics.len();

    let partition = read_partition_csv(File::open(pipeline.communities_dir().join("partition.csv")).unwrap()).unwrap();
    let (t, p) = paired_labels(&truth.true_partition, partition.assignment());
    let ari = adjusted_rand_index(&t, &p);
    let community_to_true = majority_mapping(&t, &p);

    let topics = read_topics_csv(File::open(pipeline.split_dir(k).join("topics.csv")).unwrap()).unwrap();
    let found: BTreeMap<HashtagId, usize> = topics
        .iter()
        .enumerate()
        .flat_map(|(i, tc)| tc.members.iter().map(move |h| (h.clone(), i)))
        .collect();
    let (t, p) = paired_labels(&truth.true_topics, &found);
    let purity = purity(&t, &p);
    let topic_index: BTreeMap<&str, usize> = topics.iter().enumerate().map(|(i, tc)| (tc.topic_id.as_str(), i)).collect();
    let topic_to_true = majority_mapping(&t, &p);

    let report: LifecycleReport =
        serde_json::from_reader(File::open(pipeline.report_dir(k).join("lifecycle_report.json")).unwrap()).unwrap();
    let map_scope = |s: Scope| match s {
        Scope::Community(c) => community_to_true.get(&c).copied(),
        Scope::Overall => None,
    };
    let map_topic = |id: &str| topic_index.get(id).and_then(|i| topic_to_true.get(i)).copied();

    let recovered: Vec<_> = report
        .morphs
        .iter()
        .filter(|m| m.scope != Scope::Overall)
        .map(|m| {
            (
                map_scope(m.scope),
                map_topic(&m.topic_id),
                m.slot_from,
                m.slot_to,
                m.dominant_from.clone(),
                m.dominant_to.clone(),
            )
        })
        .collect();
    let planted: BTreeSet<_> = truth
        .true_morphs
        .iter()
        .map(|m| (Some(m.community), Some(m.topic), m.slot_from, m.slot_to, m.from.clone(), m.to.clone()))
        .collect();
    let hits = recovered.iter().filter(|m| planted.contains(m)).count();
    let distinct: BTreeSet<_> = recovered.iter().cloned().collect();
    let precision = if recovered.is_empty() { 1.0 } else { hits as f64 / recovered.len() as f64 };
    let recall = if planted.is_empty() { 1.0 } else { planted.intersection(&distinct).count() as f64 / planted.len() as f64 };

    // Every planted death shows up as a community death, contrasted with a
    // scope where the topic lives on; every silent pair as never-active.
    let deaths: BTreeSet<_> = report
        .deaths
        .iter()
        .filter(|d| d.scope != Scope::Overall)
        .map(|d| (map_scope(d.scope), map_topic(&d.topic_id), d.death_slot))
        .collect();
    let want_deaths: BTreeSet<_> = truth
        .true_deaths
        .iter()
        .map(|d| (Some(d.community), Some(d.topic), d.death_slot))
        .collect();
    let mut contrasts = deaths == want_deaths;
    for d in &truth.true_deaths {
        contrasts &= report.contrasts.iter().any(|c| {
            map_topic(&c.topic_id) == Some(d.topic)
                && c.died_in.iter().any(|e| map_scope(e.scope) == Some(d.community) && e.death_slot == d.death_slot)
                && c.alive_in.iter().any(|s| matches!(s, Scope::Community(_)))
        });
    }
    for s in &truth.never_active {
        contrasts &= report.contrasts.iter().any(|c| {
            map_topic(&c.topic_id) == Some(s.topic) && c.never_active_in.iter().any(|&x| map_scope(x) == Some(s.community))
        });
    }
    Ok(Recovery {
        ari,
        purity,
        precision,
        recall,
        contrasts,
    })
}

fn synthetic_recovery() -> Check {
    let seeds: Vec<u64> = (0..5).map(|i| SynthSpec::default().seed + i).collect();
    let runs: Vec<Recovery> = seeds.iter().map(|&s| recover(s)).collect::<Result<_, _>>()?;
    let mean = |f: fn(&Recovery) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    let (ari, pur, prec, rec) = (mean(|r| r.ari), mean(|r| r.purity), mean(|r| r.precision), mean(|r| r.recall));
    let detail = format!("seeds {seeds:?}: ARI {ari:.3}, purity {pur:.3}, morph precision {prec:.3}, recall {rec:.3}");
    ensure!(ari >= 0.9, "{detail}: ARI below 0.9");
    ensure!(pur >= 0.9, "{detail}: purity below 0.9");
    ensure!(prec == 1.0 && rec == 1.0, "{detail}: morph events not exactly recovered");
    let missing: Vec<u64> = seeds.iter().zip(&runs).filter(|(_, r)| !r.contrasts).map(|(s, _)| *s).collect();
    ensure!(missing.is_empty(), "{detail}: death/alive contrast missing for seeds {missing:?}");
    Ok(format!("{detail}, contrasts reproduced"))
}

// Criterion 5

fn conservation_holds(t: &HashtagTimeline, expect_equal: bool) -> Result<usize, String> {
    let communities: Vec<Scope> = t.scopes().filter(|s| *s != Scope::Overall).collect();
    let cells: BTreeSet<(HashtagId, u32)> = t.records().into_iter().map(|r| (r.hashtag, r.timeslot)).collect();
    for (h, s) in &cells {
        let overall = t.usage(Scope::Overall, h, *s);
        let parts: u64 = communities.iter().map(|&c| t.usage(c, h, *s)).sum();
        ensure!(overall >= parts, "{h} slot {s}: overall {overall} < communities {parts}");
        ensure!(!expect_equal || overall == parts, "{h} slot {s}: overall {overall} != communities {parts}");
    }
    Ok(cells.len())
}

fn timeline_for(tweets: &[Tweet], partition: &Partition, slots: usize, min_size: usize) -> HashtagTimeline {
    let epoch = Utc.with_ymd_and_hms(2009, 6, 11, 0, 0, 0).unwrap();
    let hashtags: BTreeSet<HashtagId> = tweets.iter().flat_map(|t| t.hashtags.iter().cloned()).collect();
    build_hashtag_timeline(
        tweets,
        &TimelineSpec {
            slotting: Slotting::new(epoch, chrono::Duration::hours(24)).unwrap(),
            slot_count: slots,
            partition,
            min_community_size: min_size,
            topics: &[],
            hashtags: &hashtags,
        },
    )
}

fn conservation_suite() -> Check {
    let epoch = Utc.with_ymd_and_hms(2009, 6, 11, 0, 0, 0).unwrap();
    let at = |slot: i64| epoch + chrono::Duration::hours(24 * slot + 5);
    let mut cells = 0;

    // u1 in C0 uses x three times in slot 2; u9 is unassigned.
    let partition = Partition::from_labels([("u1", 0), ("u2", 1)]);
    let tweets = vec![
        Tweet::new(0, "u1", at(2), "#x #x"),
        Tweet::new(1, "u1", at(2), "#x"),
        Tweet::new(2, "u2", at(2), "#x"),
        Tweet::new(3, "u9", at(2), "#x"),
        Tweet::new(4, "u2", at(1), "#y"),
    ];
    let t = timeline_for(&tweets, &partition, 4, 1);
    ensure!(t.usage(Scope::Community(0), &tag("x"), 2) == 3, "C0 count for x");
    ensure!(t.usage(Scope::Community(1), &tag("x"), 2) == 1, "C1 count for x");
    ensure!(t.usage(Scope::Overall, &tag("x"), 2) == 5, "overall count for x");
    cells += conservation_holds(&t, false)?;
    let assigned: Vec<Tweet> = tweets.iter().filter(|t| t.author != "u9").cloned().collect();
    cells += conservation_holds(&timeline_for(&assigned, &partition, 4, 1), true)?;

    // Random fixtures, with and without unassigned or under-floor users.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for all_assigned in [false, true] {
        for _ in 0..100 {
            let users = rng.random_range(2..20);
            let mut labels: Vec<(String, usize)> = Vec::new();
            for u in 0..users {
                if all_assigned || rng.random_bool(0.7) {
                    labels.push((format!("u{u}"), rng.random_range(0..4)));
                }
            }
            let partition = Partition::from_labels(labels);
            let tweets: Vec<Tweet> = (0..rng.random_range(0..60))
                .map(|i| {
                    let tags: Vec<String> = (0..rng.random_range(1..4)).map(|_| format!("#t{}", rng.random_range(0..5))).collect();
                    Tweet::new(i, format!("u{}", rng.random_range(0..users)), at(rng.random_range(0..6)), tags.join(" "))
                })
                .collect();
            let min_size = if all_assigned { 1 } else { rng.random_range(1..4) };
            cells += conservation_holds(&timeline_for(&tweets, &partition, 6, min_size), all_assigned)?;
        }
    }

    // The synthetic corpus with its planted partition: everyone assigned.
    let spec = SynthSpec::default();
    let corpus = generate(&spec).map_err(|e| e.to_string())?;
    let partition = Partition::from_labels(corpus.truth.true_partition.clone());
    cells += conservation_holds(&timeline_for(&corpus.tweets, &partition, spec.slot_count as usize, 10), true)?;
    Ok(format!("{cells} (hashtag, slot) cells over 203 fixtures"))
}

// Criterion 6

const BIN: &str = env!("CARGO_BIN_EXE_topic-lifecycle");

fn run_bin(args: &[&str]) -> Result<(), String> {
    let out = Command::new(BIN).args(args).output().map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().to_str().unwrap();
    run_bin(&["synth", "--out", root])?;
    let config = format!("{root}/pipeline.toml");
    let output = dir.path().join("output");
    run_bin(&["--config", &config, "all"])?;
    let first = common::snapshot(&output);
    std::fs::remove_dir_all(&output).map_err(|e| e.to_string())?;
    run_bin(&["--config", &config, "all"])?;
    let second = common::snapshot(&output);
    let differing: Vec<&String> = first
        .keys()
        .chain(second.keys())
        .filter(|k| first.get(*k) != second.get(*k))
        .collect();
    ensure!(differing.is_empty(), "artifacts differ: {differing:?}");
    let bytes: usize = first.values().map(Vec::len).sum();
    Ok(format!("{} artifacts ({bytes} bytes) identical across two runs", first.len()))
}

// Criterion 7

fn dataset_check() -> Verdict {
    let Some(path) = std::env::var_os("TWITTER7_TWEETS").map(PathBuf::from) else {
        return Verdict::Skip(
            "twitter7 corpus not available; set TWITTER7_TWEETS to the June 2009 tweet file to run it".into(),
        );
    };
    if !path.is_file() {
        return Verdict::Fail(format!("TWITTER7_TWEETS={} is not a file", path.display()));
    }
    match table_one(&path) {
        Ok(detail) => Verdict::Pass(detail),
        Err(e) => Verdict::Fail(e),
    }
}

fn table_one(tweets: &Path) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = PipelineConfig {
        tweets: Some(tweets.to_path_buf()),
        output_dir: dir.path().to_path_buf(),
        window_start: Some(Utc.with_ymd_and_hms(2009, 6, 11, 0, 0, 0).unwrap()),
        window_end: Some(Utc.with_ymd_and_hms(2009, 7, 1, 0, 0, 0).unwrap()),
        ..PipelineConfig::default()
    };
    let pipeline = Pipeline::new(config).map_err(|e| e.to_string())?;
    pipeline.ingest().map_err(|e| e.to_string())?;
    let summary: IngestSummary =
        serde_json::from_reader(File::open(pipeline.ingest_dir().join("summary.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let c = &summary.corpus;
    let detail = format!(
        "{} hashtags, {} tweets, {} users, {:.3} tweets/user",
        c.retained_hashtags, c.retained_tweets, c.retained_users, c.avg_tweets_per_user
    );
    ensure!(
        c.retained_hashtags == 4_244
            && c.retained_tweets == 471_470
            && c.retained_users == 158_118
            && (c.avg_tweets_per_user - 2.98).abs() <= 0.01,
        "{detail}; expected 4244 hashtags, 471470 tweets, 158118 users, 2.98 tweets/user"
    );
    Ok(detail)
}

fn run(n: u32, title: &str, limit: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Verdict::Fail(format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let timing = format!("{:.2}s, budget {}s", elapsed.as_secs_f64(), limit.as_secs());
    let (label, detail, ok) = match verdict {
        Verdict::Pass(d) if elapsed <= limit => ("PASS", d, true),
        Verdict::Pass(d) => ("FAIL", format!("{d}; over time budget"), false),
        Verdict::Fail(d) => ("FAIL", d, false),
        Verdict::Skip(d) => ("SKIP", d, true),
    };
    println!("criterion {n} [{title}]: {label} ({timing}) {detail}");
    ok
}

fn verdict(check: Check) -> Verdict {
    match check {
        Ok(d) => Verdict::Pass(d),
        Err(e) => Verdict::Fail(e),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "formula suite", secs(5), || verdict(formula_suite())),
        run(2, "oracle equivalence", secs(60), || verdict(oracle_suite())),
        run(3, "k-means properties", secs(60), || verdict(kmeans_suite())),
        run(4, "synthetic end-to-end recovery", secs(120), || verdict(synthetic_recovery())),
        run(5, "timeline conservation", secs(5), || verdict(conservation_suite())),
        run(6, "determinism", secs(120), || verdict(determinism())),
        run(7, "twitter7 corpus statistics", secs(3600), dataset_check),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} of {} criteria without failure", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
