//! Spherical k-means over hashtag embeddings.
//!
//! Points and centroids live on the unit sphere and a point is assigned to
//! the centroid with the highest cosine similarity. The objective is the sum
//! of those similarities and is maximized.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::HashtagId;
use crate::embedding::{dot, norm};

/// The k values swept by default.
pub const DEFAULT_K_VALUES: [usize; 10] = [200, 400, 600, 800, 1000, 1200, 1400, 1600, 1800, 2000];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusteringError {
    #[error("no points to cluster")]
    Empty,
    #[error("k must be positive")]
    ZeroK,
    #[error("k = {k} exceeds the number of points ({points})")]
    TooFewPoints { k: usize, points: usize },
    #[error("vector for {hashtag} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        hashtag: HashtagId,
        expected: usize,
        found: usize,
    },
    #[error("vector for {0} has zero norm")]
    ZeroNorm(HashtagId),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            seed,
            max_iterations: 100,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticCluster {
    pub cluster_id: usize,
    pub members: BTreeSet<HashtagId>,
    pub centroid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    pub seed: u64,
    pub clusters: Vec<SemanticCluster>,
    /// Objective after each assignment step or single-point refinement pass.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Clustering {
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(0.0)
    }

    pub fn cluster_of(&self, hashtag: &HashtagId) -> Option<usize> {
        self.clusters
            .iter()
            .find(|c| c.members.contains(hashtag))
            .map(|c| c.cluster_id)
    }

    /// `hashtag -> cluster_id` for every clustered hashtag.
    pub fn assignments(&self) -> BTreeMap<HashtagId, usize> {
        self.clusters
            .iter()
            .flat_map(|c| c.members.iter().map(move |h| (h.clone(), c.cluster_id)))
            .collect()
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

fn prepare(
    embeddings: &BTreeMap<HashtagId, Vec<f64>>,
    k: usize,
) -> Result<(Vec<&HashtagId>, Vec<Vec<f64>>), ClusteringError> {
    if k == 0 {
        return Err(ClusteringError::ZeroK);
    }
    let Some(first) = embeddings.values().next() else {
        return Err(ClusteringError::Empty);
    };
    if k > embeddings.len() {
        return Err(ClusteringError::TooFewPoints {
            k,
            points: embeddings.len(),
        });
    }
    let dim = first.len();
    let mut names = Vec::with_capacity(embeddings.len());
    let mut points = Vec::with_capacity(embeddings.len());
    for (h, v) in embeddings {
        if v.len() != dim {
            return Err(ClusteringError::DimensionMismatch {
                hashtag: h.clone(),
                expected: dim,
                found: v.len(),
            });
        }
        let n = norm(v);
        if n.is_nan() || n <= 0.0 {
            return Err(ClusteringError::ZeroNorm(h.clone()));
        }
        names.push(h);
        points.push(unit(v));
    }
    Ok((names, points))
}

/// k-means++ seeding with `1 - cos` as the distance.
fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut dist: Vec<f64> = points
        .iter()
        .map(|p| (1.0 - dot(p, &points[chosen[0]])).max(0.0))
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &d) in dist.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(i);
                    if target < d {
                        break;
                    }
                    target -= d;
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            // All remaining points coincide with a chosen centroid.
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min((1.0 - dot(p, &points[next])).max(0.0));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// Index of the most similar centroid; ties go to the lowest index.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let s = dot(point, centroid);
        if s > best.1 {
            best = (c, s);
        }
    }
    best
}

/// Moves the point least similar to its centroid into each empty cluster.
fn repair_empty(
    points: &[Vec<f64>],
    assignment: &mut [usize],
    sims: &mut [f64],
    centroids: &mut [Vec<f64>],
) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignment.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut worst: Option<usize> = None;
        for i in 0..points.len() {
            if sizes[assignment[i]] < 2 {
                continue;
            }
            if worst.is_none_or(|w| sims[i] < sims[w]) {
                worst = Some(i);
            }
        }
        let w = worst.expect("k <= n guarantees a cluster with two members");
        assignment[w] = empty;
        centroids[empty] = points[w].clone();
        sims[w] = dot(&points[w], &centroids[empty]);
    }
}

/// Normalized mean of each cluster; a cluster whose mean vanishes keeps its
/// previous centroid.
fn update_centroids(points: &[Vec<f64>], assignment: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; centroids.len()];
    for (p, &a) in points.iter().zip(assignment) {
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (centroid, sum) in centroids.iter_mut().zip(sums) {
        if norm(&sum) > 0.0 {
            *centroid = unit(&sum);
        }
    }
}

/// Greedy single-point moves between clusters while any move raises the sum
/// of cluster-sum norms. Returns the new objective when something moved.
fn first_variation(points: &[Vec<f64>], assignment: &mut [usize], k: usize) -> Option<f64> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut sizes = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignment.iter()) {
        sizes[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    let shifted = |s: &[f64], p: &[f64], sign: f64| -> f64 {
        s.iter().zip(p).map(|(a, b)| (a + sign * b).powi(2)).sum::<f64>().sqrt()
    };
    let mut moved = false;
    loop {
        let mut pass_moved = false;
        for (i, p) in points.iter().enumerate() {
            let a = assignment[i];
            if sizes[a] < 2 {
                continue;
            }
            let loss = norm(&sums[a]) - shifted(&sums[a], p, -1.0);
            let mut best: Option<(usize, f64)> = None;
            for b in (0..k).filter(|&b| b != a) {
                let gain = shifted(&sums[b], p, 1.0) - norm(&sums[b]) - loss;
                if gain > 1e-12 && best.is_none_or(|(_, g)| gain > g) {
                    best = Some((b, gain));
                }
            }
            if let Some((b, _)) = best {
                for (d, x) in p.iter().enumerate() {
                    sums[a][d] -= x;
                    sums[b][d] += x;
                }
                sizes[a] -= 1;
                sizes[b] += 1;
                assignment[i] = b;
                pass_moved = true;
            }
        }
        if !pass_moved {
            break;
        }
        moved = true;
    }
    moved.then(|| sums.iter().map(|s| norm(s)).sum())
}

pub fn kmeans_cluster(
    embeddings: &BTreeMap<HashtagId, Vec<f64>>,
    config: &KMeansConfig,
) -> Result<Clustering, ClusteringError> {
    let (names, points) = prepare(embeddings, config.k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centroids = seed_centroids(&points, config.k, &mut rng);
    let mut previous: Option<Vec<usize>> = None;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut assignment = Vec::new();

    let mut iterations = 0;
    loop {
        while iterations < config.max_iterations.max(1) {
            iterations += 1;
            let (mut assign, mut sims): (Vec<usize>, Vec<f64>) =
                points.par_iter().map(|p| nearest(p, &centroids)).unzip();
            repair_empty(&points, &mut assign, &mut sims, &mut centroids);
            let objective: f64 = sims.iter().sum();
            let improvement = trace.last().map(|&last| objective - last);
            trace.push(objective);
            let unchanged = previous.as_ref() == Some(&assign);
            assignment = assign;
            if unchanged || improvement.is_some_and(|d| d < config.tolerance) {
                converged = true;
                break;
            }
            update_centroids(&points, &assignment, &mut centroids);
            previous = Some(assignment.clone());
        }
        if !converged {
            break;
        }
        // Lloyd steps have stalled; single-point moves can still raise the
        // objective. Resume Lloyd from the improved partition if they do.
        match first_variation(&points, &mut assignment, config.k) {
            Some(objective) => {
                trace.push(objective);
                update_centroids(&points, &assignment, &mut centroids);
                previous = Some(assignment.clone());
                converged = false;
            }
            None => break,
        }
    }

    let mut members = vec![BTreeSet::new(); config.k];
    for (name, &a) in names.iter().zip(&assignment) {
        members[a].insert((*name).clone());
    }
    let mut final_centroids = centroids.clone();
    update_centroids(&points, &assignment, &mut final_centroids);
    let clusters = members
        .into_iter()
        .zip(final_centroids)
        .enumerate()
        .map(|(cluster_id, (members, centroid))| SemanticCluster {
            cluster_id,
            members,
            centroid,
        })
        .collect();
    Ok(Clustering {
        k: config.k,
        seed: config.seed,
        clusters,
        iterations,
        objective_trace: trace,
        converged,
    })
}

/// Runs `restarts` seeds (`seed`, `seed + 1`, ...) and keeps the run with the
/// highest final objective; earlier seeds win ties.
pub fn kmeans_best_of(
    embeddings: &BTreeMap<HashtagId, Vec<f64>>,
    config: &KMeansConfig,
    restarts: usize,
) -> Result<Clustering, ClusteringError> {
    let mut best: Option<Clustering> = None;
    for r in 0..restarts.max(1) as u64 {
        let run = kmeans_cluster(
            embeddings,
            &KMeansConfig {
                seed: config.seed.wrapping_add(r),
                ..*config
            },
        )?;
        if best.as_ref().is_none_or(|b| run.objective() > b.objective()) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Independent clustering per k. Failures are kept per k and do not stop the
/// sweep.
pub fn sweep_k(
    embeddings: &BTreeMap<HashtagId, Vec<f64>>,
    k_values: &[usize],
    seed: u64,
) -> BTreeMap<usize, Result<Clustering, ClusteringError>> {
    sweep_k_with(embeddings, k_values, &KMeansConfig::new(1, seed), 1)
}

pub fn sweep_k_with(
    embeddings: &BTreeMap<HashtagId, Vec<f64>>,
    k_values: &[usize],
    base: &KMeansConfig,
    restarts: usize,
) -> BTreeMap<usize, Result<Clustering, ClusteringError>> {
    k_values
        .iter()
        .map(|&k| {
            let config = KMeansConfig { k, ..*base };
            (k, kmeans_best_of(embeddings, &config, restarts))
        })
        .collect()
}

/// Sum over points of cosine similarity to their cluster's normalized mean.
/// This is the best objective any centroid choice can reach for a fixed
/// partition.
pub fn partition_objective(points: &[Vec<f64>], assignment: &[usize], k: usize) -> f64 {
    let dim = points.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; dim]; k];
    for (p, &a) in points.iter().zip(assignment) {
        let u = unit(p);
        for (s, x) in sums[a].iter_mut().zip(&u) {
            *s += x;
        }
    }
    // Sum of unit vectors dotted with their normalized sum is the sum's norm.
    sums.iter().map(|s| norm(s)).sum()
}

/// Writes `k,cluster_id,hashtag` rows.
pub fn write_clusters_csv<W: Write>(out: W, clusterings: &[&Clustering]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "cluster_id", "hashtag"])?;
    for c in clusterings {
        for cluster in &c.clusters {
            for h in &cluster.members {
                w.write_record([c.k.to_string(), cluster.cluster_id.to_string(), h.to_string()])?;
            }
        }
    }
    w.flush()
}

/// Reads `k,cluster_id,hashtag` rows back as member sets per k. Centroids
/// are not stored and come back empty.
pub fn read_clusters_csv<R: io::Read>(source: R) -> Result<BTreeMap<usize, Vec<SemanticCluster>>, csv::Error> {
    let mut r = csv::Reader::from_reader(source);
    let mut by_k: BTreeMap<usize, BTreeMap<usize, BTreeSet<HashtagId>>> = BTreeMap::new();
    for row in r.records() {
        let row = row?;
        let bad = || csv::Error::from(io::Error::new(io::ErrorKind::InvalidData, format!("bad cluster row {row:?}")));
        if row.len() != 3 {
            return Err(bad());
        }
        let k: usize = row[0].parse().map_err(|_| bad())?;
        let id: usize = row[1].parse().map_err(|_| bad())?;
        let h = HashtagId::new(&row[2]).ok_or_else(bad)?;
        by_k.entry(k).or_default().entry(id).or_default().insert(h);
    }
    Ok(by_k
        .into_iter()
        .map(|(k, clusters)| {
            let clusters = clusters
                .into_iter()
                .map(|(cluster_id, members)| SemanticCluster {
                    cluster_id,
                    members,
                    centroid: Vec::new(),
                })
                .collect();
            (k, clusters)
        })
        .collect())
}
