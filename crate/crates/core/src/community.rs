//! Modularity and Louvain (BGLL) community detection on the follower graph.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SocialGraph;

/// Gains closer than this are treated as equal.
const GAIN_EPSILON: f64 = 1e-12;

pub const DEFAULT_MIN_COMMUNITY_SIZE: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommunityError {
    #[error("modularity is undefined on a graph without edges")]
    NoEdges,
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("partition does not assign user {0}")]
    Unassigned(String),
    #[error("malformed partition row: {0}")]
    MalformedPartition(String),
}

/// Assignment of every graph node to a community, ids contiguous from 0.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Partition {
    assignment: BTreeMap<String, usize>,
    community_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Community {
    pub community_id: usize,
    pub members: BTreeSet<String>,
}

impl Community {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

impl Partition {
    /// Relabels arbitrary labels to contiguous ids in order of first
    /// appearance over the sorted user list.
    pub fn from_labels<I, S, L>(labels: I) -> Self
    where
        I: IntoIterator<Item = (S, L)>,
        S: Into<String>,
        L: Ord,
    {
        let raw: BTreeMap<String, L> = labels.into_iter().map(|(u, l)| (u.into(), l)).collect();
        let mut ids: BTreeMap<&L, usize> = BTreeMap::new();
        let mut assignment = BTreeMap::new();
        for (user, label) in &raw {
            let next = ids.len();
            let id = *ids.entry(label).or_insert(next);
            assignment.insert(user.clone(), id);
        }
        Partition {
            community_count: ids.len(),
            assignment,
        }
    }

    /// Every node of `graph` in its own community.
    pub fn singletons(graph: &SocialGraph) -> Self {
        Partition::from_labels(graph.users().iter().enumerate().map(|(i, u)| (u.clone(), i)))
    }

    /// All nodes of `graph` in one community.
    pub fn whole(graph: &SocialGraph) -> Self {
        Partition::from_labels(graph.users().iter().map(|u| (u.clone(), 0)))
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// `None` for users outside the graph.
    pub fn community_of(&self, user: &str) -> Option<usize> {
        self.assignment.get(user).copied()
    }

    pub fn assignment(&self) -> &BTreeMap<String, usize> {
        &self.assignment
    }

    pub fn communities(&self) -> Vec<Community> {
        let mut out: Vec<Community> = (0..self.community_count)
            .map(|community_id| Community {
                community_id,
                members: BTreeSet::new(),
            })
            .collect();
        for (user, &c) in &self.assignment {
            out[c].members.insert(user.clone());
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.community_count];
        for &c in self.assignment.values() {
            sizes[c] += 1;
        }
        sizes
    }

    /// Communities with at least `min_size` members.
    pub fn reported(&self, min_size: usize) -> BTreeSet<usize> {
        self.sizes()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s >= min_size)
            .map(|(c, _)| c)
            .collect()
    }
}

/// Lookup helper mirroring [`Partition::community_of`].
pub fn community_of(partition: &Partition, user: &str) -> Option<usize> {
    partition.community_of(user)
}

fn labels_for(graph: &SocialGraph, partition: &Partition) -> Result<Vec<usize>, CommunityError> {
    graph
        .users()
        .iter()
        .map(|u| {
            partition
                .community_of(u)
                .ok_or_else(|| CommunityError::Unassigned(u.clone()))
        })
        .collect()
}

/// Newman modularity at resolution 1.
pub fn modularity(graph: &SocialGraph, partition: &Partition) -> Result<f64, CommunityError> {
    modularity_with_resolution(graph, partition, 1.0)
}

pub fn modularity_with_resolution(
    graph: &SocialGraph,
    partition: &Partition,
    resolution: f64,
) -> Result<f64, CommunityError> {
    if graph.edge_count() == 0 {
        return Err(CommunityError::NoEdges);
    }
    let labels = labels_for(graph, partition)?;
    let level = LevelGraph::from_social(graph);
    Ok(level.modularity(&labels, resolution))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LouvainConfig {
    pub seed: u64,
    pub resolution: f64,
    /// Shuffled visit orders tried (seeds `seed`, `seed + 1`, ...); the
    /// highest modularity wins, earlier seeds on ties.
    pub restarts: usize,
}

/// Restarts used by [`LouvainConfig::default`].
pub const DEFAULT_LOUVAIN_RESTARTS: usize = 8;

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            seed: 0,
            resolution: 1.0,
            restarts: DEFAULT_LOUVAIN_RESTARTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LouvainOutcome {
    pub partition: Partition,
    /// `None` when the graph has no edges.
    pub modularity: Option<f64>,
    /// Modularity after each local-moving phase.
    pub level_modularity: Vec<f64>,
}

/// Weighted graph for one Louvain level. `self_loops[i]` is `A_ii` and
/// `degree[i]` includes it.
struct LevelGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    degree: Vec<f64>,
    total: f64,
}

impl LevelGraph {
    fn from_social(graph: &SocialGraph) -> Self {
        let n = graph.node_count();
        let adjacency: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| graph.neighbors(i).iter().map(|&j| (j, 1.0)).collect())
            .collect();
        let degree: Vec<f64> = adjacency.iter().map(|a| a.len() as f64).collect();
        let total = degree.iter().sum();
        LevelGraph {
            adjacency,
            self_loops: vec![0.0; n],
            degree,
            total,
        }
    }

    fn len(&self) -> usize {
        self.degree.len()
    }

    fn modularity(&self, labels: &[usize], resolution: f64) -> f64 {
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let mut inside = vec![0.0; count];
        let mut tot = vec![0.0; count];
        for i in 0..self.len() {
            let c = labels[i];
            tot[c] += self.degree[i];
            inside[c] += self.self_loops[i];
            for &(j, w) in &self.adjacency[i] {
                if labels[j] == c {
                    inside[c] += w;
                }
            }
        }
        inside
            .iter()
            .zip(&tot)
            .map(|(&a, &t)| a / self.total - resolution * (t / self.total).powi(2))
            .sum()
    }

    /// Greedy local moving until a full sweep moves nothing. Returns the
    /// community of each node and whether anything moved.
    fn local_moving(&self, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut community: Vec<usize> = (0..n).collect();
        let mut tot = self.degree.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut weight_to = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;
        loop {
            let mut moved = false;
            for &i in &order {
                let current = community[i];
                let k_i = self.degree[i];
                for &(j, w) in &self.adjacency[i] {
                    let c = community[j];
                    if weight_to[c] == 0.0 {
                        touched.push(c);
                    }
                    weight_to[c] += w;
                }
                tot[current] -= k_i;
                let gain = |c: usize, w: f64| w - resolution * tot[c] * k_i / self.total;
                let stay = gain(current, weight_to[current]);
                touched.sort_unstable();
                let mut best: Option<(usize, f64)> = None;
                for &c in &touched {
                    if c == current {
                        continue;
                    }
                    let g = gain(c, weight_to[c]);
                    if g > stay + GAIN_EPSILON && best.is_none_or(|(_, bg)| g > bg + GAIN_EPSILON) {
                        best = Some((c, g));
                    }
                }
                for &c in &touched {
                    weight_to[c] = 0.0;
                }
                touched.clear();
                let target = best.map_or(current, |(c, _)| c);
                tot[target] += k_i;
                if target != current {
                    community[i] = target;
                    moved = true;
                    any_move = true;
                }
            }
            if !moved {
                break;
            }
        }
        (renumber(&community), any_move)
    }

    fn aggregate(&self, community: &[usize]) -> LevelGraph {
        let count = community.iter().max().map_or(0, |m| m + 1);
        let mut self_loops = vec![0.0; count];
        let mut degree = vec![0.0; count];
        let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
        for i in 0..self.len() {
            let c = community[i];
            self_loops[c] += self.self_loops[i];
            degree[c] += self.degree[i];
            for &(j, w) in &self.adjacency[i] {
                let d = community[j];
                if c == d {
                    self_loops[c] += w;
                } else {
                    *links[c].entry(d).or_insert(0.0) += w;
                }
            }
        }
        LevelGraph {
            adjacency: links.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loops,
            degree,
            total: self.total,
        }
    }
}

/// Contiguous ids in order of first appearance.
fn renumber(labels: &[usize]) -> Vec<usize> {
    let mut next = 0;
    let mut ids = vec![usize::MAX; labels.iter().max().map_or(0, |m| m + 1)];
    labels
        .iter()
        .map(|&l| {
            if ids[l] == usize::MAX {
                ids[l] = next;
                next += 1;
            }
            ids[l]
        })
        .collect()
}

/// Louvain with the given seed at resolution 1.
pub fn detect_communities(graph: &SocialGraph, seed: u64) -> Result<Partition, CommunityError> {
    louvain(
        graph,
        &LouvainConfig {
            seed,
            ..LouvainConfig::default()
        },
    )
    .map(|o| o.partition)
}

/// Two-phase Louvain: local moving, then aggregation, until a level makes no
/// move. Node visit order is shuffled once per level; the whole procedure is
/// repeated for `config.restarts` seeds and the best partition kept.
pub fn louvain(graph: &SocialGraph, config: &LouvainConfig) -> Result<LouvainOutcome, CommunityError> {
    let mut best: Option<LouvainOutcome> = None;
    for r in 0..config.restarts.max(1) as u64 {
        let run = louvain_once(graph, config.seed.wrapping_add(r), config.resolution)?;
        if best.as_ref().is_none_or(|b| run.modularity > b.modularity) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn louvain_once(graph: &SocialGraph, seed: u64, resolution: f64) -> Result<LouvainOutcome, CommunityError> {
    if graph.is_empty() {
        return Err(CommunityError::EmptyGraph);
    }
    if graph.edge_count() == 0 {
        return Ok(LouvainOutcome {
            partition: Partition::singletons(graph),
            modularity: None,
            level_modularity: Vec::new(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = LevelGraph::from_social(graph);
    let mut membership: Vec<usize> = (0..graph.node_count()).collect();
    let mut level_modularity = Vec::new();
    loop {
        let (community, moved) = level.local_moving(resolution, &mut rng);
        if !moved {
            if level_modularity.is_empty() {
                level_modularity.push(level.modularity(&community, resolution));
            }
            break;
        }
        for m in membership.iter_mut() {
            *m = community[*m];
        }
        level_modularity.push(level.modularity(&community, resolution));
        level = level.aggregate(&community);
    }
    let partition = Partition::from_labels(
        graph
            .users()
            .iter()
            .zip(&membership)
            .map(|(u, &m)| (u.clone(), m)),
    );
    let q = modularity_with_resolution(graph, &partition, resolution)?;
    Ok(LouvainOutcome {
        partition,
        modularity: Some(q),
        level_modularity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySummary {
    pub community_count: usize,
    /// community size -> number of communities of that size
    pub sizes_histogram: BTreeMap<usize, usize>,
    pub final_modularity: Option<f64>,
}

impl CommunitySummary {
    pub fn new(partition: &Partition, final_modularity: Option<f64>) -> Self {
        let mut sizes_histogram = BTreeMap::new();
        for s in partition.sizes() {
            *sizes_histogram.entry(s).or_insert(0) += 1;
        }
        CommunitySummary {
            community_count: partition.community_count(),
            sizes_histogram,
            final_modularity,
        }
    }
}

/// Writes `user,community_id` rows.
pub fn write_partition_csv<W: Write>(out: W, partition: &Partition) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user", "community_id"])?;
    for (user, c) in partition.assignment() {
        w.write_record([user.as_str(), &c.to_string()])?;
    }
    w.flush()
}

pub fn read_partition_csv<R: Read>(source: R) -> Result<Partition, CommunityError> {
    let mut r = csv::Reader::from_reader(source);
    let mut labels = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| CommunityError::MalformedPartition(e.to_string()))?;
        let id: usize = row
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CommunityError::MalformedPartition(format!("{row:?}")))?;
        labels.push((row[0].to_string(), id));
    }
    let max = labels.iter().map(|(_, c)| *c + 1).max().unwrap_or(0);
    let partition = Partition::from_labels(labels);
    if partition.community_count() != max {
        return Err(CommunityError::MalformedPartition(
            "community ids are not contiguous".into(),
        ));
    }
    Ok(partition)
}
