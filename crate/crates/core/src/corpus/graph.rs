use std::collections::{BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Undirected, simple follower graph over user handles.
///
/// Nodes are stored in sorted order; node indices are positions in that order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SocialGraph {
    users: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeStats {
    pub lines: u64,
    pub malformed_skipped: u64,
    pub kept: u64,
}

impl SocialGraph {
    /// Builds the graph induced on `nodes`. Edges touching a node outside the
    /// set are dropped, as are self-loops and duplicates.
    pub fn from_edges<N, E, S>(nodes: N, edges: E) -> Self
    where
        N: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let users: BTreeSet<String> = nodes.into_iter().map(|s| s.as_ref().to_string()).collect();
        let mut builder = Builder::new(users);
        for (a, b) in edges {
            builder.add(a.as_ref(), b.as_ref());
        }
        builder.finish()
    }

    pub fn node_count(&self) -> usize {
        self.users.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    /// Sorted node handles; index `i` is node `i`.
    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn index_of(&self, user: &str) -> Option<usize> {
        self.index.get(user).copied()
    }

    pub fn contains(&self, user: &str) -> bool {
        self.index.contains_key(user)
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn neighbors_of(&self, user: &str) -> Option<impl Iterator<Item = &str>> {
        let i = self.index_of(user)?;
        Some(self.adjacency[i].iter().map(|&j| self.users[j].as_str()))
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Each undirected edge once, as `(lower index, higher index)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn induced(&self, users: &BTreeSet<String>) -> SocialGraph {
        let kept: Vec<&str> = self
            .users
            .iter()
            .filter(|u| users.contains(*u))
            .map(String::as_str)
            .collect();
        let edges = self
            .edges()
            .map(|(i, j)| (self.users[i].as_str(), self.users[j].as_str()));
        SocialGraph::from_edges(kept, edges)
    }

    /// Writes `user<TAB>neighbor` once per undirected edge.
    pub fn write_edges<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (i, j) in self.edges() {
            writeln!(out, "{}\t{}", self.users[i], self.users[j])?;
        }
        Ok(())
    }
}

struct Builder {
    users: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
}

impl Builder {
    fn new(users: BTreeSet<String>) -> Self {
        let users: Vec<String> = users.into_iter().collect();
        let index = users
            .iter()
            .enumerate()
            .map(|(i, u)| (u.clone(), i))
            .collect();
        let adjacency = vec![Vec::new(); users.len()];
        Builder {
            users,
            index,
            adjacency,
        }
    }

    fn add(&mut self, a: &str, b: &str) -> bool {
        if a == b {
            return false;
        }
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => {
                self.adjacency[i].push(j);
                self.adjacency[j].push(i);
                true
            }
            _ => false,
        }
    }

    fn finish(mut self) -> SocialGraph {
        let mut degree_sum = 0;
        for ns in &mut self.adjacency {
            ns.sort_unstable();
            ns.dedup();
            degree_sum += ns.len();
        }
        SocialGraph {
            users: self.users,
            index: self.index,
            adjacency: self.adjacency,
            edge_count: degree_sum / 2,
        }
    }
}

/// Reads `user<TAB>follower` lines and keeps the subgraph induced on
/// `retained_users`.
pub fn load_social_graph<R: BufRead>(
    source: R,
    retained_users: &BTreeSet<String>,
) -> Result<(SocialGraph, EdgeStats), CorpusError> {
    let mut builder = Builder::new(retained_users.clone());
    let mut stats = EdgeStats::default();
    for line in source.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        stats.lines += 1;
        let mut fields = line.split_whitespace();
        match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => {
                if builder.add(a, b) {
                    stats.kept += 1;
                }
            }
            _ => stats.malformed_skipped += 1,
        }
    }
    Ok((builder.finish(), stats))
}
