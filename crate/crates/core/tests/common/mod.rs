//! Brute-force reference implementations shared by the integration tests.
//! None of these call into the library's algorithms.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Components of the reflexive-transitive closure of `related`, computed by
/// squaring the boolean reachability matrix until it stops changing.
pub fn closure_components(n: usize, related: impl Fn(usize, usize) -> bool) -> BTreeSet<BTreeSet<usize>> {
    let mut reach: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i == j || related(i, j) || related(j, i)).collect())
        .collect();
    loop {
        let mut next = reach.clone();
        for i in 0..n {
            for j in 0..n {
                if !next[i][j] {
                    next[i][j] = (0..n).any(|m| reach[i][m] && reach[m][j]);
                }
            }
        }
        if next == reach {
            break;
        }
        reach = next;
    }
    (0..n)
        .map(|i| (0..n).filter(|&j| reach[i][j]).collect())
        .collect()
}

/// True when some active slot of `a` lies within `gap` of an active slot of `b`.
pub fn slots_within(a: &[u64], b: &[u64], gap: u32) -> bool {
    a.iter().enumerate().filter(|(_, &x)| x > 0).any(|(i, _)| {
        b.iter()
            .enumerate()
            .filter(|(_, &y)| y > 0)
            .any(|(j, _)| i.abs_diff(j) <= gap as usize)
    })
}

/// Newman modularity from the dense adjacency matrix:
/// Q = (1/2m) Σ_ij [A_ij − k_i k_j / 2m] δ(c_i, c_j).
pub fn modularity_dense(n: usize, edges: &[(usize, usize)], labels: &[usize]) -> f64 {
    let mut a = vec![vec![0.0f64; n]; n];
    for &(u, v) in edges {
        if u != v && a[u][v] == 0.0 {
            a[u][v] = 1.0;
            a[v][u] = 1.0;
        }
    }
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for label in 0..=next {
            prefix.push(label);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

pub fn best_modularity(n: usize, edges: &[(usize, usize)]) -> f64 {
    set_partitions(n)
        .iter()
        .map(|labels| modularity_dense(n, edges, labels))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Best spherical k-means objective over every assignment of points to at
/// most `k` labels. For a fixed assignment the optimum is the sum over
/// clusters of the norm of the sum of unit vectors.
pub fn best_spherical_objective(points: &[Vec<f64>], k: usize) -> f64 {
    let units: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            p.iter().map(|x| x / n).collect()
        })
        .collect();
    let dim = units[0].len();
    let n = units.len();
    let total = k.pow(n as u32);
    let mut best = f64::NEG_INFINITY;
    for code in 0..total {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut c = code;
        for u in &units {
            let label = c % k;
            c /= k;
            for (s, x) in sums[label].iter_mut().zip(u) {
                *s += x;
            }
        }
        let value: f64 = sums.iter().map(|s| s.iter().map(|x| x * x).sum::<f64>().sqrt()).sum();
        best = best.max(value);
    }
    best
}

/// Erdős–Rényi style graph on `n` nodes as an edge list with i < j.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges
}

pub fn node_name(i: usize) -> String {
    format!("n{i}")
}

/// Reads every file under `dir` into a map keyed by relative path.
pub fn snapshot(dir: &std::path::Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &std::path::Path, dir: &std::path::Path, out: &mut BTreeMap<String, Vec<u8>>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Spherical k-means objective of a fixed assignment: the sum over clusters
/// of the norm of the summed unit vectors.
pub fn objective_of(points: &[Vec<f64>], assignment: &[usize], k: usize) -> f64 {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    for (p, &a) in points.iter().zip(assignment) {
        let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x / n;
        }
    }
    sums.iter().map(|s| s.iter().map(|x| x * x).sum::<f64>().sqrt()).sum()
}
