//! Agreement scores between a recovered labelling and a reference one.

use std::collections::{BTreeMap, HashMap};

/// Labels of keys present in both maps, in key order.
pub fn paired_labels<K: Ord>(truth: &BTreeMap<K, usize>, predicted: &BTreeMap<K, usize>) -> (Vec<usize>, Vec<usize>) {
    truth
        .iter()
        .filter_map(|(k, &t)| predicted.get(k).map(|&p| (t, p)))
        .unzip()
}

fn contingency(truth: &[usize], predicted: &[usize]) -> HashMap<(usize, usize), u64> {
    assert_eq!(truth.len(), predicted.len(), "label vectors differ in length");
    let mut table = HashMap::new();
    for (&t, &p) in truth.iter().zip(predicted) {
        *table.entry((t, p)).or_insert(0) += 1;
    }
    table
}

fn pairs(n: u64) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

/// Hubert-Arabie adjusted Rand index. Returns 1.0 when both labellings are
/// trivial in the same way (the index is undefined there).
pub fn adjusted_rand_index(truth: &[usize], predicted: &[usize]) -> f64 {
    let table = contingency(truth, predicted);
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&(t, p), &n) in &table {
        *rows.entry(t).or_insert(0) += n;
        *cols.entry(p).or_insert(0) += n;
    }
    let index: f64 = table.values().map(|&n| pairs(n)).sum();
    let a: f64 = rows.values().map(|&n| pairs(n)).sum();
    let b: f64 = cols.values().map(|&n| pairs(n)).sum();
    let total = pairs(truth.len() as u64);
    if total == 0.0 {
        return 1.0;
    }
    let expected = a * b / total;
    let max = (a + b) / 2.0;
    if (max - expected).abs() < f64::EPSILON {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Fraction of items whose predicted cluster's majority reference label
/// matches their own.
pub fn purity(truth: &[usize], predicted: &[usize]) -> f64 {
    if truth.is_empty() {
        return 1.0;
    }
    let table = contingency(truth, predicted);
    let mut best: HashMap<usize, u64> = HashMap::new();
    for (&(_, p), &n) in &table {
        let e = best.entry(p).or_insert(0);
        *e = (*e).max(n);
    }
    best.values().sum::<u64>() as f64 / truth.len() as f64
}

/// Maps each predicted label to the reference label it overlaps most;
/// ties go to the smaller reference label.
pub fn majority_mapping(truth: &[usize], predicted: &[usize]) -> BTreeMap<usize, usize> {
    let table = contingency(truth, predicted);
    let mut best: BTreeMap<usize, (u64, usize)> = BTreeMap::new();
    for (&(t, p), &n) in &table {
        let e = best.entry(p).or_insert((0, usize::MAX));
        if n > e.0 || (n == e.0 && t < e.1) {
            *e = (n, t);
        }
    }
    best.into_iter().map(|(p, (_, t))| (p, t)).collect()
}
