//! Reference implementations used as test oracles. None of them share code
//! with the library paths they check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sclop_core::dendrogram::{Dendrogram, DistanceMatrix, Merge};
use sclop_core::lda::CountMatrix;
use sclop_core::similarity::TopicLabel;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A merge described by the leaf sets it joins.
pub type CanonicalMerge = (Vec<usize>, Vec<usize>, f64);

/// Textbook complete linkage: O(N³), smallest (i, j) cluster pair on ties,
/// clusters numbered in creation order.
pub fn naive_complete_linkage(dist: &DistanceMatrix) -> Vec<CanonicalMerge> {
    let n = dist.len();
    let mut clusters: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut merges = Vec::new();
    for _ in 1..n {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (Some(a), Some(b)) = (&clusters[i], &clusters[j]) else {
                    continue;
                };
                let mut link = f64::NEG_INFINITY;
                for &x in a {
                    for &y in b {
                        link = link.max(dist.get(x, y));
                    }
                }
                if best.is_none_or(|(_, _, d)| link < d) {
                    best = Some((i, j, link));
                }
            }
        }
        let (i, j, h) = best.unwrap();
        let a = clusters[i].take().unwrap();
        let b = clusters[j].take().unwrap();
        let mut joined = a.clone();
        joined.extend(&b);
        joined.sort();
        clusters.push(Some(joined));
        merges.push(canonical_pair(a, b, h));
    }
    merges
}

fn canonical_pair(mut a: Vec<usize>, mut b: Vec<usize>, h: f64) -> CanonicalMerge {
    a.sort();
    b.sort();
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    (a, b, h)
}

pub fn canonical(dend: &Dendrogram) -> Vec<CanonicalMerge> {
    dend.merges()
        .iter()
        .map(|m| canonical_pair(dend.leaf_ids_under(m.left), dend.leaf_ids_under(m.right), m.height))
        .collect()
}

/// Random distances in [0, 1) without ties among pairs and linkage values.
pub fn random_distances(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
    let m = n * (n - 1) / 2;
    let mut ranks: Vec<usize> = (1..=m).collect();
    for i in (1..m).rev() {
        ranks.swap(i, rng.gen_range(0..=i));
    }
    let mut it = ranks.into_iter();
    DistanceMatrix::from_fn(n, |_, _| it.next().unwrap() as f64 / (m + 1) as f64)
}

/// Random tree shape with random run labels and increasing heights.
pub fn random_dendrogram(rng: &mut ChaCha8Rng, n: usize, runs: usize) -> Dendrogram {
    let labels: Vec<TopicLabel> = (0..n)
        .map(|i| TopicLabel {
            run: rng.gen_range(0..runs),
            topic: i,
        })
        .collect();
    let mut active: Vec<(usize, usize)> = (0..n).map(|i| (i, 1)).collect();
    let mut merges = Vec::new();
    for s in 0..n - 1 {
        let a = active.swap_remove(rng.gen_range(0..active.len()));
        let b = active.swap_remove(rng.gen_range(0..active.len()));
        let (l, r) = if a.0 < b.0 { (a, b) } else { (b, a) };
        merges.push(Merge {
            left: l.0,
            right: r.0,
            height: (s + 1) as f64,
            size: l.1 + r.1,
        });
        active.push((n + s, l.1 + r.1));
    }
    Dendrogram::from_merges(labels, merges).unwrap()
}

/// `R·U` from a list of run labels, counted directly.
pub fn scaled_disparity_of(members: &[TopicLabel], runs: usize) -> u64 {
    let mut t = vec![0i64; runs];
    for m in members {
        t[m.run] += 1;
    }
    let deviation: i64 = t.iter().map(|&x| (x - 1).abs()).sum();
    (deviation * members.len() as i64) as u64
}

/// Every pruning (antichain cover) of the subtree at `node`, as node lists.
pub fn all_prunings(dend: &Dendrogram, node: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![node]];
    if let Some((l, r)) = dend.children(node) {
        let left = all_prunings(dend, l);
        let right = all_prunings(dend, r);
        for a in &left {
            for b in &right {
                let mut p = a.clone();
                p.extend(b);
                out.push(p);
            }
        }
    }
    out
}

/// Minimum of `R·U_Σ` over all prunings, by enumeration.
pub fn brute_force_min_scaled(dend: &Dendrogram, runs: usize) -> u64 {
    all_prunings(dend, dend.root())
        .iter()
        .map(|p| {
            p.iter()
                .map(|&g| scaled_disparity_of(&dend.leaves_under(g), runs))
                .sum()
        })
        .min()
        .unwrap()
}

/// `runs` runs of `topics` topics; run `r` uses its own block of words when
/// `shared` is false, and every run shares one matrix when it is true.
pub fn block_runs(runs: usize, topics: usize, shared: bool) -> Vec<CountMatrix> {
    let words_per_topic = 4;
    let v = words_per_topic * topics * if shared { 1 } else { runs };
    (0..runs)
        .map(|r| {
            let columns: Vec<Vec<u64>> = (0..topics)
                .map(|k| {
                    let mut col = vec![0u64; v];
                    let base = if shared { 0 } else { r * topics * words_per_topic };
                    for w in 0..words_per_topic {
                        col[base + k * words_per_topic + w] = 40 - 5 * w as u64;
                    }
                    col
                })
                .collect();
            CountMatrix::from_columns(&columns).unwrap()
        })
        .collect()
}

/// Random sparse count matrix.
pub fn random_counts(rng: &mut ChaCha8Rng, v: usize, k: usize) -> CountMatrix {
    let data = (0..v * k)
        .map(|_| if rng.gen_bool(0.4) { rng.gen_range(1..60) } else { 0 })
        .collect();
    CountMatrix::from_rows(v, k, data).unwrap()
}
