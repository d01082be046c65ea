//! Complete-linkage agglomerative clustering.
//!
//! Clustering uses the nearest-neighbor chain algorithm, which is exact for
//! complete linkage because the linkage is reducible. Merges found along the
//! chain are sorted by height (stably) and relabeled with a union-find, which
//! yields the usual stepwise dendrogram.
//!
//! Node ids follow the common convention: leaves are `0..n`, the merge at
//! step `s` creates node `n + s`, so children always have smaller ids than
//! their parent and the root is `2n - 2`.

use alloc::vec;
use alloc::vec::Vec;

use crate::similarity::TopicLabel;
use crate::{Error, Result};

/// Symmetric matrix of pairwise distances with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds the matrix from `f(i, j)` for `i < j`; the rest is mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        DistanceMatrix { n, values }
    }

    /// Validates a full row-major `n×n` matrix.
    pub fn from_square(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Input("distance matrix is not square".into()));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::Input("distance matrix needs a zero diagonal".into()));
            }
            for j in i + 1..n {
                let d = values[i * n + j];
                if d != values[j * n + i] {
                    return Err(Error::Input("distance matrix is not symmetric".into()));
                }
                if !(0.0..=1.0).contains(&d) {
                    return Err(Error::Input("distances must lie in [0, 1]".into()));
                }
            }
        }
        Ok(DistanceMatrix { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// One agglomeration step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Merge {
    /// Child with the smaller node id.
    pub left: usize,
    pub right: usize,
    pub height: f64,
    /// Number of leaves below the new node.
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram {
    labels: Vec<TopicLabel>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    /// Validates merges given in the node-id convention of this module.
    pub fn from_merges(labels: Vec<TopicLabel>, merges: Vec<Merge>) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::TooFewObservations(n));
        }
        if merges.len() != n - 1 {
            return Err(Error::Input(alloc::format!(
                "{n} leaves need {} merges, got {}",
                n - 1,
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut size = vec![1usize; 2 * n - 1];
        let mut height = vec![0.0f64; 2 * n - 1];
        for (s, m) in merges.iter().enumerate() {
            let node = n + s;
            for child in [m.left, m.right] {
                if child >= node || used[child] {
                    return Err(Error::Input(alloc::format!(
                        "merge {s} reuses or forward-references node {child}"
                    )));
                }
                used[child] = true;
                if height[child] > m.height {
                    return Err(Error::Input(alloc::format!("merge {s} lowers the height")));
                }
            }
            if m.left >= m.right || size[m.left] + size[m.right] != m.size {
                return Err(Error::Input(alloc::format!("merge {s} is malformed")));
            }
            size[node] = m.size;
            height[node] = m.height;
        }
        Ok(Dendrogram { labels, merges })
    }

    pub fn leaf_count(&self) -> usize {
        self.labels.len()
    }

    pub fn node_count(&self) -> usize {
        2 * self.labels.len() - 1
    }

    pub fn root(&self) -> usize {
        self.node_count() - 1
    }

    pub fn labels(&self) -> &[TopicLabel] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.labels.len()
    }

    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        self.merge(node).map(|m| (m.left, m.right))
    }

    pub fn height(&self, node: usize) -> f64 {
        self.merge(node).map_or(0.0, |m| m.height)
    }

    pub fn size(&self, node: usize) -> usize {
        self.merge(node).map_or(1, |m| m.size)
    }

    fn merge(&self, node: usize) -> Option<&Merge> {
        node.checked_sub(self.labels.len()).map(|s| &self.merges[s])
    }

    /// Leaf ids below `node`, left to right.
    pub fn leaf_ids_under(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.size(node));
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            match self.children(x) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(x),
            }
        }
        out
    }

    pub fn leaves_under(&self, node: usize) -> Vec<TopicLabel> {
        self.leaf_ids_under(node).into_iter().map(|i| self.labels[i]).collect()
    }

    /// Number of leaves under `node` from each of the `runs` runs.
    pub fn run_histogram(&self, node: usize, runs: usize) -> Vec<u64> {
        let mut t = vec![0; runs];
        for i in self.leaf_ids_under(node) {
            t[self.labels[i].run] += 1;
        }
        t
    }

    /// Histograms of every node, computed bottom-up. Index = node id.
    pub fn all_run_histograms(&self, runs: usize) -> Vec<Vec<u64>> {
        let mut out: Vec<Vec<u64>> = self
            .labels
            .iter()
            .map(|l| {
                let mut t = vec![0; runs];
                t[l.run] = 1;
                t
            })
            .collect();
        for m in &self.merges {
            let t = out[m.left].iter().zip(&out[m.right]).map(|(a, b)| a + b).collect();
            out.push(t);
        }
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }
}

/// Complete-linkage clustering of `labels.len()` observations.
///
/// Nearest neighbors are chosen by smallest distance; ties go to the previous
/// chain element, then to the smallest index.
pub fn complete_linkage(dist: &DistanceMatrix, labels: Vec<TopicLabel>) -> Result<Dendrogram> {
    let n = dist.len();
    if labels.len() != n {
        return Err(Error::Input("one label per observation required".into()));
    }
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    let mut d = dist.values.clone();
    let mut active = vec![true; n];
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    // (slot a, slot b, height); slots are observation ids standing for clusters
    let mut raw: Vec<(usize, usize, f64)> = Vec::with_capacity(n - 1);

    while raw.len() < n - 1 {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("an active cluster"));
        }
        let (a, b) = loop {
            let a = *chain.last().unwrap();
            let prev = chain.len().checked_sub(2).map(|i| chain[i]);
            let mut best = prev;
            let mut best_d = prev.map_or(f64::INFINITY, |p| d[a * n + p]);
            for x in 0..n {
                if x != a && active[x] && (d[a * n + x] < best_d || best.is_none()) {
                    best = Some(x);
                    best_d = d[a * n + x];
                }
            }
            let b = best.expect("two active clusters");
            if Some(b) == prev {
                break (a, b);
            }
            chain.push(b);
        };
        chain.truncate(chain.len() - 2);
        let height = d[a * n + b];
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        active[gone] = false;
        for x in 0..n {
            if active[x] && x != keep {
                let v = d[keep * n + x].max(d[gone * n + x]);
                d[keep * n + x] = v;
                d[x * n + keep] = v;
            }
        }
        raw.push((keep, gone, height));
    }

    raw.sort_by(|x, y| x.2.total_cmp(&y.2));
    let mut uf = UnionFind::new(2 * n - 1);
    let mut size = vec![1usize; 2 * n - 1];
    let mut merges = Vec::with_capacity(n - 1);
    for (s, &(a, b, height)) in raw.iter().enumerate() {
        let (ra, rb) = (uf.find(a), uf.find(b));
        let node = n + s;
        let (left, right) = if ra < rb { (ra, rb) } else { (rb, ra) };
        size[node] = size[left] + size[right];
        uf.parent[ra] = node;
        uf.parent[rb] = node;
        merges.push(Merge {
            left,
            right,
            height,
            size: size[node],
        });
    }
    Ok(Dendrogram { labels, merges })
}
