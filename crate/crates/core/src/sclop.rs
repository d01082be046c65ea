//! Disparity, local pruning and the S-CLOP score.
//!
//! For a cluster `g` with run histogram `t` (topics per run) the disparity is
//!
//! ```text
//! U(g) = (1/R) · Σ_r |t_r − 1| · Σ_r t_r
//! ```
//!
//! All disparities are kept scaled by `R`, i.e. as the integer
//! `Σ|t_r − 1| · Σ t_r`. The minimal sum of disparities below a node and the
//! pruning decision are therefore computed exactly; floats only appear in the
//! reported values.

use alloc::vec;
use alloc::vec::Vec;

use crate::dendrogram::{complete_linkage, Dendrogram, DistanceMatrix};
use crate::lda::{CountMatrix, RunSet};
use crate::similarity::{pairwise_similarity, Measure, SimilarityMatrix, ThresholdConfig, TopicLabel};
use crate::{Error, Result};

/// `R · U(g)` for histogram `t`.
pub fn scaled_disparity(t: &[u64]) -> u64 {
    let deviation: u64 = t.iter().map(|&x| x.abs_diff(1)).sum();
    let size: u64 = t.iter().sum();
    deviation * size
}

/// Disparity `U(g)` of a cluster with run histogram `t`.
pub fn disparity(t: &[u64]) -> f64 {
    assert!(!t.is_empty(), "disparity needs at least one run");
    scaled_disparity(t) as f64 / t.len() as f64
}

/// Own and minimal disparity of every dendrogram node, scaled by `R`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisparityTable {
    runs: usize,
    histograms: Vec<Vec<u64>>,
    own: Vec<u64>,
    minimal: Vec<u64>,
}

impl DisparityTable {
    /// Bottom-up evaluation of the minimal-disparity recursion: a leaf is
    /// worth `(R−1)/R`, an inner node the smaller of its own disparity and the
    /// sum of its children's minima.
    pub fn new(dend: &Dendrogram, runs: usize) -> Result<Self> {
        if runs < 1 {
            return Err(Error::Config("at least one run is required".into()));
        }
        if let Some(l) = dend.labels().iter().find(|l| l.run >= runs) {
            return Err(Error::Input(alloc::format!(
                "topic {l} belongs to a run outside 1..={runs}"
            )));
        }
        let histograms = dend.all_run_histograms(runs);
        let own: Vec<u64> = histograms.iter().map(|t| scaled_disparity(t)).collect();
        let mut minimal = vec![0u64; dend.node_count()];
        for node in 0..dend.node_count() {
            minimal[node] = match dend.children(node) {
                None => runs as u64 - 1,
                Some((l, r)) => own[node].min(minimal[l] + minimal[r]),
            };
        }
        Ok(DisparityTable {
            runs,
            histograms,
            own,
            minimal,
        })
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn histogram(&self, node: usize) -> &[u64] {
        &self.histograms[node]
    }

    /// `U(node)`.
    pub fn own(&self, node: usize) -> f64 {
        self.own[node] as f64 / self.runs as f64
    }

    /// `U*(node)`, the minimal sum of disparities of any pruning below `node`.
    pub fn minimal(&self, node: usize) -> f64 {
        self.minimal[node] as f64 / self.runs as f64
    }

    pub fn own_scaled(&self, node: usize) -> u64 {
        self.own[node]
    }

    pub fn minimal_scaled(&self, node: usize) -> u64 {
        self.minimal[node]
    }

    /// Depth-first descent from the root: a node becomes a cluster as soon as
    /// its own disparity equals its minimum, otherwise both children are
    /// visited. Clusters are returned left to right.
    pub fn prune(&self, dend: &Dendrogram) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![dend.root()];
        while let Some(node) = stack.pop() {
            match dend.children(node) {
                Some((l, r)) if self.own[node] != self.minimal[node] => {
                    stack.push(r);
                    stack.push(l);
                }
                _ => out.push(node),
            }
        }
        out
    }
}

/// `U(node)` of one node.
pub fn node_disparity(dend: &Dendrogram, node: usize, runs: usize) -> f64 {
    disparity(&dend.run_histogram(node, runs))
}

/// `U*(node)` of one node.
pub fn min_disparity(dend: &Dendrogram, node: usize, runs: usize) -> Result<f64> {
    Ok(DisparityTable::new(dend, runs)?.minimal(node))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterGroup {
    /// Dendrogram node the cluster corresponds to.
    pub node: usize,
    pub members: Vec<TopicLabel>,
    /// Topics per run.
    pub histogram: Vec<u64>,
    pub disparity: f64,
}

/// The optimal local pruning of a dendrogram.
pub fn prune(dend: &Dendrogram, runs: usize) -> Result<Vec<ClusterGroup>> {
    let table = DisparityTable::new(dend, runs)?;
    Ok(groups_of(dend, &table))
}

fn groups_of(dend: &Dendrogram, table: &DisparityTable) -> Vec<ClusterGroup> {
    table
        .prune(dend)
        .into_iter()
        .map(|node| ClusterGroup {
            node,
            members: dend.leaves_under(node),
            histogram: table.histogram(node).to_vec(),
            disparity: table.own(node),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SclopReport {
    pub runs: usize,
    /// `G*`, partitioning all topics.
    pub groups: Vec<ClusterGroup>,
    /// `U_Σ(G*)`.
    pub u_sum: f64,
    /// `U_Σ,max = N·(R−1)/R`.
    pub u_max: f64,
    pub score: f64,
}

/// Prunes `dend` optimally and scores the result.
pub fn score_dendrogram(dend: &Dendrogram, runs: usize) -> Result<SclopReport> {
    if runs < 2 {
        return Err(Error::TooFewRuns(runs));
    }
    let table = DisparityTable::new(dend, runs)?;
    let groups = groups_of(dend, &table);
    let sum_scaled = table.minimal_scaled(dend.root());
    debug_assert_eq!(groups.iter().map(|g| table.own_scaled(g.node)).sum::<u64>(), sum_scaled);
    let max_scaled = (dend.leaf_count() * (runs - 1)) as u64;
    Ok(SclopReport {
        runs,
        groups,
        u_sum: sum_scaled as f64 / runs as f64,
        u_max: max_scaled as f64 / runs as f64,
        score: score_from_scaled(sum_scaled, max_scaled),
    })
}

fn score_from_scaled(sum_scaled: u64, max_scaled: u64) -> f64 {
    1.0 - sum_scaled as f64 / max_scaled as f64
}

/// S-CLOP from a disparity sum: `1 − u_sum / (N·(R−1)/R)`.
pub fn score(u_sum: f64, total_topics: usize, runs: usize) -> f64 {
    1.0 - u_sum / max_disparity_sum(total_topics, runs)
}

/// `U_Σ,max = N·(R−1)/R`.
pub fn max_disparity_sum(total_topics: usize, runs: usize) -> f64 {
    total_topics as f64 * (runs as f64 - 1.0) / runs as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SclopConfig {
    pub threshold: ThresholdConfig,
    pub measure: Measure,
}

/// Intermediate products of one S-CLOP evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct SclopAnalysis {
    pub similarity: SimilarityMatrix,
    pub dendrogram: Dendrogram,
    pub report: SclopReport,
}

/// Runs sorted by their count data. Linkage ties are broken by observation
/// index, so clustering in this order makes the score depend only on the
/// collection of runs, not on how they are numbered.
fn canonical_run_order(runs: &[&CountMatrix]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&x, &y| runs[x].as_slice().cmp(runs[y].as_slice()));
    order
}

fn cluster_in_canonical_order(similarity: &SimilarityMatrix, runs: &[&CountMatrix]) -> Result<Dendrogram> {
    let k = runs[0].topics();
    let perm: Vec<usize> = canonical_run_order(runs)
        .into_iter()
        .flat_map(|r| (0..k).map(move |t| r * k + t))
        .collect();
    let dist = DistanceMatrix::from_fn(perm.len(), |i, j| 1.0 - similarity.get(perm[i], perm[j]));
    let labels = perm.iter().map(|&i| similarity.labels()[i]).collect();
    complete_linkage(&dist, labels)
}

/// Similarity matrix, `1 − s` distances, complete linkage, pruning, score.
///
/// The similarity matrix is in run-major order; the dendrogram's leaves
/// follow the canonical run order.
pub fn analyze(runset: &RunSet, cfg: &SclopConfig) -> Result<SclopAnalysis> {
    let runs = runset.len();
    if runs < 2 {
        return Err(Error::TooFewRuns(runs));
    }
    let similarity = pairwise_similarity(&runset.topics(), &cfg.threshold, cfg.measure)?;
    let counts: Vec<&CountMatrix> = runset.runs().iter().map(|r| &r.counts).collect();
    let dendrogram = cluster_in_canonical_order(&similarity, &counts)?;
    let report = score_dendrogram(&dendrogram, runs)?;
    Ok(SclopAnalysis {
        similarity,
        dendrogram,
        report,
    })
}

pub fn sclop(runset: &RunSet, cfg: &SclopConfig) -> Result<SclopReport> {
    analyze(runset, cfg).map(|a| a.report)
}

/// S-CLOP of two runs. The normalization is `K`.
pub fn sclop_pairwise(a: &CountMatrix, b: &CountMatrix, cfg: &SclopConfig) -> Result<f64> {
    if a.topics() != b.topics() {
        return Err(Error::Input(alloc::format!(
            "runs differ in topic count ({} vs {})",
            a.topics(),
            b.topics()
        )));
    }
    if a.vocab_size() != b.vocab_size() {
        return Err(Error::Input("runs differ in vocabulary size".into()));
    }
    let mut topics = a.topic_list(0);
    topics.extend(b.topic_list(1));
    let similarity = pairwise_similarity(&topics, &cfg.threshold, cfg.measure)?;
    let dendrogram = cluster_in_canonical_order(&similarity, &[a, b])?;
    Ok(score_dendrogram(&dendrogram, 2)?.score)
}
