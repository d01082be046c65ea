//! Similarity of topics represented by word-count vectors.
//!
//! The main measure is the modified Jaccard coefficient: a word takes part in
//! the comparison of topics `i` and `j` only if its count in a topic strictly
//! exceeds that topic's threshold `c_i`. Cosine similarity and the average
//! Jaccard coefficient over top-word lists are provided for comparison.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::lda::CountMatrix;
use crate::{Error, Result};

/// Origin of a topic: topic `topic` of run `run`, both zero based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TopicLabel {
    pub run: usize,
    pub topic: usize,
}

impl fmt::Display for TopicLabel {
    /// One based `run.topic`, e.g. `2.17`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.run + 1, self.topic + 1)
    }
}

/// Sparse word counts of one topic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopicCounts {
    /// `(word id, count)` with positive counts, sorted by word id.
    entries: Vec<(u32, u64)>,
    total: u64,
    origin: TopicLabel,
}

impl TopicCounts {
    /// Zero counts are dropped.
    pub fn from_dense(counts: &[u64], origin: TopicLabel) -> Self {
        let entries = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| (v as u32, c))
            .collect();
        TopicCounts::from_sparse(entries, origin)
    }

    /// Entries are sorted and merged; zero counts are dropped.
    pub fn from_sparse(mut entries: Vec<(u32, u64)>, origin: TopicLabel) -> Self {
        entries.sort_unstable_by_key(|e| e.0);
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        entries.retain(|e| e.1 > 0);
        let total = entries.iter().map(|e| e.1).sum();
        TopicCounts { entries, total, origin }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn origin(&self) -> TopicLabel {
        self.origin
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u32, u64)] {
        &self.entries
    }

    pub fn count(&self, word: u32) -> u64 {
        self.entries
            .binary_search_by_key(&word, |e| e.0)
            .map_or(0, |i| self.entries[i].1)
    }

    /// Word ids whose count strictly exceeds `threshold`, ascending.
    pub fn words_above(&self, threshold: f64) -> Vec<u32> {
        self.entries
            .iter()
            .filter(|e| e.1 as f64 > threshold)
            .map(|e| e.0)
            .collect()
    }

    /// Word ids ranked by descending count, ties by ascending id.
    pub fn ranked_words(&self) -> Vec<u32> {
        let mut ranked = self.entries.clone();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.into_iter().map(|e| e.0).collect()
    }
}

/// How the per-topic thresholds `c_i` are chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdConfig {
    /// The same threshold for every topic.
    Absolute(f64),
    /// `c_i = n_i / d` for topic total `n_i`.
    Relative(u64),
}

impl Default for ThresholdConfig {
    /// Relative with `d = 500`. Around 100 words per topic pass on a large
    /// news corpus; the right value depends on the corpus.
    fn default() -> Self {
        ThresholdConfig::Relative(500)
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdConfig::Absolute(c) if !(c >= 0.0 && c.is_finite()) => {
                Err(Error::Config("absolute threshold must be a finite value >= 0".into()))
            }
            ThresholdConfig::Relative(0) => Err(Error::Config("relative threshold divisor must be >= 1".into())),
            _ => Ok(()),
        }
    }

    pub fn threshold(&self, total: u64) -> f64 {
        match *self {
            ThresholdConfig::Absolute(c) => c,
            ThresholdConfig::Relative(d) => total as f64 / d as f64,
        }
    }
}

/// One threshold per topic.
pub fn threshold_vector(topics: &[TopicCounts], cfg: &ThresholdConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if topics.is_empty() {
        return Err(Error::Input("no topics given".into()));
    }
    Ok(topics.iter().map(|t| cfg.threshold(t.total())).collect())
}

/// Result of one modified Jaccard comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JaccardOutcome {
    pub intersection: usize,
    pub union: usize,
    /// `intersection / union`, or 0 when the union is empty.
    pub value: f64,
}

impl JaccardOutcome {
    /// Neither topic has a word above its threshold.
    pub fn is_degenerate(&self) -> bool {
        self.union == 0
    }
}

fn jaccard_of_sorted(a: &[u32], b: &[u32]) -> JaccardOutcome {
    let (mut i, mut j, mut inter) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    JaccardOutcome {
        intersection: inter,
        union,
        value: if union == 0 { 0.0 } else { inter as f64 / union as f64 },
    }
}

/// Modified Jaccard coefficient of two topics with thresholds `c_a`, `c_b`.
pub fn modified_jaccard(a: &TopicCounts, b: &TopicCounts, c_a: f64, c_b: f64) -> Result<JaccardOutcome> {
    if !(c_a >= 0.0 && c_b >= 0.0) {
        return Err(Error::Config("thresholds must be >= 0".into()));
    }
    Ok(jaccard_of_sorted(&a.words_above(c_a), &b.words_above(c_b)))
}

/// Cosine similarity of two count vectors.
pub fn cosine(a: &TopicCounts, b: &TopicCounts) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::ZeroVector);
    }
    let norm = |t: &TopicCounts| libm::sqrt(t.entries.iter().map(|e| (e.1 as f64) * (e.1 as f64)).sum());
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    let (ea, eb) = (&a.entries, &b.entries);
    while i < ea.len() && j < eb.len() {
        match ea[i].0.cmp(&eb[j].0) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                dot += ea[i].1 as f64 * eb[j].1 as f64;
                i += 1;
                j += 1;
            }
        }
    }
    Ok((dot / (norm(a) * norm(b))).clamp(0.0, 1.0))
}

/// Mean Jaccard coefficient of the top-`n` word sets for `n = 1..=n_top`.
///
/// Only words with positive counts are ranked. When a topic has fewer than
/// `n` such words its top-`n` set is all of them; a depth at which both sets
/// are empty contributes 0.
pub fn average_jaccard(a: &TopicCounts, b: &TopicCounts, n_top: usize) -> Result<f64> {
    if n_top < 1 {
        return Err(Error::Config("n_top must be at least 1".into()));
    }
    let (ra, rb) = (a.ranked_words(), b.ranked_words());
    let mut set_a: Vec<u32> = Vec::with_capacity(n_top);
    let mut set_b: Vec<u32> = Vec::with_capacity(n_top);
    let mut sum = 0.0;
    for n in 0..n_top {
        if let Some(&w) = ra.get(n) {
            let pos = set_a.binary_search(&w).unwrap_err();
            set_a.insert(pos, w);
        }
        if let Some(&w) = rb.get(n) {
            let pos = set_b.binary_search(&w).unwrap_err();
            set_b.insert(pos, w);
        }
        sum += jaccard_of_sorted(&set_a, &set_b).value;
    }
    Ok(sum / n_top as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Measure {
    #[default]
    ModifiedJaccard,
    Cosine,
    AverageJaccard {
        n_top: usize,
    },
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::ModifiedJaccard => f.write_str("modified-jaccard"),
            Measure::Cosine => f.write_str("cosine"),
            Measure::AverageJaccard { n_top } => write!(f, "average-jaccard(n_top={n_top})"),
        }
    }
}

/// Symmetric similarity matrix over topics, unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    labels: Vec<TopicLabel>,
    values: Vec<f64>,
    measure: Measure,
    degenerate_pairs: Vec<(usize, usize)>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[TopicLabel] {
        &self.labels
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.labels.len() + j]
    }

    /// Pairs `(i, j)`, `i < j`, for which the modified Jaccard union was empty.
    pub fn degenerate_pairs(&self) -> &[(usize, usize)] {
        &self.degenerate_pairs
    }

    /// `1 - s` distances for clustering.
    pub fn to_distances(&self) -> crate::dendrogram::DistanceMatrix {
        crate::dendrogram::DistanceMatrix::from_fn(self.len(), |i, j| 1.0 - self.get(i, j))
    }
}

/// Similarities between all given topics, in the order given.
pub fn pairwise_similarity(
    topics: &[TopicCounts],
    threshold: &ThresholdConfig,
    measure: Measure,
) -> Result<SimilarityMatrix> {
    let n = topics.len();
    let mut values = vec![1.0; n * n];
    let mut degenerate_pairs = Vec::new();
    match measure {
        Measure::ModifiedJaccard => {
            let c = threshold_vector(topics, threshold)?;
            let above: Vec<Vec<u32>> = topics.iter().zip(&c).map(|(t, &c)| t.words_above(c)).collect();
            for i in 0..n {
                for j in i + 1..n {
                    let out = jaccard_of_sorted(&above[i], &above[j]);
                    if out.is_degenerate() {
                        degenerate_pairs.push((i, j));
                    }
                    values[i * n + j] = out.value;
                    values[j * n + i] = out.value;
                }
            }
        }
        Measure::Cosine | Measure::AverageJaccard { .. } => {
            for i in 0..n {
                for j in i + 1..n {
                    let s = match measure {
                        Measure::Cosine => cosine(&topics[i], &topics[j]).map_err(|_| {
                            let empty = if topics[i].is_empty() { &topics[i] } else { &topics[j] };
                            Error::EmptyTopic {
                                run: empty.origin.run,
                                topic: empty.origin.topic,
                            }
                        })?,
                        Measure::AverageJaccard { n_top } => average_jaccard(&topics[i], &topics[j], n_top)?,
                        Measure::ModifiedJaccard => unreachable!(),
                    };
                    values[i * n + j] = s;
                    values[j * n + i] = s;
                }
            }
        }
    }
    Ok(SimilarityMatrix {
        labels: topics.iter().map(TopicCounts::origin).collect(),
        values,
        measure,
        degenerate_pairs,
    })
}

/// Word importance scores `I(v, k)` of one run, V×K row major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceMatrix {
    vocab_size: usize,
    topics: usize,
    values: Vec<f64>,
}

impl ImportanceMatrix {
    pub fn get(&self, word: usize, topic: usize) -> f64 {
        self.values[word * self.topics + topic]
    }

    /// The `n` words with the highest importance for `topic`, ties by id.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<u32> {
        let mut words: Vec<u32> = (0..self.vocab_size as u32).collect();
        words.sort_by(|&a, &b| {
            self.get(b as usize, topic)
                .total_cmp(&self.get(a as usize, topic))
                .then(a.cmp(&b))
        });
        words.truncate(n);
        words
    }
}

/// `I(v,k) = p_vk · (ln(p_vk + ε) − (1/K) Σ_l ln(p_vl + ε))` with
/// `p_vk = n_k^(v) / n_k`.
pub fn word_importance(counts: &CountMatrix, epsilon: f64) -> Result<ImportanceMatrix> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    let k = counts.topics();
    let totals = counts.column_totals();
    if let Some(t) = totals.iter().position(|&n| n == 0) {
        return Err(Error::EmptyTopic { run: 0, topic: t });
    }
    let mut values = Vec::with_capacity(counts.vocab_size() * k);
    let mut share = vec![0.0; k];
    for v in 0..counts.vocab_size() {
        let mut mean_log = 0.0;
        for t in 0..k {
            share[t] = counts.get(v, t) as f64 / totals[t] as f64;
            mean_log += libm::log(share[t] + epsilon);
        }
        mean_log /= k as f64;
        values.extend(share.iter().map(|&p| p * (libm::log(p + epsilon) - mean_log)));
    }
    Ok(ImportanceMatrix {
        vocab_size: counts.vocab_size(),
        topics: k,
        values,
    })
}
