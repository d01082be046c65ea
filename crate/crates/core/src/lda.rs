//! Collapsed Gibbs sampling for LDA and replicated fits.
//!
//! Each token's topic is resampled from
//!
//! ```text
//! p(k) ∝ (n_k^(w) + β) / (n_k + V·β) · (n_m^(k) + α)
//! ```
//!
//! where every count excludes the token being resampled. Initial topics are
//! drawn uniformly. The state after the last sweep is the result; there is
//! no burn-in or thinning.
//!
//! Randomness comes from ChaCha8 seeded with a 64-bit seed. Seeds of
//! replicated runs are the SplitMix64 sequence started at the master seed.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::exec::{Executor, Sequential};
use crate::similarity::{TopicCounts, TopicLabel};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LdaConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// `topics` topics with `alpha = beta = 1/topics` and 270 sweeps.
    pub fn with_topics(topics: usize) -> Self {
        let prior = 1.0 / topics.max(1) as f64;
        LdaConfig {
            topics,
            alpha: prior,
            beta: prior,
            iterations: 270,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.topics < 1 {
            return Err(Error::Config("number of topics must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config("beta must be positive".into()));
        }
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig::with_topics(50)
    }
}

/// Sampler state: topic of every token plus the derived count tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentState {
    topics: usize,
    vocab_size: usize,
    assignments: Vec<Vec<u32>>,
    /// M×K, row major.
    doc_topic: Vec<u32>,
    /// V×K, row major.
    topic_word: Vec<u32>,
    topic_totals: Vec<u64>,
}

impl AssignmentState {
    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.assignments
    }

    pub fn doc_topic_count(&self, doc: usize, topic: usize) -> u32 {
        self.doc_topic[doc * self.topics + topic]
    }

    pub fn topic_word_count(&self, word: usize, topic: usize) -> u32 {
        self.topic_word[word * self.topics + topic]
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_totals
    }

    /// Checks that the count tables agree with the assignments and the corpus.
    pub fn check_invariants(&self, corpus: &Corpus) -> Result<(), &'static str> {
        let k = self.topics;
        if self.assignments.len() != corpus.num_docs() {
            return Err("assignment rows differ from document count");
        }
        let mut doc_topic = vec![0u32; self.doc_topic.len()];
        let mut topic_word = vec![0u32; self.topic_word.len()];
        for (m, (doc, z)) in corpus.documents().iter().zip(&self.assignments).enumerate() {
            if doc.len() != z.len() {
                return Err("assignment length differs from document length");
            }
            let row: u64 = self.doc_topic[m * k..(m + 1) * k].iter().map(|&c| c as u64).sum();
            if row != doc.len() as u64 {
                return Err("document-topic row does not sum to document length");
            }
            for (&w, &t) in doc.iter().zip(z) {
                if t as usize >= k {
                    return Err("topic id out of range");
                }
                doc_topic[m * k + t as usize] += 1;
                topic_word[w as usize * k + t as usize] += 1;
            }
        }
        if doc_topic != self.doc_topic || topic_word != self.topic_word {
            return Err("count tables disagree with assignments");
        }
        for t in 0..k {
            let col: u64 = (0..self.vocab_size).map(|v| self.topic_word[v * k + t] as u64).sum();
            if col != self.topic_totals[t] {
                return Err("topic-word column does not sum to the topic total");
            }
        }
        if self.topic_totals.iter().sum::<u64>() != corpus.total_tokens() as u64 {
            return Err("topic totals do not sum to the corpus token count");
        }
        Ok(())
    }

    /// The V×K word-count matrix of the topics.
    pub fn count_matrix(&self) -> CountMatrix {
        CountMatrix {
            vocab_size: self.vocab_size,
            topics: self.topics,
            data: self.topic_word.iter().map(|&c| c as u64).collect(),
        }
    }
}

/// Word counts per topic of one run, V×K row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountMatrix {
    vocab_size: usize,
    topics: usize,
    data: Vec<u64>,
}

impl CountMatrix {
    pub fn from_rows(vocab_size: usize, topics: usize, data: Vec<u64>) -> Result<Self> {
        if topics == 0 {
            return Err(Error::Input("count matrix needs at least one topic".into()));
        }
        if data.len() != vocab_size * topics {
            return Err(Error::Input(alloc::format!(
                "count matrix of {vocab_size}x{topics} needs {} entries, got {}",
                vocab_size * topics,
                data.len()
            )));
        }
        Ok(CountMatrix {
            vocab_size,
            topics,
            data,
        })
    }

    /// Builds a matrix from topic columns of equal length.
    pub fn from_columns(columns: &[Vec<u64>]) -> Result<Self> {
        let topics = columns.len();
        let v = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != v) {
            return Err(Error::Input("topic columns differ in length".into()));
        }
        let mut data = vec![0; v * topics];
        for (k, col) in columns.iter().enumerate() {
            for (w, &c) in col.iter().enumerate() {
                data[w * topics + k] = c;
            }
        }
        CountMatrix::from_rows(v, topics, data)
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn get(&self, word: usize, topic: usize) -> u64 {
        self.data[word * self.topics + topic]
    }

    /// Row-major counts.
    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    pub fn row(&self, word: usize) -> &[u64] {
        &self.data[word * self.topics..(word + 1) * self.topics]
    }

    pub fn column_totals(&self) -> Vec<u64> {
        let mut totals = vec![0; self.topics];
        for row in self.data.chunks_exact(self.topics) {
            for (t, &c) in totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        totals
    }

    /// Sparse view of topic `topic`, labeled as topic `topic` of run `run`.
    pub fn topic(&self, run: usize, topic: usize) -> TopicCounts {
        let entries = (0..self.vocab_size)
            .filter_map(|v| {
                let c = self.get(v, topic);
                (c > 0).then_some((v as u32, c))
            })
            .collect();
        TopicCounts::from_sparse(entries, TopicLabel { run, topic })
    }

    pub fn topic_list(&self, run: usize) -> Vec<TopicCounts> {
        (0..self.topics).map(|k| self.topic(run, k)).collect()
    }

    /// Same matrix with topic columns reordered: column `k` of the result is
    /// column `order[k]` of `self`.
    pub fn permute_topics(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.topics);
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.data.chunks_exact(self.topics) {
            data.extend(order.iter().map(|&k| row[k]));
        }
        CountMatrix { data, ..self.clone() }
    }
}

/// One fitted (or loaded) run.
#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    pub counts: CountMatrix,
    /// Configuration the run was fitted with, including its seed, if known.
    pub config: Option<LdaConfig>,
}

/// Replicated runs over one vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSet {
    vocabulary: Vec<alloc::string::String>,
    runs: Vec<Run>,
}

impl RunSet {
    pub fn new(vocabulary: Vec<alloc::string::String>, runs: Vec<Run>) -> Result<Self> {
        let Some(first) = runs.first() else {
            return Err(Error::Input("a run set needs at least one run".into()));
        };
        let k = first.counts.topics();
        for (r, run) in runs.iter().enumerate() {
            if run.counts.vocab_size() != vocabulary.len() {
                return Err(Error::Input(alloc::format!(
                    "run {r} has {} vocabulary rows, expected {}",
                    run.counts.vocab_size(),
                    vocabulary.len()
                )));
            }
            if run.counts.topics() != k {
                return Err(Error::Input(alloc::format!(
                    "run {r} has {} topics, expected {k}",
                    run.counts.topics()
                )));
            }
        }
        Ok(RunSet { vocabulary, runs })
    }

    /// Convenience constructor for count matrices without fit metadata.
    pub fn from_counts(vocabulary: Vec<alloc::string::String>, counts: Vec<CountMatrix>) -> Result<Self> {
        let runs = counts.into_iter().map(|counts| Run { counts, config: None }).collect();
        RunSet::new(vocabulary, runs)
    }

    pub fn vocabulary(&self) -> &[alloc::string::String] {
        &self.vocabulary
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn topics_per_run(&self) -> usize {
        self.runs[0].counts.topics()
    }

    /// Total number of topics N = R·K.
    pub fn total_topics(&self) -> usize {
        self.len() * self.topics_per_run()
    }

    /// All topics, run major.
    pub fn topics(&self) -> Vec<TopicCounts> {
        self.runs
            .iter()
            .enumerate()
            .flat_map(|(r, run)| run.counts.topic_list(r))
            .collect()
    }

    /// The runs at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let runs = indices
            .iter()
            .map(|&i| {
                self.runs
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::Input(alloc::format!("run index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        RunSet::new(self.vocabulary.clone(), runs)
    }
}

/// One full Gibbs sampler over a corpus.
pub fn fit_lda(corpus: &Corpus, cfg: &LdaConfig) -> Result<AssignmentState> {
    fit_lda_observed(corpus, cfg, |_, _| {})
}

/// Like [`fit_lda`], calling `observe(sweep, state)` after every sweep.
///
/// In debug builds the count invariants are asserted after every sweep.
pub fn fit_lda_observed<F>(corpus: &Corpus, cfg: &LdaConfig, mut observe: F) -> Result<AssignmentState>
where
    F: FnMut(usize, &AssignmentState),
{
    cfg.validate()?;
    if corpus.num_docs() == 0 {
        return Err(Error::Input("corpus has no documents".into()));
    }
    if let Some(m) = corpus.documents().iter().position(Vec::is_empty) {
        return Err(Error::Input(alloc::format!(
            "document {} has no tokens",
            corpus.doc_ids()[m]
        )));
    }
    let k = cfg.topics;
    let v = corpus.vocab_size();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut state = AssignmentState {
        topics: k,
        vocab_size: v,
        assignments: Vec::with_capacity(corpus.num_docs()),
        doc_topic: vec![0; corpus.num_docs() * k],
        topic_word: vec![0; v * k],
        topic_totals: vec![0; k],
    };
    for (m, doc) in corpus.documents().iter().enumerate() {
        let z: Vec<u32> = doc
            .iter()
            .map(|&w| {
                let t = rng.gen_range(0..k);
                state.doc_topic[m * k + t] += 1;
                state.topic_word[w as usize * k + t] += 1;
                state.topic_totals[t] += 1;
                t as u32
            })
            .collect();
        state.assignments.push(z);
    }

    let v_beta = v as f64 * cfg.beta;
    let mut weights = vec![0.0f64; k];
    for sweep in 0..cfg.iterations {
        for (m, doc) in corpus.documents().iter().enumerate() {
            let dt = &mut state.doc_topic[m * k..(m + 1) * k];
            for (i, &w) in doc.iter().enumerate() {
                let w = w as usize;
                let old = state.assignments[m][i] as usize;
                let tw = &mut state.topic_word[w * k..(w + 1) * k];
                dt[old] -= 1;
                tw[old] -= 1;
                state.topic_totals[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (tw[t] as f64 + cfg.beta) / (state.topic_totals[t] as f64 + v_beta)
                        * (dt[t] as f64 + cfg.alpha);
                    weights[t] = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                dt[new] += 1;
                tw[new] += 1;
                state.topic_totals[new] += 1;
                state.assignments[m][i] = new as u32;
            }
        }
        debug_assert_eq!(state.check_invariants(corpus), Ok(()));
        observe(sweep, &state);
    }
    Ok(state)
}

/// SplitMix64 step: advances `state` and returns the next output.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seeds for `runs` replications.
pub fn derive_seeds(master_seed: u64, runs: usize) -> Vec<u64> {
    let mut state = master_seed;
    (0..runs).map(|_| splitmix64(&mut state)).collect()
}

/// Fits `runs` independent replications with seeds from [`derive_seeds`].
pub fn replicate(corpus: &Corpus, cfg: &LdaConfig, runs: usize, master_seed: u64) -> Result<RunSet> {
    replicate_with(&Sequential, corpus, cfg, runs, master_seed)
}

pub fn replicate_with<E: Executor>(
    exec: &E,
    corpus: &Corpus,
    cfg: &LdaConfig,
    runs: usize,
    master_seed: u64,
) -> Result<RunSet> {
    if runs < 1 {
        return Err(Error::Config("at least one replication is required".into()));
    }
    cfg.validate()?;
    let seeds = derive_seeds(master_seed, runs);
    let fitted = exec.map(runs, |r| {
        let run_cfg = LdaConfig { seed: seeds[r], ..*cfg };
        fit_lda(corpus, &run_cfg).map(|state| Run {
            counts: state.count_matrix(),
            config: Some(run_cfg),
        })
    });
    let runs = fitted.into_iter().collect::<Result<Vec<_>>>()?;
    RunSet::new(corpus.vocabulary().to_vec(), runs)
}
