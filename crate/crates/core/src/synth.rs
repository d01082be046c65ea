//! Synthetic corpora with known topic structure.
//!
//! The vocabulary is split into `n_true_topics` contiguous blocks. A true
//! topic draws words from its block with Zipf weights `1/(j+1)`. Every
//! document has a primary topic; each token comes from it with probability
//! `topic_concentration` and from a uniformly chosen topic otherwise. With
//! probability `noise_rate` the word is replaced by a uniform draw from the
//! whole vocabulary.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n_true_topics: usize,
    pub vocab_size: usize,
    pub docs: usize,
    pub doc_length: usize,
    /// Probability that a token belongs to its document's primary topic, in (0, 1].
    pub topic_concentration: f64,
    /// Probability of a uniformly random word, in [0, 1).
    pub noise_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_true_topics: 5,
            vocab_size: 200,
            docs: 100,
            doc_length: 50,
            topic_concentration: 0.8,
            noise_rate: 0.05,
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_true_topics == 0 || self.docs == 0 || self.doc_length == 0 {
            return Err(Error::Config("topics, docs and doc_length must be positive".into()));
        }
        if self.vocab_size < self.n_true_topics {
            return Err(Error::Config("vocab_size must be at least n_true_topics".into()));
        }
        if !(self.topic_concentration > 0.0 && self.topic_concentration <= 1.0) {
            return Err(Error::Config("topic_concentration must lie in (0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(Error::Config("noise_rate must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Zero padded names sort like their indices.
pub fn word_name(index: usize, vocab_size: usize) -> String {
    let width = format!("{}", vocab_size.saturating_sub(1)).len();
    format!("w{index:0width$}")
}

pub fn generate(spec: &SyntheticSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let block = spec.vocab_size / spec.n_true_topics;
    let mut cumulative = Vec::with_capacity(block);
    let mut acc = 0.0;
    for j in 0..block {
        acc += 1.0 / (j + 1) as f64;
        cumulative.push(acc);
    }
    let names: Vec<String> = (0..spec.vocab_size).map(|i| word_name(i, spec.vocab_size)).collect();
    let width = format!("{}", spec.docs.saturating_sub(1)).len();

    let docs = (0..spec.docs)
        .map(|m| {
            let primary = rng.gen_range(0..spec.n_true_topics);
            let tokens: Vec<&str> = (0..spec.doc_length)
                .map(|_| {
                    let topic = if rng.gen::<f64>() < spec.topic_concentration {
                        primary
                    } else {
                        rng.gen_range(0..spec.n_true_topics)
                    };
                    let word = if rng.gen::<f64>() < spec.noise_rate {
                        rng.gen_range(0..spec.vocab_size)
                    } else {
                        let u = rng.gen::<f64>() * acc;
                        topic * block + cumulative.partition_point(|&c| c <= u).min(block - 1)
                    };
                    names[word].as_str()
                })
                .collect();
            (format!("doc{m:0width$}"), tokens)
        })
        .collect();
    Corpus::from_token_strings(docs)
}
