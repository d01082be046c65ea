use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Preprocessing stage that can leave a corpus without any tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterStage {
    /// Case folding, number and punctuation stripping, tokenization.
    Tokenize,
    Stopwords,
    MinWordCount,
}

impl fmt::Display for FilterStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterStage::Tokenize => "tokenization (number/punctuation stripping)",
            FilterStage::Stopwords => "stopword removal",
            FilterStage::MinWordCount => "minimum word count filter",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("no tokens left after {0}")]
    EmptyCorpus(FilterStage),
    #[error("topic {topic} of run {run} has no assigned tokens")]
    EmptyTopic { run: usize, topic: usize },
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("R ≥ 2 required, got {0} run(s)")]
    TooFewRuns(usize),
    #[error("at least two observations are required for clustering, got {0}")]
    TooFewObservations(usize),
}
