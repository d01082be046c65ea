//! Document ingestion and the text preprocessing pipeline.
//!
//! Filters run in a fixed order: case folding, removal of numbers and
//! punctuation, whitespace tokenization, stopword removal and finally the
//! corpus-wide minimum word count. The resulting vocabulary is sorted, so the
//! output is fully determined by the input documents and the configuration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, FilterStage, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    pub meta: BTreeMap<String, String>,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        RawDocument {
            id: id.into(),
            text: text.into(),
            meta: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    pub strip_numbers: bool,
    pub strip_punctuation: bool,
    pub stopwords: BTreeSet<String>,
    /// Words whose corpus-wide count is below this value are dropped.
    pub min_word_count: usize,
    pub deduplicate: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            lowercase: true,
            strip_numbers: true,
            strip_punctuation: true,
            stopwords: BTreeSet::new(),
            min_word_count: 6,
            deduplicate: true,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_word_count < 1 {
            return Err(Error::Config("min_word_count must be at least 1".into()));
        }
        Ok(())
    }

    fn normalize(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        for c in text.chars() {
            if self.strip_numbers && c.is_numeric() {
                continue;
            }
            if self.strip_punctuation && !c.is_alphanumeric() && !c.is_whitespace() {
                continue;
            }
            if self.lowercase {
                out.extend(c.to_lowercase());
            } else {
                out.push(c);
            }
        }
        out
    }

    fn tokenize<'a>(&self, normalized: &'a str) -> impl Iterator<Item = &'a str> {
        normalized.split_whitespace()
    }

    /// Stopwords pass through the same normalization as the text, so that an
    /// entry like `"Don't"` matches the token `dont`.
    fn normalized_stopwords(&self) -> BTreeSet<String> {
        self.stopwords
            .iter()
            .flat_map(|s| {
                let n = self.normalize(s);
                self.tokenize(&n).map(ToString::to_string).collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Documents left after removing exact-text duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deduplicated {
    pub documents: Vec<RawDocument>,
    /// Ids of the removed documents, in input order.
    pub removed: Vec<String>,
}

/// Keeps the first occurrence of every distinct text, preserving input order.
pub fn deduplicate(docs: Vec<RawDocument>) -> Deduplicated {
    let mut seen = BTreeSet::new();
    let mut documents = Vec::with_capacity(docs.len());
    let mut removed = Vec::new();
    for doc in docs {
        if seen.contains(doc.text.as_str()) {
            removed.push(doc.id);
        } else {
            seen.insert(doc.text.clone());
            documents.push(doc);
        }
    }
    Deduplicated { documents, removed }
}

/// Tokenized corpus over a sorted vocabulary.
///
/// Token ids index into `vocabulary` and are zero based in memory. The JSON
/// corpus file shifts them to `1..=V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    vocabulary: Vec<String>,
    doc_ids: Vec<String>,
    documents: Vec<Vec<u32>>,
}

impl Corpus {
    /// Validates and wraps already tokenized data.
    pub fn new(vocabulary: Vec<String>, doc_ids: Vec<String>, documents: Vec<Vec<u32>>) -> Result<Self> {
        if doc_ids.len() != documents.len() {
            return Err(Error::Input("doc_ids and documents differ in length".into()));
        }
        if vocabulary.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("vocabulary must be sorted and free of duplicates".into()));
        }
        let v = vocabulary.len();
        for (id, doc) in doc_ids.iter().zip(&documents) {
            if let Some(t) = doc.iter().find(|&&t| t as usize >= v) {
                return Err(Error::Input(alloc::format!(
                    "document {id}: token id {t} outside vocabulary of size {v}"
                )));
            }
        }
        let mut ids = BTreeSet::new();
        for id in &doc_ids {
            if id.is_empty() || !ids.insert(id.as_str()) {
                return Err(Error::Input(alloc::format!(
                    "document ids must be nonempty and unique (offending id: {id:?})"
                )));
            }
        }
        Ok(Corpus {
            vocabulary,
            doc_ids,
            documents,
        })
    }

    /// Builds a corpus from token strings; the vocabulary consists of every
    /// word that occurs at least once.
    pub fn from_token_strings<S: AsRef<str>>(docs: Vec<(String, Vec<S>)>) -> Result<Self> {
        let words: BTreeSet<&str> = docs
            .iter()
            .flat_map(|(_, toks)| toks.iter().map(AsRef::as_ref))
            .collect();
        let index: BTreeMap<&str, u32> = words.iter().enumerate().map(|(i, w)| (*w, i as u32)).collect();
        let documents = docs
            .iter()
            .map(|(_, toks)| toks.iter().map(|t| index[t.as_ref()]).collect())
            .collect();
        let vocabulary = words.into_iter().map(ToString::to_string).collect();
        let doc_ids = docs.iter().map(|(id, _)| id.clone()).collect();
        Corpus::new(vocabulary, doc_ids, documents)
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn documents(&self) -> &[Vec<u32>] {
        &self.documents
    }

    pub fn num_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }

    pub fn word_counts(&self) -> Vec<u64> {
        let mut counts = alloc::vec![0u64; self.vocabulary.len()];
        for &t in self.documents.iter().flatten() {
            counts[t as usize] += 1;
        }
        counts
    }

    /// Document `m` rendered back to space separated words.
    pub fn render(&self, m: usize) -> String {
        let mut out = String::new();
        for (i, &t) in self.documents[m].iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&self.vocabulary[t as usize]);
        }
        out
    }
}

/// What the pipeline removed along the way.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub input_documents: usize,
    pub duplicates_removed: Vec<String>,
    /// Documents without tokens after filtering; they are not part of the corpus.
    pub empty_documents: Vec<String>,
    pub tokens_after_tokenize: usize,
    pub tokens_after_stopwords: usize,
    pub tokens_after_min_count: usize,
    pub words_below_min_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preprocessed {
    pub corpus: Corpus,
    pub report: FilterReport,
}

/// Runs the full preprocessing pipeline.
pub fn preprocess(docs: &[RawDocument], cfg: &PreprocessConfig) -> Result<Preprocessed> {
    cfg.validate()?;
    let mut report = FilterReport {
        input_documents: docs.len(),
        ..FilterReport::default()
    };
    let docs: Vec<RawDocument> = if cfg.deduplicate {
        let d = deduplicate(docs.to_vec());
        report.duplicates_removed = d.removed;
        d.documents
    } else {
        docs.to_vec()
    };
    if docs.is_empty() {
        return Err(Error::Input("no documents to preprocess".into()));
    }
    let mut ids = BTreeSet::new();
    for d in &docs {
        if d.id.is_empty() || !ids.insert(d.id.as_str()) {
            return Err(Error::Input(alloc::format!(
                "document ids must be nonempty and unique (offending id: {:?})",
                d.id
            )));
        }
    }

    let mut tokenized: Vec<Vec<String>> = docs
        .iter()
        .map(|d| {
            let n = cfg.normalize(&d.text);
            cfg.tokenize(&n).map(ToString::to_string).collect()
        })
        .collect();
    report.tokens_after_tokenize = tokenized.iter().map(Vec::len).sum();
    if report.tokens_after_tokenize == 0 {
        return Err(Error::EmptyCorpus(FilterStage::Tokenize));
    }

    let stopwords = cfg.normalized_stopwords();
    for toks in &mut tokenized {
        toks.retain(|t| !stopwords.contains(t));
    }
    report.tokens_after_stopwords = tokenized.iter().map(Vec::len).sum();
    if report.tokens_after_stopwords == 0 {
        return Err(Error::EmptyCorpus(FilterStage::Stopwords));
    }

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tokenized.iter().flatten() {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    let rare: BTreeSet<String> = counts
        .iter()
        .filter(|(_, &c)| c < cfg.min_word_count)
        .map(|(w, _)| (*w).to_string())
        .collect();
    report.words_below_min_count = rare.len();
    for toks in &mut tokenized {
        toks.retain(|t| !rare.contains(t));
    }
    report.tokens_after_min_count = tokenized.iter().map(Vec::len).sum();
    if report.tokens_after_min_count == 0 {
        return Err(Error::EmptyCorpus(FilterStage::MinWordCount));
    }

    let mut kept = Vec::with_capacity(docs.len());
    for (doc, toks) in docs.iter().zip(tokenized) {
        if toks.is_empty() {
            report.empty_documents.push(doc.id.clone());
        } else {
            kept.push((doc.id.clone(), toks));
        }
    }
    let corpus = Corpus::from_token_strings(kept)?;
    Ok(Preprocessed { corpus, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn doc(id: &str, text: &str) -> RawDocument {
        RawDocument::new(id, text)
    }

    fn plain(min: usize) -> PreprocessConfig {
        PreprocessConfig {
            min_word_count: min,
            ..PreprocessConfig::default()
        }
    }

    #[test]
    fn exact_duplicates_collapse_to_first() {
        let out = deduplicate(vec![doc("A", "x y"), doc("B", "x y"), doc("C", "z")]);
        let ids: Vec<_> = out.documents.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["A", "C"]);
        assert_eq!(out.removed, ["B"]);
        assert!(deduplicate(vec![]).documents.is_empty());
    }

    #[test]
    fn case_folding_and_punctuation() {
        let out = preprocess(&[doc("d1", "Trump, Trump trump!")], &plain(1)).unwrap();
        assert_eq!(out.corpus.vocabulary(), ["trump"]);
        assert_eq!(out.corpus.documents(), [vec![0, 0, 0]]);
    }

    #[test]
    fn min_count_keeps_only_frequent_words() {
        let out = preprocess(&[doc("d1", "a b"), doc("d2", "a c")], &plain(2)).unwrap();
        assert_eq!(out.corpus.vocabulary(), ["a"]);
        assert_eq!(out.corpus.documents(), [vec![0], vec![0]]);
        assert_eq!(out.report.words_below_min_count, 2);
    }

    #[test]
    fn stopwords_are_removed() {
        let cfg = PreprocessConfig {
            stopwords: ["the".to_string()].into_iter().collect(),
            ..plain(1)
        };
        let out = preprocess(&[doc("d", "the cat")], &cfg).unwrap();
        assert_eq!(out.corpus.vocabulary(), ["cat"]);
    }

    #[test]
    fn stopword_entries_are_normalized_like_text() {
        let cfg = PreprocessConfig {
            stopwords: ["Don't".to_string()].into_iter().collect(),
            ..plain(1)
        };
        let out = preprocess(&[doc("d", "don't stop")], &cfg).unwrap();
        assert_eq!(out.corpus.vocabulary(), ["stop"]);
    }

    #[test]
    fn numbers_and_punctuation_are_deleted_inside_words() {
        let out = preprocess(&[doc("d", "Trump's 2016 run-off b4")], &plain(1)).unwrap();
        assert_eq!(out.corpus.vocabulary(), ["b", "runoff", "trumps"]);
    }

    #[test]
    fn flags_can_disable_filters() {
        let cfg = PreprocessConfig {
            lowercase: false,
            strip_numbers: false,
            strip_punctuation: false,
            ..plain(1)
        };
        let out = preprocess(&[doc("d", "A a 1 !")], &cfg).unwrap();
        assert_eq!(out.corpus.vocabulary(), ["!", "1", "A", "a"]);
    }

    #[test]
    fn empty_documents_are_dropped_and_reported() {
        let out = preprocess(&[doc("d1", "word word"), doc("d2", "123 !!")], &plain(1)).unwrap();
        assert_eq!(out.corpus.doc_ids(), ["d1"]);
        assert_eq!(out.report.empty_documents, ["d2"]);
    }

    #[test]
    fn empty_corpus_names_the_stage() {
        let err = preprocess(&[doc("d", "42 !")], &plain(1)).unwrap_err();
        assert_eq!(err, Error::EmptyCorpus(FilterStage::Tokenize));

        let cfg = PreprocessConfig {
            stopwords: ["the".to_string()].into_iter().collect(),
            ..plain(1)
        };
        let err = preprocess(&[doc("d", "The the")], &cfg).unwrap_err();
        assert_eq!(err, Error::EmptyCorpus(FilterStage::Stopwords));

        let err = preprocess(&[doc("d", "a b c")], &plain(2)).unwrap_err();
        assert_eq!(err, Error::EmptyCorpus(FilterStage::MinWordCount));
    }

    #[test]
    fn duplicated_documents_are_counted_once() {
        let out = preprocess(&[doc("a", "x"), doc("b", "x"), doc("c", "y")], &plain(1)).unwrap();
        assert_eq!(out.report.duplicates_removed, ["b"]);
        assert_eq!(out.corpus.num_docs(), 2);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        assert!(matches!(
            preprocess(&[doc("a", "x"), doc("a", "y")], &plain(1)),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn zero_min_count_is_a_config_error() {
        assert!(matches!(preprocess(&[doc("a", "x")], &plain(0)), Err(Error::Config(_))));
    }

    #[test]
    fn corpus_rejects_out_of_range_tokens_and_unsorted_vocabulary() {
        let v = vec!["a".to_string(), "b".to_string()];
        assert!(Corpus::new(v.clone(), vec!["d".into()], vec![vec![2]]).is_err());
        let rev = vec!["b".to_string(), "a".to_string()];
        assert!(Corpus::new(rev, vec!["d".into()], vec![vec![0]]).is_err());
        assert!(Corpus::new(v, vec!["d".into()], vec![vec![1, 0]]).is_ok());
    }
}
