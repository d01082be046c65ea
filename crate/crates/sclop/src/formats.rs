//! On-disk representations of corpora, runs, reports and study tables.
//!
//! Run, topic and token numbers are 1-based in every file; in memory they
//! are 0-based.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sclop_core::corpus::Corpus;
use sclop_core::dendrogram::{Dendrogram, Merge};
use sclop_core::lda::{CountMatrix, LdaConfig, Run, RunSet};
use sclop_core::prototype::{PrototypeResult, SampleKind, StudyResult};
use sclop_core::sclop::SclopReport;
use sclop_core::similarity::{Measure, SimilarityMatrix, ThresholdConfig, TopicLabel};

use crate::error::{CliError, Result};

pub(crate) fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    fs::write(path, bytes).map_err(CliError::io(path))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable value");
    bytes.push(b'\n');
    write_file(path, bytes)
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::format(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    csv::Writer::from_path(path).map_err(|e| CliError::format(path, e))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::format(path, e)
}

// ---------------------------------------------------------------- corpus

#[derive(Serialize, Deserialize)]
struct CorpusFile {
    vocabulary: Vec<String>,
    docs: Vec<DocFile>,
}

#[derive(Serialize, Deserialize)]
struct DocFile {
    id: String,
    tokens: Vec<u32>,
}

/// Hex SHA-256 of a byte string; used to tie runs to the corpus file they
/// were fitted on.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn corpus_bytes(corpus: &Corpus) -> Vec<u8> {
    let file = CorpusFile {
        vocabulary: corpus.vocabulary().to_vec(),
        docs: corpus
            .doc_ids()
            .iter()
            .zip(corpus.documents())
            .map(|(id, tokens)| DocFile {
                id: id.clone(),
                tokens: tokens.iter().map(|&t| t + 1).collect(),
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec(&file).expect("serializable corpus");
    bytes.push(b'\n');
    bytes
}

/// Writes the corpus and returns the hash of the written bytes.
pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<String> {
    let bytes = corpus_bytes(corpus);
    write_file(path, &bytes)?;
    Ok(sha256_hex(&bytes))
}

/// Reads a corpus together with the hash of the file.
pub fn read_corpus(path: &Path) -> Result<(Corpus, String)> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    let file: CorpusFile = serde_json::from_slice(&bytes).map_err(|e| CliError::format(path, e))?;
    let v = file.vocabulary.len() as u32;
    let mut ids = Vec::with_capacity(file.docs.len());
    let mut documents = Vec::with_capacity(file.docs.len());
    for doc in file.docs {
        let tokens = doc
            .tokens
            .iter()
            .map(|&t| {
                if (1..=v).contains(&t) {
                    Ok(t - 1)
                } else {
                    Err(CliError::format(
                        path,
                        format!("document {}: token id {t} outside 1..={v}", doc.id),
                    ))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        ids.push(doc.id);
        documents.push(tokens);
    }
    let corpus = Corpus::new(file.vocabulary, ids, documents).map_err(|e| CliError::format(path, e))?;
    Ok((corpus, sha256_hex(&bytes)))
}

// ---------------------------------------------------------------- runs

/// Provenance written next to every run CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSidecar {
    #[serde(rename = "K")]
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub corpus_hash: String,
    pub run_index: usize,
}

impl RunSidecar {
    pub fn config(&self) -> LdaConfig {
        LdaConfig {
            topics: self.k,
            alpha: self.alpha,
            beta: self.beta,
            iterations: self.iterations,
            seed: self.seed,
        }
    }
}

pub fn run_csv_name(index: usize) -> String {
    format!("run_{:03}.csv", index + 1)
}

/// Writes `counts` as `word,topic1..topicK`.
pub fn write_count_csv(path: &Path, vocabulary: &[String], counts: &CountMatrix) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["word".to_string()];
    header.extend((1..=counts.topics()).map(|k| format!("topic{k}")));
    w.write_record(&header).map_err(csv_err(path))?;
    for (v, word) in vocabulary.iter().enumerate() {
        let mut record = vec![word.clone()];
        record.extend(counts.row(v).iter().map(u64::to_string));
        w.write_record(&record).map_err(csv_err(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn read_count_csv(path: &Path) -> Result<(Vec<String>, CountMatrix)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let k = r.headers().map_err(csv_err(path))?.len().saturating_sub(1);
    if k == 0 {
        return Err(CliError::format(
            path,
            "expected a word column followed by topic columns",
        ));
    }
    let mut vocabulary = Vec::new();
    let mut data = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(csv_err(path))?;
        vocabulary.push(record[0].to_string());
        for field in record.iter().skip(1) {
            let count = field
                .trim()
                .parse::<u64>()
                .map_err(|_| CliError::format(path, format!("row {}: bad count {field:?}", line + 2)))?;
            data.push(count);
        }
    }
    let counts = CountMatrix::from_rows(vocabulary.len(), k, data).map_err(|e| CliError::format(path, e))?;
    Ok((vocabulary, counts))
}

/// A run directory as read from disk.
#[derive(Debug)]
pub struct RunDir {
    pub runs: RunSet,
    pub csv_paths: Vec<PathBuf>,
    pub sidecars: Vec<Option<RunSidecar>>,
}

pub fn write_run(dir: &Path, vocabulary: &[String], counts: &CountMatrix, sidecar: &RunSidecar) -> Result<PathBuf> {
    let csv = dir.join(run_csv_name(sidecar.run_index - 1));
    write_count_csv(&csv, vocabulary, counts)?;
    write_json(&csv.with_extension("json"), sidecar)?;
    Ok(csv)
}

/// Loads every `run_*.csv` of a directory in name order, with its sidecar if
/// present. All runs must share the vocabulary.
pub fn read_run_dir(dir: &Path) -> Result<RunDir> {
    let mut csv_paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(CliError::io(dir))?
        .map(|e| e.map(|e| e.path()).map_err(CliError::io(dir)))
        .collect::<Result<_>>()?;
    csv_paths.retain(|p| {
        let name = p.file_name().unwrap_or_default().to_string_lossy();
        name.starts_with("run_") && name.ends_with(".csv")
    });
    csv_paths.sort();
    if csv_paths.is_empty() {
        return Err(CliError::Usage(format!("no run_*.csv files in {}", dir.display())));
    }
    let mut vocabulary: Option<Vec<String>> = None;
    let mut runs = Vec::new();
    let mut sidecars = Vec::new();
    for path in &csv_paths {
        let (vocab, counts) = read_count_csv(path)?;
        match &vocabulary {
            None => vocabulary = Some(vocab),
            Some(v) if *v == vocab => {}
            Some(_) => return Err(CliError::format(path, "vocabulary differs from the first run")),
        }
        let side = path.with_extension("json");
        let sidecar = if side.exists() {
            Some(read_json::<RunSidecar>(&side)?)
        } else {
            None
        };
        runs.push(Run {
            counts,
            config: sidecar.as_ref().map(RunSidecar::config),
        });
        sidecars.push(sidecar);
    }
    let runs = RunSet::new(vocabulary.unwrap_or_default(), runs).map_err(|e| CliError::format(dir, e))?;
    Ok(RunDir {
        runs,
        csv_paths,
        sidecars,
    })
}

// ---------------------------------------------------------------- labels

pub fn label(l: TopicLabel) -> String {
    l.to_string()
}

/// Parses a 1-based `run.topic` label.
pub fn parse_label(s: &str) -> Option<TopicLabel> {
    let (r, k) = s.split_once('.')?;
    let (r, k): (usize, usize) = (r.parse().ok()?, k.parse().ok()?);
    (r >= 1 && k >= 1).then(|| TopicLabel {
        run: r - 1,
        topic: k - 1,
    })
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub score: f64,
    pub u_sum: f64,
    pub u_max: f64,
    pub groups: Vec<GroupFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GroupFile {
    pub members: Vec<String>,
    pub t: Vec<u64>,
    pub disparity: f64,
}

impl From<&SclopReport> for ReportFile {
    fn from(r: &SclopReport) -> Self {
        ReportFile {
            score: r.score,
            u_sum: r.u_sum,
            u_max: r.u_max,
            groups: r
                .groups
                .iter()
                .map(|g| GroupFile {
                    members: g.members.iter().map(|&m| label(m)).collect(),
                    t: g.histogram.clone(),
                    disparity: g.disparity,
                })
                .collect(),
        }
    }
}

/// How a similarity matrix was computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig {
    pub measure: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_top: Option<usize>,
    pub threshold_mode: String,
    pub threshold_value: f64,
}

impl ScoringConfig {
    pub fn new(measure: Measure, threshold: ThresholdConfig) -> Self {
        let (measure, n_top) = match measure {
            Measure::ModifiedJaccard => ("modified-jaccard", None),
            Measure::Cosine => ("cosine", None),
            Measure::AverageJaccard { n_top } => ("average-jaccard", Some(n_top)),
        };
        let (mode, value) = match threshold {
            ThresholdConfig::Absolute(c) => ("absolute", c),
            ThresholdConfig::Relative(d) => ("relative", d as f64),
        };
        ScoringConfig {
            measure: measure.into(),
            n_top,
            threshold_mode: mode.into(),
            threshold_value: value,
        }
    }
}

#[derive(Serialize)]
struct SimilaritySidecar<'a> {
    #[serde(flatten)]
    config: &'a ScoringConfig,
    topics: usize,
    degenerate_pairs: Vec<[String; 2]>,
}

/// Square matrix with `run.topic` labels as header and row names, plus a
/// JSON sidecar with the measure and threshold.
pub fn write_similarity(path: &Path, sim: &SimilarityMatrix, config: &ScoringConfig) -> Result<()> {
    let labels: Vec<String> = sim.labels().iter().map(|&l| label(l)).collect();
    write_square_csv(path, "topic", &labels, |i, j| sim.get(i, j))?;
    let degenerate_pairs = sim
        .degenerate_pairs()
        .iter()
        .map(|&(i, j)| [labels[i].clone(), labels[j].clone()])
        .collect();
    write_json(
        &path.with_extension("json"),
        &SimilaritySidecar {
            config,
            topics: labels.len(),
            degenerate_pairs,
        },
    )
}

fn write_square_csv(path: &Path, corner: &str, labels: &[String], value: impl Fn(usize, usize) -> f64) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec![corner.to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header).map_err(csv_err(path))?;
    for (i, l) in labels.iter().enumerate() {
        let mut row = vec![l.clone()];
        row.extend((0..labels.len()).map(|j| value(i, j).to_string()));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Run-by-run S-CLOP matrix.
pub fn write_pairwise(path: &Path, result: &PrototypeResult) -> Result<()> {
    let labels: Vec<String> = (1..=result.runs()).map(|r| r.to_string()).collect();
    write_square_csv(path, "run", &labels, |i, j| result.pairwise(i, j))
}

/// `run,mean_similarity,prototype`.
pub fn write_means(path: &Path, result: &PrototypeResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["run", "mean_similarity", "prototype"])
        .map_err(csv_err(path))?;
    for (r, m) in result.mean_similarity.iter().enumerate() {
        let flag = if r == result.prototype { "1" } else { "0" };
        w.write_record([(r + 1).to_string(), m.to_string(), flag.to_string()])
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Long format `set,size,kind,value`; sets are 1-based.
pub fn write_study(path: &Path, study: &StudyResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["set", "size", "kind", "value"])
        .map_err(csv_err(path))?;
    for r in &study.records {
        let kind = match r.kind {
            SampleKind::Prototype => "prototype",
            SampleKind::Raw => "raw",
        };
        w.write_record([
            (r.set + 1).to_string(),
            r.size.to_string(),
            kind.to_string(),
            r.value.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

// ---------------------------------------------------------------- dendrogram

/// A dendrogram with its locally pruned clusters. Leaves are nodes
/// `0..n`, merge `s` creates node `n + s`.
#[derive(Debug, Serialize, Deserialize)]
pub struct DendrogramFile {
    pub runs: usize,
    pub labels: Vec<String>,
    pub merges: Vec<MergeFile>,
    pub clusters: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MergeFile {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

impl DendrogramFile {
    pub fn new(dend: &Dendrogram, runs: usize, clusters: Vec<usize>) -> Self {
        DendrogramFile {
            runs,
            labels: dend.labels().iter().map(|&l| label(l)).collect(),
            merges: dend
                .merges()
                .iter()
                .map(|m| MergeFile {
                    left: m.left,
                    right: m.right,
                    height: m.height,
                    size: m.size,
                })
                .collect(),
            clusters,
        }
    }

    pub fn read(path: &Path) -> Result<(Dendrogram, usize, Vec<usize>)> {
        let file: DendrogramFile = read_json(path)?;
        let labels = file
            .labels
            .iter()
            .map(|s| parse_label(s).ok_or_else(|| CliError::format(path, format!("bad label {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(l) = labels.iter().find(|l| l.run >= file.runs) {
            return Err(CliError::format(path, format!("label {l} exceeds {} runs", file.runs)));
        }
        let merges = file
            .merges
            .iter()
            .map(|m| Merge {
                left: m.left,
                right: m.right,
                height: m.height,
                size: m.size,
            })
            .collect();
        let dend = Dendrogram::from_merges(labels, merges).map_err(|e| CliError::format(path, e))?;
        if let Some(&c) = file.clusters.iter().find(|&&c| c >= dend.node_count()) {
            return Err(CliError::format(path, format!("cluster node {c} does not exist")));
        }
        Ok((dend, file.runs, file.clusters))
    }
}
