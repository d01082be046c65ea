//! Command-line interface.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sclop_core::corpus::{preprocess, FilterReport, PreprocessConfig};
use sclop_core::lda::{derive_seeds, replicate_with, LdaConfig, RunSet};
use sclop_core::prototype::{mean_similarity_matrix_with, subsample_study_with, Ecdf, StudyConfig};
use sclop_core::sclop::{analyze, SclopConfig};
use sclop_core::similarity::{Measure, ThresholdConfig};
use sclop_core::synth::{generate, SyntheticSpec};

use crate::error::{CliError, Result};
use crate::exec::Rayon;
use crate::export::{dot, newick, svg_dendrogram, svg_ecdf, ExportFormat};
use crate::formats::{self, DendrogramFile, ReportFile, RunSidecar, ScoringConfig};
use crate::input::{read_documents, read_stopwords};

/// Fewer replications than this trigger a warning in `prototype`.
pub const RECOMMENDED_RUNS: usize = 50;

#[derive(Debug, Parser)]
#[command(
    name = "sclop",
    version,
    about = "Stability of replicated LDA runs and prototype selection"
)]
pub struct Cli {
    /// Worker threads for replications and pairwise scores (0 = all cores).
    #[arg(long, global = true, env = "SCLOP_JOBS", default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn raw documents into a corpus file.
    Preprocess(PreprocessArgs),
    /// Generate a synthetic corpus with known topic structure.
    Synth(SynthArgs),
    /// Fit replicated LDA runs with collapsed Gibbs sampling.
    Fit(FitArgs),
    /// Score the stability of a directory of runs.
    Sclop(SclopArgs),
    /// Select the most representative run of a directory.
    Prototype(PrototypeArgs),
    /// Subsampling study of prototype selection.
    Study(StudyArgs),
    /// Render a saved dendrogram.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Directory of .txt files or a JSONL file with `id` and `text`.
    pub input: PathBuf,
    #[arg(short, long, default_value = "corpus.json")]
    pub out: PathBuf,
    /// Filter report; defaults to `<out stem>.report.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// One stopword per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Words occurring fewer times in the whole corpus are removed.
    #[arg(long, default_value_t = 6)]
    pub min_count: usize,
    #[arg(long)]
    pub keep_duplicates: bool,
    #[arg(long)]
    pub keep_case: bool,
    #[arg(long)]
    pub keep_numbers: bool,
    #[arg(long)]
    pub keep_punctuation: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(short, long, default_value = "corpus.json")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub topics: usize,
    #[arg(long, default_value_t = 200)]
    pub vocab: usize,
    #[arg(long, default_value_t = 100)]
    pub docs: usize,
    #[arg(long, default_value_t = 50)]
    pub doc_length: usize,
    /// Probability that a token comes from its document's primary topic.
    #[arg(long, default_value_t = 0.8)]
    pub concentration: f64,
    /// Probability that a token is drawn uniformly from the vocabulary.
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl SynthArgs {
    fn spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            n_true_topics: self.topics,
            vocab_size: self.vocab,
            docs: self.docs,
            doc_length: self.doc_length,
            topic_concentration: self.concentration,
            noise_rate: self.noise,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LdaArgs {
    /// Topics per run.
    #[arg(short, long, default_value_t = 50)]
    pub k: usize,
    /// Document-topic prior; defaults to 1/K.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Topic-word prior; defaults to 1/K.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Gibbs sweeps per run.
    #[arg(long, default_value_t = 270)]
    pub iters: usize,
}

impl LdaArgs {
    fn config(&self) -> LdaConfig {
        let base = LdaConfig::with_topics(self.k.max(1));
        LdaConfig {
            topics: self.k,
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta.unwrap_or(base.beta),
            iterations: self.iters,
            seed: 0,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Corpus file written by `preprocess` or `synth`.
    pub corpus: PathBuf,
    #[arg(short, long, default_value = "runs")]
    pub out: PathBuf,
    #[command(flatten)]
    pub lda: LdaArgs,
    /// Number of replications.
    #[arg(long, default_value_t = RECOMMENDED_RUNS)]
    pub reps: usize,
    /// Master seed; per-run seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdMode {
    /// c = (topic total) / value
    Relative,
    /// c = value for every topic
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    ModifiedJaccard,
    Cosine,
    AverageJaccard,
}

#[derive(Debug, Clone, Args)]
pub struct ScoringArgs {
    #[arg(long, value_enum, default_value_t = ThresholdMode::Relative)]
    pub threshold_mode: ThresholdMode,
    /// Divisor d (relative, default 500) or count threshold (absolute).
    #[arg(long)]
    pub threshold_value: Option<f64>,
    #[arg(long, value_enum, default_value_t = MeasureArg::ModifiedJaccard)]
    pub measure: MeasureArg,
    /// Depth of the top-word lists for average-jaccard.
    #[arg(long, default_value_t = 20)]
    pub n_top: usize,
}

impl ScoringArgs {
    fn config(&self) -> Result<SclopConfig> {
        let threshold = match (self.threshold_mode, self.threshold_value) {
            (ThresholdMode::Relative, None) => ThresholdConfig::default(),
            (ThresholdMode::Relative, Some(d)) if d >= 1.0 && d.fract() == 0.0 && d <= u64::MAX as f64 => {
                ThresholdConfig::Relative(d as u64)
            }
            (ThresholdMode::Relative, Some(d)) => {
                return Err(CliError::Usage(format!(
                    "relative threshold divisor must be a positive integer, got {d}"
                )))
            }
            (ThresholdMode::Absolute, Some(c)) => ThresholdConfig::Absolute(c),
            (ThresholdMode::Absolute, None) => {
                return Err(CliError::Usage(
                    "--threshold-mode absolute needs --threshold-value".into(),
                ))
            }
        };
        threshold.validate()?;
        let measure = match self.measure {
            MeasureArg::ModifiedJaccard => Measure::ModifiedJaccard,
            MeasureArg::Cosine => Measure::Cosine,
            MeasureArg::AverageJaccard => Measure::AverageJaccard { n_top: self.n_top },
        };
        Ok(SclopConfig { threshold, measure })
    }
}

#[derive(Debug, Args)]
pub struct SclopArgs {
    /// Directory of `run_*.csv` files.
    pub runs: PathBuf,
    /// Output directory; defaults to `<runs>/sclop`.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Dendrogram renderings to write.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub export: Vec<ExportFormat>,
    /// Skip the run-by-run pairwise S-CLOP matrix.
    #[arg(long)]
    pub no_pairwise: bool,
}

#[derive(Debug, Args)]
pub struct PrototypeArgs {
    /// Directory of `run_*.csv` files.
    pub runs: PathBuf,
    /// Output directory; defaults to `<runs>/prototype`.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Where to copy the prototype's count matrix; defaults to
    /// `<out>/prototype.csv`. The sidecar is copied alongside.
    #[arg(long)]
    pub prototype_out: Option<PathBuf>,
    #[command(flatten)]
    pub scoring: ScoringArgs,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Corpus file; a synthetic corpus (see `synth`) is generated when absent.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Seed of the synthetic corpus.
    #[arg(long, default_value_t = 1)]
    pub synth_seed: u64,
    #[arg(long, default_value_t = 20)]
    pub sets: usize,
    /// Runs per set.
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// Subsample sizes.
    #[arg(long, value_delimiter = ',', default_value = "5,10")]
    pub sizes: Vec<usize>,
    #[command(flatten)]
    pub lda: LdaArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Master seed for the replications and the subsampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long, default_value = "study")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// `dendrogram.json` written by `sclop`.
    pub dendrogram: PathBuf,
    /// Output directory; defaults to the dendrogram's directory.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "newick,dot,svg")]
    pub format: Vec<ExportFormat>,
}

pub fn run(cli: Cli) -> Result<()> {
    let exec = Rayon::new(cli.jobs);
    match cli.command {
        Command::Preprocess(a) => cmd_preprocess(&a),
        Command::Synth(a) => cmd_synth(&a),
        Command::Fit(a) => cmd_fit(&exec, &a),
        Command::Sclop(a) => cmd_sclop(&exec, &a),
        Command::Prototype(a) => cmd_prototype(&exec, &a),
        Command::Study(a) => cmd_study(&exec, &a),
        Command::Export(a) => cmd_export(&a),
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}{suffix}"))
}

#[derive(Serialize)]
struct PreprocessReport<'a> {
    input: &'a Path,
    min_count: usize,
    stopwords: usize,
    lowercase: bool,
    strip_numbers: bool,
    strip_punctuation: bool,
    deduplicate: bool,
    documents: usize,
    vocabulary: usize,
    tokens: usize,
    corpus_hash: &'a str,
    input_documents: usize,
    duplicates_removed: &'a [String],
    empty_documents: &'a [String],
    tokens_after_tokenize: usize,
    tokens_after_stopwords: usize,
    tokens_after_min_count: usize,
    words_below_min_count: usize,
}

pub fn cmd_preprocess(a: &PreprocessArgs) -> Result<()> {
    let stopwords = match &a.stopwords {
        Some(p) => read_stopwords(p)?,
        None => Default::default(),
    };
    let docs = read_documents(&a.input)?;
    let cfg = PreprocessConfig {
        lowercase: !a.keep_case,
        strip_numbers: !a.keep_numbers,
        strip_punctuation: !a.keep_punctuation,
        stopwords,
        min_word_count: a.min_count,
        deduplicate: !a.keep_duplicates,
    };
    let out = preprocess(&docs, &cfg)?;
    let hash = formats::write_corpus(&a.out, &out.corpus)?;
    let r: &FilterReport = &out.report;
    for id in &r.duplicates_removed {
        eprintln!("warning: removed duplicate document {id}");
    }
    for id in &r.empty_documents {
        eprintln!("warning: dropped document {id}, empty after filtering");
    }
    let report_path = a.report.clone().unwrap_or_else(|| sibling(&a.out, ".report.json"));
    formats::write_json(
        &report_path,
        &PreprocessReport {
            input: &a.input,
            min_count: cfg.min_word_count,
            stopwords: cfg.stopwords.len(),
            lowercase: cfg.lowercase,
            strip_numbers: cfg.strip_numbers,
            strip_punctuation: cfg.strip_punctuation,
            deduplicate: cfg.deduplicate,
            documents: out.corpus.num_docs(),
            vocabulary: out.corpus.vocab_size(),
            tokens: out.corpus.total_tokens(),
            corpus_hash: &hash,
            input_documents: r.input_documents,
            duplicates_removed: &r.duplicates_removed,
            empty_documents: &r.empty_documents,
            tokens_after_tokenize: r.tokens_after_tokenize,
            tokens_after_stopwords: r.tokens_after_stopwords,
            tokens_after_min_count: r.tokens_after_min_count,
            words_below_min_count: r.words_below_min_count,
        },
    )?;
    println!(
        "{} documents, {} words, {} tokens -> {}",
        out.corpus.num_docs(),
        out.corpus.vocab_size(),
        out.corpus.total_tokens(),
        a.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct SynthSidecar {
    n_true_topics: usize,
    vocab_size: usize,
    docs: usize,
    doc_length: usize,
    topic_concentration: f64,
    noise_rate: f64,
    seed: u64,
    corpus_hash: String,
}

pub fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let spec = a.spec();
    let corpus = generate(&spec)?;
    let corpus_hash = formats::write_corpus(&a.out, &corpus)?;
    formats::write_json(
        &sibling(&a.out, ".spec.json"),
        &SynthSidecar {
            n_true_topics: spec.n_true_topics,
            vocab_size: spec.vocab_size,
            docs: spec.docs,
            doc_length: spec.doc_length,
            topic_concentration: spec.topic_concentration,
            noise_rate: spec.noise_rate,
            seed: spec.seed,
            corpus_hash,
        },
    )?;
    println!(
        "{} documents, {} words -> {}",
        corpus.num_docs(),
        corpus.vocab_size(),
        a.out.display()
    );
    Ok(())
}

pub fn cmd_fit(exec: &Rayon, a: &FitArgs) -> Result<()> {
    if a.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let (corpus, corpus_hash) = formats::read_corpus(&a.corpus)?;
    let cfg = a.lda.config();
    let set = replicate_with(exec, &corpus, &cfg, a.reps, a.seed)?;
    for (r, run) in set.runs().iter().enumerate() {
        let used = run.config.expect("fitted runs carry their configuration");
        let sidecar = RunSidecar {
            k: used.topics,
            alpha: used.alpha,
            beta: used.beta,
            iterations: used.iterations,
            seed: used.seed,
            corpus_hash: corpus_hash.clone(),
            run_index: r + 1,
        };
        formats::write_run(&a.out, set.vocabulary(), &run.counts, &sidecar)?;
    }
    println!("{} runs with K = {} -> {}", set.len(), cfg.topics, a.out.display());
    Ok(())
}

fn load_runs(dir: &Path) -> Result<formats::RunDir> {
    let loaded = formats::read_run_dir(dir)?;
    let hashes: std::collections::BTreeSet<_> = loaded.sidecars.iter().flatten().map(|s| &s.corpus_hash).collect();
    if hashes.len() > 1 {
        eprintln!(
            "warning: runs in {} were fitted on {} different corpora",
            dir.display(),
            hashes.len()
        );
    }
    Ok(loaded)
}

fn write_exports(
    dir: &Path,
    formats: &[ExportFormat],
    dend: &sclop_core::dendrogram::Dendrogram,
    runs: usize,
    clusters: &[usize],
) -> Result<()> {
    for &f in formats {
        let text = match f {
            ExportFormat::Newick => newick(dend),
            ExportFormat::Dot => dot(dend, clusters),
            ExportFormat::Svg => svg_dendrogram(dend, runs, clusters),
        };
        formats::write_file(&dir.join(format!("dendrogram.{}", f.extension())), text)?;
    }
    Ok(())
}

pub fn cmd_sclop(exec: &Rayon, a: &SclopArgs) -> Result<()> {
    let cfg = a.scoring.config()?;
    let loaded = load_runs(&a.runs)?;
    let set = &loaded.runs;
    let analysis = analyze(set, &cfg)?;
    let out = a.out.clone().unwrap_or_else(|| a.runs.join("sclop"));
    let scoring = ScoringConfig::new(cfg.measure, cfg.threshold);

    formats::write_json(&out.join("report.json"), &ReportFile::from(&analysis.report))?;
    formats::write_similarity(&out.join("similarity.csv"), &analysis.similarity, &scoring)?;
    let clusters: Vec<usize> = analysis.report.groups.iter().map(|g| g.node).collect();
    formats::write_json(
        &out.join("dendrogram.json"),
        &DendrogramFile::new(&analysis.dendrogram, set.len(), clusters.clone()),
    )?;
    if !a.no_pairwise {
        let pairwise = mean_similarity_matrix_with(exec, set, &cfg)?;
        formats::write_pairwise(&out.join("pairwise.csv"), &pairwise)?;
    }
    write_exports(&out, &a.export, &analysis.dendrogram, set.len(), &clusters)?;

    let degenerate = analysis.similarity.degenerate_pairs().len();
    if degenerate > 0 {
        eprintln!("warning: {degenerate} topic pair(s) had no words above threshold; their similarity is 0");
    }
    println!(
        "S-CLOP: {:.4} (R = {}, K = {}, {} clusters, U = {} of {})",
        analysis.report.score,
        set.len(),
        set.topics_per_run(),
        analysis.report.groups.len(),
        analysis.report.u_sum,
        analysis.report.u_max
    );
    Ok(())
}

pub fn cmd_prototype(exec: &Rayon, a: &PrototypeArgs) -> Result<()> {
    let cfg = a.scoring.config()?;
    let loaded = load_runs(&a.runs)?;
    let set = &loaded.runs;
    if set.len() < RECOMMENDED_RUNS {
        eprintln!(
            "warning: only {} runs; at least {RECOMMENDED_RUNS} replications are recommended",
            set.len()
        );
    }
    let result = mean_similarity_matrix_with(exec, set, &cfg)?;
    let out = a.out.clone().unwrap_or_else(|| a.runs.join("prototype"));
    formats::write_means(&out.join("means.csv"), &result)?;
    formats::write_pairwise(&out.join("pairwise.csv"), &result)?;

    let target = a.prototype_out.clone().unwrap_or_else(|| out.join("prototype.csv"));
    let source = &loaded.csv_paths[result.prototype];
    formats::write_count_csv(&target, set.vocabulary(), &set.runs()[result.prototype].counts)?;
    if let Some(sidecar) = &loaded.sidecars[result.prototype] {
        formats::write_json(&target.with_extension("json"), sidecar)?;
    }
    if !result.tied_with.is_empty() {
        let others: Vec<String> = result.tied_with.iter().map(|r| (r + 1).to_string()).collect();
        eprintln!(
            "note: runs {} share the maximal mean similarity; the lowest index was chosen",
            others.join(", ")
        );
    }
    println!(
        "prototype: run {} ({}), mean S-CLOP {:.4} -> {}",
        result.prototype + 1,
        source.file_name().unwrap_or_default().to_string_lossy(),
        result.mean_similarity[result.prototype],
        target.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct StudySidecar<'a> {
    corpus: Option<&'a Path>,
    corpus_hash: &'a str,
    sets: usize,
    runs: usize,
    sizes: &'a [usize],
    #[serde(rename = "K")]
    k: usize,
    alpha: f64,
    beta: f64,
    iterations: usize,
    seed: u64,
    set_seeds: &'a [u64],
    subsample_seed: u64,
    scoring: ScoringConfig,
}

pub fn cmd_study(exec: &Rayon, a: &StudyArgs) -> Result<()> {
    let cfg = a.scoring.config()?;
    if a.sets < 2 {
        return Err(CliError::Usage("--sets must be at least 2".into()));
    }
    if let Some(&s) = a.sizes.iter().find(|&&s| s == 0 || s > a.runs) {
        return Err(CliError::Usage(format!("subsample size {s} outside 1..={}", a.runs)));
    }
    let (corpus, corpus_hash) = match &a.corpus {
        Some(p) => formats::read_corpus(p)?,
        None => {
            let spec = SyntheticSpec {
                seed: a.synth_seed,
                ..SyntheticSpec::default()
            };
            (generate(&spec)?, String::from("synthetic"))
        }
    };
    let lda = a.lda.config();
    // one seed per set plus one for the subsampling
    let seeds = derive_seeds(a.seed, a.sets + 1);
    let sets: Vec<RunSet> = seeds[..a.sets]
        .iter()
        .map(|&s| replicate_with(exec, &corpus, &lda, a.runs, s))
        .collect::<std::result::Result<_, _>>()?;
    let study_cfg = StudyConfig {
        sizes: a.sizes.clone(),
        seed: seeds[a.sets],
        sclop: cfg,
    };
    let study = subsample_study_with(exec, &sets, &study_cfg)?;

    fs::create_dir_all(&a.out).map_err(CliError::io(&a.out))?;
    formats::write_study(&a.out.join("study.csv"), &study)?;
    let mut series = Vec::new();
    for &size in &study.sizes {
        series.push((
            format!("prototypes, size {size}"),
            Ecdf::new(&study.prototype_means(size))?,
        ));
    }
    series.push(("raw runs".to_string(), Ecdf::new(&study.raw_means())?));
    formats::write_file(&a.out.join("ecdf.svg"), svg_ecdf(&series))?;
    formats::write_json(
        &a.out.join("study.json"),
        &StudySidecar {
            corpus: a.corpus.as_deref(),
            corpus_hash: &corpus_hash,
            sets: a.sets,
            runs: a.runs,
            sizes: &a.sizes,
            k: lda.topics,
            alpha: lda.alpha,
            beta: lda.beta,
            iterations: lda.iterations,
            seed: a.seed,
            set_seeds: &seeds[..a.sets],
            subsample_seed: seeds[a.sets],
            scoring: ScoringConfig::new(cfg.measure, cfg.threshold),
        },
    )?;
    for (name, ecdf) in &series {
        println!("{name}: median {:.4}, min {:.4}", ecdf.quantile(0.5), ecdf.samples()[0]);
    }
    Ok(())
}

pub fn cmd_export(a: &ExportArgs) -> Result<()> {
    let (dend, runs, clusters) = DendrogramFile::read(&a.dendrogram)?;
    let out = match &a.out {
        Some(o) => o.clone(),
        None => a.dendrogram.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    write_exports(&out, &a.format, &dend, runs, &clusters)?;
    println!("{} file(s) -> {}", a.format.len(), out.display());
    Ok(())
}
