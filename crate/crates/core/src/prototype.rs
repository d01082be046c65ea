//! Prototype selection and the subsample reliability study.
//!
//! The prototype of a set of runs is the run with the highest mean pairwise
//! S-CLOP to all other runs of the set. The study repeats prototype selection
//! on many independent sets of replications, optionally on random subsamples
//! of each set, and compares how similar the selected prototypes are to each
//! other with how similar arbitrary runs are within their sets.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exec::{Executor, Sequential};
use crate::lda::{CountMatrix, RunSet};
use crate::sclop::{sclop_pairwise, SclopConfig};
use crate::{Error, Result};

/// Pairwise scores of `R` runs and the resulting prototype.
#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeResult {
    runs: usize,
    /// R×R, symmetric, unit diagonal.
    pairwise: Vec<f64>,
    /// Mean over the `R − 1` other runs.
    pub mean_similarity: Vec<f64>,
    pub prototype: usize,
    /// Other runs sharing the maximal mean; the lowest index wins.
    pub tied_with: Vec<usize>,
}

/// Pairs `(i, j)` with `i < j`, row by row.
pub fn pair_indices(runs: usize) -> Vec<(usize, usize)> {
    (0..runs).flat_map(|i| (i + 1..runs).map(move |j| (i, j))).collect()
}

impl PrototypeResult {
    /// `scores[p]` belongs to the p-th pair of [`pair_indices`].
    pub fn from_pair_scores(runs: usize, scores: &[f64]) -> Result<Self> {
        if runs < 2 {
            return Err(Error::TooFewRuns(runs));
        }
        let pairs = pair_indices(runs);
        if scores.len() != pairs.len() {
            return Err(Error::Input(alloc::format!(
                "{runs} runs need {} pair scores, got {}",
                pairs.len(),
                scores.len()
            )));
        }
        let mut pairwise = vec![1.0; runs * runs];
        for (&(i, j), &s) in pairs.iter().zip(scores) {
            pairwise[i * runs + j] = s;
            pairwise[j * runs + i] = s;
        }
        Ok(Self::from_matrix(runs, pairwise))
    }

    fn from_matrix(runs: usize, pairwise: Vec<f64>) -> Self {
        let mean_similarity: Vec<f64> = (0..runs)
            .map(|i| {
                let row = &pairwise[i * runs..(i + 1) * runs];
                let sum: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, s)| s).sum();
                sum / (runs - 1) as f64
            })
            .collect();
        let mut prototype = 0;
        for (r, &m) in mean_similarity.iter().enumerate() {
            if m > mean_similarity[prototype] {
                prototype = r;
            }
        }
        let best = mean_similarity[prototype];
        let tied_with = (prototype + 1..runs).filter(|&r| mean_similarity[r] == best).collect();
        PrototypeResult {
            runs,
            pairwise,
            mean_similarity,
            prototype,
            tied_with,
        }
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn pairwise(&self, i: usize, j: usize) -> f64 {
        self.pairwise[i * self.runs + j]
    }

    /// The same analysis restricted to `subset` (indices into this result).
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        if subset.len() < 2 {
            return Err(Error::TooFewRuns(subset.len()));
        }
        let n = subset.len();
        let mut pairwise = vec![0.0; n * n];
        for (a, &i) in subset.iter().enumerate() {
            for (b, &j) in subset.iter().enumerate() {
                pairwise[a * n + b] = self.pairwise(i, j);
            }
        }
        Ok(Self::from_matrix(n, pairwise))
    }
}

/// Pairwise S-CLOP of all runs, mean similarity per run and the prototype.
pub fn mean_similarity_matrix(runset: &RunSet, cfg: &SclopConfig) -> Result<PrototypeResult> {
    mean_similarity_matrix_with(&Sequential, runset, cfg)
}

pub fn mean_similarity_matrix_with<E: Executor>(
    exec: &E,
    runset: &RunSet,
    cfg: &SclopConfig,
) -> Result<PrototypeResult> {
    let runs: Vec<&CountMatrix> = runset.runs().iter().map(|r| &r.counts).collect();
    prototype_of(exec, &runs, cfg)
}

fn prototype_of<E: Executor>(exec: &E, runs: &[&CountMatrix], cfg: &SclopConfig) -> Result<PrototypeResult> {
    if runs.len() < 2 {
        return Err(Error::TooFewRuns(runs.len()));
    }
    let pairs = pair_indices(runs.len());
    let scores = exec
        .map(pairs.len(), |p| {
            let (i, j) = pairs[p];
            sclop_pairwise(runs[i], runs[j], cfg)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    PrototypeResult::from_pair_scores(runs.len(), &scores)
}

/// Empirical distribution function of a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    /// NaN values are rejected.
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Input("an ECDF needs at least one sample".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Input("ECDF samples must not be NaN".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Ecdf { sorted })
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Share of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Smallest sample `x` with `eval(x) >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        // tolerance keeps e.g. 0.3 · 10 = 3.0000000000000004 at rank 3
        let rank = libm::ceil(p.clamp(0.0, 1.0) * n as f64 - 1e-9) as usize;
        self.sorted[rank.clamp(1, n) - 1]
    }

    /// Jump points `(x, F(x))`, one per distinct sample.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = f,
                _ => out.push((x, f)),
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SampleKind {
    /// Mean similarity of a prototype to the prototypes of the other sets.
    Prototype,
    /// Mean similarity of a run to the other runs of its own set.
    Raw,
}

/// One value of the long-format study table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudyRecord {
    pub set: usize,
    /// Subsample size; for raw samples the full set size.
    pub size: usize,
    pub kind: SampleKind,
    /// For prototypes the selected run (index within its set), for raw
    /// samples the run itself.
    pub run: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyResult {
    pub sizes: Vec<usize>,
    /// Prototype index per `(size, set)`: `prototypes[size_idx][set]`.
    pub prototypes: Vec<Vec<usize>>,
    /// Within-set analysis of every complete set.
    pub within_set: Vec<PrototypeResult>,
    pub records: Vec<StudyRecord>,
}

impl StudyResult {
    /// Prototype mean similarities for subsample size `size`.
    pub fn prototype_means(&self, size: usize) -> Vec<f64> {
        self.values(SampleKind::Prototype, Some(size))
    }

    /// Within-set mean similarities of all runs of all sets.
    pub fn raw_means(&self) -> Vec<f64> {
        self.values(SampleKind::Raw, None)
    }

    fn values(&self, kind: SampleKind, size: Option<usize>) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.kind == kind && size.is_none_or(|s| r.size == s))
            .map(|r| r.value)
            .collect()
    }

    /// Raw means of one set.
    pub fn raw_means_of_set(&self, set: usize) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.kind == SampleKind::Raw && r.set == set)
            .map(|r| r.value)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub sclop: SclopConfig,
}

pub fn subsample_study(sets: &[RunSet], cfg: &StudyConfig) -> Result<StudyResult> {
    subsample_study_with(&Sequential, sets, cfg)
}

/// For every set and subsample size a prototype is selected from a random
/// subsample (drawn without replacement). The prototypes of all sets for one
/// size are then compared with each other by pairwise S-CLOP.
pub fn subsample_study_with<E: Executor>(exec: &E, sets: &[RunSet], cfg: &StudyConfig) -> Result<StudyResult> {
    if sets.len() < 2 {
        return Err(Error::Input("the study needs at least two sets of runs".into()));
    }
    if cfg.sizes.is_empty() {
        return Err(Error::Config("no subsample sizes given".into()));
    }
    let k = sets[0].topics_per_run();
    let v = sets[0].vocabulary().len();
    for (s, set) in sets.iter().enumerate() {
        if set.len() < 2 {
            return Err(Error::Input(alloc::format!("set {s} has fewer than two runs")));
        }
        if set.topics_per_run() != k || set.vocabulary().len() != v {
            return Err(Error::Input(alloc::format!("set {s} differs in topics or vocabulary")));
        }
        if let Some(&size) = cfg.sizes.iter().find(|&&size| size < 1 || size > set.len()) {
            return Err(Error::Config(alloc::format!(
                "subsample size {size} outside 1..={} for set {s}",
                set.len()
            )));
        }
    }

    // all within-set pairs as one batch of jobs
    let jobs: Vec<(usize, usize, usize)> = sets
        .iter()
        .enumerate()
        .flat_map(|(s, set)| pair_indices(set.len()).into_iter().map(move |(i, j)| (s, i, j)))
        .collect();
    let counts = |s: usize, r: usize| &sets[s].runs()[r].counts;
    let scores = exec
        .map(jobs.len(), |p| {
            let (s, i, j) = jobs[p];
            sclop_pairwise(counts(s, i), counts(s, j), &cfg.sclop)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut within_set = Vec::with_capacity(sets.len());
    let mut offset = 0;
    for set in sets {
        let n = pair_indices(set.len()).len();
        within_set.push(PrototypeResult::from_pair_scores(
            set.len(),
            &scores[offset..offset + n],
        )?);
        offset += n;
    }

    let mut records = Vec::new();
    for (s, res) in within_set.iter().enumerate() {
        for (r, &m) in res.mean_similarity.iter().enumerate() {
            records.push(StudyRecord {
                set: s,
                size: res.runs(),
                kind: SampleKind::Raw,
                run: r,
                value: m,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut prototypes = Vec::with_capacity(cfg.sizes.len());
    for &size in &cfg.sizes {
        let chosen: Vec<usize> = within_set
            .iter()
            .map(|res| {
                let mut subset = index::sample(&mut rng, res.runs(), size).into_vec();
                subset.sort_unstable();
                if subset.len() < 2 {
                    Ok(subset[0])
                } else {
                    res.restrict(&subset).map(|sub| subset[sub.prototype])
                }
            })
            .collect::<Result<_>>()?;
        prototypes.push(chosen);
    }

    // cross-set comparisons, each distinct pair of (set, run) evaluated once
    let keys: BTreeSet<((usize, usize), (usize, usize))> = prototypes
        .iter()
        .flat_map(|chosen| {
            pair_indices(sets.len())
                .into_iter()
                .map(move |(a, b)| ((a, chosen[a]), (b, chosen[b])))
        })
        .collect();
    let keys: Vec<_> = keys.into_iter().collect();
    let cross = exec
        .map(keys.len(), |p| {
            let ((sa, ra), (sb, rb)) = keys[p];
            sclop_pairwise(counts(sa, ra), counts(sb, rb), &cfg.sclop)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let cache: BTreeMap<_, f64> = keys.into_iter().zip(cross).collect();

    for (&size, chosen) in cfg.sizes.iter().zip(&prototypes) {
        let scores: Vec<f64> = pair_indices(sets.len())
            .into_iter()
            .map(|(a, b)| cache[&((a, chosen[a]), (b, chosen[b]))])
            .collect();
        let res = PrototypeResult::from_pair_scores(sets.len(), &scores)?;
        for (s, &m) in res.mean_similarity.iter().enumerate() {
            records.push(StudyRecord {
                set: s,
                size,
                kind: SampleKind::Prototype,
                run: chosen[s],
                value: m,
            });
        }
    }

    Ok(StudyResult {
        sizes: cfg.sizes.clone(),
        prototypes,
        within_set,
        records,
    })
}
