mod common;

use proptest::prelude::*;
use sclop_core::corpus::{preprocess, PreprocessConfig, RawDocument};
use sclop_core::lda::{CountMatrix, RunSet};
use sclop_core::prototype::PrototypeResult;
use sclop_core::sclop::{analyze, sclop, DisparityTable, SclopConfig};
use sclop_core::similarity::{cosine, modified_jaccard, Measure, ThresholdConfig, TopicCounts, TopicLabel};

fn topic(max_words: usize) -> impl Strategy<Value = TopicCounts> {
    prop::collection::vec(0u64..50, max_words)
        .prop_map(|c| TopicCounts::from_dense(&c, TopicLabel { run: 0, topic: 0 }))
}

fn runs(r: std::ops::RangeInclusive<usize>, k: usize, v: usize) -> impl Strategy<Value = Vec<CountMatrix>> {
    prop::collection::vec(
        prop::collection::vec(prop_oneof![3 => Just(0u64), 2 => 1u64..40], v * k)
            .prop_map(move |data| CountMatrix::from_rows(v, k, data).unwrap()),
        r,
    )
}

fn vocab(v: usize) -> Vec<String> {
    (0..v).map(|i| format!("w{i:03}")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn jaccard_is_symmetric_and_bounded(a in topic(12), b in topic(12), ca in 0.0f64..30.0, cb in 0.0f64..30.0) {
        let ab = modified_jaccard(&a, &b, ca, cb).unwrap();
        let ba = modified_jaccard(&b, &a, cb, ca).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0).contains(&ab.value));
        prop_assert!(ab.intersection <= ab.union);
    }

    #[test]
    fn raising_thresholds_shrinks_both_sets(
        a in topic(12), b in topic(12),
        ca in 0.0f64..20.0, cb in 0.0f64..20.0, da in 0.0f64..20.0, db in 0.0f64..20.0,
    ) {
        let lo_a = a.words_above(ca);
        let hi_a = a.words_above(ca + da);
        let lo_b = b.words_above(cb);
        let hi_b = b.words_above(cb + db);
        prop_assert!(hi_a.iter().all(|w| lo_a.contains(w)));
        prop_assert!(hi_b.iter().all(|w| lo_b.contains(w)));
        let lo = modified_jaccard(&a, &b, ca, cb).unwrap();
        let hi = modified_jaccard(&a, &b, ca + da, cb + db).unwrap();
        prop_assert!(hi.intersection <= lo.intersection);
        prop_assert!(hi.union <= lo.union);
    }

    #[test]
    fn cosine_ignores_scale(a in topic(10), b in topic(10), scale in 1u64..20) {
        prop_assume!(!a.is_empty() && !b.is_empty());
        let scaled = TopicCounts::from_sparse(
            a.entries().iter().map(|&(w, c)| (w, c * scale)).collect(),
            a.origin(),
        );
        let s = cosine(&a, &b).unwrap();
        prop_assert!((cosine(&scaled, &b).unwrap() - s).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn score_is_bounded_and_consistent(runs in runs(2..=4, 3, 12), d in 1u64..30) {
        let set = RunSet::from_counts(vocab(12), runs).unwrap();
        let cfg = SclopConfig { threshold: ThresholdConfig::Relative(d), measure: Measure::ModifiedJaccard };
        let a = analyze(&set, &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&a.report.score));
        prop_assert!(a.report.u_sum <= a.report.u_max);
        let table = DisparityTable::new(&a.dendrogram, set.len()).unwrap();
        let recomputed: u64 = a.report.groups.iter().map(|g| common::scaled_disparity_of(&g.members, set.len())).sum();
        prop_assert_eq!(recomputed, table.minimal_scaled(a.dendrogram.root()));
        let members: usize = a.report.groups.iter().map(|g| g.members.len()).sum();
        prop_assert_eq!(members, set.total_topics());
    }

    #[test]
    fn score_ignores_run_order(runs in runs(2..=4, 3, 10), rot in 0usize..4) {
        let cfg = SclopConfig { threshold: ThresholdConfig::Absolute(2.0), ..Default::default() };
        let a = sclop(&RunSet::from_counts(vocab(10), runs.clone()).unwrap(), &cfg).unwrap().score;
        let mut shuffled = runs;
        let n = shuffled.len();
        shuffled.rotate_left(rot % n);
        shuffled.reverse();
        let b = sclop(&RunSet::from_counts(vocab(10), shuffled).unwrap(), &cfg).unwrap().score;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn prototype_attains_the_maximum(scores in prop::collection::vec(0.0f64..=1.0, 1..=45)) {
        // choose R with R(R-1)/2 <= len
        let mut r = 2;
        while (r + 1) * r / 2 <= scores.len() { r += 1; }
        let res = PrototypeResult::from_pair_scores(r, &scores[..r * (r - 1) / 2]).unwrap();
        for m in &res.mean_similarity {
            prop_assert!(res.mean_similarity[res.prototype] >= *m);
        }
        prop_assert!(res.mean_similarity[..res.prototype].iter().all(|&m| m < res.mean_similarity[res.prototype]));
        for i in 0..r { for j in 0..r { prop_assert_eq!(res.pairwise(i, j), res.pairwise(j, i)); } }
    }

    #[test]
    fn preprocessing_is_deterministic_and_idempotent(
        texts in prop::collection::vec("[a-dA-D0-9 ,.!]{0,40}", 1..8),
        min in 1usize..4,
    ) {
        let docs: Vec<RawDocument> = texts.iter().enumerate().map(|(i, t)| RawDocument::new(format!("d{i}"), t.clone())).collect();
        let cfg = PreprocessConfig { min_word_count: min, deduplicate: false, ..Default::default() };
        let Ok(out) = preprocess(&docs, &cfg) else { return Ok(()) };
        prop_assert_eq!(&out, &preprocess(&docs, &cfg).unwrap());
        let counts = out.corpus.word_counts();
        prop_assert!(counts.iter().all(|&c| c as usize >= min));
        let rendered: Vec<RawDocument> = (0..out.corpus.num_docs())
            .map(|m| RawDocument::new(out.corpus.doc_ids()[m].clone(), out.corpus.render(m)))
            .collect();
        let again = preprocess(&rendered, &cfg).unwrap();
        prop_assert_eq!(again.corpus.vocabulary(), out.corpus.vocabulary());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Cosine distances on random counts are tie free with probability one,
    /// so permuting topic columns must not change the score.
    #[test]
    fn score_ignores_topic_order_without_ties(runs in runs(2..=3, 4, 15), seed in 0u64..1000) {
        let cfg = SclopConfig { measure: Measure::Cosine, ..Default::default() };
        prop_assume!(runs.iter().all(|m| m.column_totals().iter().all(|&t| t > 0)));
        let set = RunSet::from_counts(vocab(15), runs.clone()).unwrap();
        let a = analyze(&set, &cfg).unwrap();
        let mut d: Vec<f64> = (0..a.similarity.len())
            .flat_map(|i| (i + 1..a.similarity.len()).map(move |j| (i, j)))
            .map(|(i, j)| a.similarity.get(i, j))
            .collect();
        d.sort_by(f64::total_cmp);
        prop_assume!(d.windows(2).all(|w| w[0] != w[1]));
        let order: Vec<usize> = match seed % 3 { 0 => vec![3, 2, 1, 0], 1 => vec![1, 3, 0, 2], _ => vec![2, 0, 3, 1] };
        let permuted: Vec<CountMatrix> = runs.iter().map(|m| m.permute_topics(&order)).collect();
        let b = sclop(&RunSet::from_counts(vocab(15), permuted).unwrap(), &cfg).unwrap();
        prop_assert_eq!(a.report.score, b.score);
    }
}
