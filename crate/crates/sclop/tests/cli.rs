use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sclop(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sclop"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SCLOP_JOBS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = sclop(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn small_corpus(dir: &Path) {
    ok(
        &[
            "synth",
            "--out",
            "corpus.json",
            "--topics",
            "3",
            "--vocab",
            "40",
            "--docs",
            "20",
            "--doc-length",
            "20",
            "--seed",
            "5",
        ],
        dir,
    );
}

#[test]
fn text_directory_becomes_a_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let docs = dir.path().join("docs");
    fs::create_dir(&docs).unwrap();
    fs::write(docs.join("a.txt"), "Apples and pears, 2 apples.").unwrap();
    fs::write(docs.join("b.txt"), "Pears! And apples.").unwrap();
    fs::write(dir.path().join("stop.txt"), "and\n").unwrap();
    ok(
        &[
            "preprocess",
            "docs",
            "--out",
            "corpus.json",
            "--stopwords",
            "stop.txt",
            "--min-count",
            "2",
        ],
        dir.path(),
    );
    let corpus = json(&dir.path().join("corpus.json"));
    assert_eq!(corpus["vocabulary"], serde_json::json!(["apples", "pears"]));
    assert_eq!(corpus["docs"][0]["id"], "a.txt");
    assert_eq!(corpus["docs"][0]["tokens"], serde_json::json!([1, 2, 1]));
    let report = json(&dir.path().join("corpus.report.json"));
    assert_eq!(report["tokens_after_stopwords"], 5);
}

#[test]
fn jsonl_duplicates_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let lines = [
        r#"{"id": "x1", "text": "alpha beta alpha"}"#,
        r#"{"id": "x2", "text": "alpha beta alpha"}"#,
        r#"{"id": "x3", "text": "beta gamma"}"#,
    ];
    fs::write(dir.path().join("docs.jsonl"), lines.join("\n")).unwrap();
    let out = sclop(
        &[
            "preprocess",
            "docs.jsonl",
            "--min-count",
            "1",
            "--report",
            "filter.json",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("x2"));
    let report = json(&dir.path().join("filter.json"));
    assert_eq!(report["duplicates_removed"], serde_json::json!(["x2"]));
    assert_eq!(report["documents"], 2);
}

#[test]
fn missing_stopword_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("d.jsonl"), r#"{"id": "a", "text": "x"}"#).unwrap();
    let out = sclop(&["preprocess", "d.jsonl", "--stopwords", "nope.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.txt"));
}

#[test]
fn fit_writes_runs_with_sidecars_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    small_corpus(dir.path());
    let fit = |out: &str, jobs: &str| {
        ok(
            &[
                "fit",
                "corpus.json",
                "--out",
                out,
                "--k",
                "3",
                "--iters",
                "20",
                "--reps",
                "4",
                "--seed",
                "9",
                "--jobs",
                jobs,
            ],
            dir.path(),
        )
    };
    fit("a", "1");
    fit("b", "3");
    let names: Vec<String> = {
        let mut v: Vec<_> = fs::read_dir(dir.path().join("a"))
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        v.sort();
        v
    };
    assert_eq!(
        names,
        [
            "run_001.csv",
            "run_001.json",
            "run_002.csv",
            "run_002.json",
            "run_003.csv",
            "run_003.json",
            "run_004.csv",
            "run_004.json"
        ]
    );
    for name in &names {
        assert_eq!(
            fs::read(dir.path().join("a").join(name)).unwrap(),
            fs::read(dir.path().join("b").join(name)).unwrap(),
            "{name}"
        );
    }
    let side = json(&dir.path().join("a/run_002.json"));
    assert_eq!(side["K"], 3);
    assert_eq!(side["run_index"], 2);
    assert_eq!(side["iterations"], 20);
    assert_eq!(side["corpus_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn a_single_run_cannot_be_scored() {
    let dir = tempfile::tempdir().unwrap();
    small_corpus(dir.path());
    ok(
        &[
            "fit",
            "corpus.json",
            "--out",
            "one",
            "--k",
            "3",
            "--iters",
            "5",
            "--reps",
            "1",
        ],
        dir.path(),
    );
    let out = sclop(&["sclop", "one"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("R ≥ 2 required"));
}

#[test]
fn bundled_fixture_scores_as_frozen() {
    let dir = tempfile::tempdir().unwrap();
    let runs = fixtures().join("runs4");
    let stdout = ok(
        &[
            "sclop",
            runs.to_str().unwrap(),
            "--out",
            "out",
            "--export",
            "newick,dot,svg",
        ],
        dir.path(),
    );
    assert!(stdout.starts_with("S-CLOP: 0.7667 "), "{stdout}");
    let report = json(&dir.path().join("out/report.json"));
    assert_eq!(report["u_sum"], 3.5);
    assert_eq!(report["u_max"], 15.0);
    assert_eq!(report["groups"].as_array().unwrap().len(), 7);
    for ext in ["nwk", "dot", "svg"] {
        assert!(dir.path().join(format!("out/dendrogram.{ext}")).is_file(), "{ext}");
    }
    let sim = fs::read_to_string(dir.path().join("out/similarity.csv")).unwrap();
    assert!(sim.starts_with("topic,1.1,1.2,1.3,1.4,1.5,2.1,"));
    assert_eq!(sim.lines().count(), 21);
    assert_eq!(
        json(&dir.path().join("out/similarity.json"))["measure"],
        "modified-jaccard"
    );
    let pairwise = fs::read_to_string(dir.path().join("out/pairwise.csv")).unwrap();
    assert_eq!(pairwise.lines().next(), Some("run,1,2,3,4"));
}

#[test]
fn fixture_is_reproduced_by_fit() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures().join("corpus.json");
    ok(
        &[
            "fit",
            corpus.to_str().unwrap(),
            "--out",
            "runs",
            "--k",
            "5",
            "--iters",
            "100",
            "--reps",
            "4",
            "--seed",
            "2016",
        ],
        dir.path(),
    );
    for r in 1..=4 {
        for ext in ["csv", "json"] {
            let name = format!("run_{r:03}.{ext}");
            let fresh = fs::read(dir.path().join("runs").join(&name)).unwrap();
            assert_eq!(fresh, fs::read(fixtures().join("runs4").join(&name)).unwrap(), "{name}");
        }
    }
}

#[test]
fn alternate_measures_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let runs = fixtures().join("runs4");
    let runs = runs.to_str().unwrap();
    ok(
        &["sclop", runs, "--out", "cos", "--measure", "cosine", "--no-pairwise"],
        dir.path(),
    );
    assert_eq!(json(&dir.path().join("cos/similarity.json"))["measure"], "cosine");
    ok(
        &[
            "sclop",
            runs,
            "--out",
            "avg",
            "--measure",
            "average-jaccard",
            "--n-top",
            "10",
            "--no-pairwise",
        ],
        dir.path(),
    );
    let side = json(&dir.path().join("avg/similarity.json"));
    assert_eq!(
        (side["measure"].as_str(), side["n_top"].as_u64()),
        (Some("average-jaccard"), Some(10))
    );
    ok(
        &[
            "sclop",
            runs,
            "--out",
            "abs",
            "--threshold-mode",
            "absolute",
            "--threshold-value",
            "3",
            "--no-pairwise",
        ],
        dir.path(),
    );
    assert_eq!(
        json(&dir.path().join("abs/similarity.json"))["threshold_mode"],
        "absolute"
    );
    assert!(!dir.path().join("abs/pairwise.csv").exists());
    let bad = sclop(&["sclop", runs, "--threshold-value", "2.5"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn export_renders_a_saved_dendrogram() {
    let dir = tempfile::tempdir().unwrap();
    let runs = fixtures().join("runs4");
    ok(
        &[
            "sclop",
            runs.to_str().unwrap(),
            "--out",
            "s",
            "--no-pairwise",
            "--export",
            "newick",
        ],
        dir.path(),
    );
    let direct = fs::read_to_string(dir.path().join("s/dendrogram.nwk")).unwrap();
    ok(&["export", "s/dendrogram.json", "--out", "e"], dir.path());
    assert_eq!(fs::read_to_string(dir.path().join("e/dendrogram.nwk")).unwrap(), direct);
    let svg = fs::read_to_string(dir.path().join("e/dendrogram.svg")).unwrap();
    assert!(svg.contains("colored by run") && svg.contains("colored by cluster (7 clusters)"));
    assert!(fs::read_to_string(dir.path().join("e/dendrogram.dot"))
        .unwrap()
        .starts_with("digraph"));
}

#[test]
fn prototype_copies_the_selected_run() {
    let dir = tempfile::tempdir().unwrap();
    let runs = fixtures().join("runs4");
    let out = sclop(
        &[
            "prototype",
            runs.to_str().unwrap(),
            "--out",
            "p",
            "--prototype-out",
            "best/model.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("50 replications are recommended"));
    let means = fs::read_to_string(dir.path().join("p/means.csv")).unwrap();
    let mut lines = means.lines();
    assert_eq!(lines.next(), Some("run,mean_similarity,prototype"));
    let chosen: Vec<&str> = lines.filter(|l| l.ends_with(",1")).collect();
    assert_eq!(chosen.len(), 1);
    let run: usize = chosen[0].split(',').next().unwrap().parse().unwrap();
    let expected = fs::read(runs.join(format!("run_{run:03}.csv"))).unwrap();
    assert_eq!(fs::read(dir.path().join("best/model.csv")).unwrap(), expected);
    assert_eq!(json(&dir.path().join("best/model.json"))["run_index"], run);
}

#[test]
fn study_writes_the_long_table_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    small_corpus(dir.path());
    let args = [
        "study",
        "--corpus",
        "corpus.json",
        "--sets",
        "20",
        "--runs",
        "10",
        "--sizes",
        "5,10",
        "--k",
        "3",
        "--iters",
        "10",
        "--seed",
        "4",
    ];
    ok(&args, dir.path());
    let table = fs::read_to_string(dir.path().join("study/study.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("set,size,kind,value"));
    let mut shapes = std::collections::BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        *shapes.entry((f[2].to_string(), f[1].to_string())).or_insert(0) += 1;
    }
    let expected: std::collections::BTreeMap<_, _> = [
        (("prototype".to_string(), "5".to_string()), 20),
        (("prototype".to_string(), "10".to_string()), 20),
        (("raw".to_string(), "10".to_string()), 200),
    ]
    .into();
    assert_eq!(shapes, expected);
    assert!(fs::read_to_string(dir.path().join("study/ecdf.svg"))
        .unwrap()
        .contains("raw runs"));
    let first = fs::read(dir.path().join("study/study.csv")).unwrap();
    ok(&args, dir.path());
    assert_eq!(fs::read(dir.path().join("study/study.csv")).unwrap(), first);
}

#[test]
fn clean_synthetic_corpus_scores_near_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut low = Vec::new();
    for seed in ["1", "2", "3"] {
        ok(
            &[
                "synth",
                "--out",
                "c.json",
                "--topics",
                "4",
                "--vocab",
                "120",
                "--docs",
                "80",
                "--doc-length",
                "40",
                "--concentration",
                "1",
                "--noise",
                "0",
                "--seed",
                seed,
            ],
            dir.path(),
        );
        ok(
            &[
                "fit", "c.json", "--out", "r", "--k", "4", "--iters", "80", "--reps", "3", "--seed", seed,
            ],
            dir.path(),
        );
        let stdout = ok(&["sclop", "r", "--no-pairwise"], dir.path());
        let score: f64 = stdout.split_whitespace().nth(1).unwrap().parse().unwrap();
        if score < 0.9 {
            low.push((seed, score));
        }
    }
    assert!(low.is_empty(), "{low:?}");
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["synth", "--out", "a.json", "--seed", "11"], dir.path());
    ok(&["synth", "--out", "b.json", "--seed", "11"], dir.path());
    assert_eq!(
        fs::read(dir.path().join("a.json")).unwrap(),
        fs::read(dir.path().join("b.json")).unwrap()
    );
    assert_eq!(json(&dir.path().join("a.spec.json"))["seed"], 11);
}

#[test]
fn malformed_run_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("runs")).unwrap();
    fs::write(dir.path().join("runs/run_001.csv"), "word,topic1\na,x\n").unwrap();
    let out = sclop(&["sclop", "runs"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad count"));
}
