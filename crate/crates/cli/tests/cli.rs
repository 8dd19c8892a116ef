use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_groundverb")).args(args).output().expect("spawn groundverb")
}

fn ok<S: AsRef<std::ffi::OsStr> + std::fmt::Debug>(args: &[S]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn fails<S: AsRef<std::ffi::OsStr> + std::fmt::Debug>(args: &[S]) -> String {
    let out = run(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

/// Six 40-second subjects narrating three verbs without noise.
fn small_corpus(tmp: &TempDir) -> PathBuf {
    let config = tmp.path().join("plan.json");
    fs::write(
        &config,
        r#"{"subjects": 6, "duration": 40.0, "verbs": ["pick", "walk", "throw"], "seed": 2,
            "narration": {"verbs": {"pick": 1.0, "walk": 1.0, "throw": 1.0}, "nouns": {}, "displaced_mentions": false}}"#,
    )
    .unwrap();
    let out = tmp.path().join("sessions");
    ok(&["simulate", "--config", s(&config), "--out-dir", s(&out)]);
    out
}

#[test]
fn simulate_writes_one_file_per_default_subject() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["simulate", "--duration", "6", "--seed", "7", "--out-dir", s(&a)]);
    ok(&["simulate", "--duration", "6", "--seed", "7", "--out-dir", s(&b)]);
    let files = dir_contents(&a);
    assert_eq!(files.len(), 18);
    assert_eq!(files[0].0, "s01.json");
    assert_eq!(files, dir_contents(&b));
}

#[test]
fn simulate_rejects_bad_configs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let err = fails(&["simulate", "--config", "/nonexistent/plan.json", "--out-dir", s(&out)]);
    assert!(err.contains("plan.json"), "{err}");
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"subjects": 2, "colour": "red"}"#).unwrap();
    fails(&["simulate", "--config", s(&bad), "--out-dir", s(&out)]);
}

#[test]
fn stats_matches_the_hand_counted_table() {
    let tmp = TempDir::new().unwrap();
    let corpus = fixtures().join("corpus_kitchen");
    ok(&["stats", "--corpus-dir", s(&corpus), "--out-dir", s(tmp.path())]);
    let got = fs::read_to_string(tmp.path().join("distribution.tsv")).unwrap();
    let expected = fs::read_to_string(fixtures().join("corpus_kitchen.expected.tsv")).unwrap();
    let rows: Vec<Vec<&str>> =
        expected.lines().filter(|l| !l.starts_with('#')).map(|l| l.split('\t').collect()).collect();
    let total = rows.iter().find(|r| r[0] == "total").unwrap();
    for r in rows.iter().filter(|r| r[0] != "total") {
        for (level, count, all) in [("token", r[1], total[1]), ("type", r[2], total[2])] {
            let want = format!("{level}\t{}\t{count}\t{all}\t", r[0]);
            assert!(got.lines().any(|l| l.starts_with(&want)), "{want:?} missing from\n{got}");
        }
    }
    assert!(tmp.path().join("top.tsv").exists());
}

#[test]
fn stats_and_signal_input_errors() {
    let tmp = TempDir::new().unwrap();
    let corpus = fixtures().join("corpus_kitchen");
    fails(&["stats", "--corpus-dir", s(&corpus), "--lexicon", "/nonexistent/lexicon.tsv"]);
    fails(&["stats", "--corpus-dir", s(tmp.path())]);
    fails(&["signal", "--corpus-dir", s(tmp.path())]);
    fails(&["signal", "--corpus-dir", s(&corpus), "--lexicon", "/nonexistent/lexicon.tsv"]);
}

#[test]
fn signal_reports_certain_words() {
    let tmp = TempDir::new().unwrap();
    let corpus = small_corpus(&tmp);
    let out = tmp.path().join("signal.tsv");
    ok(&["signal", "--corpus-dir", s(&corpus), "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("word\tcategory\tN\tP\n"));
    for verb in ["pick", "walk", "throw"] {
        let row = text.lines().find(|l| l.starts_with(&format!("{verb}\tverb\t"))).unwrap();
        assert!(row.ends_with("\t1.000") || row.ends_with("\tabsent"), "{row}");
    }
    assert!(text.lines().any(|l| l == "cook\tverb\t0\tabsent"));
}

#[test]
fn train_and_eval_round_trip() {
    let tmp = TempDir::new().unwrap();
    let corpus = small_corpus(&tmp);
    let model = tmp.path().join("model.json");
    let common = ["--corpus-dir", s(&corpus), "--holdout", "s05,s06"];
    let train = |extra: &[&str]| -> Vec<String> {
        ["train"].iter().chain(&common).chain(extra).map(|a| a.to_string()).collect()
    };

    let err = fails(&train(&["--dims", "3", "--model-out", s(&model)]));
    assert!(err.contains("at most 2"), "{err}");
    fails(&train(&["--dims", "2", "--train-subjects", "s01,s05", "--model-out", s(&model)]));
    fails(&train(&["--encoder", "cnn", "--model-out", s(&model)]));
    ok(&train(&["--dims", "2", "--model-out", s(&model)]));
    let saved = fs::read_to_string(&model).unwrap();
    let reloaded = groundverb::ReducedModel::from_json_str(&saved).unwrap();
    assert_eq!(reloaded.to_json().unwrap() + "\n", saved);
    let svd = tmp.path().join("svd.json");
    ok(&train(&["--reduce", "svd", "--dims", "4", "--model-out", s(&svd)]));

    let (r1, r2) = (tmp.path().join("r1"), tmp.path().join("r2"));
    for r in [&r1, &r2] {
        ok(&["eval", "--model", s(&model), "--corpus-dir", s(&corpus), "--out-dir", s(r), "--bootstrap", "500"]);
    }
    assert_eq!(dir_contents(&r1), dir_contents(&r2));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(r1.join("report.json")).unwrap()).unwrap();
    let m = &report["model"];
    let n: u64 = m["per_verb"].as_object().unwrap().values().map(|r| r["n"].as_u64().unwrap()).sum();
    assert_eq!(n + m["abstained"].as_u64().unwrap(), m["clips"].as_u64().unwrap());
    let (lo, p, hi) = (m["ci"][0].as_f64().unwrap(), m["precision"].as_f64().unwrap(), m["ci"][1].as_f64().unwrap());
    assert!(lo <= p && p <= hi);
    assert!(report["baseline"].is_object());

    let err =
        fails(&["eval", "--model", s(&model), "--corpus-dir", s(&corpus), "--out-dir", s(&r1), "--subjects", "s02"]);
    assert!(err.contains("s02"), "{err}");
}

#[test]
fn oracle_features_matches_the_committed_table() {
    let out = ok(&["oracle-features", s(&fixtures().join("oracle_clip.json"))]);
    let got = String::from_utf8(out.stdout).unwrap();
    let want = fs::read_to_string(fixtures().join("oracle_clip.features.tsv")).unwrap();
    let (gl, wl): (Vec<&str>, Vec<&str>) = (got.lines().collect(), want.lines().collect());
    assert_eq!(gl.len(), 74);
    assert_eq!(gl[..2], wl[..2]);
    for (g, w) in gl[2..].iter().zip(&wl[2..]) {
        let (gn, gv) = g.split_once('\t').unwrap();
        let (wn, wv) = w.split_once('\t').unwrap();
        assert_eq!(gn, wn);
        let (gv, wv): (f64, f64) = (gv.parse().unwrap(), wv.parse().unwrap());
        assert!((gv - wv).abs() <= 1e-9, "{gn}: {gv} vs {wv}");
    }
}

#[test]
fn static_clip_has_zero_velocity_block() {
    let tmp = TempDir::new().unwrap();
    let config = tmp.path().join("still.json");
    // lead-in longer than the session keeps every object at rest
    fs::write(&config, r#"{"subjects": 1, "duration": 6.0, "lead_in": 10.0}"#).unwrap();
    let sessions = tmp.path().join("s");
    let clip = tmp.path().join("clip.json");
    ok(&["simulate", "--config", s(&config), "--out-dir", s(&sessions)]);
    ok(&["export-clip", s(&sessions.join("s01.json")), "--start", "0.5", "--out", s(&clip)]);
    let out = String::from_utf8(ok(&["oracle-features", s(&clip)]).stdout).unwrap();
    let vel: Vec<f64> =
        out.lines().filter(|l| l.starts_with("vel.")).map(|l| l.split_once('\t').unwrap().1.parse().unwrap()).collect();
    assert_eq!(vel.len(), 18);
    assert!(vel.iter().all(|v| *v == 0.0), "{vel:?}");
}

#[test]
fn malformed_clip_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"session_id": "x"}"#).unwrap();
    fails(&["oracle-features", s(&bad)]);
    fails(&["oracle-features", "/nonexistent/clip.json"]);
}
