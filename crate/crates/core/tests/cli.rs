use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn morphotok(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphotok"))
        .args(args)
        .current_dir(cwd)
        .env("MORPHOTOK_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

const CONFIG: &str = r#"
seed = 3
output_dir = "out"
merge_counts = [100, 150, 200]
top_n = 100

[schedule]
sizes = [1000, 2000, 3000]

[trainer]
merge_limit = 200

[[languages]]
lang = "ana"
group = "analytic"
corpus_path = "ana.txt"

[[languages]]
lang = "agg"
group = "synthetic"
corpus_path = "agg.txt"
corpus_format = "plaintext"
"#;

/// Writes two generated corpora and the config into `dir`.
fn fixture(dir: &Path) {
    for (name, kind, seed) in [("ana", "analytic", "4"), ("agg", "agglutinative", "1")] {
        let o = morphotok(&["gen-corpus", "--kind", kind, "--seed", seed, "--words", "3000"], dir);
        fs::write(dir.join(format!("{name}.txt")), stdout(&o)).unwrap();
    }
    fs::write(dir.join("exp.toml"), CONFIG).unwrap();
}

#[test]
fn gen_corpus_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen-corpus", "--kind", "analytic", "--seed", "7", "--words", "100"];
    let a = stdout(&morphotok(&args, dir.path()));
    let b = stdout(&morphotok(&args, dir.path()));
    assert_eq!(a, b);
    assert_eq!(a.split_whitespace().count(), 100);
    let c = stdout(&morphotok(&["gen-corpus", "--kind", "analytic", "--seed", "8", "--words", "100"], dir.path()));
    assert_ne!(a, c);
}

#[test]
fn productivity_fixture_prints_four_thirds() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "abc abd\n").unwrap();
    let out = stdout(&morphotok(&["productivity", "c.txt", "--merges", "1", "--seed", "5"], dir.path()));
    assert_eq!(out, "1.333333\n");
}

#[test]
fn slopes_on_exact_zipf() {
    let dir = tempfile::tempdir().unwrap();
    // Single-letter words whose counts are 2520 / rank: nothing can merge.
    let text: String = "abcdefghij"
        .chars()
        .enumerate()
        .map(|(i, c)| format!("{}\n", vec![c.to_string(); 2520 / (i + 1)].join(" ")))
        .collect();
    fs::write(dir.path().join("z.txt"), text).unwrap();
    let out = stdout(&morphotok(&["slopes", "z.txt", "--top", "10"], dir.path()));
    assert_eq!(out.lines().next(), Some("slope -1.000000"));
    assert!(out.contains("r2 1.000000"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let usage = morphotok(&["gen-corpus", "--kind", "fusional", "--words", "3"], dir.path());
    assert_eq!(usage.status.code(), Some(2));
    let usage = morphotok(&["train-bpe"], dir.path());
    assert_eq!(usage.status.code(), Some(2));
    let runtime = morphotok(&["productivity", "absent.txt"], dir.path());
    assert_eq!(runtime.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&runtime.stderr).contains("absent.txt"));
}

#[test]
fn missing_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let broken = CONFIG.replace("corpus_path = \"agg.txt\"", "");
    fs::write(dir.path().join("bad.toml"), broken).unwrap();
    let o = morphotok(&["run", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("languages[1].corpus_path: missing"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn stage_failure_is_tagged() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), CONFIG).unwrap();
    let o = morphotok(&["run", "exp.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ingest stage failed for ana"));
}

#[test]
fn run_is_reproducible_and_matches_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    stdout(&morphotok(&["run", "exp.toml"], d));
    let out = d.join("out");
    let report = fs::read(out.join("report.json")).unwrap();

    let json: Value = serde_json::from_slice(&report).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["languages"].as_array().unwrap().len(), 2);
    let table1 = fs::read_to_string(out.join("table1.csv")).unwrap();
    assert_eq!(table1.lines().count(), 3);
    for f in ["productivity.csv", "trend_ana.csv", "freq_agg.csv", "ids/ana.txt", "tokenizers/agg/vocab.tsv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    // Same config and seed: identical bytes.
    fs::rename(&out, d.join("first")).unwrap();
    stdout(&morphotok(&["run", "exp.toml"], d));
    assert_eq!(fs::read(out.join("report.json")).unwrap(), report);
    for f in ["table1.csv", "ids/agg.txt", "tokenizers/ana/merges.txt"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(d.join("first").join(f)).unwrap(), "{f}");
    }

    // The same results, one subcommand at a time.
    for (i, lang) in ["ana", "agg"].iter().enumerate() {
        let corpus = format!("{lang}.txt");
        let tok = format!("tok_{lang}");
        stdout(&morphotok(&["train-bpe", &corpus, "--merges", "200", "--out", &tok], d));
        for f in ["merges.txt", "vocab.tsv", "ledger.tsv"] {
            assert_eq!(
                fs::read(d.join(&tok).join(f)).unwrap(),
                fs::read(out.join("tokenizers").join(lang).join(f)).unwrap(),
                "{lang}/{f}"
            );
        }
        let ids = stdout(&morphotok(&["encode", &corpus, "--tokenizer", &tok, "--ids"], d));
        assert_eq!(ids, fs::read_to_string(out.join(format!("ids/{lang}.txt"))).unwrap());

        let rec = json["languages"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["lang"] == *lang)
            .unwrap_or_else(|| panic!("{lang} in report ({i})"));
        let rho: f64 = stdout(&morphotok(&["productivity", &corpus, "--merges", "100,150,200"], d))
            .trim()
            .parse()
            .unwrap();
        let want = rec["rho"]["mean_rho"].as_f64().unwrap();
        assert!((rho - want).abs() <= 1e-5 * want, "{rho} vs {want}");

        let slopes = stdout(&morphotok(&["slopes", &corpus, "--top", "100", "--merges", "200"], d));
        let slope: f64 = slopes.lines().next().unwrap()["slope ".len()..].parse().unwrap();
        let want = rec["fit"]["slope"].as_f64().unwrap();
        assert!((slope - want).abs() <= 1e-5, "{slope} vs {want}");
    }

    // `compare` prints the comparisons `run` stored.
    let cmp = stdout(&morphotok(&["compare", "exp.toml"], d));
    let stored = json["comparisons"].as_array().unwrap();
    assert_eq!(cmp.lines().count(), 1 + stored.len() + 1);
    for c in stored {
        assert!(cmp.contains(&format!("\n{}\t", c["metric_name"].as_str().unwrap())));
    }
}

#[test]
fn seed_flag_changes_shuffled_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixture(d);
    let cfg = CONFIG.replace("sizes = [1000, 2000, 3000]", "sizes = [500, 1000]\nmode = \"shuffle\"");
    fs::write(d.join("exp.toml"), cfg).unwrap();
    let a = stdout(&morphotok(&["compare", "exp.toml", "--seed", "1"], d));
    let b = stdout(&morphotok(&["compare", "exp.toml", "--seed", "1"], d));
    let c = stdout(&morphotok(&["compare", "exp.toml", "--seed", "2"], d));
    assert_eq!(a, b);
    assert_ne!(a, c);
}
