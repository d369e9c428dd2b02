use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn histnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_histnorm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(o: Output) -> Output {
    assert!(
        o.status.success(),
        "exit {:?}\n{}",
        o.status.code(),
        stderr(&o)
    );
    o
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture {
            dir: tempfile::tempdir().unwrap(),
        };
        f.write(
            "train.txt",
            "vnd\tund\nvns\tuns\nſo\tso\nyn\tin\nder\tder\nvnd\tund\nſeyn\tsein\nvnſer\tunser\n",
        );
        f.write(
            "test.txt",
            "vnd\tund\nſeyn\tsein\nvnſern\tunsern\nder\tder\n",
        );
        f.write("words.txt", "und\nuns\nso\nin\nder\nsein\nunser\nunsern\n");
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }

    fn train(&self, backend: &str, out: &str, extra: &[&str]) -> Output {
        let (train, out) = (self.p("train.txt"), self.p(out));
        let mut args = vec![
            "train",
            "--backend",
            backend,
            "--train",
            &train,
            "--output",
            &out,
        ];
        args.extend_from_slice(extra);
        histnorm(&args)
    }
}

fn report_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn preprocess_is_deterministic_and_logs_drops() {
    let f = Fixture::new();
    f.write("raw.txt", "Vnd\tUnd\n.\t.\nJar 1520\tJahr 1520\n\n,\tund\n");
    let a = ok(histnorm(&[
        "preprocess",
        "-i",
        &f.p("raw.txt"),
        "-o",
        &f.p("a.txt"),
        "--drop-log",
        &f.p("drops.txt"),
    ]));
    ok(histnorm(&[
        "preprocess",
        "-i",
        &f.p("raw.txt"),
        "-o",
        &f.p("b.txt"),
    ]));
    assert_eq!(
        fs::read(f.path("a.txt")).unwrap(),
        fs::read(f.path("b.txt")).unwrap()
    );
    assert_eq!(
        f.read("a.txt"),
        "vnd\tund\njar\u{2581}0000\tjahr\u{2581}0000\n"
    );
    assert!(stderr(&a).contains("dropped 2"), "{}", stderr(&a));
    assert_eq!(f.read("drops.txt"), "2\t.\t.\n5\t,\tund\n");
}

#[test]
fn invalid_utf8_exits_with_2() {
    let f = Fixture::new();
    fs::write(f.path("bad.txt"), b"vnd\tund\n\xff\xfe\tx\n").unwrap();
    let o = histnorm(&["preprocess", "-i", &f.p("bad.txt"), "-o", &f.p("out.txt")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(histnorm(&["train"]).status.code(), Some(2));
    assert_eq!(histnorm(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        histnorm(&["train", "--backend", "nope", "--train", "x", "-o", "y"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn lookup_model_is_reproducible() {
    let f = Fixture::new();
    f.write("three.txt", "vnd\tund\nvns\tuns\nſo\tso\n");
    for out in ["m1.json", "m2.json"] {
        ok(histnorm(&[
            "train",
            "-b",
            "lookup",
            "--train",
            &f.p("three.txt"),
            "-o",
            &f.p(out),
        ]));
    }
    assert_eq!(
        fs::read(f.path("m1.json")).unwrap(),
        fs::read(f.path("m2.json")).unwrap()
    );
    let model: serde_json::Value = serde_json::from_str(&f.read("m1.json")).unwrap();
    assert_eq!(model["source_vocabulary"].as_array().unwrap().len(), 3);
}

#[test]
fn chain_without_lexicon_names_the_flag() {
    let f = Fixture::new();
    let o = f.train("chain", "chain.json", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--lexicon"), "{}", stderr(&o));
}

#[test]
fn train_normalize_evaluate() {
    let f = Fixture::new();
    ok(histnorm(&[
        "lexicon",
        "--wordlist",
        &f.p("words.txt"),
        "-o",
        &f.p("lex.tsv"),
    ]));
    for backend in ["lookup", "rules", "distance", "channel", "chain"] {
        let out = format!("{backend}.json");
        ok(f.train(backend, &out, &["--lexicon", &f.p("lex.tsv")]));
        let o = ok(histnorm(&[
            "normalize",
            "-m",
            &f.p(&out),
            "-i",
            &f.p("test.txt"),
        ]));
        let text = stdout(&o);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4, "{backend}");
        assert_eq!(lines[0], "und", "{backend}");
    }
    let report = f.path("report.json");
    let o = ok(histnorm(&[
        "evaluate",
        "--test",
        &f.p("test.txt"),
        "--model",
        &f.p("chain.json"),
        "--train",
        &f.p("train.txt"),
        "--stem-lang",
        "de",
        "-o",
        report.to_str().unwrap(),
    ]));
    assert!(stdout(&o).contains("accuracy"));
    let r = report_json(&report);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["n_total"], 4);
    assert_eq!(r["seen"]["value"]["n"], 3);
    assert_eq!(r["unseen"]["value"]["n"], 1);
}

#[test]
fn evaluate_predictions_files() {
    let f = Fixture::new();
    f.write("gold.txt", "und\nsein\nunsern\nder\n");
    let o = ok(histnorm(&[
        "evaluate",
        "--test",
        &f.p("test.txt"),
        "--predictions",
        &f.p("gold.txt"),
    ]));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["word_accuracy"], 1.0);
    assert!(r["cer_incorrect"].get("absent").is_some(), "{r}");
    assert!(r["seen"].get("absent").is_some());

    // identity predictions score the identity baseline
    f.write("ident.txt", "vnd\nſeyn\nvnſern\nder\n");
    let o = ok(histnorm(&[
        "evaluate",
        "--test",
        &f.p("test.txt"),
        "--predictions",
        &f.p("ident.txt"),
    ]));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["word_accuracy"], r["identity_baseline"]);
    assert_eq!(r["word_accuracy"], 0.25);

    f.write("short.txt", "und\n");
    let o = histnorm(&[
        "evaluate",
        "--test",
        &f.p("test.txt"),
        "--predictions",
        &f.p("short.txt"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("1 lines") && stderr(&o).contains("4 pairs"),
        "{}",
        stderr(&o)
    );
}

fn bits_report(f: &Fixture, name: &str, bits: &str) -> String {
    let n = bits.len();
    let correct = bits.chars().filter(|&c| c == '1').count();
    let acc = correct as f64 / n as f64;
    let json = serde_json::json!({
        "schema_version": 1, "system": name, "dataset": "d", "n_total": n, "n_correct": correct,
        "word_accuracy": acc, "identity_baseline": 0.0, "maximum_accuracy": 1.0, "cer": 0.0,
        "cer_incorrect": {"absent": "x"}, "stem_accuracy_incorrect": {"absent": "x"},
        "seen": {"absent": "x"}, "unseen": {"absent": "x"}, "per_token_correctness": bits,
    });
    let file = format!("{name}.json");
    f.write(&file, &json.to_string());
    f.p(&file)
}

#[test]
fn compare_reports() {
    let f = Fixture::new();
    let base = "1".repeat(60) + &"0".repeat(40);
    let better = "1".repeat(100);
    let a = bits_report(&f, "a", &base);
    let b = bits_report(&f, "b", &better);
    let same = ok(histnorm(&["compare", &a, &a]));
    assert!(
        stdout(&same).contains("not significantly different"),
        "{}",
        stdout(&same)
    );
    let diff = ok(histnorm(&["compare", &a, &b]));
    assert!(
        stdout(&diff).contains("verdict\tsignificantly different"),
        "{}",
        stdout(&diff)
    );
    let three = ok(histnorm(&["compare", &a, &b, &a]));
    assert!(
        stdout(&three)
            .lines()
            .nth(2)
            .unwrap()
            .ends_with("\tbest\t-\t-"),
        "{}",
        stdout(&three)
    );

    let short = bits_report(&f, "short", "101");
    let o = histnorm(&["compare", &a, &short]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn hybrid_table_and_vocabulary_check() {
    let f = Fixture::new();
    ok(f.train("lookup", "lookup.json", &[]));
    ok(f.train("rules", "rules.json", &[]));
    let o = ok(histnorm(&[
        "hybrid",
        "--lookup",
        &f.p("lookup.json"),
        "--backoff",
        &f.p("rules.json"),
        "--test",
        &f.p("test.txt"),
        "-o",
        &f.p("hybrid.json"),
        "--save-model",
        &f.p("hybrid-model.json"),
    ]));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "system\taccuracy\tseen\tunseen\tmark");
    assert!(rows[3].starts_with("lookup+rules\t"), "{out}");
    assert_eq!(
        report_json(&f.path("hybrid.json"))["system"],
        "lookup+rules"
    );
    ok(histnorm(&[
        "normalize",
        "-m",
        &f.p("hybrid-model.json"),
        "-i",
        &f.p("test.txt"),
    ]));

    f.write("other.txt", "vnd\tund\n");
    ok(histnorm(&[
        "train",
        "-b",
        "rules",
        "--train",
        &f.p("other.txt"),
        "-o",
        &f.p("other.json"),
    ]));
    let o = histnorm(&[
        "hybrid",
        "--lookup",
        &f.p("lookup.json"),
        "--backoff",
        &f.p("other.json"),
        "--test",
        &f.p("test.txt"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("vocabularies differ"));
}

#[test]
fn curve_csv_and_oversized_sizes() {
    let f = Fixture::new();
    let o = ok(histnorm(&[
        "curve",
        "-b",
        "lookup",
        "--train",
        &f.p("train.txt"),
        "--dev",
        &f.p("test.txt"),
        "--sizes",
        "2,4,100",
    ]));
    let csv = stdout(&o);
    assert!(csv.starts_with("backend,n,split,accuracy\n"));
    assert!(csv.contains("lookup,4,mean,"));
    assert!(!csv.contains(",100,"));
    assert!(stderr(&o).contains("skipping size 100"), "{}", stderr(&o));
}

#[test]
fn config_files_roundtrip() {
    let f = Fixture::new();
    f.write("in.toml", "seed = 9\n[train.channel]\nbeam_width = 3\n");
    ok(histnorm(&[
        "--config",
        &f.p("in.toml"),
        "--save-config",
        &f.p("out.toml"),
        "train",
        "-b",
        "lookup",
        "--train",
        &f.p("train.txt"),
        "-o",
        &f.p("m.json"),
        "--lm-weight",
        "0.5",
    ]));
    let saved = f.read("out.toml");
    assert!(saved.contains("seed = 9"), "{saved}");
    assert!(saved.contains("beam_width = 3"));
    assert!(saved.contains("lm_weight = 0.5"));
    // the saved file reproduces itself
    ok(histnorm(&[
        "--config",
        &f.p("out.toml"),
        "--save-config",
        &f.p("again.toml"),
        "train",
        "-b",
        "lookup",
        "--train",
        &f.p("train.txt"),
        "-o",
        &f.p("m.json"),
    ]));
    assert_eq!(f.read("again.toml"), saved);

    f.write("broken.toml", "seed = \"many\"\n");
    let o = histnorm(&[
        "--config",
        &f.p("broken.toml"),
        "train",
        "-b",
        "lookup",
        "--train",
        &f.p("train.txt"),
        "-o",
        &f.p("m.json"),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
