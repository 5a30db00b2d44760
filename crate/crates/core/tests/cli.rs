use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hrload(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrload"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = hrload(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn without_comments(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn data_lines(path: &Path) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    without_comments(&text)
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn provenance_header_names_seed_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--seed", "9", "synth", "--out", "rec.csv"]);
    let text = fs::read_to_string(dir.path().join("rec.csv")).unwrap();
    let lines: Vec<&str> = text.lines().take(3).collect();
    assert_eq!(lines[0], format!("# hrload {}", hrload::VERSION));
    assert_eq!(lines[1], "# seed: 9");
    assert_eq!(lines[2], "# flags: --seed 9 synth --out rec.csv");
}

#[test]
fn analyze_finds_both_transitions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &["synth", "--out", "rec.csv", "--marks-out", "marks.txt"],
    );
    ok(
        d,
        &[
            "analyze",
            "rec.csv",
            "--marks",
            "marks.txt",
            "--out-dir",
            "out",
        ],
    );
    for name in [
        "accumulated",
        "window",
        "panels",
        "events",
        "slopes",
        "recovery",
        "landmarks",
    ] {
        assert!(d.join("out").join(format!("{name}.csv")).exists(), "{name}");
    }
    let events = data_lines(&d.join("out/events.csv"));
    assert_eq!(events.len(), 3, "{events:?}");
    assert!(events[0].starts_with("t,index,kind"));
}

#[test]
fn json_format() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--out", "rec.csv"]);
    ok(
        d,
        &[
            "--format",
            "json",
            "bootstrap",
            "rec.csv",
            "--out-dir",
            "b",
            "--trials",
            "50",
        ],
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("b/cloud.json")).unwrap()).unwrap();
    assert_eq!(v["provenance"]["tool"], "hrload");
    assert_eq!(v["cloud"].as_array().unwrap().len(), 50);
}

#[test]
fn bootstrap_output_ignores_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--out", "rec.csv"]);
    let mut tables = Vec::new();
    for (w, out) in [("1", "w1"), ("4", "w4")] {
        ok(
            d,
            &[
                "--workers",
                w,
                "bootstrap",
                "rec.csv",
                "--out-dir",
                out,
                "--trials",
                "200",
            ],
        );
        tables.push(data_lines(&d.join(out).join("cloud.csv")));
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let missing = hrload(d, &["analyze", "nope.csv", "--out-dir", "o"]);
    assert_eq!(missing.status.code(), Some(2));

    let unknown = hrload(d, &["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));

    ok(
        d,
        &["synth", "--out", "flat.csv", "--segments", "200:800:0"],
    );
    let flat = hrload(
        d,
        &["bootstrap", "flat.csv", "--out-dir", "o", "--trials", "10"],
    );
    assert_eq!(
        flat.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&flat.stderr)
    );
}

#[test]
fn train_and_predict() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--exercises", "30", "--out", "ex.csv"]);
    ok(
        d,
        &[
            "train",
            "ex.csv",
            "--learner",
            "dl",
            "--model",
            "4",
            "--out",
            "dl.json",
            "--max-epochs",
            "200",
        ],
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("dl.json")).unwrap()).unwrap();
    assert_eq!(v["body"]["sizes"], serde_json::json!([7, 12, 8, 6, 3, 1]));

    ok(
        d,
        &["predict", "ex.csv", "--model", "dl.json", "--out", "p.csv"],
    );
    assert_eq!(data_lines(&d.join("p.csv")).len(), 31);

    ok(
        d,
        &[
            "train",
            "ex.csv",
            "--learner",
            "lm",
            "--model",
            "1",
            "--out",
            "lm.json",
        ],
    );
    ok(d, &["predict", "ex.csv", "--model", "lm.json"]);
    // model 1 has 2 features; a third coefficient breaks the schema
    let wrong = d.join("lm.json");
    let mut art: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&wrong).unwrap()).unwrap();
    art["body"]["coefficients"] = serde_json::json!([1.0, 2.0, 3.0]);
    fs::write(&wrong, art.to_string()).unwrap();
    let mismatch = hrload(d, &["predict", "ex.csv", "--model", "lm.json"]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn train_all_writes_every_learner() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--exercises", "30", "--out", "ex.csv"]);
    ok(
        d,
        &[
            "--workers",
            "3",
            "train",
            "ex.csv",
            "--learner",
            "all",
            "--model",
            "2",
            "--out",
            "models",
            "--max-epochs",
            "100",
            "--diagnostics",
            "diag.csv",
        ],
    );
    for l in ["lm", "nn", "dl"] {
        assert!(d.join("models").join(format!("{l}.json")).exists());
    }
    assert_eq!(data_lines(&d.join("diag.csv")).len(), 31);
}

#[test]
fn landmarks_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["landmarks"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = without_comments(&text);
    assert!(rows.contains("landmark,normal,0.0,3.0"));
    assert!(rows.contains("boundary,"));
}
