use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn cfft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfft")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn forms_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../forms")
}

/// Optimizes the n = 7 direct plan and returns (plan file, schedule file).
fn n7_files(dir: &TempDir) -> (PathBuf, PathBuf) {
    let plan = path(dir, "p7.json");
    let sched = path(dir, "s7.txt");
    let o = cfft(&["plan", "--n", "7", "--out", s(&plan)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = cfft(&["optimize", "--plan", s(&plan), "--runs", "20", "--out", s(&sched)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    (plan, sched)
}

#[test]
fn plan_reports_six_multiplications_for_every_kind() {
    for kind in ["dcfft", "scfft", "icfft"] {
        let o = cfft(&["plan", "--n", "7", "--kind", kind]);
        assert_eq!(code(&o), 0);
        assert!(stdout(&o).contains("mult=6, direct_adds=42"), "{}", stdout(&o));
    }
}

#[test]
fn plan_rejects_lengths_that_are_not_mersenne() {
    let o = cfft(&["plan", "--n", "9"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not 2^m - 1"), "{}", stderr(&o));
}

#[test]
fn unknown_kind_and_bad_flags_are_bad_input() {
    assert_eq!(code(&cfft(&["plan", "--n", "7", "--kind", "fft"])), 2);
    assert_eq!(code(&cfft(&["plan", "--n", "seven"])), 2);
    assert_eq!(code(&cfft(&["optimize", "--n", "7", "--algo", "quick"])), 2);
}

#[test]
fn missing_forms_exit_with_three_unless_naive_is_allowed() {
    let dir = TempDir::new().unwrap();
    let o = cfft(&["plan", "--n", "15", "--forms", s(dir.path())]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("length 4"));

    let o = cfft(&["plan", "--n", "15", "--forms", s(dir.path()), "--allow-naive"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    fs::copy(forms_dir().join("cyclic_4.txt"), dir.path().join("cyclic_4.txt")).unwrap();
    let o = cfft(&["plan", "--n", "15", "--forms", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("mult=16"));
}

#[test]
fn invalid_form_file_is_bad_input() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(forms_dir().join("cyclic_4.txt")).unwrap();
    let broken = text.replacen('1', "0", 1);
    fs::write(dir.path().join("cyclic_4.txt"), broken).unwrap();
    let o = cfft(&["plan", "--n", "15", "--forms", s(dir.path())]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn optimize_then_verify_passes() {
    let dir = TempDir::new().unwrap();
    let (plan, sched) = n7_files(&dir);
    let o = cfft(&["verify", "--schedule", s(&sched), "--plan", s(&plan)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("pass"));
}

#[test]
fn deleting_a_step_fails_verification() {
    let dir = TempDir::new().unwrap();
    let (plan, sched) = n7_files(&dir);
    let text = fs::read_to_string(&sched).unwrap();
    // drop step t0: uses of t0 read its first operand, later temps shift down
    let first = text.lines().find_map(|l| l.strip_prefix("t0 = ")).unwrap();
    let kept_operand = first.split(' ').next().unwrap().to_string();
    let rename = |tok: &str| -> String {
        match tok.strip_prefix('t').and_then(|k| k.parse::<usize>().ok()) {
            Some(0) => kept_operand.clone(),
            Some(k) => format!("t{}", k - 1),
            None => tok.to_string(),
        }
    };
    let mut out = String::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with("t0 = ") {
            continue;
        }
        let renamed: Vec<String> = line.split(' ').map(&rename).collect();
        let mut line = renamed.join(" ");
        if i == 0 {
            // header: inputs outputs additions multiplications
            let mut f: Vec<usize> = line.split(' ').skip(1).map(|x| x.parse().unwrap()).collect();
            f[2] -= 1;
            line = format!("schedule {} {} {} {}", f[0], f[1], f[2], f[3]);
        }
        out.push_str(&line);
        out.push('\n');
    }
    let broken = path(&dir, "broken.txt");
    fs::write(&broken, out).unwrap();
    let o = cfft(&["verify", "--schedule", s(&broken), "--plan", s(&plan)]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("first differing output F"), "{}", stderr(&o));
}

#[test]
fn schedule_for_another_length_is_a_dimension_error() {
    let dir = TempDir::new().unwrap();
    let (_, sched) = n7_files(&dir);
    let plan15 = path(&dir, "p15.json");
    assert_eq!(code(&cfft(&["plan", "--n", "15", "--out", s(&plan15)])), 0);
    let o = cfft(&["verify", "--schedule", s(&sched), "--plan", s(&plan15)]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("dimension"), "{}", stderr(&o));
}

#[test]
fn worked_matrix_optimizes_to_six() {
    let dir = TempDir::new().unwrap();
    let m = path(&dir, "m.txt");
    fs::write(&m, "4 5\n10111\n11111\n11011\n01110\n").unwrap();
    let sched = path(&dir, "m.sched");
    let o = cfft(&["optimize", "--matrix", s(&m), "--runs", "10", "--out", s(&sched)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["adds_best"], 6);
    assert_eq!(report["per_run"].as_array().unwrap().len(), 10);

    let o = cfft(&["optimize", "--matrix", s(&m), "--runs", "10", "--recurrence-only", "--report", "csv"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("# best=7"), "{}", stderr(&o));

    let o = cfft(&["verify", "--schedule", s(&sched), "--matrix", s(&m)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn bench_report_schema_and_determinism() {
    let run = || {
        let o = cfft(&["bench", "--n", "7,15", "--kind", "dcfft,icfft", "--runs", "8", "--seed", "3"]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap()
    };
    let a = run();
    let rows = a.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for key in [
        "n", "kind", "mult", "adds_best", "adds_mean", "adds_std", "total", "runs", "seed", "wall_ms", "paper_adds",
        "paper_mult",
    ] {
        assert!(rows[0].get(key).is_some(), "missing {key}");
    }
    for r in rows {
        assert!(r["adds_best"].as_f64().unwrap() <= r["adds_mean"].as_f64().unwrap());
        let m = if r["n"] == 7 { 3 } else { 4 };
        assert_eq!(r["total"], r["adds_best"].as_u64().unwrap() + (2 * m - 1) * r["mult"].as_u64().unwrap());
    }
    assert_eq!(rows[0]["paper_adds"], 24);
    assert_eq!(rows[0]["paper_mult"], 6);

    let strip = |v: &serde_json::Value| {
        let mut v = v.clone();
        for r in v.as_array_mut().unwrap() {
            r.as_object_mut().unwrap().remove("wall_ms");
        }
        v
    };
    assert_eq!(strip(&a), strip(&run()));
}

#[test]
fn bench_csv_to_file() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "bench.csv");
    let o = cfft(&["bench", "--n", "7", "--runs", "4", "--report", "csv", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("n,kind,mult,adds_best"), "{text}");
    assert_eq!(text.lines().count(), 2);
}
