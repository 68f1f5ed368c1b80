//! Black-box tests of the `minifl` binary: exit codes, artifacts, and
//! report determinism.

use std::path::Path;
use std::process::{Command, Output};

const FAULTY: &str = "fn f(a) {\n\
                          if (a > 0.0) {\n\
                              return 0.0 - a;\n\
                          }\n\
                          return a;\n\
                      }\n\
                      test pos { let x = f(3.0); assert_eq(x, 3.0); assert(x > 0.0); }\n\
                      test neg { assert_eq(f(-3.0), -3.0); }\n";

const GREEN: &str = "fn id(x) { return x; }\ntest t { assert_eq(id(1.0), 1.0); }\n";

fn minifl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minifl"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = minifl(&["localize"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = minifl(&["frobnicate"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_exit_3_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "bad.ml0", "fn f( { return 1; }");
    let out = minifl(&["localize", &p], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
}

#[test]
fn green_suite_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "green.ml0", GREEN);
    let out = minifl(&["localize", &p], tmp.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn run_reports_outcomes() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "faulty.ml0", FAULTY);
    let out = minifl(&["run", &p], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("pos: failure"));
    assert!(stdout.contains("neg: pass"));
    assert!(stdout.contains("1 failing"));
}

#[test]
fn localize_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "faulty.ml0", FAULTY);
    let out = minifl(&["localize", &p, "--technique", "ochiai", "--out", "base"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ranking = std::fs::read_to_string(tmp.path().join("base/ranking.csv")).unwrap();
    assert!(ranking.starts_with("ordinal,line,susp,norm,ratio,score,rank_effort_if_faulty\n"));
    assert!(tmp.path().join("base/spectra.csv").exists());
    // without purification every phase timing is zero.
    let timings = std::fs::read_to_string(tmp.path().join("base/timings.txt")).unwrap();
    assert_eq!(
        timings,
        "atomization_nanos=0\nslicing_nanos=0\nrefinement_nanos=0\n"
    );
    assert!(!tmp.path().join("base/purified").exists());

    let out = minifl(&["localize", &p, "--purify", "--out", "pur"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let purified: Vec<_> = std::fs::read_dir(tmp.path().join("pur/purified"))
        .unwrap()
        .collect();
    assert!(!purified.is_empty(), "purified test files should be emitted");
    let timings = std::fs::read_to_string(tmp.path().join("pur/timings.txt")).unwrap();
    assert!(!timings.contains("atomization_nanos=0\n"));
}

#[test]
fn mutate_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "green.ml0", GREEN);
    let out = minifl(&["mutate", &p, "--out", "m"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(tmp.path().join("m/mutants.jsonl")).unwrap();
    assert!(!manifest.is_empty());
    for line in manifest.lines() {
        assert!(line.starts_with("{\"id\":"));
        assert!(line.contains("\"operator\":"));
        assert!(line.contains("\"detected\":"));
    }
}

#[test]
fn mutate_requires_green_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "faulty.ml0", FAULTY);
    let out = minifl(&["mutate", &p, "--out", "m"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn evaluate_reports_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "green.ml0", GREEN);
    let p2 = write(
        tmp.path(),
        "more.ml0",
        "fn double(x) { return x * 2.0; }\n\
         fn half(x) { return x / 2.0; }\n\
         test d { assert_eq(double(2.0), 4.0); assert_eq(double(0.0), 0.0); }\n\
         test h { assert_eq(half(4.0), 2.0); assert_eq(half(double(3.0)), 3.0); }\n",
    );
    let args = ["evaluate", &p, &p2, "--sample", "8", "--seed", "11", "--out", "e1"];
    let out = minifl(&args, tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut args2 = args;
    args2[8] = "e2";
    let out = minifl(&args2, tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let r1 = std::fs::read(tmp.path().join("e1/report.json")).unwrap();
    let r2 = std::fs::read(tmp.path().join("e2/report.json")).unwrap();
    assert!(!r1.is_empty());
    assert_eq!(r1, r2, "reports differ across identical runs");
}

#[test]
fn evaluate_csv_format_and_technique_filter() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "green.ml0", GREEN);
    let out = minifl(
        &[
            "evaluate", &p, "--sample", "3", "--technique", "tarantula", "--format", "csv",
            "--out", "e",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("e/report.csv")).unwrap();
    assert!(csv.starts_with("program,mutant,operator,"));
    assert!(csv.contains("tarantula"));
    assert!(!csv.contains("ochiai"));
}

#[test]
fn config_file_is_honored_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "faulty.ml0", FAULTY);
    let cfg = write(tmp.path(), "run.conf", "technique = sbi\npurify = true\n");
    let out = minifl(&["localize", &p, "--config", &cfg, "--out", "o1"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("technique: sbi, purify: true"), "{stdout}");

    let out = minifl(
        &["localize", &p, "--config", &cfg, "--technique", "jaccard", "--no-purify", "--out", "o2"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("technique: jaccard, purify: false"), "{stdout}");

    let bad = write(tmp.path(), "bad.conf", "technique = psychic\n");
    let out = minifl(&["localize", &p, "--config", &bad], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}
