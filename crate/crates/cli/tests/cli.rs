use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(rel)
}

fn miniats(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_miniats")).args(args).env_remove("MINIATS_PRELUDE").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn check_accepts_the_corpus() {
    let files: Vec<PathBuf> = std::fs::read_dir(corpus(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|f| f.extension().is_some_and(|x| x == "mats"))
        .collect();
    let mut args = vec!["check"];
    args.extend(files.iter().map(|f| p(f)));
    let out = miniats(&args);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.ends_with(": accepted")).count(), files.len());
}

#[test]
fn check_reports_mutations_with_exit_one() {
    let out = miniats(&["check", p(&corpus("mutations/insort_swap_branch.mats"))]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("UnsolvedConstraint"));
}

#[test]
fn check_missing_file_is_exit_two() {
    let out = miniats(&["check", "no/such/file.mats"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn parse_errors_are_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.mats");
    std::fs::write(&f, "fun f (x: int) : int = (x +\n").unwrap();
    let out = miniats(&["check", p(&f)]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("ParseError"));
}

#[test]
fn json_report_lists_diagnostic_records() {
    let out = miniats(&["check", "--json-report", p(&corpus("mutations/qsrt_missing_arm.mats"))]);
    assert_eq!(code(&out), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let recs = v.as_array().unwrap();
    assert!(!recs.is_empty());
    for r in recs {
        for key in ["file", "line", "col", "kind", "message"] {
            assert!(r.get(key).is_some(), "{r}");
        }
    }
    assert!(recs.iter().any(|r| r["kind"] == "NonExhaustiveMatch"));
}

#[test]
fn dump_constraints_writes_one_line_per_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("c.txt");
    let out = miniats(&["check", "--dump-constraints", p(&log), p(&corpus("fibats.mats"))]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&log).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|l| l.contains(" |- ") && l.contains(" | ")), "{text}");
}

#[test]
fn jobs_do_not_change_the_output() {
    let files: Vec<PathBuf> = std::fs::read_dir(corpus("mutations"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut one = vec!["check", "--jobs", "1"];
    one.extend(files.iter().map(|f| p(f)));
    let mut four = vec!["check", "--jobs", "4"];
    four.extend(files.iter().map(|f| p(f)));
    let (a, b) = (miniats(&one), miniats(&four));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(code(&a), code(&b));
}

#[test]
fn run_prints_values_in_literal_syntax() {
    let out = miniats(&["run", p(&corpus("fibats.mats")), "--entry", "fibats", "10"]);
    assert_eq!((code(&out), stdout(&out).trim()), (0, "55"));
    let out = miniats(&["run", p(&corpus("insort_verified.mats")), "--entry", "insort_int", "[3,1,2]"]);
    assert_eq!(stdout(&out).trim(), "[1,2,3]");
    let out = miniats(&["run", p(&corpus("qsrt_verified.mats")), "--entry", "qsrt_int", "[]"]);
    assert_eq!(stdout(&out).trim(), "[]");
    let out = miniats(&["run", p(&corpus("qsrt_plain.mats")), "--entry", "qsrt_int", "[2,-1,0]"]);
    assert_eq!(stdout(&out).trim(), "[-1,0,2]");
}

#[test]
fn run_reports_fuel_exhaustion_with_exit_three() {
    let out = miniats(&["run", p(&corpus("fib_plain.mats")), "--entry", "fib", "--fuel", "50", "20"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("fuel exhausted"));
}

#[test]
fn run_rejects_bad_entries_and_arguments() {
    assert_eq!(code(&miniats(&["run", p(&corpus("fibats.mats"))])), 2);
    assert_eq!(code(&miniats(&["run", p(&corpus("fibats.mats")), "--entry", "fibats", "[1]"])), 2);
    assert_eq!(code(&miniats(&["run", p(&corpus("mutations/fibats_wrong_sum.mats")), "--entry", "fibats", "3"])), 1);
}

#[test]
fn erase_output_is_proof_free_and_rechecks() {
    let dir = tempfile::tempdir().unwrap();
    for (file, entry, inputs) in [
        ("fibats.mats", "fibats", vec!["0", "1", "7", "30"]),
        ("insort_verified.mats", "insort_int", vec!["[]", "[2,2,1]", "[5,4,3,2,1]"]),
        ("qsrt_verified.mats", "qsrt_int", vec!["[]", "[3,0,3,1]", "[1,2,3,4,5,6]"]),
    ] {
        let erased = dir.path().join(file);
        let out = miniats(&["erase", p(&corpus(file)), "--out", p(&erased)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let text = std::fs::read_to_string(&erased).unwrap();
        for kw in ["prval", "praxi", "absprop", "dataprop", "prfun"] {
            assert!(!text.split(|c: char| !c.is_alphanumeric() && c != '_').any(|w| w == kw), "{file}: {kw}");
        }
        assert_eq!(code(&miniats(&["check", p(&erased)])), 0, "{text}");
        for arg in inputs {
            let a = miniats(&["run", p(&corpus(file)), "--entry", entry, arg]);
            let b = miniats(&["run", p(&erased), "--entry", entry, arg]);
            assert_eq!(stdout(&a), stdout(&b), "{file} {arg}");
        }
    }
}

#[test]
fn erased_loops_keep_only_program_parameters() {
    let out = stdout(&miniats(&["erase", p(&corpus("fibats.mats"))]));
    assert!(out.contains("(r0: int (r0), r1: int (r1), ni: int (n - i))"), "{out}");
    let out = stdout(&miniats(&["erase", p(&corpus("qsrt_verified.mats"))]));
    let part = out.lines().find(|l| l.starts_with("and part")).unwrap();
    let start = part.find("(x0:").unwrap();
    let params = &part[start..start + part[start..].find(") :").unwrap()];
    assert_eq!(params.matches(':').count(), 5, "{part}");
}

#[test]
fn audit_exit_codes() {
    let out = miniats(&["audit", p(&corpus("prelude_insort_lemmas.mats"))]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().filter(|l| l.contains(" PASS n=")).count(), 11);
    let out = miniats(&["audit", p(&corpus("mutations/false_lemma.mats"))]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out).trim(), "PERM2ORD FAIL xs=[0,1], ys=[1,0]");
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("q.mats");
    std::fs::write(&f, "absprop Q (int)\npraxi q {x:int} () : Q (x)\n").unwrap();
    let out = miniats(&["audit", p(&f)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no semantic model for prop `Q`"));
}

#[test]
fn audit_bounds_flags() {
    let f = corpus("prelude_insort_lemmas.mats");
    let out = miniats(&["audit", p(&f), "--lemma", "PERM_refl", "--max-len", "2", "--min-val", "-1", "--max-val", "1"]);
    assert_eq!(stdout(&out).trim(), "PERM_refl PASS n=13");
    assert_eq!(code(&miniats(&["audit", p(&f), "--max-len", "0"])), 2);
    assert_eq!(code(&miniats(&["audit", p(&f), "--lemma", "PERM_tran", "--cap", "5"])), 2);
}

#[test]
fn prelude_can_be_replaced_or_disabled() {
    let out = miniats(&["check", "--no-prelude", p(&corpus("fibats.mats"))]);
    assert_eq!(code(&out), 0);
    let out = miniats(&["check", "--no-prelude", p(&corpus("insort_verified.mats"))]);
    assert_eq!(code(&out), 1);
    let out = Command::new(env!("CARGO_BIN_EXE_miniats"))
        .args(["check", p(&corpus("insort_verified.mats"))])
        .env("MINIATS_PRELUDE", "no/such/prelude.mats")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let dir = tempfile::tempdir().unwrap();
    let pre = dir.path().join("pre.mats");
    std::fs::write(&pre, "fun twice (x: int) : int = x + x\n").unwrap();
    let prog = dir.path().join("main.mats");
    std::fs::write(&prog, "fun main (x: int) : int = twice (x)\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_miniats"))
        .args(["run", p(&prog), "21"])
        .env("MINIATS_PRELUDE", &pre)
        .output()
        .unwrap();
    assert_eq!(stdout(&out).trim(), "42", "{}", stderr(&out));
}
