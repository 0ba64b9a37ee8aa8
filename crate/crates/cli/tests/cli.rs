use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/corpus")
        .join(file)
}

fn golden(file: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(file);
    std::fs::read_to_string(p).unwrap()
}

fn regal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regal")).args(args).output().unwrap()
}

fn infer(name: &str, extra: &[&str]) -> Output {
    let pl = corpus(&format!("{name}.pl"));
    let tg = corpus(&format!("{name}.tg"));
    let mut args = vec!["infer", pl.to_str().unwrap(), "--spec", tg.to_str().unwrap()];
    args.extend_from_slice(extra);
    regal(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("regal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn infer_append_matches_golden() {
    let o = infer("append", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("append.txt"));
}

#[test]
fn bad_constraint_call_exits_one() {
    let o = infer("badcall", &[]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("constraint-call-violation"), "{out}");
    assert!(out.contains("witness: q(a)"), "{out}");
    assert_eq!(infer("goodcall", &[]).status.code(), Some(0));
}

#[test]
fn verify_sound_on_clean_program() {
    let o = infer("qsort", &["--verify-sound"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("% soundness:"), "{out}");
    assert!(!out.contains("not covered"), "{out}");
}

#[test]
fn check_reports_missing_successes() {
    let spec = scratch("nosu.tg", "ca > app(L, L, any).\nL > nil.\nL > cons(E, L).\nE > a.\nE > b.\n");
    let pl = corpus("append.pl");
    let o = regal(&["check", pl.to_str().unwrap(), "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("not verified\n"), "{out}");
    assert!(out.contains("witness: app("), "{out}");

    let o = regal(&["check", pl.to_str().unwrap(), "--spec", spec.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "not-verified");
    assert_eq!(v["reasons"][0]["condition"], "successes");
}

#[test]
fn check_accepts_inferred_result() {
    let o = infer("append", &[]);
    let spec = scratch("inferred.tg", &stdout(&o));
    let pl = corpus("append.pl");
    let o = regal(&["check", pl.to_str().unwrap(), "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "correct\n");
}

#[test]
fn json_grammar_text_round_trips() {
    let o = infer("nrev", &["--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let text = v["grammar_text"].as_str().unwrap();
    let a = scratch("rt.tg", text);
    let b = corpus("nrev.tg");
    let inc = |x: &PathBuf, y: &PathBuf| {
        regal(&["gram", "includes", x.to_str().unwrap(), y.to_str().unwrap()])
    };
    // the result covers the initial specification
    assert_eq!(inc(&a, &b).status.code(), Some(0));
    let o = regal(&["gram", "restrict", a.to_str().unwrap(), "--widening", "off"]);
    let again = scratch("rt2.tg", &stdout(&o));
    assert_eq!(inc(&a, &again).status.code(), Some(0));
    assert_eq!(inc(&again, &a).status.code(), Some(0));
}

#[test]
fn gram_operations() {
    let a = scratch("a.tg", "ca > p(X). X > a. su > p(X).\n");
    let b = scratch("b.tg", "ca > p(Y). Y > f(Y). Y > a. su > p(Z). Z > b.\n");
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());

    let u = regal(&["gram", "union", a, b]);
    assert_eq!(u.status.code(), Some(0));
    let u = scratch("u.tg", &stdout(&u));
    let u = u.to_str().unwrap();
    assert_eq!(regal(&["gram", "includes", u, a]).status.code(), Some(0));
    assert_eq!(regal(&["gram", "includes", u, b]).status.code(), Some(0));

    let i = regal(&["gram", "intersect", a, b]);
    assert_eq!(i.status.code(), Some(0));
    let out = stdout(&i);
    assert!(out.contains("ca > p("), "{out}");
    assert!(!out.contains("su >"), "{out}");

    let o = regal(&["gram", "includes", a, b]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("false\n"), "{out}");
    assert!(out.contains("% witness: p(f(a))") || out.contains("% witness: p(b)"), "{out}");

    let deep = scratch("deep.tg", "ca > p(X). X > f(Y). Y > f(Z). Z > f(W). W > a.\n");
    let o = regal(&["gram", "restrict", deep.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = scratch("r.tg", &stdout(&o));
    assert_eq!(
        regal(&["gram", "includes", r.to_str().unwrap(), deep.to_str().unwrap()]).status.code(),
        Some(0)
    );
}

#[test]
fn input_errors_exit_two() {
    let o = regal(&["infer", "/nonexistent/x.pl", "--spec", "/nonexistent/x.tg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));

    let bad = scratch("bad.pl", "p(X :- q.\n");
    let tg = corpus("append.tg");
    let o = regal(&["infer", bad.to_str().unwrap(), "--spec", tg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(infer("append", &["--no-such-flag"]).status.code(), Some(2));
    assert_eq!(infer("append", &["--k", "0"]).status.code(), Some(2));
}

#[test]
fn max_iter_cap_is_reported() {
    let o = infer("chain", &["--widening", "off", "--max-iter", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("iteration-cap-reached"));
}

#[test]
fn output_is_deterministic() {
    for name in ["append", "qsort", "path", "badcall"] {
        let a = infer(name, &["--trace", "--format", "json"]);
        let b = infer(name, &["--trace", "--format", "json"]);
        assert_eq!(a.stdout, b.stdout, "{name}");
    }
}
