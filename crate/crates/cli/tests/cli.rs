use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_entroproof"));
    c.env_remove("ENTROPROOF_MAX_N");
    c
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("entroproof-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn prove_four_variable_example() {
    let o = run(&["prove", &path("markov_four.ep")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().last().unwrap(), "F1 = C1 + C3 + C8");
    assert!(out.contains("C8 = s_1231 - s_2234 + s_1131 >= 0    from I(X1;X3)"));
}

#[test]
fn stats_precede_proof() {
    let o = run(&["prove", "--stats", "--check", &path("markov_four.ep")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let stats = out.find("P1 direct LP: 15, 6, 28").unwrap();
    let p3 = out.find("P3 coefficient LP: 2, 0, 6").unwrap();
    let proof = out.find("Proved:").unwrap();
    assert!(stats < proof && p3 < proof);
    assert!(out.contains("check: direct LP agrees"));
}

#[test]
fn prove_identity_example() {
    let o = run(&["prove", "--check", &path("identity_three.ep")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("remainder of F under B is 0"));
}

#[test]
fn not_provable_exit_code() {
    let o = run(&["prove", "--check", &path("mi_vs_entropy.ep")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("not implied by the given constraints and the elemental inequalities")
    );
}

#[test]
fn data_processing_from_stdin() {
    let text = std::fs::read_to_string(data("data_processing.ep")).unwrap();
    let mut child = bin()
        .args(["prove", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(text.as_bytes())
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn parse_and_usage_errors() {
    let bad = tmp("bad.ep");
    std::fs::write(&bad, "vars X\nprove H(Y) >= 0\n").unwrap();
    let o = run(&["prove", &bad.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:9"));

    assert_eq!(
        run(&["prove", "/nonexistent/file.ep"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["--max-n", "17", "elemental", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["--max-n", "3", "prove", &path("markov_four.ep")])
            .status
            .code(),
        Some(2)
    );
    let o = bin()
        .env("ENTROPROOF_MAX_N", "3")
        .args(["prove", &path("markov_four.ep")])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_round_trip_and_tampering() {
    let cert = tmp("four.json");
    let o = run(&[
        "prove",
        &path("markov_four.ep"),
        "--cert-out",
        &cert.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let c = cert.to_string_lossy().into_owned();

    let o = run(&["verify", &path("markov_four.ep"), "--cert", &c]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    doc["conic"][0] = "-1".into();
    let bad = tmp("four-bad.json");
    std::fs::write(&bad, doc.to_string()).unwrap();
    let o = run(&[
        "verify",
        &path("markov_four.ep"),
        "--cert",
        &bad.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[negative-coefficient]"));

    let o = run(&["verify", &path("identity_three.ep"), "--cert", &c]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[universe-mismatch]"));

    let garbage = tmp("garbage.json");
    std::fs::write(&garbage, "not json").unwrap();
    let o = run(&[
        "verify",
        &path("markov_four.ep"),
        "--cert",
        &garbage.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[malformed]"));
}

#[test]
fn json_prove_output_is_accepted_by_verify() {
    let o = run(&["--format", "json", "prove", &path("identity_three.ep")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "proved");
    let f = tmp("identity-out.json");
    std::fs::write(&f, stdout(&o)).unwrap();
    let o = run(&[
        "verify",
        &path("identity_three.ep"),
        "--cert",
        &f.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn simplify_outputs() {
    let o = run(&["simplify", &path("markov_constraints.ep")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("S_r' (10 inequalities):"));
    assert!(out.contains("  s_4444 = 0"));

    let plain = tmp("plain.ep");
    std::fs::write(&plain, "vars A, B, C\n").unwrap();
    let out = stdout(&run(&["simplify", &plain.to_string_lossy()]));
    assert!(out.contains("S_r' (9 inequalities):"));
    assert!(out.contains("implied equalities E~ (0 rows"));

    let zero = tmp("zero.ep");
    std::fs::write(&zero, "vars A, B\ngiven H(A,B) = 0\n").unwrap();
    let out = stdout(&run(&["simplify", &zero.to_string_lossy()]));
    assert!(out.contains("S_r' (0 inequalities):"));
    assert!(out.contains("implied equalities E~ (2 rows"));
}

#[test]
fn elemental_listing() {
    for (n, m) in [("3", 9), ("4", 28)] {
        let o = run(&["elemental", n]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).lines().count(), m);
    }
    assert_eq!(run(&["elemental", "0"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let a = stdout(&run(&[
        "--format",
        "json",
        "prove",
        &path("markov_four.ep"),
    ]));
    let b = stdout(&run(&[
        "--format",
        "json",
        "prove",
        &path("markov_four.ep"),
    ]));
    assert_eq!(a, b);
}
