//! End-to-end runs of the command-line front end through `nahmkit::cli::run`.

use nahmkit::cli::run;

fn example(name: &str, extra: &[&str]) -> String {
    let mut argv = vec!["nahmkit", "examples", name];
    argv.extend_from_slice(extra);
    let out = run(argv);
    assert_eq!(out.code, 0, "{}", out.stderr);
    out.stdout
}

fn scratch(name: &str, contents: &str) -> String {
    let path = std::env::temp_dir().join(format!("nahmkit-cli-{}-{name}.json", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn list_names_every_example() {
    let out = run(["nahmkit", "examples", "list"]);
    assert_eq!(out.code, 0);
    for name in ["tame-rank1", "pushforward", "trivial", "line-bundle", "mixed"] {
        assert!(out.stdout.contains(name), "{name} missing from {}", out.stdout);
    }
}

#[test]
fn line_bundle_fails_a3() {
    let path = scratch("line-bundle", &example("line-bundle", &[]));
    let out = run(["nahmkit", "check", &path]);
    assert_eq!(out.code, 1, "{}", out.stderr);
    assert!(out.stdout.contains("A3"), "{}", out.stdout);
}

#[test]
fn trivial_fails_a0() {
    let path = scratch("trivial", &example("trivial", &[]));
    let out = run(["nahmkit", "--format", "json", "check", &path]);
    assert_eq!(out.code, 1, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert!(v.to_string().contains("A0"), "{v}");
}

#[test]
fn forward_transform_of_tame_rank_one() {
    let path = scratch("tame", &example("tame-rank1", &[]));
    let out = run(["nahmkit", "transform", &path, "--direction", "forward"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("rank 1"), "{}", out.stdout);
}

#[test]
fn pushforward_roundtrip_passes() {
    let path = scratch("push21", &example("pushforward", &["--p", "2", "--order", "1"]));
    let out = run(["nahmkit", "roundtrip", &path]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
}

#[test]
fn oracle_suite_agrees() {
    let out = run(["nahmkit", "--precision", "16", "oracle"]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
}

#[test]
fn input_errors_exit_with_two() {
    let path = scratch("malformed", "{\"field\": 3}");
    assert_eq!(run(["nahmkit", "check", &path]).code, 2);
    assert_eq!(run(["nahmkit", "check", "/nonexistent/doc.json"]).code, 2);
    assert_eq!(run(["nahmkit", "examples", "nope"]).code, 2);
    assert_eq!(run(["nahmkit", "frobnicate"]).code, 2);
    let tame = scratch("tame-field", &example("tame-rank1", &[]));
    assert_eq!(run(["nahmkit", "--field", "5,1", "check", &tame]).code, 2);
}

#[test]
fn tiny_precision_is_rejected() {
    assert_eq!(run(["nahmkit", "--precision", "1", "oracle"]).code, 2);
}
