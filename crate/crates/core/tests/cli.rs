use std::path::Path;

use undominated::cli;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["undominated"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_profile(dir: &Path) -> String {
    let path = dir.join("six.elect");
    std::fs::write(&path, "6 4\n0 2 1 3\n2 0 3 1\n0 2 1 3\n2 3 1 0\n1 3 2 0\n2 3 1 0\n").unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_profile(dir.path());
    let (code, out, _) = run(&["verify", "--committee", "0,2", "--t", "1", "--alpha", "1/2", &path]);
    assert_eq!(code, 0, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["verification"]["pass"], true);
    assert_eq!(report["input_sha256"].as_str().unwrap().len(), 64);

    let (code, out, _) = run(&["verify", "--committee", "3", "--t", "1", "--alpha", "1/2", &path]);
    assert_eq!(code, 1, "{out}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_profile(dir.path());
    assert_eq!(run(&["solve", "--t", "3", "--alpha", "0", &path]).0, 2);
    assert_eq!(run(&["solve", "--t", "9", "--alpha", "1", &path]).0, 2);
    assert_eq!(run(&["gen", "--random", "n=0", "m=3"]).0, 2);
    assert_eq!(run(&["verify", "--committee", "7", "--t", "1", "--alpha", "1/2", &path]).0, 2);
    assert_eq!(run(&["verify", "--committee", "0", "--t", "1", "--alpha", "1/2", "/nonexistent.elect"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
}

#[test]
fn solve_small_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_profile(dir.path());
    let (code, out, err) = run(&["--seed", "4", "solve", "--t", "1", "--alpha", "1/2", &path]);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(report["committee"].as_array().unwrap().len() <= 5);
    assert!(report.get("timing_ms").is_none());
}

#[test]
fn gen_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("adv.elect");
    let (code, _, err) = run(&["gen", "--adversarial", "k=3", "ell=5", "-o", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let e = undominated::Election::read(&path).unwrap();
    assert_eq!((e.n(), e.m()), (20, 20));
}

#[test]
fn tables_csv() {
    let (code, out, _) = run(&["tables", "--which", "alpha_k", "--k-max", "3", "--csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4, "{out}");
    assert!(lines[3].contains("0.6151"));
}
