//! Exit codes, seed resolution, config merging and thread-count independence.

use contact_bench_cli::{run_with_env_seed, Outcome};
use serde_json::Value;

fn run(argv: &[&str], env: Option<&str>) -> Outcome {
    run_with_env_seed(
        std::iter::once("contact-bench").chain(argv.iter().copied()),
        env.map(str::to_string),
    )
}

fn json(out: &Outcome) -> Value {
    assert_eq!(out.code, 0, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("contact-bench-{}-{name}", std::process::id()))
}

#[test]
fn exact_reports_the_oracle_value() {
    let v = json(&run(&["exact", "--graph", "line:2", "--lambda", "2"], None));
    let e = &v["result"]["expected_extinction_time"];
    assert!((e["value"].as_f64().unwrap() - 2.5).abs() < 1e-9);
    assert_eq!(e["uncertainty"], "exact");
    assert_eq!(v["config"]["lambda"], 2.0);
}

#[test]
fn split_sides_clear_the_floor() {
    let path = temp_path("t.edges");
    std::fs::write(&path, "# vertices: 9\n0 1\n1 2\n2 3\n1 4\n4 5\n4 6\n6 7\n6 8\n").unwrap();
    let spec = format!("file:{}", path.display());
    let v = json(&run(&["split", "--graph", &spec, "--degree-bound", "3"], None));
    let sizes = v["result"]["side_sizes"].as_array().unwrap();
    assert!(sizes.iter().all(|s| s.as_u64().unwrap() >= 3), "{sizes:?}");
    std::fs::remove_file(path).ok();
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"], None).code, 0);
    let unknown = run(&["mean-tau", "--graph", "star:4", "--bogus"], None);
    assert_eq!(unknown.code, 2);
    assert!(unknown.stderr.contains("--bogus"));
    assert_eq!(run(&["frobnicate"], None).code, 2);
    assert_eq!(run(&["mean-tau"], None).code, 2);
    assert_eq!(run(&["mean-tau", "--graph", "cycle:4"], None).code, 2);
    assert_eq!(run(&["gen", "--graph", "file:/nonexistent/g.edges"], None).code, 1);
    // Beyond the oracle's capacity is a runtime failure, not a usage error.
    assert_eq!(run(&["exact", "--graph", "line:30"], None).code, 1);
    assert_eq!(run(&["classify", "--graph", "star:5", "--format", "csv"], None).code, 2);
}

#[test]
fn seed_falls_back_to_the_environment_then_zero() {
    let args = ["mean-tau", "--graph", "star:5", "--replicas", "50"];
    let from_env = json(&run(&args, Some("7")));
    assert_eq!(from_env["config"]["seed"], 7);
    assert_eq!(from_env["config"]["seed_source"], "env");
    let default = json(&run(&args, None));
    assert_eq!(default["config"]["seed"], 0);
    assert_eq!(default["config"]["seed_source"], "default");
    let mut flagged = args.to_vec();
    flagged.extend(["--seed", "7"]);
    let flag = json(&run(&flagged, Some("9")));
    assert_eq!(flag["config"]["seed_source"], "flag");
    assert_eq!(flag["result"], from_env["result"]);
    assert_eq!(run(&args, Some("abc")).code, 2);
}

#[test]
fn config_file_fills_unset_flags_only() {
    let path = temp_path("config.json");
    std::fs::write(&path, r#"{"graph": "star:6", "lambda": 1.5, "seed": 3, "replicas": 40, "t-grid": "0:2:1"}"#).unwrap();
    let p = path.to_str().unwrap();
    let v = json(&run(&["coupling", "--config", p, "--lambda", "0.5"], None));
    assert_eq!(v["config"]["graph"], "star:6");
    assert_eq!(v["config"]["lambda"], 0.5);
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["config"]["seed_source"], "config");
    assert_eq!(v["config"]["t_grid"], "0:2:1");
    assert_eq!(v["result"]["curve"].as_array().unwrap().len(), 3);

    std::fs::write(&path, r#"{"graph": "star:6", "budget": 5}"#).unwrap();
    let bad = run(&["coupling", "--config", p], None);
    assert_eq!(bad.code, 2);
    assert!(bad.stderr.contains("budget"));
    std::fs::remove_file(path).ok();
}

#[test]
fn output_does_not_depend_on_jobs() {
    let base = ["mean-tau", "--graph", "tree:9:1", "--replicas", "300", "--seed", "5"];
    let one = run(&[&base[..], &["--jobs", "1"]].concat(), None);
    let four = run(&[&base[..], &["--jobs", "4"]].concat(), None);
    assert_eq!(one.code, 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run(&[&base[..], &["--jobs", "0"]].concat(), None).code, 2);
}

#[test]
fn csv_output_carries_the_config_header() {
    let out = run(&["mean-tau", "--graph", "star:4", "--replicas", "10", "--format", "csv"], None);
    assert_eq!(out.code, 0);
    let mut lines = out.stdout.lines();
    assert_eq!(lines.next(), Some("# command: mean-tau"));
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next(), Some("replica,seed,value,censored"));
    assert_eq!(lines.count(), 10);
}

#[test]
fn gen_csv_round_trips_through_file_specs() {
    let path = temp_path("gen.edges");
    let p = path.to_str().unwrap();
    let out = run(&["gen", "--graph", "tree:11:6", "--format", "csv", "--output", p], None);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let a = json(&run(&["gen", "--graph", "tree:11:6"], None));
    let b = json(&run(&["gen", "--graph", &format!("file:{p}")], None));
    assert_eq!(a["result"]["graph"], b["result"]["graph"]);
    std::fs::remove_file(path).ok();
}

#[test]
fn dual_check_finds_no_failures() {
    let v = json(&run(&["dual-check", "--graph", "tree:7:3", "--fixtures", "300"], None));
    assert_eq!(v["result"]["passed"], true);
}
