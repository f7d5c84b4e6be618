use contact_bench_web::{exact_mean_json, parse_graph, split_json, trajectory_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn graph_specs() {
    assert_eq!(parse_graph("line:4").unwrap().n_edges(), 3);
    assert_eq!(parse_graph("tree:7:2").unwrap().n_vertices(), 7);
    assert!(parse_graph("file:x").is_err());
    assert!(parse_graph("star:1").is_err());
}

#[test]
fn trajectory_starts_full_and_is_reproducible() {
    let a = trajectory_json("star:6", 1.0, 3, 5.0, 10).unwrap();
    assert_eq!(a, trajectory_json("star:6", 1.0, 3, 5.0, 10).unwrap());
    let v = parse(&a);
    assert_eq!(v["times"].as_array().unwrap().len(), 11);
    assert_eq!(v["infected"][0].as_array().unwrap().len(), 6);
    assert!(trajectory_json("line:500", 1.0, 0, 1.0, 1).is_err());
    assert!(trajectory_json("line:5", 1.0, 0, 0.0, 1).is_err());
}

#[test]
fn exact_mean_of_an_edge() {
    let v = parse(&exact_mean_json("line:2", 2.0).unwrap());
    assert!((v["expected_extinction_time"].as_f64().unwrap() - 2.5).abs() < 1e-9);
    assert!(exact_mean_json("line:15", 1.0).is_err());
}

#[test]
fn split_sides_partition_the_tree() {
    let v = parse(&split_json("tree:20:4", 5).unwrap());
    let a = v["side_a"].as_array().unwrap().len();
    let b = v["side_b"].as_array().unwrap().len();
    assert_eq!(a + b, 20);
    assert!(a.min(b) >= 20 / 5);
    assert!(split_json("line:4", 1).is_err());
}
