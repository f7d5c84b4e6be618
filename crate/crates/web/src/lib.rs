//! Browser bindings. Each export takes plain numbers and a graph spec
//! (`line:N`, `star:N`, `tree:N:SEED`) and returns a JSON string; errors
//! surface as thrown strings.

use contact_bench::graphs::{centroid_vertex, make_line, make_star, random_tree, split_edge_balanced, Graph};
use contact_bench::oracle::{exact_expected_extinction, MAX_EXPECTATION_VERTICES};
use contact_bench::process::simulate;
use contact_bench::Configuration;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest graph the trajectory view will draw.
pub const MAX_DRAW_VERTICES: usize = 200;

fn num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse {s:?}"))
}

pub fn parse_graph(spec: &str) -> Result<Graph, String> {
    let parts: Vec<&str> = spec.trim().split(':').collect();
    let g = match parts.as_slice() {
        ["line", n] => make_line(num(n)?),
        ["star", n] => make_star(num(n)?),
        ["tree", n, seed] => random_tree(num(n)?, num(seed)?),
        _ => return Err(format!("graph spec {spec:?} must be line:N, star:N or tree:N:SEED")),
    };
    g.map_err(|e| e.to_string())
}

/// Infected sets on an evenly spaced grid over `[0, t_max]`, from full occupancy.
pub fn trajectory_json(spec: &str, lambda: f64, seed: u64, t_max: f64, steps: usize) -> Result<String, String> {
    let g = parse_graph(spec)?;
    let n = g.n_vertices();
    if n > MAX_DRAW_VERTICES {
        return Err(format!("at most {MAX_DRAW_VERTICES} vertices can be drawn, got {n}"));
    }
    if !(t_max > 0.0) || steps == 0 {
        return Err("need t_max > 0 and at least one step".into());
    }
    let grid: Vec<f64> = (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect();
    let tr = simulate(&g, lambda, &Configuration::full(n), &grid, seed).map_err(|e| e.to_string())?;
    let infected: Vec<Vec<usize>> = tr.checkpoints.iter().map(|(_, c)| c.iter().collect()).collect();
    Ok(json!({
        "n": n,
        "edges": g.edges(),
        "times": grid,
        "infected": infected,
        "extinction_time": tr.extinction_time,
    })
    .to_string())
}

/// Exact mean extinction time from full occupancy.
pub fn exact_mean_json(spec: &str, lambda: f64) -> Result<String, String> {
    let g = parse_graph(spec)?;
    if g.n_vertices() > MAX_EXPECTATION_VERTICES {
        return Err(format!("the exact solver handles at most {MAX_EXPECTATION_VERTICES} vertices"));
    }
    let mean = exact_expected_extinction(&g, lambda).map_err(|e| e.to_string())?;
    Ok(json!({ "n": g.n_vertices(), "lambda": lambda, "expected_extinction_time": mean }).to_string())
}

/// Balanced edge split for the given degree bound, plus the centroid.
pub fn split_json(spec: &str, degree_bound: usize) -> Result<String, String> {
    let g = parse_graph(spec)?;
    let split = split_edge_balanced(&g, degree_bound).map_err(|e| e.to_string())?;
    let centroid = centroid_vertex(&g).map_err(|e| e.to_string())?;
    Ok(json!({
        "n": g.n_vertices(),
        "edges": g.edges(),
        "removed_edge": split.removed_edge,
        "side_a": split.side_a,
        "side_b": split.side_b,
        "centroid": centroid,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn trajectory(spec: &str, lambda: f64, seed: u32, t_max: f64, steps: u32) -> Result<String, JsValue> {
    trajectory_json(spec, lambda, u64::from(seed), t_max, steps as usize).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn exact_mean(spec: &str, lambda: f64) -> Result<String, JsValue> {
    exact_mean_json(spec, lambda).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn split(spec: &str, degree_bound: u32) -> Result<String, JsValue> {
    split_json(spec, degree_bound as usize).map_err(JsValue::from)
}
