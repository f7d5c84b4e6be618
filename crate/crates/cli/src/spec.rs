//! Parsers for the compact graph, grid, start-set and list grammars.

use contact_bench::graphs::{load_edge_list, make_line, make_star, random_tree, Graph, Vertex};
use contact_bench::Configuration;

use crate::CliError;

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("{what}: cannot parse {s:?}")))
}

/// `line:N`, `star:N`, `tree:N:SEED` or `file:PATH`.
pub fn parse_graph(spec: &str) -> Result<Graph, CliError> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| usage(format!("graph spec {spec:?} must look like line:N, star:N, tree:N:SEED or file:PATH")))?;
    match kind {
        "line" => Ok(make_line(parse_num(rest, "line size")?)?),
        "star" => Ok(make_star(parse_num(rest, "star size")?)?),
        "tree" => {
            let (n, seed) = rest
                .split_once(':')
                .ok_or_else(|| usage("tree spec must be tree:N:SEED"))?;
            Ok(random_tree(parse_num(n, "tree size")?, parse_num(seed, "tree seed")?)?)
        }
        "file" => {
            let text = std::fs::read_to_string(rest)
                .map_err(|e| CliError::Runtime(format!("reading {rest}: {e}")))?;
            Ok(load_edge_list(&text)?)
        }
        other => Err(usage(format!("unknown graph kind {other:?}"))),
    }
}

/// `START:STOP:STEP` (inclusive, evenly spaced) or a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let a: f64 = parse_num(parts[0], "grid start")?;
        let b: f64 = parse_num(parts[1], "grid stop")?;
        let step: f64 = parse_num(parts[2], "grid step")?;
        if !(step > 0.0) || b < a {
            return Err(usage("grid needs START <= STOP and STEP > 0"));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        if count > 1_000_000 {
            return Err(usage("grid has more than a million points"));
        }
        return Ok((0..=count).map(|k| a + k as f64 * step).collect());
    }
    if parts.len() != 1 {
        return Err(usage(format!("grid {spec:?} must be START:STOP:STEP or a comma list")));
    }
    spec.split(',').map(|t| parse_num(t, "grid point")).collect()
}

/// `full`, `empty` or a comma list of vertices.
pub fn parse_start(spec: &str, n: usize) -> Result<Configuration, CliError> {
    match spec.trim() {
        "full" => Ok(Configuration::full(n)),
        "empty" => Ok(Configuration::empty(n)),
        list => {
            let vs = parse_list::<Vertex>(list, "start vertex")?;
            Configuration::from_vertices(n, vs).map_err(|e| usage(e.to_string()))
        }
    }
}

pub fn parse_list<T: std::str::FromStr>(spec: &str, what: &str) -> Result<Vec<T>, CliError> {
    spec.split(',').map(|t| parse_num(t, what)).collect()
}

/// Comma lists separated by `/`, e.g. `0,1,2/3,4`.
pub fn parse_parts(spec: &str) -> Result<Vec<Vec<Vertex>>, CliError> {
    spec.split('/').map(|p| parse_list(p, "part vertex")).collect()
}
