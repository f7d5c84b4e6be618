use std::fmt::Write as _;

use contact_bench::experiments::{
    calibrate_constants, check_attract_bound, check_attract_bound_mc, check_product_bound,
    coupling_decay_curve, estimate_mean_extinction, exp1_test_with, growth_curve,
    survival_floor_check, BoundCheck, Family,
};
use contact_bench::graphs::{
    centroid_vertex, classify_tree, iterated_split, save_edge_list, split_edge_balanced, ClassifyMode, Graph,
};
use contact_bench::oracle::{exact_cdf_extinction, exact_expected_extinction, exact_transient_survival};
use contact_bench::process::simulate;
use contact_bench::replicas::replica_seed;
use contact_bench::{Configuration, Constants, HarrisSystem, Provenance, SpaceTimePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::{merge_config, BoundKind, Cli, Command, FamilyArg, Format, Mode};
use crate::spec::{parse_graph, parse_grid, parse_list, parse_parts, parse_start};
use crate::{CliError, SEED_ENV};

pub struct Output {
    pub stdout: String,
    pub stderr: String,
}

/// What a command produced: the JSON result, an optional CSV rendering, and
/// the resolved command-specific parameters to echo.
struct Rendered {
    result: Value,
    csv: Option<String>,
    params: Map<String, Value>,
}

impl Rendered {
    fn json(result: Value) -> Self {
        Rendered {
            result,
            csv: None,
            params: Map::new(),
        }
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params
            .insert(key.to_string(), serde_json::to_value(value).expect("parameters serialize"));
        self
    }
}

struct Ctx {
    graph: Option<(String, Graph)>,
    lambda: f64,
    seed: u64,
    replicas: Option<usize>,
    time_cap: f64,
    constants: Constants,
}

const DEFAULT_LAMBDA: f64 = 2.0;
const DEFAULT_TIME_CAP: f64 = 1e6;

impl Ctx {
    fn graph(&self, command: &str) -> Result<&Graph, CliError> {
        self.graph
            .as_ref()
            .map(|(_, g)| g)
            .ok_or_else(|| CliError::Usage(format!("`{command}` needs --graph")))
    }

    fn replicas(&self, default: usize) -> usize {
        self.replicas.unwrap_or(default)
    }
}

fn to_json(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn exact(value: f64) -> Value {
    json!({ "value": value, "uncertainty": "exact" })
}

pub fn execute(cli: Cli, env_seed: Option<String>) -> Result<Output, CliError> {
    let flag_seed = cli.common.seed.is_some();
    let cli = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Runtime(format!("reading {}: {e}", path.display())))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))?;
            merge_config(cli, &value)?
        }
        None => cli,
    };
    let common = &cli.common;
    let (seed, seed_source) = match (common.seed, env_seed) {
        (Some(s), _) => (s, if flag_seed { "flag" } else { "config" }),
        (None, Some(text)) => (
            text.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}={text:?} is not an unsigned integer")))?,
            "env",
        ),
        (None, None) => (0, "default"),
    };
    let lambda = common.lambda.unwrap_or(DEFAULT_LAMBDA);
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CliError::Usage(format!("--lambda must be positive, got {lambda}")));
    }
    let defaults = Constants::default();
    let overridden = [common.c_line, common.c_star, common.c_coup, common.c_split, common.c_eps]
        .iter()
        .any(Option::is_some);
    let constants = Constants::derived(
        common.c_line.unwrap_or(defaults.c_line),
        common.c_star.unwrap_or(defaults.c_star),
        common.c_coup.unwrap_or(defaults.c_coup),
        common.c_split.unwrap_or(defaults.c_split),
        common.c_eps.unwrap_or(defaults.c_eps),
        if overridden { Provenance::User } else { Provenance::Default },
    );
    constants.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let graph = match &common.graph {
        Some(spec) => Some((spec.clone(), parse_graph(spec)?)),
        None => None,
    };
    let ctx = Ctx {
        graph,
        lambda,
        seed,
        replicas: common.replicas,
        time_cap: common.time_cap.unwrap_or(DEFAULT_TIME_CAP),
        constants,
    };
    let rendered = match common.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(|| dispatch(&cli.command, &ctx))?,
        None => dispatch(&cli.command, &ctx)?,
    };

    let mut config = Map::new();
    if let Some((spec, g)) = &ctx.graph {
        config.insert("graph".into(), json!(spec));
        config.insert("n_vertices".into(), json!(g.n_vertices()));
        config.insert("n_edges".into(), json!(g.n_edges()));
    }
    config.insert("lambda".into(), json!(ctx.lambda));
    config.insert("seed".into(), json!(ctx.seed));
    config.insert("seed_source".into(), json!(seed_source));
    config.insert("time_cap".into(), json!(ctx.time_cap));
    config.insert("constants".into(), to_json(&ctx.constants));
    config.extend(rendered.params);
    let name = cli.command.name();
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => {
            let doc = json!({ "command": name, "config": config, "result": rendered.result });
            let mut s = serde_json::to_string_pretty(&doc).expect("output serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let body = rendered
                .csv
                .ok_or_else(|| CliError::Usage(format!("`{name}` has no CSV output; use --format json")))?;
            let mut s = String::new();
            writeln!(s, "# command: {name}").ok();
            writeln!(s, "# config: {}", Value::Object(config)).ok();
            s.push_str(&body);
            s
        }
    };
    match &common.output {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
            Ok(Output {
                stdout: String::new(),
                stderr: format!("wrote {}\n", path.display()),
            })
        }
        None => Ok(Output {
            stdout: text,
            stderr: String::new(),
        }),
    }
}

fn dispatch(command: &Command, ctx: &Ctx) -> Result<Rendered, CliError> {
    let name = command.name();
    match command {
        Command::Gen(_) => {
            let g = ctx.graph(name)?;
            Ok(Rendered::json(json!({ "graph": g, "uncertainty": "exact" })).with_csv(save_edge_list(g)))
        }
        Command::Simulate(a) => {
            let g = ctx.graph(name)?;
            let start_spec = a.start.as_deref().unwrap_or("full");
            let grid_spec = a.t_grid.as_deref().unwrap_or("0:10:1");
            let start = parse_start(start_spec, g.n_vertices())?;
            let grid = parse_grid(grid_spec)?;
            let tr = simulate(g, ctx.lambda, &start, &grid, ctx.seed)?;
            let mut r = Rendered::json(json!({ "trajectory": tr, "uncertainty": "exact" }))
                .param("start", start_spec)
                .param("t_grid", grid_spec);
            if g.n_vertices() <= 64 {
                r = r.with_csv(tr.to_csv()?);
            }
            Ok(r)
        }
        Command::MeanTau(_) => {
            let g = ctx.graph(name)?;
            let replicas = ctx.replicas(1000);
            let m = estimate_mean_extinction(g, ctx.lambda, replicas, ctx.time_cap, ctx.seed)?;
            Ok(Rendered::json(json!({ "report": m.report }))
                .with_csv(m.samples_csv())
                .param("replicas", replicas))
        }
        Command::Exact(a) => {
            let g = ctx.graph(name)?;
            let tol = a.tol.unwrap_or(1e-10);
            let (n, m) = (g.n_vertices() as f64, g.n_edges() as f64);
            let mut result = Map::new();
            result.insert(
                "expected_extinction_time".into(),
                exact(exact_expected_extinction(g, ctx.lambda)?),
            );
            result.insert("crude_upper_bound".into(), exact((n + 2.0 * ctx.lambda * m).exp()));
            let mut r_params = Rendered::json(Value::Null).param("tol", tol);
            let mut csv = None;
            if let Some(spec) = &a.t_grid {
                let grid = parse_grid(spec)?;
                let cdf = exact_cdf_extinction(g, ctx.lambda, &grid, tol)?;
                let mut rows = String::from("t,cdf\n");
                let points: Vec<Value> = grid
                    .iter()
                    .zip(&cdf)
                    .map(|(t, p)| {
                        writeln!(rows, "{t},{p}").ok();
                        json!({ "t": t, "p": p })
                    })
                    .collect();
                result.insert(
                    "extinction_cdf".into(),
                    json!({ "points": points, "uncertainty": "exact", "truncation_error_below": tol }),
                );
                csv = Some(rows);
                r_params = r_params.param("t_grid", spec);
            }
            if let Some(t) = a.t {
                let start_spec = a.start.as_deref().unwrap_or("full");
                let start = parse_start(start_spec, g.n_vertices())?;
                let p = exact_transient_survival(g, ctx.lambda, &start, t, tol)?;
                result.insert(
                    "survival".into(),
                    json!({ "t": t, "value": p, "uncertainty": "exact", "truncation_error_below": tol }),
                );
                r_params = r_params.param("t", t).param("start", start_spec);
            }
            r_params.result = Value::Object(result);
            r_params.csv = csv;
            Ok(r_params)
        }
        Command::Exp1(a) => {
            let alpha = a.alpha.unwrap_or(0.01);
            let resamples = a.resamples.unwrap_or(contact_bench::experiments::DEFAULT_RESAMPLES);
            let (samples, source) = match &a.samples_file {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError::Runtime(format!("reading {}: {e}", path.display())))?;
                    (read_samples(&text)?, json!({ "file": path }))
                }
                None => {
                    let g = ctx.graph(name)?;
                    let replicas = ctx.replicas(1000);
                    let m = estimate_mean_extinction(g, ctx.lambda, replicas, ctx.time_cap, ctx.seed)?;
                    (m.values(), json!({ "replicas": replicas, "censored": m.report.censored, "report": m.report }))
                }
            };
            let test = exp1_test_with(&samples, alpha, resamples, ctx.seed)?;
            Ok(Rendered::json(json!({ "test": test, "samples": source, "uncertainty": "bootstrap threshold" }))
                .param("alpha", alpha)
                .param("resamples", resamples))
        }
        Command::Coupling(a) => {
            let g = ctx.graph(name)?;
            let start_spec = a.start.as_deref().unwrap_or("0");
            let grid_spec = a.t_grid.as_deref().unwrap_or("0:20:1");
            let start = parse_start(start_spec, g.n_vertices())?;
            let grid = parse_grid(grid_spec)?;
            let replicas = ctx.replicas(1000);
            let curve = coupling_decay_curve(g, ctx.lambda, &start, &grid, replicas, ctx.seed)?;
            let mut csv = String::from("t,decoupled_probability,se,lower,upper\n");
            for (t, r) in grid.iter().zip(&curve) {
                let (lo, hi) = r.interval.unwrap_or((f64::NAN, f64::NAN));
                writeln!(csv, "{t},{},{},{lo},{hi}", r.estimate.unwrap_or(f64::NAN), r.se.unwrap_or(f64::NAN)).ok();
            }
            Ok(Rendered::json(json!({ "curve": curve }))
                .with_csv(csv)
                .param("start", start_spec)
                .param("t_grid", grid_spec)
                .param("replicas", replicas))
        }
        Command::Split(a) => {
            let g = ctx.graph(name)?;
            let centroid = centroid_vertex(g)?;
            if let Some(k) = a.parts {
                let min_size = a.min_size.unwrap_or(1);
                let d = a.degree_bound.unwrap_or(g.max_degree());
                let parts = iterated_split(g, k, min_size, d)?;
                let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
                return Ok(Rendered::json(json!({
                    "parts": parts, "sizes": sizes, "centroid": centroid, "uncertainty": "exact"
                }))
                .param("parts", k)
                .param("min_size", min_size)
                .param("degree_bound", d));
            }
            let d = a.degree_bound.unwrap_or(g.max_degree().max(2));
            let split = split_edge_balanced(g, d)?;
            let sizes = [split.side_a.len(), split.side_b.len()];
            Ok(Rendered::json(json!({
                "split": split,
                "side_sizes": sizes,
                "guaranteed_min_side": g.n_vertices() / d,
                "centroid": centroid,
                "uncertainty": "exact"
            }))
            .param("degree_bound", d))
        }
        Command::Classify(a) => {
            let g = ctx.graph(name)?;
            let mode = a.mode.unwrap_or(Mode::Level4);
            let a_const = a.a_const.unwrap_or(1.0);
            let eps = a.eps.unwrap_or(0.1);
            let core_mode = match mode {
                Mode::Level3 => ClassifyMode::Level3,
                Mode::Level4 => ClassifyMode::Level4,
            };
            let d = classify_tree(g, a_const, eps, core_mode)?;
            Ok(Rendered::json(json!({ "decomposition": d, "uncertainty": "exact" }))
                .param("mode", mode)
                .param("a_const", a_const)
                .param("eps", eps))
        }
        Command::Bounds(a) => bounds(a, ctx, name),
        Command::Growth(a) => {
            let family = match a.family.unwrap_or(FamilyArg::Line) {
                FamilyArg::Line => Family::Line,
                FamilyArg::Star => Family::Star,
                FamilyArg::RandomTree => Family::RandomTree,
            };
            let sizes_spec = a.sizes.as_deref().unwrap_or("4,6,8,10,12,14");
            let sizes: Vec<usize> = parse_list(sizes_spec, "size")?;
            let replicas = ctx.replicas(1000);
            let curve = growth_curve(family, &sizes, ctx.lambda, replicas, ctx.time_cap, ctx.seed)?;
            let mut csv = String::from("size,estimate,se,replicas,censored\n");
            for r in &curve.rows {
                writeln!(
                    csv,
                    "{},{},{},{},{}",
                    r.size,
                    r.report.estimate.unwrap_or(f64::NAN),
                    r.report.se.unwrap_or(f64::NAN),
                    r.report.replicas,
                    r.report.censored
                )
                .ok();
            }
            Ok(Rendered::json(json!({ "growth": curve }))
                .with_csv(csv)
                .param("family", family)
                .param("sizes", sizes)
                .param("replicas", replicas))
        }
        Command::Calibrate(a) => {
            let budget = a.budget.unwrap_or(20_000);
            let cal = calibrate_constants(ctx.lambda, budget, ctx.seed)?;
            let mut csv = String::from("family,size,c,quantity,estimate,limit,target,passed,replicas,seed\n");
            for p in &cal.probes {
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{},{}",
                    p.family, p.size, p.c, p.quantity, p.estimate, p.limit, p.target, p.passed, p.replicas, p.seed
                )
                .ok();
            }
            let stderr_warnings = cal.warnings.clone();
            let mut r = Rendered::json(json!({ "calibration": cal, "uncertainty": "95% limits per probe" }))
                .with_csv(csv)
                .param("budget", budget);
            if !stderr_warnings.is_empty() {
                r = r.param("warnings", stderr_warnings);
            }
            Ok(r)
        }
        Command::DualCheck(a) => {
            let g = ctx.graph(name)?;
            let fixtures = a.fixtures.unwrap_or(1000);
            let horizon = a.horizon.unwrap_or(3.0);
            if !(horizon > 0.0) {
                return Err(CliError::Usage("--horizon must be positive".into()));
            }
            let (dual, paths) = dual_check(g, ctx.lambda, fixtures, horizon, ctx.seed)?;
            Ok(Rendered::json(json!({
                "fixtures": fixtures,
                "duality_failures": dual,
                "path_failures": paths,
                "passed": dual == 0 && paths == 0,
                "uncertainty": "exact"
            }))
            .param("fixtures", fixtures)
            .param("horizon", horizon))
        }
    }
}

fn bounds(a: &crate::args::BoundsArgs, ctx: &Ctx, name: &str) -> Result<Rendered, CliError> {
    let g = ctx.graph(name)?;
    let kind = a.kind.unwrap_or(BoundKind::Attract);
    let (checks, r): (Vec<BoundCheck>, Rendered) = match kind {
        BoundKind::Attract => {
            let grid_spec = a.t_grid.as_deref().unwrap_or("0:20:0.5");
            let grid = parse_grid(grid_spec)?;
            let replicas = ctx.replicas(10_000);
            let checks = if a.mc {
                check_attract_bound_mc(g, ctx.lambda, &grid, replicas, ctx.seed, ctx.time_cap)?
            } else {
                check_attract_bound(g, ctx.lambda, &grid, replicas, ctx.seed)?
            };
            let r = Rendered::json(Value::Null)
                .param("t_grid", grid_spec)
                .param("mc", a.mc)
                .param("replicas", replicas);
            (checks, r)
        }
        BoundKind::Product => {
            let parts = match &a.parts {
                Some(spec) => parse_parts(spec)?,
                None => iterated_split(g, 2, 1, g.max_degree())?,
            };
            let replicas = ctx.replicas(1000);
            let checks = check_product_bound(
                g,
                &parts,
                ctx.lambda,
                replicas,
                ctx.time_cap,
                ctx.seed,
                ctx.constants.c_split,
            )?;
            (checks, Rendered::json(Value::Null).param("parts", parts).param("replicas", replicas))
        }
        BoundKind::Floor => {
            let eps = a.eps.unwrap_or(0.5);
            let replicas = ctx.replicas(1000);
            let check = survival_floor_check(g, ctx.lambda, eps, ctx.constants.c_eps, replicas, ctx.seed)?;
            (vec![check], Rendered::json(Value::Null).param("eps", eps).param("replicas", replicas))
        }
    };
    let mut csv = String::from("name,lhs,lhs_se,relation,rhs,margin,verdict\n");
    for c in &checks {
        let relation = to_json(&c.relation);
        let verdict = to_json(&c.verdict);
        writeln!(
            csv,
            "\"{}\",{},{},{},{},{},{}",
            c.name,
            c.lhs,
            c.lhs_se.map_or("exact".to_string(), |s| s.to_string()),
            relation.as_str().unwrap_or(""),
            c.rhs,
            c.margin,
            verdict.as_str().unwrap_or("")
        )
        .ok();
    }
    let mut r = r.param("kind", kind).with_csv(csv);
    r.result = json!({ "checks": checks });
    Ok(r)
}

/// Counts duality and path-search disagreements on random fixtures.
fn dual_check(g: &Graph, lambda: f64, fixtures: usize, horizon: f64, seed: u64) -> Result<(usize, usize), CliError> {
    let n = g.n_vertices();
    if n == 0 {
        return Err(CliError::Usage("graph has no vertices".into()));
    }
    let (mut dual_failures, mut path_failures) = (0, 0);
    for i in 0..fixtures {
        let s = replica_seed(seed, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let h = HarrisSystem::sample(g, lambda, horizon, s)?;
        let a = Configuration::from_vertices(n, (0..n).filter(|_| rng.random_bool(0.4)))?;
        let x = rng.random_range(0..n);
        let t = rng.random_range(0.0..horizon);
        let forward = h.evolve(&a, 0.0, t)?.contains(x);
        let dual = h.dual_evolve(SpaceTimePoint::new(x, t), t)?;
        if forward != a.intersects(&dual) {
            dual_failures += 1;
        }
        let y = rng.random_range(0..n);
        let reached = h.evolve(&Configuration::from_vertices(n, [y])?, 0.0, t)?;
        for z in 0..n {
            if reached.contains(z) != h.reaches(SpaceTimePoint::new(y, 0.0), SpaceTimePoint::new(z, t), None)? {
                path_failures += 1;
            }
        }
    }
    Ok((dual_failures, path_failures))
}

/// Uncensored values from a replica CSV, or one number per line.
fn read_samples(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("replica") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = || CliError::Usage(format!("samples line {}: cannot parse {line:?}", i + 1));
        match fields.as_slice() {
            [v] => out.push(v.trim().parse().map_err(|_| bad())?),
            [_, _, v, c] => {
                if c.trim() == "0" {
                    out.push(v.trim().parse().map_err(|_| bad())?);
                }
            }
            _ => return Err(bad()),
        }
    }
    Ok(out)
}
