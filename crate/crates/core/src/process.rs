//! Contact-process runs read off the graphical construction: extinction
//! times, coupled runs from several initial sets, survival and lit-state
//! estimates, and the right edge on a segment.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{make_line, Graph, Vertex};
use crate::harris::{apply_forward, Clock, Configuration, EventCursor, HarrisSystem};
use crate::replicas::map_replicas;
use crate::report::{ConfigEcho, ExperimentReport};

/// Default infection rate, above the critical value on the integers.
pub const DEFAULT_LAMBDA: f64 = 2.0;

fn check_rate(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("infection rate must be positive, got {lambda}")))
    }
}

fn check_start(g: &Graph, start: &Configuration) -> Result<()> {
    if start.n_vertices() == g.n_vertices() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "configuration over {} vertices used on a graph with {}",
            start.n_vertices(),
            g.n_vertices()
        )))
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::Parameter("time grid entries must be finite and >= 0".into()));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Parameter("time grid must be nondecreasing".into()));
    }
    Ok(())
}

/// Extinction time of the process started from every vertex infected, or
/// `None` if it survives past `time_cap`.
///
/// Streams events straight from the per-clock generators, so memory stays
/// proportional to the number of clocks however long the run; the result is
/// the one [`extinction_time_by_doubling`] reads off a materialized system.
pub fn extinction_time(g: &Graph, lambda: f64, seed: u64, time_cap: f64) -> Result<Option<f64>> {
    check_rate(lambda)?;
    if g.n_vertices() == 0 {
        return Err(Error::InvalidSize {
            what: "graph",
            got: 0,
        });
    }
    if !(time_cap > 0.0) {
        return Err(Error::Parameter("time cap must be positive".into()));
    }
    let mut state = Configuration::full(g.n_vertices());
    let mut alive = g.n_vertices();
    let mut cursor = EventCursor::new(g, lambda, seed);
    while let Some((index, time)) = cursor.next_indexed() {
        if time > time_cap {
            return Ok(None);
        }
        match cursor.clock(index) {
            Clock::Recovery(v) => {
                if state.remove(v) {
                    alive -= 1;
                    if alive == 0 {
                        return Ok(Some(time));
                    }
                }
            }
            Clock::Transmission { from, to } => {
                if state.contains(from) && state.insert(to) {
                    alive += 1;
                }
            }
        }
    }
    Err(Error::Defect("event stream ended".into()))
}

/// Extinction time computed on a materialized Harris system whose horizon
/// starts at `initial_horizon` (default `max(1, n)`) and doubles until
/// extinction or the cap.
pub fn extinction_time_by_doubling(
    g: &Graph,
    lambda: f64,
    seed: u64,
    time_cap: f64,
    initial_horizon: Option<f64>,
) -> Result<Option<f64>> {
    let first = initial_horizon.unwrap_or_else(|| (g.n_vertices() as f64).max(1.0));
    if !(first > 0.0) {
        return Err(Error::Parameter("initial horizon must be positive".into()));
    }
    let mut h = HarrisSystem::sample(g, lambda, first.min(time_cap), seed)?;
    let mut state = Configuration::full(g.n_vertices());
    let mut done = 0.0;
    loop {
        for e in h.events_in(done, h.horizon()) {
            apply_forward(&mut state, e.clock);
            if state.is_empty() {
                return Ok(Some(e.time));
            }
        }
        if h.horizon() >= time_cap {
            return Ok(None);
        }
        done = h.horizon();
        h.extend_in_place((2.0 * done).min(time_cap))?;
    }
}

/// One realization sampled at checkpoint times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: u64,
    pub checkpoints: Vec<(f64, Configuration)>,
    pub extinction_time: Option<f64>,
}

impl Trajectory {
    /// CSV `time,infected_count,infected_bitmask_hex`; graphs with at most 64
    /// vertices only.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::from("time,infected_count,infected_bitmask_hex\n");
        for (t, c) in &self.checkpoints {
            if c.n_vertices() > 64 {
                return Err(Error::Parameter(
                    "bitmask CSV needs at most 64 vertices; use JSON".into(),
                ));
            }
            writeln!(out, "{t},{},{:x}", c.len(), c.mask()).expect("writing to a String");
        }
        Ok(out)
    }
}

/// Runs the process from `start`, recording the configuration at each
/// checkpoint (nondecreasing times).
pub fn simulate(
    g: &Graph,
    lambda: f64,
    start: &Configuration,
    checkpoints: &[f64],
    seed: u64,
) -> Result<Trajectory> {
    check_rate(lambda)?;
    check_start(g, start)?;
    check_grid(checkpoints)?;
    let mut states = run_coupled(g, lambda, std::slice::from_ref(start), checkpoints, seed)?;
    let extinction = states.extinction[0];
    Ok(Trajectory {
        seed,
        checkpoints: checkpoints
            .iter()
            .copied()
            .zip(states.snapshots.remove(0))
            .collect(),
        extinction_time: extinction,
    })
}

/// Configurations of several processes driven by one Harris system.
pub(crate) struct CoupledRun {
    /// `snapshots[i][k]`: process `i` at checkpoint `k`.
    pub snapshots: Vec<Vec<Configuration>>,
    /// First time each process became empty, if before the last checkpoint.
    pub extinction: Vec<Option<f64>>,
}

pub(crate) fn run_coupled(
    g: &Graph,
    lambda: f64,
    starts: &[Configuration],
    checkpoints: &[f64],
    seed: u64,
) -> Result<CoupledRun> {
    let mut states: Vec<Configuration> = starts.to_vec();
    let mut extinction: Vec<Option<f64>> = states
        .iter()
        .map(|s| s.is_empty().then_some(0.0))
        .collect();
    let mut snapshots: Vec<Vec<Configuration>> = vec![Vec::with_capacity(checkpoints.len()); starts.len()];
    let mut cursor = EventCursor::new(g, lambda, seed);
    for &stop in checkpoints {
        while extinction.iter().any(Option::is_none) && cursor.peek_time() <= stop {
            let (index, time) = cursor.next_indexed().expect("peeked");
            let clock = cursor.clock(index);
            for (s, ext) in states.iter_mut().zip(extinction.iter_mut()) {
                if ext.is_none() {
                    apply_forward(s, clock);
                    if s.is_empty() {
                        *ext = Some(time);
                    }
                }
            }
        }
        for (snap, s) in snapshots.iter_mut().zip(&states) {
            snap.push(s.clone());
        }
    }
    Ok(CoupledRun {
        snapshots,
        extinction,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CouplingStatus {
    Extinct,
    Coupled,
    Decoupled,
}

impl CouplingStatus {
    fn of(start_state: &Configuration, full_state: &Configuration) -> Self {
        if start_state.is_empty() {
            CouplingStatus::Extinct
        } else if start_state == full_state {
            CouplingStatus::Coupled
        } else {
            CouplingStatus::Decoupled
        }
    }
}

/// Status of the process from `start` against the one from full occupancy,
/// both on the same Harris system, at every grid time.
pub fn coupling_trace(
    g: &Graph,
    lambda: f64,
    start: &Configuration,
    grid: &[f64],
    seed: u64,
) -> Result<Vec<CouplingStatus>> {
    check_rate(lambda)?;
    check_start(g, start)?;
    check_grid(grid)?;
    if start.is_empty() {
        return Err(Error::Parameter("coupling needs a nonempty start set".into()));
    }
    let starts = [start.clone(), Configuration::full(g.n_vertices())];
    let run = run_coupled(g, lambda, &starts, grid, seed)?;
    Ok(run.snapshots[0]
        .iter()
        .zip(&run.snapshots[1])
        .map(|(a, full)| CouplingStatus::of(a, full))
        .collect())
}

pub fn coupling_status(
    g: &Graph,
    lambda: f64,
    start: &Configuration,
    t: f64,
    seed: u64,
) -> Result<CouplingStatus> {
    Ok(coupling_trace(g, lambda, start, &[t], seed)?[0])
}

/// Whether the process from `start` is still alive at time `t`.
pub fn survives(g: &Graph, lambda: f64, start: &Configuration, t: f64, seed: u64) -> Result<bool> {
    check_rate(lambda)?;
    check_start(g, start)?;
    let mut state = start.clone();
    let mut alive = state.len();
    if alive == 0 {
        return Ok(false);
    }
    let mut cursor = EventCursor::new(g, lambda, seed);
    while cursor.peek_time() <= t {
        let (index, _) = cursor.next_indexed().expect("peeked");
        match cursor.clock(index) {
            Clock::Recovery(v) => {
                if state.remove(v) {
                    alive -= 1;
                    if alive == 0 {
                        return Ok(false);
                    }
                }
            }
            Clock::Transmission { from, to } => {
                if state.contains(from) && state.insert(to) {
                    alive += 1;
                }
            }
        }
    }
    Ok(true)
}

/// Monte Carlo estimate of `P[process from start is alive at t]`.
pub fn survival_probability(
    g: &Graph,
    lambda: f64,
    start: &Configuration,
    t: f64,
    replicas: usize,
    base_seed: u64,
) -> Result<ExperimentReport> {
    check_rate(lambda)?;
    check_start(g, start)?;
    if replicas == 0 {
        return Err(Error::Parameter("need at least one replica".into()));
    }
    let outcomes = map_replicas(replicas, base_seed, |_, seed| survives(g, lambda, start, t, seed));
    let mut alive = 0;
    for o in outcomes {
        alive += usize::from(o?);
    }
    let config = ConfigEcho::new(lambda, g)
        .with("t", t)
        .with("start", start.iter().collect::<Vec<_>>());
    Ok(ExperimentReport::proportion(
        "survival_probability",
        alive,
        replicas,
        base_seed,
        config,
    ))
}

/// Estimated lit status of a line or star configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LitVerdict {
    pub estimate: ExperimentReport,
    /// `1 - exp(-c0 n)`.
    pub threshold: f64,
    /// `exp(c0 n)`.
    pub horizon: f64,
    /// Point estimate above the threshold.
    pub lit: bool,
    /// The 95% interval lies entirely on one side of the threshold.
    pub decisive: bool,
    pub c0: f64,
}

/// Estimates `P[xi survives to exp(c0 n)]` on a line segment or star and
/// compares it with `1 - exp(-c0 n)`.
pub fn is_lit(
    f: &Graph,
    lambda: f64,
    xi: &Configuration,
    c0: f64,
    replicas: usize,
    base_seed: u64,
) -> Result<LitVerdict> {
    if f.shape().is_none() {
        return Err(Error::Precondition(
            "lit configurations are defined on line segments and stars only".into(),
        ));
    }
    if !(c0 > 0.0) {
        return Err(Error::Parameter("c0 must be positive".into()));
    }
    let n = f.n_vertices() as f64;
    let horizon = (c0 * n).exp();
    let threshold = 1.0 - (-c0 * n).exp();
    let mut estimate = survival_probability(f, lambda, xi, horizon, replicas, base_seed)?;
    estimate.quantity = "lit_survival_probability".into();
    estimate.config = estimate.config.with("c0", c0).with("threshold", threshold);
    let p = estimate.estimate.unwrap_or(0.0);
    let (lo, hi) = estimate.interval.unwrap_or((p, p));
    Ok(LitVerdict {
        lit: p > threshold,
        decisive: lo > threshold || hi <= threshold,
        threshold,
        horizon,
        c0,
        estimate,
    })
}

/// Piecewise-constant rightmost infected site on the segment `0..n` started
/// from `{0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RightEdgeTrace {
    /// `(time, rightmost infected vertex)` at every change, starting `(0, 0)`.
    pub points: Vec<(f64, Vertex)>,
    pub extinction_time: Option<f64>,
    /// First time vertex `n - 1` is infected.
    pub crossing_time: Option<f64>,
    pub t_max: f64,
}

pub fn right_edge_trace(n: usize, lambda: f64, seed: u64, t_max: f64) -> Result<RightEdgeTrace> {
    check_rate(lambda)?;
    let g = make_line(n)?;
    let mut state = Configuration::empty(n);
    state.insert(0);
    let mut edge = 0;
    let mut trace = RightEdgeTrace {
        points: vec![(0.0, 0)],
        extinction_time: None,
        crossing_time: (n == 1).then_some(0.0),
        t_max,
    };
    let mut cursor = EventCursor::new(&g, lambda, seed);
    while cursor.peek_time() <= t_max {
        let (index, time) = cursor.next_indexed().expect("peeked");
        let clock = cursor.clock(index);
        apply_forward(&mut state, clock);
        match state.max_vertex() {
            None => {
                trace.extinction_time = Some(time);
                break;
            }
            Some(m) if m != edge => {
                edge = m;
                trace.points.push((time, m));
                if m == n - 1 && trace.crossing_time.is_none() {
                    trace.crossing_time = Some(time);
                }
            }
            Some(_) => {}
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_star, random_tree};
    use crate::harris::SpaceTimePoint;

    #[test]
    fn single_vertex_tau_is_first_mark() {
        let g = make_line(1).unwrap();
        for seed in 0..20 {
            let h = HarrisSystem::sample(&g, 2.0, 100.0, seed).unwrap();
            let first = h.recovery_marks(0)[0];
            assert_eq!(extinction_time(&g, 2.0, seed, 1e6).unwrap(), Some(first));
        }
    }

    #[test]
    fn doubling_schedule_does_not_change_tau() {
        for seed in 0..30 {
            let g = random_tree(6, seed).unwrap();
            let direct = extinction_time(&g, 1.5, seed, 1e4).unwrap();
            for first in [None, Some(0.1), Some(3.0), Some(1e4)] {
                assert_eq!(
                    extinction_time_by_doubling(&g, 1.5, seed, 1e4, first).unwrap(),
                    direct
                );
            }
        }
    }

    #[test]
    fn censoring_is_a_value() {
        let g = make_star(12).unwrap();
        assert_eq!(extinction_time(&g, 3.0, 1, 5.0).unwrap(), None);
    }

    #[test]
    fn trajectory_empty_after_extinction() {
        let g = make_line(4).unwrap();
        let grid: Vec<f64> = (0..200).map(|k| k as f64 * 0.5).collect();
        for seed in 0..20 {
            let tr = simulate(&g, 1.0, &Configuration::full(4), &grid, seed).unwrap();
            if let Some(tau) = tr.extinction_time {
                assert_eq!(Some(tau), extinction_time(&g, 1.0, seed, 1e9).unwrap());
                for (t, c) in &tr.checkpoints {
                    assert_eq!(c.is_empty(), *t >= tau);
                }
            }
        }
    }

    #[test]
    fn trajectory_agrees_with_materialized_system() {
        let g = random_tree(7, 5).unwrap();
        let start = Configuration::from_vertices(7, [2]).unwrap();
        let grid = [0.0, 0.7, 1.9, 4.0];
        let tr = simulate(&g, 2.0, &start, &grid, 9).unwrap();
        let h = HarrisSystem::sample(&g, 2.0, 4.0, 9).unwrap();
        for (t, c) in &tr.checkpoints {
            assert_eq!(&h.evolve(&start, 0.0, *t).unwrap(), c);
        }
        let csv = tr.to_csv().unwrap();
        assert!(csv.starts_with("time,infected_count,infected_bitmask_hex\n0,1,4\n"));
    }

    #[test]
    fn coupling_from_full_is_coupled_then_extinct() {
        let g = make_line(3).unwrap();
        let grid: Vec<f64> = (0..100).map(|k| k as f64 * 0.25).collect();
        let full = Configuration::full(3);
        for seed in 0..10 {
            let tau = extinction_time(&g, 1.0, seed, 1e9).unwrap().unwrap();
            let trace = coupling_trace(&g, 1.0, &full, &grid, seed).unwrap();
            for (t, s) in grid.iter().zip(trace) {
                let expect = if *t < tau {
                    CouplingStatus::Coupled
                } else {
                    CouplingStatus::Extinct
                };
                assert_eq!(s, expect);
            }
        }
    }

    #[test]
    fn coupling_at_time_zero_on_edge() {
        let g = make_line(2).unwrap();
        let start = Configuration::from_vertices(2, [0]).unwrap();
        assert_eq!(
            coupling_status(&g, 2.0, &start, 0.0, 3).unwrap(),
            CouplingStatus::Decoupled
        );
        assert!(coupling_status(&g, 2.0, &Configuration::empty(2), 1.0, 3).is_err());
    }

    #[test]
    fn survival_at_time_zero_is_one() {
        let g = make_star(5).unwrap();
        let r = survival_probability(&g, 1.0, &Configuration::from_vertices(5, [3]).unwrap(), 0.0, 50, 1)
            .unwrap();
        assert_eq!(r.estimate, Some(1.0));
    }

    #[test]
    fn lit_requires_line_or_star() {
        let spider = Graph::new(6, [(0, 1), (1, 2), (0, 3), (3, 4), (0, 5)]).unwrap();
        let xi = Configuration::full(6);
        assert!(matches!(
            is_lit(&spider, 2.0, &xi, 0.05, 10, 0),
            Err(Error::Precondition(_))
        ));
        let line = make_line(6).unwrap();
        let v = is_lit(&line, 2.0, &Configuration::empty(6), 0.05, 100, 0).unwrap();
        assert_eq!(v.estimate.estimate, Some(0.0));
        assert!(!v.lit);
    }

    #[test]
    fn right_edge_stays_in_range_and_matches_paths() {
        for seed in 0..40 {
            let tr = right_edge_trace(12, 2.0, seed, 50.0).unwrap();
            assert!(tr.points.iter().all(|&(_, x)| x < 12));
            assert!(tr.points.windows(2).all(|w| w[0].0 <= w[1].0));
            if let Some(c) = tr.crossing_time {
                let g = make_line(12).unwrap();
                let h = HarrisSystem::sample(&g, 2.0, c, seed).unwrap();
                assert!(h
                    .reaches(SpaceTimePoint::new(0, 0.0), SpaceTimePoint::new(11, c), None)
                    .unwrap());
            }
        }
    }
}
