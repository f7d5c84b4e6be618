//! The graphical construction: recovery marks per vertex, transmission
//! arrivals per directed edge, and the path queries read off them.

mod clock;
mod configuration;

use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{Graph, Vertex};

pub use clock::{clock_list, Clock, Event, EventCursor};
pub(crate) use clock::{clock_index, ClockStream};
pub use configuration::Configuration;

/// A vertex at an instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub vertex: Vertex,
    pub time: f64,
}

impl SpaceTimePoint {
    pub fn new(vertex: Vertex, time: f64) -> Self {
        SpaceTimePoint { vertex, time }
    }
}

/// A Harris system materialized on `[0, horizon]`.
#[derive(Clone, Debug)]
pub struct HarrisSystem<'g> {
    graph: &'g Graph,
    lambda: f64,
    base_seed: Option<u64>,
    horizon: f64,
    /// Arrivals per clock index (see [`clock_list`]), strictly increasing.
    arrivals: Vec<Vec<f64>>,
    /// Continuations past the horizon; absent for hand-built fixtures.
    streams: Option<Vec<ClockStream>>,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("infection rate must be positive, got {lambda}")))
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon >= 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("horizon must be finite and >= 0, got {horizon}")))
    }
}

impl<'g> HarrisSystem<'g> {
    /// Samples every clock of `g` on `[0, horizon]`.
    pub fn sample(g: &'g Graph, lambda: f64, horizon: f64, base_seed: u64) -> Result<Self> {
        check_lambda(lambda)?;
        check_horizon(horizon)?;
        let streams = clock::streams_for(g, lambda, base_seed);
        let mut h = HarrisSystem {
            graph: g,
            lambda,
            base_seed: Some(base_seed),
            horizon: 0.0,
            arrivals: vec![Vec::new(); streams.len()],
            streams: Some(streams),
        };
        h.fill_to(horizon);
        Ok(h)
    }

    /// A fixed system built from explicit events; it cannot be extended.
    pub fn from_events(
        g: &'g Graph,
        lambda: f64,
        horizon: f64,
        events: impl IntoIterator<Item = Event>,
    ) -> Result<Self> {
        check_lambda(lambda)?;
        check_horizon(horizon)?;
        let mut arrivals = vec![Vec::new(); clock_list(g).len()];
        for e in events {
            let idx = clock_index(g, e.clock).ok_or_else(|| {
                Error::Parameter(format!("clock {:?} does not exist in the graph", e.clock))
            })?;
            if !(e.time >= 0.0 && e.time <= horizon) {
                return Err(Error::Parameter(format!(
                    "event time {} outside [0, {horizon}]",
                    e.time
                )));
            }
            arrivals[idx].push(e.time);
        }
        for list in &mut arrivals {
            list.sort_by(f64::total_cmp);
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Parameter("a clock has two arrivals at the same time".into()));
            }
        }
        Ok(HarrisSystem {
            graph: g,
            lambda,
            base_seed: None,
            horizon,
            arrivals,
            streams: None,
        })
    }

    fn fill_to(&mut self, horizon: f64) {
        if let Some(streams) = self.streams.as_mut() {
            for (s, list) in streams.iter_mut().zip(self.arrivals.iter_mut()) {
                while s.peek() <= horizon {
                    list.push(s.advance());
                }
            }
        }
        self.horizon = horizon;
    }

    /// Returns the system materialized up to `new_horizon`; arrivals before
    /// the current horizon are kept bit for bit.
    pub fn extend(&self, new_horizon: f64) -> Result<Self> {
        let mut h = self.clone();
        h.extend_in_place(new_horizon)?;
        Ok(h)
    }

    pub fn extend_in_place(&mut self, new_horizon: f64) -> Result<()> {
        check_horizon(new_horizon)?;
        if new_horizon < self.horizon {
            return Err(Error::Parameter(format!(
                "cannot shrink horizon from {} to {new_horizon}",
                self.horizon
            )));
        }
        if self.streams.is_none() && new_horizon > self.horizon {
            return Err(Error::Parameter("fixture systems cannot be extended".into()));
        }
        self.fill_to(new_horizon);
        Ok(())
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn base_seed(&self) -> Option<u64> {
        self.base_seed
    }

    pub fn recovery_marks(&self, v: Vertex) -> &[f64] {
        &self.arrivals[v]
    }

    /// Transmission arrivals on `from -> to`, empty if that is not an edge.
    pub fn transmissions(&self, from: Vertex, to: Vertex) -> &[f64] {
        clock_index(self.graph, Clock::Transmission { from, to })
            .map_or(&[], |i| self.arrivals[i].as_slice())
    }

    pub fn n_events(&self) -> usize {
        self.arrivals.iter().map(Vec::len).sum()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t > self.horizon {
            Err(Error::HorizonExceeded {
                requested: t,
                horizon: self.horizon,
            })
        } else if t < 0.0 || t.is_nan() {
            Err(Error::Precondition(format!("negative time {t}")))
        } else {
            Ok(())
        }
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.graph.n_vertices() {
            Ok(())
        } else {
            Err(Error::Precondition(format!("unknown vertex {v}")))
        }
    }

    /// Events with `t0 < time <= t1`, ordered by time, then recoveries before
    /// transmissions, then clock index.
    pub fn events_in(&self, t0: f64, t1: f64) -> Vec<Event> {
        let clocks = clock_list(self.graph);
        let mut indexed: Vec<(f64, usize)> = Vec::new();
        for (i, list) in self.arrivals.iter().enumerate() {
            let lo = list.partition_point(|&a| a <= t0);
            let hi = list.partition_point(|&a| a <= t1);
            indexed.extend(list[lo..hi].iter().map(|&a| (a, i)));
        }
        // Recovery clocks precede transmission clocks in index order.
        indexed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        indexed
            .into_iter()
            .map(|(time, i)| Event {
                time,
                clock: clocks[i],
            })
            .collect()
    }

    /// Forward sweep of the events in `(t0, t1]` starting from `initial`.
    pub fn evolve(&self, initial: &Configuration, t0: f64, t1: f64) -> Result<Configuration> {
        if t0 > t1 {
            return Err(Error::Precondition(format!("t0 = {t0} after t1 = {t1}")));
        }
        self.check_time(t0)?;
        self.check_time(t1)?;
        if initial.n_vertices() != self.graph.n_vertices() {
            return Err(Error::Precondition("configuration size mismatch".into()));
        }
        let mut state = initial.clone();
        for e in self.events_in(t0, t1) {
            apply_forward(&mut state, e.clock);
        }
        Ok(state)
    }

    /// Vertices `y` with `(y, t - s) <-> (x, t)` for the anchor `(x, t)`,
    /// found by sweeping the events backward with arrows reversed.
    pub fn dual_evolve(&self, anchor: SpaceTimePoint, s: f64) -> Result<Configuration> {
        self.check_vertex(anchor.vertex)?;
        self.check_time(anchor.time)?;
        if !(s >= 0.0) || s > anchor.time {
            return Err(Error::Precondition(format!(
                "dual duration {s} outside [0, {}]",
                anchor.time
            )));
        }
        let n = self.graph.n_vertices();
        let mut state = Configuration::empty(n);
        state.insert(anchor.vertex);
        for e in self.events_in(anchor.time - s, anchor.time).into_iter().rev() {
            match e.clock {
                Clock::Recovery(v) => {
                    state.remove(v);
                }
                Clock::Transmission { from, to } => {
                    if state.contains(to) {
                        state.insert(from);
                    }
                }
            }
        }
        Ok(state)
    }

    /// Whether an infection path joins `from` to `to`, staying inside
    /// `restrict` when given.
    ///
    /// Searches the space-time graph whose nodes are the recovery-free
    /// stretches of each vertex, joined by transmission arrivals, visiting
    /// stretches in order of entry time.
    pub fn reaches(
        &self,
        from: SpaceTimePoint,
        to: SpaceTimePoint,
        restrict: Option<&[Vertex]>,
    ) -> Result<bool> {
        self.check_vertex(from.vertex)?;
        self.check_vertex(to.vertex)?;
        if from.time > to.time {
            return Err(Error::Precondition(format!(
                "path start {} after its end {}",
                from.time, to.time
            )));
        }
        self.check_time(from.time)?;
        self.check_time(to.time)?;
        let n = self.graph.n_vertices();
        let allowed: Vec<bool> = match restrict {
            None => vec![true; n],
            Some(set) => {
                let mut mask = vec![false; n];
                for &v in set {
                    self.check_vertex(v)?;
                    mask[v] = true;
                }
                if !mask[from.vertex] || !mask[to.vertex] {
                    return Err(Error::Precondition(
                        "restriction set must contain both endpoints".into(),
                    ));
                }
                mask
            }
        };
        if from.time == to.time {
            return Ok(from.vertex == to.vertex);
        }
        let t_end = to.time;
        // A stretch of v is identified by the number of marks at or before
        // its entry time.
        let stretch = |v: Vertex, t: f64| self.arrivals[v].partition_point(|&m| m <= t);
        let mut visited: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut queue: BinaryHeap<Reverse<(OrderedTime, Vertex)>> = BinaryHeap::new();
        queue.push(Reverse((OrderedTime(from.time), from.vertex)));
        while let Some(Reverse((OrderedTime(entry), v))) = queue.pop() {
            let k = stretch(v, entry);
            if visited[v].contains(&k) {
                continue;
            }
            visited[v].push(k);
            let death = self.arrivals[v].get(k).copied().unwrap_or(f64::INFINITY);
            if v == to.vertex && death > t_end {
                return Ok(true);
            }
            let until = death.min(t_end);
            for &w in self.graph.neighbors(v) {
                if !allowed[w] {
                    continue;
                }
                let arrows = self.transmissions(v, w);
                let lo = arrows.partition_point(|&a| a <= entry);
                for &a in &arrows[lo..] {
                    // A mark at the same instant as an arrow wins.
                    if a > until || a >= death {
                        break;
                    }
                    if !visited[w].contains(&stretch(w, a)) {
                        queue.push(Reverse((OrderedTime(a), w)));
                    }
                }
            }
        }
        Ok(false)
    }

    /// Debug dump: `time,kind,vertex[,target]` sorted like [`Self::events_in`].
    pub fn to_event_csv(&self) -> String {
        let mut out = String::from("time,kind,vertex,target\n");
        for e in self.events_in(-1.0, self.horizon) {
            match e.clock {
                Clock::Recovery(v) => writeln!(out, "{},R,{v}", e.time),
                Clock::Transmission { from, to } => writeln!(out, "{},T,{from},{to}", e.time),
            }
            .expect("writing to a String");
        }
        out
    }

    /// Parses the format written by [`Self::to_event_csv`] into a fixture.
    pub fn from_event_csv(g: &'g Graph, lambda: f64, horizon: f64, text: &str) -> Result<Self> {
        let mut events = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("time,") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let num = |s: &str| -> Result<Vertex> {
                s.parse().map_err(|_| bad(format!("bad vertex {s:?}")))
            };
            let time: f64 = fields[0]
                .parse()
                .map_err(|_| bad(format!("bad time {:?}", fields[0])))?;
            let clock = match (fields.get(1).copied(), fields.len()) {
                (Some("R"), 3) => Clock::Recovery(num(fields[2])?),
                (Some("R"), 4) if fields[3].is_empty() => Clock::Recovery(num(fields[2])?),
                (Some("T"), 4) => Clock::Transmission {
                    from: num(fields[2])?,
                    to: num(fields[3])?,
                },
                _ => return Err(bad(format!("unrecognised event row {line:?}"))),
            };
            events.push(Event { time, clock });
        }
        Self::from_events(g, lambda, horizon, events)
    }
}

/// Applies one event to a configuration evolving forward in time.
#[inline]
pub(crate) fn apply_forward(state: &mut Configuration, clock: Clock) {
    match clock {
        Clock::Recovery(v) => {
            state.remove(v);
        }
        Clock::Transmission { from, to } => {
            if state.contains(from) {
                state.insert(to);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct OrderedTime(f64);

impl Eq for OrderedTime {}

impl PartialOrd for OrderedTime {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedTime {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_line, make_star, random_tree};

    fn rec(time: f64, v: Vertex) -> Event {
        Event {
            time,
            clock: Clock::Recovery(v),
        }
    }

    fn arrow(time: f64, from: Vertex, to: Vertex) -> Event {
        Event {
            time,
            clock: Clock::Transmission { from, to },
        }
    }

    #[test]
    fn zero_horizon_is_empty() {
        let g = make_star(5).unwrap();
        let h = HarrisSystem::sample(&g, 2.0, 0.0, 1).unwrap();
        assert_eq!(h.n_events(), 0);
    }

    #[test]
    fn rejects_bad_lambda() {
        let g = make_line(2).unwrap();
        assert!(HarrisSystem::sample(&g, 0.0, 1.0, 1).is_err());
        assert!(HarrisSystem::sample(&g, -1.0, 1.0, 1).is_err());
    }

    #[test]
    fn extend_to_same_horizon_is_identity() {
        let g = make_line(4).unwrap();
        let h = HarrisSystem::sample(&g, 2.0, 3.0, 5).unwrap();
        let e = h.extend(3.0).unwrap();
        assert_eq!(h.arrivals, e.arrivals);
        assert!(h.extend(2.0).is_err());
    }

    #[test]
    fn extension_is_prefix_stable() {
        let g = random_tree(7, 3).unwrap();
        let short = HarrisSystem::sample(&g, 1.5, 2.0, 42).unwrap();
        let long = HarrisSystem::sample(&g, 1.5, 9.0, 42).unwrap();
        let extended = short.extend(9.0).unwrap();
        assert_eq!(extended.arrivals, long.arrivals);
        for (a, b) in short.arrivals.iter().zip(&long.arrivals) {
            let cut = b.partition_point(|&t| t <= 2.0);
            assert_eq!(a.as_slice(), &b[..cut]);
        }
    }

    #[test]
    fn repeated_doubling_stays_sorted_and_stable() {
        let g = make_star(6).unwrap();
        let mut h = HarrisSystem::sample(&g, 1.0, 0.5, 8).unwrap();
        let mut previous = h.clone();
        for _ in 0..10 {
            let next = h.horizon() * 2.0;
            h.extend_in_place(next).unwrap();
            for (old, new) in previous.arrivals.iter().zip(&h.arrivals) {
                assert!(new.windows(2).all(|w| w[0] < w[1]));
                assert_eq!(old.as_slice(), &new[..old.len()]);
            }
            previous = h.clone();
        }
        assert_eq!(h.arrivals, HarrisSystem::sample(&g, 1.0, 512.0, 8).unwrap().arrivals);
    }

    #[test]
    fn matches_streaming_cursor() {
        let g = random_tree(6, 2).unwrap();
        let h = HarrisSystem::sample(&g, 2.0, 20.0, 77).unwrap();
        let stored = h.events_in(-1.0, 20.0);
        let streamed: Vec<Event> = EventCursor::new(&g, 2.0, 77)
            .take_while(|e| e.time <= 20.0)
            .collect();
        assert_eq!(stored, streamed);
    }

    #[test]
    fn path_convention_and_constant_path() {
        let g = make_line(3).unwrap();
        let h = HarrisSystem::from_events(&g, 1.0, 5.0, [rec(4.0, 1)]).unwrap();
        let p = SpaceTimePoint::new(1, 2.0);
        assert!(h.reaches(p, p, None).unwrap());
        assert!(h.reaches(SpaceTimePoint::new(0, 0.0), SpaceTimePoint::new(0, 5.0), None).unwrap());
        assert!(!h.reaches(SpaceTimePoint::new(1, 0.0), SpaceTimePoint::new(1, 5.0), None).unwrap());
        assert!(h
            .reaches(SpaceTimePoint::new(1, 0.0), SpaceTimePoint::new(1, 3.0), None)
            .unwrap());
    }

    #[test]
    fn recovery_before_only_arrow_blocks_path() {
        let g = make_line(2).unwrap();
        let blocked =
            HarrisSystem::from_events(&g, 1.0, 3.0, [rec(1.0, 0), arrow(2.0, 0, 1), rec(2.5, 0)])
                .unwrap();
        let from = SpaceTimePoint::new(0, 0.0);
        let to = SpaceTimePoint::new(1, 3.0);
        assert!(!blocked.reaches(from, to, None).unwrap());
        let open =
            HarrisSystem::from_events(&g, 1.0, 3.0, [arrow(1.0, 0, 1), rec(2.0, 0), rec(2.5, 0)])
                .unwrap();
        assert!(open.reaches(from, to, None).unwrap());
    }

    #[test]
    fn restriction_excludes_detours() {
        // 0 -> 1 -> 2 is the only route to 2.
        let g = make_line(3).unwrap();
        let h = HarrisSystem::from_events(&g, 1.0, 3.0, [arrow(1.0, 0, 1), arrow(2.0, 1, 2)])
            .unwrap();
        let from = SpaceTimePoint::new(0, 0.0);
        let to = SpaceTimePoint::new(2, 3.0);
        assert!(h.reaches(from, to, None).unwrap());
        assert!(h.reaches(from, to, Some(&[0, 1, 2])).unwrap());
        assert!(!h.reaches(from, to, Some(&[0, 2])).unwrap());
        assert!(h.reaches(from, to, Some(&[0, 1])).is_err());
    }

    #[test]
    fn time_order_and_horizon_errors() {
        let g = make_line(2).unwrap();
        let h = HarrisSystem::sample(&g, 1.0, 2.0, 0).unwrap();
        let a = SpaceTimePoint::new(0, 1.0);
        let b = SpaceTimePoint::new(1, 0.5);
        assert!(matches!(h.reaches(a, b, None), Err(Error::Precondition(_))));
        let late = SpaceTimePoint::new(1, 3.0);
        assert!(matches!(h.reaches(a, late, None), Err(Error::HorizonExceeded { .. })));
        let full = Configuration::full(2);
        assert!(matches!(h.evolve(&full, 0.0, 2.5), Err(Error::HorizonExceeded { .. })));
        assert!(h.dual_evolve(SpaceTimePoint::new(0, 1.0), 1.5).is_err());
    }

    #[test]
    fn empty_stays_empty_and_quiet_window_is_identity() {
        let g = make_star(5).unwrap();
        let h = HarrisSystem::sample(&g, 3.0, 10.0, 4).unwrap();
        assert!(h.evolve(&Configuration::empty(5), 0.0, 10.0).unwrap().is_empty());
        let fixture = HarrisSystem::from_events(&g, 1.0, 5.0, [rec(4.0, 1)]).unwrap();
        let start = Configuration::from_vertices(5, [1, 2]).unwrap();
        assert_eq!(fixture.evolve(&start, 0.0, 3.9).unwrap(), start);
        let anchor = SpaceTimePoint::new(3, 3.0);
        assert_eq!(
            fixture.dual_evolve(anchor, 3.0).unwrap(),
            Configuration::from_vertices(5, [3]).unwrap()
        );
        assert_eq!(
            h.dual_evolve(SpaceTimePoint::new(2, 6.0), 0.0).unwrap(),
            Configuration::from_vertices(5, [2]).unwrap()
        );
    }

    #[test]
    fn event_csv_round_trip() {
        let g = random_tree(5, 1).unwrap();
        let h = HarrisSystem::sample(&g, 1.3, 4.0, 12).unwrap();
        let csv = h.to_event_csv();
        assert!(csv.starts_with("time,kind,vertex,target\n"));
        let back = HarrisSystem::from_event_csv(&g, 1.3, 4.0, &csv).unwrap();
        assert_eq!(back.arrivals, h.arrivals);
        assert!(HarrisSystem::from_event_csv(&g, 1.0, 4.0, "1.0,X,0").is_err());
    }

    #[test]
    fn fixtures_cannot_extend() {
        let g = make_line(2).unwrap();
        let h = HarrisSystem::from_events(&g, 1.0, 1.0, [rec(0.5, 0)]).unwrap();
        assert!(h.extend(2.0).is_err());
        assert!(HarrisSystem::from_events(&g, 1.0, 1.0, [arrow(0.5, 0, 2)]).is_err());
    }
}
