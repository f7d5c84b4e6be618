//! Poisson clocks of the graphical construction and their random streams.
//!
//! Every clock owns a ChaCha8 keystream selected by `(seed, stream id)`, so a
//! clock's arrivals depend only on the seed and the clock's identity: not on
//! the graph's other clocks, on how far other clocks were sampled, or on the
//! order in which horizons were extended.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::graphs::{Graph, Vertex};

/// A recovery clock at a vertex or a transmission clock on a directed edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Clock {
    Recovery(Vertex),
    Transmission { from: Vertex, to: Vertex },
}

impl Clock {
    /// Keystream id; recoveries and transmissions live in disjoint halves.
    fn stream_id(self) -> u64 {
        match self {
            Clock::Recovery(v) => v as u64,
            Clock::Transmission { from, to } => (1 << 63) | ((from as u64) << 31) | to as u64,
        }
    }
}

/// A single arrival of some clock.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub clock: Clock,
}

/// Clocks of `g` in canonical order: recoveries by vertex, then for each
/// edge `{u, v}` (u < v, by edge id) the transmissions `u -> v` and `v -> u`.
/// Position in this list is the clock index used for tie-breaking.
pub fn clock_list(g: &Graph) -> Vec<Clock> {
    let mut clocks: Vec<Clock> = (0..g.n_vertices()).map(Clock::Recovery).collect();
    for &(u, v) in g.edges() {
        clocks.push(Clock::Transmission { from: u, to: v });
        clocks.push(Clock::Transmission { from: v, to: u });
    }
    clocks
}

pub(crate) fn clock_index(g: &Graph, clock: Clock) -> Option<usize> {
    match clock {
        Clock::Recovery(v) => (v < g.n_vertices()).then_some(v),
        Clock::Transmission { from, to } => {
            let e = g.edge_id(from, to)?;
            Some(g.n_vertices() + 2 * e + usize::from(from > to))
        }
    }
}

/// Arrival generator of one clock: cumulative sums of exponential gaps.
#[derive(Clone, Debug)]
pub(crate) struct ClockStream {
    rng: ChaCha8Rng,
    rate: f64,
    next: f64,
}

impl ClockStream {
    pub(crate) fn new(seed: u64, clock: Clock, rate: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(clock.stream_id());
        let first = rng.sample::<f64, _>(Exp1) / rate;
        ClockStream {
            rng,
            rate,
            next: first,
        }
    }

    #[inline]
    pub(crate) fn peek(&self) -> f64 {
        self.next
    }

    /// Returns the pending arrival and draws the one after it.
    #[inline]
    pub(crate) fn advance(&mut self) -> f64 {
        let t = self.next;
        self.next = t + self.rng.sample::<f64, _>(Exp1) / self.rate;
        t
    }
}

pub(crate) fn streams_for(g: &Graph, lambda: f64, seed: u64) -> Vec<ClockStream> {
    clock_list(g)
        .into_iter()
        .map(|c| {
            let rate = match c {
                Clock::Recovery(_) => 1.0,
                Clock::Transmission { .. } => lambda,
            };
            ClockStream::new(seed, c, rate)
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
struct Pending {
    time: f64,
    index: usize,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // Reversed so the max-heap pops the earliest (time, index).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.index.cmp(&self.index))
    }
}

/// Streams the events of a Harris system in time order without storing them.
///
/// Yields exactly the events a [`HarrisSystem`](super::HarrisSystem) sampled
/// with the same graph, rate and seed holds, in the same order.
#[derive(Clone, Debug)]
pub struct EventCursor {
    clocks: Vec<Clock>,
    streams: Vec<ClockStream>,
    heap: BinaryHeap<Pending>,
}

impl EventCursor {
    pub fn new(g: &Graph, lambda: f64, seed: u64) -> Self {
        let clocks = clock_list(g);
        let streams = streams_for(g, lambda, seed);
        let heap = streams
            .iter()
            .enumerate()
            .map(|(index, s)| Pending {
                time: s.peek(),
                index,
            })
            .collect();
        EventCursor {
            clocks,
            streams,
            heap,
        }
    }

    /// Time of the next event, or infinity for a graph without clocks.
    pub fn peek_time(&self) -> f64 {
        self.heap.peek().map_or(f64::INFINITY, |p| p.time)
    }

    /// Clock index and time of the next event.
    #[inline]
    pub(crate) fn next_indexed(&mut self) -> Option<(usize, f64)> {
        let mut top = self.heap.peek_mut()?;
        let index = top.index;
        let time = self.streams[index].advance();
        top.time = self.streams[index].peek();
        Some((index, time))
    }

    pub(crate) fn clock(&self, index: usize) -> Clock {
        self.clocks[index]
    }
}

impl Iterator for EventCursor {
    type Item = Event;

    fn next(&mut self) -> Option<Event> {
        let (index, time) = self.next_indexed()?;
        Some(Event {
            time,
            clock: self.clocks[index],
        })
    }
}
