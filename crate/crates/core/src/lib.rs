//! Contact-process benchmark toolkit on finite graphs: graph families and
//! tree decompositions, the graphical (Harris) construction, Monte Carlo
//! estimators, exact Markov-chain oracles for small graphs, and experiment
//! drivers that compare simulation with closed-form bounds.

pub mod constants;
pub mod error;
pub mod experiments;
pub mod graphs;
pub mod harris;
pub mod oracle;
pub mod process;
pub mod replicas;
pub mod report;

pub use constants::{Constants, Provenance};
pub use error::{Error, Result};
pub use graphs::{Graph, Vertex};
pub use harris::{Clock, Configuration, Event, EventCursor, HarrisSystem, SpaceTimePoint};
pub use report::{ConfigEcho, ExperimentReport};
