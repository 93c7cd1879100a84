//! Computing-aware routing over a LEO constellation.
//!
//! The network is a snapshot-free dynamic graph: static zone-based virtual
//! nodes whose satellites, link rates and compute change with time. Subtasks
//! are routed to a satellite that processes them on the way to their
//! destination, or sent to the ground for processing.
//!
//! - [`orbit`]: circular orbits, sub-satellite points and periods.
//! - [`zone`], [`association`], [`profile`], [`graph`], [`network`]: the
//!   dynamic graph, its resource ledgers and weights.
//! - [`traffic`]: Poisson task arrivals with log-normal subtasks.
//! - [`delay`]: path timelines and the delay decomposition.
//! - [`ga`]: genetic shortest-path search and an exact oracle.
//! - [`scheduler`]: computing-aware and ground-offloading plans.
//! - [`harness`]: configuration, runs, sweeps and CSV output.

pub mod error;
pub mod exec;

pub mod orbit;
pub mod zone;
pub mod association;
pub mod profile;
pub mod graph;
pub mod network;
pub mod synthetic;

pub mod traffic;
pub mod delay;
pub mod ga;
pub mod scheduler;

pub mod harness;
