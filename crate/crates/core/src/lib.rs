//! Deterministic simulation of a digital neuromorphic core whose STDP rule
//! needs only forward lookup into a compressed weight table.
//!
//! The crate is `no_std` (with `alloc`). Modules:
//!
//! - [`connectivity`]: crossbar and index-based (pointer table + run-length
//!   encoded stream) weight tables with bit-exact memory accounting.
//! - [`plasticity`]: STDP kernels, per-source countdown timers, the
//!   forward-only engine, the reverse-lookup reference engine and an offline
//!   trace-driven reference.
//! - [`neurocore`]: cores, routing tables, the tick loop and event queue.
//! - [`stimulus`]: reproducible Bernoulli/Poisson spike trains with a
//!   refractory period.
//! - [`analysis`]: memory curves, critical density, and forward-vs-reference
//!   weight statistics.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod bits;
pub mod connectivity;
mod error;
pub mod neurocore;
pub mod plasticity;
pub mod rng;
pub mod stimulus;

pub use error::{Error, Result};
