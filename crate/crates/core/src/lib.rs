//! Simulation and rate-region toolkit for the three-user Y-channel.
//!
//! * [`model`]: channel configurations, rate tuples and flow decomposition.
//! * [`dyc`]: bit-exact deterministic channel simulator with level planning.
//! * [`region`]: Gaussian achievable rates for a power allocation, the
//!   allocation optimizer and the constant-gap region checks.
//! * [`lattice`]: one-dimensional nested-lattice codec with a Monte Carlo
//!   harness for relay sum decoding.

pub mod dyc;
pub mod error;
pub mod exec;
pub mod lattice;
pub mod model;
pub mod region;

pub use error::{DycError, LatticeError, ModelError, RegionError};
pub use exec::Execution;
pub use model::{decompose_flows, recompose, ChannelConfig, Cycle, FlowDecomposition, RateTuple, User};
