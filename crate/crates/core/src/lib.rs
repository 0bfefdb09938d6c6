//! Boolean control networks in semi-tensor-product form.
//!
//! The crate covers the logical-matrix calculus ([`stp`]), network models
//! and their JSON format ([`network`]), closed-loop dynamics ([`dynamics`]),
//! behavioural equivalence ([`equivalence`]), reachability and invariant-set
//! decomposition ([`reachability`]), disturbance decoupling and
//! stabilization ([`decoupling`]), fault detection and the set-membership
//! observer ([`fault`]), structure counting ([`combinatorics`]) and the
//! command-line front end ([`cli`]).
//!
//! All indices are 1-based, as in `δ_n^i` notation.

pub mod candidates;
pub mod cli;
pub mod combinatorics;
pub mod decoupling;
pub mod dynamics;
pub mod equivalence;
pub mod error;
pub mod fault;
pub mod fixtures;
pub mod graph;
pub mod network;
pub mod reachability;
pub mod stp;

pub use error::{Error, Result};
pub use network::{BooleanControlNetwork, BooleanNetwork, Dims, SignalOrder};
pub use stp::{DeltaVector, LogicalMatrix};
