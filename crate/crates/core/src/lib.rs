//! Exact character arithmetic, truncated Dirichlet-series algebra and the
//! twist-decomposition identities for degree-2 L-functions, with
//! stationary-phase numerics for the dual twist and an executable audit of
//! the twist-invariance contradiction argument.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod arith;
pub mod audit;
pub mod characters;
pub mod error;
pub mod fixtures;
pub mod invariants;
pub mod phase;
pub mod series;
pub mod twistdecomp;

pub use error::Error;
