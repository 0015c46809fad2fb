//! Markov bases for hierarchical and decomposable log-linear models of
//! multiway contingency tables.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`model`]: cells, sparse tables, marginal vectors, moves.
//! * [`chordal`]: independence graphs, chordality, cliques, clique trees,
//!   boundary cliques and the boundary-clique elimination order.
//! * [`fiber2`]: structure of fibers of sample size two.
//! * [`gf2`]: small GF(2) vectors and bases.
//! * [`bases`]: minimal, Dobra, minimal invariant and Algorithm-1 bases,
//!   plus Markov-basis verification.
//! * [`groebner`]: the boundary-clique reverse lexicographic term order,
//!   the reduced Gröbner basis and a reduction engine.
//! * [`sampler`]: Metropolis–Hastings over a fiber and an exact test.
//! * [`oracle`]: brute-force ground truth used for verification.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bases;
pub mod chordal;
pub mod error;
pub mod fiber2;
pub mod gf2;
pub mod groebner;
pub mod model;
pub mod oracle;
pub mod sampler;
pub mod varset;

pub use crate::error::{Error, Result};
pub use crate::model::{Cell, DegreeTwoTable, Limits, MarginalVector, ModelSpec, Move, Table};
pub use crate::varset::VarSet;
