//! Finite-window laboratory for shift-invariant densities, Weyl sums and
//! correspondence-principle experiments on subsets of the integers.

pub mod constructions;
pub mod correspondence;
pub mod dd;
pub mod error;
pub mod experiments;
pub mod real;
pub mod selftest;
pub mod sequences;
pub mod sets;
pub mod weyl;

pub use error::{Error, SeqError, SetError};
