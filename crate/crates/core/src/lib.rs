//! Bond lattice animals on Z^d classified by edge count `n` and outlying-edge
//! count `m`, and the percolation quantities built on those counts.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure function
//! of its inputs: file formats, threading and the command line live in the
//! `svperc` companion crate.
//!
//! * [`enumerate`] builds the exact count table [`SvTable`] by rooted
//!   Redelmeier backtracking over edge animals; [`naive`] is an independent
//!   brute-force enumerator used to audit it.
//! * [`analysis`] evaluates the cluster-size law, the weight functions `phi`
//!   and `big_phi`, the subcritical maximizers `t_n` and the window
//!   decompositions on top of a table.
//! * [`exponents`] holds power-law fitters and decay-rate estimators. Every
//!   number they produce from a finite table is a finite-n proxy.
//! * [`montecarlo`] samples the origin's cluster in seeded bond percolation.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod enumerate;
mod error;
pub mod exponents;
pub mod lattice;
pub mod math;
pub mod montecarlo;
pub mod naive;
pub mod table;

pub use error::{Error, Result};
pub use lattice::{Edge, LatticeConfig, MAX_DIM};
pub use table::SvTable;
