//! Dynamical Lie algebra analysis and exact simulation of the quantum walk
//! optimization algorithm (QWOA).
//!
//! QWOA alternates a cost-dependent phase `e^{-i gamma H_C}` with a
//! continuous-time quantum walk on the complete graph over the feasible set.
//! Because the walk cannot tell solutions apart, the whole algorithm depends
//! on an instance only through its [`CostSpectrum`]: the distinct feasible
//! costs and how often each occurs. This crate exploits that to
//!
//! * build spectra of search, Max-Cut and k-densest-subgraph instances
//!   ([`problems`]),
//! * simulate QWOA in the `m`-dimensional cost-class space ([`sim`]),
//! * compute the dynamical Lie algebra in an `m x m` block representation,
//!   whose real dimension is at most `m^2 + 1` ([`dla`]),
//! * estimate loss variance over random parameters ([`landscape`]) and the
//!   depth needed to find an optimum ([`depth`]).

pub mod depth;
pub mod dla;
pub mod error;
pub mod landscape;
pub mod problems;
pub mod sim;
pub mod spectrum;

pub use error::{Error, Result};
pub use spectrum::{CostSpectrum, Sense};
