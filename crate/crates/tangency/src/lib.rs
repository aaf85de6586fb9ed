//! Exact symbolic engine for foliated ideal sheaves: tangency invariants,
//! generalized Fitting ideals, admissible blow-ups, and a three-step local
//! resolution driver that principalizes an ideal while keeping the ambient
//! singular distribution monomial at every chart origin.
//!
//! Everything is computed over the rationals with exact arithmetic; there
//! is no floating point anywhere. See the `examples/` directory for one
//! runnable walkthrough per capability.

pub mod algebra;
pub mod blowup;
pub mod cli;
pub mod foliation;
pub mod invariants;
pub mod parse;
pub mod report;
pub mod resolve;
pub mod ideal;
mod linalg;

pub use algebra::{Frame, LocalElement, Monomial, Poly, Q};
