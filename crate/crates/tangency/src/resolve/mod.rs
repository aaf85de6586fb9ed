//! The three-step local resolution driver: drop the type, reach prepared
//! normal form, drop the tg-order; assembling a chart tree whose leaves
//! carry a unit ideal so the full pull-back is an exceptional monomial.

mod driver;
mod steps;
mod tree;
mod wt;

pub use driver::{edge_summary, resolve_local, verify_resolution, VerifyReport};
pub use tree::{ChartNode, ChartState, ChartTree, Edge, EdgeKind, Step3Data};
pub use wt::{prepare_check, weierstrass_form, PreparedForm, WTForm, WTOutcome};

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::blowup::BlowupError;
use crate::ideal::Backend;
use crate::invariants::InvariantError;

/// Driver options surfaced on the CLI.
#[derive(Clone, Debug)]
pub struct ResolveOptions {
    pub backend: Backend,
    pub jet_order: u32,
    pub max_stages: usize,
    pub max_branches: usize,
    pub seed: u64,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions {
            backend: Backend::Local,
            jet_order: 12,
            max_stages: crate::invariants::DEFAULT_STAGE_BUDGET,
            max_branches: 4096,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone)]
pub enum ResolveError {
    /// Inputs outside the implemented subclass (non-monomial stabilized
    /// ideal, unrecognized distribution, ...). Exit code 2.
    #[error("subclass abort: {0}")]
    Subclass(String),
    /// A configured budget ran out. Exit code 3.
    #[error("budget exhausted: {0}")]
    Budget(String),
    /// An internal consistency check failed; reported, never silently
    /// accepted.
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Blowup(#[from] BlowupError),
}

impl From<InvariantError> for ResolveError {
    fn from(e: InvariantError) -> Self {
        ResolveError::Budget(e.to_string())
    }
}

impl ResolveError {
    /// Process exit code contract: 2 subclass, 3 budget, 4 other failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ResolveError::Subclass(_) => 2,
            ResolveError::Budget(_) => 3,
            _ => 4,
        }
    }
}
