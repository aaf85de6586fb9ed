//! Exact arithmetic: multivariate polynomials over the rationals,
//! localization at the chart origin, and truncated jets.

pub mod frame;
pub mod jet;
pub mod local;
pub mod monomial;
pub mod poly;

pub use frame::{Frame, VarInfo};
pub use jet::{jet_inverse, Jet};
pub use local::LocalElement;
pub use monomial::Monomial;
pub use poly::{q, q_frac, Poly, Q};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("mismatched variable frames: [{left}] vs [{right}]")]
    FrameMismatch { left: String, right: String },
    #[error("denominator vanishes at the origin: {den}")]
    DenominatorVanishes { den: String },
    #[error("not a unit at the origin: {value}")]
    NotAUnit { value: String },
}

/// A substitution sending each variable of `source` to a polynomial in
/// `target`. This is the chart-map representation used throughout: the
/// parent coordinates expressed in the child coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substitution {
    pub source: Frame,
    pub target: Frame,
    pub images: Vec<Poly>,
}

impl Substitution {
    pub fn new(source: Frame, target: Frame, images: Vec<Poly>) -> Self {
        assert_eq!(source.dim(), images.len());
        for img in &images {
            assert_eq!(img.frame(), &target);
        }
        Substitution { source, target, images }
    }

    pub fn identity(frame: &Frame) -> Self {
        let images = (0..frame.dim()).map(|i| Poly::var(frame, i)).collect();
        Substitution { source: frame.clone(), target: frame.clone(), images }
    }

    pub fn apply(&self, p: &Poly) -> Poly {
        assert_eq!(p.frame(), &self.source);
        p.substitute(&self.target, &self.images)
    }

    pub fn apply_local(&self, e: &LocalElement) -> Result<LocalElement, AlgebraError> {
        assert_eq!(e.frame(), &self.source);
        e.substitute(&self.target, &self.images)
    }

    /// Composition: first `self`, then `next` (so sources chain from the
    /// root frame down to the newest chart).
    pub fn then(&self, next: &Substitution) -> Substitution {
        assert_eq!(self.target, next.source);
        let images = self.images.iter().map(|p| next.apply(p)).collect();
        Substitution { source: self.source.clone(), target: next.target.clone(), images }
    }
}
