use std::fmt;

use num::{One, Zero};

use super::frame::Frame;
use super::poly::{Poly, Q};
use super::AlgebraError;

/// An element of the local ring at the chart origin: a polynomial divided
/// by a polynomial that does not vanish there.
///
/// The denominator is normalized to constant term one. Full multivariate
/// gcd reduction is not attempted; instead cheap reductions (monomial
/// content, exact division) keep representatives small, and equality is
/// decided by cross-multiplication, which is exact regardless of the
/// chosen representatives.
#[derive(Clone, Debug)]
pub struct LocalElement {
    num: Poly,
    den: Poly,
}

impl LocalElement {
    pub fn new(num: Poly, den: Poly) -> Result<Self, AlgebraError> {
        num.check_frame(&den)?;
        if den.eval_origin().is_zero() {
            return Err(AlgebraError::DenominatorVanishes { den: den.to_string() });
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return LocalElement { den: Poly::one(num.frame()), num };
        }
        let mut num = num;
        let mut den = den;
        // try exact cancellation before falling back to the raw pair
        if let Some(q) = num.div_exact(&den) {
            num = q;
            den = Poly::one(num.frame());
        } else if den.is_constant() {
            let c = den.eval_origin();
            num = num.scale(&(Q::one() / c));
            den = Poly::one(num.frame());
        } else {
            let c = den.eval_origin();
            let inv = Q::one() / c;
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        LocalElement { num, den }
    }

    pub fn from_poly(p: Poly) -> Self {
        let one = Poly::one(p.frame());
        LocalElement { num: p, den: one }
    }

    pub fn zero(frame: &Frame) -> Self {
        LocalElement::from_poly(Poly::zero(frame))
    }

    pub fn one(frame: &Frame) -> Self {
        LocalElement::from_poly(Poly::one(frame))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn frame(&self) -> &Frame {
        self.num.frame()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when the denominator is one, i.e. the element is an honest
    /// polynomial.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        if self.den.is_one() {
            Some(&self.num)
        } else {
            None
        }
    }

    pub fn eval_origin(&self) -> Q {
        self.num.eval_origin() / self.den.eval_origin()
    }

    /// A unit of the local ring: nonzero value at the origin.
    pub fn is_unit(&self) -> bool {
        !self.num.eval_origin().is_zero()
    }

    pub fn add(&self, other: &LocalElement) -> LocalElement {
        let num = self
            .num
            .mul(&other.den)
            .add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        Self::normalized(num, den)
    }

    pub fn sub(&self, other: &LocalElement) -> LocalElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LocalElement {
        LocalElement { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &LocalElement) -> LocalElement {
        Self::normalized(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn mul_poly(&self, p: &Poly) -> LocalElement {
        Self::normalized(self.num.mul(p), self.den.clone())
    }

    pub fn scale(&self, c: &Q) -> LocalElement {
        LocalElement { num: self.num.scale(c), den: self.den.clone() }
    }

    /// Reciprocal of a unit.
    pub fn inverse(&self) -> Result<LocalElement, AlgebraError> {
        if !self.is_unit() {
            return Err(AlgebraError::NotAUnit { value: self.to_string() });
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone()))
    }

    /// Quotient rule derivative with respect to the variable at `idx`.
    pub fn partial(&self, idx: usize) -> LocalElement {
        if self.den.is_one() {
            return LocalElement::from_poly(self.num.partial(idx));
        }
        let num = self
            .num
            .partial(idx)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.partial(idx)));
        let den = self.den.mul(&self.den);
        Self::normalized(num, den)
    }

    /// Substitutes polynomial images for each variable. Fails if the
    /// substituted denominator vanishes at the target origin.
    pub fn substitute(&self, target: &Frame, images: &[Poly]) -> Result<LocalElement, AlgebraError> {
        let num = self.num.substitute(target, images);
        let den = self.den.substitute(target, images);
        LocalElement::new(num, den)
    }

    /// Truncated expansion: the series of `self` up to total degree `n`.
    pub fn jet_approx(&self, n: u32) -> Poly {
        if self.den.is_one() {
            return self.num.truncate(n);
        }
        let inv = super::jet::jet_inverse(&self.den, n).expect("denominator is a unit");
        self.num.mul(&inv.poly()).truncate(n)
    }
}

impl PartialEq for LocalElement {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl Eq for LocalElement {}

impl fmt::Display for LocalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::q;

    fn frame() -> Frame {
        Frame::from_names(&["x", "y"])
    }

    #[test]
    fn unit_inverse_times_self_is_one() {
        let f = frame();
        let u = LocalElement::from_poly(Poly::one(&f).add(&Poly::var(&f, 0)));
        let inv = u.inverse().unwrap();
        assert_eq!(inv.num(), &Poly::one(&f));
        assert_eq!(inv.den(), &Poly::one(&f).add(&Poly::var(&f, 0)));
        assert_eq!(u.mul(&inv), LocalElement::one(&f));
    }

    #[test]
    fn constant_inverse() {
        let f = frame();
        let two = LocalElement::from_poly(Poly::constant(&f, q(2)));
        let half = two.inverse().unwrap();
        assert_eq!(half, LocalElement::from_poly(Poly::constant(&f, num::BigRational::new(1.into(), 2.into()))));
    }

    #[test]
    fn non_unit_rejected() {
        let f = frame();
        let x = LocalElement::from_poly(Poly::var(&f, 0));
        assert!(x.inverse().is_err());
        assert!(LocalElement::new(Poly::one(&f), Poly::var(&f, 0)).is_err());
    }

    #[test]
    fn equality_by_cross_multiplication() {
        let f = frame();
        let x = Poly::var(&f, 0);
        let one = Poly::one(&f);
        // x(1+x)/(1+x) == x
        let a = LocalElement::new(x.mul(&one.add(&x)), one.add(&x)).unwrap();
        let b = LocalElement::from_poly(x.clone());
        assert_eq!(a, b);
    }
}
