use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Signed, Zero};

use super::frame::Frame;
use super::monomial::Monomial;
use super::AlgebraError;

/// Exact rational coefficients.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// A multivariate polynomial over the rationals, attached to a frame.
///
/// Terms are stored in a canonical sorted map and never carry a zero
/// coefficient, so `==` and hashing are structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    frame: Frame,
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero(frame: &Frame) -> Self {
        Poly { frame: frame.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(frame: &Frame, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(frame.dim()), c);
        }
        Poly { frame: frame.clone(), terms }
    }

    pub fn one(frame: &Frame) -> Self {
        Poly::constant(frame, Q::one())
    }

    pub fn var(frame: &Frame, idx: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(idx, frame.dim()), Q::one());
        Poly { frame: frame.clone(), terms }
    }

    pub fn monomial(frame: &Frame, m: Monomial, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { frame: frame.clone(), terms }
    }

    pub fn from_terms(frame: &Frame, terms: Vec<(Monomial, Q)>) -> Self {
        let mut map: BTreeMap<Monomial, Q> = BTreeMap::new();
        for (m, c) in terms {
            debug_assert_eq!(m.dim(), frame.dim());
            let entry = map.entry(m).or_insert_with(Q::zero);
            *entry += c;
        }
        map.retain(|_, c| !c.is_zero());
        Poly { frame: frame.clone(), terms: map }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .all(|(m, c)| m.is_one() && c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// True when the polynomial is a single term.
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// The unique monomial of a single-term polynomial.
    pub fn as_monomial(&self) -> Option<(&Monomial, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn check_frame(&self, other: &Poly) -> Result<(), AlgebraError> {
        if self.frame == other.frame {
            Ok(())
        } else {
            Err(AlgebraError::FrameMismatch {
                left: self.frame.to_string(),
                right: other.frame.to_string(),
            })
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.frame, other.frame);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = terms.entry(m.clone()).or_insert_with(Q::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Poly { frame: self.frame.clone(), terms }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            frame: self.frame.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.frame, other.frame);
        let mut terms: BTreeMap<Monomial, Q> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let entry = terms.entry(m).or_insert_with(Q::zero);
                *entry += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Poly { frame: self.frame.clone(), terms }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.frame);
        }
        Poly {
            frame: self.frame.clone(),
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            frame: self.frame.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(&self.frame);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative with respect to the variable at `idx`.
    pub fn partial(&self, idx: usize) -> Poly {
        let mut terms: BTreeMap<Monomial, Q> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exp(idx);
            if e == 0 {
                continue;
            }
            let mut exps = m.exps().to_vec();
            exps[idx] -= 1;
            let dm = Monomial::new(exps);
            let entry = terms.entry(dm).or_insert_with(Q::zero);
            *entry += c * q(e as i64);
        }
        terms.retain(|_, c| !c.is_zero());
        Poly { frame: self.frame.clone(), terms }
    }

    /// Value at the chart origin, i.e. the constant term.
    pub fn eval_origin(&self) -> Q {
        self.terms
            .get(&Monomial::one(self.frame.dim()))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    pub fn is_unit_at_origin(&self) -> bool {
        !self.eval_origin().is_zero()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// Smallest total degree of a term (the order at the origin); zero
    /// polynomial reports `None`.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total_degree()).min()
    }

    /// Largest exponent of the variable at `idx` across all terms.
    pub fn degree_in(&self, idx: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(idx)).max().unwrap_or(0)
    }

    /// Smallest exponent of the variable at `idx` across all terms.
    pub fn min_exp_in(&self, idx: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(idx)).min().unwrap_or(0)
    }

    pub fn depends_on(&self, idx: usize) -> bool {
        self.terms.keys().any(|m| m.exp(idx) > 0)
    }

    /// The coefficient of `var^k`, a polynomial in the remaining variables
    /// (still expressed in the full frame).
    pub fn coeff_of_power(&self, idx: usize, k: u32) -> Poly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.exp(idx) == k {
                let mut exps = m.exps().to_vec();
                exps[idx] = 0;
                terms.insert(Monomial::new(exps), c.clone());
            }
        }
        Poly { frame: self.frame.clone(), terms }
    }

    /// Exact division by a monomial; fails if some term is not divisible.
    pub fn div_monomial(&self, m: &Monomial) -> Option<Poly> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            if !m.divides(k) {
                return None;
            }
            terms.insert(k.div(m), c.clone());
        }
        Some(Poly { frame: self.frame.clone(), terms })
    }

    /// Exact division: returns `self / g` when the remainder is zero.
    pub fn div_exact(&self, g: &Poly) -> Option<Poly> {
        debug_assert_eq!(self.frame, g.frame);
        if g.is_zero() {
            return None;
        }
        let (lm, lc) = g.leading_term_grevlex().expect("nonzero divisor");
        let mut rem = self.clone();
        let mut quot = Poly::zero(&self.frame);
        while let Some((rm, rc)) = rem.leading_term_grevlex() {
            if !lm.divides(&rm) {
                return None;
            }
            let qm = rm.div(&lm);
            let qc = rc / lc.clone();
            let t = Poly::monomial(&self.frame, qm, qc);
            rem = rem.sub(&t.mul(g));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    pub fn leading_term_grevlex(&self) -> Option<(Monomial, Q)> {
        self.terms
            .iter()
            .max_by(|a, b| a.0.cmp_grevlex(b.0))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    pub fn leading_term_negdeg(&self) -> Option<(Monomial, Q)> {
        self.terms
            .iter()
            .max_by(|a, b| a.0.cmp_negdeg(b.0))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    /// Discards every term of total degree above `n`.
    pub fn truncate(&self, n: u32) -> Poly {
        Poly {
            frame: self.frame.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.total_degree() <= n)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// The largest monomial in divisor variables dividing every term,
    /// restricted to the given variable indices.
    pub fn common_monomial_factor(&self, var_indices: &[usize]) -> Monomial {
        let mut exps = vec![0u32; self.frame.dim()];
        if self.is_zero() {
            return Monomial::new(exps);
        }
        for &i in var_indices {
            exps[i] = self.min_exp_in(i);
        }
        Monomial::new(exps)
    }

    /// Renames the frame without touching exponents; the new frame must
    /// have the same dimension.
    pub fn reframe(&self, frame: &Frame) -> Poly {
        assert_eq!(frame.dim(), self.frame.dim());
        Poly { frame: frame.clone(), terms: self.terms.clone() }
    }

    /// Substitutes `images[i]` for variable `i`; images live in `target`.
    pub fn substitute(&self, target: &Frame, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.frame.dim());
        let mut acc = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(target, c.clone());
            for (i, img) in images.iter().enumerate() {
                let e = m.exp(i);
                if e > 0 {
                    t = t.mul(&img.pow(e));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Normalizes the sign and content so the grevlex-leading coefficient
    /// is one. Used to canonicalize basis elements.
    pub fn monic_grevlex(&self) -> Poly {
        match self.leading_term_grevlex() {
            None => self.clone(),
            Some((_, c)) => self.scale(&(Q::one() / c)),
        }
    }
}

fn fmt_q(c: &Q) -> String {
    if c.is_integer() {
        format!("{}", c.numer())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // descending grevlex for readability and parse round-trips
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| b.0.cmp_grevlex(a.0));
        for (i, (m, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(fmt_q(&abs));
            }
            for idx in 0..m.dim() {
                let e = m.exp(idx);
                if e == 1 {
                    factors.push(self.frame.name(idx).to_string());
                } else if e > 1 {
                    factors.push(format!("{}^{}", self.frame.name(idx), e));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> Frame {
        Frame::from_names(&["x", "y", "z"])
    }

    fn x() -> Poly {
        Poly::var(&frame(), 0)
    }
    fn y() -> Poly {
        Poly::var(&frame(), 1)
    }
    fn z() -> Poly {
        Poly::var(&frame(), 2)
    }

    #[test]
    fn difference_of_squares() {
        let lhs = x().add(&y()).mul(&x().sub(&y()));
        let rhs = x().mul(&x()).sub(&y().mul(&y()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn partial_derivative_of_example_generator() {
        // d/dy of (y^2 + x z^3 + x^4) = 2y
        let g = y()
            .pow(2)
            .add(&x().mul(&z().pow(3)))
            .add(&x().pow(4));
        assert_eq!(g.partial(1), y().scale(&q(2)));
        assert_eq!(g.eval_origin(), q(0));
    }

    #[test]
    fn exact_division() {
        let g = x().pow(2).sub(&y().pow(2));
        let d = x().sub(&y());
        let q = g.div_exact(&d).unwrap();
        assert_eq!(q, x().add(&y()));
        assert!(g.div_exact(&z()).is_none());
    }

    #[test]
    fn display_round_shape() {
        let p = x().pow(2).scale(&q_frac(3, 2)).sub(&y());
        assert_eq!(p.to_string(), "3/2*x^2 - y");
    }
}
