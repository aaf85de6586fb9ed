use num::{One, Zero};

use super::poly::{Poly, Q};
use super::AlgebraError;

/// A polynomial truncated to total degree at most `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet {
    poly: Poly,
    order: u32,
}

impl Jet {
    pub fn new(poly: Poly, order: u32) -> Self {
        Jet { poly: poly.truncate(order), order }
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        Jet::new(self.poly.add(&other.poly), order)
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        Jet::new(self.poly.mul(&other.poly), order)
    }
}

/// Degree-`n` truncation of the series inverse of a unit polynomial.
///
/// Uses the geometric series for 1/(c + h) = (1/c) * sum (-h/c)^k, which
/// terminates because h has positive order.
pub fn jet_inverse(u: &Poly, n: u32) -> Result<Jet, AlgebraError> {
    let c = u.eval_origin();
    if c.is_zero() {
        return Err(AlgebraError::NotAUnit { value: u.to_string() });
    }
    let frame = u.frame().clone();
    let c_inv = Q::one() / c.clone();
    let h = u.sub(&Poly::constant(&frame, c)).scale(&c_inv);
    // now u * c_inv = 1 + h with ord(h) >= 1
    let mut acc = Poly::one(&frame);
    let mut pw = Poly::one(&frame);
    for _ in 0..n {
        pw = pw.mul(&h).neg().truncate(n);
        if pw.is_zero() {
            break;
        }
        acc = acc.add(&pw);
    }
    Ok(Jet::new(acc.scale(&c_inv), n))
}
