use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// An exponent vector, one entry per variable of the ambient frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn one(dim: usize) -> Self {
        Monomial { exps: vec![0; dim] }
    }

    pub fn var(idx: usize, dim: usize) -> Self {
        let mut exps = vec![0; dim];
        exps[idx] = 1;
        Monomial { exps }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn exp(&self, idx: usize) -> u32 {
        self.exps[idx]
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.dim(), other.dim());
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// Componentwise quotient; caller must ensure `self.divides(other)`.
    pub fn div(&self, other: &Monomial) -> Monomial {
        debug_assert!(other.divides(self));
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| *a.max(b))
                .collect(),
        }
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| *a.min(b))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Monomial {
        Monomial { exps: self.exps.iter().map(|a| a * k).collect() }
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Degree-reverse-lexicographic comparison (the global ordering).
    pub fn cmp_grevlex(&self, other: &Monomial) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // same degree: the monomial with the smaller exponent in the last
        // differing variable is larger
        for i in (0..self.exps.len()).rev() {
            match self.exps[i].cmp(&other.exps[i]) {
                Ordering::Equal => {}
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
            }
        }
        Ordering::Equal
    }

    /// Negative-degree comparison (the local ordering): lower total degree
    /// is larger, ties broken reverse-lexicographically.
    pub fn cmp_negdeg(&self, other: &Monomial) -> Ordering {
        match other.total_degree().cmp(&self.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for i in (0..self.exps.len()).rev() {
            match self.exps[i].cmp(&other.exps[i]) {
                Ordering::Equal => {}
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(e: &[u32]) -> Monomial {
        Monomial::new(e.to_vec())
    }

    #[test]
    fn divisibility() {
        assert!(m(&[1, 0]).divides(&m(&[2, 3])));
        assert!(!m(&[1, 4]).divides(&m(&[2, 3])));
        assert_eq!(m(&[2, 3]).div(&m(&[1, 0])), m(&[1, 3]));
    }

    #[test]
    fn grevlex_order() {
        // x^2 > xy > y^2 at equal degree; higher degree always wins
        assert_eq!(m(&[2, 0]).cmp_grevlex(&m(&[1, 1])), Ordering::Greater);
        assert_eq!(m(&[1, 1]).cmp_grevlex(&m(&[0, 2])), Ordering::Greater);
        assert_eq!(m(&[1, 1]).cmp_grevlex(&m(&[1, 0])), Ordering::Greater);
    }

    #[test]
    fn negdeg_order_prefers_low_degree() {
        assert_eq!(m(&[1, 0]).cmp_negdeg(&m(&[2, 0])), Ordering::Greater);
        assert_eq!(m(&[2, 0]).cmp_negdeg(&m(&[1, 1])), Ordering::Greater);
    }
}
