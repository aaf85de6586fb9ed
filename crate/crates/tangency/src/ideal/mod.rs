//! Finitely generated ideals with decidable membership in the polynomial
//! ring (Buchberger), the local ring at the origin (Mora), and the jet
//! ring (linear algebra, the independent oracle).

pub mod division;
pub mod groebner;
pub mod jet_oracle;
pub mod mora;

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::algebra::{Frame, LocalElement, Poly};

pub use jet_oracle::{jet_member, JetSpace};
pub use mora::{MoraBudgetExceeded, DEFAULT_MORA_BUDGET};

/// Which ring the membership question is asked in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    /// Polynomial ring, degree-reverse-lexicographic Gröbner basis.
    Global,
    /// Local ring at the origin, Mora standard basis.
    Local,
    /// Modulo total degree N+1, by exact linear algebra.
    Jet(u32),
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Local
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Global => write!(f, "global"),
            Backend::Local => write!(f, "local"),
            Backend::Jet(n) => write!(f, "jet:{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisOrdering {
    /// Degree-reverse-lexicographic.
    Global,
    /// Negative-degree (local).
    Local,
}

/// Cached basis data for one ordering.
#[derive(Clone, Debug)]
pub struct BasisData {
    pub ordering: BasisOrdering,
    pub basis: Vec<Poly>,
    pub reduced: bool,
    /// For the global ordering: each basis element as a combination of the
    /// original generators.
    pub cofactors: Option<Vec<Vec<Poly>>>,
}

/// A finitely generated ideal over a fixed frame. Zero generators are
/// dropped and duplicates removed; basis computations fill per-ordering
/// caches that concurrent readers can share.
#[derive(Debug)]
pub struct FGIdeal {
    frame: Frame,
    generators: Vec<Poly>,
    global_cache: OnceLock<BasisData>,
    local_cache: OnceLock<Result<BasisData, MoraBudgetExceeded>>,
}

impl Clone for FGIdeal {
    fn clone(&self) -> Self {
        FGIdeal {
            frame: self.frame.clone(),
            generators: self.generators.clone(),
            global_cache: OnceLock::new(),
            local_cache: OnceLock::new(),
        }
    }
}

impl PartialEq for FGIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.frame == other.frame && self.generators == other.generators
    }
}

impl FGIdeal {
    pub fn new(frame: &Frame, gens: Vec<Poly>) -> Self {
        let mut cleaned: Vec<Poly> = Vec::new();
        for g in gens {
            assert_eq!(g.frame(), frame, "generator frame mismatch");
            if g.is_zero() || cleaned.contains(&g) {
                continue;
            }
            cleaned.push(g);
        }
        FGIdeal {
            frame: frame.clone(),
            generators: cleaned,
            global_cache: OnceLock::new(),
            local_cache: OnceLock::new(),
        }
    }

    pub fn zero(frame: &Frame) -> Self {
        FGIdeal::new(frame, Vec::new())
    }

    pub fn unit(frame: &Frame) -> Self {
        FGIdeal::new(frame, vec![Poly::one(frame)])
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn is_zero(&self) -> bool {
        self.generators.is_empty()
    }

    /// Reduced Gröbner basis under the global ordering.
    pub fn groebner(&self) -> &BasisData {
        self.global_cache.get_or_init(|| {
            let tracked = groebner::groebner_basis(&self.frame, &self.generators);
            BasisData {
                ordering: BasisOrdering::Global,
                basis: tracked.iter().map(|t| t.poly.clone()).collect(),
                reduced: true,
                cofactors: Some(tracked.into_iter().map(|t| t.cofactors).collect()),
            }
        })
    }

    /// Standard basis under the negative-degree local ordering. Each
    /// generator is first normalized by its unit cofactor: a generator of
    /// the shape monomial-times-unit spans the same stalk ideal as the
    /// monomial alone, and Mora runs much faster on the latter. Rational
    /// coefficient growth can exhaust the work budget, reported as an
    /// error rather than a hang.
    pub fn try_local_standard_basis(&self) -> Result<&BasisData, MoraBudgetExceeded> {
        self.local_cache
            .get_or_init(|| {
                let normalized: Vec<Poly> = self
                    .generators
                    .iter()
                    .map(|g| {
                        let all: Vec<usize> = (0..self.frame.dim()).collect();
                        let m = g.common_monomial_factor(&all);
                        let h = g.div_monomial(&m).expect("content divides");
                        if h.is_unit_at_origin() {
                            Poly::monomial(&self.frame, m, num::One::one())
                        } else {
                            g.clone()
                        }
                    })
                    .collect();
                Ok(BasisData {
                    ordering: BasisOrdering::Local,
                    basis: mora::standard_basis(&self.frame, &normalized, DEFAULT_MORA_BUDGET)?,
                    reduced: true,
                    cofactors: None,
                })
            })
            .as_ref()
            .map_err(|e| *e)
    }

    /// Panicking convenience for contexts known to stay small.
    pub fn local_standard_basis(&self) -> &BasisData {
        self.try_local_standard_basis().expect("local standard basis budget")
    }

    /// Membership of `f` under the chosen ring semantics, reporting a
    /// budget failure when the local decision procedure outgrows its work
    /// bound.
    pub fn try_contains(&self, f: &Poly, backend: Backend) -> Result<bool, MoraBudgetExceeded> {
        assert_eq!(f.frame(), &self.frame, "membership frame mismatch");
        if f.is_zero() {
            return Ok(true);
        }
        if self.generators.is_empty() {
            return Ok(false);
        }
        match backend {
            Backend::Global => {
                let gb = self.groebner();
                Ok(division::normal_form(f, &gb.basis).is_zero())
            }
            Backend::Local => {
                // membership in the polynomial ideal is sufficient and the
                // global basis is usually much cheaper on fat inputs; Mora
                // decides the genuinely local leftovers
                let gb = self.groebner();
                if division::normal_form(f, &gb.basis).is_zero() {
                    return Ok(true);
                }
                let sb = self.try_local_standard_basis()?;
                mora::local_member(f, &sb.basis, DEFAULT_MORA_BUDGET)
            }
            Backend::Jet(n) => Ok(jet_member(f, &self.generators, n)),
        }
    }

    /// Membership of `f` under the chosen ring semantics.
    pub fn contains(&self, f: &Poly, backend: Backend) -> bool {
        self.try_contains(f, backend).expect("membership decision budget")
    }

    /// Membership with an explicit cofactor certificate, re-verified by
    /// ring arithmetic before returning. Only the exact backends produce
    /// certificates.
    pub fn contains_with_certificate(&self, f: &Poly, backend: Backend) -> Option<Vec<LocalElement>> {
        assert_eq!(f.frame(), &self.frame);
        match backend {
            Backend::Global => {
                let gb = self.groebner().clone();
                let (qs, rem) = division::divide(f, &gb.basis);
                if !rem.is_zero() {
                    return None;
                }
                // fold through the basis certificates back to the generators
                let cof_tables = gb.cofactors.as_ref().unwrap();
                let mut out = vec![Poly::zero(&self.frame); self.generators.len()];
                for (qi, table) in qs.iter().zip(cof_tables) {
                    for (acc, c) in out.iter_mut().zip(table) {
                        *acc = acc.add(&qi.mul(c));
                    }
                }
                let mut check = Poly::zero(&self.frame);
                for (c, g) in out.iter().zip(&self.generators) {
                    check = check.add(&c.mul(g));
                }
                if check != *f {
                    return None;
                }
                Some(out.into_iter().map(LocalElement::from_poly).collect())
            }
            Backend::Local => {
                // certificates must come out in the original generators,
                // so run Mora on the raw basis rather than the normalized
                // cache; budget failures surface as a missing certificate
                let basis =
                    mora::standard_basis(&self.frame, &self.generators, DEFAULT_MORA_BUDGET)
                        .ok()?;
                if basis.is_empty() {
                    return if f.is_zero() {
                        Some(vec![LocalElement::zero(&self.frame); self.generators.len()])
                    } else {
                        None
                    };
                }
                let wnf = mora::mora_normal_form(f, &basis, DEFAULT_MORA_BUDGET);
                if !wnf.nf.is_zero() {
                    return None;
                }
                // unit * f = sum cof_j * sb_j, and each sb_j is itself a
                // combination of the generators obtained by re-dividing.
                let unit = LocalElement::from_poly(wnf.unit.clone());
                let unit_inv = unit.inverse().ok()?;
                let mut out = vec![LocalElement::zero(&self.frame); self.generators.len()];
                for (cj, sj) in wnf.gen_cofs.iter().zip(&basis) {
                    // express sj in the original generators via the global
                    // certificate machinery (valid locally as well)
                    let cert = self.contains_with_certificate(sj, Backend::Global)?;
                    for (acc, gj) in out.iter_mut().zip(cert) {
                        *acc = acc.add(&gj.mul_poly(cj));
                    }
                }
                for acc in out.iter_mut() {
                    *acc = acc.mul(&unit_inv);
                }
                // re-verify: f == sum out_j * g_j in the local ring
                let mut check = LocalElement::zero(&self.frame);
                for (c, g) in out.iter().zip(&self.generators) {
                    check = check.add(&c.mul_poly(g));
                }
                if check != LocalElement::from_poly(f.clone()) {
                    return None;
                }
                Some(out)
            }
            Backend::Jet(_) => None,
        }
    }

    /// Whether the ideal is the whole ring under the backend semantics.
    /// Locally this is decided by a unit generator; globally by the
    /// reduced basis being `{1}`.
    pub fn contains_one(&self, backend: Backend) -> bool {
        match backend {
            Backend::Local => self.generators.iter().any(|g| g.is_unit_at_origin()),
            Backend::Global => {
                let gb = self.groebner();
                gb.basis.len() == 1 && gb.basis[0].is_one()
            }
            Backend::Jet(n) => jet_member(&Poly::one(&self.frame), &self.generators, n),
        }
    }

    pub fn equals(&self, other: &FGIdeal, backend: Backend) -> bool {
        assert_eq!(self.frame, other.frame);
        self.generators.iter().all(|g| other.contains(g, backend))
            && other.generators.iter().all(|g| self.contains(g, backend))
    }

    /// Containment `self ⊆ other` under the backend.
    pub fn contained_in(&self, other: &FGIdeal, backend: Backend) -> bool {
        assert_eq!(self.frame, other.frame);
        self.generators.iter().all(|g| other.contains(g, backend))
    }

    /// Budget-aware containment.
    pub fn try_contained_in(
        &self,
        other: &FGIdeal,
        backend: Backend,
    ) -> Result<bool, MoraBudgetExceeded> {
        assert_eq!(self.frame, other.frame);
        for g in &self.generators {
            if !other.try_contains(g, backend)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sum(&self, other: &FGIdeal) -> FGIdeal {
        assert_eq!(self.frame, other.frame);
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        FGIdeal::new(&self.frame, gens)
    }

    pub fn product(&self, other: &FGIdeal) -> FGIdeal {
        assert_eq!(self.frame, other.frame);
        let mut gens = Vec::new();
        for a in &self.generators {
            for b in &other.generators {
                gens.push(a.mul(b));
            }
        }
        FGIdeal::new(&self.frame, gens)
    }

    /// Canonical generator list: the reduced global basis.
    pub fn reduced_generators(&self) -> Vec<Poly> {
        self.groebner().basis.clone()
    }

    /// Every generator is a single term.
    pub fn is_monomial_ideal(&self) -> bool {
        self.generators.iter().all(|g| g.is_monomial())
    }

    /// Substitutes through a chart map, generator by generator.
    pub fn substitute(&self, subst: &crate::algebra::Substitution) -> FGIdeal {
        let gens = self.generators.iter().map(|g| subst.apply(g)).collect();
        FGIdeal::new(&subst.target, gens)
    }
}

impl fmt::Display for FGIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Frame;

    fn xyz() -> (Frame, Poly, Poly, Poly) {
        let f = Frame::from_names(&["x", "y", "z"]);
        (f.clone(), Poly::var(&f, 0), Poly::var(&f, 1), Poly::var(&f, 2))
    }

    #[test]
    fn tangency_stage_basis_from_worked_example() {
        // H(θ,I,1) for n=3: (y^2 + x z^3 + x^4, 2y, 3x z^2) generates the
        // same ideal as (y, x z^2, x^4)
        let (f, x, y, z) = xyz();
        let g = y.pow(2).add(&x.mul(&z.pow(3))).add(&x.pow(4));
        let h1 = FGIdeal::new(&f, vec![g, y.scale(&crate::algebra::q(2)), x.mul(&z.pow(2)).scale(&crate::algebra::q(3))]);
        let target = FGIdeal::new(&f, vec![y.clone(), x.mul(&z.pow(2)), x.pow(4)]);
        assert!(h1.equals(&target, Backend::Global));
        assert!(h1.equals(&target, Backend::Local));
    }

    #[test]
    fn unit_ideal_detection() {
        let (f, x, _, _) = xyz();
        let i = FGIdeal::new(&f, vec![x.clone(), Poly::one(&f).sub(&x)]);
        assert!(i.contains_one(Backend::Global));
        // at the origin 1-x is already a unit
        assert!(i.contains_one(Backend::Local));
        let j = FGIdeal::new(&f, vec![x.pow(2)]);
        assert!(!j.contains_one(Backend::Global));
        assert!(!j.contains_one(Backend::Local));
    }

    #[test]
    fn local_vs_global_membership_split() {
        let (f, x, _, _) = xyz();
        let i = FGIdeal::new(&f, vec![x.add(&x.pow(2))]);
        assert!(!i.contains(&x, Backend::Global));
        assert!(i.contains(&x, Backend::Local));
        assert!(i.contains(&x, Backend::Jet(5)));
    }

    #[test]
    fn membership_certificates_verify() {
        let (f, x, y, _) = xyz();
        let i = FGIdeal::new(&f, vec![x.pow(2), x.mul(&y)]);
        let target = x.pow(3).add(&x.pow(2).mul(&y));
        let cert = i.contains_with_certificate(&target, Backend::Global).unwrap();
        assert_eq!(cert.len(), 2);
        let loc = FGIdeal::new(&f, vec![x.add(&x.pow(2))]);
        let cert = loc.contains_with_certificate(&x, Backend::Local);
        assert!(cert.is_some());
    }

    #[test]
    fn ideal_equality_local_backend() {
        let (f, x, y, _) = xyz();
        let a = FGIdeal::new(&f, vec![x.clone(), y.clone()]);
        let b = FGIdeal::new(&f, vec![y.clone(), x.add(&y.pow(2))]);
        assert!(a.equals(&b, Backend::Local));
        assert!(a.equals(&b, Backend::Global));
    }
}
