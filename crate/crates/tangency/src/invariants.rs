//! The tangency sequence H(θ, I, n), the (ν, type) invariant pair,
//! generalized k-Fitting ideals, and the admissibility verdict for
//! blow-up centers.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Frame, Poly};
use crate::foliation::Distribution;
use crate::ideal::{Backend, FGIdeal};

/// Default cap on tangency stages; stabilization is guaranteed by
/// noetherianity but no a-priori bound is available.
pub const DEFAULT_STAGE_BUDGET: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("tangency sequence did not stabilize within {budget} stages")]
    StageBudgetExhausted { budget: usize },
    #[error("tangency stage outgrew the work budget ({detail})")]
    StageSizeExceeded { detail: String },
    #[error("local membership decision outgrew its work budget at stage {stage}")]
    DecisionBudget { stage: usize },
}

/// Caps on stage size; far above anything the worked examples or the
/// property campaigns produce, they turn runaway instances into honest
/// budget failures.
const MAX_STAGE_TERMS: usize = 4000;
const MAX_STAGE_DEGREE: u32 = 96;

/// The computed prefix of the tangency sequence, reduced stage by stage.
#[derive(Clone, Debug)]
pub struct HSequence {
    pub stages: Vec<FGIdeal>,
    pub stabilized_at: Option<usize>,
    pub backend: Backend,
}

impl HSequence {
    pub fn stage(&self, n: usize) -> &FGIdeal {
        &self.stages[n]
    }
}

/// The (ν, type) pair at a chart origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TgInvariant {
    pub nu: usize,
    pub type_: u8,
}

impl TgInvariant {
    pub fn is_type_one(&self) -> bool {
        self.type_ == 1
    }

    /// Lexicographic measure used by the driver: type 2 dominates type 1
    /// at equal ν.
    pub fn measure(&self) -> (usize, u8) {
        (self.nu, if self.type_ == 2 { 1 } else { 0 })
    }
}

impl fmt::Display for TgInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(nu={}, type={})", self.nu, self.type_)
    }
}

/// Computes stages of `H(θ, I, ·)` until stabilization under the backend,
/// or errors out when the budget is exhausted. Each stage is stored with
/// its reduced global basis as the canonical generator list.
pub fn h_sequence(
    theta: &Distribution,
    ideal: &FGIdeal,
    max_stage: usize,
    backend: Backend,
) -> Result<HSequence, InvariantError> {
    assert_eq!(theta.frame(), ideal.frame(), "frame mismatch in tangency sequence");
    let mut stages: Vec<FGIdeal> = Vec::new();
    let normalized = FGIdeal::new(ideal.frame(), ideal.reduced_generators());
    stages.push(normalized);
    for n in 0..max_stage {
        let current = &stages[n];
        let terms: usize = current.generators().iter().map(|g| g.num_terms()).sum();
        let degree = current.generators().iter().map(|g| g.total_degree()).max().unwrap_or(0);
        if std::env::var("TANGENCY_TRACE").is_ok() {
            eprintln!("[hseq] stage {n}: {} gens, {terms} terms, degree {degree}",
                current.generators().len());
        }
        if terms > MAX_STAGE_TERMS || degree > MAX_STAGE_DEGREE {
            return Err(InvariantError::StageSizeExceeded {
                detail: format!("stage {n} has {terms} terms at degree {degree}"),
            });
        }
        // a stage that is already the whole ring stays the whole ring
        if current.contains_one(backend) {
            return Ok(HSequence { stages, stabilized_at: Some(n), backend });
        }
        let derived = theta.apply_ideal(current);
        let stabilized = derived
            .try_contained_in(current, backend)
            .map_err(|_| InvariantError::DecisionBudget { stage: n })?;
        if stabilized {
            return Ok(HSequence { stages, stabilized_at: Some(n), backend });
        }
        let next = current.sum(&derived);
        let next = FGIdeal::new(next.frame(), next.reduced_generators());
        stages.push(next);
    }
    Err(InvariantError::StageBudgetExhausted { budget: max_stage })
}

/// The tg-order and type at the chart origin.
pub fn tg_invariant(
    theta: &Distribution,
    ideal: &FGIdeal,
    max_stage: usize,
    backend: Backend,
) -> Result<TgInvariant, InvariantError> {
    let seq = h_sequence(theta, ideal, max_stage, backend)?;
    let nu = seq.stabilized_at.expect("h_sequence returned without stabilizing");
    let stable = seq.stage(nu);
    let type_ = if stable.contains_one(Backend::Local) { 1 } else { 2 };
    Ok(TgInvariant { nu, type_ })
}

/// How one k-Fitting ideal sits relative to the center ideal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FittingVerdict {
    /// `Γ_k + I_C` is the whole ring (chart-level reading).
    Unit,
    /// `Γ_k ⊆ I_C`.
    Contained,
    Neither,
}

/// Generators and classification of one generalized k-Fitting ideal.
#[derive(Clone, Debug)]
pub struct FittingData {
    pub k: usize,
    pub generators: Vec<Poly>,
    pub verdict: FittingVerdict,
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, start: usize, n: usize, k: usize) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(out, cur, i + 1, n, k);
            cur.pop();
        }
    }
    rec(&mut out, &mut cur, 0, n, k);
    out
}

fn poly_det(m: &[Vec<Poly>], frame: &Frame) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one(frame);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Poly::zero(frame);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter_map(|(c, p)| if c != j { Some(p.clone()) } else { None })
                    .collect()
            })
            .collect();
        let term = m[0][j].mul(&poly_det(&minor, frame));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// The generalized k-Fitting ideal `Γ_{θ,k}(J)`: all k×k determinants of
/// derivatives of generator tuples. Determinants over generator tuples
/// suffice modulo `J` by multilinearity; tuples never repeat a derivation
/// or a generator, and syntactic duplicates are dropped.
pub fn fitting_ideal(theta: &Distribution, ideal: &FGIdeal, k: usize) -> FittingData {
    assert!(k >= 1, "fitting ideals start at k = 1");
    let frame = ideal.frame().clone();
    let d_gens = theta.generators();
    let f_gens = ideal.generators();
    let mut generators: Vec<Poly> = Vec::new();
    if k <= d_gens.len().min(f_gens.len()) {
        for d_tuple in k_subsets(d_gens.len(), k) {
            for f_tuple in k_subsets(f_gens.len(), k) {
                let m: Vec<Vec<Poly>> = d_tuple
                    .iter()
                    .map(|&a| {
                        f_tuple
                            .iter()
                            .map(|&b| d_gens[a].apply_poly(&f_gens[b]))
                            .collect()
                    })
                    .collect();
                let det = poly_det(&m, &frame);
                if !det.is_zero() && !generators.contains(&det) {
                    generators.push(det);
                }
            }
        }
    }
    let gamma = FGIdeal::new(&frame, generators.clone());
    let verdict = if gamma.sum(ideal).contains_one(Backend::Global) {
        FittingVerdict::Unit
    } else if gamma.contained_in(ideal, Backend::Global) {
        FittingVerdict::Contained
    } else {
        FittingVerdict::Neither
    };
    FittingData { k, generators, verdict }
}

/// The admissibility verdict for a center.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    pub k0: Option<usize>,
    /// Failing k together with a display of `Γ_k + I_C` when inadmissible.
    pub witness: Option<(usize, String)>,
}

impl fmt::Display for AdmissibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.admissible {
            write!(f, "admissible (k0={})", self.k0.unwrap_or(0))
        } else {
            match &self.witness {
                Some((k, w)) => write!(f, "not admissible (witness k={k}, {w})"),
                None => write!(f, "not admissible"),
            }
        }
    }
}

/// Decides Def-style θ-admissibility of a center given by its ideal:
/// a cutoff k0 must exist with `Γ_k + I_C` the whole ring for k ≤ k0 and
/// `Γ_k ⊆ I_C` for k > k0. The "whole ring" clause is read chart-level
/// via the reduced global basis.
pub fn check_theta_admissible(theta: &Distribution, center: &FGIdeal) -> AdmissibilityVerdict {
    let k_max = theta.generators().len().min(center.generators().len());
    let data: Vec<FittingData> = (1..=k_max).map(|k| fitting_ideal(theta, center, k)).collect();
    let mut k0 = 0usize;
    for d in &data {
        if d.verdict == FittingVerdict::Unit {
            k0 = d.k;
        } else {
            break;
        }
    }
    for d in &data {
        if d.k <= k0 {
            continue;
        }
        if d.verdict != FittingVerdict::Contained {
            let gamma = FGIdeal::new(center.frame(), d.generators.clone());
            let witness_ideal = gamma.sum(center);
            let reduced = FGIdeal::new(center.frame(), witness_ideal.reduced_generators());
            return AdmissibilityVerdict {
                admissible: false,
                k0: None,
                witness: Some((d.k, format!("{reduced}"))),
            };
        }
    }
    AdmissibilityVerdict { admissible: true, k0: Some(k0), witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;
    use crate::foliation::{Derivation, SNCDivisor};

    fn xyz() -> Frame {
        Frame::from_names(&["x", "y", "z"])
    }

    fn dy_dz(frame: &Frame) -> Distribution {
        Distribution::new(
            frame,
            vec![Derivation::coordinate(frame, 1), Derivation::coordinate(frame, 2)],
            SNCDivisor::empty(),
        )
    }

    #[test]
    fn tangency_sequence_of_worked_example() {
        // θ = (d/dy, d/dz), I = (y^2 + x z^3 + x^4):
        // H(1) ~ (y, x z^2, x^4), H(2) = (1)
        let f = xyz();
        let theta = dy_dz(&f);
        let x = Poly::var(&f, 0);
        let y = Poly::var(&f, 1);
        let z = Poly::var(&f, 2);
        let g = y.pow(2).add(&x.mul(&z.pow(3))).add(&x.pow(4));
        let i = FGIdeal::new(&f, vec![g]);
        let seq = h_sequence(&theta, &i, DEFAULT_STAGE_BUDGET, Backend::Local).unwrap();
        assert_eq!(seq.stabilized_at, Some(2));
        let h1 = FGIdeal::new(&f, vec![y.clone(), x.mul(&z.pow(2)), x.pow(4)]);
        assert!(seq.stage(1).equals(&h1, Backend::Global));
        assert!(seq.stage(1).equals(&h1, Backend::Local));
        assert!(seq.stage(2).contains_one(Backend::Global));
        let tg = tg_invariant(&theta, &i, DEFAULT_STAGE_BUDGET, Backend::Local).unwrap();
        assert_eq!(tg, TgInvariant { nu: 2, type_: 1 });
    }

    #[test]
    fn tangency_sequence_with_drift_field() {
        // θ = (d/dx + x d/dz), I = (y, z): H(1) = (x, y, z), H(2) = (1)
        let f = xyz();
        let d = Derivation::new(
            &f,
            vec![
                crate::algebra::LocalElement::one(&f),
                crate::algebra::LocalElement::zero(&f),
                crate::algebra::LocalElement::from_poly(Poly::var(&f, 0)),
            ],
        );
        let theta = Distribution::new(&f, vec![d], SNCDivisor::empty());
        let i = FGIdeal::new(&f, vec![Poly::var(&f, 1), Poly::var(&f, 2)]);
        let seq = h_sequence(&theta, &i, DEFAULT_STAGE_BUDGET, Backend::Local).unwrap();
        let h1 = FGIdeal::new(&f, vec![Poly::var(&f, 0), Poly::var(&f, 1), Poly::var(&f, 2)]);
        assert!(seq.stage(1).equals(&h1, Backend::Global));
        assert_eq!(seq.stabilized_at, Some(2));
        let tg = tg_invariant(&theta, &i, DEFAULT_STAGE_BUDGET, Backend::Local).unwrap();
        assert_eq!(tg, TgInvariant { nu: 2, type_: 1 });
    }

    #[test]
    fn immediate_stabilization_without_unit() {
        // θ = (d/dz) annihilates (x^2 y, x y^2)
        let f = xyz();
        let theta = Distribution::new(&f, vec![Derivation::coordinate(&f, 2)], SNCDivisor::empty());
        let x = Poly::var(&f, 0);
        let y = Poly::var(&f, 1);
        let i = FGIdeal::new(&f, vec![x.pow(2).mul(&y), x.mul(&y.pow(2))]);
        let tg = tg_invariant(&theta, &i, DEFAULT_STAGE_BUDGET, Backend::Local).unwrap();
        assert_eq!(tg, TgInvariant { nu: 0, type_: 2 });
    }

    #[test]
    fn monotone_stages() {
        let f = xyz();
        let theta = dy_dz(&f);
        let x = Poly::var(&f, 0);
        let y = Poly::var(&f, 1);
        let z = Poly::var(&f, 2);
        let g = y.pow(2).add(&x.mul(&z.pow(3))).add(&x.pow(4));
        let i = FGIdeal::new(&f, vec![g]);
        let seq = h_sequence(&theta, &i, DEFAULT_STAGE_BUDGET, Backend::Local).unwrap();
        for n in 0..seq.stages.len() - 1 {
            assert!(seq.stage(n).contained_in(seq.stage(n + 1), Backend::Global));
        }
    }

    #[test]
    fn fitting_ideals_of_coordinate_center() {
        // θ = (d/dx, d/dy), center (x, z): Γ_1 unit, Γ_2 zero
        let f = xyz();
        let theta = Distribution::new(
            &f,
            vec![Derivation::coordinate(&f, 0), Derivation::coordinate(&f, 1)],
            SNCDivisor::empty(),
        );
        let center = FGIdeal::new(&f, vec![Poly::var(&f, 0), Poly::var(&f, 2)]);
        let g1 = fitting_ideal(&theta, &center, 1);
        assert_eq!(g1.verdict, FittingVerdict::Unit);
        let g2 = fitting_ideal(&theta, &center, 2);
        assert!(g2.generators.is_empty());
        assert_eq!(g2.verdict, FittingVerdict::Contained);
        let verdict = check_theta_admissible(&theta, &center);
        assert!(verdict.admissible);
        assert_eq!(verdict.k0, Some(1));
    }

    #[test]
    fn non_admissible_parabola_center() {
        // θ = (d/dx, d/dy), center (x^2 - z, y): Γ_2 contains 2x
        let f = xyz();
        let theta = Distribution::new(
            &f,
            vec![Derivation::coordinate(&f, 0), Derivation::coordinate(&f, 1)],
            SNCDivisor::empty(),
        );
        let x = Poly::var(&f, 0);
        let center = FGIdeal::new(
            &f,
            vec![x.pow(2).sub(&Poly::var(&f, 2)), Poly::var(&f, 1)],
        );
        let g2 = fitting_ideal(&theta, &center, 2);
        assert_eq!(g2.verdict, FittingVerdict::Neither);
        let two_x = x.scale(&q(2));
        assert!(g2.generators.contains(&two_x));
        // the witness ideal is (x, y, z)
        let gamma_plus = FGIdeal::new(&f, g2.generators.clone()).sum(&center);
        let xyz_ideal = FGIdeal::new(
            &f,
            vec![Poly::var(&f, 0), Poly::var(&f, 1), Poly::var(&f, 2)],
        );
        assert!(gamma_plus.equals(&xyz_ideal, Backend::Global));
        let verdict = check_theta_admissible(&theta, &center);
        assert!(!verdict.admissible);
        assert_eq!(verdict.witness.as_ref().unwrap().0, 2);
    }

    #[test]
    fn invariant_center_is_admissible_with_k0_zero() {
        let f = xyz();
        let theta = Distribution::new(
            &f,
            vec![Derivation::diagonal(&f, &[q(1), q(-1), q(0)])],
            SNCDivisor::empty(),
        );
        let center = FGIdeal::new(&f, vec![Poly::var(&f, 0), Poly::var(&f, 1)]);
        let verdict = check_theta_admissible(&theta, &center);
        assert!(verdict.admissible);
        assert_eq!(verdict.k0, Some(0));
    }
}
