use num::One;

use crate::algebra::{LocalElement, Monomial, Poly, Q, Substitution};
use crate::blowup::{
    blowup_charts, center_in_support, principalize_monomial, transform_distribution,
    transform_ideal, BlowupChart, Center, TransformKind,
};
use crate::foliation::{check_monomial_form, invariant_generators, Derivation, Distribution};
use crate::ideal::{Backend, FGIdeal};
use crate::invariants::{check_theta_admissible, h_sequence, tg_invariant};

use super::tree::{ChartState, ChartTree, Edge, EdgeKind, Step3Data};
use super::wt::{prepare_check, weierstrass_form, PreparedForm, WTOutcome};
use super::{ResolveError, ResolveOptions};

/// Smallest variable dividing every generator, with the full power it
/// divides by.
pub(super) fn common_variable(ideal: &FGIdeal) -> Option<(usize, u32)> {
    if ideal.is_zero() {
        return None;
    }
    let dim = ideal.frame().dim();
    (0..dim).find_map(|x| {
        let k = ideal
            .generators()
            .iter()
            .map(|g| g.min_exp_in(x))
            .min()
            .unwrap_or(0);
        if k >= 1 {
            Some((x, k))
        } else {
            None
        }
    })
}

/// Shrinks a distribution into the log fields of an enlarged divisor
/// after a new component appears. On a recognized monomial form this is
/// exact: the normalized basis consists of coordinate and diagonal
/// fields, and only the coordinate field of the marked direction changes,
/// becoming the radial field. Unrecognized generators fall back to
/// per-generator forcing with a warning.
fn shrink_to_divisor(theta: &Distribution, state_frame: &crate::algebra::Frame, var: usize) -> (Vec<Derivation>, Vec<String>) {
    let mut warnings = Vec::new();
    let divisor = crate::foliation::SNCDivisor::from_frame(state_frame);
    let base: Vec<Derivation> = match check_monomial_form(theta) {
        v if v.is_monomial() => v.form().unwrap().basis.clone(),
        _ => theta.generators().to_vec(),
    };
    let gens = base
        .iter()
        .map(|g| {
            let g = g.reframe(state_frame);
            if g.is_tangent_to(&divisor) {
                return g;
            }
            // pure d/dvar turns into var d/dvar
            let coeff = g.coeff(var).clone();
            let pure = g
                .coeffs()
                .iter()
                .enumerate()
                .all(|(i, c)| if i == var { true } else { c.is_zero() });
            if pure {
                let mut alpha = vec![Q::from_integer(0.into()); state_frame.dim()];
                alpha[var] = Q::one();
                return Derivation::diagonal(state_frame, &alpha).mul_local(&coeff);
            }
            warnings.push(format!("generator {g} forced tangent to the marked divisor"));
            g.mul_poly(&Poly::var(state_frame, var))
        })
        .collect();
    (gens, warnings)
}

/// Applies a codimension-one divisor marking: flags the variable, divides
/// the ideal by `var^times`, and keeps the distribution log-adapted.
pub(super) fn apply_mark(
    tree: &mut ChartTree,
    node: usize,
    var: usize,
    times: u32,
    phase: &str,
) -> Result<usize, ResolveError> {
    let state = tree.nodes[node].state.clone();
    let frame = if state.frame.is_exceptional(var) {
        state.frame.clone()
    } else {
        state.frame.mark_exceptional(var)
    };
    let admissibility = if times > 0 || !state.frame.is_exceptional(var) {
        Some(check_theta_admissible(
            &state.theta,
            &FGIdeal::new(&state.frame, vec![Poly::var(&state.frame, var)]),
        ))
    } else {
        None
    };
    if let Some(v) = &admissibility {
        if !v.admissible {
            return Err(ResolveError::Internal(format!(
                "divisor marking of {} is not admissible: {v}",
                state.frame.name(var)
            )));
        }
    }
    let x_pow = Monomial::var(var, frame.dim()).pow(times);
    let gens = state
        .ideal
        .generators()
        .iter()
        .map(|g| {
            g.reframe(&frame).div_monomial(&x_pow).ok_or_else(|| {
                ResolveError::Internal(format!(
                    "marking division by {}^{times} failed on {g}",
                    frame.name(var)
                ))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ideal = FGIdeal::new(&frame, gens);
    let (theta_gens, warnings) = shrink_to_divisor(&state.theta, &frame, var);
    let theta = Distribution::new_unchecked(&frame, theta_gens, crate::foliation::SNCDivisor::from_frame(&frame));
    let factor = state.pullback_factor.mul(&x_pow);
    let declared_units = state
        .declared_units
        .iter()
        .map(|u| {
            LocalElement::new(u.num().reframe(&frame), u.den().reframe(&frame))
                .expect("denominator unchanged")
        })
        .collect();
    let new_state = ChartState {
        frame: frame.clone(),
        theta,
        ideal,
        pullback_factor: factor,
        declared_units,
        local_only: state.local_only,
    };
    let subst = Substitution::new(
        state.frame.clone(),
        frame.clone(),
        (0..frame.dim()).map(|i| Poly::var(&frame, i)).collect(),
    );
    let id = tree.push_child(
        node,
        new_state,
        subst,
        Edge { kind: EdgeKind::DivisorMark { var, times }, admissibility },
        phase,
    );
    tree.nodes[id].warnings.extend(warnings);
    Ok(id)
}

/// Applies one blow-up chart to the carried state, following the
/// transform dichotomy: birational when the center lies in the support
/// of the current ideal, total otherwise.
pub(super) fn apply_blowup_chart(
    tree: &mut ChartTree,
    node: usize,
    chart: &BlowupChart,
    phase: &str,
) -> Result<usize, ResolveError> {
    let state = tree.nodes[node].state.clone();
    let kind = if center_in_support(&state.ideal, &chart.center) {
        TransformKind::Birational
    } else {
        TransformKind::Total
    };
    let admissibility = check_theta_admissible(&state.theta, &chart.center.ideal(&state.frame));
    let ideal = transform_ideal(&state.ideal, chart, kind)?;
    let dt = transform_distribution(&state.theta, chart);
    let factor_poly = Poly::monomial(&state.frame, state.pullback_factor.clone(), Q::one());
    let mut factor = chart
        .subst
        .apply(&factor_poly)
        .as_monomial()
        .map(|(m, _)| m.clone())
        .expect("monomial pullback of a monomial");
    if kind == TransformKind::Birational {
        factor = factor.mul(&Monomial::var(chart.chart_var, chart.child_frame.dim()));
    }
    let declared_units = state
        .declared_units
        .iter()
        .map(|u| chart.subst.apply_local(u).expect("unit denominators survive"))
        .collect();
    let new_state = ChartState {
        frame: chart.child_frame.clone(),
        theta: dt.distribution,
        ideal,
        pullback_factor: factor,
        declared_units,
        local_only: state.local_only,
    };
    let id = tree.push_child(
        node,
        new_state,
        chart.subst.clone(),
        Edge {
            kind: EdgeKind::Blowup {
                center: chart.center.vars().to_vec(),
                chart_var: chart.chart_var,
                transform: kind,
            },
            admissibility: Some(admissibility),
        },
        phase,
    );
    tree.nodes[id].warnings.extend(dt.warnings);
    Ok(id)
}

/// Applies a polynomial automorphism given by the new coordinates as
/// functions of the old ones and the inverse substitution.
fn apply_automorphism(
    tree: &mut ChartTree,
    node: usize,
    new_in_old: &[Poly],
    old_in_new: Substitution,
    kind: EdgeKind,
    phase: &str,
) -> Result<usize, ResolveError> {
    let state = tree.nodes[node].state.clone();
    let frame = state.frame.clone();
    let ideal = FGIdeal::new(
        &frame,
        state.ideal.generators().iter().map(|g| old_in_new.apply(g)).collect(),
    );
    let theta_gens = state
        .theta
        .generators()
        .iter()
        .map(|d| {
            let coeffs = (0..frame.dim())
                .map(|j| {
                    let mut acc = LocalElement::zero(&frame);
                    for (i, c) in d.coeffs().iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let dji = new_in_old[j].partial(i);
                        if dji.is_zero() {
                            continue;
                        }
                        acc = acc.add(&c.mul_poly(&dji));
                    }
                    old_in_new.apply_local(&acc).expect("automorphism preserves the origin")
                })
                .collect();
            Derivation::new(&frame, coeffs)
        })
        .collect();
    let theta = Distribution::new_unchecked(
        &frame,
        theta_gens,
        crate::foliation::SNCDivisor::from_frame(&frame),
    );
    let declared_units = state
        .declared_units
        .iter()
        .map(|u| old_in_new.apply_local(u).expect("origin fixed"))
        .collect();
    let new_state = ChartState {
        frame,
        theta,
        ideal,
        pullback_factor: state.pullback_factor.clone(),
        declared_units,
        local_only: state.local_only,
    };
    Ok(tree.push_child(node, new_state, old_in_new, Edge { kind, admissibility: None }, phase))
}

/// Tschirnhaus shift edge: the distinguished variable absorbs a `v`-free
/// polynomial.
pub(super) fn apply_shift(
    tree: &mut ChartTree,
    node: usize,
    var: usize,
    phi: &Poly,
) -> Result<usize, ResolveError> {
    let frame = tree.nodes[node].state.frame.clone();
    assert!(!phi.depends_on(var), "shift must be free of the shifted variable");
    let new_in_old: Vec<Poly> = (0..frame.dim())
        .map(|i| {
            if i == var {
                Poly::var(&frame, i).add(phi)
            } else {
                Poly::var(&frame, i)
            }
        })
        .collect();
    let images: Vec<Poly> = (0..frame.dim())
        .map(|i| {
            if i == var {
                Poly::var(&frame, i).sub(phi)
            } else {
                Poly::var(&frame, i)
            }
        })
        .collect();
    let old_in_new = Substitution::new(frame.clone(), frame.clone(), images);
    apply_automorphism(
        tree,
        node,
        &new_in_old,
        old_in_new,
        EdgeKind::Shift { var, by: phi.clone() },
        "wt-shift",
    )
}

/// Linear shear edge making `d/d(kept) + factor d/d(absorbed)` a
/// coordinate field.
pub(super) fn apply_shear(
    tree: &mut ChartTree,
    node: usize,
    kept: usize,
    absorbed: usize,
    factor: &Q,
) -> Result<usize, ResolveError> {
    let frame = tree.nodes[node].state.frame.clone();
    let new_in_old: Vec<Poly> = (0..frame.dim())
        .map(|i| {
            if i == absorbed {
                Poly::var(&frame, i).sub(&Poly::var(&frame, kept).scale(factor))
            } else {
                Poly::var(&frame, i)
            }
        })
        .collect();
    let images: Vec<Poly> = (0..frame.dim())
        .map(|i| {
            if i == absorbed {
                Poly::var(&frame, i).add(&Poly::var(&frame, kept).scale(factor))
            } else {
                Poly::var(&frame, i)
            }
        })
        .collect();
    let old_in_new = Substitution::new(frame.clone(), frame.clone(), images);
    apply_automorphism(
        tree,
        node,
        &new_in_old,
        old_in_new,
        EdgeKind::Shear { kept, absorbed, factor: factor.clone() },
        "wt-shear",
    )
}

fn minimal_monomials(ideal: &FGIdeal) -> Vec<Monomial> {
    let mut mons: Vec<Monomial> = ideal
        .generators()
        .iter()
        .filter_map(|g| g.as_monomial().map(|(m, _)| m.clone()))
        .collect();
    mons.sort();
    mons.dedup();
    let keep: Vec<Monomial> = mons
        .iter()
        .filter(|m| !mons.iter().any(|o| o != *m && o.divides(m)))
        .cloned()
        .collect();
    keep
}

/// Center choice for the stabilized-ideal principalization: the coprime
/// maximal-exponent pair of the first two minimal generators, grown by
/// further support variables until every generator meets the center (the
/// blow-up must stay inside the stabilized locus to be of order one).
fn select_step1_center(gens: &[Monomial]) -> Option<Vec<usize>> {
    if gens.len() < 2 {
        return None;
    }
    let dim = gens[0].dim();
    let g = gens[0].gcd(&gens[1]);
    let u = gens[0].div(&g);
    let w = gens[1].div(&g);
    let max_var = |m: &Monomial| -> Option<usize> {
        (0..dim)
            .filter(|&i| m.exp(i) > 0)
            .max_by_key(|&i| (m.exp(i), std::cmp::Reverse(i)))
    };
    let mut center = vec![max_var(&u)?, max_var(&w)?];
    for m in gens {
        if !center.iter().any(|&c| m.exp(c) > 0) {
            center.push(max_var(m)?);
        }
    }
    center.sort_unstable();
    center.dedup();
    Some(center)
}

/// First step: drive the stabilized ideal `Cl = H(θ, I, ν)` to the unit
/// ideal by invariant markings and blow-ups, replaying each step on the
/// carried foliated state (always of order one there). Leaves come back
/// type 1.
pub(super) fn run_step1(
    tree: &mut ChartTree,
    node: usize,
    stabilized: &FGIdeal,
    opts: &ResolveOptions,
) -> Result<Vec<usize>, ResolveError> {
    // eigen-split the generators when the distribution is recognized;
    // this is exact for the invariant stabilized ideal
    let state = &tree.nodes[node].state;
    let cl = match check_monomial_form(&state.theta) {
        v if v.is_monomial() => invariant_generators(&state.theta, stabilized)
            .map_err(|e| ResolveError::Internal(e.to_string()))?,
        _ => stabilized.clone(),
    };
    let mut out = Vec::new();
    let mut work: Vec<(usize, FGIdeal)> = vec![(node, cl)];
    while let Some((id, cl)) = work.pop() {
        if tree.nodes.len() > opts.max_branches {
            return Err(ResolveError::Budget(format!(
                "chart budget {} exhausted in the type-reduction step",
                opts.max_branches
            )));
        }
        if cl.contains_one(Backend::Local) {
            out.push(id);
            continue;
        }
        if let Some((x, k)) = common_variable(&cl) {
            let child = apply_mark(tree, id, x, k, "step1")?;
            let frame = tree.nodes[child].state.frame.clone();
            let pow = Monomial::var(x, frame.dim()).pow(k);
            let divided = FGIdeal::new(
                &frame,
                cl.generators()
                    .iter()
                    .map(|g| g.reframe(&frame).div_monomial(&pow).expect("common factor"))
                    .collect(),
            );
            work.push((child, divided));
            continue;
        }
        if !cl.is_monomial_ideal() {
            return Err(ResolveError::Subclass(format!(
                "stabilized tangency ideal is not monomial: {cl}; \
                 general resolution of invariant ideals is out of scope"
            )));
        }
        let gens = minimal_monomials(&cl);
        let Some(center_vars) = select_step1_center(&gens) else {
            return Err(ResolveError::Internal(
                "no center available for a non-principal monomial ideal".to_string(),
            ));
        };
        let frame = tree.nodes[id].state.frame.clone();
        let center = Center::new(&frame, center_vars)?;
        if !center_in_support(&cl, &center) {
            return Err(ResolveError::Internal(
                "type-reduction center must lie inside the stabilized locus".to_string(),
            ));
        }
        for chart in blowup_charts(&frame, &center) {
            let child = apply_blowup_chart(tree, id, &chart, "step1")?;
            match &tree.nodes[child].edge {
                Some(Edge { kind: EdgeKind::Blowup { transform, .. }, admissibility })
                    if *transform == TransformKind::Birational =>
                {
                    if let Some(v) = admissibility {
                        if !v.admissible {
                            return Err(ResolveError::Internal(format!(
                                "invariant center came back inadmissible: {v}"
                            )));
                        }
                    }
                }
                _ => {
                    return Err(ResolveError::Internal(
                        "type-reduction blow-up was not of order one".to_string(),
                    ))
                }
            }
            let cl_child = transform_ideal(&cl, &chart, TransformKind::Birational)?;
            work.push((child, cl_child));
        }
    }
    Ok(out)
}

/// Outcome of the preparation step: charts carrying a prepared form for
/// the third step, plus charts the lift already flattened.
pub(super) struct PreparedLeaves {
    pub prepared: Vec<(usize, PreparedForm)>,
    pub finished: Vec<usize>,
}

/// Second step: monomialize the Weierstrass coefficients by resolving the
/// projected problem one dimension down and lifting its tree along the
/// distinguished axis; every lifted leaf carries a prepared form.
pub(super) fn run_step2(
    tree: &mut ChartTree,
    node: usize,
    v: usize,
    parent_nu: usize,
    opts: &ResolveOptions,
) -> Result<PreparedLeaves, ResolveError> {
    let state = tree.nodes[node].state.clone();
    let mf = match check_monomial_form(&state.theta) {
        v if v.is_monomial() => v.form().unwrap().clone(),
        other => {
            return Err(ResolveError::Subclass(format!(
                "distribution verdict {other} at a preparation point"
            )))
        }
    };
    let tg = tg_invariant(&state.theta, &state.ideal, opts.max_stages, opts.backend)?;
    let wt = match weierstrass_form(&state.ideal, &mf, tg, opts.jet_order, Some(v))? {
        WTOutcome::Ready(wt) => wt,
        _ => {
            return Err(ResolveError::Internal(
                "normalized chart lost its Weierstrass form".to_string(),
            ))
        }
    };
    if let Some(pf) = prepare_check(&state.frame, &wt) {
        return Ok(PreparedLeaves { prepared: vec![(node, pf)], finished: Vec::new() });
    }

    // project away the distinguished variable
    let v_idx = wt.v;
    let inj: Vec<usize> = (0..state.frame.dim()).filter(|&i| i != v_idx).collect();
    let sub_frame = state.frame.without_var(v_idx);
    let project = |p: &Poly| -> Poly {
        let terms = p
            .terms()
            .map(|(m, c)| {
                assert_eq!(m.exp(v_idx), 0, "projected polynomial must be v-free");
                let exps = inj.iter().map(|&i| m.exp(i)).collect();
                (Monomial::new(exps), c.clone())
            })
            .collect();
        Poly::from_terms(&sub_frame, terms)
    };
    let mut product = Poly::one(&sub_frame);
    for row in &wt.coeffs {
        for a in row {
            if !a.is_zero() {
                product = product.mul(&project(a));
            }
        }
    }
    let omega_gens: Vec<Derivation> = {
        let mut gens = Vec::new();
        for &w in &mf.regular_part {
            if w != v_idx {
                let pos = inj.iter().position(|&i| i == w).unwrap();
                gens.push(Derivation::coordinate(&sub_frame, pos));
            }
        }
        for row in &mf.alpha {
            let mut alpha = vec![Q::from_integer(0.into()); sub_frame.dim()];
            for (pos, &i) in inj.iter().enumerate() {
                if let Some(ui) = mf.u_block.iter().position(|&u| u == i) {
                    alpha[pos] = row[ui].clone();
                }
            }
            gens.push(Derivation::diagonal(&sub_frame, &alpha));
        }
        gens
    };
    let omega = Distribution::new_unchecked(
        &sub_frame,
        omega_gens,
        crate::foliation::SNCDivisor::from_frame(&sub_frame),
    );
    let sub_ideal = FGIdeal::new(&sub_frame, vec![product]);
    let sub_state = ChartState {
        frame: sub_frame.clone(),
        theta: omega,
        ideal: sub_ideal,
        pullback_factor: Monomial::one(sub_frame.dim()),
        declared_units: Vec::new(),
        local_only: false,
    };
    let sub_tree = super::driver::resolve_inner(sub_state, opts)?;

    // lift the subtree edge by edge, keeping the v-axis untouched
    let mut map = vec![usize::MAX; sub_tree.nodes.len()];
    map[0] = node;
    let mut prepared = Vec::new();
    let mut finished = Vec::new();
    for sid in 0..sub_tree.nodes.len() {
        let sub_node = &sub_tree.nodes[sid];
        if sid > 0 {
            let parent_full = map[sub_node.parent.unwrap()];
            assert_ne!(parent_full, usize::MAX, "subtree traversal is in order");
            let full_id = match &sub_node.edge.as_ref().unwrap().kind {
                EdgeKind::Blowup { center, chart_var, .. } => {
                    let full_frame = tree.nodes[parent_full].state.frame.clone();
                    let lifted_center: Vec<usize> = center.iter().map(|&c| inj_index(&inj, c)).collect();
                    let lifted_chart_var = inj_index(&inj, *chart_var);
                    let center = Center::new(&full_frame, lifted_center)?;
                    let chart = blowup_charts(&full_frame, &center)
                        .into_iter()
                        .find(|c| c.chart_var == lifted_chart_var)
                        .expect("chart variable belongs to the center");
                    let id = apply_blowup_chart(tree, parent_full, &chart, "step2")?;
                    if let Some(Edge { admissibility: Some(v), .. }) = &tree.nodes[id].edge {
                        if !v.admissible {
                            return Err(ResolveError::Internal(format!(
                                "lifted preparation center inadmissible: {v}"
                            )));
                        }
                    }
                    id
                }
                EdgeKind::DivisorMark { var, .. } => {
                    let lifted = inj_index(&inj, *var);
                    let full_frame = &tree.nodes[parent_full].state.frame;
                    // the lifted ideal keeps its distinguished unit term,
                    // so the marking never divides upstairs; an already
                    // flagged divisor makes the lift a no-op
                    if full_frame.is_exceptional(lifted) {
                        parent_full
                    } else {
                        apply_mark(tree, parent_full, lifted, 0, "step2")?
                    }
                }
                EdgeKind::Shift { var, by } => {
                    let lifted = inj_index(&inj, *var);
                    let lifted_by = lift_poly(by, &inj, &tree.nodes[parent_full].state.frame);
                    apply_shift(tree, parent_full, lifted, &lifted_by)?
                }
                EdgeKind::Shear { kept, absorbed, factor } => apply_shear(
                    tree,
                    parent_full,
                    inj_index(&inj, *kept),
                    inj_index(&inj, *absorbed),
                    factor,
                )?,
            };
            map[sid] = full_id;
        }
        if sub_node.children.is_empty() {
            let full_id = map[sid];
            // carry over restriction data discovered downstairs
            let units: Vec<LocalElement> = sub_node
                .state
                .declared_units
                .iter()
                .map(|u| {
                    let frame = tree.nodes[full_id].state.frame.clone();
                    LocalElement::new(
                        lift_poly(u.num(), &inj, &frame),
                        lift_poly(u.den(), &inj, &frame),
                    )
                    .expect("lifted denominator stays a unit")
                })
                .collect();
            if !units.is_empty() {
                tree.nodes[full_id].state.declared_units.extend(units);
                tree.nodes[full_id].state.local_only = true;
            }
            let leaf_state = tree.nodes[full_id].state.clone();
            let tg = tg_invariant(&leaf_state.theta, &leaf_state.ideal, opts.max_stages, opts.backend)?;
            if tg.nu > parent_nu {
                return Err(ResolveError::Internal(format!(
                    "preparation increased the tg-order: {} -> {} at chart {full_id}",
                    parent_nu, tg.nu
                )));
            }
            let mf_leaf = match check_monomial_form(&leaf_state.theta) {
                vd if vd.is_monomial() => vd.form().unwrap().clone(),
                other => {
                    return Err(ResolveError::Internal(format!(
                        "prepared chart lost monomiality: {other}"
                    )))
                }
            };
            if tg.nu == 0 {
                // the lifting already flattened the ideal here; the main
                // loop finishes this chart without a third step
                finished.push(full_id);
                continue;
            }
            let wt_leaf = match weierstrass_form(
                &leaf_state.ideal,
                &mf_leaf,
                tg,
                opts.jet_order,
                Some(v_idx),
            )? {
                WTOutcome::Ready(w) => w,
                WTOutcome::NeedsShift { var, by, .. } => {
                    let shifted = apply_shift(tree, full_id, var, &by)?;
                    let st = tree.nodes[shifted].state.clone();
                    let mf2 = check_monomial_form(&st.theta);
                    let tg2 = tg_invariant(&st.theta, &st.ideal, opts.max_stages, opts.backend)?;
                    match weierstrass_form(
                        &st.ideal,
                        mf2.form().ok_or_else(|| {
                            ResolveError::Internal("shift broke monomiality".to_string())
                        })?,
                        tg2,
                        opts.jet_order,
                        Some(var),
                    )? {
                        WTOutcome::Ready(w) => {
                            let pf = prepare_check(&tree.nodes[shifted].state.frame, &w)
                                .ok_or_else(|| {
                                    ResolveError::Internal(
                                        "lifted chart is not prepared after shifting".to_string(),
                                    )
                                })?;
                            prepared.push((shifted, pf));
                            continue;
                        }
                        _ => {
                            return Err(ResolveError::Internal(
                                "weierstrass form unstable after shift".to_string(),
                            ))
                        }
                    }
                }
                _ => {
                    return Err(ResolveError::Internal(
                        "lifted chart lost its distinguished direction".to_string(),
                    ))
                }
            };
            let pf = prepare_check(&tree.nodes[full_id].state.frame, &wt_leaf).ok_or_else(|| {
                ResolveError::Internal(
                    "preparation recursion did not monomialize the coefficients".to_string(),
                )
            })?;
            prepared.push((full_id, pf));
        }
    }
    Ok(PreparedLeaves { prepared, finished })
}

fn inj_index(inj: &[usize], sub_idx: usize) -> usize {
    inj[sub_idx]
}

fn lift_poly(p: &Poly, inj: &[usize], full_frame: &crate::algebra::Frame) -> Poly {
    let terms = p
        .terms()
        .map(|(m, c)| {
            let mut exps = vec![0u32; full_frame.dim()];
            for (pos, &i) in inj.iter().enumerate() {
                exps[i] = m.exp(pos);
            }
            (Monomial::new(exps), c.clone())
        })
        .collect();
    Poly::from_terms(full_frame, terms)
}

/// Third step: principalize the drop ideal `(v^nu, v^j u^r)` by
/// combinatorial blow-ups of the enlarged divisor block and replay them
/// on the carried state; every leaf records its fiber-analysis matrix.
pub(super) fn run_step3(
    tree: &mut ChartTree,
    node: usize,
    pf: &PreparedForm,
    opts: &ResolveOptions,
) -> Result<Vec<usize>, ResolveError> {
    let state = tree.nodes[node].state.clone();
    let v = pf.wt.v;
    let nu = pf.wt.nu;
    let mut block = state.frame.exceptional_indices();
    block.push(v);
    let dim = state.frame.dim();
    let mut j_gens = vec![Poly::monomial(
        &state.frame,
        Monomial::var(v, dim).pow(nu as u32),
        Q::one(),
    )];
    for row in &pf.factors {
        for (j, f) in row.iter().enumerate() {
            if let Some((r, _)) = f {
                let m = r.mul(&Monomial::var(v, dim).pow(j as u32));
                j_gens.push(Poly::monomial(&state.frame, m, Q::one()));
            }
        }
    }
    let drop_ideal = FGIdeal::new(&state.frame, j_gens);
    for row in &pf.factors {
        for f in row.iter().flatten() {
            if f.0.is_one() {
                return Err(ResolveError::Internal(
                    "prepared coefficient with a unit cofactor and empty exceptional part \
                     contradicts the computed tg-order"
                        .to_string(),
                ));
            }
        }
    }
    let r_list = pf.r_list(&block[..block.len() - 1]);
    let ptree = principalize_monomial(&drop_ideal, &block, opts.max_branches)?;
    if ptree.nodes.len() == 1 {
        return Err(ResolveError::Internal(
            "drop ideal already principal; the distinguished variable should have been \
             extracted earlier"
                .to_string(),
        ));
    }
    let mut map = vec![usize::MAX; ptree.nodes.len()];
    map[0] = node;
    let mut out = Vec::new();
    for pid in 0..ptree.nodes.len() {
        if pid > 0 {
            let parent_full = map[ptree.nodes[pid].parent.unwrap()];
            let chart = ptree.nodes[pid].blowup.as_ref().unwrap();
            let full_id = apply_blowup_chart(tree, parent_full, chart, "step3")?;
            if let Some(Edge { admissibility: Some(vd), .. }) = &tree.nodes[full_id].edge {
                if !vd.admissible {
                    return Err(ResolveError::Internal(format!(
                        "combinatorial center inadmissible: {vd}"
                    )));
                }
            }
            map[pid] = full_id;
        }
        if ptree.nodes[pid].children.is_empty() {
            let full_id = map[pid];
            let a = block_matrix(tree, node, full_id, &block)?;
            tree.nodes[full_id].step3 = Some(Step3Data {
                fblock: block.clone(),
                nu,
                r_list: r_list.clone(),
                a_matrix: a,
            });
            out.push(full_id);
        }
    }
    Ok(out)
}

/// Exponent matrix of the block variables along the subtree from
/// `ancestor` to `leaf`: row per ancestor block variable, column per leaf
/// block variable (positions are stable through coordinate blow-ups).
fn block_matrix(
    tree: &ChartTree,
    ancestor: usize,
    leaf: usize,
    block: &[usize],
) -> Result<Vec<Vec<u32>>, ResolveError> {
    // compose the chart maps from ancestor down to leaf
    let mut chain: Vec<usize> = Vec::new();
    let mut cur = leaf;
    while cur != ancestor {
        chain.push(cur);
        cur = tree.nodes[cur]
            .parent
            .ok_or_else(|| ResolveError::Internal("leaf not below ancestor".to_string()))?;
    }
    chain.reverse();
    let frame = &tree.nodes[ancestor].state.frame;
    let mut subst = Substitution::identity(frame);
    for id in chain {
        let edge_subst = reconstruct_subst(tree, id)?;
        subst = subst.then(&edge_subst);
    }
    let mut rows = Vec::with_capacity(block.len());
    for &b in block {
        let img = subst.apply(&Poly::var(frame, b));
        let (m, c) = img
            .as_monomial()
            .ok_or_else(|| ResolveError::Internal("block image is not a monomial".to_string()))?;
        if !c.is_one() {
            return Err(ResolveError::Internal("block image is not monic".to_string()));
        }
        for i in 0..m.dim() {
            if m.exp(i) > 0 && !block.contains(&i) {
                return Err(ResolveError::Internal(
                    "block image escapes the divisor block".to_string(),
                ));
            }
        }
        rows.push(block.iter().map(|&c2| m.exp(c2)).collect());
    }
    Ok(rows)
}

fn reconstruct_subst(tree: &ChartTree, id: usize) -> Result<Substitution, ResolveError> {
    let parent = tree.nodes[id].parent.expect("non-root");
    let parent_frame = tree.nodes[parent].state.frame.clone();
    let child_frame = tree.nodes[id].state.frame.clone();
    match &tree.nodes[id].edge.as_ref().unwrap().kind {
        EdgeKind::Blowup { center, chart_var, .. } => {
            let c = Center::new(&parent_frame, center.clone())?;
            let chart = blowup_charts(&parent_frame, &c)
                .into_iter()
                .find(|ch| ch.chart_var == *chart_var)
                .expect("chart variable in center");
            Ok(chart.subst)
        }
        _ => Ok(Substitution::new(
            parent_frame,
            child_frame.clone(),
            (0..child_frame.dim()).map(|i| Poly::var(&child_frame, i)).collect(),
        )),
    }
}

/// Recompute the invariant and verdict caches on a node.
pub(super) fn annotate(
    tree: &mut ChartTree,
    id: usize,
    opts: &ResolveOptions,
) -> Result<crate::invariants::TgInvariant, ResolveError> {
    let state = tree.nodes[id].state.clone();
    let tg = tg_invariant(&state.theta, &state.ideal, opts.max_stages, opts.backend)?;
    let verdict = check_monomial_form(&state.theta);
    tree.nodes[id].tg = Some(tg);
    tree.nodes[id].monomial = Some(verdict);
    Ok(tg)
}

/// The stabilized stage of the tangency sequence at a node.
pub(super) fn stabilized_stage(
    tree: &ChartTree,
    id: usize,
    opts: &ResolveOptions,
) -> Result<FGIdeal, ResolveError> {
    let state = &tree.nodes[id].state;
    let seq = h_sequence(&state.theta, &state.ideal, opts.max_stages, opts.backend)?;
    let n = seq.stabilized_at.expect("stabilized by construction");
    Ok(seq.stage(n).clone())
}
