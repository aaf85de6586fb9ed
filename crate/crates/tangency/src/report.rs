//! Machine-readable reports: a single JSON document per command, with
//! polynomials serialized in the same grammar the parser accepts so that
//! documents round-trip exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::algebra::{Frame, Monomial, Poly, Q};
use crate::blowup::TransformKind;
use crate::foliation::{Derivation, Distribution, SNCDivisor};
use crate::ideal::FGIdeal;
use crate::invariants::TgInvariant;
use crate::parse::{parse_derivation, parse_poly, ParseError, ProblemFile};
use crate::resolve::{ChartNode, ChartState, ChartTree, Edge, EdgeKind, VerifyReport};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProblemDoc {
    pub vars: Vec<String>,
    pub exceptional: Vec<String>,
    pub theta: Vec<String>,
    pub ideal: Vec<String>,
    pub options: BTreeMap<String, String>,
}

impl ProblemDoc {
    pub fn from_problem(p: &ProblemFile) -> Self {
        ProblemDoc {
            vars: p.frame.vars().iter().map(|v| v.name.clone()).collect(),
            exceptional: p
                .frame
                .vars()
                .iter()
                .filter(|v| v.exceptional)
                .map(|v| v.name.clone())
                .collect(),
            theta: p.theta.generators().iter().map(|g| g.to_string()).collect(),
            ideal: p.ideal.generators().iter().map(|g| g.to_string()).collect(),
            options: p.options.clone(),
        }
    }

    pub fn to_problem(&self) -> Result<ProblemFile, ParseError> {
        let names: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        let exc: Vec<&str> = self.exceptional.iter().map(|s| s.as_str()).collect();
        let frame = Frame::with_exceptional(&names, &exc);
        let theta_gens = self
            .theta
            .iter()
            .map(|t| parse_derivation(t, &frame))
            .collect::<Result<Vec<_>, _>>()?;
        let ideal_gens = self
            .ideal
            .iter()
            .map(|t| parse_poly(t, &frame))
            .collect::<Result<Vec<_>, _>>()?;
        let theta = Distribution::new(&frame, theta_gens, SNCDivisor::from_frame(&frame));
        let ideal = FGIdeal::new(&frame, ideal_gens);
        Ok(ProblemFile { frame, theta, ideal, options: self.options.clone() })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InvariantsDoc {
    pub nu: usize,
    pub type_: u8,
    pub stages: Vec<Vec<String>>,
    pub stabilized_at: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AdmissibilityDoc {
    pub center: Vec<String>,
    pub admissible: bool,
    pub k0: Option<usize>,
    pub witness_k: Option<usize>,
    pub witness_ideal: Option<String>,
    pub fitting: Vec<FittingDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FittingDoc {
    pub k: usize,
    pub generators: Vec<String>,
    pub verdict: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BlowupChartDoc {
    pub chart_var: String,
    pub map: Vec<String>,
    pub total: Vec<String>,
    pub birational: Option<Vec<String>>,
    pub theta: Vec<String>,
    pub monomial_verdict: String,
    pub tg: Option<(usize, u8)>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EdgeDoc {
    pub kind: String,
    pub center: Vec<String>,
    pub chart_var: Option<String>,
    pub transform: Option<String>,
    pub times: Option<u32>,
    pub admissible: Option<bool>,
    pub k0: Option<usize>,
    pub witness_k: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NodeDoc {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub phase: String,
    pub vars: Vec<String>,
    pub exceptional: Vec<String>,
    pub theta: Vec<String>,
    pub ideal: Vec<String>,
    pub pullback_factor: String,
    pub declared_units: Vec<String>,
    pub local_only: bool,
    pub tg: Option<(usize, u8)>,
    pub monomial_verdict: Option<String>,
    pub edge: Option<EdgeDoc>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TreeDoc {
    pub nodes: Vec<NodeDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerifyDoc {
    pub passed: bool,
    pub leaf_lines: Vec<String>,
    pub edge_lines: Vec<String>,
    pub first_failure: Option<String>,
}

/// The single self-describing output document of every CLI run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub command: String,
    pub problem: ProblemDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantsDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admissibility: Option<AdmissibilityDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blowup: Option<Vec<BlowupChartDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyDoc>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn monomial_display(frame: &Frame, m: &Monomial) -> String {
    Poly::monomial(frame, m.clone(), num::One::one()).to_string()
}

pub fn tree_doc(tree: &ChartTree) -> TreeDoc {
    let nodes = tree
        .nodes
        .iter()
        .map(|n| {
            let frame = &n.state.frame;
            NodeDoc {
                id: n.id,
                parent: n.parent,
                children: n.children.clone(),
                phase: n.phase.clone(),
                vars: frame.vars().iter().map(|v| v.name.clone()).collect(),
                exceptional: frame
                    .vars()
                    .iter()
                    .filter(|v| v.exceptional)
                    .map(|v| v.name.clone())
                    .collect(),
                theta: n.state.theta.generators().iter().map(|g| g.to_string()).collect(),
                ideal: n.state.ideal.generators().iter().map(|g| g.to_string()).collect(),
                pullback_factor: monomial_display(frame, &n.state.pullback_factor),
                declared_units: n.state.declared_units.iter().map(|u| u.to_string()).collect(),
                local_only: n.state.local_only,
                tg: n.tg.map(|t| (t.nu, t.type_)),
                monomial_verdict: n.monomial.as_ref().map(|v| v.to_string()),
                edge: n.edge.as_ref().map(|e| edge_doc(tree, n, e)),
                warnings: n.warnings.clone(),
            }
        })
        .collect();
    TreeDoc { nodes }
}

fn edge_doc(tree: &ChartTree, node: &ChartNode, edge: &Edge) -> EdgeDoc {
    let parent_frame = &tree.nodes[node.parent.expect("edges hang off children")].state.frame;
    let (kind, center, chart_var, transform, times) = match &edge.kind {
        EdgeKind::Blowup { center, chart_var, transform } => (
            "blowup".to_string(),
            center.iter().map(|&v| parent_frame.name(v).to_string()).collect(),
            Some(parent_frame.name(*chart_var).to_string()),
            Some(transform.to_string()),
            None,
        ),
        EdgeKind::DivisorMark { var, times } => (
            "mark".to_string(),
            vec![parent_frame.name(*var).to_string()],
            None,
            None,
            Some(*times),
        ),
        EdgeKind::Shift { var, by } => (
            format!("shift {} by {}", parent_frame.name(*var), by),
            vec![],
            None,
            None,
            None,
        ),
        EdgeKind::Shear { kept, absorbed, factor } => (
            format!(
                "shear d/d{} += {} d/d{}",
                parent_frame.name(*kept),
                factor,
                parent_frame.name(*absorbed)
            ),
            vec![],
            None,
            None,
            None,
        ),
    };
    EdgeDoc {
        kind,
        center,
        chart_var,
        transform,
        times,
        admissible: edge.admissibility.as_ref().map(|a| a.admissible),
        k0: edge.admissibility.as_ref().and_then(|a| a.k0),
        witness_k: edge.admissibility.as_ref().and_then(|a| a.witness.as_ref().map(|w| w.0)),
    }
}

pub fn verify_doc(v: &VerifyReport) -> VerifyDoc {
    VerifyDoc {
        passed: v.passed,
        leaf_lines: v.leaf_results.iter().map(|(_, _, m)| m.clone()).collect(),
        edge_lines: v.edge_results.iter().map(|(_, _, m)| m.clone()).collect(),
        first_failure: v.first_failure.clone(),
    }
}

/// Rebuilds engine-level chart states from a tree document; the frames,
/// distributions, ideals and factors are re-parsed, so a verification on
/// the result genuinely re-checks the stored tree.
pub fn states_from_tree_doc(doc: &TreeDoc) -> Result<Vec<(NodeDoc, ChartState)>, ParseError> {
    let mut out = Vec::new();
    for n in &doc.nodes {
        let names: Vec<&str> = n.vars.iter().map(|s| s.as_str()).collect();
        let exc: Vec<&str> = n.exceptional.iter().map(|s| s.as_str()).collect();
        let frame = Frame::with_exceptional(&names, &exc);
        let theta_gens: Vec<Derivation> = n
            .theta
            .iter()
            .map(|t| parse_derivation(t, &frame))
            .collect::<Result<_, _>>()?;
        let ideal_gens: Vec<Poly> =
            n.ideal.iter().map(|t| parse_poly(t, &frame)).collect::<Result<_, _>>()?;
        let factor_poly = parse_poly(&n.pullback_factor, &frame)?;
        let Some((factor, c)) = factor_poly.as_monomial() else {
            return Err(ParseError {
                line: 1,
                col: 1,
                message: format!("pullback factor is not a monomial: {}", n.pullback_factor),
            });
        };
        if c != &Q::from_integer(1.into()) {
            return Err(ParseError {
                line: 1,
                col: 1,
                message: "pullback factor must be monic".to_string(),
            });
        }
        let declared_units = n
            .declared_units
            .iter()
            .map(|u| crate::parse::parse_local(u, &frame))
            .collect::<Result<Vec<_>, _>>()?;
        let state = ChartState {
            frame: frame.clone(),
            theta: Distribution::new_unchecked(
                &frame,
                theta_gens,
                SNCDivisor::from_frame(&frame),
            ),
            ideal: FGIdeal::new(&frame, ideal_gens),
            pullback_factor: factor.clone(),
            declared_units,
            local_only: n.local_only,
        };
        out.push((n.clone(), state));
    }
    Ok(out)
}

/// Plain-text rendering of a tree document.
pub fn render_tree_text(doc: &TreeDoc) -> String {
    let mut out = String::new();
    fn rec(out: &mut String, doc: &TreeDoc, id: usize, depth: usize) {
        let n = &doc.nodes[id];
        let pad = "  ".repeat(depth);
        let edge = match &n.edge {
            None => String::new(),
            Some(e) => {
                let mut s = format!("[{}", e.kind);
                if !e.center.is_empty() {
                    let _ = write!(s, " ({})", e.center.join(","));
                }
                if let Some(cv) = &e.chart_var {
                    let _ = write!(s, " chart {cv}");
                }
                if let Some(t) = &e.transform {
                    let _ = write!(s, " {t}");
                }
                if let Some(times) = e.times {
                    let _ = write!(s, " /{times}");
                }
                if let Some(adm) = e.admissible {
                    let _ = write!(s, " {}", if adm { "admissible" } else { "NOT ADMISSIBLE" });
                }
                s.push(']');
                s
            }
        };
        let tg = n
            .tg
            .map(|(nu, ty)| format!(" (nu={nu}, type={ty})"))
            .unwrap_or_default();
        let verdict = n
            .monomial_verdict
            .as_ref()
            .map(|v| format!(" [{v}]"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{pad}#{} {} {}{}{} ideal=({}) factor={}",
            n.id,
            n.phase,
            edge,
            tg,
            verdict,
            n.ideal.join(", "),
            n.pullback_factor,
        );
        for &c in &n.children {
            rec(out, doc, c, depth + 1);
        }
    }
    if !doc.nodes.is_empty() {
        rec(&mut out, doc, 0, 0);
    }
    out
}

/// Invariants document from computed data.
pub fn invariants_doc(seq: &crate::invariants::HSequence, tg: TgInvariant) -> InvariantsDoc {
    InvariantsDoc {
        nu: tg.nu,
        type_: tg.type_,
        stages: seq
            .stages
            .iter()
            .map(|s| s.reduced_generators().iter().map(|g| g.to_string()).collect())
            .collect(),
        stabilized_at: seq.stabilized_at.expect("stabilized sequences only"),
    }
}

pub fn transform_kind_name(kind: TransformKind) -> &'static str {
    match kind {
        TransformKind::Total => "total",
        TransformKind::Birational => "birational",
    }
}
