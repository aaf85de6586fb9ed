//! Command dispatch: problem parsing, the five commands, report
//! emission, and the exit-code contract (0 success, 2 subclass abort,
//! 3 budget exhaustion, 4 verification failure).

use std::collections::BTreeMap;

use crate::blowup::{blowup_charts, transform_distribution, transform_ideal, Center, TransformKind};
use crate::foliation::check_monomial_form;
use crate::ideal::Backend;
use crate::invariants::{check_theta_admissible, fitting_ideal, h_sequence, tg_invariant, FittingVerdict};
use crate::parse::{parse_problem, ProblemFile};
use crate::report::{
    invariants_doc, states_from_tree_doc, tree_doc, verify_doc, AdmissibilityDoc, BlowupChartDoc,
    FittingDoc, ProblemDoc, Report, VerifyDoc,
};
use crate::resolve::{resolve_local, verify_resolution, ResolveError, ResolveOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Invariants,
    Admissible,
    Blowup,
    Resolve,
    Verify,
}

impl std::str::FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "invariants" => Ok(Command::Invariants),
            "admissible" => Ok(Command::Admissible),
            "blowup" => Ok(Command::Blowup),
            "resolve" => Ok(Command::Resolve),
            "verify" => Ok(Command::Verify),
            other => Err(format!("unknown command '{other}'")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub center: Option<Vec<String>>,
    pub options: ResolveOptions,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] crate::parse::ParseError),
    #[error("{0}")]
    Resolve(#[from] ResolveError),
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Resolve(e) => e.exit_code(),
            CliError::VerificationFailed(_) => 4,
            _ => 4,
        }
    }
}

pub fn parse_backend(s: &str) -> Result<Backend, String> {
    match s {
        "global" => Ok(Backend::Global),
        "local" => Ok(Backend::Local),
        other => match other.strip_prefix("jet:") {
            Some(n) => n
                .parse::<u32>()
                .map(Backend::Jet)
                .map_err(|_| format!("bad jet order in '{other}'")),
            None => Err(format!("unknown membership backend '{other}'")),
        },
    }
}

/// Folds problem-file options into the driver options (command line wins,
/// so this is applied first).
pub fn apply_problem_options(
    opts: &mut ResolveOptions,
    options: &BTreeMap<String, String>,
) -> Result<(), CliError> {
    for (k, v) in options {
        match k.as_str() {
            "membership" => {
                opts.backend = parse_backend(v).map_err(CliError::Usage)?;
            }
            "jet_order" => {
                opts.jet_order = v.parse().map_err(|_| CliError::Usage(format!("bad jet_order '{v}'")))?;
            }
            "max_stages" => {
                opts.max_stages = v.parse().map_err(|_| CliError::Usage(format!("bad max_stages '{v}'")))?;
            }
            "max_branches" => {
                opts.max_branches =
                    v.parse().map_err(|_| CliError::Usage(format!("bad max_branches '{v}'")))?;
            }
            "seed" => {
                opts.seed = v.parse().map_err(|_| CliError::Usage(format!("bad seed '{v}'")))?;
            }
            other => {
                return Err(CliError::Usage(format!("unknown problem option '{other}'")));
            }
        }
    }
    Ok(())
}

/// Runs one command against an already parsed problem.
pub fn run(problem: &ProblemFile, config: &RunConfig) -> Result<Report, CliError> {
    let mut report = Report {
        command: format!("{:?}", config.command).to_lowercase(),
        problem: ProblemDoc::from_problem(problem),
        invariants: None,
        admissibility: None,
        blowup: None,
        tree: None,
        verify: None,
    };
    match config.command {
        Command::Invariants => {
            let seq = h_sequence(
                &problem.theta,
                &problem.ideal,
                config.options.max_stages,
                config.options.backend,
            )
            .map_err(ResolveError::from)?;
            let tg = tg_invariant(
                &problem.theta,
                &problem.ideal,
                config.options.max_stages,
                config.options.backend,
            )
            .map_err(ResolveError::from)?;
            report.invariants = Some(invariants_doc(&seq, tg));
        }
        Command::Admissible => {
            let center = resolve_center(problem, config)?;
            let center_ideal = center.ideal(&problem.frame);
            let verdict = check_theta_admissible(&problem.theta, &center_ideal);
            let k_max = problem
                .theta
                .generators()
                .len()
                .min(center_ideal.generators().len());
            let fitting = (1..=k_max)
                .map(|k| {
                    let d = fitting_ideal(&problem.theta, &center_ideal, k);
                    FittingDoc {
                        k,
                        generators: d.generators.iter().map(|g| g.to_string()).collect(),
                        verdict: match d.verdict {
                            FittingVerdict::Unit => "unit".into(),
                            FittingVerdict::Contained => "contained".into(),
                            FittingVerdict::Neither => "neither".into(),
                        },
                    }
                })
                .collect();
            report.admissibility = Some(AdmissibilityDoc {
                center: center
                    .vars()
                    .iter()
                    .map(|&v| problem.frame.name(v).to_string())
                    .collect(),
                admissible: verdict.admissible,
                k0: verdict.k0,
                witness_k: verdict.witness.as_ref().map(|w| w.0),
                witness_ideal: verdict.witness.as_ref().map(|w| w.1.clone()),
                fitting,
            });
        }
        Command::Blowup => {
            let center = resolve_center(problem, config)?;
            let mut charts = Vec::new();
            for chart in blowup_charts(&problem.frame, &center) {
                let total = transform_ideal(&problem.ideal, &chart, TransformKind::Total)
                    .map_err(ResolveError::from)?;
                let birational = transform_ideal(&problem.ideal, &chart, TransformKind::Birational)
                    .ok()
                    .map(|i| i.generators().iter().map(|g| g.to_string()).collect());
                let dt = transform_distribution(&problem.theta, &chart);
                let verdict = check_monomial_form(&dt.distribution);
                let tg = tg_invariant(
                    &dt.distribution,
                    &total,
                    config.options.max_stages,
                    config.options.backend,
                )
                .ok()
                .map(|t| (t.nu, t.type_));
                charts.push(BlowupChartDoc {
                    chart_var: chart.child_frame.name(chart.chart_var).to_string(),
                    map: problem
                        .frame
                        .vars()
                        .iter()
                        .enumerate()
                        .map(|(i, v)| format!("{} = {}", v.name, chart.subst.images[i]))
                        .collect(),
                    total: total.generators().iter().map(|g| g.to_string()).collect(),
                    birational,
                    theta: dt
                        .distribution
                        .generators()
                        .iter()
                        .map(|g| g.to_string())
                        .collect(),
                    monomial_verdict: verdict.to_string(),
                    tg,
                });
            }
            report.blowup = Some(charts);
        }
        Command::Resolve => {
            let tree = resolve_local(&problem.theta, &problem.ideal, &config.options)?;
            let verify = verify_resolution(&tree);
            report.tree = Some(tree_doc(&tree));
            let vd = verify_doc(&verify);
            let failed = !vd.passed;
            report.verify = Some(vd);
            if failed {
                return Err(CliError::VerificationFailed(
                    verify.first_failure.unwrap_or_else(|| "unknown".into()),
                ));
            }
        }
        Command::Verify => {
            return Err(CliError::Usage(
                "verify runs on a stored report, use run_verify".to_string(),
            ));
        }
    }
    Ok(report)
}

/// Re-checks a stored resolve report: re-parses every chart state and
/// re-runs the leaf and edge checks from scratch.
pub fn run_verify(stored: &Report) -> Result<Report, CliError> {
    let Some(doc) = &stored.tree else {
        return Err(CliError::Usage("stored report carries no chart tree".into()));
    };
    let states = states_from_tree_doc(doc)?;
    let mut leaf_lines = Vec::new();
    let mut edge_lines = Vec::new();
    let mut first_failure: Option<String> = None;
    let mut passed = true;
    for (nd, state) in &states {
        if nd.children.is_empty() {
            let unit_ok = state.ideal.contains_one(Backend::Local);
            let factor_ok = (0..state.frame.dim())
                .all(|i| state.pullback_factor.exp(i) == 0 || state.frame.is_exceptional(i));
            let verdict = check_monomial_form(&state.theta);
            let ok = unit_ok && factor_ok && verdict.is_monomial();
            let msg = format!(
                "leaf {}: unit ideal {}, exceptional factor {}, distribution {}",
                nd.id, unit_ok, factor_ok, verdict
            );
            if !ok {
                passed = false;
                first_failure.get_or_insert(msg.clone());
            }
            leaf_lines.push(msg);
        }
        if let Some(edge) = &nd.edge {
            if edge.kind == "blowup" || edge.kind == "mark" {
                // recompute admissibility at the parent state
                let parent = &states[nd.parent.expect("edge implies parent")].1;
                let vars: Option<Vec<usize>> =
                    edge.center.iter().map(|n| parent.frame.index_of(n)).collect();
                let Some(vars) = vars else {
                    passed = false;
                    let msg = format!("edge into {}: unknown center variables", nd.id);
                    first_failure.get_or_insert(msg.clone());
                    edge_lines.push(msg);
                    continue;
                };
                let center_ideal = crate::ideal::FGIdeal::new(
                    &parent.frame,
                    vars.iter().map(|&v| crate::algebra::Poly::var(&parent.frame, v)).collect(),
                );
                let verdict = check_theta_admissible(&parent.theta, &center_ideal);
                let recorded = edge.admissible.unwrap_or(true);
                let ok = verdict.admissible && recorded;
                let msg = format!(
                    "edge into {}: recomputed {}, recorded admissible={}",
                    nd.id, verdict, recorded
                );
                if !ok {
                    passed = false;
                    first_failure.get_or_insert(msg.clone());
                }
                edge_lines.push(msg);
            }
        }
    }
    let mut report = stored.clone();
    report.command = "verify".to_string();
    let failed = !passed;
    report.verify = Some(VerifyDoc {
        passed,
        leaf_lines,
        edge_lines,
        first_failure: first_failure.clone(),
    });
    if failed {
        return Err(CliError::VerificationFailed(first_failure.unwrap_or_default()));
    }
    Ok(report)
}

fn resolve_center(problem: &ProblemFile, config: &RunConfig) -> Result<Center, CliError> {
    let Some(names) = &config.center else {
        return Err(CliError::Usage("this command needs --center v1,v2,...".into()));
    };
    let vars = names
        .iter()
        .map(|n| {
            problem
                .frame
                .index_of(n)
                .ok_or_else(|| CliError::Usage(format!("unknown center variable '{n}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Center::new(&problem.frame, vars).map_err(|e| CliError::Usage(e.to_string()))
}

/// Parses problem text and runs a command; convenience for tests and
/// examples.
pub fn run_text(problem_text: &str, config: &RunConfig) -> Result<Report, CliError> {
    let problem = parse_problem(problem_text)?;
    let mut config = config.clone();
    apply_problem_options(&mut config.options, &problem.options)?;
    run(&problem, &config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: Command) -> RunConfig {
        RunConfig { command, center: None, options: ResolveOptions::default() }
    }

    #[test]
    fn invariants_command_reports_the_pair() {
        let r = run_text(
            "vars x! y z; theta d/dy, d/dz; ideal y^2 + x*z^3 + x^4",
            &cfg(Command::Invariants),
        )
        .unwrap();
        let inv = r.invariants.unwrap();
        assert_eq!((inv.nu, inv.type_), (2, 1));
        assert_eq!(inv.stages.len(), 3);
    }

    #[test]
    fn admissible_command_matches_worked_examples() {
        let mut c = cfg(Command::Admissible);
        c.center = Some(vec!["x".into(), "z".into()]);
        let r = run_text("vars x y z; theta d/dx, d/dy; ideal x", &c).unwrap();
        let a = r.admissibility.unwrap();
        assert!(a.admissible);
        assert_eq!(a.k0, Some(1));
    }

    #[test]
    fn resolve_command_emits_verified_tree() {
        let r = run_text(
            "vars x y z; theta d/dy, d/dz; ideal y^2 + x*z^3 + x^4",
            &cfg(Command::Resolve),
        )
        .unwrap();
        assert!(r.verify.as_ref().unwrap().passed);
        let stored = Report::from_json(&r.to_json()).unwrap();
        let v = run_verify(&stored).unwrap();
        assert!(v.verify.unwrap().passed);
    }

    #[test]
    fn unit_ideal_resolves_to_empty_tree() {
        let r = run_text("vars x y; theta d/dx; ideal 1", &cfg(Command::Resolve)).unwrap();
        let tree = r.tree.unwrap();
        assert_eq!(tree.nodes.len(), 1);
    }
}
