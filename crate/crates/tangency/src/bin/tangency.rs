use std::fs;
use std::io::Read;
use std::process::ExitCode;

use clap::Parser;

use tangency::cli::{
    apply_problem_options, parse_backend, run, run_verify, CliError, Command, RunConfig,
};
use tangency::parse::parse_problem;
use tangency::report::{render_tree_text, Report};
use tangency::resolve::ResolveOptions;

/// Exact engine for tangency invariants, admissible blow-ups and local
/// resolution of foliated ideal sheaves.
#[derive(Parser, Debug)]
#[command(name = "tangency", version)]
struct Args {
    /// Problem file (or a stored report for `verify`); `-` reads stdin
    #[arg(long)]
    input: String,
    /// One of: invariants, admissible, blowup, resolve, verify
    #[arg(long)]
    command: String,
    /// Center variables for `admissible` and `blowup`, comma separated
    #[arg(long)]
    center: Option<String>,
    /// Membership backend: global, local or jet:N
    #[arg(long)]
    membership: Option<String>,
    /// Truncation order for jet computations
    #[arg(long)]
    jet_order: Option<u32>,
    /// Tangency-stage budget
    #[arg(long)]
    max_stages: Option<usize>,
    /// Chart budget for the resolution driver
    #[arg(long)]
    max_branches: Option<usize>,
    /// Seed for randomized diagnostics
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<String>,
    /// json (default) or text
    #[arg(long, default_value = "json")]
    format: String,
}

fn read_input(path: &str) -> std::io::Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        fs::read_to_string(path)
    }
}

fn render(report: &Report, format: &str) -> String {
    if format == "text" {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", report.command));
        if let Some(inv) = &report.invariants {
            out.push_str(&format!("nu = {}, type = {}\n", inv.nu, inv.type_));
            for (i, stage) in inv.stages.iter().enumerate() {
                out.push_str(&format!("H({i}) = ({})\n", stage.join(", ")));
            }
        }
        if let Some(a) = &report.admissibility {
            out.push_str(&format!(
                "center ({}) admissible: {} k0: {:?}\n",
                a.center.join(","),
                a.admissible,
                a.k0
            ));
            if let Some(w) = &a.witness_ideal {
                out.push_str(&format!("witness k={:?}: {w}\n", a.witness_k));
            }
        }
        if let Some(charts) = &report.blowup {
            for c in charts {
                out.push_str(&format!(
                    "{}-chart: {} | total = ({}) | theta = ({}) [{}]\n",
                    c.chart_var,
                    c.map.join(", "),
                    c.total.join(", "),
                    c.theta.join(", "),
                    c.monomial_verdict
                ));
            }
        }
        if let Some(tree) = &report.tree {
            out.push_str(&render_tree_text(tree));
        }
        if let Some(v) = &report.verify {
            out.push_str(&format!("verify: {}\n", if v.passed { "PASS" } else { "FAIL" }));
            if let Some(f) = &v.first_failure {
                out.push_str(&format!("first failure: {f}\n"));
            }
        }
        out
    } else {
        report.to_json()
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match real_main(&args) {
        Ok(report) => {
            let text = render(&report, &args.format);
            match &args.output {
                Some(path) => {
                    if let Err(e) = fs::write(path, text) {
                        eprintln!("tangency: cannot write {path}: {e}");
                        return ExitCode::from(4);
                    }
                }
                None => print!("{text}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("tangency: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn real_main(args: &Args) -> Result<Report, CliError> {
    let command: Command = args
        .command
        .parse()
        .map_err(CliError::Usage)?;
    let text = read_input(&args.input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.input)))?;
    if command == Command::Verify {
        let stored = Report::from_json(&text)
            .map_err(|e| CliError::Usage(format!("stored report does not parse: {e}")))?;
        return run_verify(&stored);
    }
    let problem = parse_problem(&text)?;
    let mut options = ResolveOptions::default();
    apply_problem_options(&mut options, &problem.options)?;
    if let Some(m) = &args.membership {
        options.backend = parse_backend(m).map_err(CliError::Usage)?;
    }
    if let Some(n) = args.jet_order {
        options.jet_order = n;
    }
    if let Some(k) = args.max_stages {
        options.max_stages = k;
    }
    if let Some(b) = args.max_branches {
        options.max_branches = b;
    }
    if let Some(s) = args.seed {
        options.seed = s;
    }
    let center = args
        .center
        .as_ref()
        .map(|c| c.split(',').map(|s| s.trim().to_string()).collect());
    run(&problem, &RunConfig { command, center, options })
}
