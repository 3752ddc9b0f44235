//! Command-line front end.
//!
//! `check` runs the check directives of a `.geo` file, `selftest` runs the
//! built-in randomized identity suites, and `reeb` / `classify` / `bracket`
//! answer pointwise questions about one declared structure. Every command is
//! deterministic for a fixed seed, and `--report` writes a JSON document in
//! the shape described by `docs/report-schema.json`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::calculus::AlphaForm;
use crate::cas::Probe;
use crate::chart::{Chart, SamplePlan};
use crate::dsl::{parse_document, parse_scalar_operand, Document, StructureData};
use crate::run::run_document;
use crate::structures::{
    classify, jacobi_bracket, lift_contact, reeb, ContactData, Grade, LrjData, Overall,
    StructureClass, VerificationReport,
};
use crate::suite::{full_suite, Sabotage};

const SEED_ENV: &str = "LRJCALC_SEED";
const EXIT_OK: i32 = 0;
const EXIT_CHECK_FAILED: i32 = 1;
const EXIT_BAD_INPUT: i32 = 2;

#[derive(Parser)]
#[command(
    name = "lrjcalc",
    version,
    about = "Verify skew-symmetric structures on first-order differential operators"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a .geo file and run its check directives
    Check {
        /// Path to the .geo file
        input: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Run the built-in randomized identity suites on R^3 and R^5 charts
    Selftest {
        /// RNG seed (falls back to LRJCALC_SEED, then 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Random instances per property and chart
        #[arg(long, default_value_t = 25)]
        cases: usize,
        /// Plant a wrong merge sign in the wedge product; the suite must
        /// catch it
        #[arg(long, hide = true)]
        sabotage_wedge_sign: bool,
    },
    /// Solve i_H w = -delta(1) and print the distinguished operator H
    Reeb {
        /// Path to the .geo file
        input: PathBuf,
        /// Structure to use (defaults to the only eligible declaration)
        #[arg(long)]
        structure: Option<String>,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Report whether alpha(1) = -1 (nonexact) or not (exact)
    Classify {
        /// Path to the .geo file
        input: PathBuf,
        /// Structure to use (defaults to the only eligible declaration)
        #[arg(long)]
        structure: Option<String>,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Evaluate the bracket of two scalars: bracket FILE f=EXPR g=EXPR
    Bracket {
        /// Path to the .geo file
        input: PathBuf,
        /// The two operands, written f=EXPR and g=EXPR
        operands: Vec<String>,
        /// Structure to use (defaults to the only eligible declaration)
        #[arg(long)]
        structure: Option<String>,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

#[derive(Args)]
struct CommonOpts {
    /// Sample count for probabilistic zero tests
    #[arg(long, default_value_t = 32)]
    samples: usize,
    /// RNG seed (falls back to LRJCALC_SEED, then 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Absolute tolerance for numeric comparisons
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Write a JSON report to this path
    #[arg(long)]
    report: Option<PathBuf>,
    /// Keep only checks whose name matches one of these globs (* and ?)
    #[arg(long = "only")]
    only: Vec<String>,
}

/// Parse `std::env::args` and run; returns the process exit code.
pub fn main() -> i32 {
    match Cli::parse().cmd {
        Cmd::Check { input, opts } => cmd_check(&input, &opts),
        Cmd::Selftest {
            seed,
            cases,
            sabotage_wedge_sign,
        } => cmd_selftest(seed, cases, sabotage_wedge_sign),
        Cmd::Reeb {
            input,
            structure,
            opts,
        } => cmd_reeb(&input, structure.as_deref(), &opts),
        Cmd::Classify {
            input,
            structure,
            opts,
        } => cmd_classify(&input, structure.as_deref(), &opts),
        Cmd::Bracket {
            input,
            operands,
            structure,
            opts,
        } => cmd_bracket(&input, &operands, structure.as_deref(), &opts),
    }
}

fn cmd_check(input: &Path, opts: &CommonOpts) -> i32 {
    let doc = match load(input) {
        Ok(doc) => doc,
        Err(code) => return code,
    };
    let (seed, probe) = match probe_config(opts) {
        Ok(pair) => pair,
        Err(code) => return code,
    };
    let report = filter_checks(run_document(&doc, &probe), &opts.only);
    for c in &report.checks {
        println!("{:<14} {:<44} {}", c.grade.label(), c.check, c.formula);
        if let Some(w) = &c.witness {
            println!("{:<14}   witness: {w}", "");
        }
    }
    println!("overall: {}", report.overall());
    finish(&doc, seed, opts, report, None)
}

fn cmd_selftest(seed: Option<u64>, cases: usize, sabotage: bool) -> i32 {
    if cases == 0 {
        eprintln!("error: --cases must be at least 1");
        return EXIT_BAD_INPUT;
    }
    let seed = resolve_seed(seed);
    let sabotage = if sabotage {
        Sabotage::WedgeSign
    } else {
        Sabotage::None
    };
    let charts = [
        Chart::unit_box("R3", &["x", "y", "z"]),
        Chart::unit_box("R5", &["x1", "y1", "x2", "y2", "z"]),
    ];
    let mut violated = None;
    for chart in &charts {
        for r in full_suite(chart, seed, cases, sabotage) {
            match &r.counterexample {
                None => println!("ok {} on {} ({} cases)", r.name, chart.name(), r.cases),
                Some(ce) => {
                    println!("FAILED {} on {} (case {}):", r.name, chart.name(), r.cases);
                    for line in ce.lines() {
                        println!("    {line}");
                    }
                    violated.get_or_insert(r.name);
                }
            }
        }
    }
    match violated {
        None => {
            println!("selftest passed (seed {seed})");
            EXIT_OK
        }
        Some(name) => {
            println!("selftest failed: {name} violated (seed {seed})");
            EXIT_CHECK_FAILED
        }
    }
}

fn cmd_reeb(input: &Path, wanted: Option<&str>, opts: &CommonOpts) -> i32 {
    let (doc, seed, probe, name, data, mut report) = match setup(input, wanted, opts) {
        Ok(parts) => parts,
        Err(code) => return code,
    };
    let h = match reeb(data.omega(), &doc.chart, &probe) {
        Ok((h, rows)) => {
            report.extend(rows);
            h
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    let answer = format!("H = {}", h.display_with(doc.chart.coords()));
    finish(&doc, seed, opts, report.scoped(&name), Some(answer))
}

fn cmd_classify(input: &Path, wanted: Option<&str>, opts: &CommonOpts) -> i32 {
    let (doc, seed, probe, name, data, mut report) = match setup(input, wanted, opts) {
        Ok(parts) => parts,
        Err(code) => return code,
    };
    let class = match classify(&data, &doc.chart, &probe) {
        Ok((class, rows)) => {
            report.extend(rows);
            class
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    let answer = match class {
        StructureClass::ExactContact => "exact",
        StructureClass::NonexactContact => "nonexact",
    };
    finish(&doc, seed, opts, report.scoped(&name), Some(answer.to_string()))
}

fn cmd_bracket(input: &Path, operands: &[String], wanted: Option<&str>, opts: &CommonOpts) -> i32 {
    let (doc, seed, probe, name, data, mut report) = match setup(input, wanted, opts) {
        Ok(parts) => parts,
        Err(code) => return code,
    };
    let (f, g) = match parse_operands(operands, &doc) {
        Ok(pair) => pair,
        Err(code) => return code,
    };
    let value = match reeb(data.omega(), &doc.chart, &probe)
        .and_then(|(h, rows)| {
            report.extend(rows);
            jacobi_bracket(&f, &g, &data, &h, &doc.chart, &probe)
        })
        .map(|(value, rows)| {
            report.extend(rows);
            value
        }) {
        Ok(value) => value,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    let answer = value.display_with(doc.chart.coords()).to_string();
    finish(&doc, seed, opts, report.scoped(&name), Some(answer))
}

/// Shared preamble of the single-structure commands: parse the file, build
/// the probe, and resolve the target structure to twisted symplectic data.
/// The returned report carries any rows produced while lifting contact data.
#[allow(clippy::type_complexity)]
fn setup(
    input: &Path,
    wanted: Option<&str>,
    opts: &CommonOpts,
) -> Result<(Document, u64, Probe, String, LrjData, VerificationReport), i32> {
    let doc = load(input)?;
    let (seed, probe) = probe_config(opts)?;
    let (name, data, report) = resolve_lrj(&doc, wanted, &probe)?;
    Ok((doc, seed, probe, name, data, report))
}

fn load(input: &Path) -> Result<Document, i32> {
    let src = std::fs::read_to_string(input).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", input.display());
        EXIT_BAD_INPUT
    })?;
    parse_document(&src).map_err(|e| {
        eprintln!("error: {}: {e}", input.display());
        EXIT_BAD_INPUT
    })
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| std::env::var(SEED_ENV).ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

fn probe_config(opts: &CommonOpts) -> Result<(u64, Probe), i32> {
    if opts.samples == 0 {
        eprintln!("error: --samples must be at least 1");
        return Err(EXIT_BAD_INPUT);
    }
    if !(opts.tolerance > 0.0) {
        eprintln!("error: --tolerance must be positive");
        return Err(EXIT_BAD_INPUT);
    }
    let seed = resolve_seed(opts.seed);
    let plan = SamplePlan::new(opts.samples, seed, 0.1).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_BAD_INPUT
    })?;
    Ok((seed, Probe::new(plan, opts.tolerance)))
}

/// Find the structure the command should act on: the named one, or the
/// unique declaration carrying twisted symplectic data. Lifts are resolved
/// through their base contact data; the rows recording that construction are
/// returned alongside.
fn resolve_lrj(
    doc: &Document,
    wanted: Option<&str>,
    probe: &Probe,
) -> Result<(String, LrjData, VerificationReport), i32> {
    let eligible = |data: &StructureData| {
        matches!(
            data,
            StructureData::Lrj { .. } | StructureData::Lift { .. }
        )
    };
    let decl = match wanted {
        Some(name) => doc.structure(name).ok_or_else(|| {
            eprintln!("error: no structure named '{name}'");
            EXIT_BAD_INPUT
        })?,
        None => {
            let mut candidates = doc.structures.iter().filter(|d| eligible(&d.data));
            let first = candidates.next().ok_or_else(|| {
                eprintln!("error: the file declares no lrj or lift structure");
                EXIT_BAD_INPUT
            })?;
            if candidates.next().is_some() {
                eprintln!("error: several structures qualify; pick one with --structure");
                return Err(EXIT_BAD_INPUT);
            }
            first
        }
    };
    match &decl.data {
        StructureData::Lrj { alpha, omega } => {
            let data = LrjData::new(AlphaForm::new(alpha.clone()), omega.clone()).map_err(|e| {
                eprintln!("error: {e}");
                EXIT_CHECK_FAILED
            })?;
            Ok((decl.name.clone(), data, VerificationReport::new()))
        }
        StructureData::Lift { contact, c, g } => {
            let base = doc
                .structure(contact)
                .expect("parser verified the contact reference");
            let StructureData::Contact { beta, omega, reeb } = &base.data else {
                unreachable!("parser verified the reference kind");
            };
            let contact_data = ContactData::new(beta.clone(), omega.clone(), reeb.clone())
                .map_err(|e| {
                    eprintln!("error: {e}");
                    EXIT_CHECK_FAILED
                })?;
            let (lifted, report) =
                lift_contact(&contact_data, c.clone(), g.clone(), &doc.chart, probe).map_err(
                    |e| {
                        eprintln!("error: {e}");
                        EXIT_CHECK_FAILED
                    },
                )?;
            Ok((decl.name.clone(), lifted.as_lrj(), report))
        }
        _ => {
            eprintln!(
                "error: '{}' is a {} structure; reeb, classify, and bracket need lrj or lift",
                decl.name,
                decl.kind().keyword()
            );
            Err(EXIT_BAD_INPUT)
        }
    }
}

fn parse_operands(operands: &[String], doc: &Document) -> Result<(crate::cas::ScalarExpr, crate::cas::ScalarExpr), i32> {
    let mut f = None;
    let mut g = None;
    for operand in operands {
        let Some((key, text)) = operand.split_once('=') else {
            eprintln!("error: operand '{operand}' is not of the form f=EXPR or g=EXPR");
            return Err(EXIT_BAD_INPUT);
        };
        let slot = match key.trim() {
            "f" => &mut f,
            "g" => &mut g,
            other => {
                eprintln!("error: unknown operand '{other}'; expected f and g");
                return Err(EXIT_BAD_INPUT);
            }
        };
        if slot.is_some() {
            eprintln!("error: operand '{}' given twice", key.trim());
            return Err(EXIT_BAD_INPUT);
        }
        *slot = Some(parse_scalar_operand(text, doc).map_err(|e| {
            eprintln!("error: operand {}: {e}", key.trim());
            EXIT_BAD_INPUT
        })?);
    }
    match (f, g) {
        (Some(f), Some(g)) => Ok((f, g)),
        _ => {
            eprintln!("error: both f=EXPR and g=EXPR are required");
            Err(EXIT_BAD_INPUT)
        }
    }
}

/// Print the answer (if any), write the optional JSON report, and map the
/// outcome to the exit-code contract: 0 unless some check failed.
fn finish(
    doc: &Document,
    seed: u64,
    opts: &CommonOpts,
    report: VerificationReport,
    answer: Option<String>,
) -> i32 {
    if let Some(answer) = &answer {
        println!("{answer}");
    }
    let report = filter_checks(report, &opts.only);
    if answer.is_some() {
        for c in report.checks.iter().filter(|c| c.grade == Grade::Failed) {
            eprintln!("failed: {} ({})", c.check, c.formula);
        }
    }
    if let Some(path) = &opts.report {
        if let Err(code) = write_json(path, doc, seed, opts, &report, answer.as_deref()) {
            return code;
        }
    }
    if report.overall() == Overall::Fail {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    }
}

fn filter_checks(mut report: VerificationReport, globs: &[String]) -> VerificationReport {
    if globs.is_empty() {
        return report;
    }
    report
        .checks
        .retain(|c| globs.iter().any(|g| glob_match(g, &c.check)));
    report
}

/// `*` matches any run of characters, `?` exactly one; the rest is literal.
fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    while pi < p.len() && p[pi] == '*' {
        pi += 1;
    }
    pi == p.len()
}

#[derive(Serialize)]
struct JsonReport<'a> {
    tool: &'static str,
    version: &'static str,
    chart: ChartSummary<'a>,
    seed: u64,
    samples: usize,
    tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<&'a str>,
    checks: Vec<crate::structures::CheckResult>,
    overall: Overall,
}

#[derive(Serialize)]
struct ChartSummary<'a> {
    name: &'a str,
    dim: usize,
    coords: &'a [String],
}

fn write_json(
    path: &Path,
    doc: &Document,
    seed: u64,
    opts: &CommonOpts,
    report: &VerificationReport,
    result: Option<&str>,
) -> Result<(), i32> {
    // Timing is the one nondeterministic field; pinning it makes reports
    // from equal seeds byte-identical.
    let checks = report
        .checks
        .iter()
        .cloned()
        .map(|mut c| {
            c.millis = 0;
            c
        })
        .collect();
    let json = JsonReport {
        tool: "lrjcalc",
        version: env!("CARGO_PKG_VERSION"),
        chart: ChartSummary {
            name: doc.chart.name(),
            dim: doc.chart.dim(),
            coords: doc.chart.coords(),
        },
        seed,
        samples: opts.samples,
        tolerance: opts.tolerance,
        result,
        checks,
        overall: report.overall(),
    };
    let text = serde_json::to_string_pretty(&json).expect("report serialization cannot fail");
    std::fs::write(path, text + "\n").map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_BAD_INPUT
    })
}
