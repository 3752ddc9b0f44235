//! Canonical rendering of a resolved document. Whitespace, term order, and
//! entry order are fixed, so printing the parse of printed output is stable.

use std::fmt::Write;

use super::{Document, StructureData, StructureDecl, Value};
use crate::calculus::{DiffOp, SkewFormD, XForm};
use crate::cas::ScalarExpr;

pub fn print_document(doc: &Document) -> String {
    let names = doc.chart.coords();
    let mut out = String::new();
    write!(out, "chart {} (", doc.chart.name()).unwrap();
    out.push_str(&names.join(", "));
    out.push_str(") domain [");
    let domain: Vec<String> = doc
        .chart
        .domain()
        .iter()
        .map(|(lo, hi)| format!("{lo}, {hi}"))
        .collect();
    out.push_str(&domain.join("; "));
    out.push_str("];\n");
    for b in &doc.bindings {
        match &b.value {
            Value::Scalar(e) => {
                writeln!(out, "scalar {} = {};", b.name, e.display_with(names)).unwrap();
            }
            Value::Field(op) => {
                writeln!(out, "field {} = {};", b.name, op_text(op, names)).unwrap();
            }
            Value::Op(op) => {
                writeln!(out, "op {} = {};", b.name, op_text(op, names)).unwrap();
            }
            Value::FormX(f) => {
                writeln!(
                    out,
                    "form {} : {} on X = {};",
                    b.name,
                    f.degree(),
                    x_form_text(f, names)
                )
                .unwrap();
            }
            Value::FormD(f) => {
                writeln!(
                    out,
                    "form {} : {} on D = {};",
                    b.name,
                    f.degree(),
                    d_form_text(f, names)
                )
                .unwrap();
            }
        }
    }
    for s in &doc.structures {
        out.push_str(&structure_text(s, names));
    }
    for c in &doc.checks {
        match c.trials {
            Some(n) => writeln!(out, "check {} with trials = {};", c.target, n).unwrap(),
            None => writeln!(out, "check {};", c.target).unwrap(),
        }
    }
    out
}

/// Wrap a rendered scalar when it would not reparse as a single factor.
fn factor(text: String) -> String {
    if text.contains(' ') {
        format!("({text})")
    } else {
        text
    }
}

fn scalar_text(e: &ScalarExpr, names: &[String]) -> String {
    format!("{}", e.display_with(names))
}

fn term_text(coeff: &ScalarExpr, rendered: String, mono: &str) -> String {
    if coeff.is_one_const() {
        mono.to_string()
    } else {
        format!("{}*{mono}", factor(rendered))
    }
}

fn x_form_text(f: &XForm, names: &[String]) -> String {
    let terms: Vec<String> = f
        .comps_iter()
        .map(|(key, coeff)| {
            let rendered = scalar_text(coeff, names);
            if key.is_empty() {
                return rendered;
            }
            let mono: Vec<String> = key
                .iter()
                .map(|&i| format!("d{}", names[i as usize]))
                .collect();
            term_text(coeff, rendered, &mono.join(" ^ "))
        })
        .collect();
    join_terms(terms)
}

fn d_form_text(f: &SkewFormD, names: &[String]) -> String {
    let terms: Vec<String> = f
        .comps_iter()
        .map(|(key, coeff)| {
            let rendered = scalar_text(coeff, names);
            if key.is_empty() {
                return rendered;
            }
            let mono: Vec<String> = key
                .iter()
                .map(|&i| {
                    if i == 0 {
                        "u".to_string()
                    } else {
                        format!("d{}", names[i as usize - 1])
                    }
                })
                .collect();
            term_text(coeff, rendered, &mono.join(" ^ "))
        })
        .collect();
    join_terms(terms)
}

fn op_text(op: &DiffOp, names: &[String]) -> String {
    let mut terms = Vec::new();
    if !op.unit_part().is_zero_const() {
        terms.push(scalar_text(op.unit_part(), names));
    }
    for (i, coeff) in op.vector_coeffs().iter().enumerate() {
        if coeff.is_zero_const() {
            continue;
        }
        let basis = format!("d/d{}", names[i]);
        if coeff.is_one_const() {
            terms.push(basis);
        } else {
            terms.push(format!("{}*{basis}", factor(scalar_text(coeff, names))));
        }
    }
    join_terms(terms)
}

fn join_terms(terms: Vec<String>) -> String {
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

fn structure_text(s: &StructureDecl, names: &[String]) -> String {
    let find = |key: &str| -> &str {
        s.refs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, n)| n.as_str())
            .expect("resolved structures carry their reference names")
    };
    match &s.data {
        StructureData::Lcs { .. } => format!(
            "lcs {} {{ alpha = {}; omega = {}; }}\n",
            s.name,
            find("alpha"),
            find("omega")
        ),
        StructureData::Contact { .. } => format!(
            "contact {} {{ beta = {}; omega = {}; reeb = {}; }}\n",
            s.name,
            find("beta"),
            find("omega"),
            find("reeb")
        ),
        StructureData::Lrj { .. } => format!(
            "lrj {} {{ alpha = {}; omega = {}; }}\n",
            s.name,
            find("alpha"),
            find("omega")
        ),
        StructureData::Lift { contact, c, g } => format!(
            "lift {} {{ contact = {}; c = {}; g = {}; }}\n",
            s.name,
            contact,
            c,
            g.display_with(names)
        ),
    }
}
