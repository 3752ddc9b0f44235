//! The `.geo` text format: one chart per file, followed by scalar, field,
//! operator, and form bindings, structure declarations, and check directives.
//!
//! Parsing resolves as it goes: the produced [`Document`] carries calculus
//! values, not syntax trees, so printing is canonical by construction and
//! `parse(print(doc))` is semantically identical to `doc`.

mod lex;
mod parse;
mod print;

use num::BigRational;
use thiserror::Error;

use crate::calculus::{DiffOp, SkewFormD, XForm};
use crate::cas::ScalarExpr;
use crate::chart::Chart;

pub use parse::{parse_document, parse_scalar_operand};
pub use print::print_document;

/// Lexical, syntactic, or semantic failure, pointing at the offending token.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message} (at {token})")]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub column: usize,
    pub token: String,
}

/// A parsed and fully resolved `.geo` file.
#[derive(Debug, Clone)]
pub struct Document {
    pub chart: Chart,
    pub bindings: Vec<Binding>,
    pub structures: Vec<StructureDecl>,
    pub checks: Vec<CheckDirective>,
}

impl Document {
    pub fn binding(&self, name: &str) -> Option<&Value> {
        self.bindings
            .iter()
            .find(|b| b.name == name)
            .map(|b| &b.value)
    }

    pub fn structure(&self, name: &str) -> Option<&StructureDecl> {
        self.structures.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct Binding {
    pub name: String,
    pub value: Value,
}

#[derive(Debug, Clone)]
pub enum Value {
    Scalar(ScalarExpr),
    /// Vector field: an operator with no unit component.
    Field(DiffOp),
    Op(DiffOp),
    FormX(XForm),
    FormD(SkewFormD),
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Field(_) => "field",
            Value::Op(_) => "operator",
            Value::FormX(_) => "form on X",
            Value::FormD(_) => "form on D",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    Lcs,
    Contact,
    Lrj,
    Lift,
}

impl StructureKind {
    pub fn keyword(self) -> &'static str {
        match self {
            StructureKind::Lcs => "lcs",
            StructureKind::Contact => "contact",
            StructureKind::Lrj => "lrj",
            StructureKind::Lift => "lift",
        }
    }
}

/// A named structure declaration with its entries resolved to values.
/// `refs` remembers which binding name each entry came from, for printing.
#[derive(Debug, Clone)]
pub struct StructureDecl {
    pub name: String,
    pub data: StructureData,
    pub refs: Vec<(&'static str, String)>,
}

impl StructureDecl {
    pub fn kind(&self) -> StructureKind {
        match self.data {
            StructureData::Lcs { .. } => StructureKind::Lcs,
            StructureData::Contact { .. } => StructureKind::Contact,
            StructureData::Lrj { .. } => StructureKind::Lrj,
            StructureData::Lift { .. } => StructureKind::Lift,
        }
    }
}

#[derive(Debug, Clone)]
pub enum StructureData {
    Lcs {
        alpha: XForm,
        omega: XForm,
    },
    Contact {
        beta: XForm,
        omega: XForm,
        reeb: DiffOp,
    },
    Lrj {
        alpha: SkewFormD,
        omega: SkewFormD,
    },
    /// Lift of a declared contact structure, parameterized by the two scalars
    /// the twist construction leaves free.
    Lift {
        contact: String,
        c: BigRational,
        g: ScalarExpr,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckDirective {
    pub target: String,
    /// `with trials = N` — size of the randomized portions of the check.
    pub trials: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const STANDARD: &str = "\
chart R3 (x, y, z);
form beta : 1 on X = dz - y*dx;
form w : 2 on X = dx ^ dy;
field E = d/dz;
contact C { beta = beta; omega = w; reeb = E; }
lift L { contact = C; c = -1; g = 0; }
check L with trials = 6;
";

    #[test]
    fn the_standard_file_parses_and_resolves() {
        let doc = parse_document(STANDARD).unwrap();
        assert_eq!(doc.chart.dim(), 3);
        assert_eq!(doc.bindings.len(), 3);
        let Some(Value::FormX(beta)) = doc.binding("beta") else {
            panic!("beta should be a form on X");
        };
        assert_eq!(beta.comp(&[2]).to_string(), "1");
        assert_eq!(beta.comp(&[0]).to_string(), "-1*x1");
        assert_eq!(doc.checks, vec![CheckDirective { target: "L".into(), trials: Some(6) }]);
        let Some(StructureDecl { data: StructureData::Lift { c, .. }, .. }) = doc.structure("L")
        else {
            panic!("L should be a lift");
        };
        assert_eq!(c.to_string(), "-1");
    }

    #[test]
    fn unit_covector_parses_on_d_and_is_rejected_on_x() {
        let doc = parse_document("chart R3 (x, y, z); form a : 1 on D = -1*u;").unwrap();
        let Some(Value::FormD(a)) = doc.binding("a") else {
            panic!("a should be a form on D");
        };
        assert_eq!(a.comp(&[0]).to_string(), "-1");
        assert!(a.comp(&[1]).is_zero_const());

        let err = parse_document("chart R3 (x, y, z); form a : 1 on X = -1*u;").unwrap_err();
        assert!(err.message.contains("unit covector"), "{err}");
    }

    #[test]
    fn unknown_coordinate_is_reported_at_the_covector() {
        let err = parse_document("chart R3 (x, y, z);\nform b : 1 on X = dw;").unwrap_err();
        assert_eq!(err.message, "unknown coordinate w");
        assert_eq!((err.line, err.column), (2, 19));
        assert_eq!(err.token, "'dw'");
    }

    #[test]
    fn wedge_binds_looser_than_scalar_product() {
        // 2*x*dx ^ dy must read as (2*x) * (dx ^ dy).
        let doc =
            parse_document("chart R2 (x, y); form w : 2 on X = 2*x*dx ^ dy;").unwrap();
        let Some(Value::FormX(w)) = doc.binding("w") else {
            panic!();
        };
        assert_eq!(w.comp(&[0, 1]).to_string(), "2*x0");
    }

    #[test]
    fn covector_order_contributes_the_permutation_sign() {
        let doc = parse_document("chart R2 (x, y); form w : 2 on X = dy ^ dx;").unwrap();
        let Some(Value::FormX(w)) = doc.binding("w") else {
            panic!();
        };
        assert_eq!(w.comp(&[0, 1]).to_string(), "-1");
    }

    #[test]
    fn semantic_errors_name_the_offender() {
        let cases: &[(&str, &str)] = &[
            (
                "chart R2 (x, y); scalar a = q + 1;",
                "unresolved identifier 'q'",
            ),
            (
                "chart R2 (x, y); form w : 1 on X = dx ^ dy;",
                "degree mismatch: term has degree 2, the binding declares 1",
            ),
            (
                "chart R2 (x, y); field F = 1 + d/dx;",
                "a field has no unit term; declare an 'op' instead",
            ),
            (
                "chart R2 (x, y); form w : 2 on X = dx ^ dy; lcs S { alpha = w; omega = w; }",
                "'w' has degree 2, expected 1",
            ),
            ("chart R2 (x, y); check missing;", "unresolved identifier 'missing'"),
        ];
        for (src, want) in cases {
            let err = parse_document(src).unwrap_err();
            assert_eq!(&err.message, want, "for {src}");
        }
    }

    #[test]
    fn print_parse_is_idempotent_and_semantics_survive() {
        let doc = parse_document(STANDARD).unwrap();
        let once = print_document(&doc);
        let again = print_document(&parse_document(&once).unwrap());
        assert_eq!(once, again);

        let reparsed = parse_document(&once).unwrap();
        let (Some(Value::FormX(a)), Some(Value::FormX(b))) =
            (doc.binding("beta"), reparsed.binding("beta"))
        else {
            panic!();
        };
        assert!((a.clone() - b.clone()).normalize().is_exactly_zero());
    }

    #[test]
    fn ops_with_unit_terms_round_trip() {
        let src = "chart R2 (x, y); op phi = 1 - y*d/dy; scalar half = 1/2;";
        let doc = parse_document(src).unwrap();
        let Some(Value::Op(phi)) = doc.binding("phi") else {
            panic!();
        };
        assert_eq!(phi.unit_part().to_string(), "1");
        let printed = print_document(&doc);
        assert_eq!(printed, print_document(&parse_document(&printed).unwrap()));
    }

    #[test]
    fn domain_boxes_broadcast_or_match_arity() {
        let doc = parse_document("chart R2 (x, y) domain [-1, 1];").unwrap();
        assert_eq!(doc.chart.domain(), &[(-1.0, 1.0), (-1.0, 1.0)]);
        let doc = parse_document("chart R2 (x, y) domain [-1, 1; 0, 2.5];").unwrap();
        assert_eq!(doc.chart.domain(), &[(-1.0, 1.0), (0.0, 2.5)]);
        let err = parse_document("chart R3 (x, y, z) domain [-1, 1; 0, 2];").unwrap_err();
        assert!(err.message.contains("2 intervals for 3 coordinates"));
    }
}
