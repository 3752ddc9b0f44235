//! Graded verdicts and check reports.
//!
//! Every structure-level operation returns a [`VerificationReport`]: a list
//! of named checks, each carrying the identity it tested (as a plain formula
//! string), a [`Grade`], and an optional numeric witness. The report's
//! overall verdict is the weakest grade among its checks.

use crate::cas::{NonvanishGrade, ZeroGrade};
use serde::Serialize;
use std::fmt;
use std::time::Instant;

/// How strongly a check holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "grade")]
pub enum Grade {
    /// Decided by the exact normal form.
    Exact,
    /// Held at every sample point within tolerance.
    Probabilistic { samples: usize, tol: f64 },
    /// A concrete counterexample was found.
    Failed,
    /// Sampling could not decide (e.g. no valid sample points).
    Indeterminate,
}

impl Grade {
    pub fn holds(&self) -> bool {
        matches!(self, Grade::Exact | Grade::Probabilistic { .. })
    }

    /// Rank for weakest-wins aggregation: lower is weaker.
    fn rank(&self) -> u8 {
        match self {
            Grade::Failed => 0,
            Grade::Indeterminate => 1,
            Grade::Probabilistic { .. } => 2,
            Grade::Exact => 3,
        }
    }

    pub fn weaker_of(a: Grade, b: Grade) -> Grade {
        if a.rank() <= b.rank() {
            a
        } else {
            b
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Grade::Exact => "exact",
            Grade::Probabilistic { .. } => "probabilistic",
            Grade::Failed => "failed",
            Grade::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome of a zero test, as a grade plus witness text.
pub fn grade_zero(z: &ZeroGrade) -> (Grade, Option<String>) {
    match z {
        ZeroGrade::Exact => (Grade::Exact, None),
        ZeroGrade::Probabilistic { samples, tol } => (
            Grade::Probabilistic {
                samples: *samples,
                tol: *tol,
            },
            None,
        ),
        ZeroGrade::NonZero { point, value } => {
            (Grade::Failed, Some(residual_witness(*value, point)))
        }
        ZeroGrade::Indeterminate => (Grade::Indeterminate, None),
    }
}

/// Outcome of a nonvanishing test, as a grade plus witness text.
pub fn grade_nonvanish(nv: &NonvanishGrade) -> (Grade, Option<String>) {
    match nv {
        NonvanishGrade::ExactConst { value } => (Grade::Exact, Some(format!("constant {value}"))),
        NonvanishGrade::Probabilistic { samples, tol } => (
            Grade::Probabilistic {
                samples: *samples,
                tol: *tol,
            },
            None,
        ),
        NonvanishGrade::IdenticallyZero => (Grade::Failed, Some("identically zero".into())),
        NonvanishGrade::VanishesNear { point, value } => {
            (Grade::Failed, Some(residual_witness(*value, point)))
        }
        NonvanishGrade::Indeterminate => (Grade::Indeterminate, None),
    }
}

fn residual_witness(value: f64, point: &[f64]) -> String {
    let coords: Vec<String> = point.iter().map(|c| format!("{c:.6}")).collect();
    format!("value {value:.6e} at ({})", coords.join(", "))
}

/// One named check: the identity it tested, how strongly it held, and an
/// optional witness (counterexample point or informative value).
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub formula: String,
    #[serde(flatten)]
    pub grade: Grade,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub millis: u128,
}

impl CheckResult {
    pub fn new(
        check: impl Into<String>,
        formula: impl Into<String>,
        grade: Grade,
        witness: Option<String>,
    ) -> CheckResult {
        CheckResult {
            check: check.into(),
            formula: formula.into(),
            grade,
            witness,
            millis: 0,
        }
    }

    /// Run `body`, recording wall time on the resulting check.
    pub fn timed(
        check: impl Into<String>,
        formula: impl Into<String>,
        body: impl FnOnce() -> (Grade, Option<String>),
    ) -> CheckResult {
        let start = Instant::now();
        let (grade, witness) = body();
        let mut res = CheckResult::new(check, formula, grade, witness);
        res.millis = start.elapsed().as_millis();
        res
    }
}

/// Overall verdict of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Overall {
    Pass,
    Fail,
    Indeterminate,
}

impl fmt::Display for Overall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Overall::Pass => "pass",
            Overall::Fail => "fail",
            Overall::Indeterminate => "indeterminate",
        })
    }
}

/// A bundle of graded checks with weakest-wins aggregation.
#[derive(Debug, Clone, Default, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn new() -> VerificationReport {
        VerificationReport { checks: Vec::new() }
    }

    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    /// Prefix every check name with `scope.`; used when a report is folded
    /// into a larger one.
    pub fn scoped(mut self, scope: &str) -> VerificationReport {
        for c in &mut self.checks {
            c.check = format!("{scope}.{}", c.check);
        }
        self
    }

    pub fn find(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == name)
    }

    /// Weakest grade among all checks (Exact when empty).
    pub fn weakest(&self) -> Grade {
        self.checks
            .iter()
            .map(|c| c.grade.clone())
            .fold(Grade::Exact, Grade::weaker_of)
    }

    pub fn overall(&self) -> Overall {
        match self.weakest() {
            Grade::Failed => Overall::Fail,
            Grade::Indeterminate => Overall::Indeterminate,
            _ => Overall::Pass,
        }
    }

    pub fn passed(&self) -> bool {
        self.overall() == Overall::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(name: &str, grade: Grade) -> CheckResult {
        CheckResult::new(name, "lhs = rhs", grade, None)
    }

    #[test]
    fn overall_is_the_weakest_grade() {
        let mut r = VerificationReport::new();
        r.push(check("a", Grade::Exact));
        assert_eq!(r.overall(), Overall::Pass);
        r.push(check(
            "b",
            Grade::Probabilistic {
                samples: 32,
                tol: 1e-9,
            },
        ));
        assert_eq!(r.overall(), Overall::Pass);
        assert!(matches!(r.weakest(), Grade::Probabilistic { .. }));
        r.push(check("c", Grade::Indeterminate));
        assert_eq!(r.overall(), Overall::Indeterminate);
        r.push(check("d", Grade::Failed));
        assert_eq!(r.overall(), Overall::Fail);
    }

    #[test]
    fn grades_serialize_to_lowercase_tags() {
        let c = check("a", Grade::Exact);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["grade"], "exact");
        assert_eq!(v["formula"], "lhs = rhs");
        assert!(v.get("witness").is_none());
        let p = check(
            "b",
            Grade::Probabilistic {
                samples: 8,
                tol: 1e-9,
            },
        );
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["grade"], "probabilistic");
        assert_eq!(v["samples"], 8);
    }

    #[test]
    fn scoping_prefixes_check_names() {
        let mut r = VerificationReport::new();
        r.push(check("unit_pairing", Grade::Exact));
        let r = r.scoped("contact");
        assert!(r.find("contact.unit_pairing").is_some());
    }
}
