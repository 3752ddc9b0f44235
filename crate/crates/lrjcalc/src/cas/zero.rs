//! Graded zero and nonvanishing tests.
//!
//! Exact answers come from the normal form; everything else is decided by
//! seeded sampling inside the chart domain with a relative tolerance. The
//! scale for the tolerance is the "constructive" evaluation of the expression
//! (sums of absolute values), so an identity whose terms are individually
//! huge is not declared nonzero over honest float cancellation noise.

use super::{ScalarExpr, ZeroGrade};
use crate::chart::{Chart, SamplePlan, DEFAULT_TOL};

/// Sampling policy for the numeric half of graded tests.
#[derive(Debug, Clone)]
pub struct Probe {
    pub plan: SamplePlan,
    pub tol: f64,
}

impl Probe {
    pub fn new(plan: SamplePlan, tol: f64) -> Probe {
        Probe { plan, tol }
    }

    /// Default plan (32 samples, 10% margin) with the default tolerance.
    pub fn seeded(seed: u64) -> Probe {
        Probe {
            plan: SamplePlan::seeded(seed),
            tol: DEFAULT_TOL,
        }
    }
}

/// Extra draws allowed so that points hitting poles can be skipped without
/// starving the test of samples.
const RETRY_FACTOR: usize = 8;

/// Graded test of `e == 0` over the chart domain.
pub fn is_zero(e: &ScalarExpr, chart: &Chart, probe: &Probe) -> ZeroGrade {
    let n = e.normalized();
    if n.is_exactly_zero() {
        return ZeroGrade::Exact;
    }
    let reduced = n.expr;
    let budget = SamplePlan {
        count: probe.plan.count * RETRY_FACTOR,
        ..probe.plan
    };
    let mut valid = 0usize;
    for p in chart.sample_points(&budget) {
        if valid == probe.plan.count {
            break;
        }
        let (v, s) = match (reduced.eval(&p), reduced.eval_scale(&p)) {
            (Ok(v), Ok(s)) if v.is_finite() && s.is_finite() => (v, s),
            _ => continue,
        };
        valid += 1;
        if v.abs() > probe.tol * (1.0 + s) {
            return ZeroGrade::NonZero { point: p, value: v };
        }
    }
    if valid == 0 {
        ZeroGrade::Indeterminate
    } else {
        ZeroGrade::Probabilistic {
            samples: valid,
            tol: probe.tol,
        }
    }
}

/// Outcome of a graded nonvanishing test (volume forms, Pfaffians).
#[derive(Debug, Clone, PartialEq)]
pub enum NonvanishGrade {
    /// The normal form is a nonzero constant: nonvanishing everywhere.
    ExactConst { value: f64 },
    /// Every seeded sample was bounded away from zero.
    Probabilistic { samples: usize, tol: f64 },
    /// The normal form is literally zero.
    IdenticallyZero,
    /// A sample point where the value dropped below tolerance.
    VanishesNear { point: Vec<f64>, value: f64 },
    /// Evaluation failed at every attempted sample.
    Indeterminate,
}

impl NonvanishGrade {
    /// True for the two affirmative outcomes.
    pub fn holds(&self) -> bool {
        matches!(
            self,
            NonvanishGrade::ExactConst { .. } | NonvanishGrade::Probabilistic { .. }
        )
    }
}

/// Graded test of `e != 0` everywhere on the chart domain.
pub fn is_nonvanishing(e: &ScalarExpr, chart: &Chart, probe: &Probe) -> NonvanishGrade {
    let n = e.normalized();
    if n.is_exactly_zero() {
        return NonvanishGrade::IdenticallyZero;
    }
    let reduced = n.expr;
    if let Some(q) = constant_value(&reduced) {
        return NonvanishGrade::ExactConst { value: q };
    }
    let budget = SamplePlan {
        count: probe.plan.count * RETRY_FACTOR,
        ..probe.plan
    };
    let mut valid = 0usize;
    for p in chart.sample_points(&budget) {
        if valid == probe.plan.count {
            break;
        }
        let (v, s) = match (reduced.eval(&p), reduced.eval_scale(&p)) {
            (Ok(v), Ok(s)) if v.is_finite() && s.is_finite() => (v, s),
            _ => continue,
        };
        valid += 1;
        if v.abs() <= probe.tol * (1.0 + s) {
            return NonvanishGrade::VanishesNear { point: p, value: v };
        }
    }
    if valid == 0 {
        NonvanishGrade::Indeterminate
    } else {
        NonvanishGrade::Probabilistic {
            samples: valid,
            tol: probe.tol,
        }
    }
}

fn constant_value(e: &ScalarExpr) -> Option<f64> {
    e.as_rat().map(super::rat_to_f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart2() -> Chart {
        Chart::unit_box("c", &["x", "y"])
    }

    fn x() -> ScalarExpr {
        ScalarExpr::coord(0)
    }

    #[test]
    fn exact_zero_needs_no_samples() {
        let e = (x() + ScalarExpr::one()).pow(2)
            - x().pow(2)
            - ScalarExpr::int(2) * x()
            - ScalarExpr::one();
        assert_eq!(is_zero(&e, &chart2(), &Probe::seeded(1)), ZeroGrade::Exact);
    }

    #[test]
    fn pythagoras_is_probabilistic() {
        let e = ScalarExpr::sin(x()).pow(2) + ScalarExpr::cos(x()).pow(2) - ScalarExpr::one();
        match is_zero(&e, &chart2(), &Probe::seeded(7)) {
            ZeroGrade::Probabilistic { samples, tol } => {
                assert_eq!(samples, 32);
                assert_eq!(tol, DEFAULT_TOL);
            }
            other => panic!("expected probabilistic grade, got {other:?}"),
        }
    }

    #[test]
    fn nonzero_reports_witness() {
        let e = x() * x() + ScalarExpr::one();
        match is_zero(&e, &chart2(), &Probe::seeded(3)) {
            ZeroGrade::NonZero { point, value } => {
                assert_eq!(point.len(), 2);
                assert!(value >= 1.0);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn pole_everywhere_is_indeterminate() {
        // 1/(x - x) normalizes to an undefined quotient; every sample fails.
        let e = ScalarExpr::one() / (x() - x());
        assert_eq!(
            is_zero(&e, &chart2(), &Probe::seeded(5)),
            ZeroGrade::Indeterminate
        );
    }

    #[test]
    fn nonvanishing_constant_is_exact() {
        // x/x reduces to 1: exact nonvanishing (with a caveat recorded
        // elsewhere), not a sampled claim.
        let e = x() / x();
        match is_nonvanishing(&e, &chart2(), &Probe::seeded(11)) {
            NonvanishGrade::ExactConst { value } => assert_eq!(value, 1.0),
            other => panic!("expected exact constant, got {other:?}"),
        }
    }

    #[test]
    fn nonvanishing_detects_zero_crossing() {
        match is_nonvanishing(&x(), &chart2(), &Probe::seeded(2)) {
            NonvanishGrade::Probabilistic { .. } | NonvanishGrade::VanishesNear { .. } => {}
            other => panic!("unexpected grade {other:?}"),
        }
        assert_eq!(
            is_nonvanishing(&ScalarExpr::zero(), &chart2(), &Probe::seeded(2)),
            NonvanishGrade::IdenticallyZero
        );
    }
}
