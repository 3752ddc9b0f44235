//! The Reeb operator, the decomposition it induces, and the module
//! isomorphisms a nondegenerate pairing provides.

use super::report::{grade_nonvanish, CheckResult, Grade, VerificationReport};
use super::solve::solve_linear;
use super::{kernel_basis, zero_scalar, StructureError};
use crate::calculus::{pfaffian_matrix, DiffOp, SkewFormD};
use crate::cas::{is_nonvanishing, Probe, ScalarExpr};
use crate::chart::Chart;
use crate::rnd::ExprGen;

/// Assemble the linear system `i_phi w = nu` in the operator frame.
fn contraction_system(omega: &SkewFormD) -> Vec<Vec<ScalarExpr>> {
    let frame = omega.dim() + 1;
    (0..frame)
        .map(|j| {
            (0..frame)
                .map(|i| omega.comp(&[i as u8, j as u8]))
                .collect()
        })
        .collect()
}

pub(super) fn solve_contraction(
    omega: &SkewFormD,
    rhs: &SkewFormD,
) -> Result<DiffOp, StructureError> {
    assert_eq!(rhs.degree(), 1, "contraction right-hand side must be a 1-form");
    let frame = omega.dim() + 1;
    let a = contraction_system(omega);
    let b: Vec<ScalarExpr> = (0..frame).map(|j| rhs.comp(&[j as u8])).collect();
    let sol = solve_linear(&a, &b).map_err(|err| match err {
        super::SolveError::Singular { .. } => StructureError::Degenerate {
            pfaffian: omega.pfaffian().normalized().expr.to_string(),
        },
        other => StructureError::Solve(other),
    })?;
    Ok(DiffOp::from_frame_coeffs(sol))
}

/// Unique operator `H` with `i_H w = -delta(1)`; its postconditions
/// (`H(1) = 0` and `(i_1 w)(H) = 1`) are re-verified gradedly.
pub fn reeb(
    omega: &SkewFormD,
    chart: &Chart,
    probe: &Probe,
) -> Result<(DiffOp, VerificationReport), StructureError> {
    let dim = chart.dim();
    if dim % 2 == 0 {
        return Err(StructureError::EvenDimension { dim });
    }
    let rhs = -SkewFormD::unit_dual(dim);
    let h = solve_contraction(omega, &rhs)?.normalize();

    let mut report = VerificationReport::new();
    report.push(CheckResult::timed(
        "reeb.defining_equation",
        "i_H w = -delta(1)",
        || {
            let residual = omega.interior(&h) + SkewFormD::unit_dual(dim);
            super::zero_form(&residual, chart, probe)
        },
    ));
    report.push(CheckResult::timed("reeb.vector_field", "H(1) = 0", || {
        zero_scalar(h.unit_part(), chart, probe)
    }));
    report.push(CheckResult::timed(
        "reeb.unit_pairing",
        "(i_1 w)(H) = 1",
        || {
            let pairing = omega.eval(&[DiffOp::unit(dim), h.clone()]);
            zero_scalar(&(pairing - ScalarExpr::one()), chart, probe)
        },
    ));
    Ok((h, report))
}

/// Split a vector field into its kernel part and its Reeb coefficient:
/// `X = [X - (i_1 w)(X) H] + (i_1 w)(X) H`.
pub fn decompose(
    x: &DiffOp,
    omega: &SkewFormD,
    h: &DiffOp,
    chart: &Chart,
    probe: &Probe,
) -> Result<(DiffOp, ScalarExpr, CheckResult), StructureError> {
    if !x.unit_part().normalized().is_exactly_zero() {
        return Err(StructureError::Precondition(
            "decomposition applies to vector fields; the input has a unit part".into(),
        ));
    }
    let dim = omega.dim();
    let coefficient = omega
        .eval(&[DiffOp::unit(dim), x.clone()])
        .normalized()
        .expr;
    let kernel = (x.clone() - h.scale(&coefficient)).normalize();
    let membership = CheckResult::timed(
        "decompose.kernel_membership",
        "(i_1 w)(X - [(i_1 w)(X)] H) = 0",
        || {
            let value = omega.eval(&[DiffOp::unit(dim), kernel.clone()]);
            zero_scalar(&value, chart, probe)
        },
    );
    Ok((kernel, coefficient, membership))
}

/// Module isomorphisms provided by a nondegenerate `w`:
/// covectors vanishing on `H` come from vector fields, covectors vanishing
/// on both `1` and `H` come from kernel fields, and `w` restricted to the
/// kernel of `i_1 w` stays nondegenerate.
pub fn check_module_isos(
    omega: &SkewFormD,
    h: &DiffOp,
    chart: &Chart,
    probe: &Probe,
    trials: usize,
) -> Result<VerificationReport, StructureError> {
    let dim = chart.dim();
    if dim % 2 == 0 {
        return Err(StructureError::EvenDimension { dim });
    }
    let unit_contraction = omega.interior(&DiffOp::unit(dim));
    let mut gen = ExprGen::new(probe.plan.seed ^ 0x6d69736f, dim);

    let mut report = VerificationReport::new();

    report.push(CheckResult::timed(
        "module_iso.operator_solutions",
        "nu(H) = 0  =>  the solution of i_phi w = nu has phi(1) = 0",
        || {
            let mut grade = Grade::Exact;
            let mut witness = None;
            for t in 0..trials {
                let raw = gen.skew_form(1);
                let correction = raw.eval(std::slice::from_ref(h));
                let nu = raw - unit_contraction.scale(&correction);
                let phi = match solve_contraction(omega, &nu) {
                    Ok(op) => op,
                    Err(err) => {
                        return (Grade::Failed, Some(format!("trial {t}: {err}")));
                    }
                };
                let (g, w) = zero_scalar(phi.unit_part(), chart, probe);
                if matches!(g, Grade::Failed) && witness.is_none() {
                    witness = w.map(|txt| format!("trial {t}: {txt}"));
                }
                grade = Grade::weaker_of(grade, g);
            }
            (grade, witness)
        },
    ));

    report.push(CheckResult::timed(
        "module_iso.kernel_solutions",
        "nu(1) = nu(H) = 0  =>  the solution lies in Ker(i_1 w)",
        || {
            let mut grade = Grade::Exact;
            let mut witness = None;
            for t in 0..trials {
                let mut raw = gen.skew_form(1);
                raw.set(&[0], ScalarExpr::zero());
                let correction = raw.eval(std::slice::from_ref(h));
                let nu = raw - unit_contraction.scale(&correction);
                let phi = match solve_contraction(omega, &nu) {
                    Ok(op) => op,
                    Err(err) => {
                        return (Grade::Failed, Some(format!("trial {t}: {err}")));
                    }
                };
                let pairing = unit_contraction.eval(std::slice::from_ref(&phi));
                let (g1, w1) = zero_scalar(&pairing, chart, probe);
                let (g2, w2) = zero_scalar(phi.unit_part(), chart, probe);
                for (g, w) in [(g1, w1), (g2, w2)] {
                    if matches!(g, Grade::Failed) && witness.is_none() {
                        witness = w.map(|txt| format!("trial {t}: {txt}"));
                    }
                    grade = Grade::weaker_of(grade, g);
                }
            }
            (grade, witness)
        },
    ));

    report.push(CheckResult::timed(
        "module_iso.kernel_pairing",
        "Pf(w | Ker(i_1 w)) != 0",
        || {
            let basis = match kernel_basis(&unit_contraction.restrict_to_x()) {
                Ok(b) => b,
                Err(err) => return (Grade::Failed, Some(err.to_string())),
            };
            let m: Vec<Vec<ScalarExpr>> = basis
                .iter()
                .map(|a| {
                    basis
                        .iter()
                        .map(|b| omega.eval(&[a.clone(), b.clone()]))
                        .collect()
                })
                .collect();
            grade_nonvanish(&is_nonvanishing(&pfaffian_matrix(&m), chart, probe))
        },
    ));

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::XForm;

    fn y() -> ScalarExpr {
        ScalarExpr::coord(1)
    }

    fn chart3() -> Chart {
        Chart::unit_box("c", &["x", "y", "z"])
    }

    /// `w = delta(beta~)` for the classical contact covector on R^3.
    fn omega3() -> SkewFormD {
        let mut beta = XForm::zero(3, 1);
        beta.set(&[0], -y());
        beta.set(&[2], ScalarExpr::one());
        beta.embed().delta()
    }

    #[test]
    fn reeb_operator_of_the_classical_structure_is_dz() {
        let (chart, probe) = (chart3(), Probe::seeded(4));
        let (h, report) = reeb(&omega3(), &chart, &probe).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(h.normalize(), DiffOp::partial(3, 2));
    }

    #[test]
    fn reeb_scales_inversely_with_the_form() {
        let (chart, probe) = (chart3(), Probe::seeded(4));
        let doubled = omega3().scale(&ScalarExpr::int(2));
        let (h, report) = reeb(&doubled, &chart, &probe).unwrap();
        assert!(report.passed());
        assert_eq!(
            h.normalize(),
            DiffOp::partial(3, 2).scale(&ScalarExpr::rat(1, 2)).normalize()
        );
    }

    #[test]
    fn reeb_solution_is_stable_under_row_permutation() {
        let omega = omega3();
        let frame = omega.dim() + 1;
        let a = contraction_system(&omega);
        let rhs = -SkewFormD::unit_dual(3);
        let b: Vec<ScalarExpr> = (0..frame).map(|j| rhs.comp(&[j as u8])).collect();
        let direct = solve_linear(&a, &b).unwrap();
        let ra: Vec<Vec<ScalarExpr>> = a.iter().rev().cloned().collect();
        let rb: Vec<ScalarExpr> = b.iter().rev().cloned().collect();
        let reversed = solve_linear(&ra, &rb).unwrap();
        let norm = |v: Vec<ScalarExpr>| -> Vec<ScalarExpr> {
            v.into_iter().map(|e| e.normalized().expr).collect()
        };
        assert_eq!(norm(direct), norm(reversed));
    }

    #[test]
    fn degenerate_forms_are_rejected_with_a_pfaffian_witness() {
        let chart = chart3();
        let mut omega = SkewFormD::zero(3, 2);
        omega.set(&[1, 2], ScalarExpr::one()); // dx^dy alone: unit row is zero
        match reeb(&omega, &chart, &Probe::seeded(4)) {
            Err(StructureError::Degenerate { pfaffian }) => {
                assert_eq!(pfaffian, "0");
            }
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn decompose_splits_against_the_reeb_direction() {
        let (chart, probe) = (chart3(), Probe::seeded(4));
        let omega = omega3();
        let (h, _) = reeb(&omega, &chart, &probe).unwrap();
        // X = d/dx + z d/dz; (i_1 w)(X) = beta(X) = -y + z.
        let x = DiffOp::from_parts(
            ScalarExpr::zero(),
            vec![ScalarExpr::one(), ScalarExpr::zero(), ScalarExpr::coord(2)],
        );
        let (kernel, coeff, membership) = decompose(&x, &omega, &h, &chart, &probe).unwrap();
        assert_eq!(coeff, (ScalarExpr::coord(2) - y()).normalized().expr);
        assert!(membership.grade.holds(), "{membership:?}");
        let recombined = (kernel + h.scale(&coeff)).normalize();
        assert_eq!(recombined, x.normalize());
    }

    #[test]
    fn operators_with_unit_parts_cannot_be_decomposed() {
        let (chart, probe) = (chart3(), Probe::seeded(4));
        let omega = omega3();
        let (h, _) = reeb(&omega, &chart, &probe).unwrap();
        let bad = DiffOp::unit(3);
        assert!(matches!(
            decompose(&bad, &omega, &h, &chart, &probe),
            Err(StructureError::Precondition(_))
        ));
    }

    #[test]
    fn module_isomorphisms_hold_for_the_classical_structure() {
        let (chart, probe) = (chart3(), Probe::seeded(4));
        let omega = omega3();
        let (h, _) = reeb(&omega, &chart, &probe).unwrap();
        let report = check_module_isos(&omega, &h, &chart, &probe, 6).unwrap();
        assert!(report.passed(), "{report:?}");
        let pairing = report.find("module_iso.kernel_pairing").unwrap();
        assert_eq!(pairing.grade, Grade::Exact);
    }

    #[test]
    fn reeb_solution_is_stable_under_resolve_and_relabeling() {
        let (chart, probe) = (chart3(), Probe::seeded(4));
        let omega = omega3();
        let (first, _) = reeb(&omega, &chart, &probe).unwrap();
        let (second, _) = reeb(&omega, &chart, &probe).unwrap();
        assert_eq!(first.normalize(), second.normalize());

        // Same data with the coordinates listed in a different order: the
        // contact direction moves to slot 0 and the solver must follow it.
        let relabeled = Chart::unit_box("c", &["z", "x", "y"]);
        let mut beta = XForm::zero(3, 1);
        beta.set(&[0], ScalarExpr::one());
        beta.set(&[1], -ScalarExpr::coord(2));
        let (h, report) = reeb(&beta.embed().delta(), &relabeled, &probe).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(h.normalize(), DiffOp::partial(3, 0));
    }
}
