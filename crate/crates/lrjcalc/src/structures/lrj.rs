//! Symplectic structures on the operator frame: the structure equation,
//! nondegeneracy, the induced volume, unit contraction, and classification.

use super::anchor::check_rho_alpha_condition;
use super::report::{grade_nonvanish, CheckResult, Grade, VerificationReport};
use super::{zero_form, StructureError};
use crate::calculus::{AlphaForm, DiffOp, SkewFormD};
use crate::cas::{is_nonvanishing, Probe, ScalarExpr};
use crate::chart::Chart;
use num::BigRational;
use serde::Serialize;
use std::fmt;

/// A twist `alpha` and a nondegenerate 2-form `omega` on operators with
/// `delta(omega) = -alpha ^ omega`.
#[derive(Debug, Clone)]
pub struct LrjData {
    alpha: AlphaForm,
    omega: SkewFormD,
}

impl LrjData {
    pub fn new(alpha: AlphaForm, omega: SkewFormD) -> Result<LrjData, StructureError> {
        if omega.degree() != 2 {
            return Err(StructureError::Precondition(format!(
                "fundamental form must be a 2-form, got degree {}",
                omega.degree()
            )));
        }
        if alpha.dim() != omega.dim() {
            return Err(StructureError::Precondition(format!(
                "dimension mismatch: twist on {} coordinates, fundamental form on {}",
                alpha.dim(),
                omega.dim()
            )));
        }
        Ok(LrjData { alpha, omega })
    }

    pub fn alpha(&self) -> &AlphaForm {
        &self.alpha
    }

    pub fn omega(&self) -> &SkewFormD {
        &self.omega
    }

    /// Contraction with the unit operator, `i_1 w`.
    pub fn unit_contraction(&self) -> SkewFormD {
        self.omega.interior(&DiffOp::unit(self.omega.dim()))
    }
}

/// Full structure check: anchor admissibility, the structure equation, and
/// nondegeneracy. Even-dimensional charts are rejected before any work.
pub fn check_lrj_d(
    data: &LrjData,
    chart: &Chart,
    probe: &Probe,
) -> Result<VerificationReport, StructureError> {
    let dim = chart.dim();
    if dim % 2 == 0 {
        return Err(StructureError::EvenDimension { dim });
    }
    if data.omega.dim() != dim {
        return Err(StructureError::Precondition(format!(
            "data lives on {} coordinates but the chart has {}",
            data.omega.dim(),
            dim
        )));
    }

    let mut report = check_rho_alpha_condition(&data.alpha, chart, probe);
    report.push(CheckResult::timed(
        "lrj.structure_equation",
        "delta(w) = -alpha ^ w",
        || {
            let residual = data.omega.delta() + data.alpha.form().wedge(&data.omega);
            zero_form(&residual, chart, probe)
        },
    ));
    report.push(CheckResult::timed("lrj.nondegenerate", "Pf(w) != 0", || {
        grade_nonvanish(&is_nonvanishing(&data.omega.pfaffian(), chart, probe))
    }));
    Ok(report)
}

/// Volume criterion: on a (2n+1)-dimensional chart the top coefficient of
/// `[i_1 w |_X] ^ [w |_X]^n` must be nonvanishing.
pub fn volume_check(
    omega: &SkewFormD,
    chart: &Chart,
    probe: &Probe,
) -> Result<VerificationReport, StructureError> {
    let dim = chart.dim();
    if dim % 2 == 0 {
        return Err(StructureError::EvenDimension { dim });
    }
    let n = (dim - 1) / 2;
    let mut report = VerificationReport::new();
    report.push(CheckResult::timed(
        "lrj.volume_form",
        "[i_1 w |_X] ^ [w |_X]^n has nonvanishing top coefficient",
        || {
            let b = omega.interior(&DiffOp::unit(dim)).restrict_to_x();
            let spatial = omega.restrict_to_x();
            let vol = b.wedge(&spatial.wedge_pow(n));
            grade_nonvanish(&is_nonvanishing(&vol.top_component(), chart, probe))
        },
    ));
    Ok(report)
}

/// Unit-contraction identity `[1 + alpha(1)] * w = delta_alpha(i_1 w)`.
pub fn check_contraction_identity(data: &LrjData, chart: &Chart, probe: &Probe) -> VerificationReport {
    let mut report = VerificationReport::new();
    report.push(CheckResult::timed(
        "lrj.unit_contraction_identity",
        "[1 + alpha(1)] * w = delta_alpha(i_1 w)",
        || {
            let factor = ScalarExpr::one() + data.alpha.unit_value().clone();
            let residual =
                data.omega.scale(&factor) - data.unit_contraction().delta_alpha(&data.alpha);
            zero_form(&residual, chart, probe)
        },
    ));
    report
}

/// The two classes a nondegenerate structure on an odd-dimensional chart can
/// fall into, decided by the constant `alpha(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureClass {
    ExactContact,
    NonexactContact,
}

impl fmt::Display for StructureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StructureClass::ExactContact => "exact contact",
            StructureClass::NonexactContact => "nonexact contact",
        })
    }
}

/// Classify by the constant `alpha(1)`: anything other than -1 is the exact
/// case and comes with a verified primitive; -1 is the nonexact case.
pub fn classify(
    data: &LrjData,
    chart: &Chart,
    probe: &Probe,
) -> Result<(StructureClass, VerificationReport), StructureError> {
    let unit = data.alpha.unit_value().normalized();
    let c: BigRational = unit.expr.as_rat().cloned().ok_or_else(|| {
        StructureError::Precondition(format!(
            "classification needs a constant alpha(1); found {}",
            unit.expr
        ))
    })?;

    let mut report = VerificationReport::new();
    let minus_one = -BigRational::from_integer(1.into());
    let class = if c == minus_one {
        StructureClass::NonexactContact
    } else {
        StructureClass::ExactContact
    };
    report.push(CheckResult::new(
        "classify.label",
        "alpha(1) = -1 is nonexact; any other constant is exact",
        Grade::Exact,
        Some(format!("alpha(1) = {c}: {class}")),
    ));

    if class == StructureClass::ExactContact {
        report.push(CheckResult::timed(
            "classify.exactness_identity",
            "w = delta_alpha(i_1 (w / [1 + alpha(1)]))",
            || {
                let factor =
                    ScalarExpr::one() / (ScalarExpr::one() + ScalarExpr::constant(c.clone()));
                let primitive = data.unit_contraction().scale(&factor);
                let residual = data.omega.clone() - primitive.delta_alpha(&data.alpha);
                zero_form(&residual, chart, probe)
            },
        ));
    }
    Ok((class, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::XForm;

    fn x() -> ScalarExpr {
        ScalarExpr::coord(0)
    }
    fn y() -> ScalarExpr {
        ScalarExpr::coord(1)
    }

    fn chart3() -> Chart {
        Chart::unit_box("c", &["x", "y", "z"])
    }

    /// Untwisted structure from the classical contact form on R^3:
    /// `w = delta(beta~)` with `beta = dz - y dx`, `alpha = 0`.
    fn exact_data() -> LrjData {
        let mut beta = XForm::zero(3, 1);
        beta.set(&[0], -y());
        beta.set(&[2], ScalarExpr::one());
        let omega = beta.embed().delta();
        LrjData::new(AlphaForm::zero(3), omega).unwrap()
    }

    /// Nonexact structure: `w = dx^dy + u^dz`, `alpha = -u`.
    fn nonexact_data() -> LrjData {
        let mut omega = SkewFormD::zero(3, 2);
        omega.set(&[1, 2], ScalarExpr::one());
        omega.set(&[0, 3], ScalarExpr::one());
        let mut a = SkewFormD::zero(3, 1);
        a.set(&[0], -ScalarExpr::one());
        LrjData::new(AlphaForm::new(a), omega).unwrap()
    }

    #[test]
    fn exact_contact_data_passes_all_checks() {
        let (chart, probe) = (chart3(), Probe::seeded(2));
        let data = exact_data();
        let report = check_lrj_d(&data, &chart, &probe).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(volume_check(data.omega(), &chart, &probe).unwrap().passed());
        assert!(check_contraction_identity(&data, &chart, &probe).passed());
        let (class, creport) = classify(&data, &chart, &probe).unwrap();
        assert_eq!(class, StructureClass::ExactContact);
        assert!(creport.passed(), "{creport:?}");
    }

    #[test]
    fn nonexact_data_passes_and_classifies_as_nonexact() {
        let (chart, probe) = (chart3(), Probe::seeded(2));
        let data = nonexact_data();
        let report = check_lrj_d(&data, &chart, &probe).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(check_contraction_identity(&data, &chart, &probe).passed());
        let (class, _) = classify(&data, &chart, &probe).unwrap();
        assert_eq!(class, StructureClass::NonexactContact);
    }

    #[test]
    fn classification_ignores_constant_rescaling() {
        let (chart, probe) = (chart3(), Probe::seeded(2));
        let data = exact_data();
        let scaled = LrjData::new(
            data.alpha().clone(),
            data.omega().scale(&ScalarExpr::int(5)),
        )
        .unwrap();
        let (class, report) = classify(&scaled, &chart, &probe).unwrap();
        assert_eq!(class, StructureClass::ExactContact);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn even_dimension_fails_fast() {
        let chart = Chart::unit_box("c", &["x", "y"]);
        let data = LrjData::new(AlphaForm::zero(2), SkewFormD::zero(2, 2)).unwrap();
        match check_lrj_d(&data, &chart, &Probe::seeded(2)) {
            Err(StructureError::EvenDimension { dim }) => assert_eq!(dim, 2),
            other => panic!("expected even-dimension error, got {other:?}"),
        }
    }

    #[test]
    fn nonconstant_unit_value_blocks_classification() {
        let (chart, probe) = (chart3(), Probe::seeded(2));
        let mut a = SkewFormD::zero(3, 1);
        a.set(&[0], x());
        let data = LrjData::new(AlphaForm::new(a), exact_data().omega().clone()).unwrap();
        assert!(matches!(
            classify(&data, &chart, &probe),
            Err(StructureError::Precondition(_))
        ));
    }

    #[test]
    fn classification_ignores_constant_scaling_of_the_form() {
        let (chart, probe) = (chart3(), Probe::seeded(2));
        for (data, scale) in [(exact_data(), 2), (nonexact_data(), -3)] {
            let scaled = LrjData::new(
                data.alpha().clone(),
                data.omega().scale(&ScalarExpr::int(scale)),
            )
            .unwrap();
            let (before, _) = classify(&data, &chart, &probe).unwrap();
            let (after, report) = classify(&scaled, &chart, &probe).unwrap();
            assert_eq!(before, after);
            assert!(report.passed(), "{report:?}");
        }
    }
}
