//! Locally conformal symplectic data on the coordinate frame.

use super::report::{grade_nonvanish, CheckResult, Grade, VerificationReport};
use super::{zero_xform, StructureError};
use crate::calculus::XForm;
use crate::cas::{is_nonvanishing, Probe};
use crate::chart::Chart;

/// A closed 1-form `alpha` and a nondegenerate 2-form `omega` with
/// `d(omega) = -alpha ^ omega`.
#[derive(Debug, Clone)]
pub struct LcsData {
    alpha: XForm,
    omega: XForm,
}

impl LcsData {
    pub fn new(alpha: XForm, omega: XForm) -> Result<LcsData, StructureError> {
        if alpha.degree() != 1 {
            return Err(StructureError::Precondition(format!(
                "conformal factor must be a 1-form, got degree {}",
                alpha.degree()
            )));
        }
        if omega.degree() != 2 {
            return Err(StructureError::Precondition(format!(
                "fundamental form must be a 2-form, got degree {}",
                omega.degree()
            )));
        }
        if alpha.dim() != omega.dim() {
            return Err(StructureError::Precondition(format!(
                "dimension mismatch: alpha on {} coordinates, omega on {}",
                alpha.dim(),
                omega.dim()
            )));
        }
        Ok(LcsData { alpha, omega })
    }

    pub fn alpha(&self) -> &XForm {
        &self.alpha
    }

    pub fn omega(&self) -> &XForm {
        &self.omega
    }
}

pub fn check_lcs(
    data: &LcsData,
    chart: &Chart,
    probe: &Probe,
) -> Result<VerificationReport, StructureError> {
    let dim = chart.dim();
    if dim % 2 != 0 {
        return Err(StructureError::OddDimension { dim });
    }
    if data.omega.dim() != dim {
        return Err(StructureError::Precondition(format!(
            "data lives on {} coordinates but the chart has {}",
            data.omega.dim(),
            dim
        )));
    }

    let mut report = VerificationReport::new();
    report.push(CheckResult::timed("lcs.alpha_closed", "d(alpha) = 0", || {
        zero_xform(&data.alpha.d(), chart, probe)
    }));
    report.push(CheckResult::timed(
        "lcs.structure_equation",
        "d(w) = -alpha ^ w",
        || {
            let residual = data.omega.d() + data.alpha.wedge(&data.omega);
            zero_xform(&residual, chart, probe)
        },
    ));
    report.push(CheckResult::timed(
        "lcs.nondegenerate",
        "Pf(w) != 0",
        || grade_nonvanish(&is_nonvanishing(&data.omega.pfaffian(), chart, probe)),
    ));
    if data.alpha.normalize().is_exactly_zero() {
        report.push(CheckResult::new(
            "lcs.symplectic_special_case",
            "alpha = 0: the structure equation reduces to d(w) = 0",
            Grade::Exact,
            Some("conformal factor vanishes identically".into()),
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cas::ScalarExpr;

    fn x1() -> ScalarExpr {
        ScalarExpr::coord(0)
    }

    /// `alpha = dx1`, `w = exp(-x1) (dx1^dy1 + dx2^dy2)` on coordinates
    /// (x1, y1, x2, y2); a conformal rescaling of the flat symplectic form.
    fn twisted_data() -> LcsData {
        let mut alpha = XForm::zero(4, 1);
        alpha.set(&[0], ScalarExpr::one());
        let s = ScalarExpr::exp(-x1());
        let mut omega = XForm::zero(4, 2);
        omega.set(&[0, 1], s.clone());
        omega.set(&[2, 3], s);
        LcsData::new(alpha, omega).unwrap()
    }

    #[test]
    fn conformally_flat_form_passes() {
        let chart = Chart::unit_box("c", &["x1", "y1", "x2", "y2"]);
        let probe = Probe::seeded(7);
        let report = check_lcs(&twisted_data(), &chart, &probe).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.find("lcs.symplectic_special_case").is_none());
    }

    #[test]
    fn flat_symplectic_form_is_flagged() {
        let chart = Chart::unit_box("c", &["x1", "y1", "x2", "y2"]);
        let probe = Probe::seeded(7);
        let mut omega = XForm::zero(4, 2);
        omega.set(&[0, 1], ScalarExpr::one());
        omega.set(&[2, 3], ScalarExpr::one());
        let data = LcsData::new(XForm::zero(4, 1), omega).unwrap();
        let report = check_lcs(&data, &chart, &probe).unwrap();
        assert!(report.passed());
        assert!(report.find("lcs.symplectic_special_case").is_some());
    }

    #[test]
    fn odd_dimension_is_a_structural_error() {
        let chart = Chart::unit_box("c", &["x", "y", "z"]);
        let probe = Probe::seeded(7);
        let data = LcsData::new(XForm::zero(3, 1), XForm::zero(3, 2)).unwrap();
        match check_lcs(&data, &chart, &probe) {
            Err(StructureError::OddDimension { dim }) => assert_eq!(dim, 3),
            other => panic!("expected odd-dimension error, got {other:?}"),
        }
    }

    #[test]
    fn broken_structure_equation_fails() {
        let chart = Chart::unit_box("c", &["x1", "y1", "x2", "y2"]);
        let probe = Probe::seeded(7);
        let mut alpha = XForm::zero(4, 1);
        alpha.set(&[0], ScalarExpr::int(2)); // wrong factor: 2 dx1
        let s = ScalarExpr::exp(-x1());
        let mut omega = XForm::zero(4, 2);
        omega.set(&[0, 1], s.clone());
        omega.set(&[2, 3], s);
        let data = LcsData::new(alpha, omega).unwrap();
        let report = check_lcs(&data, &chart, &probe).unwrap();
        assert_eq!(
            report.find("lcs.structure_equation").unwrap().grade,
            Grade::Failed
        );
    }
}
