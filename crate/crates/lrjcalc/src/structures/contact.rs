//! Contact data on the coordinate frame and its lift to the operator frame.

use super::report::{grade_nonvanish, CheckResult, Grade, VerificationReport};
use super::solve::solve_linear;
use super::{kernel_basis, zero_form, zero_scalar, zero_xform, StructureError};
use crate::calculus::{AlphaForm, DiffOp, SkewFormD, XForm};
use crate::cas::{is_nonvanishing, Probe, ScalarExpr};
use crate::chart::Chart;
use crate::rnd::ExprGen;
use num::BigRational;

/// A contact covector `beta`, a fundamental 2-form `omega`, and the Reeb
/// field `e` with `beta(e) = 1` and `i_e omega = 0`.
#[derive(Debug, Clone)]
pub struct ContactData {
    beta: XForm,
    omega: XForm,
    e: DiffOp,
}

impl ContactData {
    pub fn new(beta: XForm, omega: XForm, e: DiffOp) -> Result<ContactData, StructureError> {
        if beta.degree() != 1 {
            return Err(StructureError::Precondition(format!(
                "contact covector must be a 1-form, got degree {}",
                beta.degree()
            )));
        }
        if omega.degree() != 2 {
            return Err(StructureError::Precondition(format!(
                "fundamental form must be a 2-form, got degree {}",
                omega.degree()
            )));
        }
        if beta.dim() != omega.dim() || beta.dim() != e.dim() {
            return Err(StructureError::Precondition(format!(
                "dimension mismatch: beta on {}, omega on {}, field on {}",
                beta.dim(),
                omega.dim(),
                e.dim()
            )));
        }
        if !e.unit_part().normalized().is_exactly_zero() {
            return Err(StructureError::Precondition(
                "the Reeb field must be a vector field; the given operator has a unit part".into(),
            ));
        }
        Ok(ContactData { beta, omega, e })
    }

    pub fn beta(&self) -> &XForm {
        &self.beta
    }

    pub fn omega(&self) -> &XForm {
        &self.omega
    }

    pub fn e(&self) -> &DiffOp {
        &self.e
    }

    pub fn dim(&self) -> usize {
        self.beta.dim()
    }
}

/// Validate contact data: pairing, contraction, volume, and the splitting of
/// vector fields along the Reeb direction.
pub fn contact_data_check(
    data: &ContactData,
    chart: &Chart,
    probe: &Probe,
) -> Result<VerificationReport, StructureError> {
    let dim = chart.dim();
    if dim % 2 == 0 {
        return Err(StructureError::EvenDimension { dim });
    }
    if data.dim() != dim {
        return Err(StructureError::Precondition(format!(
            "data lives on {} coordinates but the chart has {}",
            data.dim(),
            dim
        )));
    }
    let n = (dim - 1) / 2;
    let e_coeffs = data.e.vector_coeffs();

    let mut report = VerificationReport::new();
    report.push(CheckResult::timed("contact.unit_pairing", "beta(E) = 1", || {
        let pairing = data.beta.eval_fields(&[e_coeffs]);
        zero_scalar(&(pairing - ScalarExpr::one()), chart, probe)
    }));
    report.push(CheckResult::timed(
        "contact.fundamental_contraction",
        "i_E w = 0",
        || zero_xform(&data.omega.interior_field(e_coeffs), chart, probe),
    ));
    report.push(CheckResult::timed(
        "contact.volume_form",
        "beta ^ w^n has nonvanishing top coefficient",
        || {
            let vol = data.beta.wedge(&data.omega.wedge_pow(n));
            grade_nonvanish(&is_nonvanishing(&vol.top_component(), chart, probe))
        },
    ));
    report.push(CheckResult::timed(
        "contact.kernel_decomposition",
        "beta(X - beta(X) E) = 0 for the coordinate fields",
        || {
            let mut grade = Grade::Exact;
            let mut witness = None;
            for i in 0..dim {
                let mut coeffs = vec![ScalarExpr::zero(); dim];
                coeffs[i] = ScalarExpr::one();
                let bx = data.beta.eval_fields(&[&coeffs]);
                let projected: Vec<ScalarExpr> = coeffs
                    .iter()
                    .zip(e_coeffs)
                    .map(|(c, ec)| c.clone() - bx.clone() * ec.clone())
                    .collect();
                let residual = data.beta.eval_fields(&[&projected]);
                let (g, w) = zero_scalar(&residual, chart, probe);
                if matches!(g, Grade::Failed) && witness.is_none() {
                    witness = w.map(|t| format!("coordinate field {i}: {t}"));
                }
                grade = Grade::weaker_of(grade, g);
            }
            (grade, witness)
        },
    ));
    Ok(report)
}

/// Contact data lifted to the operator frame, together with the twist that
/// makes the lifted form a candidate structure there.
#[derive(Debug, Clone)]
pub struct LiftedContact {
    pub base: ContactData,
    pub c: BigRational,
    pub g: ScalarExpr,
    pub beta_tilde: SkewFormD,
    pub omega_bar: SkewFormD,
    pub omega_tilde: SkewFormD,
    pub alpha: AlphaForm,
}

impl LiftedContact {
    /// View the lift as structure data on the operator frame.
    pub fn as_lrj(&self) -> super::lrj::LrjData {
        super::lrj::LrjData::new(self.alpha.clone(), self.omega_tilde.clone())
            .expect("a lift always produces a 2-form of matching dimension")
    }
}

/// Kernel projection applied to both slots: `w_bar(phi, psi) = w(pX, pY)`
/// with `pX = X - beta(X) E`.
fn project_omega(data: &ContactData) -> SkewFormD {
    let dim = data.dim();
    let e_coeffs = data.e.vector_coeffs();
    let projected: Vec<Vec<ScalarExpr>> = (0..dim)
        .map(|a| {
            let mut coeffs = vec![ScalarExpr::zero(); dim];
            coeffs[a] = ScalarExpr::one();
            let ba = data.beta.comp(&[a as u8]);
            coeffs
                .iter()
                .zip(e_coeffs)
                .map(|(c, ec)| c.clone() - ba.clone() * ec.clone())
                .collect()
        })
        .collect();
    let mut bar = SkewFormD::zero(dim, 2);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let value = data
                .omega
                .eval_fields(&[&projected[i], &projected[j]])
                .normalize();
            if !value.is_zero_const() {
                bar.set(&[(i + 1) as u8, (j + 1) as u8], value);
            }
        }
    }
    bar
}

/// Lift contact data to the operator frame with parameters `(c, g)` and
/// verify every structural identity the lift is supposed to satisfy.
///
/// The twist is `alpha = [1 + c] delta(1) + i_E delta(beta~) + g beta~`; it
/// is admissible only when `d(g beta + i_E d(beta)) = 0`, and a failure of
/// that constraint rejects the lift outright.
pub fn lift_contact(
    data: &ContactData,
    c: BigRational,
    g: ScalarExpr,
    chart: &Chart,
    probe: &Probe,
) -> Result<(LiftedContact, VerificationReport), StructureError> {
    let dim = chart.dim();
    let mut report = contact_data_check(data, chart, probe)?;
    if report.overall() == super::Overall::Fail {
        let failing = report
            .checks
            .iter()
            .find(|r| matches!(r.grade, Grade::Failed))
            .expect("a failing report has a failing row");
        return Err(StructureError::Precondition(format!(
            "contact data invalid: {} ({})",
            failing.check,
            failing.witness.as_deref().unwrap_or("no witness")
        )));
    }

    let e_coeffs = data.e.vector_coeffs();
    let constraint = CheckResult::timed(
        "lift.twist_constraint",
        "d(g beta + i_E d(beta)) = 0",
        || {
            let inner = data.beta.scale(&g) + data.beta.d().interior_field(e_coeffs);
            zero_xform(&inner.d(), chart, probe)
        },
    );
    if matches!(constraint.grade, Grade::Failed) {
        return Err(StructureError::RejectedLift {
            witness: constraint
                .witness
                .unwrap_or_else(|| "constraint residual is nonzero".into()),
        });
    }
    report.push(constraint);

    let beta_tilde = data.beta.embed();
    let omega_bar = project_omega(data);
    let omega_tilde = omega_bar.clone() + SkewFormD::unit_dual(dim).wedge(&beta_tilde);
    let one_plus_c = ScalarExpr::one() + ScalarExpr::constant(c.clone());
    let alpha_form = SkewFormD::unit_dual(dim).scale(&one_plus_c)
        + beta_tilde.delta().interior(&data.e)
        + beta_tilde.scale(&g);
    let alpha = AlphaForm::new(alpha_form.normalize());

    report.push(CheckResult::timed(
        "lift.projection_consistency",
        "restrict_to_X(w_bar) = w when i_E w = 0",
        || {
            let residual = omega_bar.restrict_to_x() - data.omega.clone();
            zero_xform(&residual, chart, probe)
        },
    ));
    report.push(CheckResult::timed(
        "lift.unit_contraction_vanishes",
        "i_1 w_bar = 0",
        || {
            let contraction = omega_bar.interior(&DiffOp::unit(dim));
            zero_form(&contraction, chart, probe)
        },
    ));
    report.push(CheckResult::timed(
        "lift.unit_contraction_recovers_base",
        "i_1 W = beta~",
        || {
            let residual = omega_tilde.interior(&DiffOp::unit(dim)) - beta_tilde.clone();
            zero_form(&residual, chart, probe)
        },
    ));
    report.push(CheckResult::timed(
        "lift.fundamental_contraction",
        "i_E W = -delta(1)",
        || {
            let residual = omega_tilde.interior(&data.e) + SkewFormD::unit_dual(dim);
            zero_form(&residual, chart, probe)
        },
    ));
    report.push(CheckResult::timed(
        "lift.alpha_unit_value",
        "alpha(1) = c",
        || {
            let residual = alpha.unit_value().clone() - ScalarExpr::constant(c.clone());
            zero_scalar(&residual, chart, probe)
        },
    ));
    report.push(CheckResult::timed(
        "lift.alpha_fundamental_value",
        "alpha(E) = g",
        || {
            let residual = alpha.eval(&data.e) - g.clone();
            zero_scalar(&residual, chart, probe)
        },
    ));

    report.push(CheckResult::timed(
        "lift.nondegenerate_inverse",
        "i_phi W = nu is solved by phi = nu(E) + X - nu(1) E",
        || invert_randomized(data, &omega_tilde, chart, probe, 20),
    ));

    let delta_omega = omega_tilde.delta();
    report.push(CheckResult::timed(
        "lift.multiplier_unit",
        "[1 + alpha(1)] W = delta(beta~) + alpha ^ beta~",
        || {
            let factor = ScalarExpr::one() + alpha.unit_value().clone();
            let residual = omega_tilde.scale(&factor)
                - beta_tilde.delta()
                - alpha.form().wedge(&beta_tilde);
            zero_form(&residual, chart, probe)
        },
    ));
    report.push(CheckResult::timed(
        "lift.multiplier_fundamental",
        "alpha(E) W = delta(1) ^ alpha - i_E delta(W)",
        || {
            let residual = omega_tilde.scale(&alpha.eval(&data.e))
                - SkewFormD::unit_dual(dim).wedge(alpha.form())
                + delta_omega.interior(&data.e);
            zero_form(&residual, chart, probe)
        },
    ));
    report.push(CheckResult::timed(
        "lift.multiplier_kernel",
        "beta([X, E]) W = alpha ^ i_X W - i_X delta(W) for kernel fields X",
        || {
            let basis = match kernel_basis(&data.beta) {
                Ok(b) => b,
                Err(err) => return (Grade::Failed, Some(err.to_string())),
            };
            let mut grade = Grade::Exact;
            let mut witness = None;
            for (pos, k) in basis.iter().enumerate() {
                let commutator = k.bracket(&data.e);
                let coeff = data.beta.eval_fields(&[commutator.vector_coeffs()]);
                let residual = omega_tilde.scale(&coeff)
                    - alpha.form().wedge(&omega_tilde.interior(k))
                    + delta_omega.interior(k);
                let (gr, w) = zero_form(&residual, chart, probe);
                if matches!(gr, Grade::Failed) && witness.is_none() {
                    witness = w.map(|t| format!("kernel field {pos}: {t}"));
                }
                grade = Grade::weaker_of(grade, gr);
            }
            (grade, witness)
        },
    ));
    report.push(CheckResult::timed(
        "lift.structure_equation",
        "delta(W) = -alpha ^ W",
        || {
            let residual = delta_omega.clone() + alpha.form().wedge(&omega_tilde);
            zero_form(&residual, chart, probe)
        },
    ));

    Ok((
        LiftedContact {
            base: data.clone(),
            c,
            g,
            beta_tilde,
            omega_bar,
            omega_tilde,
            alpha,
        },
        report,
    ))
}

/// Round-trip the explicit inverse: for randomized covectors `nu` on the
/// operator frame, reassemble `phi = nu(E) + X - nu(1) E` (with `X` solved
/// inside the kernel of `beta`) and check `i_phi W = nu`.
fn invert_randomized(
    data: &ContactData,
    omega_tilde: &SkewFormD,
    chart: &Chart,
    probe: &Probe,
    trials: usize,
) -> (Grade, Option<String>) {
    let dim = data.dim();
    let basis = match kernel_basis(&data.beta) {
        Ok(b) => b,
        Err(err) => return (Grade::Failed, Some(err.to_string())),
    };
    let pairing: Vec<Vec<ScalarExpr>> = basis
        .iter()
        .map(|kb| {
            basis
                .iter()
                .map(|ka| omega_tilde.eval(&[ka.clone(), kb.clone()]))
                .collect()
        })
        .collect();
    let mut gen = ExprGen::new(probe.plan.seed ^ 0x696e76, dim);
    let mut grade = Grade::Exact;
    let mut witness = None;
    for t in 0..trials {
        let nu = gen.skew_form(1);
        let along_e = nu.eval(std::slice::from_ref(&data.e));
        let along_unit = nu.comp(&[0]);
        let rhs: Vec<ScalarExpr> = basis
            .iter()
            .map(|kb| nu.eval(std::slice::from_ref(kb)))
            .collect();
        let x_coeffs = match solve_linear(&pairing, &rhs) {
            Ok(sol) => sol,
            Err(err) => {
                return (
                    Grade::Failed,
                    Some(format!("trial {t}: kernel solve failed: {err}")),
                );
            }
        };
        let mut phi = DiffOp::from_parts(along_e, vec![ScalarExpr::zero(); dim])
            - data.e.scale(&along_unit);
        for (x, k) in x_coeffs.iter().zip(&basis) {
            phi = phi + k.scale(x);
        }
        let residual = omega_tilde.interior(&phi) - nu;
        let (g, w) = zero_form(&residual, chart, probe);
        if matches!(g, Grade::Failed) && witness.is_none() {
            witness = w.map(|txt| format!("trial {t}: {txt}"));
        }
        grade = Grade::weaker_of(grade, g);
    }
    (grade, witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::lrj::StructureClass;
    use crate::structures::{classify, reeb};

    fn y() -> ScalarExpr {
        ScalarExpr::coord(1)
    }
    fn z() -> ScalarExpr {
        ScalarExpr::coord(2)
    }

    fn chart3() -> Chart {
        Chart::unit_box("c", &["x", "y", "z"])
    }

    fn rational(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    /// Classical contact data: `beta = dz - y dx`, `w = d(beta)`, `E = d/dz`.
    fn standard_contact() -> ContactData {
        let mut beta = XForm::zero(3, 1);
        beta.set(&[0], -y());
        beta.set(&[2], ScalarExpr::one());
        let omega = beta.d();
        ContactData::new(beta, omega, DiffOp::partial(3, 2)).unwrap()
    }

    /// `beta = dz`, `w = dx^dy`, `E = d/dz`: the fundamental form is not
    /// exact, and the lift with `c = -1` satisfies every identity.
    fn cosymplectic() -> ContactData {
        let mut beta = XForm::zero(3, 1);
        beta.set(&[2], ScalarExpr::one());
        let mut omega = XForm::zero(3, 2);
        omega.set(&[0, 1], ScalarExpr::one());
        ContactData::new(beta, omega, DiffOp::partial(3, 2)).unwrap()
    }

    #[test]
    fn standard_contact_data_is_valid() {
        let (chart, probe) = (chart3(), Probe::seeded(8));
        let report = contact_data_check(&standard_contact(), &chart, &probe).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn untwisted_lift_of_standard_contact_passes_everything() {
        let (chart, probe) = (chart3(), Probe::seeded(8));
        let (lift, report) =
            lift_contact(&standard_contact(), rational(0), ScalarExpr::zero(), &chart, &probe)
                .unwrap();
        assert!(report.passed(), "{report:?}");
        let (class, creport) = classify(&lift.as_lrj(), &chart, &probe).unwrap();
        assert_eq!(class, StructureClass::ExactContact);
        assert!(creport.passed(), "{creport:?}");
        let (h, hreport) = reeb(&lift.omega_tilde, &chart, &probe).unwrap();
        assert!(hreport.passed());
        assert_eq!(h.normalize(), DiffOp::partial(3, 2));
    }

    #[test]
    fn cosymplectic_lift_with_unit_value_minus_one_passes_everything() {
        let (chart, probe) = (chart3(), Probe::seeded(8));
        let (lift, report) =
            lift_contact(&cosymplectic(), rational(-1), ScalarExpr::zero(), &chart, &probe)
                .unwrap();
        assert!(report.passed(), "{report:?}");
        let (class, _) = classify(&lift.as_lrj(), &chart, &probe).unwrap();
        assert_eq!(class, StructureClass::NonexactContact);
    }

    #[test]
    fn twisted_lift_with_nonzero_g_passes_when_the_constraint_holds() {
        // beta = dz, w = exp(z) dx^dy, E = d/dz, g = -1: the constraint
        // d(g beta + i_E d beta) = d(-dz) = 0 holds, and exp(z) w is the
        // matching conformal factor.
        let (chart, probe) = (chart3(), Probe::seeded(8));
        let mut beta = XForm::zero(3, 1);
        beta.set(&[2], ScalarExpr::one());
        let mut omega = XForm::zero(3, 2);
        omega.set(&[0, 1], ScalarExpr::exp(z()));
        let data = ContactData::new(beta, omega, DiffOp::partial(3, 2)).unwrap();
        let (lift, report) =
            lift_contact(&data, rational(-1), -ScalarExpr::one(), &chart, &probe).unwrap();
        assert!(report.passed(), "{report:?}");
        let (class, _) = classify(&lift.as_lrj(), &chart, &probe).unwrap();
        assert_eq!(class, StructureClass::NonexactContact);
    }

    #[test]
    fn standard_lift_with_unit_value_minus_one_breaks_the_multiplier_identities() {
        // With c = -1 the twist degenerates to -delta(1) on this data, and
        // the unit-multiplier, kernel-multiplier, and structure equations
        // all acquire a residual dx^dy term; the contractions still hold.
        let (chart, probe) = (chart3(), Probe::seeded(8));
        let (lift, report) =
            lift_contact(&standard_contact(), rational(-1), ScalarExpr::zero(), &chart, &probe)
                .unwrap();
        for name in [
            "lift.unit_contraction_recovers_base",
            "lift.fundamental_contraction",
            "lift.nondegenerate_inverse",
            "lift.multiplier_fundamental",
            "lift.alpha_unit_value",
            "lift.alpha_fundamental_value",
        ] {
            assert!(
                report.find(name).unwrap().grade.holds(),
                "{name} unexpectedly failed"
            );
        }
        for name in [
            "lift.multiplier_unit",
            "lift.multiplier_kernel",
            "lift.structure_equation",
        ] {
            assert_eq!(
                report.find(name).unwrap().grade,
                Grade::Failed,
                "{name} unexpectedly held"
            );
        }
        let (class, _) = classify(&lift.as_lrj(), &chart, &probe).unwrap();
        assert_eq!(class, StructureClass::NonexactContact);
    }

    #[test]
    fn violated_constraint_rejects_the_lift() {
        // beta = dz, w = dx^dy, g = x: d(g beta) = dx^dz != 0.
        let (chart, probe) = (chart3(), Probe::seeded(8));
        match lift_contact(
            &cosymplectic(),
            rational(-1),
            ScalarExpr::coord(0),
            &chart,
            &probe,
        ) {
            Err(StructureError::RejectedLift { witness }) => {
                assert!(witness.contains("value"), "witness: {witness}");
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn invalid_contact_data_is_a_precondition_error() {
        // beta(E) = 0 when E = d/dx against beta = dz.
        let (chart, probe) = (chart3(), Probe::seeded(8));
        let mut beta = XForm::zero(3, 1);
        beta.set(&[2], ScalarExpr::one());
        let mut omega = XForm::zero(3, 2);
        omega.set(&[0, 1], ScalarExpr::one());
        let data = ContactData::new(beta, omega, DiffOp::partial(3, 0)).unwrap();
        match lift_contact(&data, rational(0), ScalarExpr::zero(), &chart, &probe) {
            Err(StructureError::Precondition(msg)) => {
                assert!(msg.contains("contact.unit_pairing"), "{msg}");
            }
            other => panic!("expected precondition error, got {other:?}"),
        }
    }
}
