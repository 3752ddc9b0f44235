//! Hamiltonian operators and the induced bracket on functions.

use super::lrj::LrjData;
use super::report::{CheckResult, VerificationReport};
use super::reeb::solve_contraction;
use super::{zero_form, zero_op, zero_scalar, StructureError};
use crate::calculus::{rho_alpha_apply, DiffOp, SkewFormD};
use crate::cas::{Probe, ScalarExpr};
use crate::chart::Chart;

/// A function together with its hamiltonian operator and hamiltonian vector
/// field: `i_phi w = delta_alpha(f)` and
/// `i_X w = delta_alpha(f) - [H(f) + f alpha(H)] i_1 w - f [1 + alpha(1)] delta(1)`.
#[derive(Debug, Clone)]
pub struct HamiltonianPair {
    pub f: ScalarExpr,
    pub phi: DiffOp,
    pub x: DiffOp,
}

fn mult_op(dim: usize, f: ScalarExpr) -> DiffOp {
    DiffOp::from_parts(f, vec![ScalarExpr::zero(); dim])
}

fn vector_field_rhs(f: &ScalarExpr, data: &LrjData, h: &DiffOp) -> SkewFormD {
    let dim = data.omega().dim();
    let alpha = data.alpha();
    let twisted_df = SkewFormD::scalar(dim, f.clone()).delta_alpha(alpha);
    let reeb_coeff = h.apply(f) + f.clone() * alpha.eval(h);
    let unit_coeff = f.clone() * (ScalarExpr::one() + alpha.unit_value().clone());
    twisted_df
        - data.unit_contraction().scale(&reeb_coeff)
        - SkewFormD::unit_dual(dim).scale(&unit_coeff)
}

/// Solve for both operators and re-verify their defining identities plus the
/// consistency relation `phi_f = [rho_alpha(H)](f) + X_f - f [1 + alpha(1)] H`.
pub fn hamiltonian_ops(
    f: &ScalarExpr,
    data: &LrjData,
    h: &DiffOp,
    chart: &Chart,
    probe: &Probe,
) -> Result<(HamiltonianPair, VerificationReport), StructureError> {
    let dim = data.omega().dim();
    let alpha = data.alpha();
    let twisted_df = SkewFormD::scalar(dim, f.clone()).delta_alpha(alpha);
    let phi = solve_contraction(data.omega(), &twisted_df)?.normalize();
    let x_rhs = vector_field_rhs(f, data, h);
    let x = solve_contraction(data.omega(), &x_rhs)?.normalize();

    let mut report = VerificationReport::new();
    report.push(CheckResult::timed(
        "hamilton.defining_equation",
        "i_phi w = delta_alpha(f)",
        || {
            let residual = data.omega().interior(&phi) - twisted_df.clone();
            zero_form(&residual, chart, probe)
        },
    ));
    report.push(CheckResult::timed(
        "hamilton.vector_field_equation",
        "i_X w = delta_alpha(f) - [H(f) + f alpha(H)] i_1 w - f [1 + alpha(1)] delta(1)",
        || {
            let residual = data.omega().interior(&x) - x_rhs.clone();
            zero_form(&residual, chart, probe)
        },
    ));
    report.push(CheckResult::timed(
        "hamilton.no_unit_part",
        "X_f(1) = 0",
        || zero_scalar(x.unit_part(), chart, probe),
    ));
    report.push(CheckResult::timed(
        "hamilton.kernel_membership",
        "(i_1 w)(X_f) = 0",
        || {
            let pairing = data.unit_contraction().eval(std::slice::from_ref(&x));
            zero_scalar(&pairing, chart, probe)
        },
    ));
    report.push(CheckResult::timed(
        "hamilton.consistency",
        "phi_f = [rho_alpha(H)](f) + X_f - f [1 + alpha(1)] H",
        || {
            let action = rho_alpha_apply(h, alpha, f);
            let unit_coeff = f.clone() * (ScalarExpr::one() + alpha.unit_value().clone());
            let expected = mult_op(dim, action) + x.clone() - h.scale(&unit_coeff);
            zero_op(&(phi.clone() - expected), chart, probe)
        },
    ));

    Ok((
        HamiltonianPair {
            f: f.clone(),
            phi,
            x,
        },
        report,
    ))
}

/// Bracket of two functions, `{f, g} = -w(phi_f, phi_g)`, verified against
/// the equivalent form `-w(X_f, X_g) - f H_alpha(g) + g H_alpha(f)` with
/// `H_alpha = [1 + alpha(1)] rho_alpha(H)`.
pub fn jacobi_bracket(
    f: &ScalarExpr,
    g: &ScalarExpr,
    data: &LrjData,
    h: &DiffOp,
    chart: &Chart,
    probe: &Probe,
) -> Result<(ScalarExpr, VerificationReport), StructureError> {
    let dim = data.omega().dim();
    let alpha = data.alpha();
    let solve_phi = |func: &ScalarExpr| -> Result<DiffOp, StructureError> {
        let rhs = SkewFormD::scalar(dim, func.clone()).delta_alpha(alpha);
        Ok(solve_contraction(data.omega(), &rhs)?.normalize())
    };
    let phi_f = solve_phi(f)?;
    let phi_g = solve_phi(g)?;
    let value = (-data.omega().eval(&[phi_f, phi_g])).normalized().expr;

    let x_f = solve_contraction(data.omega(), &vector_field_rhs(f, data, h))?;
    let x_g = solve_contraction(data.omega(), &vector_field_rhs(g, data, h))?;
    let scale = ScalarExpr::one() + alpha.unit_value().clone();
    let h_alpha = |func: &ScalarExpr| scale.clone() * rho_alpha_apply(h, alpha, func);

    let mut report = VerificationReport::new();
    report.push(CheckResult::timed(
        "bracket.alternative_form",
        "{f, g} = -w(X_f, X_g) - f H_alpha(g) + g H_alpha(f)",
        || {
            let alt = -data.omega().eval(&[x_f.clone(), x_g.clone()])
                - f.clone() * h_alpha(g)
                + g.clone() * h_alpha(f);
            zero_scalar(&(value.clone() - alt), chart, probe)
        },
    ));
    Ok((value, report))
}
