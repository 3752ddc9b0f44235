//! Compatibility of a twist with the anchor `rho_alpha(phi) = phi + alpha(phi)`.
//!
//! The twisted anchor respects brackets exactly when
//! `delta(alpha) = delta(1) ^ alpha`, which in turn is equivalent to the
//! pair of conditions "`alpha(1)` is constant" and "the spatial part of
//! `alpha` is closed". Both routes are computed independently and the report
//! fails loudly if they ever disagree, since that would mean the calculus
//! layers contradict each other.

use super::report::{CheckResult, Grade, VerificationReport};
use super::{zero_form, zero_xform};
use crate::calculus::{AlphaForm, SkewFormD};
use crate::cas::Probe;
use crate::chart::Chart;

pub fn check_rho_alpha_condition(
    alpha: &AlphaForm,
    chart: &Chart,
    probe: &Probe,
) -> VerificationReport {
    let dim = chart.dim();
    let mut report = VerificationReport::new();

    let structure = CheckResult::timed(
        "anchor.structure_equation",
        "delta(alpha) = delta(1) ^ alpha",
        || {
            let residual = alpha.form().delta() - SkewFormD::unit_dual(dim).wedge(alpha.form());
            zero_form(&residual, chart, probe)
        },
    );

    let unit_constant = CheckResult::timed(
        "anchor.unit_value_constant",
        "d(alpha(1)) = 0",
        || {
            let gradient = crate::calculus::XForm::scalar(dim, alpha.unit_value().clone()).d();
            zero_xform(&gradient, chart, probe)
        },
    );

    let spatial_closed = CheckResult::timed(
        "anchor.spatial_part_closed",
        "d(alpha|X) = 0",
        || zero_xform(&alpha.spatial().d(), chart, probe),
    );

    let route_delta = structure.grade.holds();
    let route_split = unit_constant.grade.holds() && spatial_closed.grade.holds();
    let agreement = CheckResult::new(
        "anchor.route_agreement",
        "delta route and (constant unit, closed spatial) route agree",
        if route_delta == route_split {
            Grade::Exact
        } else {
            Grade::Failed
        },
        Some(if route_delta == route_split {
            format!(
                "both routes: {}",
                if route_delta { "admissible" } else { "inadmissible" }
            )
        } else {
            format!("delta route says {route_delta}, split route says {route_split}")
        }),
    );

    report.push(structure);
    report.push(unit_constant);
    report.push(spatial_closed);
    report.push(agreement);
    report
}
