//! Execute the check directives of a parsed document against the structure
//! verifiers. Every outcome — including construction failures — lands in the
//! report as a graded row, scoped by the structure's declared name.

use crate::calculus::AlphaForm;
use crate::cas::Probe;
use crate::dsl::{CheckDirective, Document, StructureData};
use crate::structures::{
    check_contraction_identity, check_lcs, check_lrj_d, check_module_isos, classify,
    contact_data_check, lift_contact, reeb, volume_check, CheckResult, ContactData, Grade,
    LcsData, LrjData, StructureError, VerificationReport,
};

const DEFAULT_TRIALS: usize = 8;

/// Run every check directive in order and collect one combined report.
pub fn run_document(doc: &Document, probe: &Probe) -> VerificationReport {
    let mut out = VerificationReport::new();
    for directive in &doc.checks {
        out.extend(run_directive(doc, directive, probe));
    }
    out
}

fn run_directive(
    doc: &Document,
    directive: &CheckDirective,
    probe: &Probe,
) -> VerificationReport {
    let decl = doc
        .structure(&directive.target)
        .expect("parser verified the check target");
    let trials = directive.trials.unwrap_or(DEFAULT_TRIALS);
    let report = match &decl.data {
        StructureData::Lcs { alpha, omega } => {
            match LcsData::new(alpha.clone(), omega.clone()) {
                Ok(data) => gather(check_lcs(&data, &doc.chart, probe)),
                Err(e) => construction_failure(&e),
            }
        }
        StructureData::Contact { beta, omega, reeb } => {
            match ContactData::new(beta.clone(), omega.clone(), reeb.clone()) {
                Ok(data) => gather(contact_data_check(&data, &doc.chart, probe)),
                Err(e) => construction_failure(&e),
            }
        }
        StructureData::Lrj { alpha, omega } => {
            match LrjData::new(AlphaForm::new(alpha.clone()), omega.clone()) {
                Ok(data) => lrj_battery(&data, doc, probe, trials),
                Err(e) => construction_failure(&e),
            }
        }
        StructureData::Lift { contact, c, g } => {
            let base = doc
                .structure(contact)
                .expect("parser verified the contact reference");
            let StructureData::Contact { beta, omega, reeb } = &base.data else {
                unreachable!("parser verified the reference kind");
            };
            match ContactData::new(beta.clone(), omega.clone(), reeb.clone()) {
                Ok(data) => match lift_contact(&data, c.clone(), g.clone(), &doc.chart, probe) {
                    Ok((lifted, mut report)) => {
                        report.extend(lrj_battery(&lifted.as_lrj(), doc, probe, trials));
                        report
                    }
                    Err(e) => construction_failure(&e),
                },
                Err(e) => construction_failure(&e),
            }
        }
    };
    report.scoped(&decl.name)
}

/// The full battery for a twisted symplectic structure on the operator
/// module: structure equations, volume form, unit-contraction identity,
/// classification, the distinguished operator, and the module isomorphisms.
fn lrj_battery(
    data: &LrjData,
    doc: &Document,
    probe: &Probe,
    trials: usize,
) -> VerificationReport {
    let chart = &doc.chart;
    let mut out = VerificationReport::new();
    merge(&mut out, check_lrj_d(data, chart, probe));
    merge(&mut out, volume_check(data.omega(), chart, probe));
    out.extend(check_contraction_identity(data, chart, probe));
    match classify(data, chart, probe) {
        Ok((_, report)) => out.extend(report),
        Err(e) => out.push(CheckResult::new(
            "classify.label",
            "alpha(1) = -1 separates the two classes",
            Grade::Indeterminate,
            Some(e.to_string()),
        )),
    }
    match reeb(data.omega(), chart, probe) {
        Ok((h, report)) => {
            out.extend(report);
            merge(
                &mut out,
                check_module_isos(data.omega(), &h, chart, probe, trials),
            );
        }
        Err(e) => out.push(CheckResult::new(
            "reeb.defining_equation",
            "i_H w = -delta(1)",
            Grade::Failed,
            Some(e.to_string()),
        )),
    }
    out
}

fn gather(result: Result<VerificationReport, StructureError>) -> VerificationReport {
    match result {
        Ok(report) => report,
        Err(e) => construction_failure(&e),
    }
}

fn merge(out: &mut VerificationReport, result: Result<VerificationReport, StructureError>) {
    match result {
        Ok(report) => out.extend(report),
        Err(e) => out.push(CheckResult::new(
            "construction",
            "structure data satisfies its preconditions",
            Grade::Failed,
            Some(e.to_string()),
        )),
    }
}

fn construction_failure(e: &StructureError) -> VerificationReport {
    let mut out = VerificationReport::new();
    out.push(CheckResult::new(
        "construction",
        "structure data satisfies its preconditions",
        Grade::Failed,
        Some(e.to_string()),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_document;

    const LIFTED: &str = "\
chart R3 (x, y, z);
form beta : 1 on X = dz - y*dx;
form w : 2 on X = dx ^ dy;
field E = d/dz;
contact C { beta = beta; omega = w; reeb = E; }
lift L { contact = C; c = 0; g = 0; }
check C;
check L with trials = 4;
";

    #[test]
    fn the_untwisted_standard_lift_runs_green() {
        let doc = parse_document(LIFTED).unwrap();
        let report = run_document(&doc, &Probe::seeded(9));
        assert!(!report.checks.is_empty());
        for row in &report.checks {
            assert!(
                row.grade.holds(),
                "{} failed: {:?}",
                row.check,
                row.witness
            );
        }
        assert!(report.find("C.contact.unit_pairing").is_some());
        assert!(report.find("L.lift.structure_equation").is_some());
        assert!(report.find("L.classify.label").is_some());
        assert!(report.find("L.module_iso.kernel_pairing").is_some());
    }

    #[test]
    fn a_broken_structure_reports_and_does_not_panic() {
        let src = "\
chart R3 (x, y, z);
form beta : 1 on X = dz;
form w : 2 on X = dx ^ dz;
field E = d/dz;
contact C { beta = beta; omega = w; reeb = E; }
check C;
";
        let doc = parse_document(src).unwrap();
        let report = run_document(&doc, &Probe::seeded(9));
        let bad = report.find("C.contact.fundamental_contraction").unwrap();
        assert!(!bad.grade.holds());
        assert!(bad.witness.is_some());
    }

    #[test]
    fn an_even_dimensional_lrj_block_degrades_to_a_construction_row() {
        let src = "\
chart R2 (x, y);
form a : 1 on D = 0;
form w : 2 on D = dx ^ dy;
lrj S { alpha = a; omega = w; }
check S;
";
        let doc = parse_document(src).unwrap();
        let report = run_document(&doc, &Probe::seeded(9));
        let rows: Vec<&str> = report.checks.iter().map(|c| c.check.as_str()).collect();
        assert!(rows.contains(&"S.construction"), "{rows:?}");
        assert!(!report.passed());
    }
}
