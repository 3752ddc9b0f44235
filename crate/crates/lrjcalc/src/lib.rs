//! Chart-local symbolic verifier for skew-symmetric structures on
//! first-order differential operators.
//!
//! The crate builds up in layers:
//!
//! * [`chart`] — named coordinate charts with box domains and deterministic
//!   sampling plans;
//! * [`cas`] — exact scalar expressions, canonical forms, graded zero tests;
//! * [`calculus`] — first-order operators, skew forms on operators, ordinary
//!   differential forms, wedge/interior/differential calculus;
//! * [`structures`] — the geometric structure checks (twisted symplectic
//!   data, special operators, brackets, contact lifts) with graded verdicts;
//! * [`dsl`] — a small declaration language for charts, forms and checks;
//! * [`cli`] — the command-line front end with reproducible JSON reports.

pub mod calculus;
pub mod cas;
pub mod chart;
pub mod cli;
pub mod dsl;
pub mod rnd;
pub mod run;
pub mod structures;
pub mod suite;
