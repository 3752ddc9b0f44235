//! Chart-local calculus: first-order operators and skew multilinear forms.

mod form;
mod op;

pub use form::{
    pfaffian_matrix, rho_alpha_apply, rho_alpha_op, theta, AlphaForm, DisplayForm, SkewFormD,
    XForm,
};
pub use op::{DiffOp, DisplayOp};
