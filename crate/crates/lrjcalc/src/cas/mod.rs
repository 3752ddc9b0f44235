//! Exact scalar expressions over a chart.
//!
//! [`ScalarExpr`] is an immutable tree over arbitrary-precision rational
//! constants, coordinate symbols, the four arithmetic operations, integer
//! powers and the unary kernels `sin`, `cos`, `exp`. All structural rewriting
//! is exact; floating point only ever appears in [`eval`](ScalarExpr::eval)
//! and in the numeric half of graded zero testing.
//!
//! Zero testing is *graded* (see [`ZeroGrade`]): the engine never collapses
//! "could not prove nonzero" into a boolean. The normalized fragment
//! (expanded multivariate rational function, transcendental calls as opaque
//! kernels) decides exact zeros; seeded sampling decides the rest.

mod nf;
mod zero;

pub use nf::Normalized;
pub use zero::{is_nonvanishing, is_zero, NonvanishGrade, Probe};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Immutable scalar expression tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScalarExpr {
    /// Exact rational constant.
    Rat(BigRational),
    /// Coordinate symbol, by index into the ambient chart.
    Coord(u32),
    Add(Arc<ScalarExpr>, Arc<ScalarExpr>),
    Sub(Arc<ScalarExpr>, Arc<ScalarExpr>),
    Mul(Arc<ScalarExpr>, Arc<ScalarExpr>),
    Div(Arc<ScalarExpr>, Arc<ScalarExpr>),
    /// Integer power of a subexpression; the exponent may be negative.
    Pow(Arc<ScalarExpr>, i32),
    Sin(Arc<ScalarExpr>),
    Cos(Arc<ScalarExpr>),
    Exp(Arc<ScalarExpr>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero while evaluating `{0}`")]
    DivisionByZero(String),
    #[error("zero raised to negative power while evaluating `{0}`")]
    ZeroToNegativePower(String),
    #[error("point has {got} coordinates, expression expects at least {need}")]
    PointTooShort { got: usize, need: usize },
}

impl ScalarExpr {
    pub fn zero() -> Self {
        ScalarExpr::Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        ScalarExpr::Rat(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        ScalarExpr::Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rat(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational constant with zero denominator");
        ScalarExpr::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn constant(q: BigRational) -> Self {
        ScalarExpr::Rat(q)
    }

    pub fn coord(i: usize) -> Self {
        ScalarExpr::Coord(i as u32)
    }

    pub fn sin(e: ScalarExpr) -> Self {
        ScalarExpr::Sin(Arc::new(e))
    }

    pub fn cos(e: ScalarExpr) -> Self {
        ScalarExpr::Cos(Arc::new(e))
    }

    pub fn exp(e: ScalarExpr) -> Self {
        ScalarExpr::Exp(Arc::new(e))
    }

    /// `self^k` with light folding of trivial exponents.
    pub fn pow(self, k: i32) -> Self {
        match k {
            0 => ScalarExpr::one(),
            1 => self,
            _ => {
                if let ScalarExpr::Rat(q) = &self {
                    if !q.is_zero() || k > 0 {
                        return ScalarExpr::Rat(rat_pow(q, k));
                    }
                }
                ScalarExpr::Pow(Arc::new(self), k)
            }
        }
    }

    pub fn neg(self) -> Self {
        ScalarExpr::int(-1) * self
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, ScalarExpr::Rat(q) if q.is_zero())
    }

    pub fn is_one_const(&self) -> bool {
        matches!(self, ScalarExpr::Rat(q) if q.is_one())
    }

    /// The constant value, if the node is a literal rational.
    pub fn as_rat(&self) -> Option<&BigRational> {
        match self {
            ScalarExpr::Rat(q) => Some(q),
            _ => None,
        }
    }

    /// Exact partial derivative with respect to coordinate `i`.
    pub fn diff(&self, i: usize) -> ScalarExpr {
        match self {
            ScalarExpr::Rat(_) => ScalarExpr::zero(),
            ScalarExpr::Coord(j) => {
                if *j as usize == i {
                    ScalarExpr::one()
                } else {
                    ScalarExpr::zero()
                }
            }
            ScalarExpr::Add(a, b) => a.diff(i) + b.diff(i),
            ScalarExpr::Sub(a, b) => a.diff(i) - b.diff(i),
            ScalarExpr::Mul(a, b) => {
                a.diff(i) * (**b).clone() + (**a).clone() * b.diff(i)
            }
            ScalarExpr::Div(a, b) => {
                let num = a.diff(i) * (**b).clone() - (**a).clone() * b.diff(i);
                num / (**b).clone().pow(2)
            }
            ScalarExpr::Pow(b, k) => {
                ScalarExpr::int(*k as i64) * (**b).clone().pow(k - 1) * b.diff(i)
            }
            ScalarExpr::Sin(u) => ScalarExpr::cos((**u).clone()) * u.diff(i),
            ScalarExpr::Cos(u) => {
                ScalarExpr::int(-1) * ScalarExpr::sin((**u).clone()) * u.diff(i)
            }
            ScalarExpr::Exp(u) => ScalarExpr::exp((**u).clone()) * u.diff(i),
        }
    }

    /// Numeric evaluation at a point given in chart coordinate order.
    pub fn eval(&self, p: &[f64]) -> Result<f64, EvalError> {
        match self {
            ScalarExpr::Rat(q) => Ok(rat_to_f64(q)),
            ScalarExpr::Coord(i) => p.get(*i as usize).copied().ok_or(
                EvalError::PointTooShort {
                    got: p.len(),
                    need: *i as usize + 1,
                },
            ),
            ScalarExpr::Add(a, b) => Ok(a.eval(p)? + b.eval(p)?),
            ScalarExpr::Sub(a, b) => Ok(a.eval(p)? - b.eval(p)?),
            ScalarExpr::Mul(a, b) => Ok(a.eval(p)? * b.eval(p)?),
            ScalarExpr::Div(a, b) => {
                let d = b.eval(p)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero(b.to_string()));
                }
                Ok(a.eval(p)? / d)
            }
            ScalarExpr::Pow(b, k) => {
                let v = b.eval(p)?;
                if v == 0.0 && *k < 0 {
                    return Err(EvalError::ZeroToNegativePower(b.to_string()));
                }
                Ok(v.powi(*k))
            }
            ScalarExpr::Sin(u) => Ok(u.eval(p)?.sin()),
            ScalarExpr::Cos(u) => Ok(u.eval(p)?.cos()),
            ScalarExpr::Exp(u) => Ok(u.eval(p)?.exp()),
        }
    }

    /// Magnitude estimate used for relative tolerances: the evaluation with
    /// every addition made constructive (|a| + |b|), so cancellation cannot
    /// hide the size of the quantities involved.
    pub(crate) fn eval_scale(&self, p: &[f64]) -> Result<f64, EvalError> {
        match self {
            ScalarExpr::Rat(q) => Ok(rat_to_f64(q).abs()),
            ScalarExpr::Coord(i) => p
                .get(*i as usize)
                .map(|v| v.abs())
                .ok_or(EvalError::PointTooShort {
                    got: p.len(),
                    need: *i as usize + 1,
                }),
            ScalarExpr::Add(a, b) | ScalarExpr::Sub(a, b) => {
                Ok(a.eval_scale(p)? + b.eval_scale(p)?)
            }
            ScalarExpr::Mul(a, b) => Ok(a.eval_scale(p)? * b.eval_scale(p)?),
            ScalarExpr::Div(a, b) => {
                let d = b.eval(p)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero(b.to_string()));
                }
                Ok(a.eval_scale(p)? / d.abs())
            }
            ScalarExpr::Pow(b, k) => {
                if *k < 0 {
                    let v = b.eval(p)?;
                    if v == 0.0 {
                        return Err(EvalError::ZeroToNegativePower(b.to_string()));
                    }
                    Ok(v.abs().powi(*k))
                } else {
                    Ok(b.eval_scale(p)?.powi(*k))
                }
            }
            ScalarExpr::Sin(_) | ScalarExpr::Cos(_) => Ok(1.0),
            ScalarExpr::Exp(u) => Ok(u.eval(p)?.exp()),
        }
    }

    /// Canonical form: the rational fragment becomes a single expanded
    /// quotient of multivariate polynomials with a deterministic term order;
    /// transcendental calls keep their (normalized) arguments and are treated
    /// as opaque kernels. Idempotent.
    pub fn normalize(&self) -> ScalarExpr {
        self.normalized().expr
    }

    /// Like [`normalize`](Self::normalize) but also reports the domain
    /// caveats (subexpressions that were divided by and therefore must not
    /// vanish) that the canonical form no longer shows, e.g. `x/x -> 1`
    /// away from `x = 0`.
    pub fn normalized(&self) -> Normalized {
        nf::normalize(self)
    }

    /// Render with chart coordinate names instead of positional symbols.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> DisplayWith<'a> {
        DisplayWith { expr: self, names }
    }
}

fn rat_pow(q: &BigRational, k: i32) -> BigRational {
    // Callers guarantee the base is nonzero when k < 0.
    q.pow(k)
}

pub(crate) fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl std::ops::Add for ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: ScalarExpr) -> ScalarExpr {
        if self.is_zero_const() {
            return rhs;
        }
        if rhs.is_zero_const() {
            return self;
        }
        if let (ScalarExpr::Rat(a), ScalarExpr::Rat(b)) = (&self, &rhs) {
            return ScalarExpr::Rat(a + b);
        }
        ScalarExpr::Add(Arc::new(self), Arc::new(rhs))
    }
}

impl std::ops::Sub for ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: ScalarExpr) -> ScalarExpr {
        if rhs.is_zero_const() {
            return self;
        }
        if let (ScalarExpr::Rat(a), ScalarExpr::Rat(b)) = (&self, &rhs) {
            return ScalarExpr::Rat(a - b);
        }
        ScalarExpr::Sub(Arc::new(self), Arc::new(rhs))
    }
}

impl std::ops::Mul for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: ScalarExpr) -> ScalarExpr {
        if self.is_zero_const() || rhs.is_zero_const() {
            return ScalarExpr::zero();
        }
        if self.is_one_const() {
            return rhs;
        }
        if rhs.is_one_const() {
            return self;
        }
        if let (ScalarExpr::Rat(a), ScalarExpr::Rat(b)) = (&self, &rhs) {
            return ScalarExpr::Rat(a * b);
        }
        ScalarExpr::Mul(Arc::new(self), Arc::new(rhs))
    }
}

impl std::ops::Div for ScalarExpr {
    type Output = ScalarExpr;
    fn div(self, rhs: ScalarExpr) -> ScalarExpr {
        if rhs.is_one_const() {
            return self;
        }
        ScalarExpr::Div(Arc::new(self), Arc::new(rhs))
    }
}

impl std::ops::Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(self)
    }
}

/// Precedence levels for rendering.
const P_SUM: u8 = 0;
const P_PROD: u8 = 1;
const P_POW: u8 = 2;
const P_ATOM: u8 = 3;

fn fmt_expr(
    e: &ScalarExpr,
    names: Option<&[String]>,
    parent: u8,
    out: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    let prec = match e {
        ScalarExpr::Rat(q) => {
            if q.is_negative() || !q.denom().is_one() {
                P_PROD
            } else {
                P_ATOM
            }
        }
        ScalarExpr::Coord(_) | ScalarExpr::Sin(_) | ScalarExpr::Cos(_) | ScalarExpr::Exp(_) => {
            P_ATOM
        }
        ScalarExpr::Add(..) | ScalarExpr::Sub(..) => P_SUM,
        ScalarExpr::Mul(..) | ScalarExpr::Div(..) => P_PROD,
        ScalarExpr::Pow(..) => P_POW,
    };
    let need_parens = prec < parent;
    if need_parens {
        write!(out, "(")?;
    }
    match e {
        ScalarExpr::Rat(q) => {
            if q.denom().is_one() {
                write!(out, "{}", q.numer())?;
            } else {
                write!(out, "{}/{}", q.numer(), q.denom())?;
            }
        }
        ScalarExpr::Coord(i) => match names {
            Some(ns) if (*i as usize) < ns.len() => write!(out, "{}", ns[*i as usize])?,
            _ => write!(out, "x{i}")?,
        },
        ScalarExpr::Add(a, b) => {
            fmt_expr(a, names, P_SUM, out)?;
            // Fold an explicitly negative right factor into a minus sign.
            if let Some(rest) = negated_part(b) {
                write!(out, " - ")?;
                fmt_expr(&rest, names, P_PROD, out)?;
            } else {
                write!(out, " + ")?;
                fmt_expr(b, names, P_PROD, out)?;
            }
        }
        ScalarExpr::Sub(a, b) => {
            fmt_expr(a, names, P_SUM, out)?;
            write!(out, " - ")?;
            fmt_expr(b, names, P_PROD, out)?;
        }
        ScalarExpr::Mul(a, b) => {
            fmt_expr(a, names, P_PROD, out)?;
            write!(out, "*")?;
            fmt_expr(b, names, P_POW, out)?;
        }
        ScalarExpr::Div(a, b) => {
            fmt_expr(a, names, P_PROD, out)?;
            write!(out, "/")?;
            fmt_expr(b, names, P_ATOM, out)?;
        }
        ScalarExpr::Pow(b, k) => {
            fmt_expr(b, names, P_ATOM, out)?;
            if *k < 0 {
                write!(out, "^({k})")?;
            } else {
                write!(out, "^{k}")?;
            }
        }
        ScalarExpr::Sin(u) => {
            write!(out, "sin(")?;
            fmt_expr(u, names, P_SUM, out)?;
            write!(out, ")")?;
        }
        ScalarExpr::Cos(u) => {
            write!(out, "cos(")?;
            fmt_expr(u, names, P_SUM, out)?;
            write!(out, ")")?;
        }
        ScalarExpr::Exp(u) => {
            write!(out, "exp(")?;
            fmt_expr(u, names, P_SUM, out)?;
            write!(out, ")")?;
        }
    }
    if need_parens {
        write!(out, ")")?;
    }
    Ok(())
}

/// If `e` is `(-c) * rest` or a negative constant, return the positive part.
pub(crate) fn negated_part(e: &ScalarExpr) -> Option<ScalarExpr> {
    match e {
        ScalarExpr::Rat(q) if q.is_negative() => Some(ScalarExpr::Rat(-q)),
        ScalarExpr::Mul(a, b) => {
            if let ScalarExpr::Rat(q) = &**a {
                if q.is_negative() {
                    let pos = ScalarExpr::Rat(-q);
                    return Some(if pos.is_one_const() {
                        (**b).clone()
                    } else {
                        ScalarExpr::Mul(Arc::new(pos), b.clone())
                    });
                }
            }
            None
        }
        _ => None,
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, None, P_SUM, f)
    }
}

pub struct DisplayWith<'a> {
    expr: &'a ScalarExpr,
    names: &'a [String],
}

impl fmt::Display for DisplayWith<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self.expr, Some(self.names), P_SUM, f)
    }
}

/// Outcome of a graded zero test. Never collapsed to a boolean by the
/// library itself; callers decide how much confidence they need.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroGrade {
    /// The normalized rational fragment is literally zero.
    Exact,
    /// Every seeded sample satisfied `|value| <= tol * (1 + scale)`.
    Probabilistic { samples: usize, tol: f64 },
    /// A sample point inside the chart domain where the value is nonzero.
    NonZero { point: Vec<f64>, value: f64 },
    /// Evaluation failed at every attempted sample (e.g. poles everywhere).
    Indeterminate,
}

impl ZeroGrade {
    /// True for `Exact` and `Probabilistic`, i.e. "zero as far as we know".
    pub fn holds(&self) -> bool {
        matches!(self, ZeroGrade::Exact | ZeroGrade::Probabilistic { .. })
    }
}
