//! First-order differential operators on a chart.
//!
//! An operator acts on functions as `phi(f) = a*f + X(f)` where `a` is a
//! function (the unit part, `a = phi(1)`) and `X` is a vector field. The
//! operator is stored by its coefficients against the frame
//! `(1, d/dx_0, ..., d/dx_{n-1})`: index 0 is the unit direction, index
//! `i + 1` the `i`-th coordinate derivative. These operators close under the
//! commutator and carry the function-module structure used everywhere else.

use crate::cas::ScalarExpr;
use std::fmt;

/// A first-order operator `a + sum_i v_i d/dx_i`, stored as `n + 1`
/// coefficients against the frame `(1, d/dx_0, ..., d/dx_{n-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOp {
    comps: Vec<ScalarExpr>,
}

impl DiffOp {
    /// The zero operator on an `n`-coordinate chart.
    pub fn zero(dim: usize) -> DiffOp {
        DiffOp {
            comps: vec![ScalarExpr::zero(); dim + 1],
        }
    }

    /// The identity operator (multiplication by 1).
    pub fn unit(dim: usize) -> DiffOp {
        let mut op = DiffOp::zero(dim);
        op.comps[0] = ScalarExpr::one();
        op
    }

    /// The coordinate derivative `d/dx_i`.
    pub fn partial(dim: usize, i: usize) -> DiffOp {
        assert!(i < dim, "coordinate index out of range");
        let mut op = DiffOp::zero(dim);
        op.comps[i + 1] = ScalarExpr::one();
        op
    }

    /// Operator `scalar + sum_i vector[i] d/dx_i`.
    pub fn from_parts(scalar: ScalarExpr, vector: Vec<ScalarExpr>) -> DiffOp {
        let mut comps = Vec::with_capacity(vector.len() + 1);
        comps.push(scalar);
        comps.extend(vector);
        DiffOp { comps }
    }

    /// Coefficients against the frame, unit direction first.
    pub fn from_frame_coeffs(comps: Vec<ScalarExpr>) -> DiffOp {
        assert!(!comps.is_empty(), "frame needs at least the unit direction");
        DiffOp { comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.len() - 1
    }

    /// `phi(1)`, the multiplication part.
    pub fn unit_part(&self) -> &ScalarExpr {
        &self.comps[0]
    }

    /// Coefficient of `d/dx_i`.
    pub fn vector_coeff(&self, i: usize) -> &ScalarExpr {
        &self.comps[i + 1]
    }

    /// The operator with its unit part removed (a plain vector field).
    pub fn vector_part(&self) -> DiffOp {
        let mut op = self.clone();
        op.comps[0] = ScalarExpr::zero();
        op
    }

    /// All `d/dx_i` coefficients, in coordinate order.
    pub fn vector_coeffs(&self) -> &[ScalarExpr] {
        &self.comps[1..]
    }

    /// All frame coefficients, unit direction first.
    pub fn comps(&self) -> &[ScalarExpr] {
        &self.comps
    }

    /// Apply to a function: `phi(f) = phi(1)*f + X(f)`.
    pub fn apply(&self, f: &ScalarExpr) -> ScalarExpr {
        let mut out = self.comps[0].clone() * f.clone();
        for i in 0..self.dim() {
            out = out + self.comps[i + 1].clone() * f.diff(i);
        }
        out
    }

    /// Commutator `[phi, psi] = phi . psi - psi . phi`.
    ///
    /// For `phi = a + X`, `psi = b + Y` this is `(X(b) - Y(a)) + [X, Y]`;
    /// the result is again first order.
    pub fn bracket(&self, other: &DiffOp) -> DiffOp {
        let dim = self.dim();
        assert_eq!(dim, other.dim(), "operators live on different charts");
        let x = |f: &ScalarExpr, op: &DiffOp| -> ScalarExpr {
            let mut acc = ScalarExpr::zero();
            for i in 0..dim {
                acc = acc + op.comps[i + 1].clone() * f.diff(i);
            }
            acc
        };
        let scalar = x(&other.comps[0], self) - x(&self.comps[0], other);
        let mut vector = Vec::with_capacity(dim);
        for i in 0..dim {
            vector.push(x(&other.comps[i + 1], self) - x(&self.comps[i + 1], other));
        }
        DiffOp::from_parts(scalar, vector)
    }

    /// Module action of a function: `f * phi`.
    pub fn scale(&self, f: &ScalarExpr) -> DiffOp {
        DiffOp {
            comps: self
                .comps
                .iter()
                .map(|c| f.clone() * c.clone())
                .collect(),
        }
    }

    /// Componentwise canonical form.
    pub fn normalize(&self) -> DiffOp {
        DiffOp {
            comps: self.comps.iter().map(|c| c.normalize()).collect(),
        }
    }

    /// True when every coefficient normalizes to literal zero.
    pub fn is_exactly_zero(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.normalized().is_exactly_zero())
    }

    /// Render with chart coordinate names.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> DisplayOp<'a> {
        DisplayOp { op: self, names }
    }
}

impl std::ops::Add for DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: DiffOp) -> DiffOp {
        assert_eq!(self.dim(), rhs.dim(), "operators live on different charts");
        DiffOp {
            comps: self
                .comps
                .into_iter()
                .zip(rhs.comps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::ops::Sub for DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: DiffOp) -> DiffOp {
        assert_eq!(self.dim(), rhs.dim(), "operators live on different charts");
        DiffOp {
            comps: self
                .comps
                .into_iter()
                .zip(rhs.comps)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Neg for DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        DiffOp {
            comps: self.comps.into_iter().map(|c| -c).collect(),
        }
    }
}

pub struct DisplayOp<'a> {
    op: &'a DiffOp,
    names: &'a [String],
}

impl fmt::Display for DisplayOp<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        let coef = |e: &ScalarExpr| -> String {
            let s = e.display_with(self.names).to_string();
            if matches!(e, ScalarExpr::Add(..) | ScalarExpr::Sub(..)) {
                format!("({s})")
            } else {
                s
            }
        };
        let unit = &self.op.comps[0];
        if !unit.is_zero_const() {
            write!(f, "{}", coef(unit))?;
            wrote = true;
        }
        for i in 0..self.op.dim() {
            let c = &self.op.comps[i + 1];
            if c.is_zero_const() {
                continue;
            }
            let (mag, negative) = match crate::cas::negated_part(c) {
                Some(m) => (m, true),
                None => (c.clone(), false),
            };
            if wrote {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            } else if negative {
                write!(f, "-")?;
            }
            let name = self
                .names
                .get(i)
                .map(String::as_str)
                .unwrap_or("?");
            if mag.is_one_const() {
                write!(f, "d/d{name}")?;
            } else {
                write!(f, "{}*d/d{name}", coef(&mag))?;
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}
