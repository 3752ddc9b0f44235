//! Shared fixtures and the independent brute-force bracket oracle.
//!
//! The oracle assembles the lifted standard-contact data by hand — matrix,
//! twist components, right-hand sides — and solves the contraction systems
//! with a plain dense Gaussian elimination. It shares only the expression
//! arithmetic with the library, none of the solver or structure code.

use lrjcalc::calculus::{DiffOp, XForm};
use lrjcalc::cas::ScalarExpr;
use lrjcalc::chart::Chart;
use lrjcalc::structures::ContactData;

pub fn chart_r3() -> Chart {
    Chart::unit_box("R3", &["x", "y", "z"])
}

pub fn chart_r5() -> Chart {
    Chart::unit_box("R5", &["x1", "y1", "x2", "y2", "z"])
}

/// beta = dz - y dx, w = dx ^ dy, E = d/dz.
pub fn standard_contact_r3() -> ContactData {
    let mut beta = XForm::zero(3, 1);
    beta.set(&[2], ScalarExpr::one());
    beta.set(&[0], -ScalarExpr::coord(1));
    let mut omega = XForm::zero(3, 2);
    omega.set(&[0, 1], ScalarExpr::one());
    ContactData::new(beta, omega, DiffOp::partial(3, 2)).expect("standard data is well formed")
}

/// beta = dz - y1 dx1 - y2 dx2, w = dx1 ^ dy1 + dx2 ^ dy2, E = d/dz.
pub fn standard_contact_r5() -> ContactData {
    let mut beta = XForm::zero(5, 1);
    beta.set(&[4], ScalarExpr::one());
    beta.set(&[0], -ScalarExpr::coord(1));
    beta.set(&[2], -ScalarExpr::coord(3));
    let mut omega = XForm::zero(5, 2);
    omega.set(&[0, 1], ScalarExpr::one());
    omega.set(&[2, 3], ScalarExpr::one());
    ContactData::new(beta, omega, DiffOp::partial(5, 4)).expect("standard data is well formed")
}

/// Dense Gaussian solve of `m x = rhs` over symbolic entries, first nonzero
/// pivot, free variables pinned to zero. Returns `None` when inconsistent.
pub fn solve_dense(m: &[Vec<ScalarExpr>], rhs: &[ScalarExpr]) -> Option<Vec<ScalarExpr>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a: Vec<Vec<ScalarExpr>> = (0..rows)
        .map(|i| {
            let mut row = m[i].clone();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next_row = 0;
    for col in 0..cols {
        let Some(p) = (next_row..rows).find(|&r| !a[r][col].normalized().is_exactly_zero())
        else {
            continue;
        };
        a.swap(next_row, p);
        let inv = a[next_row][col].clone();
        for c in col..=cols {
            a[next_row][c] = a[next_row][c].clone() / inv.clone();
        }
        for r in 0..rows {
            if r == next_row {
                continue;
            }
            let factor = a[r][col].clone();
            if factor.normalized().is_exactly_zero() {
                continue;
            }
            for c in col..=cols {
                a[r][c] = a[r][c].clone() - factor.clone() * a[next_row][c].clone();
            }
        }
        pivots.push((next_row, col));
        next_row += 1;
        if next_row == rows {
            break;
        }
    }
    for r in next_row..rows {
        if !a[r][cols].normalized().is_exactly_zero() {
            return None;
        }
    }
    let mut x = vec![ScalarExpr::zero(); cols];
    for &(r, c) in &pivots {
        x[c] = a[r][cols].clone();
    }
    Some(x)
}

/// The 4x4 matrix of the lifted standard-contact 2-form on the frame
/// (1, dx, dy, dz): W = dx ^ dy + u ^ (dz - y dx), written out entry by
/// entry. Independent of the library's lift construction.
pub fn lifted_r3_matrix() -> Vec<Vec<ScalarExpr>> {
    let y = ScalarExpr::coord(1);
    let mut g = vec![vec![ScalarExpr::zero(); 4]; 4];
    g[0][1] = -y.clone();
    g[1][0] = y;
    g[0][3] = ScalarExpr::one();
    g[3][0] = -ScalarExpr::one();
    g[1][2] = ScalarExpr::one();
    g[2][1] = -ScalarExpr::one();
    g
}

/// Brute-force bracket on the lifted standard contact chart with unit twist
/// value `c`: assemble the twisted differential of each operand, solve the
/// two contraction systems by `solve_dense`, and contract the results
/// against the matrix directly.
pub fn oracle_bracket_lifted_r3(c: i64, f: &ScalarExpr, g: &ScalarExpr) -> ScalarExpr {
    let matrix = lifted_r3_matrix();
    // On this chart the twist reduces to c times the unit covector, so the
    // twisted differential of a function has components
    // ((1 + c) f, df/dx, df/dy, df/dz).
    let rhs = |h: &ScalarExpr| -> Vec<ScalarExpr> {
        vec![
            ScalarExpr::int(1 + c) * h.clone(),
            h.diff(0),
            h.diff(1),
            h.diff(2),
        ]
    };
    // (i_phi W)(e_j) = sum_i phi_i W[i][j], so the system matrix is the
    // transpose.
    let m: Vec<Vec<ScalarExpr>> = (0..4)
        .map(|j| (0..4).map(|i| matrix[i][j].clone()).collect())
        .collect();
    let phi_f = solve_dense(&m, &rhs(f)).expect("the lifted form is nondegenerate");
    let phi_g = solve_dense(&m, &rhs(g)).expect("the lifted form is nondegenerate");
    let mut value = ScalarExpr::zero();
    for i in 0..4 {
        for j in 0..4 {
            value = value - phi_f[i].clone() * matrix[i][j].clone() * phi_g[j].clone();
        }
    }
    value.normalized().expr
}
