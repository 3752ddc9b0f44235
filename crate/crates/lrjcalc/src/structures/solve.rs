//! Exact linear solves over the expression field.
//!
//! Used for the Reeb operator, hamiltonian operators, and inverting the
//! fundamental 2-form. Elimination is Gauss-Jordan with every entry pushed
//! through the normal form after each step, which keeps intermediate
//! expressions from swelling and lets the zero test on pivots be exact.

use crate::cas::ScalarExpr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("singular system: no usable pivot in column {column}")]
    Singular { column: usize },
    #[error("system shape mismatch: {rows} rows, {cols} columns")]
    Shape { rows: usize, cols: usize },
}

/// Preference order for pivots: nonzero constants first (cheapest to divide
/// by and never vanish), then whichever normalized entry prints shortest.
pub(crate) fn pivot_rank(e: &ScalarExpr) -> Option<(u8, usize)> {
    let n = e.normalized();
    if n.is_exactly_zero() {
        return None;
    }
    if n.expr.as_rat().is_some() {
        return Some((0, 0));
    }
    Some((1, n.expr.to_string().len()))
}

/// Solve the square system `a x = b` exactly. Entries may be arbitrary
/// expressions; divisions happen only by pivots that the normal form
/// certifies nonzero (constants) or that are at worst generically nonzero.
pub fn solve_linear(a: &[Vec<ScalarExpr>], b: &[ScalarExpr]) -> Result<Vec<ScalarExpr>, SolveError> {
    let n = a.len();
    if b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(SolveError::Shape {
            rows: n,
            cols: a.first().map_or(0, Vec::len),
        });
    }
    // Augmented matrix, normalized up front.
    let mut m: Vec<Vec<ScalarExpr>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            row.iter()
                .chain(std::iter::once(rhs))
                .map(|e| e.normalized().expr)
                .collect()
        })
        .collect();

    for col in 0..n {
        let pivot_row = (col..n)
            .filter_map(|r| pivot_rank(&m[r][col]).map(|rank| (rank, r)))
            .min()
            .map(|(_, r)| r)
            .ok_or(SolveError::Singular { column: col })?;
        m.swap(col, pivot_row);
        let pivot = m[col][col].clone();
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = (m[r][col].clone() / pivot.clone()).normalized().expr;
            if factor.is_zero_const() {
                continue;
            }
            for c in col..=n {
                let updated = m[r][c].clone() - factor.clone() * m[col][c].clone();
                m[r][c] = updated.normalized().expr;
            }
        }
    }

    Ok((0..n)
        .map(|i| (m[i][n].clone() / m[i][i].clone()).normalized().expr)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> ScalarExpr {
        ScalarExpr::coord(0)
    }

    #[test]
    fn solves_a_constant_system() {
        // 2a + b = 5, a - b = 1  =>  a = 2, b = 1
        let a = vec![
            vec![ScalarExpr::int(2), ScalarExpr::one()],
            vec![ScalarExpr::one(), -ScalarExpr::one()],
        ];
        let b = vec![ScalarExpr::int(5), ScalarExpr::one()];
        let sol = solve_linear(&a, &b).unwrap();
        assert_eq!(sol[0].normalized().expr, ScalarExpr::int(2));
        assert_eq!(sol[1].normalized().expr, ScalarExpr::one());
    }

    #[test]
    fn solves_with_symbolic_entries() {
        // x*a = x^2  =>  a = x (generic division by x is recorded, not fatal)
        let a = vec![vec![x()]];
        let b = vec![x() * x()];
        let sol = solve_linear(&a, &b).unwrap();
        assert_eq!(sol[0].normalized().expr, x());
    }

    #[test]
    fn prefers_constant_pivots_over_symbolic_ones() {
        // Column 0 has entries [x, 1]; the constant row must be chosen even
        // though it comes second, otherwise the solution picks up spurious
        // x-divisions.
        let a = vec![vec![x(), ScalarExpr::zero()], vec![ScalarExpr::one(), ScalarExpr::one()]];
        let b = vec![x() * x(), x() + ScalarExpr::one()];
        let sol = solve_linear(&a, &b).unwrap();
        assert_eq!(sol[0].normalized().expr, x());
        assert_eq!(sol[1].normalized().expr, ScalarExpr::one());
    }

    #[test]
    fn reports_singular_systems() {
        let a = vec![
            vec![ScalarExpr::one(), ScalarExpr::one()],
            vec![ScalarExpr::int(2), ScalarExpr::int(2)],
        ];
        let b = vec![ScalarExpr::zero(), ScalarExpr::zero()];
        match solve_linear(&a, &b) {
            Err(SolveError::Singular { column }) => assert_eq!(column, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }
}
