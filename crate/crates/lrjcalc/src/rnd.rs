//! Deterministic generators for randomized identity checks.
//!
//! Everything here is driven by a seeded ChaCha stream, so a run is fully
//! reproducible from `(seed, dim)`. Generated scalars are small-coefficient
//! polynomials: exact arithmetic stays cheap and the normal form can decide
//! identities on them without sampling.

use crate::calculus::{AlphaForm, DiffOp, SkewFormD, XForm};
use crate::cas::ScalarExpr;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct ExprGen {
    rng: ChaCha8Rng,
    dim: usize,
}

impl ExprGen {
    pub fn new(seed: u64, dim: usize) -> ExprGen {
        ExprGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Uniform choice in `0..n`.
    pub fn pick(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    fn coeff(&mut self) -> ScalarExpr {
        let c: i64 = self.rng.gen_range(-3..=3);
        ScalarExpr::int(if c == 0 { 1 } else { c })
    }

    fn monomial(&mut self, max_degree: u32) -> ScalarExpr {
        let deg = self.rng.gen_range(0..=max_degree);
        let mut m = self.coeff();
        for _ in 0..deg {
            let i = self.rng.gen_range(0..self.dim);
            m = m * ScalarExpr::coord(i);
        }
        m
    }

    /// Random polynomial with a handful of terms.
    pub fn poly(&mut self, max_degree: u32, terms: usize) -> ScalarExpr {
        let mut p = ScalarExpr::zero();
        for _ in 0..terms.max(1) {
            p = p + self.monomial(max_degree);
        }
        p
    }

    pub fn nonzero_constant(&mut self) -> ScalarExpr {
        let c: i64 = self.rng.gen_range(1..=3);
        let s = if self.rng.gen_bool(0.5) { c } else { -c };
        ScalarExpr::int(s)
    }

    /// First-order operator with random unit and vector coefficients.
    pub fn diff_op(&mut self) -> DiffOp {
        let unit = self.poly(2, 2);
        let coeffs = (0..self.dim).map(|_| self.poly(2, 2)).collect();
        DiffOp::from_parts(unit, coeffs)
    }

    /// Operator with no unit part.
    pub fn vector_field(&mut self) -> DiffOp {
        self.diff_op().vector_part()
    }

    /// Random form on operators of the given degree.
    pub fn skew_form(&mut self, degree: usize) -> SkewFormD {
        let mut w = SkewFormD::zero(self.dim, degree);
        let frame = self.dim + 1;
        let picks = (frame * 2).max(3);
        for _ in 0..picks {
            let mut idx: Vec<u8> = Vec::with_capacity(degree);
            while idx.len() < degree {
                let i = self.rng.gen_range(0..frame) as u8;
                if !idx.contains(&i) {
                    idx.push(i);
                }
            }
            let c = self.poly(2, 2);
            let prior = w.comp(&idx);
            w.set(&idx, prior + c);
        }
        w
    }

    /// Random coordinate-frame form of the given degree.
    pub fn x_form(&mut self, degree: usize) -> XForm {
        let mut w = XForm::zero(self.dim, degree);
        let picks = (self.dim * 2).max(3);
        for _ in 0..picks {
            let mut idx: Vec<u8> = Vec::with_capacity(degree);
            while idx.len() < degree {
                let i = self.rng.gen_range(0..self.dim) as u8;
                if !idx.contains(&i) {
                    idx.push(i);
                }
            }
            let c = self.poly(2, 2);
            let prior = w.comp(&idx);
            w.set(&idx, prior + c);
        }
        w
    }

    /// Twist of the shape `c*u + df`: constant unit value, exact (hence
    /// closed) spatial part. These satisfy the anchor compatibility
    /// condition by construction.
    pub fn admissible_alpha(&mut self) -> AlphaForm {
        let c = self.nonzero_constant();
        let f = self.poly(2, 3);
        let spatial = XForm::scalar(self.dim, f).d();
        AlphaForm::from_unit_and_spatial(self.dim, c, &spatial)
    }

    /// Twist whose unit value is a non-constant polynomial; the spatial part
    /// stays exact, so only the unit condition is violated.
    pub fn alpha_nonconstant_unit(&mut self) -> AlphaForm {
        let i = self.rng.gen_range(0..self.dim);
        let unit = ScalarExpr::coord(i) + self.nonzero_constant();
        let f = self.poly(2, 2);
        let spatial = XForm::scalar(self.dim, f).d();
        AlphaForm::from_unit_and_spatial(self.dim, unit, &spatial)
    }

    /// Twist with constant unit value but a non-closed spatial part
    /// (contains an `x_i dx_j` term with `i != j`).
    pub fn alpha_nonclosed_spatial(&mut self) -> AlphaForm {
        let c = self.nonzero_constant();
        let i = self.rng.gen_range(0..self.dim);
        let j = (i + 1 + self.rng.gen_range(0..self.dim - 1)) % self.dim;
        let mut spatial = XForm::scalar(self.dim, self.poly(2, 2)).d();
        let prior = spatial.comp(&[j as u8]);
        spatial.set(&[j as u8], prior + ScalarExpr::coord(i));
        AlphaForm::from_unit_and_spatial(self.dim, c, &spatial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let mut a = ExprGen::new(7, 3);
        let mut b = ExprGen::new(7, 3);
        assert_eq!(a.poly(2, 3), b.poly(2, 3));
        assert_eq!(a.diff_op(), b.diff_op());
        assert_eq!(a.skew_form(2), b.skew_form(2));
    }

    #[test]
    fn admissible_alpha_satisfies_both_route_conditions() {
        let mut g = ExprGen::new(11, 3);
        for _ in 0..5 {
            let alpha = g.admissible_alpha();
            assert!(alpha.unit_value().as_rat().is_some());
            assert!(alpha.spatial().d().normalize().is_exactly_zero());
        }
    }

    #[test]
    fn violating_alphas_break_exactly_one_condition() {
        let mut g = ExprGen::new(13, 3);
        let a = g.alpha_nonconstant_unit();
        assert!(a.unit_value().as_rat().is_none());
        assert!(a.spatial().d().normalize().is_exactly_zero());
        let b = g.alpha_nonclosed_spatial();
        assert!(b.unit_value().as_rat().is_some());
        assert!(!b.spatial().d().normalize().is_exactly_zero());
    }

    #[test]
    fn vector_fields_have_no_unit_part() {
        let mut g = ExprGen::new(3, 4);
        for _ in 0..4 {
            assert!(g.vector_field().unit_part().is_zero_const());
        }
    }
}
