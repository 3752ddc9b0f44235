//! Coordinate charts and deterministic sample-point generation.
//!
//! A [`Chart`] fixes the ambient data every other module works over: a name,
//! a dimension `n`, the coordinate identifiers and an axis-aligned box domain.
//! Numeric probing of symbolic identities happens at points drawn by
//! [`Chart::sample_points`], which is fully determined by the chart and a
//! [`SamplePlan`] so that every run of the tool reproduces the same values.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default box edge used when a chart is built without an explicit domain.
pub const DEFAULT_BOX: (f64, f64) = (-1.0, 1.0);
/// Default fraction of each interval trimmed from both ends before sampling.
pub const DEFAULT_MARGIN: f64 = 0.1;
/// Default number of probe points for graded zero tests.
pub const DEFAULT_SAMPLES: usize = 32;
/// Default relative tolerance for probabilistic zero tests.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ChartError {
    #[error("chart needs at least one coordinate")]
    Empty,
    #[error("coordinate `{0}` declared twice")]
    DuplicateCoord(String),
    #[error("domain has {got} intervals but chart has {dim} coordinates")]
    DomainMismatch { got: usize, dim: usize },
    #[error("interval [{lo}, {hi}] is empty or not finite")]
    BadInterval { lo: f64, hi: f64 },
}

/// A named coordinate chart with an axis-aligned box domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
    domain: Vec<(f64, f64)>,
}

impl Chart {
    pub fn new(
        name: impl Into<String>,
        coords: Vec<String>,
        domain: Vec<(f64, f64)>,
    ) -> Result<Self, ChartError> {
        if coords.is_empty() {
            return Err(ChartError::Empty);
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(ChartError::DuplicateCoord(c.clone()));
            }
        }
        if domain.len() != coords.len() {
            return Err(ChartError::DomainMismatch {
                got: domain.len(),
                dim: coords.len(),
            });
        }
        for &(lo, hi) in &domain {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ChartError::BadInterval { lo, hi });
            }
        }
        Ok(Chart {
            name: name.into(),
            coords,
            domain,
        })
    }

    /// Chart over `[-1, 1]^n` with the given coordinate names.
    pub fn unit_box(name: impl Into<String>, coords: &[&str]) -> Self {
        let coords: Vec<String> = coords.iter().map(|s| s.to_string()).collect();
        let domain = vec![DEFAULT_BOX; coords.len()];
        Chart::new(name, coords, domain).expect("unit box chart is well formed")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of coordinates `n`.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord_name(&self, i: usize) -> &str {
        &self.coords[i]
    }

    /// Index of a coordinate identifier, if declared.
    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// Deterministic points, uniformly spread over the margin-shrunken box.
    ///
    /// The stream depends only on `(self, plan)`; two calls with equal inputs
    /// return identical points.
    pub fn sample_points(&self, plan: &SamplePlan) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        let boxes: Vec<(f64, f64)> = self
            .domain
            .iter()
            .map(|&(lo, hi)| {
                let trim = plan.margin * (hi - lo);
                (lo + trim, hi - trim)
            })
            .collect();
        (0..plan.count)
            .map(|_| {
                boxes
                    .iter()
                    .map(|&(lo, hi)| rng.gen_range(lo..=hi))
                    .collect()
            })
            .collect()
    }
}

/// How many points to draw, from which seed, and how far to stay away from
/// the domain boundary (as a fraction of each interval length, per side).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePlan {
    pub count: usize,
    pub seed: u64,
    pub margin: f64,
}

impl SamplePlan {
    pub fn new(count: usize, seed: u64, margin: f64) -> Result<Self, ChartError> {
        if !(0.0..0.5).contains(&margin) {
            return Err(ChartError::BadInterval { lo: margin, hi: margin });
        }
        if count == 0 {
            return Err(ChartError::Empty);
        }
        Ok(SamplePlan { count, seed, margin })
    }

    /// 32 points at the default margin.
    pub fn seeded(seed: u64) -> Self {
        SamplePlan {
            count: DEFAULT_SAMPLES,
            seed,
            margin: DEFAULT_MARGIN,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic() {
        let chart = Chart::unit_box("R3", &["x", "y", "z"]);
        let plan = SamplePlan::seeded(7);
        assert_eq!(chart.sample_points(&plan), chart.sample_points(&plan));
    }

    #[test]
    fn different_seeds_differ() {
        let chart = Chart::unit_box("R2", &["x", "y"]);
        let a = chart.sample_points(&SamplePlan::seeded(1));
        let b = chart.sample_points(&SamplePlan::seeded(2));
        assert_ne!(a, b);
    }

    #[test]
    fn margin_shrinks_box() {
        let chart = Chart::new("I", vec!["t".into()], vec![(-1.0, 1.0)]).unwrap();
        let plan = SamplePlan::new(256, 3, 0.25).unwrap();
        for p in chart.sample_points(&plan) {
            assert!(p[0] >= -0.5 && p[0] <= 0.5, "point {p:?} escapes margin");
        }
    }

    #[test]
    fn points_fill_the_shrunken_box() {
        let chart = Chart::new("I", vec!["t".into()], vec![(0.0, 10.0)]).unwrap();
        let plan = SamplePlan::new(512, 11, 0.1).unwrap();
        let pts = chart.sample_points(&plan);
        let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        assert!(lo < 2.0 && hi > 8.0, "samples cluster: [{lo}, {hi}]");
    }

    #[test]
    fn rejects_bad_margin() {
        assert!(SamplePlan::new(8, 0, 0.5).is_err());
    }

    #[test]
    fn rejects_duplicate_coords() {
        let err = Chart::new("C", vec!["x".into(), "x".into()], vec![(-1.0, 1.0); 2]);
        assert_eq!(err.unwrap_err(), ChartError::DuplicateCoord("x".into()));
    }
}
