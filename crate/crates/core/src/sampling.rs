//! Seeded point sampling and residual bookkeeping for sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Point;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Where and how densely to sample, plus the verdict tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpec {
    pub bounds: Vec<(f64, f64)>,
    pub count: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl SampleSpec {
    pub fn new(bounds: Vec<(f64, f64)>, count: usize, seed: u64) -> Result<SampleSpec> {
        let spec = SampleSpec { bounds, count, seed, tolerance: DEFAULT_TOLERANCE };
        spec.check()?;
        Ok(spec)
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64, count: usize, seed: u64) -> Result<SampleSpec> {
        SampleSpec::new(vec![(lo, hi); dim], count, seed)
    }

    pub fn with_tolerance(mut self, tol: f64) -> SampleSpec {
        self.tolerance = tol;
        self
    }

    pub fn with_count(mut self, count: usize) -> SampleSpec {
        self.count = count;
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn check(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Sample("point count must be at least 1".into()));
        }
        if self.bounds.is_empty() {
            return Err(Error::Sample("sample box has no coordinates".into()));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Sample(format!("interval {} is empty or not finite: [{lo}, {hi}]", i + 1)));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Sample(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }

    pub fn points(&self) -> Result<Vec<Point>> {
        sample_points(self)
    }
}

/// Uniform points in the box, reproducible from the seed.
pub fn sample_points(spec: &SampleSpec) -> Result<Vec<Point>> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.count)
        .map(|_| spec.bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()).collect())
        .collect())
}

/// Random vectors with components uniform in `[-1, 1]`.
pub fn random_vectors(seed: u64, count: usize, len: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect()
}

/// Running maximum with its witness point, plus the mean.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub max: f64,
    pub witness: Option<Point>,
    pub sum: f64,
    pub count: usize,
}

impl Default for Residual {
    fn default() -> Self {
        Residual { max: 0.0, witness: None, sum: 0.0, count: 0 }
    }
}

impl Residual {
    pub fn new() -> Residual {
        Residual::default()
    }

    pub fn single(value: f64, p: &[f64]) -> Residual {
        let mut r = Residual::new();
        r.observe(value, p);
        r
    }

    /// Record a value; NaN counts as an infinite residual.
    pub fn observe(&mut self, value: f64, p: &[f64]) {
        let v = if value.is_nan() { f64::INFINITY } else { value.abs() };
        if self.witness.is_none() || v > self.max {
            self.max = v;
            self.witness = Some(p.to_vec());
        }
        self.sum += v;
        self.count += 1;
    }

    /// Merge in point order; ties keep the earlier witness.
    pub fn merge(&mut self, other: &Residual) {
        if other.witness.is_some() && (self.witness.is_none() || other.max > self.max) {
            self.max = other.max;
            self.witness = other.witness.clone();
        }
        self.sum += other.sum;
        self.count += other.count;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max <= tol
    }
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) })
}

/// Evaluate `f` at every point (in parallel) and fold each returned metric
/// into a [`Residual`]. Results are merged in point order, so the outcome
/// does not depend on the thread count. The first failing point (in
/// sample order) aborts the sweep with its location attached.
pub fn sweep<F>(points: &[Point], metrics: usize, f: F) -> Result<Vec<Residual>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let per_point: Vec<Result<Vec<f64>>> = points.par_iter().map(|p| f(p).map_err(|e| e.at(p))).collect();
    let mut out = vec![Residual::new(); metrics];
    for (p, r) in points.iter().zip(per_point) {
        let vals = r?;
        debug_assert_eq!(vals.len(), metrics);
        for (acc, v) in out.iter_mut().zip(vals) {
            acc.observe(v, p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_points() {
        let spec = SampleSpec::cube(3, -1.0, 1.0, 5, 42).unwrap();
        assert_eq!(sample_points(&spec).unwrap(), sample_points(&spec).unwrap());
        let other = SampleSpec { seed: 43, ..spec.clone() };
        assert_ne!(sample_points(&spec).unwrap(), sample_points(&other).unwrap());
    }

    #[test]
    fn points_stay_in_box() {
        let spec = SampleSpec::new(vec![(0.5, 1.5), (-2.0, -1.0), (3.0, 3.0)], 200, 7).unwrap();
        for p in sample_points(&spec).unwrap() {
            assert!((0.5..=1.5).contains(&p[0]) && (-2.0..=-1.0).contains(&p[1]) && p[2] == 3.0);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(SampleSpec::cube(3, -1.0, 1.0, 0, 1).is_err());
        assert!(SampleSpec::new(vec![(1.0, 0.0)], 3, 1).is_err());
        assert!(SampleSpec::cube(2, -1.0, 1.0, 3, 1).unwrap().with_tolerance(0.0).check().is_err());
    }

    #[test]
    fn residual_merge_is_order_stable() {
        let mut a = Residual::single(1.0, &[0.0]);
        a.observe(3.0, &[1.0]);
        let b = Residual::single(3.0, &[2.0]);
        let mut ab = a.clone();
        ab.merge(&b);
        assert_eq!(ab.witness, Some(vec![1.0]));
        assert_eq!(ab.count, 3);
        let mut nan = Residual::new();
        nan.observe(f64::NAN, &[0.0]);
        assert!(!nan.within(1.0));
    }
}
