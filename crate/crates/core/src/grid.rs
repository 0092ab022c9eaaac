//! Uniform radial grids and second-order finite differences.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

/// Real samples on the uniform grid `r_i = r_min + i h`, `i = 0..n_points`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    r_min: f64,
    r_max: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(r_min: f64, r_max: f64, values: Vec<f64>) -> Result<Self> {
        check_grid(r_min, r_max, values.len())?;
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite sample {bad}")));
        }
        Ok(Self {
            r_min,
            r_max,
            values,
        })
    }

    pub fn from_fn(
        r_min: f64,
        r_max: f64,
        n_points: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        check_grid(r_min, r_max, n_points)?;
        let h = (r_max - r_min) / (n_points - 1) as f64;
        let values = (0..n_points).map(|i| f(r_min + i as f64 * h)).collect();
        Self::new(r_min, r_max, values)
    }

    pub fn zeros_like(other: &GridFunction) -> Self {
        Self {
            r_min: other.r_min,
            r_max: other.r_max,
            values: vec![0.0; other.len()],
        }
    }

    /// Same grid, new samples. Caller guarantees matching length.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            r_min: self.r_min,
            r_max: self.r_max,
            values,
        }
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.r_max - self.r_min) / (self.values.len() - 1) as f64
    }

    #[inline]
    pub fn radius(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.step()
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.len()).map(move |i| self.r_min + i as f64 * h)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.values.len() == other.values.len()
            && self.r_min == other.r_min
            && self.r_max == other.r_max
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm over `values[skip .. len - skip]`.
    pub fn interior_max_abs(&self, skip: usize) -> f64 {
        let n = self.len();
        if 2 * skip >= n {
            return 0.0;
        }
        self.values[skip..n - skip]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let h = self.step();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.r_min + i as f64 * h, v))
            .collect();
        self.with_values(values)
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(self.with_values(values))
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.with_values(self.values.iter().map(|v| v * s).collect())
    }

    /// First derivative: central in the interior, second-order one-sided at the ends.
    pub fn derivative(&self) -> Self {
        self.with_values(first_derivative(&self.values, self.step()))
    }

    /// Second derivative: central in the interior, second-order one-sided at the ends.
    pub fn second_derivative(&self) -> Self {
        self.with_values(second_derivative(&self.values, self.step()))
    }
}

fn check_grid(r_min: f64, r_max: f64, n: usize) -> Result<()> {
    if n < MIN_POINTS {
        return Err(Error::GridTooCoarse(n));
    }
    if !(r_min.is_finite() && r_max.is_finite() && r_min > 0.0 && r_max > r_min) {
        return Err(Error::InvalidGrid(format!(
            "need 0 < r_min < r_max, got [{r_min}, {r_max}]"
        )));
    }
    Ok(())
}

pub fn first_derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    d
}

pub fn second_derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let h2 = h * h;
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h2;
    }
    d[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / h2;
    d[n - 1] = (2.0 * y[n - 1] - 5.0 * y[n - 2] + 4.0 * y[n - 3] - y[n - 4]) / h2;
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(
            GridFunction::from_fn(0.1, 1.0, 8, |r| r),
            Err(Error::GridTooCoarse(8))
        );
        assert!(GridFunction::from_fn(0.0, 1.0, 32, |r| r).is_err());
        assert!(GridFunction::from_fn(2.0, 1.0, 32, |r| r).is_err());
        assert!(GridFunction::from_fn(0.1, 1.0, 32, |_| f64::NAN).is_err());
    }

    #[test]
    fn derivatives_exact_on_quadratics() {
        let f = GridFunction::from_fn(0.5, 2.5, 41, |r| 3.0 * r * r - r + 2.0).unwrap();
        let d1 = f.derivative();
        let d2 = f.second_derivative();
        for (i, r) in f.radii().enumerate() {
            assert!((d1.values()[i] - (6.0 * r - 1.0)).abs() < 1e-10);
            assert!((d2.values()[i] - 6.0).abs() < 1e-8);
        }
    }

    #[test]
    fn derivative_error_is_second_order() {
        let err = |n: usize| {
            let f = GridFunction::from_fn(0.5, 3.0, n, f64::sin).unwrap();
            let d2 = f.second_derivative();
            f.radii()
                .zip(d2.values())
                .map(|(r, v)| (v + r.sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(201) / err(401);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn mismatch_detected() {
        let a = GridFunction::from_fn(0.1, 1.0, 32, |r| r).unwrap();
        let b = GridFunction::from_fn(0.1, 1.1, 32, |r| r).unwrap();
        assert_eq!(a.zip_with(&b, |x, y| x + y), Err(Error::GridMismatch));
    }
}
