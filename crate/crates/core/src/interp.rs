//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson).
//!
//! Monotone data stays monotone and nonnegative data stays nonnegative
//! between knots, which is what both the tabulated potentials and the
//! interpolated scattering profile rely on.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
    uniform: Option<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::validation("interpolation", "need matching knots, at least two"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("interpolation", "knots must be increasing"));
        }
        let n = x.len();
        let secants: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (d0, d1) = (secants[i - 1], secants[i]);
            if d0 * d1 <= 0.0 {
                slopes[i] = 0.0;
            } else {
                // weighted harmonic mean (Fritsch–Butland form)
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                slopes[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        let h = x[1] - x[0];
        let uniform = x
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.max(1.0))
            .then_some(h);
        Ok(Self { x, y, slopes, uniform })
    }

    /// Use caller-provided knot derivatives (e.g. exact ones from an ODE
    /// solver) instead of estimated slopes.
    pub fn with_slopes(x: Vec<f64>, y: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        let mut s = Self::new(x, y)?;
        if slopes.len() != s.x.len() {
            return Err(Error::validation("interpolation", "slope count mismatch"));
        }
        s.slopes = slopes;
        Ok(s)
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn cell(&self, t: f64) -> usize {
        let last = self.x.len() - 2;
        match self.uniform {
            Some(h) => (((t - self.x[0]) / h).floor().max(0.0) as usize).min(last),
            None => self.x.partition_point(|&v| v <= t).saturating_sub(1).min(last),
        }
    }

    /// Value at `t`; constant extrapolation outside the knot range.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x_max() {
            return self.y[self.y.len() - 1];
        }
        let i = self.cell(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.slopes[i] + h01 * self.y[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn eval_derivative(&self, t: f64) -> f64 {
        if t < self.x[0] || t > self.x_max() {
            return 0.0;
        }
        let i = self.cell(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        d00 * self.y[i] + d10 * self.slopes[i] + d01 * self.y[i + 1] + d11 * self.slopes[i + 1]
    }
}
