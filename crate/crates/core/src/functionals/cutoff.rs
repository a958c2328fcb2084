//! The smooth cutoff `χ` behind the windows `θ_ℓ(x) = χ(|x|/ℓ)`.

use serde::Serialize;

use crate::error::Result;
use crate::quad::Quadrature;

/// `χ(r) = g(2−r) / (g(2−r) + g(r−1))` with `g(s) = e^{−1/s}` for `s > 0`.
///
/// Exactly 1 on `[0, 1]`, exactly 0 on `[2, ∞)`, nonincreasing and `C^∞`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CutoffChi {
    /// `∫₀^∞ χ(r) dr`.
    pub l1_mass: f64,
}

fn g(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

impl CutoffChi {
    pub fn standard() -> Result<Self> {
        let q = Quadrature::with_rel_tol(1e-13);
        let transition = q.integrate(Self::profile, 1.0, 2.0)?;
        Ok(Self {
            l1_mass: 1.0 + transition,
        })
    }

    fn profile(r: f64) -> f64 {
        if r <= 1.0 {
            return 1.0;
        }
        if r >= 2.0 {
            return 0.0;
        }
        let (a, b) = (g(2.0 - r), g(r - 1.0));
        a / (a + b)
    }

    pub fn value(&self, r: f64) -> f64 {
        Self::profile(r.abs())
    }

    /// `θ_ℓ(r) = χ(r/ℓ)`.
    pub fn theta(&self, r: f64, scale: f64) -> f64 {
        self.value(r / scale)
    }

    /// Outer edge of the support of `θ_ℓ`.
    pub fn support(&self, scale: f64) -> f64 {
        2.0 * scale
    }
}
