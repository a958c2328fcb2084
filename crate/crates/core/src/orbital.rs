//! Radial one-body profiles: the condensate orbital `φ` and the macroscopic
//! envelopes `ψ` whose dilations `ψ_Λ(r) = ψ(r / Λ)` seed the window
//! experiments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::interp::MonotoneCubic;
use crate::quad::Quadrature;

const PI: f64 = std::f64::consts::PI;
const FOUR_PI: f64 = 4.0 * PI;

/// Unnormalized shape of a radial profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileShape {
    /// `exp(−r² / width)`.
    Gaussian { width: f64 },
    /// `exp(−1 / (1 − r²/radius²))` for `r < radius`, zero beyond.
    Bump { radius: f64 },
    /// `exp(−r / decay)`; has a cusp at the origin.
    Exponential { decay: f64 },
}

/// `coeff · shape(r / dilation)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub shape: ProfileShape,
    pub coeff: f64,
    #[serde(default = "unit")]
    pub dilation: f64,
}

fn unit() -> f64 {
    1.0
}

impl ProfileShape {
    fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            ProfileShape::Gaussian { width } => ("width", width),
            ProfileShape::Bump { radius } => ("radius", radius),
            ProfileShape::Exponential { decay } => ("decay", decay),
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::validation(format!("profile.{name}"), format!("{v} must be positive")))
        }
    }

    /// Shape value and derivatives of orders 0..=4 at `r ≥ 0`.
    fn jet(&self, r: f64) -> [f64; 5] {
        match *self {
            ProfileShape::Gaussian { width: w } => {
                let f = (-r * r / w).exp();
                let (r2, w2) = (r * r, w * w);
                [
                    f,
                    -2.0 * r / w * f,
                    (4.0 * r2 / w2 - 2.0 / w) * f,
                    (-8.0 * r2 * r / (w2 * w) + 12.0 * r / w2) * f,
                    (16.0 * r2 * r2 / (w2 * w2) - 48.0 * r2 / (w2 * w) + 12.0 / w2) * f,
                ]
            }
            ProfileShape::Bump { radius } => {
                let x = r / radius;
                if x >= 1.0 {
                    return [0.0; 5];
                }
                let d = 1.0 - x * x;
                let f = (-1.0 / d).exp();
                if f == 0.0 {
                    return [0.0; 5];
                }
                // g = −1/(1 − x²) and its x-derivatives
                let g1 = -2.0 * x / d.powi(2);
                let g2 = -2.0 / d.powi(2) - 8.0 * x * x / d.powi(3);
                let g3 = -24.0 * x / d.powi(3) - 48.0 * x.powi(3) / d.powi(4);
                let g4 = -24.0 / d.powi(3) - 288.0 * x * x / d.powi(4) - 384.0 * x.powi(4) / d.powi(5);
                let s = 1.0 / radius;
                [
                    f,
                    f * g1 * s,
                    f * (g2 + g1 * g1) * s * s,
                    f * (g3 + 3.0 * g1 * g2 + g1.powi(3)) * s.powi(3),
                    f * (g4 + 4.0 * g1 * g3 + 3.0 * g2 * g2 + 6.0 * g1 * g1 * g2 + g1.powi(4)) * s.powi(4),
                ]
            }
            ProfileShape::Exponential { decay } => {
                let f = (-r / decay).exp();
                let k = -1.0 / decay;
                [f, k * f, k * k * f, k.powi(3) * f, k.powi(4) * f]
            }
        }
    }

    /// Radius beyond which the shape is zero or below `1e-17` relative.
    fn effective_extent(&self) -> f64 {
        match *self {
            ProfileShape::Gaussian { width } => (40.0 * width).sqrt(),
            ProfileShape::Bump { radius } => radius,
            ProfileShape::Exponential { decay } => 40.0 * decay,
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, ProfileShape::Exponential { .. })
    }
}

impl RadialProfile {
    /// Profile with `4π ∫ |φ|² r² dr = 1`.
    pub fn normalized(shape: ProfileShape) -> Result<Self> {
        shape.validate()?;
        let mass = match shape {
            ProfileShape::Gaussian { width } => (PI * width / 2.0).powf(1.5),
            ProfileShape::Exponential { decay } => PI * decay.powi(3),
            ProfileShape::Bump { radius } => {
                let q = Quadrature::with_rel_tol(1e-13);
                FOUR_PI * q.integrate(|r| shape.jet(r)[0].powi(2) * r * r, 0.0, radius)?
            }
        };
        Ok(Self {
            shape,
            coeff: mass.sqrt().recip(),
            dilation: 1.0,
        })
    }

    pub fn gaussian(width: f64) -> Result<Self> {
        Self::normalized(ProfileShape::Gaussian { width })
    }

    pub fn bump(radius: f64) -> Result<Self> {
        Self::normalized(ProfileShape::Bump { radius })
    }

    pub fn exponential(decay: f64) -> Result<Self> {
        Self::normalized(ProfileShape::Exponential { decay })
    }

    /// `r ↦ φ(r / λ)`; the coefficient is kept, so the L² norm grows as `λ^{3/2}`.
    pub fn dilated(&self, lambda: f64) -> Self {
        Self {
            dilation: self.dilation * lambda,
            ..*self
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.coeff * self.shape.jet(r.abs() / self.dilation)[0]
    }

    /// `[φ, φ', φ'', φ''', φ'''']` at `r ≥ 0` (radial derivatives).
    pub fn derivatives(&self, r: f64) -> [f64; 5] {
        let j = self.shape.jet(r.abs() / self.dilation);
        let mut out = [0.0; 5];
        let mut s = self.coeff;
        for k in 0..5 {
            out[k] = j[k] * s;
            s /= self.dilation;
        }
        out
    }

    pub fn extent(&self) -> f64 {
        self.shape.effective_extent() * self.dilation
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.nodes().iter().map(|&r| self.value(r)).collect()
    }

    fn radial_integral<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        let q = Quadrature::with_rel_tol(1e-12);
        let ext = self.extent();
        let breaks = [0.0, 0.25 * ext, 0.5 * ext, ext];
        Ok(FOUR_PI * q.integrate_pieces(|r| f(r) * r * r, &breaks)?)
    }

    /// `‖φ‖_p^p`.
    pub fn lp_power(&self, p: f64) -> Result<f64> {
        match self.shape {
            ProfileShape::Gaussian { width } if self.dilation == 1.0 => {
                // ∫ exp(−p r²/w) d³x = (π w / p)^{3/2}
                Ok(self.coeff.powf(p) * (PI * width / p).powf(1.5))
            }
            _ => self.radial_integral(|r| self.value(r).abs().powf(p)),
        }
    }

    /// `‖∇φ‖₂²`.
    pub fn grad_l2_sq(&self) -> Result<f64> {
        match self.shape {
            ProfileShape::Gaussian { width } if self.dilation == 1.0 && self.is_unit() => Ok(3.0 / width),
            ProfileShape::Exponential { decay } if self.dilation == 1.0 && self.is_unit() => {
                Ok(1.0 / (decay * decay))
            }
            _ => self.radial_integral(|r| self.derivatives(r)[1].powi(2)),
        }
    }

    fn is_unit(&self) -> bool {
        let exact = Self::normalized(self.shape).map(|p| p.coeff).unwrap_or(f64::NAN);
        (exact - self.coeff).abs() <= 1e-15 * exact
    }

    /// Density autocorrelation `A(s) = ∫ ρ(x) ρ(x + s) dx` with `ρ = |φ|²`.
    pub fn autocorrelation(&self) -> Result<Autocorrelation> {
        Autocorrelation::new(self)
    }
}

/// `|∇^m f|` for a radial function from its radial derivatives, `m ∈ 0..=3`.
///
/// `|∇²f|² = f''² + 2(f'/r)²` and `|∇³f|² = f'''² + 6((f'' − f'/r)/r)²`.
pub fn radial_tensor_norms(r: f64, d: &[f64]) -> [f64; 4] {
    let (f1, f2, f3) = (d[1], d[2], d[3]);
    if r == 0.0 {
        // smooth radial data: ∇²f = f''(0) I, and ∇³f(0) = 0
        return [d[0].abs(), 0.0, 3f64.sqrt() * f2.abs(), f3.abs()];
    }
    let b = f1 / r;
    let beta = (f2 - b) / r;
    [
        d[0].abs(),
        f1.abs(),
        (f2 * f2 + 2.0 * b * b).sqrt(),
        (f3 * f3 + 6.0 * beta * beta).sqrt(),
    ]
}

#[derive(Clone, Debug)]
pub struct Autocorrelation {
    kind: AutoKind,
    at_zero: f64,
    /// `∫ |∇ρ|²`, the curvature of `A` at the origin.
    grad_rho_sq: f64,
    taylor_below: f64,
}

#[derive(Clone, Debug)]
enum AutoKind {
    /// `A(s) = amp · exp(−s² / width)`.
    Gaussian { amp: f64, width: f64 },
    /// Cumulative `Q(t) = ∫₀^t ρ(τ) τ dτ` tabulated for the general formula
    /// `A(s) = (2π/s) ∫ ρ(r) r [Q(r+s) − Q(|r−s|)] dr`.
    Numeric { profile: RadialProfile, q: MonotoneCubic, extent: f64 },
}

impl Autocorrelation {
    fn new(p: &RadialProfile) -> Result<Self> {
        let rho_sq = p.lp_power(4.0)?;
        let grad_rho_sq = p.radial_integral(|r| {
            let d = p.derivatives(r);
            (2.0 * d[0] * d[1]).powi(2)
        })?;
        if let ProfileShape::Gaussian { width } = p.shape {
            let w = width * p.dilation * p.dilation;
            return Ok(Self {
                kind: AutoKind::Gaussian { amp: rho_sq, width: w },
                at_zero: rho_sq,
                grad_rho_sq,
                taylor_below: 0.0,
            });
        }
        let extent = p.extent();
        let n = 8000;
        let h = extent / n as f64;
        // Q(∞) = 1/(4π); cells where ρ is negligible only need absolute accuracy
        let q = Quadrature {
            rel_tol: 1e-12,
            abs_floor: 1e-20,
        };
        let mut xs = Vec::with_capacity(n + 1);
        let mut qs = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        xs.push(0.0);
        qs.push(0.0);
        for i in 0..n {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            acc += q.integrate(|t| p.value(t).powi(2) * t, a, b)?;
            xs.push(b);
            qs.push(acc);
        }
        let slopes: Vec<f64> = xs.iter().map(|&t| p.value(t).powi(2) * t).collect();
        let table = MonotoneCubic::with_slopes(xs, qs, slopes)?;
        Ok(Self {
            kind: AutoKind::Numeric {
                profile: *p,
                q: table,
                extent,
            },
            at_zero: rho_sq,
            grad_rho_sq,
            taylor_below: 1e-3 * extent,
        })
    }

    /// `A(0) = ‖φ‖₄⁴`.
    pub fn at_zero(&self) -> f64 {
        self.at_zero
    }

    pub fn grad_rho_sq(&self) -> f64 {
        self.grad_rho_sq
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        let s = s.abs();
        match &self.kind {
            AutoKind::Gaussian { amp, width } => Ok(amp * (-s * s / width).exp()),
            AutoKind::Numeric { profile, q, extent } => {
                if s < self.taylor_below {
                    return Ok(self.at_zero - s * s / 6.0 * self.grad_rho_sq);
                }
                if s >= 2.0 * extent {
                    return Ok(0.0);
                }
                let cum = |t: f64| if t >= *extent { q.eval(*extent) } else { q.eval(t) };
                let quad = Quadrature {
                    rel_tol: 1e-11,
                    abs_floor: 1e-16 * self.at_zero * s,
                };
                let mut breaks = vec![0.0, s.min(*extent), *extent];
                breaks.dedup();
                let v = quad.integrate_pieces(
                    |r| profile.value(r).powi(2) * r * (cum(r + s) - cum((r - s).abs())),
                    &breaks,
                )?;
                Ok(2.0 * PI / s * v)
            }
        }
    }
}

/// A normalized, smooth condensate orbital with its norm bundle.
#[derive(Clone, Debug, Serialize)]
pub struct InitialOrbital {
    pub profile: RadialProfile,
    /// Polynomial decay exponent (> 3) used in the weighted sup norm.
    pub alpha: f64,
    pub norms: OrbitalNorms,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OrbitalNorms {
    pub l2: f64,
    pub l4: f64,
    pub grad_l2: f64,
    /// `Σ_{m ≤ 4} sup ⟨r⟩^α |∂_r^m φ|`, sampled.
    pub weighted_sup: f64,
}

impl InitialOrbital {
    pub fn new(shape: ProfileShape, alpha: f64) -> Result<Self> {
        if !(alpha > 3.0) {
            return Err(Error::validation("orbital.alpha", "decay exponent must exceed 3"));
        }
        if !shape.is_smooth() {
            return Err(Error::validation(
                "orbital.profile",
                "the orbital must be smooth at the origin; the exponential profile has a cusp",
            ));
        }
        let profile = RadialProfile::normalized(shape)?;
        let l2 = profile.lp_power(2.0)?.sqrt();
        let l4 = profile.lp_power(4.0)?.powf(0.25);
        let grad_l2 = profile.grad_l2_sq()?.sqrt();
        let ext = profile.extent();
        let mut sups = [0.0f64; 5];
        for i in 0..=4000 {
            let r = ext * i as f64 / 4000.0;
            let weight = (1.0 + r * r).powf(alpha / 2.0);
            for (s, d) in sups.iter_mut().zip(profile.derivatives(r)) {
                *s = s.max(weight * d.abs());
            }
        }
        Ok(Self {
            profile,
            alpha,
            norms: OrbitalNorms {
                l2,
                l4,
                grad_l2,
                weighted_sup: sups.iter().sum(),
            },
        })
    }

    pub fn gaussian(width: f64) -> Result<Self> {
        Self::new(ProfileShape::Gaussian { width }, 4.0)
    }
}
