//! Time evolution for `i∂_tψ = μ(−Δ + ½V)ψ`.
//!
//! A single mass coefficient `μ` fixes both the kinetic and the potential
//! weight, so the two Hamiltonians in play cannot be mixed up:
//!
//! * relative motion of a pair, `𝔥 = −2Δ + V`, is `μ = 2`;
//! * one body, `h = −Δ + ½V`, is `μ = 1`.
//!
//! `e^{−i𝔥t} = e^{−ih(2t)}`, which [`Dynamics::equivalent_time`] encodes.

mod cartesian;
mod checkpoint;
mod crank_nicolson;
mod moller;
mod spectral;
mod weighted;

pub use cartesian::{evolve_cartesian, CartesianField, CartesianReport};
pub(crate) use cartesian::Fft3;
pub(crate) use spectral::{odd_extend, wavenumbers};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use crank_nicolson::{
    evolve_radial, evolve_radial_with, well_balanced_potential, Absorber, CrankNicolson, EvolveOptions,
    EvolveReport, Evolved, PotentialMode,
};
pub use moller::{moller_transform, MollerDirection, MollerResult};
pub use spectral::{evolve_free, FreeEvolution};
pub use weighted::{direct_weighted_norm, evolve_weighted, evolve_weighted_direct, weighted_norm};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

pub(crate) const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Mass coefficient `μ` of `μ(−Δ + ½V)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dynamics {
    pub mu: f64,
}

impl Dynamics {
    /// `𝔥 = −2Δ + V`.
    pub const RELATIVE: Dynamics = Dynamics { mu: 2.0 };
    /// `h = −Δ + ½V`.
    pub const ONE_BODY: Dynamics = Dynamics { mu: 1.0 };

    pub fn new(mu: f64) -> Result<Self> {
        if mu > 0.0 && mu.is_finite() {
            Ok(Self { mu })
        } else {
            Err(Error::validation("mu", format!("{mu} must be positive")))
        }
    }

    /// Weight of `V` in the Hamiltonian: `μ/2`.
    pub fn potential_weight(&self) -> f64 {
        0.5 * self.mu
    }

    /// Time under `h` (`μ = 1`) that equals time `t` under this `μ`.
    pub fn equivalent_time(&self, t: f64) -> f64 {
        self.mu * t
    }
}

/// Complex radial samples `ψ(r_i)` with the mass coefficient they evolve with.
#[derive(Clone, Debug)]
pub struct RadialField {
    grid: RadialGrid,
    samples: Vec<Complex64>,
    mu: f64,
    initial_norm: f64,
    /// Start of the absorbing layer used by the last evolution, if any.
    absorber_start: Option<f64>,
    time: f64,
}

impl RadialField {
    pub fn new(grid: RadialGrid, samples: Vec<Complex64>, mu: f64) -> Result<Self> {
        Dynamics::new(mu)?;
        if samples.len() != grid.len() {
            return Err(Error::validation(
                "field",
                format!("{} samples for a grid of {} nodes", samples.len(), grid.len()),
            ));
        }
        crate::error::ensure_finite(&samples, "field construction")?;
        let mut f = Self {
            grid,
            samples,
            mu,
            initial_norm: 0.0,
            absorber_start: None,
            time: 0.0,
        };
        f.initial_norm = f.norm();
        Ok(f)
    }

    pub fn from_real(grid: RadialGrid, values: &[f64], mu: f64) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), mu)
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: RadialGrid, f: F, mu: f64) -> Result<Self> {
        let samples = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, samples, mu)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dynamics(&self) -> Dynamics {
        Dynamics { mu: self.mu }
    }

    /// Norm recorded when the field (or its ancestor) was constructed.
    pub fn initial_norm(&self) -> f64 {
        self.initial_norm
    }

    pub fn absorber_start(&self) -> Option<f64> {
        self.absorber_start
    }

    /// Elapsed evolution time.
    pub fn time(&self) -> f64 {
        self.time
    }

    /// `(4π ∫ |ψ|² r² dr)^{1/2}` by the trapezoid rule.
    pub fn norm(&self) -> f64 {
        let w = self.grid.weights();
        let r = self.grid.nodes();
        let s: f64 = (0..self.samples.len())
            .map(|i| w[i] * self.samples[i].norm_sqr() * r[i] * r[i])
            .sum();
        (FOUR_PI * s).sqrt()
    }

    /// `u = r ψ`.
    pub fn u(&self) -> Vec<Complex64> {
        self.grid
            .nodes()
            .iter()
            .zip(&self.samples)
            .map(|(r, z)| z * *r)
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// New field on the same grid with the given samples, keeping metadata.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != self.grid.len() {
            return Err(Error::validation("field", "sample count mismatch"));
        }
        Ok(Self {
            samples,
            ..self.clone()
        })
    }

    /// Pointwise product with a real function sampled on the grid.
    pub fn multiplied(&self, factor: &[f64]) -> Result<Self> {
        if factor.len() != self.grid.len() {
            return Err(Error::validation("field", "factor length mismatch"));
        }
        let s = self.samples.iter().zip(factor).map(|(z, f)| z * *f).collect();
        let mut out = Self::new(self.grid.clone(), s, self.mu)?;
        out.time = self.time;
        Ok(out)
    }

    pub fn difference_norm(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::validation("field", "fields live on different grids"));
        }
        let d: Vec<Complex64> = self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect();
        Ok(self.with_samples(d)?.norm())
    }

    /// Field rebuilt from `u = rψ`, with `ψ(0)` extrapolated in `r²` from the
/// next four nodes.
    pub(crate) fn from_u(&self, u: &[Complex64], elapsed: f64, absorber_start: Option<f64>) -> Self {
        let r = self.grid.nodes();
        let n = r.len();
        let mut psi = vec![Complex64::new(0.0, 0.0); n];
        for i in 1..n {
            psi[i] = u[i] / r[i];
        }
        psi[0] = extrapolate_to_origin(&r[1..n.min(5)], &psi[1..n.min(5)]);
        Self {
            grid: self.grid.clone(),
            samples: psi,
            mu: self.mu,
            initial_norm: self.initial_norm,
            absorber_start,
            time: self.time + elapsed,
        }
    }
}

/// Lagrange extrapolation to `r = 0` in the variable `r²`, exact for even
/// polynomials of degree `2(k−1)` on `k` nodes.
fn extrapolate_to_origin(r: &[f64], psi: &[Complex64]) -> Complex64 {
    let s: Vec<f64> = r.iter().map(|x| x * x).collect();
    let mut out = Complex64::new(0.0, 0.0);
    for j in 0..s.len() {
        let mut w = 1.0;
        for m in 0..s.len() {
            if m != j {
                w *= s[m] / (s[m] - s[j]);
            }
        }
        out += psi[j] * w;
    }
    out
}

/// Number of steps and effective step for evolving over `t`: `dt` is
/// shortened so that an integer number of steps lands exactly on `t`.
pub(crate) fn step_plan(t: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::validation("dt", format!("{dt} must be positive")));
    }
    if !t.is_finite() {
        return Err(Error::validation("T", "must be finite"));
    }
    if t == 0.0 {
        return Ok((0, 0.0));
    }
    let steps = ((t.abs() / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, t / steps as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_plan_lands_on_t() {
        assert_eq!(step_plan(0.0, 0.1).unwrap(), (0, 0.0));
        let (n, h) = step_plan(1.0, 0.3).unwrap();
        assert_eq!(n, 4);
        assert!((h * 4.0 - 1.0).abs() < 1e-15);
        let (n, h) = step_plan(0.05, 0.1).unwrap();
        assert_eq!((n, h), (1, 0.05));
        let (n, h) = step_plan(-1.0, 0.5).unwrap();
        assert_eq!((n, h), (2, -0.5));
        assert!(step_plan(1.0, 0.0).is_err());
    }

    #[test]
    fn conventions_are_consistent() {
        assert_eq!(Dynamics::RELATIVE.potential_weight(), 1.0);
        assert_eq!(Dynamics::ONE_BODY.potential_weight(), 0.5);
        assert_eq!(Dynamics::RELATIVE.equivalent_time(3.0), 6.0);
    }

    #[test]
    fn norm_of_gaussian() {
        let g = RadialGrid::uniform(0.01, 12.0).unwrap();
        let f = RadialField::from_fn(g, |r| Complex64::new((-r * r / 2.0).exp(), 0.0), 1.0).unwrap();
        // ∫ e^{−r²} d³x = π^{3/2}
        assert!((f.norm().powi(2) - std::f64::consts::PI.powf(1.5)).abs() < 1e-8);
        let u = f.u();
        let back = f.from_u(&u, 0.0, None);
        for (a, b) in back.samples().iter().zip(f.samples()).skip(1) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!((back.samples()[0] - f.samples()[0]).norm() < 1e-8);
    }
}
