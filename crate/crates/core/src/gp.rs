//! Radial Gross–Pitaevskii dynamics `i∂_tφ = −Δφ + g|φ|²φ` by Strang
//! splitting, and the comparison of the couplings `g = 8πa` and `g = b`.
//!
//! The kinetic factor is exact on the odd extension of `u = rφ`; the
//! nonlinear factor is a pointwise phase. Both preserve `Σ|u_i|²`, so the
//! discrete mass is conserved up to rounding.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use std::sync::Arc;

use crate::error::{ensure_finite, Error, Result};
use crate::functionals::coupling_constants;
use crate::grid::RadialGrid;
use crate::orbital::InitialOrbital;
use crate::potential::PotentialSpec;
use crate::propagator::{odd_extend, wavenumbers, CartesianField, Dynamics, Fft3, RadialField};
use crate::scattering::ScatteringSolution;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Largest admissible `dt · g · sup|φ|²`.
pub const PHASE_STEP_LIMIT: f64 = 0.1;

/// Mass tolerance for "normalized" initial data.
const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct CondensateField {
    pub field: RadialField,
    pub g: f64,
}

impl CondensateField {
    /// The orbital sampled on a uniform grid.
    pub fn from_orbital(orbital: &InitialOrbital, grid: RadialGrid, g: f64) -> Result<Self> {
        let values = orbital.profile.sample(&grid);
        Self::new(RadialField::from_real(grid, &values, Dynamics::ONE_BODY.mu)?, g)
    }

    pub fn new(field: RadialField, g: f64) -> Result<Self> {
        if field.grid().uniform_step().is_none() {
            return Err(Error::validation("grid", "condensates live on uniform grids"));
        }
        if field.mu() != Dynamics::ONE_BODY.mu {
            return Err(Error::validation("mu", "the condensate evolves under −Δ (mu = 1)"));
        }
        if !g.is_finite() {
            return Err(Error::validation("g", "coupling must be finite"));
        }
        Ok(Self { field, g })
    }

    pub fn time(&self) -> f64 {
        self.field.time()
    }

    /// `4π ∫ |φ|² r² dr`.
    pub fn mass(&self) -> f64 {
        let h = self.step();
        FOUR_PI * h * self.field.u().iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn energy(&self) -> f64 {
        gp_energy(self)
    }

    fn step(&self) -> f64 {
        self.field.grid().uniform_step().unwrap_or(0.0)
    }
}

/// `‖∇φ‖² + (g/2)‖φ‖₄⁴`; the kinetic part is evaluated spectrally, matching
/// the generator of the kinetic step.
pub fn gp_energy(c: &CondensateField) -> f64 {
    let h = c.step();
    let u = c.field.u();
    let r = c.field.grid().nodes();
    let mut ext = odd_extend(&u);
    let m = ext.len();
    FftPlanner::<f64>::new().plan_fft_forward(m).process(&mut ext);
    let k = wavenumbers(m, h);
    let kinetic = FOUR_PI * h / (2.0 * m as f64) * ext.iter().zip(&k).map(|(z, kk)| kk * kk * z.norm_sqr()).sum::<f64>();
    let quartic = FOUR_PI * h * (1..u.len()).map(|i| u[i].norm_sqr().powi(2) / (r[i] * r[i])).sum::<f64>();
    kinetic + 0.5 * c.g * quartic
}

/// Split-step propagator on the odd extension.
struct SplitStep {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kinetic: Vec<Complex64>,
    inv_r2: Vec<f64>,
}

impl SplitStep {
    fn new(grid: &RadialGrid, h: f64, dt: f64) -> Self {
        let n = grid.len();
        let m = 2 * (n - 1);
        let mut planner = FftPlanner::new();
        let scale = 1.0 / m as f64;
        let kinetic = wavenumbers(m, h).iter().map(|k| Complex64::from_polar(scale, -k * k * dt)).collect();
        let inv_r2 = grid.nodes().iter().map(|&x| if x > 0.0 { 1.0 / (x * x) } else { 0.0 }).collect();
        Self {
            n,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            kinetic,
            inv_r2,
        }
    }

    /// `u ← e^{−ig|φ|²τ} u` on both halves of the extension.
    fn phase(&self, ext: &mut [Complex64], g: f64, tau: f64) {
        let m = ext.len();
        for i in 1..self.n - 1 {
            let rot = Complex64::from_polar(1.0, -g * ext[i].norm_sqr() * self.inv_r2[i] * tau);
            ext[i] *= rot;
            ext[m - i] *= rot;
        }
    }

    fn kinetic(&self, ext: &mut [Complex64]) {
        self.forward.process(ext);
        for (z, k) in ext.iter_mut().zip(&self.kinetic) {
            *z *= k;
        }
        self.inverse.process(ext);
    }
}

fn check_phase_step(c: &CondensateField, dt: f64) -> Result<f64> {
    let sup2 = c.field.sup_norm().powi(2);
    if dt * c.g.abs() * sup2 > PHASE_STEP_LIMIT {
        return Err(Error::validation(
            "dt",
            format!("dt·g·sup|φ|² = {:.3e} exceeds {PHASE_STEP_LIMIT}", dt * c.g.abs() * sup2),
        ));
    }
    Ok(sup2.sqrt())
}

/// Evolves a normalized condensate by `t` in steps of at most `dt`.
/// Consecutive calls compose exactly: the half phases at the segment ends
/// combine to the full phase of an uninterrupted run.
pub fn evolve_gp(initial: &CondensateField, t: f64, dt: f64) -> Result<CondensateField> {
    let mass = initial.mass();
    if (mass - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::validation("orbital", format!("mass {mass} is not 1")));
    }
    let (steps, tau) = crate::propagator::step_plan(t, dt)?;
    if steps == 0 {
        return Ok(initial.clone());
    }
    let sup0 = check_phase_step(initial, tau)?;
    let plan = SplitStep::new(initial.field.grid(), initial.step(), tau);
    let n = plan.n;
    let mut ext = odd_extend(&initial.field.u());
    plan.phase(&mut ext, initial.g, 0.5 * tau);
    for step in 1..=steps {
        plan.kinetic(&mut ext);
        plan.phase(&mut ext, initial.g, if step == steps { 0.5 * tau } else { tau });
        if step % 64 == 0 || step == steps {
            ensure_finite(&ext, "Gross-Pitaevskii evolution")?;
            let sup = (1..n - 1).map(|i| ext[i].norm() * plan.inv_r2[i].sqrt()).fold(0.0, f64::max);
            if sup > 2.0 * sup0 {
                return Err(Error::Numerical(format!(
                    "sup|φ| doubled (from {sup0:.4e} to {sup:.4e}): the flow is unstable for this configuration"
                )));
            }
        }
    }
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    u[1..n - 1].copy_from_slice(&ext[1..n - 1]);
    Ok(CondensateField {
        field: initial.field.from_u(&u, initial.time() + steps as f64 * tau, None),
        g: initial.g,
    })
}

/// `⟨a, b⟩ = 4π ∫ ā b r² dr` on a shared uniform grid.
fn inner(a: &CondensateField, b: &CondensateField) -> Complex64 {
    let h = a.step();
    let s: Complex64 = a.field.u().iter().zip(b.field.u()).map(|(x, y)| x.conj() * y).sum();
    s * (FOUR_PI * h)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DivergenceSample {
    pub t: f64,
    pub mass_a: f64,
    pub mass_b: f64,
    pub energy_a: f64,
    pub energy_b: f64,
    /// `‖φ^{(8πa)} − φ^{(b)}‖₂`.
    pub divergence: f64,
    /// `min_θ ‖φ^{(8πa)} − e^{iθ}φ^{(b)}‖₂`: the divergence modulo a global
    /// phase.
    pub aligned: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingComparison {
    pub eight_pi_a: f64,
    pub b: f64,
    pub samples: Vec<DivergenceSample>,
    /// `(b − 8πa)‖|φ₀|²φ₀‖₂`: first-order slope of `divergence`.
    pub oracle_slope: f64,
    /// `(b − 8πa)‖P^⊥|φ₀|²φ₀‖₂` with `P^⊥` projecting off `φ₀`: first-order
    /// slope of `aligned`.
    pub oracle_aligned_slope: f64,
}

impl CouplingComparison {
    /// Least-squares slopes through the origin of `(divergence, aligned)`
    /// over the samples with `0 < t ≤ until`.
    pub fn initial_slopes(&self, until: f64) -> Result<(f64, f64)> {
        let pts: Vec<&DivergenceSample> = self.samples.iter().filter(|s| s.t > 0.0 && s.t <= until).collect();
        if pts.len() < 3 {
            return Err(Error::validation("window", format!("{} samples in (0, {until}], need 3", pts.len())));
        }
        let tt: f64 = pts.iter().map(|s| s.t * s.t).sum();
        let fit = |f: fn(&DivergenceSample) -> f64| pts.iter().map(|s| s.t * f(s)).sum::<f64>() / tt;
        Ok((fit(|s| s.divergence), fit(|s| s.aligned)))
    }

    pub fn max_mass_drift(&self) -> f64 {
        let first = &self.samples[0];
        self.samples
            .iter()
            .map(|s| (s.mass_a - first.mass_a).abs().max((s.mass_b - first.mass_b).abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_relative_energy_drift(&self) -> f64 {
        let first = &self.samples[0];
        let rel = |e: f64, e0: f64| if e0 != 0.0 { ((e - e0) / e0).abs() } else { e.abs() };
        self.samples
            .iter()
            .map(|s| rel(s.energy_a, first.energy_a).max(rel(s.energy_b, first.energy_b)))
            .fold(0.0, f64::max)
    }
}

/// Twin trajectories from the same orbital with `g = 8πa` and `g = b`,
/// sampled at `times` (nondecreasing, starting anywhere ≥ 0).
pub fn coupling_comparison(
    orbital: &InitialOrbital,
    grid: RadialGrid,
    spec: &PotentialSpec,
    sol: &ScatteringSolution,
    times: &[f64],
    dt: f64,
) -> Result<CouplingComparison> {
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::validation("T", "times must be nonempty, nonnegative and nondecreasing"));
    }
    let c = coupling_constants(spec, sol)?;
    let start_a = CondensateField::from_orbital(orbital, grid, c.eight_pi_a)?;
    let start_b = CondensateField { g: c.b, ..start_a.clone() };
    let run = |start: CondensateField| -> Result<Vec<CondensateField>> {
        let mut out = Vec::with_capacity(times.len());
        let mut state = start;
        let mut now = 0.0;
        for &t in times {
            if t > now {
                state = evolve_gp(&state, t - now, dt)?;
                now = t;
            }
            out.push(state.clone());
        }
        Ok(out)
    };
    let (a, b) = rayon::join(|| run(start_a.clone()), || run(start_b));
    let (a, b) = (a?, b?);
    let samples = times
        .iter()
        .zip(a.iter().zip(&b))
        .map(|(&t, (x, y))| {
            let (na, nb) = (x.mass(), y.mass());
            let overlap = inner(x, y);
            DivergenceSample {
                t,
                mass_a: na,
                mass_b: nb,
                energy_a: x.energy(),
                energy_b: y.energy(),
                divergence: (na + nb - 2.0 * overlap.re).max(0.0).sqrt(),
                aligned: (na + nb - 2.0 * overlap.norm()).max(0.0).sqrt(),
            }
        })
        .collect();
    let (oracle, projected) = first_order_oracle(&start_a);
    Ok(CouplingComparison {
        eight_pi_a: c.eight_pi_a,
        b: c.b,
        samples,
        oracle_slope: (c.b - c.eight_pi_a) * oracle,
        oracle_aligned_slope: (c.b - c.eight_pi_a) * projected,
    })
}

/// `(‖|φ|²φ‖₂, ‖P^⊥|φ|²φ‖₂)` by quadrature on the grid of `phi`.
fn first_order_oracle(phi: &CondensateField) -> (f64, f64) {
    let r = phi.field.grid().nodes();
    let u = phi.field.u();
    let cubic: Vec<Complex64> = (0..u.len())
        .map(|i| if r[i] > 0.0 { u[i] * u[i].norm_sqr() / (r[i] * r[i]) } else { Complex64::new(0.0, 0.0) })
        .collect();
    let w = CondensateField {
        field: phi.field.from_u(&cubic, phi.time(), None),
        g: phi.g,
    };
    let norm2 = w.mass();
    let along = inner(phi, &w) / phi.mass();
    let projected = (norm2 - along.norm_sqr() * phi.mass()).max(0.0);
    (norm2.sqrt(), projected.sqrt())
}

/// The same Strang scheme on a periodic Cartesian grid.
pub fn evolve_gp_cartesian(field: &CartesianField, g: f64, t: f64, dt: f64) -> Result<CartesianField> {
    let (steps, tau) = crate::propagator::step_plan(t, dt)?;
    if steps == 0 {
        return Ok(field.clone());
    }
    let n = field.n();
    let h = field.spacing();
    let fft = Fft3::new(n);
    let k = wavenumbers(n, h);
    let scale = 1.0 / (n * n * n) as f64;
    let mut kinetic = Vec::with_capacity(n * n * n);
    for kz in &k {
        for ky in &k {
            for kx in &k {
                kinetic.push(Complex64::from_polar(scale, -field.mu() * (kx * kx + ky * ky + kz * kz) * tau));
            }
        }
    }
    let phase = |data: &mut [Complex64], tau: f64| {
        for z in data.iter_mut() {
            *z *= Complex64::from_polar(1.0, -g * z.norm_sqr() * tau);
        }
    };
    let mut data = field.samples().to_vec();
    phase(&mut data, 0.5 * tau);
    for step in 1..=steps {
        fft.transform(&mut data, false);
        for (z, m) in data.iter_mut().zip(&kinetic) {
            *z *= m;
        }
        fft.transform(&mut data, true);
        phase(&mut data, if step == steps { 0.5 * tau } else { tau });
    }
    ensure_finite(&data, "Gross-Pitaevskii evolution")?;
    CartesianField::new(n, field.side(), data, field.mu())
}
