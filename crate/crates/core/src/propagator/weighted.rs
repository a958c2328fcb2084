//! The weighted Laplacian `ℒ = −Δ + 2(∇ω/(1−ω))·∇`, self-adjoint on
//! `L²((1−ω)² dx)`, and its evolution `e^{−2iℒT}`.
//!
//! Since `𝔥[(1−ω)φ] = 2(1−ω)ℒφ` for `𝔥 = −2Δ + V`, the evolution is
//! computed by conjugation: `e^{−2iℒT}φ = (1−ω)⁻¹ e^{−i𝔥T} (1−ω)φ`.

use num_complex::Complex64;

use super::crank_nicolson::{evolve_radial_with, EvolveOptions, PotentialMode};
use super::{step_plan, Dynamics, RadialField, FOUR_PI};
use crate::error::{ensure_finite, Error, Result};
use crate::potential::PotentialSpec;
use crate::scattering::ScatteringSolution;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn require_relative(field: &RadialField) -> Result<()> {
    if field.mu() == Dynamics::RELATIVE.mu {
        Ok(())
    } else {
        Err(Error::validation(
            "mu",
            format!("weighted evolution acts on relative-coordinate fields (mu = 2), got {}", field.mu()),
        ))
    }
}

/// `‖φ‖_• = (4π ∫ |φ|² (1−ω)² r² dr)^{1/2}`.
pub fn weighted_norm(field: &RadialField, sol: &ScatteringSolution) -> f64 {
    let weight = sol_weight(field, sol);
    field.multiplied(&weight).map(|f| f.norm()).unwrap_or(f64::NAN)
}

fn sol_weight(field: &RadialField, sol: &ScatteringSolution) -> Vec<f64> {
    field.grid().nodes().iter().map(|&r| sol.regular_at(1, r)).collect()
}

/// Conjugation route, with the discrete potential for which `1 − ω` is
/// stationary and no absorbing layer (the weighted norm is conserved).
pub fn evolve_weighted(
    field: &RadialField,
    sol: &ScatteringSolution,
    spec: &PotentialSpec,
    t: f64,
    dt: f64,
) -> Result<RadialField> {
    sol.ensure_matches(spec)?;
    require_relative(field)?;
    let weight = sol_weight(field, sol);
    let lifted = field.multiplied(&weight)?;
    let opts = EvolveOptions {
        absorber: None,
        mode: PotentialMode::WellBalanced { solution: sol, n: 1 },
        ..EvolveOptions::default()
    };
    let evolved = evolve_radial_with(&lifted, spec, t, dt, &opts)?.field;
    let inv: Vec<f64> = weight.iter().map(|w| 1.0 / w).collect();
    let mut out = evolved.multiplied(&inv)?;
    out.initial_norm = field.initial_norm;
    Ok(out)
}

/// Direct Crank–Nicolson discretization of `2ℒ` in flux form,
/// `(2ℒφ)_i = −(2/W_i)[P_{i+½}(φ_{i+1}−φ_i)/h₂ − P_{i−½}(φ_i−φ_{i−1})/h₁]`
/// with `P = (1−ω)² r²` at cell faces and `W_i = (1−ω_i)²·|cell_i|`.
/// Independent of the conjugation identity; used to cross-check it.
pub fn evolve_weighted_direct(field: &RadialField, sol: &ScatteringSolution, t: f64, dt: f64) -> Result<RadialField> {
    require_relative(field)?;
    let r = field.grid().nodes();
    let n = r.len();
    let reg = |x: f64| sol.regular_at(1, x);
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 0..n - 1 {
        let left = if i == 0 { 0.0 } else { 0.5 * (r[i - 1] + r[i]) };
        let right = 0.5 * (r[i] + r[i + 1]);
        let vol = (right.powi(3) - left.powi(3)) / 3.0;
        let w = reg(r[i]).powi(2) * vol;
        let p_right = reg(right).powi(2) * right * right / (r[i + 1] - r[i]);
        let p_left = if i == 0 {
            0.0
        } else {
            reg(left).powi(2) * left * left / (r[i] - r[i - 1])
        };
        lower[i] = -2.0 * p_left / w;
        upper[i] = -2.0 * p_right / w;
        diag[i] = 2.0 * (p_left + p_right) / w;
    }
    let (steps, h) = step_plan(t, dt)?;
    let mut phi: Vec<Complex64> = field.samples().to_vec();
    phi[n - 1] = ZERO;
    if steps > 0 {
        let half = Complex64::new(0.0, 0.5 * h);
        let one = Complex64::new(1.0, 0.0);
        // factorize (I + i h/2 K) over unknowns 0..n-2
        let m = n - 1;
        let mut cp = vec![ZERO; m];
        let mut inv = vec![ZERO; m];
        for i in 0..m {
            let b = one + half * diag[i];
            let a = half * lower[i];
            let denom = if i == 0 { b } else { b - a * cp[i - 1] };
            inv[i] = denom.inv();
            cp[i] = half * upper[i] * inv[i];
        }
        let mut rhs = vec![ZERO; m];
        for _ in 0..steps {
            for i in 0..m {
                let mut v = (one - half * diag[i]) * phi[i] - half * upper[i] * phi[i + 1];
                if i > 0 {
                    v -= half * lower[i] * phi[i - 1];
                }
                rhs[i] = v;
            }
            for i in 0..m {
                let v = if i == 0 { rhs[0] } else { rhs[i] - half * lower[i] * rhs[i - 1] };
                rhs[i] = v * inv[i];
            }
            phi[m - 1] = rhs[m - 1];
            for i in (0..m - 1).rev() {
                phi[i] = rhs[i] - cp[i] * phi[i + 1];
            }
            phi[n - 1] = ZERO;
        }
    }
    ensure_finite(&phi, "weighted evolution")?;
    let mut out = field.with_samples(phi)?;
    out.time = field.time() + t;
    Ok(out)
}

/// Discrete weighted norm of the direct scheme, `Σ W_i |φ_i|²` (times 4π).
pub fn direct_weighted_norm(field: &RadialField, sol: &ScatteringSolution) -> f64 {
    let r = field.grid().nodes();
    let n = r.len();
    let mut s = 0.0;
    for i in 0..n - 1 {
        let left = if i == 0 { 0.0 } else { 0.5 * (r[i - 1] + r[i]) };
        let right = 0.5 * (r[i] + r[i + 1]);
        let vol = (right.powi(3) - left.powi(3)) / 3.0;
        s += sol.regular_at(1, r[i]).powi(2) * vol * field.samples()[i].norm_sqr();
    }
    (FOUR_PI * s).sqrt()
}
