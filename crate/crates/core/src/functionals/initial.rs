//! `F_N(0) = ∬ θ_ℓ(x₁−x₂) |φ(x₁)φ(x₂)|² [ω_N/(1−ω_N)]²(x₁−x₂) dx₁dx₂` for
//! a factorized state, and its `Nℓ → ∞` constant `4πa²‖χ‖₁‖φ‖₄⁴`.
//!
//! With `A(y) = ∫|φ(x)|²|φ(x+y)|² dx` the double integral is the radial
//! integral `4π ∫ χ(r/ℓ) [ω_N/(1−ω_N)]² A(r) r² dr`. Replacing `A(r)` by
//! `A(0) = ‖φ‖₄⁴` gives the separable approximation; since `A` is positive
//! definite, `0 ≤ A(0) − A(r) ≤ r²/6 · ‖∇|φ|²‖₂²` bounds the difference.

use serde::Serialize;

use super::CutoffChi;
use crate::error::{Error, Result};
use crate::orbital::InitialOrbital;
use crate::quad::Quadrature;
use crate::scattering::ScatteringSolution;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FnInitial {
    pub n: u64,
    pub ell: f64,
    /// Double integral, through the autocorrelation.
    pub value: f64,
    /// `A(0) · 4π ∫ χ(r/ℓ) [ω_N/(1−ω_N)]² r² dr`.
    pub separable: f64,
    /// Upper bound on `separable − value`.
    pub correction_bound: f64,
    /// `4π a² ‖χ‖₁ ‖φ‖₄⁴`.
    pub asymptotic_constant: f64,
    /// `(N²/ℓ) · value`, which tends to `asymptotic_constant`.
    pub scaled: f64,
}

impl FnInitial {
    pub fn relative_gap(&self) -> f64 {
        if self.asymptotic_constant == 0.0 {
            return self.scaled.abs();
        }
        (self.scaled / self.asymptotic_constant - 1.0).abs()
    }
}

pub fn fn_initial(orbital: &InitialOrbital, sol: &ScatteringSolution, n: u64, ell: f64, chi: &CutoffChi) -> Result<FnInitial> {
    if n == 0 {
        return Err(Error::validation("N", "must be at least 1"));
    }
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::validation("ell", format!("{ell} must be positive")));
    }
    let nf = n as f64;
    if nf * ell < 1.0 {
        return Err(Error::OutOfRegime(format!("N·ℓ = {} < 1 (need ℓ ≥ 1/N)", nf * ell)));
    }
    let auto = orbital.profile.autocorrelation()?;
    let a0 = auto.at_zero();
    let kernel = |r: f64| {
        let w = sol.omega_at(n, r);
        let ratio = w / (1.0 - w);
        chi.theta(r, ell) * ratio * ratio * r * r
    };
    let edge = chi.support(ell);
    let support = sol.support_radius() / nf;
    let mut breaks = vec![0.0];
    if support < edge {
        breaks.push(support);
    }
    // the kernel tends to a constant beyond the support, with a 1/r
    // correction: split geometrically so every piece is well scaled
    let mut x = breaks[breaks.len() - 1].max(edge * 1e-6);
    while x * 4.0 < ell {
        x *= 4.0;
        breaks.push(x);
    }
    breaks.extend([ell, edge]);
    breaks.dedup();
    let q = Quadrature {
        rel_tol: 1e-11,
        abs_floor: 0.0,
    };
    let plain = FOUR_PI * q.integrate_pieces(kernel, &breaks)?;
    let failure = std::cell::RefCell::new(None);
    let exact = FOUR_PI
        * q.integrate_pieces(
            |r| match auto.eval(r) {
                Ok(v) => kernel(r) * v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            &breaks,
        )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let curvature = auto.grad_rho_sq() / 6.0;
    let bound = FOUR_PI * curvature * q.integrate_pieces(|r| kernel(r) * r * r, &breaks)?;
    let a = sol.a();
    let asymptotic_constant = FOUR_PI * a * a * chi.l1_mass * a0;
    Ok(FnInitial {
        n,
        ell,
        value: exact,
        separable: a0 * plain,
        correction_bound: bound,
        asymptotic_constant,
        scaled: nf * nf / ell * exact,
    })
}
