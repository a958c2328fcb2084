//! Energy moments of the factorized state `φ^{⊗N}` under
//! `H_N = Σ −Δ_j + Σ_{i<j} V_N(x_i − x_j)`, reduced to radial quadratures of
//! the potential against the density autocorrelation `A`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::orbital::InitialOrbital;
use crate::potential::{potential_norms, PotentialSpec};
use crate::quad::Quadrature;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HamiltonianMoments {
    pub n: u64,
    /// `⟨H_N⟩/N = ‖∇φ‖² + ((N−1)/2N) ∫ V(y) A(y/N) dy`.
    pub e1_per_n: f64,
    /// `‖∇φ‖² + ½‖V‖₁‖φ‖₄⁴`.
    pub e1_limit: f64,
    /// Leading part of `⟨H_N²⟩/N³`: `((N−1)/2N) ∫ V²(y) A(y/N) dy`.
    pub h2_leading_per_n3: f64,
    /// `½‖V‖₂²‖φ‖₄⁴`.
    pub h2_limit: f64,
}

impl HamiltonianMoments {
    pub fn e1_gap(&self) -> f64 {
        (self.e1_per_n - self.e1_limit).abs()
    }

    pub fn h2_relative_gap(&self) -> f64 {
        if self.h2_limit == 0.0 {
            return self.h2_leading_per_n3.abs();
        }
        (self.h2_leading_per_n3 / self.h2_limit - 1.0).abs()
    }
}

pub fn hamiltonian_moments(orbital: &InitialOrbital, spec: &PotentialSpec, n: u64) -> Result<HamiltonianMoments> {
    if n < 2 {
        return Err(Error::validation("N", "need at least two particles"));
    }
    let nf = n as f64;
    let kinetic = orbital.profile.grad_l2_sq()?;
    let auto = orbital.profile.autocorrelation()?;
    let a0 = auto.at_zero();
    let norms = potential_norms(spec)?;
    let pair = (nf - 1.0) / (2.0 * nf);
    let q = Quadrature::with_rel_tol(1e-12);
    let breaks = spec.breakpoints();
    let moment = |power: i32| -> Result<f64> {
        let failure = std::cell::RefCell::new(None);
        let v = q.integrate_pieces(
            |y| match auto.eval(y / nf) {
                Ok(a) => spec.value(y).powi(power) * a * y * y,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            &breaks,
        )?;
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(FOUR_PI * v),
        }
    };
    Ok(HamiltonianMoments {
        n,
        e1_per_n: kinetic + pair * moment(1)?,
        e1_limit: kinetic + 0.5 * norms.l1 * a0,
        h2_leading_per_n3: pair * moment(2)?,
        h2_limit: 0.5 * norms.l2 * norms.l2 * a0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_potential_is_pure_kinetic() {
        let phi = InitialOrbital::gaussian(2.0).unwrap();
        let m = hamiltonian_moments(&phi, &PotentialSpec::bump(0.0, 1.0).unwrap(), 10).unwrap();
        assert!((m.e1_per_n - 1.5).abs() < 1e-14);
        assert_eq!(m.h2_leading_per_n3, 0.0);
        assert_eq!(m.h2_limit, 0.0);
    }

    #[test]
    fn limits_and_rate() {
        let phi = InitialOrbital::gaussian(1.0).unwrap();
        let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let m = hamiltonian_moments(&phi, &v, 10_000).unwrap();
        assert!(m.e1_gap() < 0.01 * m.e1_limit);
        assert!(m.h2_relative_gap() < 0.02);
        let m2 = hamiltonian_moments(&phi, &v, 20_000).unwrap();
        let ratio = m.e1_gap() / m2.e1_gap();
        assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn rejects_single_particle() {
        let phi = InitialOrbital::gaussian(1.0).unwrap();
        assert!(hamiltonian_moments(&phi, &PotentialSpec::bump(1.0, 1.0).unwrap(), 1).is_err());
    }
}
