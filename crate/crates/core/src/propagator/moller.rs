//! Finite-time approximants of the wave operator `Ω = s-lim e^{iht}e^{−iH₀t}`
//! for `h = −Δ + ½V` and `H₀ = −Δ`.
//!
//! Both factors use Crank–Nicolson on the caller's grid without absorption,
//! so the approximants are exactly unitary and their Cauchy defect measures
//! convergence in `t₀` rather than discretization mismatch.

use super::crank_nicolson::CrankNicolson;
use super::{Dynamics, RadialField};
use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MollerDirection {
    /// `Ωψ ≈ e^{iht₀} e^{−iH₀t₀} ψ`.
    Forward,
    /// `Ω*ψ ≈ e^{iH₀t₀} e^{−iht₀} ψ`.
    Adjoint,
}

#[derive(Clone, Debug)]
pub struct MollerResult {
    pub field: RadialField,
    /// `‖Ω_{t₀}ψ − Ω_{2t₀}ψ‖₂`.
    pub cauchy_defect: f64,
}

/// Default time step of the two Crank–Nicolson factors.
pub const MOLLER_DT: f64 = 0.02;

pub fn moller_transform(
    field: &RadialField,
    spec: &PotentialSpec,
    t0: f64,
    direction: MollerDirection,
) -> Result<MollerResult> {
    moller_transform_with(field, spec, t0, direction, MOLLER_DT)
}

pub fn moller_transform_with(
    field: &RadialField,
    spec: &PotentialSpec,
    t0: f64,
    direction: MollerDirection,
    dt: f64,
) -> Result<MollerResult> {
    if !(t0 > 0.0) {
        return Err(Error::validation("t0", "must be positive"));
    }
    if field.mu() != Dynamics::ONE_BODY.mu {
        return Err(Error::validation(
            "mu",
            "the wave operator is defined for h = -Δ + V/2 (mu = 1)",
        ));
    }
    let grid = field.grid();
    let v: Vec<f64> = grid.nodes().iter().map(|&r| spec.value(r)).collect();
    let h = CrankNicolson::new(grid, Dynamics::ONE_BODY, &v, None)?;
    let free = CrankNicolson::new(grid, Dynamics::ONE_BODY, &vec![0.0; grid.len()], None)?;
    let (first, second) = (&h, &free);
    let (a, b) = match direction {
        MollerDirection::Adjoint => (first, second),
        MollerDirection::Forward => (second, first),
    };
    // Adjoint: evolve under h forward, then H₀ backward.
    // Forward: evolve under H₀ forward, then h backward.
    let mut u1 = field.u();
    a.evolve_u(&mut u1, t0, dt)?;
    let mut u2 = u1.clone();
    a.evolve_u(&mut u2, t0, dt)?;
    b.evolve_u(&mut u1, -t0, dt)?;
    b.evolve_u(&mut u2, -2.0 * t0, dt)?;
    let f1 = field.from_u(&u1, 0.0, None);
    let f2 = field.from_u(&u2, 0.0, None);
    let cauchy_defect = f1.difference_norm(&f2)?;
    Ok(MollerResult {
        field: f1,
        cauchy_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{RadialGrid, StretchedLayout};
    use num_complex::Complex64;

    fn grid() -> RadialGrid {
        RadialGrid::stretched(StretchedLayout {
            fine_step: 0.02,
            fine_extent: 4.0,
            growth: 1.03,
            max_step: 0.25,
            r_max: 300.0,
        })
        .unwrap()
    }

    #[test]
    fn free_case_is_identity() {
        let f = RadialField::from_fn(grid(), |r| Complex64::new((-r * r / 25.0).exp(), 0.0), 1.0).unwrap();
        let zero = PotentialSpec::bump(0.0, 1.0).unwrap();
        let m = moller_transform(&f, &zero, 10.0, MollerDirection::Adjoint).unwrap();
        assert!(m.cauchy_defect < 1e-10);
        assert!(m.field.difference_norm(&f).unwrap() < 1e-10);
    }

    #[test]
    fn defect_shrinks_with_t0() {
        let f = RadialField::from_fn(grid(), |r| Complex64::new((-r * r / 25.0).exp(), 0.0), 1.0).unwrap();
        let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let d: Vec<f64> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&t| moller_transform_with(&f, &v, t, MollerDirection::Adjoint, 0.05).unwrap().cauchy_defect)
            .collect();
        assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
        // unitary
        let m = moller_transform_with(&f, &v, 10.0, MollerDirection::Adjoint, 0.05).unwrap();
        assert!((m.field.norm() / f.norm() - 1.0).abs() < 1e-10);
    }
}
