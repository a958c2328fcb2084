//! The Born coupling `b = ∫V` against the scattering coupling
//! `8πa = ∫V(1−ω)`; their difference `∫Vω` is nonnegative.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::scattering::ScatteringSolution;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Tolerance of the identity `b = 8πa + ∫Vω`.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CouplingConstants {
    pub b: f64,
    pub eight_pi_a: f64,
    /// `∫ V ω`.
    pub excess: f64,
    /// `|b − eight_pi_a − excess|`.
    pub consistency_residual: f64,
}

/// Five-point Gauss–Legendre nodes and weights on `[−1, 1]`.
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// `4π ∫ f(r) r² dr` over the support, cell by cell on the solution grid.
fn support_integral<F: Fn(f64) -> f64>(sol: &ScatteringSolution, f: F) -> f64 {
    let r = sol.grid().nodes();
    let edge = sol.support_radius();
    let mut total = 0.0;
    for w in r.windows(2) {
        if w[0] >= edge {
            break;
        }
        let (a, b) = (w[0], w[1].min(edge));
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, wt) in GL5 {
            let s = mid + half * x;
            total += wt * half * f(s) * s * s;
        }
    }
    FOUR_PI * total
}

pub fn coupling_constants(spec: &PotentialSpec, sol: &ScatteringSolution) -> Result<CouplingConstants> {
    sol.ensure_matches(spec)?;
    let b = support_integral(sol, |r| spec.value(r));
    let eight_pi_a = support_integral(sol, |r| spec.value(r) * sol.regular_at(1, r));
    let excess = support_integral(sol, |r| spec.value(r) * sol.omega_at(1, r));
    let consistency_residual = (b - eight_pi_a - excess).abs();
    if consistency_residual > CONSISTENCY_TOLERANCE * b.max(1.0) {
        return Err(Error::Numerical(format!(
            "b − 8πa − ∫Vω = {consistency_residual:e} exceeds {CONSISTENCY_TOLERANCE:e}"
        )));
    }
    Ok(CouplingConstants {
        b,
        eight_pi_a,
        excess,
        consistency_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::potential_norms;
    use crate::scattering::solve_default;
    use proptest::prelude::*;

    #[test]
    fn zero_potential() {
        let v = PotentialSpec::bump(0.0, 1.0).unwrap();
        let c = coupling_constants(&v, &solve_default(&v).unwrap()).unwrap();
        assert_eq!((c.b, c.eight_pi_a, c.excess), (0.0, 0.0, 0.0));
    }

    #[test]
    fn square_well_closed_form() {
        let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let sol = solve_default(&v).unwrap();
        let c = coupling_constants(&v, &sol).unwrap();
        let exact = 8.0 * std::f64::consts::PI * (1.0 - 1f64.tanh());
        assert!((c.eight_pi_a - exact).abs() < 1e-9, "{} vs {exact}", c.eight_pi_a);
        assert!((c.eight_pi_a - 8.0 * std::f64::consts::PI * sol.a()).abs() < 1e-9);
        assert!((c.b - potential_norms(&v).unwrap().l1).abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn born_exceeds_scattering(amp in 0.1f64..20.0, range in 0.5f64..2.0, well in proptest::bool::ANY) {
            let v = if well { PotentialSpec::square_well(amp, range) } else { PotentialSpec::bump(amp, range) }.unwrap();
            let c = coupling_constants(&v, &solve_default(&v).unwrap()).unwrap();
            prop_assert!(c.excess > 0.0);
            prop_assert!(c.b > c.eight_pi_a);
            prop_assert!(c.consistency_residual <= 1e-8);
        }
    }
}
