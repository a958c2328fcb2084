//! Microscopic `(N, ℓ, t)` to macroscopic `(Λ, L, T)` variables:
//! `X = N x`, `T = N² t`, and a window of radius `2ℓ` becomes `L = 2Nℓ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroScales {
    pub lambda: f64,
    pub l: f64,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MicroScales {
    pub n: u64,
    pub ell: f64,
    pub t: f64,
}

pub fn micro_to_macro(n: u64, ell: f64, t: f64) -> Result<MacroScales> {
    if n == 0 {
        return Err(Error::validation("N", "must be at least 1"));
    }
    if !(ell > 0.0) || !ell.is_finite() || !t.is_finite() {
        return Err(Error::validation("ell", "ℓ must be positive and t finite"));
    }
    let nf = n as f64;
    // small tolerance so that ℓ = 1/N itself passes despite rounding
    if nf * ell < 1.0 - 1e-12 {
        return Err(Error::OutOfRegime(format!("ℓ = {ell} < 1/N = {}", 1.0 / nf)));
    }
    Ok(MacroScales {
        lambda: nf,
        l: 2.0 * nf * ell,
        t: nf * nf * t,
    })
}

pub fn macro_to_micro(m: &MacroScales) -> Result<MicroScales> {
    let n = m.lambda.round();
    if !(n >= 1.0) || (n - m.lambda).abs() > 1e-9 * n {
        return Err(Error::validation("lambda", "Λ must be a positive integer particle number"));
    }
    let micro = MicroScales {
        n: n as u64,
        ell: m.l / (2.0 * n),
        t: m.t / (n * n),
    };
    micro_to_macro(micro.n, micro.ell, micro.t)?;
    Ok(micro)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn substitution() {
        let m = micro_to_macro(100, 0.01, 1e-4).unwrap();
        assert_eq!(m.lambda, 100.0);
        assert!((m.l - 2.0).abs() < 1e-14 && (m.t - 1.0).abs() < 1e-14);
        assert_eq!(micro_to_macro(1, 1.0, 1.0).unwrap(), MacroScales { lambda: 1.0, l: 2.0, t: 1.0 });
        assert!(matches!(micro_to_macro(100, 0.001, 1.0), Err(Error::OutOfRegime(_))));
    }

    proptest! {
        #[test]
        fn round_trip(n in 1u64..100_000, k in 1.0f64..1e3, t in 0.0f64..1.0) {
            let ell = k / n as f64;
            let m = micro_to_macro(n, ell, t).unwrap();
            let back = macro_to_micro(&m).unwrap();
            prop_assert_eq!(back.n, n);
            prop_assert!((back.ell / ell - 1.0).abs() < 1e-14);
            prop_assert!((back.t - t).abs() <= 1e-14 * t.max(1e-300));
            prop_assert_eq!(micro_to_macro(back.n, back.ell, back.t).unwrap(), m);
        }
    }
}
