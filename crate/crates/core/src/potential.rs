//! Repulsive, radial, compactly supported interaction potentials and the
//! Gross–Pitaevskii rescaling `V_N(x) = N² V(N x)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quad::Quadrature;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Profile family. The bump is `C^∞`; the square well is kept only as an
/// analytic oracle and reports itself as non-smooth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialKind {
    Bump,
    SquareWell,
    /// Shape samples `shape[i]` at `x[i] ∈ [0, 1]` (in units of the range);
    /// `V(r) = amplitude · shape(r / range)`, exactly zero for `r > range`.
    Tabulated { x: Vec<f64>, shape: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PotentialSpecRepr", into = "PotentialSpecRepr")]
pub struct PotentialSpec {
    kind: PotentialKind,
    amplitude: f64,
    range: f64,
    scale_n: u64,
    table: Option<Arc<MonotoneCubic>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PotentialSpecRepr {
    #[serde(flatten)]
    kind: PotentialKind,
    amplitude: f64,
    range: f64,
    #[serde(default = "one")]
    scale_n: u64,
}

fn one() -> u64 {
    1
}

impl TryFrom<PotentialSpecRepr> for PotentialSpec {
    type Error = Error;

    fn try_from(repr: PotentialSpecRepr) -> Result<Self> {
        let base = make_potential(repr.kind, repr.amplitude, repr.range)?;
        if repr.scale_n < 1 {
            return Err(Error::validation("potential.scale_n", "must be >= 1"));
        }
        // the stored amplitude/range already include the scaling
        Ok(Self {
            scale_n: repr.scale_n,
            ..base
        })
    }
}

impl From<PotentialSpec> for PotentialSpecRepr {
    fn from(p: PotentialSpec) -> Self {
        Self {
            kind: p.kind,
            amplitude: p.amplitude,
            range: p.range,
            scale_n: p.scale_n,
        }
    }
}

impl PartialEq for PotentialSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.amplitude == other.amplitude
            && self.range == other.range
            && self.scale_n == other.scale_n
    }
}

/// Which one-sided limit to take at a jump of the profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub fn make_potential(kind: PotentialKind, amplitude: f64, range: f64) -> Result<PotentialSpec> {
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::validation(
            "potential.amplitude",
            format!("{amplitude} must be finite and nonnegative"),
        ));
    }
    if !(range > 0.0) || !range.is_finite() {
        return Err(Error::validation("potential.range", format!("{range} must be positive")));
    }
    let table = match &kind {
        PotentialKind::Tabulated { x, shape } => {
            if x.len() != shape.len() || x.len() < 2 {
                return Err(Error::validation("potential.shape", "need matching x/shape, >= 2 samples"));
            }
            if x[0] != 0.0 || x.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::validation("potential.shape", "x must start at 0 and lie in [0, 1]"));
            }
            if shape.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::validation("potential.shape", "shape must be nonnegative"));
            }
            Some(Arc::new(MonotoneCubic::new(x.clone(), shape.clone())?))
        }
        _ => None,
    };
    Ok(PotentialSpec {
        kind,
        amplitude,
        range,
        scale_n: 1,
        table,
    })
}

pub fn scale_potential(spec: &PotentialSpec, n: u64) -> Result<PotentialSpec> {
    if n < 1 {
        return Err(Error::validation("N", "scale factor must be >= 1"));
    }
    let nf = n as f64;
    Ok(PotentialSpec {
        kind: spec.kind.clone(),
        amplitude: spec.amplitude * nf * nf,
        range: spec.range / nf,
        scale_n: spec.scale_n * n,
        table: spec.table.clone(),
    })
}

impl PotentialSpec {
    pub fn bump(amplitude: f64, range: f64) -> Result<Self> {
        make_potential(PotentialKind::Bump, amplitude, range)
    }

    pub fn square_well(amplitude: f64, range: f64) -> Result<Self> {
        make_potential(PotentialKind::SquareWell, amplitude, range)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Support radius `R`: `V(r) = 0` for `r > R`.
    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn scale_n(&self) -> u64 {
        self.scale_n
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
            || matches!(&self.kind, PotentialKind::Tabulated { shape, .. } if shape.iter().all(|v| *v == 0.0))
    }

    /// False for the square well, whose jump at `R` breaks the smoothness
    /// that the dynamical experiments assume.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.kind, PotentialKind::SquareWell)
    }

    pub fn require_smooth(&self, context: &str) -> Result<()> {
        if self.is_smooth() {
            Ok(())
        } else {
            Err(Error::validation(
                "potential.kind",
                format!("{context} needs a smooth potential; square-well is an oracle-only profile"),
            ))
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        let big_r = self.range;
        if r > big_r {
            return 0.0;
        }
        match &self.kind {
            PotentialKind::Bump => {
                if r >= big_r {
                    0.0
                } else {
                    let d = big_r * big_r - r * r;
                    self.amplitude * (1.0 - big_r * big_r / d).exp()
                }
            }
            PotentialKind::SquareWell => {
                if r < big_r {
                    self.amplitude
                } else {
                    0.0
                }
            }
            PotentialKind::Tabulated { .. } => {
                let t = self.table.as_ref().expect("tabulated potential without table");
                let x = r / big_r;
                if x > t.x_max() {
                    0.0
                } else {
                    self.amplitude * t.eval(x).max(0.0)
                }
            }
        }
    }

    /// One-sided value; only differs from [`value`](Self::value) at the
    /// jump of the square well.
    pub fn value_side(&self, r: f64, side: Side) -> f64 {
        match (&self.kind, side) {
            (PotentialKind::SquareWell, Side::Left) if r > 0.0 && r <= self.range => self.amplitude,
            (PotentialKind::SquareWell, Side::Right) if r >= self.range => 0.0,
            _ => self.value(r),
        }
    }

    /// Radial derivative `V'(r)` (zero across the square-well jump).
    pub fn derivative(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.range {
            return 0.0;
        }
        match &self.kind {
            PotentialKind::Bump => {
                let big_r2 = self.range * self.range;
                let d = big_r2 - r * r;
                self.value(r) * (-2.0 * big_r2 * r / (d * d))
            }
            PotentialKind::SquareWell => 0.0,
            PotentialKind::Tabulated { .. } => {
                let t = self.table.as_ref().expect("tabulated potential without table");
                self.amplitude * t.eval_derivative(r / self.range) / self.range
            }
        }
    }

    /// Points where the profile is not smooth (kept as quadrature breaks).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PotentialKind::Tabulated { x, .. } => x.iter().map(|v| v * self.range).collect(),
            _ => vec![0.0, self.range],
        }
    }

    /// Stable short fingerprint used to tag result rows.
    pub fn fingerprint(&self) -> String {
        let repr = PotentialSpecRepr::from(self.clone());
        let bytes = serde_json::to_vec(&repr).expect("potential serializes");
        let digest = Sha256::digest(&bytes);
        hex::encode(&digest[..8])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PotentialNorms {
    pub l1: f64,
    pub l3over2: f64,
    pub l2: f64,
    pub linf: f64,
    /// Born coupling `b = ∫V`.
    pub born_b: f64,
}

/// `‖V‖_p = (4π ∫₀^R |V(r)|^p r² dr)^{1/p}` for `p ∈ {1, 3/2, 2}`.
pub fn potential_norms(spec: &PotentialSpec) -> Result<PotentialNorms> {
    let q = Quadrature::with_rel_tol(1e-11);
    let breaks = spec.breakpoints();
    let moment = |p: f64| -> Result<f64> {
        let v = q.integrate_pieces(|r| spec.value_side(r, Side::Left).powf(p) * r * r, &breaks)?;
        Ok(FOUR_PI * v)
    };
    if spec.is_zero() {
        return Ok(PotentialNorms {
            l1: 0.0,
            l3over2: 0.0,
            l2: 0.0,
            linf: 0.0,
            born_b: 0.0,
        });
    }
    let l1 = moment(1.0)?;
    let l3over2 = moment(1.5)?.powf(2.0 / 3.0);
    let l2 = moment(2.0)?.sqrt();
    let linf = match &spec.kind {
        PotentialKind::Tabulated { shape, .. } => {
            spec.amplitude * shape.iter().cloned().fold(0.0, f64::max)
        }
        _ => spec.amplitude,
    };
    Ok(PotentialNorms {
        l1,
        l3over2,
        l2,
        linf,
        born_b: l1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_parameters() {
        assert!(PotentialSpec::bump(-1.0, 1.0).is_err());
        assert!(PotentialSpec::bump(1.0, 0.0).is_err());
        assert!(scale_potential(&PotentialSpec::bump(1.0, 1.0).unwrap(), 0).is_err());
    }

    #[test]
    fn zero_square_well_is_zero() {
        let v = PotentialSpec::square_well(0.0, 1.0).unwrap();
        assert!(v.is_zero());
        for r in [0.0, 0.3, 1.0, 2.0] {
            assert_eq!(v.value(r), 0.0);
        }
    }

    #[test]
    fn square_well_indicator() {
        let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
        assert_eq!(v.value(0.5), 2.0);
        assert_eq!(v.value(1.5), 0.0);
        assert_eq!(v.value_side(1.0, Side::Left), 2.0);
        assert_eq!(v.value_side(1.0, Side::Right), 0.0);
        assert!(!v.is_smooth());
    }

    #[test]
    fn bump_is_flat_at_the_support_edge() {
        let v = PotentialSpec::bump(1.0, 1.0).unwrap();
        assert_eq!(v.value(0.0), 1.0);
        // centered differences of orders 1..4 shrink as r approaches R from inside
        let derivs = |delta: f64| {
            let h = delta / 50.0;
            let r = 1.0 - delta;
            let f: Vec<f64> = (-2..=2).map(|k| v.value(r + k as f64 * h)).collect();
            [
                (f[3] - f[1]) / (2.0 * h),
                (f[3] - 2.0 * f[2] + f[1]) / (h * h),
                (f[4] - 2.0 * f[3] + 2.0 * f[1] - f[0]) / (2.0 * h.powi(3)),
                (f[4] - 4.0 * f[3] + 6.0 * f[2] - 4.0 * f[1] + f[0]) / h.powi(4),
            ]
        };
        let far = derivs(0.02);
        let near = derivs(0.01);
        for k in 0..4 {
            assert!(near[k].abs() < far[k].abs(), "order {}: {near:?} vs {far:?}", k + 1);
            assert!(near[k].abs() < 1e-5, "order {}: {near:?}", k + 1);
        }
        let r = 1.0 - 1e-3;
        assert!(v.value(r) < 1e-200);
        assert!(v.derivative(r).abs() < 1e-190);
    }

    #[test]
    fn bump_derivative_matches_finite_difference() {
        let v = PotentialSpec::bump(3.0, 2.0).unwrap();
        for r in [0.3, 1.0, 1.7] {
            let h = 1e-6;
            let fd = (v.value(r + h) - v.value(r - h)) / (2.0 * h);
            assert!((fd - v.derivative(r)).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn scaling_substitutes_directly() {
        let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let same = scale_potential(&v, 1).unwrap();
        assert_eq!(same, v);
        let v10 = scale_potential(&v, 10).unwrap();
        assert_eq!(v10.amplitude(), 200.0);
        assert!((v10.range() - 0.1).abs() < 1e-15);
        assert_eq!(v10.scale_n(), 10);
        let b = PotentialSpec::bump(1.3, 0.7).unwrap();
        let b7 = scale_potential(&b, 7).unwrap();
        for r in [0.001, 0.02, 0.05, 0.09] {
            assert!((b7.value(r) - 49.0 * b.value(7.0 * r)).abs() < 1e-12);
        }
    }

    #[test]
    fn square_well_norms_closed_form() {
        let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let n = potential_norms(&v).unwrap();
        assert!((n.l1 - 8.0 * PI / 3.0).abs() < 1e-10);
        assert!((n.l2 * n.l2 - 16.0 * PI / 3.0).abs() < 1e-9);
        assert!((n.l3over2 - (2.0f64.powf(1.5) * 4.0 * PI / 3.0).powf(2.0 / 3.0)).abs() < 1e-9);
        assert_eq!(n.linf, 2.0);
        assert_eq!(n.born_b, n.l1);
    }

    #[test]
    fn bump_l1_is_refinement_stable() {
        // Richardson-style self-consistency: a finer independent quadrature
        // (composite Simpson with 2^k panels) converges onto the adaptive value.
        let v = PotentialSpec::bump(1.0, 1.0).unwrap();
        let adaptive = potential_norms(&v).unwrap().l1;
        let simpson = |panels: usize| {
            let h = 1.0 / panels as f64;
            let f = |r: f64| FOUR_PI * v.value(r) * r * r;
            let mut s = f(0.0) + f(1.0);
            for i in 1..panels {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            s * h / 3.0
        };
        let s1 = simpson(1 << 12);
        let s2 = simpson(1 << 13);
        assert!((s1 - s2).abs() < 1e-10 * adaptive);
        assert!((s2 - adaptive).abs() < 1e-10 * adaptive);
    }

    #[test]
    fn tabulated_profile_is_clamped_and_nonnegative() {
        let kind = PotentialKind::Tabulated {
            x: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            shape: vec![1.0, 0.9, 0.5, 0.1, 0.0],
        };
        let v = make_potential(kind, 2.0, 2.0).unwrap();
        assert_eq!(v.value(2.5), 0.0);
        assert!((v.value(1.0) - 1.0).abs() < 1e-12);
        for i in 0..200 {
            assert!(v.value(i as f64 * 0.011) >= 0.0);
        }
        let n = potential_norms(&v).unwrap();
        assert!(n.l1 > 0.0 && n.linf == 2.0);
        let json = serde_json::to_string(&v).unwrap();
        let back: PotentialSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.fingerprint(), v.fingerprint());
    }

    #[test]
    fn scaled_norms_follow_the_scaling_law() {
        let v = PotentialSpec::bump(2.0, 1.0).unwrap();
        let base = potential_norms(&v).unwrap();
        for n in [2u64, 10, 100] {
            let s = potential_norms(&scale_potential(&v, n).unwrap()).unwrap();
            let nf = n as f64;
            for (p, a, b) in [(1.0, s.l1, base.l1), (1.5, s.l3over2, base.l3over2), (2.0, s.l2, base.l2)] {
                let expect = nf.powf(2.0 - 3.0 / p) * b;
                assert!((a - expect).abs() <= 1e-8 * expect, "N={n} p={p}: {a} vs {expect}");
            }
        }
    }
}
