//! Sup-norm decay of the free evolution `e^{iμΔt}f` for slowly decaying data
//! such as `f = ωψ_Λ`, the Lebesgue norm bundle that controls it, and
//! power-law fits of the measured decay.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::norms::radial_jets;
use crate::grid::RadialGrid;
use crate::orbital::{radial_tensor_norms, RadialProfile};
use crate::potential::PotentialSpec;
use crate::propagator::{evolve_free, moller_transform, MollerDirection, RadialField};
use crate::scattering::ScatteringSolution;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Fraction of the mass allowed in the outer tenth of the grid before the
/// periodic image of the free evolution counts as contaminating.
pub const HORIZON_TOLERANCE: f64 = 1e-6;

/// Largest relative change of a grid maximum when every other node is
/// dropped.
pub const SAMPLING_TOLERANCE: f64 = 0.01;

/// Largest Cauchy defect of the finite-time wave operator accepted for
/// dressed data.
pub const DEFECT_GATE: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct DecaySeries {
    pub times: Vec<f64>,
    /// `‖e^{iμΔt}f‖_∞` (grid maximum).
    pub sup_norms: Vec<f64>,
    /// `‖∇e^{iμΔt}f‖_∞` when requested.
    pub grad_sup_norms: Option<Vec<f64>>,
    /// Mass fraction in the outer tenth of the grid.
    pub edge_fractions: Vec<f64>,
}

impl DecaySeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t ‖e^{iμΔt}f‖_∞ / rhs(t)`: the smallest constant for which the
    /// bundle bound holds on this series.
    pub fn empirical_constant(&self, bundle: &NormBundle) -> f64 {
        self.times
            .iter()
            .zip(&self.sup_norms)
            .map(|(&t, &s)| {
                let rhs = bundle.rhs(t);
                if rhs > 0.0 {
                    s / rhs
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SeriesOptions {
    pub gradient: bool,
}

fn grid_max(values: &[f64]) -> (f64, f64) {
    let all = values.iter().copied().fold(0.0, f64::max);
    let even = values.iter().step_by(2).copied().fold(0.0, f64::max);
    (all, even)
}

fn checked_max(values: &[f64], what: &str, t: f64) -> Result<f64> {
    let (all, even) = grid_max(values);
    if all > 0.0 && (all - even) > SAMPLING_TOLERANCE * all {
        return Err(Error::Resolution(format!(
            "{what} at t = {t}: grid maximum {all:.6e} drops to {even:.6e} on every other node"
        )));
    }
    Ok(all)
}

fn modulus_gradient(field: &RadialField, h: f64) -> Vec<f64> {
    let re: Vec<f64> = field.samples().iter().map(|z| z.re).collect();
    let im: Vec<f64> = field.samples().iter().map(|z| z.im).collect();
    radial_jets(&re, h)
        .iter()
        .zip(radial_jets(&im, h))
        .map(|(a, b)| a[1].hypot(b[1]))
        .collect()
}

pub fn supnorm_series(f: &RadialField, mu: f64, times: &[f64]) -> Result<DecaySeries> {
    supnorm_series_with(f, mu, times, SeriesOptions::default())
}

/// Sup norms of the exact free evolution at each time. Fails with
/// `Contamination` once the outgoing mass reaches the outer tenth of the
/// grid, and with `Resolution` when a grid maximum is not sampled finely
/// enough.
pub fn supnorm_series_with(f: &RadialField, mu: f64, times: &[f64], opts: SeriesOptions) -> Result<DecaySeries> {
    let h = f
        .grid()
        .uniform_step()
        .ok_or_else(|| Error::validation("grid", "sup-norm series need a uniform grid"))?;
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("times", "must be nonempty, positive and increasing"));
    }
    let edge = 0.9 * f.grid().r_max();
    let weights = f.grid().weights();
    let r = f.grid().nodes();
    let total: f64 = (0..r.len()).map(|i| weights[i] * f.samples()[i].norm_sqr() * r[i] * r[i]).sum();
    let points: Vec<Result<(f64, Option<f64>, f64)>> = times
        .par_iter()
        .map(|&t| {
            let out = evolve_free(f, mu, t)?.field;
            let moduli: Vec<f64> = out.samples().iter().map(|z| z.norm()).collect();
            let outer: f64 = (0..r.len())
                .filter(|&i| r[i] >= edge)
                .map(|i| weights[i] * moduli[i] * moduli[i] * r[i] * r[i])
                .sum();
            let fraction = if total > 0.0 { outer / total } else { 0.0 };
            if fraction > HORIZON_TOLERANCE {
                return Err(Error::Contamination(format!(
                    "t = {t} is past the horizon: mass fraction {fraction:.3e} in the outer tenth"
                )));
            }
            let sup = checked_max(&moduli, "sup norm", t)?;
            let grad = if opts.gradient {
                Some(checked_max(&modulus_gradient(&out, h), "gradient sup norm", t)?)
            } else {
                None
            };
            Ok((sup, grad, fraction))
        })
        .collect();
    let mut series = DecaySeries {
        times: times.to_vec(),
        sup_norms: Vec::with_capacity(times.len()),
        grad_sup_norms: opts.gradient.then(Vec::new),
        edge_fractions: Vec::with_capacity(times.len()),
    };
    for p in points {
        let (sup, grad, fraction) = p?;
        series.sup_norms.push(sup);
        if let (Some(g), Some(v)) = (series.grad_sup_norms.as_mut(), grad) {
            g.push(v);
        }
        series.edge_fractions.push(fraction);
    }
    Ok(series)
}

/// `‖f‖_s`, `‖∇f‖_{3s/(s+3)}` and `‖∇²f‖_r` for exponents inside the region
/// `s ∈ [3/2, ∞]`, `q ∈ [max(s, 3), ∞]`, `r ∈ [1, 3q/(3+2q)]` where they
/// bound `‖e^{iΔt}f‖_q`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormBundle {
    pub s: f64,
    pub q: f64,
    pub r: f64,
    pub ls: f64,
    pub grad: f64,
    pub hess: f64,
}

impl NormBundle {
    pub fn total(&self) -> f64 {
        self.ls + self.grad + self.hess
    }

    /// `t^{−3/2(1/s−1/q)}(‖f‖_s + ‖∇f‖) + t^{−(3/2(1/r−1/q)−1)}‖∇²f‖_r`.
    pub fn rhs(&self, t: f64) -> f64 {
        let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
        let first = 1.5 * (inv(self.s) - inv(self.q));
        let second = 1.5 * (inv(self.r) - inv(self.q)) - 1.0;
        t.powf(-first) * (self.ls + self.grad) + t.powf(-second) * self.hess
    }
}

/// Checks the admissible exponent region.
pub fn check_exponents(s: f64, q: f64, r: f64) -> Result<()> {
    let bad = |what: String| Err(Error::OutOfHypothesis(what));
    if s.is_nan() || q.is_nan() || r.is_nan() {
        return bad("exponents must be numbers".into());
    }
    if s < 1.5 {
        return bad(format!("s = {s} < 3/2"));
    }
    if q < s.max(3.0) {
        return bad(format!("q = {q} < max(s, 3)"));
    }
    let r_max = if q.is_infinite() { 1.5 } else { 3.0 * q / (3.0 + 2.0 * q) };
    if !(1.0..=r_max).contains(&r) {
        return bad(format!("r = {r} outside [1, {r_max}]"));
    }
    Ok(())
}

/// `(4π ∫ g^p r² dr)^{1/p}`, or the maximum for `p = ∞`.
fn radial_lp(r: &[f64], weights: &[f64], g: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return g.iter().copied().fold(0.0, f64::max);
    }
    let sum: f64 = (0..r.len()).map(|i| weights[i] * g[i].powf(p) * r[i] * r[i]).sum();
    (FOUR_PI * sum).powf(1.0 / p)
}

/// `‖f‖_p` of a radial field by the trapezoid rule.
pub fn lp_norm(f: &RadialField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::validation("p", format!("{p} must be at least 1")));
    }
    let moduli: Vec<f64> = f.samples().iter().map(|z| z.norm()).collect();
    Ok(radial_lp(f.grid().nodes(), &f.grid().weights(), &moduli, p))
}

/// The norm bundle of a field sampled on a uniform grid, with fourth-order
/// differences for the derivatives.
pub fn estimate_rhs(f: &RadialField, s: f64, q: f64, r: f64) -> Result<NormBundle> {
    check_exponents(s, q, r)?;
    let h = f
        .grid()
        .uniform_step()
        .ok_or_else(|| Error::validation("grid", "the norm bundle needs a uniform grid"))?;
    let nodes = f.grid().nodes();
    let weights = f.grid().weights();
    let re: Vec<f64> = f.samples().iter().map(|z| z.re).collect();
    let im: Vec<f64> = f.samples().iter().map(|z| z.im).collect();
    let (jr, ji) = (radial_jets(&re, h), radial_jets(&im, h));
    let mut grad = Vec::with_capacity(nodes.len());
    let mut hess = Vec::with_capacity(nodes.len());
    let mut modulus = Vec::with_capacity(nodes.len());
    for i in 0..nodes.len() {
        let a = radial_tensor_norms(nodes[i], &jr[i]);
        let b = radial_tensor_norms(nodes[i], &ji[i]);
        modulus.push(a[0].hypot(b[0]));
        grad.push(a[1].hypot(b[1]));
        hess.push(a[2].hypot(b[2]));
    }
    let grad_exponent = if s.is_infinite() { 3.0 } else { 3.0 * s / (s + 3.0) };
    Ok(NormBundle {
        s,
        q,
        r,
        ls: radial_lp(nodes, &weights, &modulus, s),
        grad: radial_lp(nodes, &weights, &grad, grad_exponent),
        hess: radial_lp(nodes, &weights, &hess, r),
    })
}

/// The `q = ∞` bundle `‖f‖_s + ‖∇f‖_{3s/(s+3)} + ‖∇²f‖_{3s/(2s+3)}`,
/// defined for `s ≥ 3`.
pub fn estimate_rhs_sup(f: &RadialField, s: f64) -> Result<NormBundle> {
    let r = if s.is_infinite() { 1.5 } else { 3.0 * s / (2.0 * s + 3.0) };
    if s < 3.0 {
        return Err(Error::OutOfHypothesis(format!("the q = ∞ bundle needs s ≥ 3, got {s}")));
    }
    estimate_rhs(f, s, f64::INFINITY, r)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExponentFit {
    /// Decay exponent: `sup ∝ t^{−alpha}`.
    pub alpha: f64,
    /// Root-mean-square misfit in natural-log units.
    pub residual: f64,
    /// Fitted `log` prefactor.
    pub intercept: f64,
    pub samples: usize,
}

/// Least-squares fit of `log y = c − α log t` over the samples with
/// `t ∈ [from, to]`.
pub fn fit_power_law(times: &[f64], values: &[f64], from: f64, to: f64) -> Result<ExponentFit> {
    if times.len() != values.len() {
        return Err(Error::validation("series", "times and values differ in length"));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= from && **t <= to)
        .map(|(&t, &v)| (t, v))
        .collect();
    if pts.len() < 5 {
        return Err(Error::validation("window", format!("{} samples in [{from}, {to}], need at least 5", pts.len())));
    }
    if pts.iter().any(|&(t, v)| !(t > 0.0) || !(v > 0.0) || !v.is_finite()) {
        return Err(Error::validation("series", "fits need positive finite samples"));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::validation("window", "all samples share one time"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(ExponentFit {
        alpha: -slope,
        residual,
        intercept,
        samples: pts.len(),
    })
}

pub fn fit_exponent(series: &DecaySeries, from: f64, to: f64) -> Result<ExponentFit> {
    fit_power_law(&series.times, &series.sup_norms, from, to)
}

/// `ω(r)ψ(r/Λ)` as one-body data (`μ = 1`).
pub fn omega_psi(grid: RadialGrid, sol: &ScatteringSolution, psi: &RadialProfile, lambda: f64) -> Result<RadialField> {
    if !(lambda > 0.0) {
        return Err(Error::validation("lambda", "must be positive"));
    }
    let p = psi.dilated(lambda);
    RadialField::from_fn(grid, |r| Complex64::new(sol.omega_at(1, r) * p.value(r), 0.0), 1.0)
}

/// Uniform grid for `ωψ_Λ` series up to time `t_max`: spacing `h` out to
/// `4Λ`, plus `10 t_max` so that components with `k ≤ 5` (group velocity
/// `2k` at `μ = 1`) stay clear of the outer tenth.
pub fn dispersive_grid(lambda: f64, h: f64, t_max: f64) -> Result<RadialGrid> {
    RadialGrid::uniform(h, 4.0 * lambda + 10.0 * t_max + 50.0)
}

/// `Ω*f` through the finite-time wave operator at `t0`, rejected when the
/// Cauchy defect exceeds [`DEFECT_GATE`].
pub fn dressed_data(f: &RadialField, spec: &PotentialSpec, t0: f64) -> Result<(RadialField, f64)> {
    let m = moller_transform(f, spec, t0, MollerDirection::Adjoint)?;
    if m.cauchy_defect > DEFECT_GATE {
        return Err(Error::Numerical(format!(
            "wave-operator defect {:.3e} at t0 = {t0} exceeds {DEFECT_GATE:e}",
            m.cauchy_defect
        )));
    }
    Ok((m.field, m.cauchy_defect))
}
