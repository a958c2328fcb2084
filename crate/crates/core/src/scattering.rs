//! Zero-energy scattering: the mode `1 − ω` solving `(−Δ + ½V)(1 − ω) = 0`
//! with `ω → 0` at infinity, and the scattering length `a` from the
//! exterior law `ω(r) = a / r`.
//!
//! The radial reduction `u = r(1 − ω)` turns the problem into the linear
//! ODE `u'' = ½ V u`, `u(0) = 0`, which is shot once from `u'(0) = 1` and
//! rescaled so that `u(r) = r − a` outside the support.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::interp::MonotoneCubic;
use crate::potential::{PotentialSpec, Side};

/// Three-point Gauss–Legendre nodes on [-1, 1] and weights.
const GL3_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

#[derive(Clone, Debug)]
pub struct ScatteringSolution {
    potential: PotentialSpec,
    grid: RadialGrid,
    u: Vec<f64>,
    du: Vec<f64>,
    omega: Vec<f64>,
    domega: Vec<f64>,
    a: f64,
    residual: f64,
    profile: MonotoneCubic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthMethod {
    Asymptotic,
    Integral,
}

/// Spacing needed to resolve a potential: `Δr ≤ R / 200`.
pub const RESOLUTION_PER_RANGE: f64 = 200.0;

/// Uniform grid used when the caller has no grid of their own: `R` is a
/// node, `Δr = R / 8000`, `r_max = 4R`.
pub fn default_grid(spec: &PotentialSpec) -> Result<RadialGrid> {
    let r = spec.range();
    RadialGrid::aligned(r / 8000.0, 4.0 * r, r)
}

/// Solve on [`default_grid`].
pub fn solve_default(spec: &PotentialSpec) -> Result<ScatteringSolution> {
    solve_zero_energy(spec, &default_grid(spec)?)
}

pub fn solve_zero_energy(spec: &PotentialSpec, grid: &RadialGrid) -> Result<ScatteringSolution> {
    let big_r = spec.range();
    if grid.r_max() < 2.0 * big_r * (1.0 - 1e-12) {
        return Err(Error::Resolution(format!(
            "grid extent {} must reach at least 2R = {}",
            grid.r_max(),
            2.0 * big_r
        )));
    }
    let needed = big_r / RESOLUTION_PER_RANGE;
    let spacing = grid.max_spacing_below(big_r);
    if spacing > needed * (1.0 + 1e-9) {
        return Err(Error::Resolution(format!(
            "spacing {spacing:.3e} inside the support exceeds R/{RESOLUTION_PER_RANGE} = {needed:.3e}"
        )));
    }

    let r = grid.nodes();
    let n = r.len();
    let mut u = vec![0.0; n];
    let mut du = vec![0.0; n];
    du[0] = 1.0;
    let jump = (!spec.is_smooth()).then_some(big_r);
    for i in 0..n - 1 {
        let (a, b) = (r[i], r[i + 1]);
        let mut y = (u[i], du[i]);
        match jump {
            Some(j) if a < j && j < b && (j - a) > 1e-14 * b && (b - j) > 1e-14 * b => {
                y = rk4_step(spec, a, j, y);
                y = rk4_step(spec, j, b, y);
            }
            _ => y = rk4_step(spec, a, b, y),
        }
        u[i + 1] = y.0;
        du[i + 1] = y.1;
    }
    if let Some(k) = (1..n).find(|&k| !(u[k] > 0.0)) {
        return Err(Error::Integrity(format!(
            "zero-energy solution vanished at r = {} although V >= 0",
            r[k]
        )));
    }

    // exterior: u is affine with slope du[n-1]
    let slope = du[n - 1];
    if !(slope > 0.0) || !slope.is_finite() {
        return Err(Error::Integrity(format!("exterior slope {slope} is not positive")));
    }
    for k in 0..n {
        u[k] /= slope;
        du[k] /= slope;
    }
    let mut omega = vec![0.0; n];
    let mut domega = vec![0.0; n];
    omega[0] = 1.0 - du[0];
    for k in 1..n {
        omega[k] = 1.0 - u[k] / r[k];
        domega[k] = (u[k] - r[k] * du[k]) / (r[k] * r[k]);
    }

    let profile = MonotoneCubic::with_slopes(r.to_vec(), omega.clone(), domega.clone())?;
    let mut sol = ScatteringSolution {
        potential: spec.clone(),
        grid: grid.clone(),
        u,
        du,
        omega,
        domega,
        a: 0.0,
        residual: 0.0,
        profile,
    };
    sol.a = if spec.is_zero() {
        0.0
    } else {
        sol.fit_exterior()?
    };
    sol.residual = sol.ode_residual();
    Ok(sol)
}

type State = (f64, f64);

fn rk4_step(spec: &PotentialSpec, a: f64, b: f64, y: State) -> State {
    let h = b - a;
    let m = 0.5 * (a + b);
    // one-sided limits keep a jump at either end of the step exact
    let va = 0.5 * spec.value_side(a, Side::Right);
    let vm = 0.5 * spec.value(m);
    let vb = 0.5 * spec.value_side(b, Side::Left);
    let k1 = (y.1, va * y.0);
    let y2 = (y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1);
    let k2 = (y2.1, vm * y2.0);
    let y3 = (y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1);
    let k3 = (y3.1, vm * y3.0);
    let y4 = (y.0 + h * k3.0, y.1 + h * k3.1);
    let k4 = (y4.1, vb * y4.0);
    (
        y.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

impl ScatteringSolution {
    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn du(&self) -> &[f64] {
        &self.du
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn domega(&self) -> &[f64] {
        &self.domega
    }

    /// Scattering length from the exterior fit.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn support_radius(&self) -> f64 {
        self.potential.range()
    }

    /// Max over interior nodes of `|u'' − ½Vu|` and `|(u)' − u'|`, with
    /// derivatives of the stored `(u, u')` pairs taken by fourth-order
    /// differences, relative to `‖u‖_∞`. Stencils across a jump are skipped.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Errors unless `spec` is the potential this solution was computed for.
    pub fn ensure_matches(&self, spec: &PotentialSpec) -> Result<()> {
        if &self.potential == spec {
            Ok(())
        } else {
            Err(Error::validation(
                "scattering",
                format!(
                    "solution was computed for potential {} but {} was supplied",
                    self.potential.fingerprint(),
                    spec.fingerprint()
                ),
            ))
        }
    }

    fn exterior_start_index(&self) -> Result<usize> {
        let big_r = self.support_radius();
        let dr = self.grid.max_spacing_below(big_r * (1.0 + 1e-12));
        let start = big_r + 5.0 * dr;
        let k = self.grid.nodes().partition_point(|&x| x < start);
        if k >= self.grid.len() {
            return Err(Error::validation(
                "scattering",
                "grid has no exterior nodes beyond R + 5 dr",
            ));
        }
        Ok(k)
    }

    /// Least-squares fit of `u = r − a` on `r ≥ R + 5Δr`.
    fn fit_exterior(&self) -> Result<f64> {
        let k = self.exterior_start_index()?;
        let r = self.grid.nodes();
        let m = (r.len() - k) as f64;
        Ok(r[k..].iter().zip(&self.u[k..]).map(|(x, u)| x - u).sum::<f64>() / m)
    }

    /// `a = ½ ∫₀^R V u r dr` with `u` interpolated by cubic Hermite
    /// polynomials (exact node derivatives) and 3-point Gauss–Legendre per
    /// cell.
    fn integral_length(&self) -> f64 {
        let big_r = self.support_radius();
        let r = self.grid.nodes();
        let spec = &self.potential;
        let mut total = 0.0;
        for i in 0..r.len() - 1 {
            let (x0, x1) = (r[i], r[i + 1]);
            if x0 >= big_r {
                break;
            }
            let hi = x1.min(big_r);
            let h = x1 - x0;
            let hermite = |x: f64| {
                let s = (x - x0) / h;
                let s2 = s * s;
                let s3 = s2 * s;
                (2.0 * s3 - 3.0 * s2 + 1.0) * self.u[i]
                    + (s3 - 2.0 * s2 + s) * h * self.du[i]
                    + (-2.0 * s3 + 3.0 * s2) * self.u[i + 1]
                    + (s3 - s2) * h * self.du[i + 1]
            };
            let half = 0.5 * (hi - x0);
            let mid = 0.5 * (hi + x0);
            for (gx, gw) in GL3_X.iter().zip(GL3_W) {
                let x = mid + half * gx;
                total += gw * half * spec.value(x) * hermite(x) * x;
            }
        }
        0.5 * total
    }

    fn ode_residual(&self) -> f64 {
        let r = self.grid.nodes();
        let spec = &self.potential;
        let scale = self.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let jump = (!spec.is_smooth()).then_some(spec.range());
        let mut worst = 0.0f64;
        for i in 2..r.len().saturating_sub(2) {
            let h = r[i + 1] - r[i];
            if (r[i + 2] - r[i - 2] - 4.0 * h).abs() > 1e-9 * h {
                continue;
            }
            if let Some(j) = jump {
                if r[i - 2] < j + 1e-14 && r[i + 2] > j - 1e-14 {
                    continue;
                }
            }
            let d = |y: &[f64]| (-y[i + 2] + 8.0 * y[i + 1] - 8.0 * y[i - 1] + y[i - 2]) / (12.0 * h);
            let second = (d(&self.du) - 0.5 * spec.value(r[i]) * self.u[i]).abs();
            let first = (d(&self.u) - self.du[i]).abs();
            worst = worst.max(second).max(first);
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    /// `ω(N r)`: the profile of the scaled potential `V_N`.
    pub fn omega_at(&self, n: u64, r: f64) -> f64 {
        let x = n as f64 * r.abs();
        if x > self.support_radius() {
            return self.a / x;
        }
        self.profile.eval(x)
    }

    /// `1 − ω(N r)`.
    pub fn regular_at(&self, n: u64, r: f64) -> f64 {
        1.0 - self.omega_at(n, r)
    }

    /// `d/dr ω(N r) = N ω'(N r)`.
    pub fn domega_at(&self, n: u64, r: f64) -> f64 {
        let nf = n as f64;
        let x = nf * r.abs();
        if x > self.support_radius() {
            return -nf * self.a / (x * x);
        }
        nf * self.profile.eval_derivative(x)
    }

    /// `[ω, ω', ω'', ω''']` of `r ↦ ω(N r)`; the higher derivatives come
    /// from the scattering equation `ω'' = −½V(1−ω) − 2ω'/r` inside the
    /// support and from `a/r` outside.
    pub fn omega_derivatives(&self, n: u64, r: f64) -> [f64; 4] {
        let nf = n as f64;
        let x = nf * r.abs();
        let a = self.a;
        let raw = if x > self.support_radius() {
            [a / x, -a / (x * x), 2.0 * a / x.powi(3), -6.0 * a / x.powi(4)]
        } else {
            let spec = &self.potential;
            let w = self.profile.eval(x);
            let v = spec.value(x);
            if x < 1e-6 * self.support_radius() {
                let w2 = -v * (1.0 - w) / 6.0;
                [w, w2 * x, w2, 0.0]
            } else {
                let w1 = self.profile.eval_derivative(x);
                let w2 = -0.5 * v * (1.0 - w) - 2.0 * w1 / x;
                let w3 = -0.5 * spec.derivative(x) * (1.0 - w) + 0.5 * v * w1 - 2.0 * w2 / x
                    + 2.0 * w1 / (x * x);
                [w, w1, w2, w3]
            }
        };
        [raw[0], nf * raw[1], nf * nf * raw[2], nf.powi(3) * raw[3]]
    }

    /// Samples of `ω(N r)` on another grid.
    pub fn omega_on(&self, n: u64, grid: &RadialGrid) -> Vec<f64> {
        grid.nodes().iter().map(|&r| self.omega_at(n, r)).collect()
    }

    /// Writes `r,u,omega,domega` rows.
    pub fn write_profile_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "u", "omega", "domega"])?;
        for k in 0..self.grid.len() {
            w.write_record([
                format!("{:.12e}", self.grid.nodes()[k]),
                format!("{:.12e}", self.u[k]),
                format!("{:.12e}", self.omega[k]),
                format!("{:.12e}", self.domega[k]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn scattering_length(
    sol: &ScatteringSolution,
    method: LengthMethod,
    spec: &PotentialSpec,
) -> Result<f64> {
    sol.ensure_matches(spec)?;
    match method {
        LengthMethod::Asymptotic => {
            if spec.is_zero() {
                sol.exterior_start_index()?;
                return Ok(0.0);
            }
            sol.fit_exterior()
        }
        LengthMethod::Integral => Ok(sol.integral_length()),
    }
}

/// Free function form of [`ScatteringSolution::omega_at`].
pub fn omega_at(sol: &ScatteringSolution, n: u64, r: f64) -> f64 {
    sol.omega_at(n, r)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub sup_omega: f64,
    pub min_omega: f64,
    /// `1 − sup ω`.
    pub margin: f64,
    /// `sup |r ω(r)| / a` over exterior nodes (0 for the zero potential).
    pub exterior_ratio: f64,
    /// `sup |ω'| r²` from finite differences.
    pub grad_bound: f64,
    /// `sup |ω''| r³` from finite differences.
    pub hess_bound: f64,
    /// `‖∇ω‖₂`, with the exterior tail `4π a² / r_max` added analytically.
    pub grad_l2: f64,
    pub exterior_monotone: bool,
    pub passed: bool,
}

pub fn verify_omega_bounds(sol: &ScatteringSolution) -> BoundReport {
    let r = sol.grid.nodes();
    let w = &sol.omega;
    let big_r = sol.support_radius();
    let sup_omega = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_omega = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let d1 = sol.grid.radial_derivative(w);
    let mut grad_bound = 0.0f64;
    let mut hess_bound = 0.0f64;
    for i in 1..r.len() - 1 {
        grad_bound = grad_bound.max(d1[i].abs() * r[i] * r[i]);
        // stencils straddling a jump of V see a kink of ω'
        let straddles = !sol.potential.is_smooth() && r[i - 1] < big_r && r[i + 1] > big_r;
        if !straddles {
            hess_bound = hess_bound.max(sol.grid.second_difference(w, i).abs() * r[i].powi(3));
        }
    }
    let g2: Vec<f64> = sol.domega.iter().map(|d| d * d).collect();
    let tail = 4.0 * std::f64::consts::PI * sol.a * sol.a / sol.grid.r_max();
    let grad_l2 = (sol.grid.integrate_3d(&g2) + tail).sqrt();

    let mut exterior_ratio = 0.0f64;
    let mut exterior_monotone = true;
    let mut prev = f64::INFINITY;
    for (x, om) in r.iter().zip(w) {
        if *x > big_r {
            if sol.a > 0.0 {
                exterior_ratio = exterior_ratio.max((x * om).abs() / sol.a);
            }
            if *om > prev + 1e-15 {
                exterior_monotone = false;
            }
            prev = *om;
        }
    }
    let ratio_ok = sol.a == 0.0 || (exterior_ratio - 1.0).abs() < 1e-6;
    let passed = sup_omega < 1.0 && min_omega >= -1e-12 && ratio_ok && exterior_monotone;
    BoundReport {
        sup_omega,
        min_omega,
        margin: 1.0 - sup_omega,
        exterior_ratio,
        grad_bound,
        hess_bound,
        grad_l2,
        exterior_monotone,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::scale_potential;

    fn square_well_length(v0: f64, big_r: f64) -> f64 {
        let kappa = (v0 / 2.0).sqrt();
        big_r - (kappa * big_r).tanh() / kappa
    }

    #[test]
    fn zero_potential_gives_zero_mode() {
        let v = PotentialSpec::square_well(0.0, 1.0).unwrap();
        let sol = solve_default(&v).unwrap();
        assert_eq!(sol.a(), 0.0);
        assert!(sol.omega().iter().all(|w| w.abs() < 1e-15));
        for m in [LengthMethod::Asymptotic, LengthMethod::Integral] {
            assert_eq!(scattering_length(&sol, m, &v).unwrap(), 0.0);
        }
        let rep = verify_omega_bounds(&sol);
        assert!(rep.passed);
        assert_eq!(rep.sup_omega, 0.0);
        assert_eq!(rep.exterior_ratio, 0.0);
        assert_eq!(rep.grad_l2, 0.0);
    }

    #[test]
    fn square_well_closed_form() {
        let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let sol = solve_default(&v).unwrap();
        let exact = 1.0 - 1f64.tanh();
        assert!((exact - 0.2384058).abs() < 1e-7);
        assert!((sol.a() - exact).abs() < 1e-10, "{}", sol.a());
        let integral = scattering_length(&sol, LengthMethod::Integral, &v).unwrap();
        assert!((integral - exact).abs() < 1e-10, "{integral}");
        // interior profile 1 − ω = sinh(κr) / (κ r cosh κR)
        let k = 1.0f64;
        for r in [0.1, 0.5, 0.9] {
            let expect = 1.0 - (k * r).sinh() / (k * r * (k * 1.0).cosh());
            assert!((sol.omega_at(1, r) - expect).abs() < 1e-10);
        }
        assert!((sol.omega()[0] - (1.0 - 1.0 / 1f64.cosh())).abs() < 1e-10);
    }

    #[test]
    fn square_well_off_node_jump_is_split() {
        let v = PotentialSpec::square_well(3.0, 1.0).unwrap();
        let grid = RadialGrid::uniform(1.0 / 2003.0 * 1.7, 3.0).unwrap();
        let sol = solve_zero_energy(&v, &grid).unwrap();
        assert!((sol.a() - square_well_length(3.0, 1.0)).abs() < 1e-10);
    }

    #[test]
    fn bump_exterior_value_matches_fit() {
        let v = PotentialSpec::bump(1.0, 1.0).unwrap();
        let sol = solve_default(&v).unwrap();
        assert!((sol.omega_at(1, 2.0) - sol.a() / 2.0).abs() < 1e-12);
        let k = sol.grid().nodes().partition_point(|&x| x < 2.0);
        assert!((sol.omega()[k] - sol.a() / sol.grid().nodes()[k]).abs() < 1e-12);
        assert!(sol.residual() < 1e-9, "{}", sol.residual());
    }

    #[test]
    fn fourth_order_in_the_spacing() {
        let v = PotentialSpec::bump(5.0, 1.0).unwrap();
        let a: Vec<f64> = [0.005, 0.0025, 0.00125]
            .iter()
            .map(|&h| solve_zero_energy(&v, &RadialGrid::aligned(h, 3.0, 1.0).unwrap()).unwrap().a())
            .collect();
        let order = ((a[0] - a[1]) / (a[1] - a[2])).abs().log2();
        assert!(order > 3.5 && order < 4.6, "observed order {order}");
    }

    #[test]
    fn scaled_length_is_a_over_n() {
        let v = PotentialSpec::bump(3.0, 1.0).unwrap();
        let a = solve_default(&v).unwrap().a();
        for n in [10u64, 100] {
            let vn = scale_potential(&v, n).unwrap();
            let an = solve_default(&vn).unwrap().a();
            assert!((an * n as f64 - a).abs() < 1e-9);
        }
    }

    #[test]
    fn omega_scaling_and_interpolation() {
        let v = PotentialSpec::bump(2.0, 1.0).unwrap();
        let sol = solve_default(&v).unwrap();
        let r = sol.grid().nodes();
        assert_eq!(sol.omega_at(1, r[37]), sol.omega()[37]);
        assert!((sol.omega_at(100, 2.0 / 100.0) - sol.a() / 2.0).abs() < 1e-15);
        assert!((sol.omega_at(100, 2.0) - sol.a() / 200.0).abs() < 1e-15);
        assert_eq!(sol.omega_at(10, 1.0 / 20.0), sol.omega_at(1, 0.5));
    }

    #[test]
    fn omega_derivatives_agree_with_finite_differences() {
        let v = PotentialSpec::bump(5.0, 1.0).unwrap();
        let sol = solve_default(&v).unwrap();
        for n in [1u64, 10] {
            for x in [0.2, 0.6, 0.95, 1.5] {
                let r = x / n as f64;
                let h = 1e-4 / n as f64;
                let d = sol.omega_derivatives(n, r);
                let dp = sol.omega_derivatives(n, r + h);
                let dm = sol.omega_derivatives(n, r - h);
                for k in 0..3 {
                    let fd = (dp[k] - dm[k]) / (2.0 * h);
                    let scale = 1.0 + d[k + 1].abs();
                    assert!((fd - d[k + 1]).abs() < 1e-4 * scale, "n={n} x={x} k={k}: {fd} vs {}", d[k + 1]);
                }
            }
        }
    }

    #[test]
    fn bounds_hold() {
        let sw = solve_default(&PotentialSpec::square_well(2.0, 1.0).unwrap()).unwrap();
        let rep = verify_omega_bounds(&sw);
        assert!(rep.passed && rep.exterior_monotone);
        assert!((rep.sup_omega - sw.omega()[0]).abs() < 1e-15);
        let b = solve_default(&PotentialSpec::bump(5.0, 1.0).unwrap()).unwrap();
        let rep = verify_omega_bounds(&b);
        assert!(rep.passed && rep.margin >= 0.01, "{rep:?}");
        assert!(b.residual() < 1e-9, "{}", b.residual());
        assert!(sw.residual() < 1e-9, "{}", sw.residual());
        assert!(rep.grad_l2.is_finite() && rep.grad_bound > 0.0);
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let v = PotentialSpec::bump(1.0, 1.0).unwrap();
        let coarse = RadialGrid::uniform(0.01, 3.0).unwrap();
        assert!(matches!(solve_zero_energy(&v, &coarse), Err(Error::Resolution(_))));
        let short = RadialGrid::uniform(0.001, 1.5).unwrap();
        assert!(matches!(solve_zero_energy(&v, &short), Err(Error::Resolution(_))));
    }

    #[test]
    fn profile_csv_has_header_and_rows() {
        let sol = solve_default(&PotentialSpec::bump(1.0, 1.0).unwrap()).unwrap();
        let mut buf = Vec::new();
        sol.write_profile_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,u,omega,domega"));
        assert_eq!(lines.count(), sol.grid().len());
    }
}
