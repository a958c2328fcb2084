//! The correlation-window functional
//! `F_{Λ,L}(T) = ∫ θ_L |∇((e^{−i𝔥T}ψ_Λ)/(1−ω))|²` and its split into the
//! pieces evolved from `ωψ_Λ` and `(1−ω)ψ_Λ`.

use num_complex::Complex64;
use serde::Serialize;

use super::CutoffChi;
use crate::error::{Error, Result};
use crate::grid::{RadialGrid, StretchedLayout};
use crate::orbital::RadialProfile;
use crate::potential::PotentialSpec;
use crate::propagator::{evolve_radial_with, Absorber, Dynamics, EvolveOptions, PotentialMode, RadialField};
use crate::scattering::ScatteringSolution;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Cells per interaction range required inside the window.
const WINDOW_RESOLUTION: f64 = 10.0;

/// `4π ∫ θ_L(r) |∂_r(ψ/(1−ω))|² r² dr`, with the gradient taken of the
/// quotient by centered differences.
pub fn window_functional(evolved: &RadialField, sol: &ScatteringSolution, l: f64, chi: &CutoffChi) -> Result<f64> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::validation("L", format!("{l} must be positive")));
    }
    let grid = evolved.grid();
    let edge = chi.support(l);
    if grid.r_max() <= edge {
        return Err(Error::validation(
            "L",
            format!("window edge {edge} lies beyond the grid (r_max = {})", grid.r_max()),
        ));
    }
    if let Some(start) = evolved.absorber_start() {
        if start < edge {
            return Err(Error::Contamination(format!(
                "window edge {edge} reaches into the absorbing layer starting at {start}"
            )));
        }
    }
    let spacing = grid.max_spacing_below(edge);
    let range = sol.support_radius();
    if spacing > range / WINDOW_RESOLUTION {
        return Err(Error::Resolution(format!(
            "spacing {spacing} inside the window exceeds range/{WINDOW_RESOLUTION} = {}",
            range / WINDOW_RESOLUTION
        )));
    }
    let r = grid.nodes();
    let last = r.partition_point(|&x| x < edge);
    let psi = evolved.samples();
    let q: Vec<Complex64> = (0..=last + 1).map(|i| psi[i] / sol.regular_at(1, r[i])).collect();
    let w = grid.weights();
    let mut total = 0.0;
    for i in 1..=last {
        let h1 = r[i] - r[i - 1];
        let h2 = r[i + 1] - r[i];
        let dq = q[i - 1] * (-h2 / (h1 * (h1 + h2)))
            + q[i] * ((h2 - h1) / (h1 * h2))
            + q[i + 1] * (h1 / (h2 * (h1 + h2)));
        total += w[i] * chi.theta(r[i], l) * dq.norm_sqr() * r[i] * r[i];
    }
    Ok(FOUR_PI * total)
}

/// Spacing through the window that resolves `F₁` to a few percent up to
/// `T ≈ 200` for potentials of unit range.
pub const DEFAULT_WINDOW_DR: f64 = 0.005;

/// Grid for a window experiment at scale `Λ`: uniform at `dr` through the
/// window and a margin, then stretched (ratio 1.02, steps up to `12.5 dr`)
/// to `4Λ`.
pub fn window_grid(lambda: f64, l: f64, dr: f64) -> Result<RadialGrid> {
    window_grid_to(lambda, l, dr, None)
}

/// [`window_grid`] with an explicit outer radius.
pub fn window_grid_to(lambda: f64, l: f64, dr: f64, r_max: Option<f64>) -> Result<RadialGrid> {
    if !(lambda > 0.0) {
        return Err(Error::validation("lambda", "must be positive"));
    }
    if !(dr > 0.0) {
        return Err(Error::validation("grid.dr", "must be positive"));
    }
    let fine_extent = (4.0 * l + 200.0 * dr).max(500.0 * dr);
    RadialGrid::stretched(StretchedLayout {
        fine_step: dr,
        fine_extent,
        growth: 1.02,
        max_step: 12.5 * dr,
        r_max: r_max.unwrap_or((4.0 * lambda).max(2.0 * fine_extent)),
    })
}

pub fn default_window_grid(lambda: f64, l: f64) -> Result<RadialGrid> {
    window_grid(lambda, l, DEFAULT_WINDOW_DR)
}

/// `ψ_Λ(r) = ψ(r/Λ)` sampled as a relative-coordinate field (`μ = 2`).
pub fn dilated_field(grid: RadialGrid, psi: &RadialProfile, lambda: f64) -> Result<RadialField> {
    let p = psi.dilated(lambda);
    RadialField::from_fn(grid, |r| Complex64::new(p.value(r), 0.0), Dynamics::RELATIVE.mu)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WindowPoint {
    pub t: f64,
    /// `F_{Λ,L}(T)`.
    pub f: f64,
    /// Window functional of the evolved `ωψ_Λ`.
    pub f1: f64,
    /// Window functional of the evolved `(1−ω)ψ_Λ`.
    pub f2: f64,
    /// Reflected or boundary flux exceeded the contamination threshold.
    pub contamination_warning: bool,
}

impl WindowPoint {
    /// `F ≤ 2F₁ + 2F₂` (up to rounding).
    pub fn split_holds(&self) -> bool {
        self.f <= 2.0 * (self.f1 + self.f2) * (1.0 + 1e-12) + 1e-300
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowSeries {
    pub lambda: f64,
    pub l: f64,
    pub dt: f64,
    pub points: Vec<WindowPoint>,
    /// `L ≥ Λ`: the window is not small compared to the data scale.
    pub out_of_regime: bool,
}

/// Window functionals at each of `times` (nondecreasing, ≥ 0) for the
/// initial profile `psi` (typically [`dilated_field`]). Evolution is
/// Crank–Nicolson under `𝔥 = −2Δ + V` with the well-balanced potential, so
/// that `1 − ω` is exactly stationary on the grid, and the default absorber.
#[allow(clippy::too_many_arguments)]
pub fn window_series(
    psi: &RadialField,
    sol: &ScatteringSolution,
    spec: &PotentialSpec,
    lambda: f64,
    l: f64,
    times: &[f64],
    dt: f64,
    chi: &CutoffChi,
) -> Result<WindowSeries> {
    sol.ensure_matches(spec)?;
    if psi.mu() != Dynamics::RELATIVE.mu {
        return Err(Error::validation("mu", "window experiments evolve under 𝔥 = −2Δ + V (mu = 2)"));
    }
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::validation("T", "times must be nonempty, nonnegative and nondecreasing"));
    }
    let opts = EvolveOptions {
        absorber: Some(Absorber::outer_tenth()),
        mode: PotentialMode::WellBalanced { solution: sol, n: 1 },
        ..EvolveOptions::default()
    };
    let omega: Vec<f64> = psi.grid().nodes().iter().map(|&r| sol.omega_at(1, r)).collect();
    let regular: Vec<f64> = omega.iter().map(|w| 1.0 - w).collect();
    let mut first = psi.multiplied(&omega)?;
    let mut second = psi.multiplied(&regular)?;
    let mut now = 0.0;
    let mut warned = false;
    let mut points = Vec::with_capacity(times.len());
    for &t in times {
        if t > now {
            let a = evolve_radial_with(&first, spec, t - now, dt, &opts)?;
            let b = evolve_radial_with(&second, spec, t - now, dt, &opts)?;
            warned |= a.report.contamination_warning || b.report.contamination_warning;
            first = a.field;
            second = b.field;
            now = t;
        }
        let total: Vec<Complex64> = first.samples().iter().zip(second.samples()).map(|(x, y)| x + y).collect();
        let whole = first.with_samples(total)?;
        points.push(WindowPoint {
            t,
            f: window_functional(&whole, sol, l, chi)?,
            f1: window_functional(&first, sol, l, chi)?,
            f2: window_functional(&second, sol, l, chi)?,
            contamination_warning: warned,
        });
    }
    Ok(WindowSeries {
        lambda,
        l,
        dt,
        points,
        out_of_regime: l >= lambda,
    })
}

/// `{F, F₁, F₂}` at a single time `T`.
#[allow(clippy::too_many_arguments)]
pub fn window_split(
    psi: &RadialField,
    sol: &ScatteringSolution,
    spec: &PotentialSpec,
    lambda: f64,
    l: f64,
    t: f64,
    dt: f64,
    chi: &CutoffChi,
) -> Result<WindowPoint> {
    Ok(window_series(psi, sol, spec, lambda, l, &[t], dt, chi)?.points[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Quadrature;
    use crate::scattering::solve_default;

    fn chi() -> CutoffChi {
        CutoffChi::standard().unwrap()
    }

    fn fine_grid() -> RadialGrid {
        RadialGrid::stretched(StretchedLayout {
            fine_step: 0.0025,
            fine_extent: 10.0,
            growth: 1.05,
            max_step: 0.5,
            r_max: 40.0,
        })
        .unwrap()
    }

    #[test]
    fn regular_profile_gives_zero() {
        let v = PotentialSpec::bump(5.0, 1.0).unwrap();
        let sol = solve_default(&v).unwrap();
        let f = RadialField::from_fn(fine_grid(), |r| Complex64::new(3.0 * sol.regular_at(1, r), 0.0), 2.0).unwrap();
        assert!(window_functional(&f, &sol, 4.0, &chi()).unwrap() < 1e-20);
    }

    #[test]
    fn constant_data_matches_exterior_closed_form() {
        let v = PotentialSpec::square_well(2.0, 1.0).unwrap();
        let sol = solve_default(&v).unwrap();
        let one = RadialField::from_fn(fine_grid(), |_| Complex64::new(1.0, 0.0), 2.0).unwrap();
        let l = 4.0;
        let c = chi();
        let got = window_functional(&one, &sol, l, &c).unwrap();
        // inside: 1−ω = sinh r/(r cosh 1); outside: q' = −a/(r−a)²
        let a = 1.0 - 1f64.tanh();
        let cosh1 = 1f64.cosh();
        let inner = |r: f64| {
            let f = r.sinh() / (r * cosh1);
            let df = (r * r.cosh() - r.sinh()) / (r * r * cosh1);
            (df / (f * f)).powi(2) * r * r
        };
        let outer = |r: f64| c.theta(r, l) * a * a / (r - a).powi(4) * r * r;
        let q = Quadrature::with_rel_tol(1e-12);
        let exact = FOUR_PI * (q.integrate(inner, 1e-9, 1.0).unwrap() + q.integrate_pieces(outer, &[1.0, l, 2.0 * l]).unwrap());
        assert!((got / exact - 1.0).abs() < 1e-4, "{got} vs {exact}");
    }

    #[test]
    fn window_errors() {
        let v = PotentialSpec::bump(5.0, 1.0).unwrap();
        let sol = solve_default(&v).unwrap();
        let one = RadialField::from_fn(fine_grid(), |_| Complex64::new(1.0, 0.0), 2.0).unwrap();
        assert!(matches!(window_functional(&one, &sol, 30.0, &chi()), Err(Error::Validation { .. })));
        let coarse = RadialField::from_fn(RadialGrid::uniform(0.5, 40.0).unwrap(), |_| Complex64::new(1.0, 0.0), 2.0)
            .unwrap();
        assert!(matches!(window_functional(&coarse, &sol, 4.0, &chi()), Err(Error::Resolution(_))));
    }

    #[test]
    fn split_degenerates_without_potential_and_bounds_total() {
        let zero = PotentialSpec::bump(0.0, 1.0).unwrap();
        let sol0 = solve_default(&zero).unwrap();
        let lambda = 40.0;
        let grid = window_grid(lambda, 2.0, 0.02).unwrap();
        let psi = dilated_field(grid.clone(), &RadialProfile::bump(1.0).unwrap(), lambda).unwrap();
        let c = chi();
        let s = window_series(&psi, &sol0, &zero, lambda, 2.0, &[0.0, 5.0], 0.05, &c).unwrap();
        for p in &s.points {
            assert_eq!(p.f1, 0.0);
            assert!((p.f2 - p.f).abs() <= 1e-14 * p.f.max(1e-300));
        }
        let v = PotentialSpec::bump(5.0, 1.0).unwrap();
        let sol = solve_default(&v).unwrap();
        let s = window_series(&psi, &sol, &v, lambda, 2.0, &[0.0, 2.0, 5.0], 0.05, &c).unwrap();
        assert!(s.points.iter().all(WindowPoint::split_holds));
        // at T = 0 the first piece is the quotient ωψ_Λ/(1−ω) directly
        let omega_psi = psi.multiplied(&sol.omega_on(1, &grid)).unwrap();
        let direct = window_functional(&omega_psi, &sol, 2.0, &c).unwrap();
        assert!((s.points[0].f1 - direct).abs() <= 1e-12 * direct);
    }
}
