//! Parameter points of each experiment kind and their evaluation.

use std::collections::BTreeMap;

use super::config::{EvolveScheme, ExperimentConfig, ExperimentKind, REGIME_RATIO};
use super::record::{Cell, PointRecord, Verdict};
use crate::dispersive::{
    dispersive_grid, estimate_rhs_sup, fit_exponent, lp_norm, omega_psi, supnorm_series_with, SeriesOptions,
};
use crate::error::{Error, Result};
use crate::functionals::{
    coupling_constants, dilated_field, fn_initial, hamiltonian_moments, micro_to_macro, window_grid_to,
    window_series, CutoffChi, DEFAULT_WINDOW_DR,
};
use crate::gp::coupling_comparison;
use crate::grid::RadialGrid;
use crate::orbital::{InitialOrbital, RadialProfile};
use crate::propagator::{evolve_free, evolve_radial_with, EvolveOptions, RadialField};
use crate::scattering::{
    default_grid, scattering_length, solve_zero_energy, verify_omega_bounds, LengthMethod, ScatteringSolution,
};

/// Decay exponent of the smooth `InitialOrbital` weight used by the
/// experiments.
const ORBITAL_ALPHA: f64 = 4.0;

pub(crate) struct PointSpec {
    pub index: usize,
    pub params: BTreeMap<String, f64>,
}

pub(crate) struct PointOutput {
    pub rows: Vec<Vec<Cell>>,
    pub diagnostics: BTreeMap<String, f64>,
    pub flags: Vec<String>,
}

impl PointOutput {
    fn new() -> Self {
        Self {
            rows: Vec::new(),
            diagnostics: BTreeMap::new(),
            flags: Vec::new(),
        }
    }
}

/// Column names of the CSV for each kind.
pub(crate) fn columns(kind: ExperimentKind) -> Vec<String> {
    let c: &[&str] = match kind {
        ExperimentKind::Scatter => &["r", "u", "omega", "domega"],
        ExperimentKind::Evolve => &["t", "norm", "sup_norm"],
        ExperimentKind::Window | ExperimentKind::WindowSweep => {
            &["Lambda", "L", "T", "F", "F1", "F2", "grid_dr", "dt", "potential_hash"]
        }
        ExperimentKind::Dispersive => &["t", "sup_norm", "grad_sup_norm", "Lambda", "family_tag"],
        ExperimentKind::Energy => &["N", "e1_per_n", "e1_limit", "h2_per_n3", "h2_limit"],
        ExperimentKind::Gp => &["t", "mass", "energy", "divergence"],
        ExperimentKind::MicroMacro => &["N", "ell", "t", "Lambda", "L", "T"],
        ExperimentKind::Fn0 => &[
            "N",
            "ell",
            "N_ell",
            "value",
            "scaled",
            "asymptotic_constant",
            "relative_gap",
            "separable",
            "correction_bound",
        ],
    };
    c.iter().map(|s| s.to_string()).collect()
}

/// Columns that carry computed values (as opposed to parameters), compared
/// across refinement levels.
pub(crate) fn value_columns(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::Scatter => &[],
        ExperimentKind::Evolve => &["norm", "sup_norm"],
        ExperimentKind::Window | ExperimentKind::WindowSweep => &["F", "F1", "F2"],
        ExperimentKind::Dispersive => &["sup_norm", "grad_sup_norm"],
        ExperimentKind::Energy => &["e1_per_n", "h2_per_n3"],
        ExperimentKind::Gp => &["mass", "energy", "divergence"],
        ExperimentKind::MicroMacro => &["Lambda", "L", "T"],
        ExperimentKind::Fn0 => &["value", "scaled"],
    }
}

/// Spacing and time step used when the configuration leaves them open.
pub(crate) fn default_steps(cfg: &ExperimentConfig) -> (Option<f64>, Option<f64>) {
    let range = cfg.potential.range();
    match cfg.kind {
        ExperimentKind::Scatter => (Some(range / 8000.0), None),
        ExperimentKind::Evolve => (Some(0.05), Some(0.01)),
        ExperimentKind::Window | ExperimentKind::WindowSweep => (Some(DEFAULT_WINDOW_DR), Some(0.01)),
        ExperimentKind::Dispersive => (Some(0.05), None),
        ExperimentKind::Gp => (Some(0.05), Some(1e-3)),
        ExperimentKind::Energy | ExperimentKind::MicroMacro | ExperimentKind::Fn0 => (None, None),
    }
}

fn dr(cfg: &ExperimentConfig) -> f64 {
    cfg.grid.dr.or(default_steps(cfg).0).unwrap_or(0.05)
}

fn dt(cfg: &ExperimentConfig) -> f64 {
    cfg.grid.dt.or(default_steps(cfg).1).unwrap_or(0.01)
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub(crate) fn points(cfg: &ExperimentConfig) -> Vec<PointSpec> {
    let p = &cfg.physics;
    let list: Vec<BTreeMap<String, f64>> = match cfg.kind {
        ExperimentKind::Scatter | ExperimentKind::Gp => vec![BTreeMap::new()],
        ExperimentKind::Evolve => {
            if p.lambda.is_empty() {
                vec![params(&[("lambda", 1.0)])]
            } else {
                p.lambda.iter().map(|&x| params(&[("lambda", x)])).collect()
            }
        }
        ExperimentKind::Window => p
            .lambda
            .iter()
            .flat_map(|&lambda| p.l.iter().map(move |&l| params(&[("lambda", lambda), ("l", l)])))
            .collect(),
        ExperimentKind::WindowSweep | ExperimentKind::MicroMacro | ExperimentKind::Fn0 => p
            .n
            .iter()
            .flat_map(|&n| p.ell.iter().map(move |&ell| params(&[("n", n as f64), ("ell", ell)])))
            .collect(),
        ExperimentKind::Dispersive => p.lambda.iter().map(|&x| params(&[("lambda", x)])).collect(),
        ExperimentKind::Energy => p.n.iter().map(|&n| params(&[("n", n as f64)])).collect(),
    };
    list.into_iter()
        .enumerate()
        .map(|(index, params)| PointSpec { index, params })
        .collect()
}

/// Shared, read-only inputs of all points.
pub(crate) struct Prepared {
    pub sol: ScatteringSolution,
    pub chi: CutoffChi,
    pub profile: RadialProfile,
}

pub(crate) fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let spec = &cfg.potential;
    let grid = if cfg.kind == ExperimentKind::Scatter {
        let range = spec.range();
        RadialGrid::aligned(dr(cfg), cfg.grid.r_max.unwrap_or(4.0 * range), range)?
    } else {
        default_grid(spec)?
    };
    Ok(Prepared {
        sol: solve_zero_energy(spec, &grid)?,
        chi: CutoffChi::standard()?,
        profile: RadialProfile::normalized(cfg.orbital)?,
    })
}

fn window_grid_for(cfg: &ExperimentConfig, lambda: f64, l: f64) -> Result<RadialGrid> {
    window_grid_to(lambda, l, dr(cfg), cfg.grid.r_max)
}

/// Grids of every point, for the regime gate and the resource guard.
fn point_grid(cfg: &ExperimentConfig, point: &PointSpec) -> Result<Option<RadialGrid>> {
    let get = |k: &str| point.params.get(k).copied().unwrap_or(0.0);
    Ok(match cfg.kind {
        ExperimentKind::Window => Some(window_grid_for(cfg, get("lambda"), get("l"))?),
        ExperimentKind::WindowSweep => {
            let m = micro_to_macro(get("n") as u64, get("ell"), 0.0)?;
            Some(window_grid_for(cfg, m.lambda, m.l)?)
        }
        ExperimentKind::Dispersive => Some(dispersive_grid_for(cfg, get("lambda"))?),
        ExperimentKind::Evolve => Some(evolve_grid(cfg, get("lambda"))?),
        ExperimentKind::Gp => Some(gp_grid(cfg)?),
        ExperimentKind::Scatter => {
            let range = cfg.potential.range();
            Some(RadialGrid::aligned(dr(cfg), cfg.grid.r_max.unwrap_or(4.0 * range), range)?)
        }
        _ => None,
    })
}

/// Rejects windows that reach into the absorbing layer and estimates the
/// working memory of the run in bytes.
pub(crate) fn preflight(cfg: &ExperimentConfig, pts: &[PointSpec]) -> Result<f64> {
    let mut largest = 0usize;
    for p in pts {
        let Some(grid) = point_grid(cfg, p)? else { continue };
        largest = largest.max(grid.len());
        if matches!(cfg.kind, ExperimentKind::Window | ExperimentKind::WindowSweep) {
            let l = match cfg.kind {
                ExperimentKind::Window => p.params["l"],
                _ => 2.0 * p.params["n"] * p.params["ell"],
            };
            let start = 0.9 * grid.r_max();
            if 2.0 * l >= start {
                return Err(Error::validation(
                    "physics.l",
                    format!("window support 2L = {} reaches the absorbing layer at r = {start}", 2.0 * l),
                ));
            }
        }
    }
    // complex samples, tridiagonal factors and FFT buffers per live point
    let per_node = match cfg.kind {
        ExperimentKind::Dispersive => 16.0 * 12.0 * cfg.physics.t.len().max(1) as f64,
        ExperimentKind::Scatter => 8.0 * 12.0,
        _ => 16.0 * 16.0,
    };
    let live = cfg.workers.min(pts.len().max(1)) as f64;
    Ok(largest as f64 * per_node * live)
}

fn dispersive_grid_for(cfg: &ExperimentConfig, lambda: f64) -> Result<RadialGrid> {
    let t_max = cfg.physics.t.iter().copied().fold(0.0, f64::max);
    match cfg.grid.r_max {
        Some(r_max) => RadialGrid::uniform(dr(cfg), r_max),
        None => dispersive_grid(lambda, dr(cfg), t_max),
    }
}

fn evolve_grid(cfg: &ExperimentConfig, lambda: f64) -> Result<RadialGrid> {
    let extent = RadialProfile::normalized(cfg.orbital)?.extent();
    RadialGrid::uniform(dr(cfg), cfg.grid.r_max.unwrap_or(4.0 * extent * lambda.max(1.0)))
}

fn gp_grid(cfg: &ExperimentConfig) -> Result<RadialGrid> {
    let extent = RadialProfile::normalized(cfg.orbital)?.extent();
    RadialGrid::uniform(dr(cfg), cfg.grid.r_max.unwrap_or((4.0 * extent).max(40.0)))
}

fn flag(out: &mut PointOutput, bool_value: bool, key: &str) {
    out.diagnostics.insert(key.to_string(), if bool_value { 1.0 } else { 0.0 });
}

pub(crate) fn evaluate(cfg: &ExperimentConfig, prep: &Prepared, point: &PointSpec) -> Result<PointOutput> {
    let get = |k: &str| point.params.get(k).copied().unwrap_or(0.0);
    let spec = &cfg.potential;
    let sol = &prep.sol;
    let mut out = PointOutput::new();
    match cfg.kind {
        ExperimentKind::Scatter => {
            let a_asym = scattering_length(sol, LengthMethod::Asymptotic, spec)?;
            let a_int = scattering_length(sol, LengthMethod::Integral, spec)?;
            let bounds = verify_omega_bounds(sol);
            let c = coupling_constants(spec, sol)?;
            for (k, v) in [
                ("a", sol.a()),
                ("a_asymptotic", a_asym),
                ("a_integral", a_int),
                ("residual", sol.residual()),
                ("sup_omega", bounds.sup_omega),
                ("b", c.b),
                ("eight_pi_a", c.eight_pi_a),
                ("excess", c.excess),
            ] {
                out.diagnostics.insert(k.into(), v);
            }
            flag(&mut out, bounds.passed, "omega_bounds_passed");
            let r = sol.grid().nodes();
            for k in 0..r.len() {
                out.rows.push(vec![r[k].into(), sol.u()[k].into(), sol.omega()[k].into(), sol.domega()[k].into()]);
            }
        }
        ExperimentKind::Evolve => {
            let lambda = get("lambda");
            let grid = evolve_grid(cfg, lambda)?;
            let p = prep.profile.dilated(lambda);
            let mu = cfg.evolve.mu;
            let field = RadialField::from_fn(grid, |r| num_complex::Complex64::new(p.value(r), 0.0), mu)?;
            let mut state = field.clone();
            let mut now = 0.0;
            let opts = EvolveOptions::conservative();
            for &t in &cfg.physics.t {
                let current = match cfg.evolve.scheme {
                    EvolveScheme::Spectral => evolve_free(&field, mu, t)?.field,
                    EvolveScheme::CrankNicolson => {
                        if t > now {
                            state = evolve_radial_with(&state, spec, t - now, dt(cfg), &opts)?.field;
                            now = t;
                        }
                        state.clone()
                    }
                };
                out.rows.push(vec![t.into(), current.norm().into(), current.sup_norm().into()]);
            }
        }
        ExperimentKind::Window | ExperimentKind::WindowSweep => {
            let (lambda, l, times) = if cfg.kind == ExperimentKind::Window {
                (get("lambda"), get("l"), cfg.physics.t.clone())
            } else {
                let n = get("n") as u64;
                let ell = get("ell");
                let mapped: Vec<_> = cfg
                    .physics
                    .t
                    .iter()
                    .map(|&t| micro_to_macro(n, ell, t))
                    .collect::<Result<_>>()?;
                (mapped[0].lambda, mapped[0].l, mapped.iter().map(|m| m.t).collect())
            };
            let grid = window_grid_for(cfg, lambda, l)?;
            out.diagnostics.insert("nodes".into(), grid.len() as f64);
            out.diagnostics.insert("r_max".into(), grid.r_max());
            let psi = dilated_field(grid, &prep.profile, lambda)?;
            let series = window_series(&psi, sol, spec, lambda, l, &times, dt(cfg), &prep.chi)?;
            if l >= REGIME_RATIO * lambda {
                out.flags.push(format!("L = {l} is not small compared to Λ = {lambda}"));
            }
            let hash = spec.fingerprint();
            let mut contaminated = false;
            for p in &series.points {
                contaminated |= p.contamination_warning;
                out.rows.push(vec![
                    lambda.into(),
                    l.into(),
                    p.t.into(),
                    p.f.into(),
                    p.f1.into(),
                    p.f2.into(),
                    dr(cfg).into(),
                    series.dt.into(),
                    hash.clone().into(),
                ]);
            }
            flag(&mut out, contaminated, "boundary_flux_warning");
            if contaminated {
                out.flags.push("outgoing mass reached the absorbing layer".into());
            }
        }
        ExperimentKind::Dispersive => {
            let lambda = get("lambda");
            let f = omega_psi(dispersive_grid_for(cfg, lambda)?, sol, &prep.profile, lambda)?;
            let series = supnorm_series_with(&f, 1.0, &cfg.physics.t, SeriesOptions { gradient: true })?;
            let grads = series.grad_sup_norms.clone().unwrap_or_default();
            for (k, &t) in series.times.iter().enumerate() {
                out.rows.push(vec![
                    t.into(),
                    series.sup_norms[k].into(),
                    grads[k].into(),
                    lambda.into(),
                    "omega-psi".into(),
                ]);
            }
            out.diagnostics.insert("l1_norm".into(), lp_norm(&f, 1.0)?);
            let edge = series.edge_fractions.iter().copied().fold(0.0, f64::max);
            out.diagnostics.insert("edge_fraction".into(), edge);
            if series.len() >= 5 {
                let t0 = series.times[0];
                let t1 = series.times[series.len() - 1];
                let fit = fit_exponent(&series, t0, t1)?;
                out.diagnostics.insert("alpha".into(), fit.alpha);
                out.diagnostics.insert("fit_residual".into(), fit.residual);
            }
            for &s in &cfg.physics.s {
                let bundle = estimate_rhs_sup(&f, s)?;
                out.diagnostics.insert(format!("bundle_s{s}"), bundle.total());
                out.diagnostics.insert(format!("constant_s{s}"), series.empirical_constant(&bundle));
            }
        }
        ExperimentKind::Energy => {
            let orbital = InitialOrbital::new(cfg.orbital, ORBITAL_ALPHA)?;
            let m = hamiltonian_moments(&orbital, spec, get("n") as u64)?;
            out.rows.push(vec![
                (m.n as f64).into(),
                m.e1_per_n.into(),
                m.e1_limit.into(),
                m.h2_leading_per_n3.into(),
                m.h2_limit.into(),
            ]);
            out.diagnostics.insert("e1_gap".into(), m.e1_gap());
            out.diagnostics.insert("h2_relative_gap".into(), m.h2_relative_gap());
        }
        ExperimentKind::Gp => {
            let orbital = InitialOrbital::new(cfg.orbital, ORBITAL_ALPHA)?;
            let mut times = cfg.physics.t.clone();
            if times[0] > 0.0 {
                times.insert(0, 0.0);
            }
            let cmp = coupling_comparison(&orbital, gp_grid(cfg)?, spec, sol, &times, dt(cfg))?;
            for s in &cmp.samples {
                out.rows.push(vec![s.t.into(), s.mass_a.into(), s.energy_a.into(), s.divergence.into()]);
            }
            for (k, v) in [
                ("eight_pi_a", cmp.eight_pi_a),
                ("b", cmp.b),
                ("oracle_slope", cmp.oracle_slope),
                ("oracle_aligned_slope", cmp.oracle_aligned_slope),
                ("max_mass_drift", cmp.max_mass_drift()),
                ("max_relative_energy_drift", cmp.max_relative_energy_drift()),
                ("terminal_aligned", cmp.samples.last().map_or(0.0, |s| s.aligned)),
            ] {
                out.diagnostics.insert(k.into(), v);
            }
        }
        ExperimentKind::MicroMacro => {
            let (n, ell) = (get("n") as u64, get("ell"));
            for &t in &cfg.physics.t {
                let m = micro_to_macro(n, ell, t)?;
                out.rows.push(vec![(n as f64).into(), ell.into(), t.into(), m.lambda.into(), m.l.into(), m.t.into()]);
            }
        }
        ExperimentKind::Fn0 => {
            let orbital = InitialOrbital::new(cfg.orbital, ORBITAL_ALPHA)?;
            let (n, ell) = (get("n") as u64, get("ell"));
            let f = fn_initial(&orbital, sol, n, ell, &prep.chi)?;
            out.rows.push(vec![
                (n as f64).into(),
                ell.into(),
                (n as f64 * ell).into(),
                f.value.into(),
                f.scaled.into(),
                f.asymptotic_constant.into(),
                f.relative_gap().into(),
                f.separable.into(),
                f.correction_bound.into(),
            ]);
        }
    }
    Ok(out)
}

fn column_of(rows: &[Vec<Cell>], cols: &[String], name: &str) -> Vec<f64> {
    let k = cols.iter().position(|c| c == name).unwrap_or(0);
    rows.iter().filter_map(|r| r.get(k).and_then(Cell::as_f64)).collect()
}

/// Summary checks attached to the record.
pub(crate) fn verdicts(cfg: &ExperimentConfig, cols: &[String], points: &[PointRecord]) -> Vec<Verdict> {
    let mut v = Vec::new();
    let ok: Vec<&PointRecord> = points.iter().filter(|p| p.failure.is_none()).collect();
    match cfg.kind {
        ExperimentKind::Window | ExperimentKind::WindowSweep => {
            for p in &ok {
                let t = column_of(&p.rows, cols, "T");
                let f = column_of(&p.rows, cols, "F");
                let late: Vec<f64> = t.iter().zip(&f).filter(|(t, _)| **t >= 20.0).map(|(_, f)| *f).collect();
                let monotone = late.windows(2).all(|w| w[1] <= w[0]);
                v.push(Verdict {
                    name: format!("point {}: F nonincreasing for T >= 20", p.index),
                    passed: monotone,
                    detail: format!("{late:?}"),
                });
                if let Some(k) = t.iter().position(|&x| x == 0.0) {
                    let worst = late.iter().copied().fold(0.0, f64::max) / f[k];
                    v.push(Verdict {
                        name: format!("point {}: F(T)/F(0) <= 0.1 for T >= 20", p.index),
                        passed: worst <= 0.1,
                        detail: format!("max ratio {worst:.3e}"),
                    });
                }
            }
        }
        ExperimentKind::Scatter => {
            for p in &ok {
                let (a, b) = (p.diagnostics["a_asymptotic"], p.diagnostics["a_integral"]);
                v.push(Verdict {
                    name: "asymptotic and integral scattering lengths agree to 1e-6".into(),
                    passed: (a - b).abs() <= 1e-6,
                    detail: format!("{a:.12e} vs {b:.12e}"),
                });
            }
        }
        ExperimentKind::Fn0 => {
            let gaps: Vec<f64> = ok.iter().flat_map(|p| column_of(&p.rows, cols, "relative_gap")).collect();
            v.push(Verdict {
                name: "relative gap decreases along the sweep".into(),
                passed: gaps.windows(2).all(|w| w[1] < w[0]),
                detail: format!("{gaps:?}"),
            });
        }
        ExperimentKind::Gp => {
            for p in &ok {
                let (m, e) = (p.diagnostics["max_mass_drift"], p.diagnostics["max_relative_energy_drift"]);
                v.push(Verdict {
                    name: "mass drift <= 1e-10 and energy drift <= 1e-6".into(),
                    passed: m <= 1e-10 && e <= 1e-6,
                    detail: format!("mass {m:.3e}, energy {e:.3e}"),
                });
            }
        }
        _ => {}
    }
    v
}
