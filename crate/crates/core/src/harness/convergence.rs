//! Grid refinement studies: the same experiment with `dr` and `dt` halved
//! at each level.

use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, GridParams};
use super::experiments::{default_steps, value_columns};
use super::runner::run_experiment;
use crate::error::{Error, Result};

/// Finest-level relative shifts above this are flagged.
pub const SHIFT_TOLERANCE: f64 = 0.02;

/// Differences below this multiple of the quantity scale are treated as
/// rounding, and no order is reported.
const ROUNDING_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceLevel {
    pub level: u32,
    pub dr: Option<f64>,
    pub dt: Option<f64>,
    /// The compared quantities, in row order.
    pub values: Vec<f64>,
    /// Max-norm difference to the previous level (0 at level 0).
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub quantities: Vec<String>,
    pub levels: Vec<ConvergenceLevel>,
    /// `log₂(δ_{k−1}/δ_k)` from the last three levels.
    pub observed_order: Option<f64>,
    /// Largest relative change between the two finest levels.
    pub finest_shift: f64,
    pub flagged: bool,
}

fn quantities(cfg: &ExperimentConfig) -> Result<(Vec<String>, Vec<f64>)> {
    let rec = run_experiment(cfg)?;
    if let Some(f) = rec.failures().next() {
        let msg = f.failure.as_ref().map_or(String::new(), |x| x.message.clone());
        return Err(Error::Numerical(format!("point {} failed during refinement: {msg}", f.index)));
    }
    let mut names = Vec::new();
    let mut values = Vec::new();
    if cfg.kind == ExperimentKind::Scatter {
        for key in ["a_asymptotic", "a_integral"] {
            names.push(key.to_string());
            values.push(rec.diagnostic(0, key).unwrap_or(f64::NAN));
        }
    }
    for col in value_columns(cfg.kind) {
        for (i, v) in rec.numeric_column(col)?.into_iter().enumerate() {
            names.push(format!("{col}[{i}]"));
            values.push(v);
        }
    }
    Ok((names, values))
}

/// Runs `levels ≥ 3` refinements starting from the configured (or default)
/// spacing and time step.
pub fn convergence_study(cfg: &ExperimentConfig, levels: u32) -> Result<ConvergenceReport> {
    if levels < 3 {
        return Err(Error::validation("levels", "an observed order needs at least three levels"));
    }
    let (dr0, dt0) = default_steps(cfg);
    let base = GridParams {
        dr: cfg.grid.dr.or(dr0),
        dt: cfg.grid.dt.or(dt0),
        r_max: cfg.grid.r_max,
    };
    if base.dr.is_none() && base.dt.is_none() {
        return Err(Error::validation("kind", format!("{} has no grid to refine", cfg.kind.as_str())));
    }
    let mut names = Vec::new();
    let mut out: Vec<ConvergenceLevel> = Vec::new();
    for level in 0..levels {
        let c = cfg.refined(level, base);
        let (n, values) = quantities(&c)?;
        let delta = match out.last() {
            Some(prev) if prev.values.len() == values.len() => {
                prev.values.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            }
            Some(_) => return Err(Error::Integrity("refinement changed the number of quantities".into())),
            None => 0.0,
        };
        names = n;
        out.push(ConvergenceLevel {
            level,
            dr: c.grid.dr,
            dt: c.grid.dt,
            values,
            delta,
        });
    }
    let k = out.len();
    let scale = out[k - 1].values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let (d1, d2) = (out[k - 2].delta, out[k - 1].delta);
    let observed_order = (d2 > ROUNDING_FLOOR * scale && d1 > 0.0).then(|| (d1 / d2).log2());
    let finest_shift = out[k - 2]
        .values
        .iter()
        .zip(&out[k - 1].values)
        .map(|(a, b)| {
            let denom = b.abs().max(a.abs());
            if denom > 0.0 {
                (a - b).abs() / denom
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(ConvergenceReport {
        quantities: names,
        levels: out,
        observed_order,
        finest_shift,
        flagged: finest_shift > SHIFT_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scattering_length_converges_at_fourth_order() {
        let cfg = ExperimentConfig::from_toml_str(
            "kind = \"scatter\"\npotential = { kind = \"bump\", amplitude = 5.0, range = 1.0 }\ngrid = { dr = 0.005 }",
        )
        .unwrap();
        let rep = convergence_study(&cfg, 3).unwrap();
        let p = rep.observed_order.unwrap();
        assert!((p - 4.0).abs() < 0.5, "order {p}, levels {:?}", rep.levels);
        assert!(!rep.flagged);
    }

    #[test]
    fn crank_nicolson_converges_at_second_order() {
        let cfg = ExperimentConfig::from_toml_str(
            "kind = \"evolve\"\npotential = { kind = \"bump\", amplitude = 5.0, range = 1.0 }\ngrid = { dr = 0.1, dt = 0.04, r_max = 30.0 }\nphysics = { lambda = [2.0], t = [1.0, 2.0] }",
        )
        .unwrap();
        let rep = convergence_study(&cfg, 4).unwrap();
        let p = rep.observed_order.unwrap();
        assert!((p - 2.0).abs() < 0.3, "order {p}, levels {:?}", rep.levels);
    }

    #[test]
    fn unrefinable_quantities_report_no_order() {
        let cfg = ExperimentConfig::from_toml_str(
            "kind = \"micro-macro\"\npotential = { kind = \"bump\", amplitude = 1.0, range = 1.0 }\ngrid = { dr = 0.1 }\nphysics = { n = [100], ell = [0.01], t = [1.0] }",
        )
        .unwrap();
        let rep = convergence_study(&cfg, 3).unwrap();
        assert!(rep.levels.iter().all(|l| l.delta == 0.0));
        assert_eq!(rep.observed_order, None);
        assert_eq!(rep.finest_shift, 0.0);
        assert!(convergence_study(&cfg, 2).is_err());
    }
}
