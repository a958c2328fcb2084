//! Experiment configuration: one TOML document per experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::orbital::ProfileShape;
use crate::potential::PotentialSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Zero-energy scattering solution and both scattering lengths.
    Scatter,
    /// Evolution of the orbital with norm, energy and sup-norm traces.
    Evolve,
    /// Window functionals over a (Λ, L) grid of points at the times `T`.
    Window,
    /// Window functionals at microscopic (N, ℓ, t), mapped to (Λ, L, T).
    WindowSweep,
    /// Sup-norm decay of the free evolution of `ωψ_Λ`.
    Dispersive,
    /// Energy moments of the factorized state.
    Energy,
    /// Gross–Pitaevskii twin trajectories with couplings `8πa` and `b`.
    Gp,
    /// The substitution `(N, ℓ, t) → (Λ, L, T)`.
    MicroMacro,
    /// `F_N(0)` against its `Nℓ → ∞` constant.
    Fn0,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Scatter => "scatter",
            Self::Evolve => "evolve",
            Self::Window => "window",
            Self::WindowSweep => "window-sweep",
            Self::Dispersive => "dispersive",
            Self::Energy => "energy",
            Self::Gp => "gp",
            Self::MicroMacro => "micro-macro",
            Self::Fn0 => "fn0",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    /// Uniform spacing, or the fine spacing of a stretched grid.
    pub dr: Option<f64>,
    pub r_max: Option<f64>,
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsParams {
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub l: Vec<f64>,
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default)]
    pub n: Vec<u64>,
    #[serde(default)]
    pub ell: Vec<f64>,
    #[serde(default)]
    pub s: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolveScheme {
    /// Crank–Nicolson with the potential.
    #[default]
    CrankNicolson,
    /// Exact free evolution (the potential is ignored).
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveParams {
    #[serde(default)]
    pub scheme: EvolveScheme,
    #[serde(default = "one_f")]
    pub mu: f64,
}

impl Default for EvolveParams {
    fn default() -> Self {
        Self {
            scheme: EvolveScheme::default(),
            mu: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputParams {
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub json: bool,
}

impl Default for OutputParams {
    fn default() -> Self {
        Self {
            dir: None,
            csv: true,
            json: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    /// Upper bound on the estimated working memory of one run.
    #[serde(default = "default_memory")]
    pub max_memory_mb: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_memory_mb: default_memory(),
        }
    }
}

fn default_memory() -> f64 {
    2048.0
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

fn one_f() -> f64 {
    1.0
}

fn default_orbital() -> ProfileShape {
    ProfileShape::Bump { radius: 1.0 }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub name: String,
    pub potential: PotentialSpec,
    /// Shape of the (normalized) orbital or window profile.
    #[serde(default = "default_orbital")]
    pub orbital: ProfileShape,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub physics: PhysicsParams,
    #[serde(default)]
    pub evolve: EvolveParams,
    #[serde(default)]
    pub output: OutputParams,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub limits: Limits,
}

/// Window widths at or above this fraction of `Λ` are flagged as outside
/// the `Λ ≫ L` regime.
pub const REGIME_RATIO: f64 = 0.1;

fn nonempty<T>(list: &[T], field: &str) -> Result<()> {
    if list.is_empty() {
        return Err(Error::validation(field, "must be a nonempty list"));
    }
    Ok(())
}

fn positive(list: &[f64], field: &str) -> Result<()> {
    nonempty(list, field)?;
    if let Some((i, v)) = list.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::validation(format!("{field}[{i}]"), format!("{v} must be positive and finite")));
    }
    Ok(())
}

fn nonnegative_sorted(list: &[f64], field: &str) -> Result<()> {
    nonempty(list, field)?;
    if let Some((i, v)) = list.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::validation(format!("{field}[{i}]"), format!("{v} must be nonnegative and finite")));
    }
    if list.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::validation(field, "must be nondecreasing"));
    }
    Ok(())
}

fn positive_option(v: Option<f64>, field: &str) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0) || !x.is_finite() => Err(Error::validation(field, format!("{x} must be positive"))),
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every list the kind uses and the regime gates.
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::validation("workers", "must be at least 1"));
        }
        positive_option(self.grid.dr, "grid.dr")?;
        positive_option(self.grid.r_max, "grid.r_max")?;
        positive_option(self.grid.dt, "grid.dt")?;
        if !(self.limits.max_memory_mb > 0.0) {
            return Err(Error::validation("limits.max_memory_mb", "must be positive"));
        }
        let p = &self.physics;
        match self.kind {
            ExperimentKind::Scatter => {}
            ExperimentKind::Evolve => {
                nonnegative_sorted(&p.t, "physics.t")?;
                if !p.lambda.is_empty() {
                    positive(&p.lambda, "physics.lambda")?;
                }
                if !(self.evolve.mu > 0.0) {
                    return Err(Error::validation("evolve.mu", "must be positive"));
                }
            }
            ExperimentKind::Window => {
                positive(&p.lambda, "physics.lambda")?;
                positive(&p.l, "physics.l")?;
                nonnegative_sorted(&p.t, "physics.t")?;
            }
            ExperimentKind::WindowSweep | ExperimentKind::MicroMacro => {
                nonempty(&p.n, "physics.n")?;
                positive(&p.ell, "physics.ell")?;
                nonnegative_sorted(&p.t, "physics.t")?;
                self.check_micro_regime()?;
            }
            ExperimentKind::Dispersive => {
                positive(&p.lambda, "physics.lambda")?;
                positive(&p.t, "physics.t")?;
                if p.t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::validation("physics.t", "must be increasing"));
                }
                for (i, &s) in p.s.iter().enumerate() {
                    if !(s >= 3.0) {
                        return Err(Error::validation(format!("physics.s[{i}]"), "the sup-norm bundle needs s ≥ 3"));
                    }
                }
            }
            ExperimentKind::Energy => {
                nonempty(&p.n, "physics.n")?;
                if p.n.iter().any(|&n| n < 2) {
                    return Err(Error::validation("physics.n", "need at least two particles"));
                }
            }
            ExperimentKind::Gp => nonnegative_sorted(&p.t, "physics.t")?,
            ExperimentKind::Fn0 => {
                nonempty(&p.n, "physics.n")?;
                positive(&p.ell, "physics.ell")?;
                self.check_micro_regime()?;
            }
        }
        Ok(())
    }

    /// `ℓ ≥ 1/N` for every pair.
    fn check_micro_regime(&self) -> Result<()> {
        for (i, &n) in self.physics.n.iter().enumerate() {
            if n == 0 {
                return Err(Error::validation(format!("physics.n[{i}]"), "must be at least 1"));
            }
            for (j, &ell) in self.physics.ell.iter().enumerate() {
                if (n as f64) * ell < 1.0 - 1e-12 {
                    return Err(Error::validation(
                        format!("physics.ell[{j}]"),
                        format!("ℓ = {ell} < 1/N for N = {n} (physics.n[{i}])"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of everything that affects the results (output location and
    /// worker count excluded).
    pub fn hash(&self) -> String {
        let mut core = self.clone();
        core.output = OutputParams::default();
        core.workers = 1;
        let bytes = serde_json::to_vec(&core).unwrap_or_default();
        hex::encode(Sha256::digest(&bytes))
    }

    /// Same experiment with spacing and time step divided by `2^level`.
    pub fn refined(&self, level: u32, base: GridParams) -> Self {
        let f = 0.5f64.powi(level as i32);
        let mut c = self.clone();
        c.grid.dr = base.dr.map(|x| x * f);
        c.grid.dt = base.dt.map(|x| x * f);
        c
    }
}

pub const PRESETS: [&str; 3] = ["formation", "persistence", "fn0"];

/// Built-in configurations for the standard regimes.
///
/// - `formation`: `Λ = 400`, `L = 4`, `T` up to `Λ/4`.
/// - `persistence`: `L = 2`, `T` well above `L⁴`, `Λ = 400`.
/// - `fn0`: `ℓ = 0.01` with `Nℓ ∈ {25, 50, 100, 200}`.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let text = match name {
        "formation" => {
            r#"
kind = "window"
name = "formation"
orbital = { kind = "bump", radius = 1.0 }
potential = { kind = "bump", amplitude = 5.0, range = 1.0 }
grid = { dr = 0.005, dt = 0.01 }
physics = { lambda = [400.0], l = [4.0], t = [0.0, 20.0, 50.0, 100.0] }
"#
        }
        "persistence" => {
            r#"
kind = "window"
name = "persistence"
orbital = { kind = "bump", radius = 1.0 }
potential = { kind = "bump", amplitude = 5.0, range = 1.0 }
grid = { dr = 0.005, dt = 0.01 }
physics = { lambda = [400.0], l = [2.0], t = [32.0, 48.0, 64.0, 96.0, 128.0] }
"#
        }
        "fn0" => {
            r#"
kind = "fn0"
name = "fn0"
orbital = { kind = "gaussian", width = 1.0 }
potential = { kind = "square-well", amplitude = 2.0, range = 1.0 }
physics = { n = [2500, 5000, 10000, 20000], ell = [0.01] }
"#
        }
        other => {
            return Err(Error::validation(
                "preset",
                format!("unknown preset {other:?}; known: {}", PRESETS.join(", ")),
            ))
        }
    };
    ExperimentConfig::from_toml_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for name in PRESETS {
            let c = preset(name).unwrap();
            assert_eq!(c.name, name);
            let again = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
            assert_eq!(again.hash(), c.hash());
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn validation_reports_field_paths() {
        let base = "kind = \"window\"\npotential = { kind = \"bump\", amplitude = 1.0, range = 1.0 }\n";
        let err = ExperimentConfig::from_toml_str(&format!("{base}physics = {{ lambda = [], l = [4.0], t = [0.0] }}"))
            .unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "physics.lambda"), "{err}");
        let err = ExperimentConfig::from_toml_str(&format!(
            "{base}physics = {{ lambda = [100.0], l = [-1.0], t = [0.0] }}"
        ))
        .unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "physics.l[0]"), "{err}");
        let micro = "kind = \"micro-macro\"\npotential = { kind = \"bump\", amplitude = 1.0, range = 1.0 }\nphysics = { n = [100], ell = [0.001], t = [1.0] }";
        let err = ExperimentConfig::from_toml_str(micro).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "physics.ell[0]"), "{err}");
        assert!(matches!(
            ExperimentConfig::from_toml_str("kind = \"window\"\nbogus = 1"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn hash_ignores_output_and_workers() {
        let a = preset("fn0").unwrap();
        let mut b = a.clone();
        b.workers = 8;
        b.output.dir = Some("/tmp/elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.physics.ell = vec![0.02];
        assert_ne!(a.hash(), b.hash());
    }
}
