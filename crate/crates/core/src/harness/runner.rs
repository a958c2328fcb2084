//! Running an experiment: resource guard, parallel evaluation of points,
//! persistence with resume.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::experiments::{columns, evaluate, points, preflight, prepare, verdicts, PointSpec, Prepared};
use super::record::{Failure, PointRecord, RunRecord};
use crate::error::{Error, Result};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

const MANIFEST: &str = "manifest.json";
const RESULTS: &str = "results.csv";
const POINTS: &str = "points";

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

type Preparation = std::result::Result<Prepared, Failure>;

fn evaluate_point(cfg: &ExperimentConfig, hash: &str, prep: &Preparation, p: &PointSpec) -> PointRecord {
    let outcome = match prep {
        Ok(prep) => evaluate(cfg, prep, p).map_err(|e| Failure::from_error(&e)),
        Err(f) => Err(f.clone()),
    };
    let mut rec = PointRecord {
        index: p.index,
        config_hash: hash.to_string(),
        params: p.params.clone(),
        rows: Vec::new(),
        diagnostics: BTreeMap::new(),
        flags: Vec::new(),
        failure: None,
    };
    match outcome {
        Ok(out) => {
            rec.rows = out.rows;
            rec.diagnostics = out.diagnostics;
            rec.flags = out.flags;
        }
        Err(f) => rec.failure = Some(f),
    }
    rec
}

/// Validation, preparation and the resource guard. Errors here abort the
/// whole run before any point is computed.
fn launch(cfg: &ExperimentConfig) -> Result<(Vec<PointSpec>, Preparation)> {
    cfg.validate()?;
    let pts = points(cfg);
    let bytes = preflight(cfg, &pts)?;
    let limit = cfg.limits.max_memory_mb * 1024.0 * 1024.0;
    if bytes > limit {
        return Err(Error::Resource(format!(
            "estimated working memory {:.0} MB exceeds limits.max_memory_mb = {}",
            bytes / (1024.0 * 1024.0),
            cfg.limits.max_memory_mb
        )));
    }
    let prep = prepare(cfg).map_err(|e| Failure::from_error(&e));
    Ok((pts, prep))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start {workers} workers: {e}")))
}

fn finish(cfg: &ExperimentConfig, started: u64, points: Vec<PointRecord>, resumed: usize) -> RunRecord {
    let cols = columns(cfg.kind);
    let verdicts = verdicts(cfg, &cols, &points);
    RunRecord {
        config_hash: cfg.hash(),
        code_version: CODE_VERSION.to_string(),
        kind: cfg.kind.as_str().to_string(),
        name: cfg.name.clone(),
        started_unix: started,
        finished_unix: now_unix(),
        columns: cols,
        points,
        verdicts,
        resumed_points: resumed,
        complete: true,
    }
}

/// Runs every point in memory. Point failures are recorded, not returned;
/// the error path is reserved for validation and the resource guard.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let started = now_unix();
    let (pts, prep) = launch(cfg)?;
    let hash = cfg.hash();
    let records: Vec<PointRecord> =
        pool(cfg.workers)?.install(|| pts.par_iter().map(|p| evaluate_point(cfg, &hash, &prep, p)).collect());
    Ok(finish(cfg, started, records, 0))
}

fn point_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(POINTS).join(format!("point-{index:05}.json"))
}

/// Write to a sibling temporary file, then rename over the target.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load_point(path: &Path, hash: &str) -> Option<PointRecord> {
    let text = fs::read_to_string(path).ok()?;
    let rec: PointRecord = serde_json::from_str(&text).ok()?;
    (rec.config_hash == hash && rec.failure.is_none()).then_some(rec)
}

/// Runs with results under `out_dir`: `manifest.json`, one JSON file per
/// point in `points/` and `results.csv`. With `resume`, finished points of
/// an earlier run of the same configuration are reused.
pub fn run_persisted(cfg: &ExperimentConfig, out_dir: impl AsRef<Path>, resume: bool) -> Result<RunRecord> {
    let dir = out_dir.as_ref();
    let started = now_unix();
    let (pts, prep) = launch(cfg)?;
    let hash = cfg.hash();
    fs::create_dir_all(dir.join(POINTS))?;

    let mut done: BTreeMap<usize, PointRecord> = BTreeMap::new();
    if resume {
        for p in &pts {
            if let Some(rec) = load_point(&point_path(dir, p.index), &hash) {
                done.insert(p.index, rec);
            }
        }
    }
    let resumed = done.len();

    let mut pending_manifest = finish(cfg, started, Vec::new(), resumed);
    pending_manifest.complete = false;
    write_atomic(&dir.join(MANIFEST), &serde_json::to_vec_pretty(&pending_manifest)?)?;

    let todo: Vec<&PointSpec> = pts.iter().filter(|p| !done.contains_key(&p.index)).collect();
    let fresh: Vec<Result<PointRecord>> = pool(cfg.workers)?.install(|| {
        todo.par_iter()
            .map(|p| {
                let rec = evaluate_point(cfg, &hash, &prep, p);
                write_atomic(&point_path(dir, p.index), &serde_json::to_vec_pretty(&rec)?)?;
                Ok(rec)
            })
            .collect()
    });
    for rec in fresh {
        let rec = rec?;
        done.insert(rec.index, rec);
    }

    let record = finish(cfg, started, done.into_values().collect(), resumed);
    if cfg.output.csv {
        write_atomic(&dir.join(RESULTS), &record.csv_bytes()?)?;
    }
    write_atomic(&dir.join(MANIFEST), &serde_json::to_vec_pretty(&record)?)?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::preset;

    fn scatter_config() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            "kind = \"scatter\"\npotential = { kind = \"square-well\", amplitude = 2.0, range = 1.0 }\ngrid = { dr = 0.001 }",
        )
        .unwrap()
    }

    #[test]
    fn scatter_reports_the_closed_form_length() {
        let rec = run_experiment(&scatter_config()).unwrap();
        assert_eq!(rec.exit_code(), 0);
        let a = rec.diagnostic(0, "a").unwrap();
        assert!((a - (1.0 - 1f64.tanh())).abs() < 1e-6, "{a}");
        assert!(rec.verdicts.iter().all(|v| v.passed));
        assert_eq!(rec.columns, ["r", "u", "omega", "domega"]);
    }

    #[test]
    fn micro_macro_row() {
        let cfg = ExperimentConfig::from_toml_str(
            "kind = \"micro-macro\"\npotential = { kind = \"bump\", amplitude = 1.0, range = 1.0 }\nphysics = { n = [100], ell = [0.01], t = [1e-4] }",
        )
        .unwrap();
        let rec = run_experiment(&cfg).unwrap();
        let row: Vec<f64> = rec.points[0].rows[0].iter().filter_map(|c| c.as_f64()).collect();
        let expect = [100.0, 0.01, 1e-4, 100.0, 2.0, 1.0];
        for (x, y) in row.iter().zip(expect) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "{row:?}");
        }
    }

    #[test]
    fn runs_are_deterministic_across_worker_counts() {
        let mut cfg = preset("fn0").unwrap();
        cfg.physics.n = vec![2500, 5000];
        let a = run_experiment(&cfg).unwrap().csv_bytes().unwrap();
        cfg.workers = 3;
        let b = run_experiment(&cfg).unwrap().csv_bytes().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn resume_reuses_points_and_matches_a_fresh_run() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = preset("fn0").unwrap();
        cfg.physics.n = vec![2500, 5000, 10000];
        let fresh = run_persisted(&cfg, dir.path(), false).unwrap();
        // simulate an interruption after the first point
        fs::remove_file(point_path(dir.path(), 1)).unwrap();
        fs::remove_file(point_path(dir.path(), 2)).unwrap();
        let resumed = run_persisted(&cfg, dir.path(), true).unwrap();
        assert_eq!(resumed.resumed_points, 1);
        assert!(resumed.complete);
        assert_eq!(fresh.csv_bytes().unwrap(), resumed.csv_bytes().unwrap());
        assert_eq!(fs::read(dir.path().join(RESULTS)).unwrap(), fresh.csv_bytes().unwrap());

        // points of a different configuration are not reused
        cfg.physics.ell = vec![0.02];
        let other = run_persisted(&cfg, dir.path(), true).unwrap();
        assert_eq!(other.resumed_points, 0);
    }

    #[test]
    fn resource_guard_rejects_before_launch() {
        let mut cfg = preset("formation").unwrap();
        cfg.limits.max_memory_mb = 0.001;
        assert!(matches!(run_experiment(&cfg), Err(Error::Resource(_))));
    }

    #[test]
    fn windows_reaching_the_absorber_are_rejected() {
        let mut cfg = preset("formation").unwrap();
        cfg.grid.r_max = Some(10.0);
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }

    #[test]
    fn point_failures_are_recorded() {
        let cfg = ExperimentConfig::from_toml_str(
            "kind = \"energy\"\norbital = { kind = \"exponential\", decay = 1.0 }\npotential = { kind = \"bump\", amplitude = 1.0, range = 1.0 }\nphysics = { n = [100] }",
        )
        .unwrap();
        let rec = run_experiment(&cfg).unwrap();
        assert_eq!(rec.exit_code(), 2);
        assert_eq!(rec.points[0].failure.as_ref().unwrap().kind, "validation");
    }
}
