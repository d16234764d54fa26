//! Run directories: manifest, verdicts, traces and sweep tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::report::{SuiteSummary, Verdict};
use crate::scenario::{execute, Scenario, SchemaError};

/// Exit code of a run whose applicable checks all hold.
pub const EXIT_OK: i32 = 0;
/// A check failed or the computation stopped with an error.
pub const EXIT_FAIL: i32 = 1;
/// The scenario could not be read or parsed.
pub const EXIT_SCHEMA: i32 = 2;

/// `sha256("blob <len>\0" ‖ bytes)`, the git object framing with SHA-256.
pub fn scenario_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub exit_code: i32,
    pub summary: SuiteSummary,
    pub verdicts: Vec<Verdict>,
    pub metrics: BTreeMap<String, f64>,
    /// Set when the computation stopped with an error.
    pub error: Option<String>,
}

fn write(dir: &Path, name: &str, contents: &str, listing: &mut Vec<Value>) -> io::Result<()> {
    fs::write(dir.join(name), contents)?;
    listing.push(json!({ "file": name, "sha256": scenario_hash(contents.as_bytes()) }));
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Runs a parsed scenario and writes its artifacts into `out_root/<name>`.
/// `text` is the scenario source, hashed into the manifest.
pub fn run_to_dir(s: &Scenario, text: &str, out_root: &Path, strict: bool) -> io::Result<RunArtifacts> {
    let dir = out_root.join(&s.name);
    fs::create_dir_all(&dir)?;
    let hash = scenario_hash(text.as_bytes());
    let mut listing = Vec::new();
    let (verdicts, metrics, notes, error) = match execute(s, strict) {
        Ok(out) => {
            for (name, contents) in &out.files {
                write(&dir, name, contents, &mut listing)?;
            }
            (out.verdicts, out.metrics, out.notes, None)
        }
        Err(e) => (Vec::new(), BTreeMap::new(), Vec::new(), Some(e.to_string())),
    };
    let summary = SuiteSummary::of(&verdicts);
    let exit_code = if error.is_some() || !summary.all_ok() {
        EXIT_FAIL
    } else {
        EXIT_OK
    };
    let record = json!({
        "scenario_hash": hash,
        "summary": summary,
        "verdicts": verdicts,
        "metrics": metrics,
        "notes": notes,
        "error": error,
    });
    write(&dir, "verdicts.json", &pretty(&record), &mut listing)?;
    let manifest = json!({
        "name": s.name,
        "task": s.task,
        "scenario_hash": hash,
        "scenario": s,
        "strict": strict,
        "package_version": env!("CARGO_PKG_VERSION"),
        "exit_code": exit_code,
        "outputs": listing,
    });
    fs::write(dir.join("manifest.json"), pretty(&manifest))?;
    Ok(RunArtifacts {
        dir,
        exit_code,
        summary,
        verdicts,
        metrics,
        error,
    })
}

#[derive(Debug)]
pub enum SweepError {
    Schema(SchemaError),
    Io(io::Error),
}

impl std::fmt::Display for SweepError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepError::Schema(e) => write!(f, "{e}"),
            SweepError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SweepError {}

impl SweepError {
    pub fn exit_code(&self) -> i32 {
        match self {
            SweepError::Schema(_) => EXIT_SCHEMA,
            SweepError::Io(_) => EXIT_FAIL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepArtifacts {
    pub table: PathBuf,
    pub exit_code: i32,
    pub runs: Vec<(f64, RunArtifacts)>,
}

fn schema(message: impl Into<String>) -> SweepError {
    SweepError::Schema(SchemaError {
        line: 0,
        column: 0,
        message: message.into(),
    })
}

/// Sets `name` in a scenario document. Dotted names are paths; a bare name
/// refers to `constants.<name>` when that constant exists, then to a
/// top-level field, then to `params.<name>`.
pub fn set_parameter(doc: &mut Value, name: &str, value: f64) -> Result<(), SweepError> {
    let number = if value.fract() == 0.0 && value.abs() < 9.0e15 {
        json!(value as i64)
    } else {
        json!(value)
    };
    let path: Vec<String> = if name.contains('.') {
        name.split('.').map(String::from).collect()
    } else if doc.pointer(&format!("/constants/{name}")).is_some() {
        vec!["constants".into(), name.into()]
    } else if doc.get(name).is_some() {
        vec![name.into()]
    } else {
        vec!["params".into(), name.into()]
    };
    let mut cur = doc;
    for (i, key) in path.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| schema(format!("sweep parameter {name}: {key} is not inside an object")))?;
        if i + 1 == path.len() {
            obj.insert(key.clone(), number.clone());
            return Ok(());
        }
        cur = obj.entry(key.clone()).or_insert_with(|| json!({}));
    }
    Err(schema("empty sweep parameter name"))
}

/// Runs the scenario once per value, in parallel, and writes
/// `out_root/<name>/sweep-<param>.csv` with one row per value.
pub fn sweep_to_dir(
    text: &str,
    param: &str,
    values: &[f64],
    out_root: &Path,
    strict: bool,
) -> Result<SweepArtifacts, SweepError> {
    if values.is_empty() {
        return Err(schema("sweep needs at least one value"));
    }
    let base = Scenario::from_json(text).map_err(SweepError::Schema)?;
    let doc: Value = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    let mut variants = Vec::with_capacity(values.len());
    for &v in values {
        let mut d = doc.clone();
        set_parameter(&mut d, param, v)?;
        let name = format!("{}-{param}={v}", base.name);
        d["name"] = json!(name);
        let src = pretty(&d);
        let s = Scenario::from_json(&src).map_err(SweepError::Schema)?;
        variants.push((v, s, src));
    }
    let root = out_root.join(&base.name);
    fs::create_dir_all(&root).map_err(SweepError::Io)?;
    let runs: Vec<(f64, RunArtifacts)> = variants
        .par_iter()
        .map(|(v, s, src)| run_to_dir(s, src, &root, strict).map(|a| (*v, a)))
        .collect::<io::Result<_>>()
        .map_err(SweepError::Io)?;

    let keys: BTreeSet<&String> = runs.iter().flat_map(|(_, a)| a.metrics.keys()).collect();
    let mut csv = format!("{param},exit_code,passed,failed");
    for k in &keys {
        let _ = write!(csv, ",{k}");
    }
    csv.push('\n');
    for (v, a) in &runs {
        let _ = write!(csv, "{v},{},{},{}", a.exit_code, a.summary.passed, a.summary.failed);
        for k in &keys {
            match a.metrics.get(*k) {
                Some(x) => {
                    let _ = write!(csv, ",{x}");
                }
                None => csv.push(','),
            }
        }
        csv.push('\n');
    }
    let table = root.join(format!("sweep-{param}.csv"));
    fs::write(&table, csv).map_err(SweepError::Io)?;
    let exit_code = runs.iter().map(|(_, a)| a.exit_code).max().unwrap_or(EXIT_OK);
    Ok(SweepArtifacts { table, exit_code, runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_framing() {
        // printf 'blob 0\0' | sha256sum
        assert_eq!(
            scenario_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }

    #[test]
    fn parameter_resolution() {
        let mut d = json!({"m": 0.75, "constants": {"K": 1}, "params": {}});
        set_parameter(&mut d, "K", 4.0).unwrap();
        set_parameter(&mut d, "m", 0.9).unwrap();
        set_parameter(&mut d, "dt", 0.5).unwrap();
        set_parameter(&mut d, "domain.cells", 64.0).unwrap();
        assert_eq!(d["constants"]["K"], json!(4));
        assert_eq!(d["m"], json!(0.9));
        assert_eq!(d["params"]["dt"], json!(0.5));
        assert_eq!(d["domain"]["cells"], json!(64));
    }
}
