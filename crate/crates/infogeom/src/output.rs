//! Run manifests and the CSV/JSON writers that embed them.
//!
//! CSV files start with `#`-prefixed manifest lines followed by a normal
//! header row. JSON files are objects with a `manifest` key next to the
//! payload. Nothing time- or host-dependent is recorded, so equal manifests
//! give byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const OUT_DIR_ENV: &str = "INFOGEOM_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub model_spec: Option<String>,
    pub seed: Option<u64>,
    pub tolerance: f64,
    pub output: Option<String>,
    pub engine_version: String,
}

impl RunManifest {
    pub fn new(command: &str, model_spec: Option<&Path>, seed: Option<u64>, tolerance: f64) -> Self {
        RunManifest {
            command: command.to_string(),
            model_spec: model_spec.map(|p| p.display().to_string()),
            seed,
            tolerance,
            output: None,
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn with_output(mut self, output: &Path) -> Self {
        self.output = Some(output.display().to_string());
        self
    }

    fn csv_header(&self) -> String {
        let opt = |v: &Option<String>| v.clone().unwrap_or_else(|| "-".into());
        format!(
            "# command: {}\n# model_spec: {}\n# seed: {}\n# tolerance: {:e}\n# output: {}\n# engine_version: {}\n",
            self.command,
            opt(&self.model_spec),
            self.seed.map_or_else(|| "-".into(), |s| s.to_string()),
            self.tolerance,
            opt(&self.output),
            self.engine_version
        )
    }
}

/// `--out` if given, else `$INFOGEOM_OUT_DIR/<default_name>` if set.
pub fn resolve_output(out: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    match out {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)),
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    Ok(())
}

fn csv_to<W: Write, R: Serialize>(mut out: W, manifest: &RunManifest, rows: &[R]) -> Result<()> {
    out.write_all(manifest.csv_header().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv<R: Serialize>(path: &Path, manifest: &RunManifest, rows: &[R]) -> Result<()> {
    ensure_parent(path)?;
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    csv_to(file, manifest, rows)
}

/// Write CSV to `path`, or to stdout without one.
pub fn emit_csv<R: Serialize>(path: Option<&Path>, manifest: &RunManifest, rows: &[R]) -> Result<()> {
    match path {
        Some(p) => write_csv(p, manifest, rows),
        None => csv_to(std::io::stdout().lock(), manifest, rows),
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    payload: &'a T,
}

pub fn to_json<T: Serialize>(manifest: &RunManifest, payload: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { manifest, payload })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, manifest: &RunManifest, payload: &T) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, to_json(manifest, payload)?).with_context(|| format!("writing {}", path.display()))
}

/// Write JSON to `path`, or to stdout without one.
pub fn emit_json<T: Serialize>(path: Option<&Path>, manifest: &RunManifest, payload: &T) -> Result<()> {
    match path {
        Some(p) => write_json(p, manifest, payload),
        None => {
            print!("{}", to_json(manifest, payload)?);
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        x: f64,
        y: f64,
    }

    #[test]
    fn csv_carries_manifest_then_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        let m = RunManifest::new("test", None, Some(3), 1e-8).with_output(&p);
        write_csv(&p, &m, &[Row { x: 1.0, y: 2.5 }]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# command: test");
        assert_eq!(lines[2], "# seed: 3");
        assert_eq!(lines[6], "x,y");
        assert_eq!(lines[7], "1.0,2.5");
    }

    #[test]
    fn json_envelope_is_flat() {
        #[derive(Serialize)]
        struct P {
            value: f64,
        }
        let m = RunManifest::new("distance", None, None, 1e-8);
        let v: serde_json::Value = serde_json::from_str(&to_json(&m, &P { value: 1.5 }).unwrap()).unwrap();
        assert_eq!(v["value"], 1.5);
        assert_eq!(v["manifest"]["command"], "distance");
    }
}
