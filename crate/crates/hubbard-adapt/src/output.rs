//! Number formatting and crash-safe artifact directories.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::RunError;

/// A float written to JSON with 17 significant digits; non-finite values
/// become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub fn f17s(xs: &[f64]) -> Vec<F17> {
    xs.iter().copied().map(F17).collect()
}

/// 12 significant digits for CSV cells.
pub fn csv_number(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    text
}

/// Named text files produced by one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn push(&mut self, name: impl Into<String>, content: String) {
        self.files.push((name.into(), content));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// Writes every file into a sibling temp directory and renames it onto
    /// `dest`. An existing `dest` is replaced only if it holds a previous
    /// run (a `result.json` or `report.json`).
    pub fn commit(&self, dest: &Path) -> Result<(), RunError> {
        let staged = stage_dir(dest)?;
        for (name, content) in &self.files {
            let path = staged.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| RunError::io(parent, e))?;
            }
            fs::write(&path, content).map_err(|e| RunError::io(&path, e))?;
        }
        swap_in(&staged, dest)
    }
}

fn stage_dir(dest: &Path) -> Result<PathBuf, RunError> {
    let name = dest
        .file_name()
        .ok_or_else(|| RunError::Config(format!("output directory `{}` has no final component", dest.display())))?;
    let parent = match dest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| RunError::io(&parent, e))?;
    let staged = parent.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    if staged.exists() {
        fs::remove_dir_all(&staged).map_err(|e| RunError::io(&staged, e))?;
    }
    fs::create_dir(&staged).map_err(|e| RunError::io(&staged, e))?;
    Ok(staged)
}

fn swap_in(staged: &Path, dest: &Path) -> Result<(), RunError> {
    if dest.exists() {
        let previous_run = dest.join("result.json").exists() || dest.join("report.json").exists();
        let empty = dest.read_dir().map(|mut d| d.next().is_none()).unwrap_or(false);
        if !(previous_run || empty) {
            let _ = fs::remove_dir_all(staged);
            return Err(RunError::Config(format!(
                "output directory `{}` exists and does not hold a previous run",
                dest.display()
            )));
        }
        fs::remove_dir_all(dest).map_err(|e| RunError::io(dest, e))?;
    }
    fs::rename(staged, dest).map_err(|e| RunError::io(dest, e))
}
