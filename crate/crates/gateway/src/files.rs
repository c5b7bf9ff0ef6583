//! Project and portfolio files.
//!
//! Files are written in canonical form: object keys sorted, lists in id
//! order, floating-point numbers rounded to 12 significant digits, two-space
//! indentation and a trailing newline. Equal projects therefore produce
//! byte-identical files, and loading then saving a canonical file reproduces
//! it exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use munidss_core::{validate_project, DocumentRecord, Project};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::error::{GatewayError, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Significant digits kept for floating-point values on disk and in CSV.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    pub format_version: u32,
    pub project: Project,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioFile {
    pub format_version: u32,
    pub documents: Vec<DocumentRecord>,
}

pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Shortest decimal rendering of `x` rounded to 12 significant digits.
pub fn format_number(x: f64) -> String {
    let r = round_significant(x);
    if r == 0.0 {
        return "0".to_owned();
    }
    r.to_string()
}

fn canonical_value(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut sorted = Map::new();
            for (k, v) in entries {
                sorted.insert(k, canonical_value(v));
            }
            Value::Object(sorted)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical_value).collect()),
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round_significant(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        other => other,
    }
}

/// Canonical JSON text of any serializable value.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let value = canonical_value(serde_json::to_value(value)?);
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

/// Parses a project file without checking project invariants.
pub fn parse_project(text: &str) -> Result<Project> {
    let file: ProjectFile = serde_json::from_str(text)?;
    if file.format_version != FORMAT_VERSION {
        return Err(GatewayError::UnsupportedVersion(file.format_version));
    }
    Ok(file.project)
}

/// Parses and validates a project file. The returned project has its lists
/// in id order.
pub fn load_project(text: &str) -> Result<Project> {
    let mut project = parse_project(text)?;
    let report = validate_project(&project);
    if !report.is_valid() {
        return Err(GatewayError::Invalid(report));
    }
    project.sort_lists();
    Ok(project)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| GatewayError::io(path, e))
}

pub fn load_project_path(path: &Path) -> Result<Project> {
    load_project(&read_text(path)?)
}

/// Canonical file contents for a valid project.
pub fn project_to_string(project: &Project) -> Result<String> {
    let report = validate_project(project);
    if !report.is_valid() {
        return Err(GatewayError::Invalid(report));
    }
    let mut project = project.clone();
    project.sort_lists();
    to_canonical_json(&ProjectFile {
        format_version: FORMAT_VERSION,
        project,
    })
}

/// Writes the canonical file through a temporary file in the same
/// directory and an atomic rename, so readers see either the old or the new
/// bytes. Invalid projects are rejected before anything is written.
pub fn save_project(project: &Project, destination: &Path) -> Result<()> {
    let text = project_to_string(project)?;
    write_atomic(destination, text.as_bytes())
}

pub(crate) fn write_atomic(destination: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match destination.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| GatewayError::io(dir, e))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| GatewayError::io(tmp.path(), e))?;
    tmp.persist(destination)
        .map_err(|e| GatewayError::io(destination, e.error))?;
    Ok(())
}

pub fn parse_portfolio(text: &str) -> Result<Vec<DocumentRecord>> {
    let file: PortfolioFile = serde_json::from_str(text)?;
    if file.format_version != FORMAT_VERSION {
        return Err(GatewayError::UnsupportedVersion(file.format_version));
    }
    Ok(file.documents)
}
