//! The `nullforge.toml` project configuration.
//!
//! ```toml
//! [project]
//! root = "."                       # relative to this file
//! include = ["src/main/java/**/*.java"]
//! exclude = ["**/generated/**"]
//!
//! [build]
//! compile = ["mvn", "-q", "compile"]   # optional; failure means stillborn
//! command = ["mvn", "-q", "test"]
//! reports = ["target/surefire-reports/TEST-*.xml"]
//!
//! [run]
//! operators = ["all"]              # all | traditional | null-type | operator ids
//! jobs = 4
//! timeout_factor = 10.0
//! timeout_floor_secs = 30
//! suppress = "equivalent-mutants.txt"
//! formats = ["json", "csv", "md"]
//! out = "nullforge-out"
//! ```
//!
//! Every key is optional; `run` needs `build.command`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::harness::{RunConfig, DEFAULT_REPORT_GLOB, DEFAULT_TIMEOUT_FACTOR};
use crate::operators::Selection;

pub const DEFAULT_CONFIG_FILE: &str = "nullforge.toml";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub project: ProjectSection,
    #[serde(default)]
    pub build: BuildSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectSection {
    pub root: Option<PathBuf>,
    pub include: Option<Vec<String>>,
    pub exclude: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildSection {
    pub command: Option<Vec<String>>,
    pub compile: Option<Vec<String>>,
    pub reports: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub operators: Option<Vec<String>>,
    pub jobs: Option<usize>,
    pub timeout_factor: Option<f64>,
    pub timeout_floor_secs: Option<f64>,
    pub suppress: Option<PathBuf>,
    pub formats: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Md,
}

impl std::str::FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Md),
            other => Err(ConfigError::Invalid(format!("unknown report format {other:?} (expected json, csv or md)"))),
        }
    }
}

pub fn parse_formats<S: AsRef<str>>(items: &[S]) -> Result<Vec<Format>, ConfigError> {
    let mut out: Vec<Format> = Vec::new();
    for item in items.iter().flat_map(|s| s.as_ref().split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        out.push(item.parse()?);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub project: Option<PathBuf>,
    pub operators: Option<Vec<String>>,
    pub jobs: Option<usize>,
    pub timeout_factor: Option<f64>,
    pub suppress: Option<PathBuf>,
    pub formats: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

/// A fully resolved run: harness settings plus reporting choices.
#[derive(Debug, Clone)]
pub struct Settings {
    pub run: RunConfig,
    pub formats: Vec<Format>,
    pub out: PathBuf,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Merge file and command line. Paths in the file are relative to the file's
/// directory; paths on the command line are relative to `cwd`.
/// `default_out` applies when neither names an output directory.
pub fn resolve_settings(
    file: &ConfigFile,
    file_dir: &Path,
    cli: &Overrides,
    cwd: &Path,
    default_out: &Path,
) -> Result<Settings, ConfigError> {
    let root = match (&cli.project, &file.project.root) {
        (Some(p), _) => resolve(cwd, p),
        (None, Some(p)) => resolve(file_dir, p),
        (None, None) => file_dir.to_path_buf(),
    };
    let command = file.build.command.clone().unwrap_or_default();
    let mut run = RunConfig::new(root, command);
    run.compile_command = file.build.compile.clone();
    run.report_globs = file.build.reports.clone().unwrap_or_else(|| vec![DEFAULT_REPORT_GLOB.to_string()]);
    if let Some(i) = &file.project.include {
        run.include = i.clone();
    }
    if let Some(e) = &file.project.exclude {
        run.exclude = e.clone();
    }
    let ops = cli.operators.clone().or_else(|| file.run.operators.clone()).unwrap_or_else(|| vec!["all".into()]);
    run.operators = Selection::parse(&ops).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    run.jobs =
        cli.jobs.or(file.run.jobs).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    run.timeout_factor = cli.timeout_factor.or(file.run.timeout_factor).unwrap_or(DEFAULT_TIMEOUT_FACTOR);
    if let Some(secs) = file.run.timeout_floor_secs {
        if !(secs.is_finite() && secs >= 0.0) {
            return Err(ConfigError::Invalid(format!("timeout_floor_secs must be non-negative, got {secs}")));
        }
        run.timeout_floor = Duration::from_secs_f64(secs);
    }
    run.suppress = match (&cli.suppress, &file.run.suppress) {
        (Some(p), _) => Some(resolve(cwd, p)),
        (None, Some(p)) => Some(resolve(file_dir, p)),
        (None, None) => None,
    };
    let formats = match (&cli.formats, &file.run.formats) {
        (Some(f), _) | (None, Some(f)) => parse_formats(f)?,
        (None, None) => vec![Format::Json, Format::Csv, Format::Md],
    };
    let out = match (&cli.out, &file.run.out) {
        (Some(p), _) => resolve(cwd, p),
        (None, Some(p)) => resolve(file_dir, p),
        (None, None) => resolve(cwd, default_out),
    };
    run.copy_exclude = vec![out.clone()];
    Ok(Settings { run, formats, out })
}
