//! Java source model: project scanning, a restricted Java parser, and
//! mutation-site location.

pub mod lexer;
pub mod parser;
pub mod sites;

use std::fmt;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use log::warn;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

pub use parser::{parse_source, MethodContext, Param, ParseError, ParsedFile};
pub use sites::{locate_sites, MutationSite, SiteKind};

/// Half-open byte range `[start, end)` into a file's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// A production source file, with precomputed line starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    /// Project-relative path using `/` separators.
    pub path: String,
    pub text: String,
    line_index: Vec<usize>,
}

impl SourceFile {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let mut line_index = vec![0];
        line_index.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        SourceFile { path: path.into(), text, line_index }
    }

    pub fn line_index(&self) -> &[usize] {
        &self.line_index
    }

    /// 1-based line and column (columns count chars, not bytes).
    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        let line = self.line_index.partition_point(|&s| s <= offset);
        let start = self.line_index[line - 1];
        let col = self.text[start..offset].chars().count() + 1;
        (line, col)
    }

    pub fn line_text(&self, line: usize) -> &str {
        let start = self.line_index[line - 1];
        let end = self.line_index.get(line).copied().unwrap_or(self.text.len());
        self.text[start..end].trim_end_matches(['\n', '\r'])
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("cannot read project root {path}: {source}")]
    Root { path: PathBuf, source: std::io::Error },
    #[error("invalid glob pattern {pattern:?}: {source}")]
    Glob { pattern: String, source: globset::Error },
    #[error("walking {path}: {source}")]
    Walk { path: PathBuf, source: walkdir::Error },
}

pub const DEFAULT_INCLUDE: &[&str] = &["**/*.java"];
pub const DEFAULT_EXCLUDE: &[&str] = &["**/src/test/**", "**/test/**"];

/// Files that were found but could not be used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFile {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ScanResult {
    pub files: Vec<SourceFile>,
    pub skipped: Vec<SkippedFile>,
}

fn build_globset(patterns: &[String]) -> Result<GlobSet, ScanError> {
    let mut builder = GlobSetBuilder::new();
    for pattern in patterns {
        let glob = Glob::new(pattern).map_err(|source| ScanError::Glob { pattern: pattern.clone(), source })?;
        builder.add(glob);
    }
    builder.build().map_err(|source| ScanError::Glob { pattern: patterns.join(","), source })
}

/// Collect the `.java` files under `root` that match `include` and do not
/// match `exclude`, sorted by project-relative path.
///
/// Relative paths are matched both bare and with a leading `/`, so a pattern
/// such as `**/test/**` also excludes a top-level `test/` directory.
pub fn scan_project(root: &Path, include: &[String], exclude: &[String]) -> Result<ScanResult, ScanError> {
    std::fs::read_dir(root).map_err(|source| ScanError::Root { path: root.to_path_buf(), source })?;
    let include = build_globset(include)?;
    let exclude = build_globset(exclude)?;
    let mut result = ScanResult::default();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|source| ScanError::Walk { path: root.to_path_buf(), source })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).expect("walkdir stays under root");
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        if !rel.ends_with(".java") {
            continue;
        }
        let rooted = format!("/{rel}");
        if !(include.is_match(&rel) || include.is_match(&rooted)) || exclude.is_match(&rel) || exclude.is_match(&rooted)
        {
            continue;
        }
        match std::fs::read(entry.path()) {
            Ok(bytes) => match String::from_utf8(bytes) {
                Ok(text) => result.files.push(SourceFile::new(rel, text)),
                Err(_) => {
                    warn!("{rel}: not valid UTF-8, skipped");
                    result.skipped.push(SkippedFile { path: rel, reason: "invalid UTF-8".into() });
                }
            },
            Err(e) => {
                warn!("{rel}: {e}, skipped");
                result.skipped.push(SkippedFile { path: rel, reason: e.to_string() });
            }
        }
    }
    result.files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(result)
}

/// `scan_project` with the default include/exclude patterns.
pub fn scan_project_default(root: &Path) -> Result<ScanResult, ScanError> {
    let include: Vec<String> = DEFAULT_INCLUDE.iter().map(|s| s.to_string()).collect();
    let exclude: Vec<String> = DEFAULT_EXCLUDE.iter().map(|s| s.to_string()).collect();
    scan_project(root, &include, &exclude)
}
