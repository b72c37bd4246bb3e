//! Private project copies, one per worker.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use globset::GlobSet;
use walkdir::WalkDir;

/// A full copy of the project in a temporary directory. Dropping it removes
/// the copy.
pub struct Workspace {
    dir: tempfile::TempDir,
    source: PathBuf,
}

impl Workspace {
    /// Copy `source` into a fresh temporary directory, skipping any entry
    /// under one of `skip` (absolute paths, e.g. an output directory that
    /// lives inside the project).
    pub fn create(source: &Path, skip: &[PathBuf]) -> io::Result<Workspace> {
        let dir = tempfile::Builder::new().prefix("nullforge-ws-").tempdir()?;
        let walker = WalkDir::new(source)
            .follow_links(false)
            .into_iter()
            .filter_entry(|e| !skip.iter().any(|s| e.path().starts_with(s)));
        for entry in walker {
            let entry = entry.map_err(io::Error::other)?;
            let rel = entry.path().strip_prefix(source).expect("walk stays under source");
            let dest = dir.path().join(rel);
            let ft = entry.file_type();
            if ft.is_dir() {
                fs::create_dir_all(&dest)?;
            } else if ft.is_symlink() {
                std::os::unix::fs::symlink(fs::read_link(entry.path())?, &dest)?;
            } else {
                fs::copy(entry.path(), &dest)?;
            }
        }
        Ok(Workspace { dir, source: source.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        self.dir.path()
    }

    pub fn write_file(&self, rel: &str, contents: &str) -> io::Result<()> {
        fs::write(self.root().join(rel), contents)
    }

    /// Re-copy one file from the original project.
    pub fn restore_file(&self, rel: &str) -> io::Result<()> {
        fs::copy(self.source.join(rel), self.root().join(rel)).map(|_| ())
    }

    /// Workspace-relative paths of files matching `reports`, sorted.
    pub fn find_reports(&self, reports: &GlobSet) -> io::Result<Vec<PathBuf>> {
        let mut found = Vec::new();
        for entry in WalkDir::new(self.root()).sort_by_file_name() {
            let entry = entry.map_err(io::Error::other)?;
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry.path().strip_prefix(self.root()).expect("walk stays under root");
            if reports.is_match(rel) {
                found.push(rel.to_path_buf());
            }
        }
        Ok(found)
    }

    pub fn clear_reports(&self, reports: &GlobSet) -> io::Result<()> {
        for rel in self.find_reports(reports)? {
            fs::remove_file(self.root().join(rel))?;
        }
        Ok(())
    }
}
