//! Run orchestration and the on-disk run directory.
//!
//! A run directory holds:
//!
//! | entry | contents |
//! |---|---|
//! | `manifest.json` | tool version, resolved config, operator roster, baseline, timing, status counts |
//! | `mutants.jsonl` | one [`Mutant`] per line, by ordinal |
//! | `outcomes.jsonl` | one [`MutantOutcome`] per line, by ordinal |
//! | `analysis.json` | the [`Analysis`]; byte-identical for identical inputs |
//! | `reports/` | rendered JSON, CSV and Markdown |
//!
//! Timestamps and wall times appear only in the manifest and outcomes, never
//! in `analysis.json` or `reports/`.

pub mod config;
pub mod render;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::analysis::{self, Analysis, AnalysisError, AnalysisInput, StatusCounts};
use crate::harness::{self, Baseline, HarnessError, MutantOutcome, RunConfig};
use crate::operators::{
    assign_ordinals, enumerate_operators, generate_mutants, read_mutants_jsonl, write_mutants_jsonl, Mutant, OperatorId,
};
use crate::source::{locate_sites, parse_source, scan_project, MutationSite, ScanError, SkippedFile, SourceFile};

pub use config::{ConfigError, ConfigFile, Format, Overrides, Settings};
pub use render::emit_report;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MUTANTS_FILE: &str = "mutants.jsonl";
pub const OUTCOMES_FILE: &str = "outcomes.jsonl";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const REPORTS_DIR: &str = "reports";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {message}", path.display())]
    Corrupt { path: PathBuf, message: String },
}

impl PipelineError {
    /// 1 for configuration, baseline and output-destination problems; 2 for
    /// internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Scan(_) | PipelineError::Io { .. } => 1,
            PipelineError::Harness(h) => h.exit_code(),
            PipelineError::Analysis(_) | PipelineError::Corrupt { .. } => 2,
        }
    }
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u64,
    pub generate_ms: u64,
    pub baseline_ms: u64,
    pub mutants_ms: u64,
    pub total_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub project: String,
    pub config: RunConfig,
    pub operators: Vec<OperatorId>,
    pub files_scanned: usize,
    pub files_skipped: Vec<SkippedFile>,
    pub baseline: Baseline,
    pub timing: Timing,
    pub counts: StatusCounts,
}

/// Everything generated from the sources before any build runs.
#[derive(Debug, Clone)]
pub struct Generated {
    pub files: Vec<SourceFile>,
    pub skipped: Vec<SkippedFile>,
    pub sites: Vec<MutationSite>,
    pub mutants: Vec<Mutant>,
}

pub fn enabled_operators(config: &RunConfig) -> Vec<OperatorId> {
    enumerate_operators(&config.operators).into_iter().map(|o| o.id).collect()
}

/// Scan, parse and mutate. Files that fail to parse are skipped with a
/// warning.
pub fn generate(config: &RunConfig) -> Result<Generated, PipelineError> {
    let scanned = scan_project(&config.project_root, &config.include, &config.exclude)?;
    let enabled = enabled_operators(config);
    let mut skipped = scanned.skipped;
    let mut sites = Vec::new();
    let mut files = Vec::new();
    for file in scanned.files {
        match parse_source(&file) {
            Ok(parsed) => {
                sites.extend(locate_sites(&parsed, &enabled));
                files.push(file);
            }
            Err(e) => {
                warn!("{e}; file skipped");
                skipped.push(SkippedFile { path: file.path.clone(), reason: e.to_string() });
            }
        }
    }
    let mut mutants = generate_mutants(&sites);
    assign_ordinals(&mut mutants);
    Ok(Generated { files, skipped, sites, mutants })
}

pub fn project_name(root: &Path) -> String {
    let canon = root.canonicalize().unwrap_or_else(|_| root.to_path_buf());
    canon.file_name().map_or_else(|| canon.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn write_jsonl<T>(
    path: &Path,
    items: &[T],
    write: impl Fn(&mut BufWriter<File>, &[T]) -> io::Result<()>,
) -> Result<(), PipelineError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_at(path))?);
    write(&mut w, items).and_then(|_| w.flush()).map_err(io_at(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    std::fs::write(path, s).map_err(io_at(path))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Corrupt { path: path.to_path_buf(), message: e.to_string() })
}

fn load_suppressions(path: Option<&Path>) -> Result<BTreeSet<String>, PipelineError> {
    match path {
        Some(p) => analysis::load_suppressions(p)
            .map_err(|source| PipelineError::Config(ConfigError::Read { path: p.to_path_buf(), source })),
        None => Ok(BTreeSet::new()),
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub analysis: Analysis,
    pub reports: Vec<PathBuf>,
}

/// The whole pipeline: generate, baseline, execute, analyze, report.
pub fn run(
    settings: &Settings,
    mut progress: impl FnMut(usize, usize, &MutantOutcome),
) -> Result<RunOutput, PipelineError> {
    let config = &settings.run;
    config.validate()?;
    let suppressed = load_suppressions(config.suppress.as_deref())?;
    let started_unix_ms = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64);
    let t0 = Instant::now();

    let generated = generate(config)?;
    let generate_ms = t0.elapsed().as_millis() as u64;
    info!("{} mutants from {} files", generated.mutants.len(), generated.files.len());

    let dir = &settings.out;
    std::fs::create_dir_all(dir).map_err(io_at(dir))?;
    write_jsonl(&dir.join(MUTANTS_FILE), &generated.mutants, |w, m| write_mutants_jsonl(w, m))?;

    let t1 = Instant::now();
    let baseline = harness::run_baseline(config)?;
    let baseline_ms = t1.elapsed().as_millis() as u64;
    info!("baseline: {} tests green in {} ms", baseline.tests.len(), baseline.wall_time_ms);

    let t2 = Instant::now();
    let total = generated.mutants.len();
    let mut done = 0;
    let outcomes = harness::run_all(config, &baseline, &generated.mutants, |o| {
        done += 1;
        progress(done, total, o);
    })?;
    let mutants_ms = t2.elapsed().as_millis() as u64;
    write_jsonl(&dir.join(OUTCOMES_FILE), &outcomes, |w, o| harness::write_outcomes_jsonl(w, o))?;

    let project = project_name(&config.project_root);
    let enabled = enabled_operators(config);
    let analysis = analysis::analyze(&AnalysisInput {
        project: &project,
        mutants: &generated.mutants,
        outcomes: &outcomes,
        inventory: &baseline.tests,
        suppressed: &suppressed,
        enabled: &enabled,
    })?;
    std::fs::write(dir.join(ANALYSIS_FILE), render::analysis_json(&analysis))
        .map_err(io_at(&dir.join(ANALYSIS_FILE)))?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        project,
        config: config.clone(),
        operators: enabled,
        files_scanned: generated.files.len(),
        files_skipped: generated.skipped,
        baseline,
        timing: Timing {
            started_unix_ms,
            generate_ms,
            baseline_ms,
            mutants_ms,
            total_ms: t0.elapsed().as_millis() as u64,
        },
        counts: analysis.breakdown.total,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    let reports_dir = dir.join(REPORTS_DIR);
    let reports = emit_report(&analysis, &settings.formats, &reports_dir, false).map_err(io_at(&reports_dir))?;
    Ok(RunOutput { dir: dir.clone(), manifest, analysis, reports })
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, PipelineError> {
    read_json(&dir.join(MANIFEST_FILE))
}

pub fn read_analysis(dir: &Path) -> Result<Analysis, PipelineError> {
    read_json(&dir.join(ANALYSIS_FILE))
}

/// Recompute `analysis.json` from the stored mutants and outcomes.
/// `suppress` replaces the suppression list recorded in the manifest.
pub fn analyze_dir(dir: &Path, suppress: Option<&Path>) -> Result<Analysis, PipelineError> {
    let manifest = read_manifest(dir)?;
    let mpath = dir.join(MUTANTS_FILE);
    let mutants = read_mutants_jsonl(BufReader::new(File::open(&mpath).map_err(io_at(&mpath))?))
        .map_err(|e| PipelineError::Corrupt { path: mpath.clone(), message: e.to_string() })?;
    let opath = dir.join(OUTCOMES_FILE);
    let outcomes = harness::read_outcomes_jsonl(BufReader::new(File::open(&opath).map_err(io_at(&opath))?))
        .map_err(|e| PipelineError::Corrupt { path: opath.clone(), message: e.to_string() })?;
    let suppressed = load_suppressions(suppress.or(manifest.config.suppress.as_deref()))?;
    let analysis = analysis::analyze(&AnalysisInput {
        project: &manifest.project,
        mutants: &mutants,
        outcomes: &outcomes,
        inventory: &manifest.baseline.tests,
        suppressed: &suppressed,
        enabled: &manifest.operators,
    })?;
    let path = dir.join(ANALYSIS_FILE);
    std::fs::write(&path, render::analysis_json(&analysis)).map_err(io_at(&path))?;
    Ok(analysis)
}

/// Render stored analysis into `dest` (default: the run's `reports/`).
pub fn report_dir(
    dir: &Path,
    formats: &[Format],
    dest: Option<&Path>,
    show_killing: bool,
) -> Result<Vec<PathBuf>, PipelineError> {
    let analysis = read_analysis(dir)?;
    let dest = dest.map_or_else(|| dir.join(REPORTS_DIR), Path::to_path_buf);
    emit_report(&analysis, formats, &dest, show_killing).map_err(io_at(&dest))
}
