//! Mutant execution: baseline verification, per-mutant builds in isolated
//! workspaces, and outcome classification from JUnit-XML reports.

mod process;
mod report;
mod workspace;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use globset::{Glob, GlobSet, GlobSetBuilder};
use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::operators::{apply_mutant, Mutant, OperatorId, Selection};

pub use process::{run_command, CommandResult, Exit, Invocation};
pub use report::{parse_test_report, ReportError, TestResult, Verdict};
pub use workspace::Workspace;

pub const DEFAULT_TIMEOUT_FACTOR: f64 = 10.0;
pub const DEFAULT_TIMEOUT_FLOOR: Duration = Duration::from_secs(30);
pub const DEFAULT_REPORT_GLOB: &str = "**/TEST-*.xml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub project_root: PathBuf,
    /// Builds the project and runs its tests; must leave JUnit-XML reports.
    pub build_command: Vec<String>,
    /// Optional compile-only step run before `build_command`. When present,
    /// its failure marks a mutant stillborn.
    pub compile_command: Option<Vec<String>>,
    /// Workspace-relative globs locating test reports.
    pub report_globs: Vec<String>,
    pub timeout_factor: f64,
    /// Lower bound on the per-mutant timeout.
    #[serde(with = "duration_ms")]
    pub timeout_floor: Duration,
    pub jobs: usize,
    pub operators: Selection,
    pub suppress: Option<PathBuf>,
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    /// Absolute paths left out of workspace copies.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub copy_exclude: Vec<PathBuf>,
}

mod duration_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

impl RunConfig {
    pub fn new(project_root: impl Into<PathBuf>, build_command: Vec<String>) -> Self {
        RunConfig {
            project_root: project_root.into(),
            build_command,
            compile_command: None,
            report_globs: vec![DEFAULT_REPORT_GLOB.to_string()],
            timeout_factor: DEFAULT_TIMEOUT_FACTOR,
            timeout_floor: DEFAULT_TIMEOUT_FLOOR,
            jobs: 1,
            operators: Selection::All,
            suppress: None,
            include: crate::source::DEFAULT_INCLUDE.iter().map(|s| s.to_string()).collect(),
            exclude: crate::source::DEFAULT_EXCLUDE.iter().map(|s| s.to_string()).collect(),
            copy_exclude: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !self.timeout_factor.is_finite() || self.timeout_factor < 1.0 {
            return bad(format!("timeout factor must be at least 1, got {}", self.timeout_factor));
        }
        if self.jobs < 1 {
            return bad("worker count must be at least 1".into());
        }
        if self.build_command.is_empty() {
            return bad("no build command configured ([build] command)".into());
        }
        if self.compile_command.as_ref().is_some_and(|c| c.is_empty()) {
            return bad("compile command is empty".into());
        }
        if self.report_globs.is_empty() {
            return bad("no test report glob configured".into());
        }
        if !self.project_root.is_dir() {
            return bad(format!("project root {} is not a directory", self.project_root.display()));
        }
        report_globset(&self.report_globs)?;
        Ok(())
    }

    /// Per-mutant time budget.
    pub fn timeout_for(&self, baseline: &Baseline) -> Duration {
        let scaled = Duration::from_millis(baseline.wall_time_ms).mul_f64(self.timeout_factor);
        scaled.max(self.timeout_floor)
    }
}

fn report_globset(globs: &[String]) -> Result<GlobSet, HarnessError> {
    let mut b = GlobSetBuilder::new();
    for g in globs {
        b.add(Glob::new(g).map_err(|e| HarnessError::Config(format!("invalid report glob {g:?}: {e}")))?);
    }
    b.build().map_err(|e| HarnessError::Config(e.to_string()))
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("baseline build failed ({exit:?}):\n{output}")]
    BaselineBuild { exit: Exit, output: String },
    #[error("baseline has failing tests: {}", failures.join(", "))]
    BaselineRed { failures: Vec<String> },
    #[error("no test reports matched {globs:?} after the baseline build")]
    NoReports { globs: Vec<String> },
    #[error("baseline report {path}: {source}")]
    BaselineReport { path: String, source: ReportError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl HarnessError {
    /// 1 for configuration and baseline problems, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io(_) => 2,
            _ => 1,
        }
    }
}

/// The green test inventory of the unmutated project.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Baseline {
    /// Non-skipped test ids, sorted.
    pub tests: Vec<String>,
    pub skipped: usize,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Killed,
    Survived,
    Stillborn,
    Timeout,
    Stale,
}

impl Status {
    pub const ALL: [Status; 5] = [Status::Killed, Status::Survived, Status::Stillborn, Status::Timeout, Status::Stale];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Killed => "killed",
            Status::Survived => "survived",
            Status::Stillborn => "stillborn",
            Status::Timeout => "timeout",
            Status::Stale => "stale",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantOutcome {
    pub mutant_id: String,
    pub ordinal: usize,
    pub operator: OperatorId,
    pub status: Status,
    /// Sorted ids of failing tests.
    pub killing_tests: Vec<String>,
    /// False when the kill was decided from the exit code alone.
    pub kill_set_resolved: bool,
    pub wall_time_ms: u64,
}

impl MutantOutcome {
    fn new(mutant: &Mutant, status: Status, elapsed: Duration) -> Self {
        MutantOutcome {
            mutant_id: mutant.id.clone(),
            ordinal: mutant.ordinal,
            operator: mutant.operator,
            status,
            killing_tests: Vec::new(),
            kill_set_resolved: false,
            wall_time_ms: elapsed.as_millis() as u64,
        }
    }
}

struct Collected {
    results: BTreeMap<String, Verdict>,
    bad_files: Vec<(String, ReportError)>,
    files: usize,
}

fn collect_reports(ws: &Workspace, globs: &GlobSet) -> io::Result<Collected> {
    let mut c = Collected { results: BTreeMap::new(), bad_files: Vec::new(), files: 0 };
    for rel in ws.find_reports(globs)? {
        c.files += 1;
        let bytes = std::fs::read(ws.root().join(&rel))?;
        let name = rel.to_string_lossy().into_owned();
        match parse_test_report(&bytes) {
            Ok(results) => {
                for r in results {
                    c.results.insert(r.id, r.verdict);
                }
            }
            Err(e) => c.bad_files.push((name, e)),
        }
    }
    Ok(c)
}

fn env_for(id: &str) -> Vec<(String, String)> {
    vec![("MUTANT_ID".to_string(), id.to_string())]
}

/// Build and test the unmutated project in a private copy.
pub fn run_baseline(config: &RunConfig) -> Result<Baseline, HarnessError> {
    config.validate()?;
    let globs = report_globset(&config.report_globs)?;
    let ws = Workspace::create(&config.project_root, &config.copy_exclude)?;
    ws.clear_reports(&globs)?;
    let env = env_for("baseline");
    let start = Instant::now();
    if let Some(compile) = &config.compile_command {
        let r = run_command(&Invocation { argv: compile, cwd: ws.root(), env: &env, timeout: None })?;
        if !r.exit.success() {
            return Err(HarnessError::BaselineBuild { exit: r.exit, output: r.output });
        }
    }
    let r = run_command(&Invocation { argv: &config.build_command, cwd: ws.root(), env: &env, timeout: None })?;
    let wall = start.elapsed();
    let collected = collect_reports(&ws, &globs)?;
    if collected.files == 0 {
        if !r.exit.success() {
            return Err(HarnessError::BaselineBuild { exit: r.exit, output: r.output });
        }
        return Err(HarnessError::NoReports { globs: config.report_globs.clone() });
    }
    if let Some((path, source)) = collected.bad_files.into_iter().next() {
        return Err(HarnessError::BaselineReport { path, source });
    }
    let failures: Vec<String> =
        collected.results.iter().filter(|(_, v)| v.is_failure()).map(|(k, _)| k.clone()).collect();
    if !failures.is_empty() {
        return Err(HarnessError::BaselineRed { failures });
    }
    if !r.exit.success() {
        return Err(HarnessError::BaselineBuild { exit: r.exit, output: r.output });
    }
    let skipped = collected.results.values().filter(|v| **v == Verdict::Skipped).count();
    let tests = collected.results.into_iter().filter(|(_, v)| *v == Verdict::Pass).map(|(k, _)| k).collect();
    Ok(Baseline { tests, skipped, wall_time_ms: wall.as_millis() as u64 })
}

/// Shared, read-only state for executing mutants against one baseline.
pub struct Executor<'a> {
    config: &'a RunConfig,
    baseline: &'a Baseline,
    inventory: BTreeSet<&'a str>,
    globs: GlobSet,
    timeout: Duration,
    originals: BTreeMap<String, String>,
}

impl<'a> Executor<'a> {
    /// Loads the original text of every file a mutant in `mutants` touches.
    pub fn new(config: &'a RunConfig, baseline: &'a Baseline, mutants: &[Mutant]) -> Result<Self, HarnessError> {
        let globs = report_globset(&config.report_globs)?;
        let mut originals = BTreeMap::new();
        for m in mutants {
            if !originals.contains_key(&m.file) {
                let text = std::fs::read_to_string(config.project_root.join(&m.file))?;
                originals.insert(m.file.clone(), text);
            }
        }
        Ok(Executor {
            config,
            baseline,
            inventory: baseline.tests.iter().map(String::as_str).collect(),
            globs,
            timeout: config.timeout_for(baseline),
            originals,
        })
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// Run one mutant in `ws`. The mutated file is restored before returning,
    /// whatever the outcome.
    pub fn execute(&self, ws: &Workspace, mutant: &Mutant) -> io::Result<MutantOutcome> {
        let start = Instant::now();
        let Some(original) = self.originals.get(&mutant.file) else {
            return Ok(MutantOutcome::new(mutant, Status::Stale, start.elapsed()));
        };
        let mutated = match apply_mutant(original, mutant) {
            Ok(t) => t,
            Err(e) => {
                warn!("{e}");
                return Ok(MutantOutcome::new(mutant, Status::Stale, start.elapsed()));
            }
        };
        ws.write_file(&mutant.file, &mutated)?;
        let result = self.build_and_classify(ws, mutant, start);
        let restored = ws.restore_file(&mutant.file);
        let outcome = result?;
        restored?;
        Ok(outcome)
    }

    fn build_and_classify(&self, ws: &Workspace, mutant: &Mutant, start: Instant) -> io::Result<MutantOutcome> {
        ws.clear_reports(&self.globs)?;
        let env = env_for(&mutant.id);
        let remaining = || self.timeout.saturating_sub(start.elapsed());
        if let Some(compile) = &self.config.compile_command {
            let r = run_command(&Invocation { argv: compile, cwd: ws.root(), env: &env, timeout: Some(remaining()) })?;
            match r.exit {
                Exit::TimedOut => return Ok(MutantOutcome::new(mutant, Status::Timeout, start.elapsed())),
                e if !e.success() => {
                    debug!("{} stillborn:\n{}", mutant.id, r.output);
                    return Ok(MutantOutcome::new(mutant, Status::Stillborn, start.elapsed()));
                }
                _ => {}
            }
        }
        let r = run_command(&Invocation {
            argv: &self.config.build_command,
            cwd: ws.root(),
            env: &env,
            timeout: Some(remaining()),
        })?;
        if r.exit == Exit::TimedOut {
            return Ok(MutantOutcome::new(mutant, Status::Timeout, start.elapsed()));
        }
        let collected = collect_reports(ws, &self.globs)?;
        let mut out = MutantOutcome::new(mutant, Status::Survived, start.elapsed());
        let failed = !r.exit.success();

        if collected.files == 0 || !collected.bad_files.is_empty() {
            if collected.files == 0 && failed {
                warn!("{}: build failed without test reports; counted as killed", mutant.id);
            }
            for (path, e) in &collected.bad_files {
                warn!("{}: report {path}: {e}; outcome taken from exit code", mutant.id);
            }
            if collected.files == 0 && !failed {
                warn!("{}: build succeeded without test reports; counted as survived", mutant.id);
            }
            out.status = if failed { Status::Killed } else { Status::Survived };
            return Ok(out);
        }

        let mut killing = Vec::new();
        for (id, verdict) in &collected.results {
            if !verdict.is_failure() {
                continue;
            }
            if self.inventory.contains(id.as_str()) {
                killing.push(id.clone());
            } else {
                warn!("{}: failing test {id} is not in the baseline inventory; ignored", mutant.id);
            }
        }
        if !killing.is_empty() {
            out.status = Status::Killed;
            out.killing_tests = killing;
            out.kill_set_resolved = true;
        } else if failed {
            warn!("{}: build failed with all tests passing; counted as killed", mutant.id);
            out.status = Status::Killed;
        } else {
            let missing = self.baseline.tests.iter().filter(|t| !collected.results.contains_key(*t)).count();
            if missing > 0 {
                warn!("{}: {missing} baseline tests absent from reports", mutant.id);
            }
        }
        Ok(out)
    }
}

/// Execute one mutant in a throwaway workspace.
pub fn execute_mutant(config: &RunConfig, baseline: &Baseline, mutant: &Mutant) -> Result<MutantOutcome, HarnessError> {
    let exec = Executor::new(config, baseline, std::slice::from_ref(mutant))?;
    let ws = Workspace::create(&config.project_root, &config.copy_exclude)?;
    Ok(exec.execute(&ws, mutant)?)
}

/// Execute every mutant on `config.jobs` workers, each with its own project
/// copy. `progress` sees outcomes in completion order; the result is sorted
/// by ordinal.
pub fn run_all(
    config: &RunConfig,
    baseline: &Baseline,
    mutants: &[Mutant],
    mut progress: impl FnMut(&MutantOutcome),
) -> Result<Vec<MutantOutcome>, HarnessError> {
    let exec = Executor::new(config, baseline, mutants)?;
    let workers = config.jobs.clamp(1, mutants.len().max(1));
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<io::Result<MutantOutcome>>();
    let mut outcomes = Vec::with_capacity(mutants.len());
    let mut first_error = None;

    thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (exec, next, stop) = (&exec, &next, &stop);
            scope.spawn(move || {
                let ws = match Workspace::create(&config.project_root, &config.copy_exclude) {
                    Ok(ws) => ws,
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        return;
                    }
                };
                while !stop.load(Ordering::Relaxed) {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(m) = mutants.get(i) else { break };
                    if tx.send(exec.execute(&ws, m)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
        for r in rx {
            match r {
                Ok(o) => {
                    progress(&o);
                    outcomes.push(o);
                }
                Err(e) => {
                    stop.store(true, Ordering::Relaxed);
                    first_error.get_or_insert(e);
                }
            }
        }
    });
    if let Some(e) = first_error {
        return Err(e.into());
    }
    outcomes.sort_by_key(|o| o.ordinal);
    Ok(outcomes)
}

pub fn write_outcomes_jsonl<W: Write>(mut w: W, outcomes: &[MutantOutcome]) -> io::Result<()> {
    for o in outcomes {
        serde_json::to_writer(&mut w, o)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_outcomes_jsonl<R: BufRead>(r: R) -> io::Result<Vec<MutantOutcome>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let o = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("outcomes line {}: {e}", n + 1)))?;
        out.push(o);
    }
    Ok(out)
}

/// Project-relative display form of `path`.
pub fn relative_to(path: &Path, root: &Path) -> String {
    path.strip_prefix(root).unwrap_or(path).display().to_string()
}
