//! Helpers shared by the integration tests: fixture runs and brute-force
//! oracles for subsumption.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;

use nullforge::analysis::KillMatrix;
use nullforge::report::config::{resolve_settings, ConfigFile, Overrides};
use nullforge::report::{self, PipelineError, RunOutput};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn on_path(tool: &str) -> bool {
    Command::new("sh").arg("-c").arg(format!("command -v {tool}")).output().is_ok_and(|o| o.status.success())
}

/// Whether the Java fixtures can build here: a JDK on PATH, or the toolchain
/// installed by tools/setup-java-toolchain.sh.
pub fn java_toolchain() -> Result<(), String> {
    if on_path("javac") && on_path("java") {
        return Ok(());
    }
    let dir = std::env::var_os("NULLFORGE_TOOLCHAIN")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| Path::new(&h).join(".cache/nullforge/toolchain")))
        .ok_or("HOME is not set")?;
    for need in ["java-runtime/bin/java", "janino.jar", "commons-compiler.jar"] {
        if !dir.join(need).is_file() {
            return Err(format!(
                "no JDK on PATH and {} is missing; run tools/setup-java-toolchain.sh",
                dir.join(need).display()
            ));
        }
    }
    Ok(())
}

/// Run a fixture configuration end to end into `out`.
pub fn run_fixture(config: &Path, out: &Path) -> Result<RunOutput, PipelineError> {
    let file = ConfigFile::load(config)?;
    let dir = config.parent().expect("config has a parent");
    let overrides = Overrides { out: Some(out.to_path_buf()), ..Default::default() };
    let settings = resolve_settings(&file, dir, &overrides, dir, Path::new("nullforge-out"))?;
    report::run(&settings, |_, _, _| {})
}

/// Kill set of row `m`, one test column at a time.
pub fn kill_set(matrix: &KillMatrix, m: usize) -> BTreeSet<usize> {
    (0..matrix.tests.len()).filter(|&t| matrix.kills(t, m)).collect()
}

/// All ordered pairs `(a, b)`, `a != b`, where `a` is killed and every test
/// killing `a` also kills `b`.
pub fn oracle_edges(matrix: &KillMatrix) -> Vec<(String, String)> {
    let n = matrix.len();
    let mut out = Vec::new();
    for a in 0..n {
        let ka = kill_set(matrix, a);
        if ka.is_empty() {
            continue;
        }
        for b in 0..n {
            if a != b && ka.iter().all(|&t| matrix.kills(t, b)) {
                out.push((matrix.mutants[a].clone(), matrix.mutants[b].clone()));
            }
        }
    }
    out.sort();
    out
}

/// Minimum subsuming set by exhaustive search over subsets of killed rows:
/// the smallest sets such that every killed row is subsumed by a member.
/// All such sets pick the same kill sets, so the answer is made canonical by
/// taking the smallest id among rows sharing each chosen kill set.
pub fn oracle_subsuming(matrix: &KillMatrix) -> Vec<String> {
    let killed: Vec<usize> = (0..matrix.len()).filter(|&m| !kill_set(matrix, m).is_empty()).collect();
    if killed.is_empty() {
        return Vec::new();
    }
    assert!(killed.len() <= 16, "exhaustive oracle limited to 16 killed rows");
    let sets: Vec<BTreeSet<usize>> = killed.iter().map(|&m| kill_set(matrix, m)).collect();
    let covers = |mask: u32| {
        (0..killed.len()).all(|j| (0..killed.len()).any(|i| mask & (1 << i) != 0 && sets[i].is_subset(&sets[j])))
    };
    let best = (1u32..(1 << killed.len()))
        .filter(|&mask| covers(mask))
        .min_by_key(|mask| (mask.count_ones(), *mask))
        .expect("the full set always covers");
    let chosen: BTreeSet<&BTreeSet<usize>> =
        (0..killed.len()).filter(|i| best & (1 << i) != 0).map(|i| &sets[i]).collect();
    let mut smallest: BTreeMap<&BTreeSet<usize>, &str> = BTreeMap::new();
    for (i, &m) in killed.iter().enumerate() {
        if chosen.contains(&sets[i]) {
            let id = matrix.mutants[m].as_str();
            let e = smallest.entry(&sets[i]).or_insert(id);
            if id < *e {
                *e = id;
            }
        }
    }
    let mut out: Vec<String> = smallest.into_values().map(str::to_string).collect();
    out.sort();
    out
}

/// A matrix with the given rows, columns `t0..`, and row ids `ids`.
pub fn matrix_from(ids: Vec<String>, rows: Vec<Vec<bool>>) -> KillMatrix {
    let cols = rows.first().map_or(0, Vec::len);
    KillMatrix::new(ids, (0..cols).map(|t| format!("t{t}")).collect(), rows)
}
