//! Run analysis: mutation coverage, per-operator tallies, dynamic mutant
//! subsumption and cross-project SKR correlation.
//!
//! Every function here is pure over an immutable outcome set. Suppressed
//! (user-declared equivalent) mutants are still tallied in the raw status
//! counts, so conservation holds against the number of generated mutants,
//! but they are dropped before coverage, SKR, kill matrices and
//! distributions.

mod stats;
mod subsumption;

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::harness::{MutantOutcome, Status};
use crate::operators::{Family, Mutant, OperatorId};

pub use stats::{pearson, skr, Correlation, InsufficientData};
pub use subsumption::{
    build_kill_matrix, dynamic_subsumption, subsuming_set, IntegrityError, KillMatrix, SubsumptionGraph,
};

/// Parse a suppression list: one mutant id per line, `#` starts a comment.
pub fn parse_suppressions(text: &str) -> BTreeSet<String> {
    text.lines()
        .filter_map(|l| l.split('#').next())
        .filter_map(|l| l.split_whitespace().next())
        .map(str::to_string)
        .collect()
}

pub fn load_suppressions(path: &Path) -> io::Result<BTreeSet<String>> {
    Ok(parse_suppressions(&std::fs::read_to_string(path)?))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoverageError {
    #[error("mutation coverage is undefined: no killed or surviving mutants remain")]
    Undefined,
}

/// `(killed + timeout) / (killed + timeout + survived)` over outcomes that
/// are neither suppressed, stillborn nor stale.
pub fn mutation_coverage(outcomes: &[MutantOutcome], suppressed: &BTreeSet<String>) -> Result<f64, CoverageError> {
    let live = outcomes.iter().filter(|o| !suppressed.contains(&o.mutant_id));
    let (mut detected, mut survived) = (0usize, 0usize);
    for o in live {
        match o.status {
            Status::Killed | Status::Timeout => detected += 1,
            Status::Survived => survived += 1,
            Status::Stillborn | Status::Stale => {}
        }
    }
    coverage_ratio(detected, survived).ok_or(CoverageError::Undefined)
}

pub fn coverage_ratio(detected: usize, survived: usize) -> Option<f64> {
    let denom = detected + survived;
    (denom > 0).then(|| detected as f64 / denom as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub killed: usize,
    pub survived: usize,
    pub stillborn: usize,
    pub timeout: usize,
    pub stale: usize,
    pub total: usize,
    /// How many of the above are suppressed as equivalent.
    pub suppressed: usize,
}

impl StatusCounts {
    pub fn add(&mut self, status: Status, suppressed: bool) {
        match status {
            Status::Killed => self.killed += 1,
            Status::Survived => self.survived += 1,
            Status::Stillborn => self.stillborn += 1,
            Status::Timeout => self.timeout += 1,
            Status::Stale => self.stale += 1,
        }
        self.total += 1;
        self.suppressed += usize::from(suppressed);
    }

    pub fn merge(&mut self, other: &StatusCounts) {
        self.killed += other.killed;
        self.survived += other.survived;
        self.stillborn += other.stillborn;
        self.timeout += other.timeout;
        self.stale += other.stale;
        self.total += other.total;
        self.suppressed += other.suppressed;
    }

    pub fn get(&self, status: Status) -> usize {
        match status {
            Status::Killed => self.killed,
            Status::Survived => self.survived,
            Status::Stillborn => self.stillborn,
            Status::Timeout => self.timeout,
            Status::Stale => self.stale,
        }
    }

    pub fn is_conserved(&self) -> bool {
        self.killed + self.survived + self.stillborn + self.timeout + self.stale == self.total
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorRow {
    pub operator: OperatorId,
    pub family: Family,
    pub counts: StatusCounts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub family: Family,
    pub counts: StatusCounts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakdown {
    pub operators: Vec<OperatorRow>,
    pub families: Vec<FamilyRow>,
    pub total: StatusCounts,
}

/// One row per operator in `enabled` (catalog order, zero-filled) plus any
/// other operator that appears in `outcomes`, with family subtotals.
pub fn operator_breakdown(
    outcomes: &[MutantOutcome],
    enabled: &[OperatorId],
    suppressed: &BTreeSet<String>,
) -> Breakdown {
    let mut per_op: BTreeMap<OperatorId, StatusCounts> =
        enabled.iter().map(|&o| (o, StatusCounts::default())).collect();
    for o in outcomes {
        per_op.entry(o.operator).or_default().add(o.status, suppressed.contains(&o.mutant_id));
    }
    let operators: Vec<OperatorRow> = OperatorId::ALL
        .into_iter()
        .filter_map(|op| per_op.get(&op).map(|c| OperatorRow { operator: op, family: op.family(), counts: *c }))
        .collect();
    let families = Family::ALL
        .into_iter()
        .map(|f| {
            let mut counts = StatusCounts::default();
            for row in operators.iter().filter(|r| r.family == f) {
                counts.merge(&row.counts);
            }
            FamilyRow { family: f, counts }
        })
        .collect::<Vec<_>>();
    let mut total = StatusCounts::default();
    for f in &families {
        total.merge(&f.counts);
    }
    Breakdown { operators, families, total }
}

/// Normalized shares of one mutant population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shares {
    pub base: usize,
    /// Set when `base` is zero; every share is then 0.
    pub empty: bool,
    pub family: BTreeMap<Family, f64>,
    pub operator: BTreeMap<OperatorId, f64>,
}

impl Shares {
    fn from_ops(ops: &[OperatorId]) -> Self {
        let base = ops.len();
        let mut family: BTreeMap<Family, f64> = Family::ALL.iter().map(|&f| (f, 0.0)).collect();
        let mut operator: BTreeMap<OperatorId, f64> = BTreeMap::new();
        for &op in ops {
            *family.get_mut(&op.family()).expect("all families present") += 1.0;
            *operator.entry(op).or_default() += 1.0;
        }
        if base > 0 {
            let n = base as f64;
            family.values_mut().chain(operator.values_mut()).for_each(|v| *v /= n);
        }
        Shares { base, empty: base == 0, family, operator }
    }
}

/// Family and operator make-up of all live mutants (neither stillborn,
/// stale nor suppressed), of the detected ones (killed or timed out), and of
/// the subsuming set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub all: Shares,
    pub killed: Shares,
    pub subsuming: Shares,
}

pub fn subsumption_distribution(
    outcomes: &[MutantOutcome],
    subsuming: &[String],
    suppressed: &BTreeSet<String>,
) -> Distribution {
    let live: Vec<&MutantOutcome> = outcomes
        .iter()
        .filter(|o| !suppressed.contains(&o.mutant_id) && !matches!(o.status, Status::Stillborn | Status::Stale))
        .collect();
    let all: Vec<OperatorId> = live.iter().map(|o| o.operator).collect();
    let killed: Vec<OperatorId> =
        live.iter().filter(|o| matches!(o.status, Status::Killed | Status::Timeout)).map(|o| o.operator).collect();
    let chosen: BTreeSet<&str> = subsuming.iter().map(String::as_str).collect();
    let sub: Vec<OperatorId> =
        outcomes.iter().filter(|o| chosen.contains(o.mutant_id.as_str())).map(|o| o.operator).collect();
    Distribution { all: Shares::from_ops(&all), killed: Shares::from_ops(&killed), subsuming: Shares::from_ops(&sub) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub family: Family,
    pub counts: StatusCounts,
    pub coverage: Option<f64>,
    pub skr: Option<f64>,
    pub subsuming: usize,
}

impl FamilySummary {
    fn from_counts(
        family: Family,
        counts: StatusCounts,
        live_detected: usize,
        live_survived: usize,
        subsuming: usize,
    ) -> Self {
        FamilySummary {
            family,
            counts,
            coverage: coverage_ratio(live_detected, live_survived),
            skr: skr(live_survived, live_detected),
            subsuming,
        }
    }
}

/// Per-project totals in the shape of a cross-project comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub project: String,
    pub families: Vec<FamilySummary>,
    pub coverage: Option<f64>,
}

impl ProjectSummary {
    /// A summary known only by (survived, killed) per family.
    pub fn from_family_counts(project: &str, traditional: (usize, usize), null_type: (usize, usize)) -> Self {
        let fam = |family, (survived, killed): (usize, usize)| {
            let counts = StatusCounts { killed, survived, total: killed + survived, ..Default::default() };
            FamilySummary::from_counts(family, counts, killed, survived, 0)
        };
        let detected = traditional.1 + null_type.1;
        let survived = traditional.0 + null_type.0;
        ProjectSummary {
            project: project.to_string(),
            families: vec![fam(Family::Traditional, traditional), fam(Family::NullType, null_type)],
            coverage: coverage_ratio(detected, survived),
        }
    }

    pub fn family(&self, family: Family) -> Option<&FamilySummary> {
        self.families.iter().find(|f| f.family == family)
    }
}

/// Pearson correlation between traditional and null-type SKR across
/// projects, on the raw ratios.
pub fn skr_correlation(projects: &[ProjectSummary]) -> Result<Correlation, InsufficientData> {
    let pairs: Vec<_> = projects
        .iter()
        .map(|p| (p.family(Family::Traditional).and_then(|f| f.skr), p.family(Family::NullType).and_then(|f| f.skr)))
        .collect();
    pearson(&pairs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantRecord {
    pub id: String,
    pub ordinal: usize,
    pub operator: OperatorId,
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub original: String,
    pub replacement: String,
    pub status: Status,
    pub suppressed: bool,
    pub killing_tests: Vec<String>,
    pub kill_set_resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsumptionSummary {
    /// Rows of the kill matrix.
    pub matrix_mutants: usize,
    pub matrix_tests: usize,
    /// Killed mutants left out for want of per-test kill data.
    pub unresolved_killed: usize,
    /// Timed-out mutants, which have no kill set either.
    pub timeouts: usize,
    pub classes: usize,
    pub edges: usize,
    pub subsuming: Vec<String>,
    pub subsuming_by_family: BTreeMap<Family, usize>,
    /// Detected mutants not in the subsuming set.
    pub redundant: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub total_mutants: usize,
    pub suppressed: Vec<String>,
    pub breakdown: Breakdown,
    pub summary: ProjectSummary,
    pub subsumption: SubsumptionSummary,
    pub distribution: Distribution,
    pub mutants: Vec<MutantRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("no outcome recorded for mutant {0}")]
    MissingOutcome(String),
    #[error("outcome for unknown mutant {0}")]
    UnknownMutant(String),
    #[error(transparent)]
    Integrity(#[from] IntegrityError),
}

pub struct AnalysisInput<'a> {
    pub project: &'a str,
    pub mutants: &'a [Mutant],
    pub outcomes: &'a [MutantOutcome],
    pub inventory: &'a [String],
    pub suppressed: &'a BTreeSet<String>,
    pub enabled: &'a [OperatorId],
}

/// Everything the reports need, computed from one run.
pub fn analyze(input: &AnalysisInput<'_>) -> Result<Analysis, AnalysisError> {
    let by_id: BTreeMap<&str, &MutantOutcome> = input.outcomes.iter().map(|o| (o.mutant_id.as_str(), o)).collect();
    let known: BTreeSet<&str> = input.mutants.iter().map(|m| m.id.as_str()).collect();
    if let Some(o) = input.outcomes.iter().find(|o| !known.contains(o.mutant_id.as_str())) {
        return Err(AnalysisError::UnknownMutant(o.mutant_id.clone()));
    }
    let mut mutants: Vec<&Mutant> = input.mutants.iter().collect();
    mutants.sort_by_key(|m| m.ordinal);
    let mut records = Vec::with_capacity(mutants.len());
    for m in &mutants {
        let o = by_id.get(m.id.as_str()).ok_or_else(|| AnalysisError::MissingOutcome(m.id.clone()))?;
        records.push(MutantRecord {
            id: m.id.clone(),
            ordinal: m.ordinal,
            operator: m.operator,
            file: m.file.clone(),
            line: m.line,
            column: m.column,
            original: m.original.clone(),
            replacement: m.replacement.clone(),
            status: o.status,
            suppressed: input.suppressed.contains(&m.id),
            killing_tests: o.killing_tests.clone(),
            kill_set_resolved: o.kill_set_resolved,
        });
    }
    let mut outcomes: Vec<MutantOutcome> = input.outcomes.to_vec();
    outcomes.sort_by_key(|o| o.ordinal);

    let present: Vec<String> = input.suppressed.iter().filter(|id| known.contains(id.as_str())).cloned().collect();
    for id in input.suppressed.iter().filter(|id| !known.contains(id.as_str())) {
        warn!("suppressed mutant {id} is not part of this run");
    }
    let suppressed: BTreeSet<String> = present.iter().cloned().collect();

    let breakdown = operator_breakdown(&outcomes, input.enabled, &suppressed);
    let matrix = build_kill_matrix(&outcomes, input.inventory, &suppressed)?;
    let graph = dynamic_subsumption(&matrix);
    let subsuming = subsuming_set(&graph);
    let distribution = subsumption_distribution(&outcomes, &subsuming, &suppressed);

    let op_of: BTreeMap<&str, OperatorId> = outcomes.iter().map(|o| (o.mutant_id.as_str(), o.operator)).collect();
    let mut subsuming_by_family: BTreeMap<Family, usize> = Family::ALL.iter().map(|&f| (f, 0)).collect();
    for id in &subsuming {
        *subsuming_by_family.entry(op_of[id.as_str()].family()).or_default() += 1;
    }

    let live = |o: &&MutantOutcome| !suppressed.contains(&o.mutant_id);
    let detected_in = |f: Option<Family>| {
        outcomes.iter().filter(live).filter(|o| f.is_none_or(|f| o.operator.family() == f)).fold((0, 0), |(d, s), o| {
            match o.status {
                Status::Killed | Status::Timeout => (d + 1, s),
                Status::Survived => (d, s + 1),
                _ => (d, s),
            }
        })
    };
    let families = breakdown
        .families
        .iter()
        .map(|row| {
            let (d, s) = detected_in(Some(row.family));
            FamilySummary::from_counts(row.family, row.counts, d, s, subsuming_by_family[&row.family])
        })
        .collect();
    let (d, s) = detected_in(None);
    let summary = ProjectSummary { project: input.project.to_string(), families, coverage: coverage_ratio(d, s) };

    let detected = d;
    let unresolved_killed =
        outcomes.iter().filter(live).filter(|o| o.status == Status::Killed && !o.kill_set_resolved).count();
    let timeouts = outcomes.iter().filter(live).filter(|o| o.status == Status::Timeout).count();
    let subsumption = SubsumptionSummary {
        matrix_mutants: matrix.len(),
        matrix_tests: matrix.tests.len(),
        unresolved_killed,
        timeouts,
        classes: graph.classes.len(),
        edges: graph.edges.len(),
        redundant: detected - subsuming.len(),
        subsuming,
        subsuming_by_family,
    };

    Ok(Analysis {
        total_mutants: mutants.len(),
        suppressed: present,
        breakdown,
        summary,
        subsumption,
        distribution,
        mutants: records,
    })
}
