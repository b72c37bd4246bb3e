//! Kill matrices and dynamic mutant subsumption.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::harness::{MutantOutcome, Status};

/// Which tests kill which mutants. Rows are mutants, columns tests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillMatrix {
    pub mutants: Vec<String>,
    pub tests: Vec<String>,
    pub rows: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("mutant {mutant} is killed by {test}, which is not in the baseline inventory")]
pub struct IntegrityError {
    pub mutant: String,
    pub test: String,
}

impl KillMatrix {
    pub fn new(mutants: Vec<String>, tests: Vec<String>, rows: Vec<Vec<bool>>) -> Self {
        assert_eq!(mutants.len(), rows.len(), "one row per mutant");
        assert!(rows.iter().all(|r| r.len() == tests.len()), "one column per test");
        KillMatrix { mutants, tests, rows }
    }

    pub fn len(&self) -> usize {
        self.mutants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mutants.is_empty()
    }

    pub fn kills(&self, test: usize, mutant: usize) -> bool {
        self.rows[mutant][test]
    }
}

/// Rows: killed mutants with a resolved kill set, by ordinal, minus the
/// `suppressed` ids. Columns: the baseline inventory, sorted.
pub fn build_kill_matrix(
    outcomes: &[MutantOutcome],
    inventory: &[String],
    suppressed: &BTreeSet<String>,
) -> Result<KillMatrix, IntegrityError> {
    let mut tests = inventory.to_vec();
    tests.sort();
    tests.dedup();
    let column: BTreeMap<&str, usize> = tests.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut selected: Vec<&MutantOutcome> = outcomes
        .iter()
        .filter(|o| o.status == Status::Killed && o.kill_set_resolved && !suppressed.contains(&o.mutant_id))
        .collect();
    selected.sort_by_key(|o| o.ordinal);
    let mut mutants = Vec::with_capacity(selected.len());
    let mut rows = Vec::with_capacity(selected.len());
    for o in selected {
        let mut row = vec![false; tests.len()];
        for t in &o.killing_tests {
            let &c = column
                .get(t.as_str())
                .ok_or_else(|| IntegrityError { mutant: o.mutant_id.clone(), test: t.clone() })?;
            row[c] = true;
        }
        mutants.push(o.mutant_id.clone());
        rows.push(row);
    }
    Ok(KillMatrix::new(mutants, tests, rows))
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn from_row(row: &[bool]) -> Self {
        let mut words = vec![0u64; row.len().div_ceil(64)];
        for (i, &b) in row.iter().enumerate() {
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        BitSet(words)
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn is_subset(&self, other: &BitSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

/// The subsumption relation over the mutants of a kill matrix.
///
/// `edges` holds `(a, b)` row-index pairs with `a != b` where `a` subsumes
/// `b`; the reflexive pairs are implied (see [`SubsumptionGraph::subsumes`]).
/// Mutants with an empty kill set take part in no edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsumptionGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    /// Groups of nodes with identical non-empty kill sets, ordered by their
    /// representative's id.
    pub classes: Vec<Vec<usize>>,
    /// Per class, the node with the lexicographically smallest id.
    pub representatives: Vec<usize>,
    /// Class index per node; `None` for never-killed rows.
    pub class_of: Vec<Option<usize>>,
    sets: Vec<BitSet>,
}

impl SubsumptionGraph {
    /// Whether `a` dynamically subsumes `b` (reflexive on killed nodes).
    pub fn subsumes(&self, a: usize, b: usize) -> bool {
        !self.sets[a].is_empty() && self.sets[a].is_subset(&self.sets[b])
    }

    /// Edges as id pairs, sorted.
    pub fn edge_ids(&self) -> Vec<(String, String)> {
        let mut e: Vec<_> = self.edges.iter().map(|&(a, b)| (self.nodes[a].clone(), self.nodes[b].clone())).collect();
        e.sort();
        e
    }
}

pub fn dynamic_subsumption(matrix: &KillMatrix) -> SubsumptionGraph {
    let sets: Vec<BitSet> = matrix.rows.iter().map(|r| BitSet::from_row(r)).collect();
    let n = sets.len();
    let mut edges = Vec::new();
    for a in 0..n {
        if sets[a].is_empty() {
            continue;
        }
        for b in 0..n {
            if a != b && sets[a].is_subset(&sets[b]) {
                edges.push((a, b));
            }
        }
    }

    let mut by_set: BTreeMap<&[u64], Vec<usize>> = BTreeMap::new();
    for (i, s) in sets.iter().enumerate() {
        if !s.is_empty() {
            by_set.entry(&s.0).or_default().push(i);
        }
    }
    let mut classes: Vec<Vec<usize>> = by_set
        .into_values()
        .map(|mut members| {
            members.sort_by(|&x, &y| matrix.mutants[x].cmp(&matrix.mutants[y]).then(x.cmp(&y)));
            members
        })
        .collect();
    classes.sort_by(|x, y| matrix.mutants[x[0]].cmp(&matrix.mutants[y[0]]).then(x[0].cmp(&y[0])));
    let representatives = classes.iter().map(|c| c[0]).collect();
    let mut class_of = vec![None; n];
    for (ci, c) in classes.iter().enumerate() {
        for &m in c {
            class_of[m] = Some(ci);
        }
    }
    SubsumptionGraph { nodes: matrix.mutants.clone(), edges, classes, representatives, class_of, sets }
}

/// Representatives of the classes that no other class strictly subsumes,
/// sorted by id.
pub fn subsuming_set(graph: &SubsumptionGraph) -> Vec<String> {
    let reps = &graph.representatives;
    let mut chosen: Vec<String> = reps
        .iter()
        .filter(|&&r| !reps.iter().any(|&o| o != r && graph.sets[o].is_subset(&graph.sets[r])))
        .map(|&r| graph.nodes[r].clone())
        .collect();
    chosen.sort();
    chosen
}
