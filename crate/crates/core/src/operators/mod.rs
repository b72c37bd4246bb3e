//! The operator catalog: seven traditional method-level operators and four
//! operators that model null-type faults.
//!
//! The traditional roster and its replacement tables are a fixed
//! normalization:
//!
//! | operator | replacements |
//! |---|---|
//! | ArithmeticOperatorReplacementBinary | `+`↔`-`, `*`↔`/`, `%`→`*` |
//! | ArithmeticOperatorReplacementUnary | unary `-` and `+` removed |
//! | ArithmeticOperatorReplacementShortcut | `++`↔`--` |
//! | LogicalOperatorReplacement | `&`↔`\|`, `^`→`&` |
//! | ShiftOperatorReplacement | `<<`↔`>>`, `>>>`→`>>` |
//! | RelationalOperatorReplacement | `<`↔`>=`, `>`↔`<=`, `==`↔`!=` |
//! | ConditionalOperatorReplacement | `&&`↔`\|\|` |
//!
//! Comparisons with a `null` operand belong to `NegateNullCheck` only, so the
//! two families never produce the same mutant.

mod mutant;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use mutant::{
    apply_mutant, assign_ordinals, generate_mutants, mutant_id, mutate_negate_null_check,
    mutate_nullify_input_variable, mutate_nullify_object_initialization, mutate_nullify_return_value, mutate_site,
    mutate_traditional, read_mutants_jsonl, restore_mutant, write_mutants_jsonl, Mutant, StaleMutant,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Traditional,
    NullType,
}

impl Family {
    pub const ALL: [Family; 2] = [Family::Traditional, Family::NullType];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Traditional => "traditional",
            Family::NullType => "null-type",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorId {
    ArithmeticOperatorReplacementBinary,
    ArithmeticOperatorReplacementUnary,
    ArithmeticOperatorReplacementShortcut,
    LogicalOperatorReplacement,
    ShiftOperatorReplacement,
    RelationalOperatorReplacement,
    ConditionalOperatorReplacement,
    NullifyReturnValue,
    NullifyInputVariable,
    NullifyObjectInitialization,
    NegateNullCheck,
}

impl OperatorId {
    pub const ALL: [OperatorId; 11] = [
        OperatorId::ArithmeticOperatorReplacementBinary,
        OperatorId::ArithmeticOperatorReplacementUnary,
        OperatorId::ArithmeticOperatorReplacementShortcut,
        OperatorId::LogicalOperatorReplacement,
        OperatorId::ShiftOperatorReplacement,
        OperatorId::RelationalOperatorReplacement,
        OperatorId::ConditionalOperatorReplacement,
        OperatorId::NullifyReturnValue,
        OperatorId::NullifyInputVariable,
        OperatorId::NullifyObjectInitialization,
        OperatorId::NegateNullCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OperatorId::ArithmeticOperatorReplacementBinary => "ArithmeticOperatorReplacementBinary",
            OperatorId::ArithmeticOperatorReplacementUnary => "ArithmeticOperatorReplacementUnary",
            OperatorId::ArithmeticOperatorReplacementShortcut => "ArithmeticOperatorReplacementShortcut",
            OperatorId::LogicalOperatorReplacement => "LogicalOperatorReplacement",
            OperatorId::ShiftOperatorReplacement => "ShiftOperatorReplacement",
            OperatorId::RelationalOperatorReplacement => "RelationalOperatorReplacement",
            OperatorId::ConditionalOperatorReplacement => "ConditionalOperatorReplacement",
            OperatorId::NullifyReturnValue => "NullifyReturnValue",
            OperatorId::NullifyInputVariable => "NullifyInputVariable",
            OperatorId::NullifyObjectInitialization => "NullifyObjectInitialization",
            OperatorId::NegateNullCheck => "NegateNullCheck",
        }
    }

    pub fn family(self) -> Family {
        match self {
            OperatorId::NullifyReturnValue
            | OperatorId::NullifyInputVariable
            | OperatorId::NullifyObjectInitialization
            | OperatorId::NegateNullCheck => Family::NullType,
            _ => Family::Traditional,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            OperatorId::ArithmeticOperatorReplacementBinary => "Replaces a binary arithmetic operator (+ - * / %)",
            OperatorId::ArithmeticOperatorReplacementUnary => "Removes a unary + or -",
            OperatorId::ArithmeticOperatorReplacementShortcut => "Swaps ++ and --",
            OperatorId::LogicalOperatorReplacement => "Replaces a bitwise operator (& | ^)",
            OperatorId::ShiftOperatorReplacement => "Replaces a shift operator (<< >> >>>)",
            OperatorId::RelationalOperatorReplacement => "Negates a relational operator",
            OperatorId::ConditionalOperatorReplacement => "Swaps && and ||",
            OperatorId::NullifyReturnValue => "A method returning an object returns null instead",
            OperatorId::NullifyInputVariable => "An object parameter is set to null on method entry",
            OperatorId::NullifyObjectInitialization => "A `new` expression is replaced with null",
            OperatorId::NegateNullCheck => "A comparison against null is negated",
        }
    }
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown mutation operator {name:?}; valid operators: {}", valid_ids())]
pub struct UnknownOperator {
    pub name: String,
}

fn valid_ids() -> String {
    OperatorId::ALL.iter().map(|o| o.as_str()).collect::<Vec<_>>().join(", ")
}

impl FromStr for OperatorId {
    type Err = UnknownOperator;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OperatorId::ALL.into_iter().find(|o| o.as_str() == s).ok_or_else(|| UnknownOperator { name: s.to_string() })
    }
}

/// Which operators a run enables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    All,
    Family(Family),
    Ids(Vec<OperatorId>),
}

impl Selection {
    /// Parses `all`, `traditional`, `null-type`, or operator ids. Several
    /// entries are unioned.
    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<Selection, UnknownOperator> {
        let items: Vec<&str> =
            items.iter().flat_map(|s| s.as_ref().split(',')).map(str::trim).filter(|s| !s.is_empty()).collect();
        match items.as_slice() {
            [] | ["all"] => return Ok(Selection::All),
            ["traditional"] => return Ok(Selection::Family(Family::Traditional)),
            ["null-type"] | ["null"] => return Ok(Selection::Family(Family::NullType)),
            _ => {}
        }
        let mut ids = Vec::new();
        for item in items {
            let expanded: Vec<OperatorId> = match item {
                "all" => OperatorId::ALL.to_vec(),
                "traditional" => family_members(Family::Traditional),
                "null-type" | "null" => family_members(Family::NullType),
                name => vec![name.parse()?],
            };
            for id in expanded {
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
        }
        ids.sort();
        Ok(Selection::Ids(ids))
    }
}

fn family_members(family: Family) -> Vec<OperatorId> {
    OperatorId::ALL.into_iter().filter(|o| o.family() == family).collect()
}

/// A catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MutationOperator {
    pub id: OperatorId,
    pub family: Family,
    pub description: &'static str,
}

impl MutationOperator {
    pub fn new(id: OperatorId) -> Self {
        MutationOperator { id, family: id.family(), description: id.description() }
    }

    /// Replacement texts for a site of this operator; empty when the site
    /// belongs to another operator or would be left unchanged.
    pub fn replacements(&self, site: &crate::source::MutationSite) -> Vec<String> {
        if site.operator != self.id {
            return Vec::new();
        }
        mutant::replacements_for(site)
    }
}

/// The operators named by `selection`, in catalog order.
pub fn enumerate_operators(selection: &Selection) -> Vec<MutationOperator> {
    let ids: Vec<OperatorId> = match selection {
        Selection::All => OperatorId::ALL.to_vec(),
        Selection::Family(f) => family_members(*f),
        Selection::Ids(ids) => OperatorId::ALL.into_iter().filter(|o| ids.contains(o)).collect(),
    };
    ids.into_iter().map(MutationOperator::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roster_sizes() {
        assert_eq!(enumerate_operators(&Selection::Family(Family::NullType)).len(), 4);
        assert_eq!(enumerate_operators(&Selection::Family(Family::Traditional)).len(), 7);
        assert_eq!(enumerate_operators(&Selection::All).len(), 11);
        let one = enumerate_operators(&Selection::parse(&["NegateNullCheck"]).unwrap());
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].id, OperatorId::NegateNullCheck);
    }

    #[test]
    fn null_type_roster_is_exact() {
        let ids: Vec<_> =
            enumerate_operators(&Selection::Family(Family::NullType)).iter().map(|o| o.id.as_str()).collect();
        assert_eq!(
            ids,
            ["NullifyReturnValue", "NullifyInputVariable", "NullifyObjectInitialization", "NegateNullCheck"]
        );
    }

    #[test]
    fn ids_unique_and_round_trip() {
        for op in OperatorId::ALL {
            assert_eq!(op.as_str().parse::<OperatorId>().unwrap(), op);
            assert_eq!(OperatorId::ALL.iter().filter(|o| o.as_str() == op.as_str()).count(), 1);
        }
    }

    #[test]
    fn unknown_operator_lists_valid_ids() {
        let err = Selection::parse(&["NullifyEverything"]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("NullifyEverything"));
        assert!(msg.contains("NegateNullCheck") && msg.contains("ShiftOperatorReplacement"));
    }

    #[test]
    fn selection_parsing() {
        assert_eq!(Selection::parse::<&str>(&[]).unwrap(), Selection::All);
        assert_eq!(Selection::parse(&["null-type"]).unwrap(), Selection::Family(Family::NullType));
        let mixed = Selection::parse(&["NegateNullCheck,traditional"]).unwrap();
        assert_eq!(enumerate_operators(&mixed).len(), 8);
    }
}
