use serde::{Deserialize, Serialize};

use super::parser::{is_reference_type, ParsedFile};
use super::Span;
use crate::operators::OperatorId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiteKind {
    BinaryArith,
    UnaryArith,
    ShortcutArith,
    Logical,
    Shift,
    Relational,
    Conditional,
    ReturnStmt,
    MethodParam,
    NewExpr,
    NullCheck,
}

impl SiteKind {
    pub fn operator(self) -> OperatorId {
        match self {
            SiteKind::BinaryArith => OperatorId::ArithmeticOperatorReplacementBinary,
            SiteKind::UnaryArith => OperatorId::ArithmeticOperatorReplacementUnary,
            SiteKind::ShortcutArith => OperatorId::ArithmeticOperatorReplacementShortcut,
            SiteKind::Logical => OperatorId::LogicalOperatorReplacement,
            SiteKind::Shift => OperatorId::ShiftOperatorReplacement,
            SiteKind::Relational => OperatorId::RelationalOperatorReplacement,
            SiteKind::Conditional => OperatorId::ConditionalOperatorReplacement,
            SiteKind::ReturnStmt => OperatorId::NullifyReturnValue,
            SiteKind::MethodParam => OperatorId::NullifyInputVariable,
            SiteKind::NewExpr => OperatorId::NullifyObjectInitialization,
            SiteKind::NullCheck => OperatorId::NegateNullCheck,
        }
    }
}

/// A located position eligible for exactly one operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationSite {
    pub file: String,
    pub operator: OperatorId,
    pub kind: SiteKind,
    pub span: Span,
    pub line: usize,
    pub column: usize,
    pub original: String,
    /// Parameter name, for method-param sites.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<String>,
}

/// Turn a parsed file's raw site index into operator-tagged sites, sorted by
/// (byte offset, operator id). Only operators in `enabled` produce sites.
pub fn locate_sites(parsed: &ParsedFile<'_>, enabled: &[OperatorId]) -> Vec<MutationSite> {
    let file = parsed.file;
    let make = |kind: SiteKind, span: Span, target: Option<String>| {
        let (line, column) = file.line_col(span.start);
        MutationSite {
            file: file.path.clone(),
            operator: kind.operator(),
            kind,
            span,
            line,
            column,
            original: span.slice(&file.text).to_string(),
            target,
        }
    };
    let mut sites = Vec::new();
    for raw in &parsed.raw_sites {
        let op = raw.kind.operator();
        if !enabled.contains(&op) {
            continue;
        }
        if raw.kind == SiteKind::ReturnStmt {
            let returns_reference = raw.method.is_some_and(|m| parsed.methods[m].returns_reference());
            if !returns_reference {
                continue;
            }
        }
        sites.push(make(raw.kind, raw.span, None));
    }
    if enabled.contains(&OperatorId::NullifyInputVariable) {
        for method in &parsed.methods {
            let (Some(anchor), Some(body)) = (method.insertion_anchor, method.body) else { continue };
            let rest = Span::new(anchor.end, body.end);
            for param in method.params.iter().filter(|p| is_reference_type(&p.ty)) {
                // Nulling a parameter that is never read again cannot change
                // behavior, so no mutant is produced for it.
                if !mentions(&file.text, rest, &parsed.masks, &param.name) {
                    continue;
                }
                sites.push(make(SiteKind::MethodParam, anchor, Some(param.name.clone())));
            }
        }
    }
    sites.sort_by(|a, b| (a.span.start, a.operator.as_str()).cmp(&(b.span.start, b.operator.as_str())));
    sites
}

/// Whether `name` occurs in `span` as an identifier outside comments and
/// literals, other than as a member selected with `.`.
fn mentions(text: &str, span: Span, masks: &[Span], name: &str) -> bool {
    let bytes = text.as_bytes();
    let is_ident = |b: u8| b.is_ascii_alphanumeric() || b == b'_' || b == b'$' || b >= 0x80;
    let mut from = span.start;
    while let Some(found) = text[from..span.end].find(name) {
        let at = from + found;
        let end = at + name.len();
        from = end;
        if at > 0 && is_ident(bytes[at - 1]) || end < bytes.len() && is_ident(bytes[end]) {
            continue;
        }
        if masks.iter().any(|m| m.start <= at && at < m.end) {
            continue;
        }
        let before = text[span.start..at].trim_end();
        if before.ends_with('.') && !before.ends_with("..") {
            continue;
        }
        return true;
    }
    false
}
