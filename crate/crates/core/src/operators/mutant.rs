use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::OperatorId;
use crate::source::{MethodContext, MutationSite, SiteKind, SourceFile, Span};

/// One single-span textual change to one file.
///
/// Field order is the JSON-lines export order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutant {
    /// Hex-rendered content hash of (file, operator, span, replacement).
    pub id: String,
    /// Position in the run's deterministic mutant order.
    pub ordinal: usize,
    pub operator: OperatorId,
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub start: usize,
    pub end: usize,
    pub original: String,
    pub replacement: String,
}

impl Mutant {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }

    fn from_site(site: &MutationSite, replacement: String) -> Mutant {
        Mutant {
            id: mutant_id(&site.file, site.operator, site.span, &replacement),
            ordinal: 0,
            operator: site.operator,
            file: site.file.clone(),
            line: site.line,
            column: site.column,
            start: site.span.start,
            end: site.span.end,
            original: site.original.clone(),
            replacement,
        }
    }
}

/// 16 hex digits of SHA-256 over the mutant's identifying content.
pub fn mutant_id(file: &str, operator: OperatorId, span: Span, replacement: &str) -> String {
    let mut hasher = Sha256::new();
    for part in [file, operator.as_str(), &span.start.to_string(), &span.end.to_string(), replacement] {
        hasher.update(part.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

pub fn mutate_nullify_return_value(site: &MutationSite) -> Option<Mutant> {
    if site.kind != SiteKind::ReturnStmt || squash(&site.original) == "returnnull;" {
        return None;
    }
    Some(Mutant::from_site(site, "return null;".to_string()))
}

/// Insert `<param> = null;` as the method's first statement. The change is
/// anchored on the opening brace (or the `;` ending an explicit constructor
/// call), so the mutant stays one contiguous edit.
pub fn mutate_nullify_input_variable(file: &SourceFile, method: &MethodContext, param_index: usize) -> Option<Mutant> {
    let param = method.params.get(param_index)?;
    if !crate::source::parser::is_reference_type(&param.ty) {
        return None;
    }
    let anchor = method.insertion_anchor?;
    let (line, column) = file.line_col(anchor.start);
    let site = MutationSite {
        file: file.path.clone(),
        operator: OperatorId::NullifyInputVariable,
        kind: SiteKind::MethodParam,
        span: anchor,
        line,
        column,
        original: anchor.slice(&file.text).to_string(),
        target: Some(param.name.clone()),
    };
    mutate_site(&site).into_iter().next()
}

pub fn mutate_nullify_object_initialization(site: &MutationSite) -> Option<Mutant> {
    if site.kind != SiteKind::NewExpr {
        return None;
    }
    Some(Mutant::from_site(site, "null".to_string()))
}

pub fn mutate_negate_null_check(site: &MutationSite) -> Option<Mutant> {
    if site.kind != SiteKind::NullCheck {
        return None;
    }
    negate_null_check_text(&site.original).map(|r| Mutant::from_site(site, r))
}

fn negate_null_check_text(snippet: &str) -> Option<String> {
    if let Some(i) = snippet.find("==") {
        Some(format!("{}!={}", &snippet[..i], &snippet[i + 2..]))
    } else {
        snippet.find("!=").map(|i| format!("{}=={}", &snippet[..i], &snippet[i + 2..]))
    }
}

fn traditional_table(kind: SiteKind, op: &str) -> &'static [&'static str] {
    match (kind, op) {
        (SiteKind::BinaryArith, "+") => &["-"],
        (SiteKind::BinaryArith, "-") => &["+"],
        (SiteKind::BinaryArith, "*") => &["/"],
        (SiteKind::BinaryArith, "/") => &["*"],
        (SiteKind::BinaryArith, "%") => &["*"],
        (SiteKind::UnaryArith, "-" | "+") => &[""],
        (SiteKind::ShortcutArith, "++") => &["--"],
        (SiteKind::ShortcutArith, "--") => &["++"],
        (SiteKind::Logical, "&") => &["|"],
        (SiteKind::Logical, "|") => &["&"],
        (SiteKind::Logical, "^") => &["&"],
        (SiteKind::Shift, "<<") => &[">>"],
        (SiteKind::Shift, ">>") => &["<<"],
        (SiteKind::Shift, ">>>") => &[">>"],
        (SiteKind::Relational, "<") => &[">="],
        (SiteKind::Relational, ">=") => &["<"],
        (SiteKind::Relational, ">") => &["<="],
        (SiteKind::Relational, "<=") => &[">"],
        (SiteKind::Relational, "==") => &["!="],
        (SiteKind::Relational, "!=") => &["=="],
        (SiteKind::Conditional, "&&") => &["||"],
        (SiteKind::Conditional, "||") => &["&&"],
        _ => &[],
    }
}

/// One mutant per applicable entry of the site's replacement table.
pub fn mutate_traditional(site: &MutationSite) -> Vec<Mutant> {
    traditional_table(site.kind, &site.original).iter().map(|r| Mutant::from_site(site, r.to_string())).collect()
}

pub(super) fn replacements_for(site: &MutationSite) -> Vec<String> {
    mutate_site(site).into_iter().map(|m| m.replacement).collect()
}

/// Dispatch a site to its operator's rule.
pub fn mutate_site(site: &MutationSite) -> Vec<Mutant> {
    let mutants = match site.kind {
        SiteKind::ReturnStmt => mutate_nullify_return_value(site).into_iter().collect(),
        SiteKind::MethodParam => match &site.target {
            Some(name) => vec![Mutant::from_site(site, format!("{} {name} = null;", site.original))],
            None => Vec::new(),
        },
        SiteKind::NewExpr => mutate_nullify_object_initialization(site).into_iter().collect(),
        SiteKind::NullCheck => mutate_negate_null_check(site).into_iter().collect(),
        _ => mutate_traditional(site),
    };
    mutants.into_iter().filter(|m| m.replacement != m.original).collect()
}

/// Generate every mutant for every site, then number them in a single pass.
pub fn generate_mutants(sites: &[MutationSite]) -> Vec<Mutant> {
    let mut mutants: Vec<Mutant> = sites.iter().flat_map(mutate_site).collect();
    assign_ordinals(&mut mutants);
    mutants
}

/// Sort by (file, start, operator id, replacement) and number from zero.
/// Duplicate ids (identical edits reached twice) are dropped.
pub fn assign_ordinals(mutants: &mut Vec<Mutant>) {
    mutants.sort_by(|a, b| {
        (&a.file, a.start, a.operator.as_str(), &a.replacement, a.end).cmp(&(
            &b.file,
            b.start,
            b.operator.as_str(),
            &b.replacement,
            b.end,
        ))
    });
    mutants.dedup_by(|a, b| a.id == b.id);
    for (i, m) in mutants.iter_mut().enumerate() {
        m.ordinal = i;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("mutant {id} is stale: {file} no longer contains {expected:?} at {span}")]
pub struct StaleMutant {
    pub id: String,
    pub file: String,
    pub span: Span,
    pub expected: String,
}

pub fn apply_mutant(text: &str, mutant: &Mutant) -> Result<String, StaleMutant> {
    let span = mutant.span();
    if text.get(span.start..span.end) != Some(mutant.original.as_str()) {
        return Err(StaleMutant {
            id: mutant.id.clone(),
            file: mutant.file.clone(),
            span,
            expected: mutant.original.clone(),
        });
    }
    let mut out = String::with_capacity(text.len() + mutant.replacement.len());
    out.push_str(&text[..span.start]);
    out.push_str(&mutant.replacement);
    out.push_str(&text[span.end..]);
    Ok(out)
}

/// Inverse of [`apply_mutant`].
pub fn restore_mutant(mutated: &str, mutant: &Mutant) -> Result<String, StaleMutant> {
    let reverse = Mutant {
        end: mutant.start + mutant.replacement.len(),
        original: mutant.replacement.clone(),
        replacement: mutant.original.clone(),
        ..mutant.clone()
    };
    apply_mutant(mutated, &reverse)
}

pub fn write_mutants_jsonl<W: Write>(mut w: W, mutants: &[Mutant]) -> io::Result<()> {
    for m in mutants {
        serde_json::to_writer(&mut w, m)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_mutants_jsonl<R: BufRead>(r: R) -> io::Result<Vec<Mutant>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(io::Error::other)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{locate_sites, parse_source};
    use proptest::prelude::*;

    fn mutants_for(src: &str, ops: &[OperatorId]) -> (SourceFile, Vec<Mutant>) {
        let file = SourceFile::new("src/A.java", src);
        let parsed = parse_source(&file).unwrap();
        let sites = locate_sites(&parsed, ops);
        let mutants = generate_mutants(&sites);
        (file, mutants)
    }

    fn mutated(src: &str, op: OperatorId) -> Vec<String> {
        let (file, mutants) = mutants_for(src, &[op]);
        mutants.iter().map(|m| apply_mutant(&file.text, m).unwrap()).collect()
    }

    #[test]
    fn nullify_return_value() {
        let out = mutated(
            "class A { Rental r(Movie m, int d) { return new Rental(m, d); } }",
            OperatorId::NullifyReturnValue,
        );
        assert_eq!(out, ["class A { Rental r(Movie m, int d) { return null; } }"]);
        assert!(mutated("class A { String f() { return null; } }", OperatorId::NullifyReturnValue).is_empty());
        let out = mutated("class Movie { String getTitle() { return title; } }", OperatorId::NullifyReturnValue);
        assert_eq!(out, ["class Movie { String getTitle() { return null; } }"]);
    }

    #[test]
    fn nullify_input_variable() {
        let out =
            mutated("class A { int charge(Movie m, int d) { return m.price(d); } }", OperatorId::NullifyInputVariable);
        assert_eq!(out, ["class A { int charge(Movie m, int d) { m = null; return m.price(d); } }"]);
        assert!(
            mutated("class A { int f(int a, double b) { return 1; } }", OperatorId::NullifyInputVariable).is_empty()
        );
        let out = mutated(
            "class Rental { Rental(Movie movie, int days) { super(); this.movie = movie; } }",
            OperatorId::NullifyInputVariable,
        );
        assert_eq!(
            out,
            ["class Rental { Rental(Movie movie, int days) { super(); movie = null; this.movie = movie; } }"]
        );
    }

    #[test]
    fn nullify_input_variable_from_method_context() {
        let file = SourceFile::new("A.java", "class A { int charge(Movie m, int d) { return m.price(d); } }");
        let parsed = parse_source(&file).unwrap();
        let m = mutate_nullify_input_variable(&file, &parsed.methods[0], 0).unwrap();
        assert_eq!(m.replacement, "{ m = null;");
        assert!(mutate_nullify_input_variable(&file, &parsed.methods[0], 1).is_none());
        let via_sites = generate_mutants(&locate_sites(&parsed, &[OperatorId::NullifyInputVariable]));
        assert_eq!(via_sites[0].id, m.id);
    }

    #[test]
    fn nullify_object_initialization() {
        let out = mutated(
            "class A { void f() { movie = new RegularMovie(title); } }",
            OperatorId::NullifyObjectInitialization,
        );
        assert_eq!(out, ["class A { void f() { movie = null; } }"]);
        let out = mutated("class A { void f() { f(new Foo()); } }", OperatorId::NullifyObjectInitialization);
        assert_eq!(out, ["class A { void f() { f(null); } }"]);
        let out = mutated("class A { Object f() { return new int[5]; } }", OperatorId::NullifyObjectInitialization);
        assert_eq!(out, ["class A { Object f() { return null; } }"]);
    }

    #[test]
    fn negate_null_check() {
        let out = mutated("class A { boolean f(Movie movie) { return movie == null; } }", OperatorId::NegateNullCheck);
        assert_eq!(out, ["class A { boolean f(Movie movie) { return movie != null; } }"]);
        let out = mutated("class A { boolean f(Object x) { return null != x; } }", OperatorId::NegateNullCheck);
        assert_eq!(out, ["class A { boolean f(Object x) { return null == x; } }"]);
    }

    #[test]
    fn negate_null_check_is_an_involution() {
        for s in ["== null", "null !=", "!=", "==", "==\n  null"] {
            let once = negate_null_check_text(s).unwrap();
            assert_ne!(once, s);
            assert_eq!(negate_null_check_text(&once).unwrap(), s);
        }
    }

    #[test]
    fn traditional_examples() {
        let out = mutated(
            "class A { double f(int d) { return thisAmount + super.determineAmount(d); } }",
            OperatorId::ArithmeticOperatorReplacementBinary,
        );
        assert_eq!(out, ["class A { double f(int d) { return thisAmount - super.determineAmount(d); } }"]);
        let out = mutated(
            "class A { boolean f(boolean a, boolean b) { return a && b; } }",
            OperatorId::ConditionalOperatorReplacement,
        );
        assert_eq!(out, ["class A { boolean f(boolean a, boolean b) { return a || b; } }"]);
        let out = mutated(
            "class A { int f(int daysRented) { return daysRented - 2; } }",
            OperatorId::ArithmeticOperatorReplacementBinary,
        );
        assert_eq!(out, ["class A { int f(int daysRented) { return daysRented + 2; } }"]);
        let out = mutated("class A { int f(int a) { return -a; } }", OperatorId::ArithmeticOperatorReplacementUnary);
        assert_eq!(out, ["class A { int f(int a) { return a; } }"]);
        let out = mutated("class A { int f(int a) { return a >>> 2; } }", OperatorId::ShiftOperatorReplacement);
        assert_eq!(out, ["class A { int f(int a) { return a >> 2; } }"]);
        let out = mutated(
            "class A { boolean f(int a) { return a <= 2 && a != 1; } }",
            OperatorId::RelationalOperatorReplacement,
        );
        assert_eq!(
            out,
            [
                "class A { boolean f(int a) { return a > 2 && a != 1; } }",
                "class A { boolean f(int a) { return a <= 2 && a == 1; } }"
            ]
        );
    }

    #[test]
    fn full_table_is_one_mutant_per_site() {
        let src = "class A { int f(int a, int b, boolean p, boolean q) { a++; b--; int x = a % b ^ a & b | a; boolean r = p || q; return x << 1 >> 2 >>> 3 / a * b; } }";
        let (_, ms) = mutants_for(src, &OperatorId::ALL);
        let pairs: Vec<_> = ms.iter().map(|m| format!("{}>{}", m.original, m.replacement)).collect();
        for expected in
            ["++>--", "-->++", "%>*", "^>&", "&>|", "|>&", "||>&&", "<<>>>", ">>><<", ">>>>>>", "/>*", "*>/"]
        {
            assert!(pairs.contains(&expected.to_string()), "{expected} missing in {pairs:?}");
        }
    }

    #[test]
    fn stale_mutant_is_rejected() {
        let (file, ms) = mutants_for("class A { int f(int a) { return a + 1; } }", &OperatorId::ALL);
        let edited = file.text.replace("a + 1", "a * 1");
        let err = apply_mutant(&edited, &ms[0]).unwrap_err();
        assert_eq!(err.id, ms[0].id);
    }

    #[test]
    fn ids_and_ordinals_are_stable() {
        let src = "class A { String f(String s, int n) { if (s == null) return null; return s + n; } }";
        let (_, a) = mutants_for(src, &OperatorId::ALL);
        let (_, b) = mutants_for(src, &OperatorId::ALL);
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, m)| m.ordinal == i));
        assert!(a.iter().all(|m| m.id.len() == 16 && m.id.chars().all(|c| c.is_ascii_hexdigit())));
    }

    #[test]
    fn jsonl_field_order() {
        let (_, ms) = mutants_for("class A { int f(int a) { return a + 1; } }", &OperatorId::ALL);
        let mut buf = Vec::new();
        write_mutants_jsonl(&mut buf, &ms).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        let keys = [
            "\"id\"",
            "\"ordinal\"",
            "\"operator\"",
            "\"file\"",
            "\"line\"",
            "\"column\"",
            "\"start\"",
            "\"end\"",
            "\"original\"",
            "\"replacement\"",
        ];
        let positions: Vec<_> = keys.iter().map(|k| line.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(read_mutants_jsonl(&buf[..]).unwrap(), ms);
    }

    fn java_method_strategy() -> impl Strategy<Value = String> {
        let operand = prop_oneof![Just("a"), Just("b"), Just("1"), Just("c.size()")];
        let op = prop_oneof![
            Just("+"),
            Just("-"),
            Just("*"),
            Just("/"),
            Just("%"),
            Just("<<"),
            Just(">>"),
            Just(">>>"),
            Just("&"),
            Just("|"),
            Just("^")
        ];
        prop::collection::vec((operand, op), 1..8).prop_map(|parts| {
            let mut expr = String::from("a");
            for (operand, op) in parts {
                expr = format!("({expr} {op} {operand})");
            }
            format!(
                "class G {{ Object h(java.util.List c, Object o, int a, int b) {{ if (o == null || null != c) {{ a++; }} int r = -{expr}; if (r < b && r >= a) return new int[r]; return o; }} }}"
            )
        })
    }

    proptest! {
        #[test]
        fn every_mutant_is_one_contiguous_change(src in java_method_strategy()) {
            let (file, ms) = mutants_for(&src, &OperatorId::ALL);
            prop_assert!(!ms.is_empty());
            for m in &ms {
                prop_assert_ne!(&m.original, &m.replacement);
                let out = apply_mutant(&file.text, m).unwrap();
                let delta = out.len() as isize - file.text.len() as isize;
                prop_assert_eq!(delta, m.replacement.len() as isize - m.original.len() as isize);
                // differs only within the span
                prop_assert_eq!(&out[..m.start], &file.text[..m.start]);
                prop_assert_eq!(&out[m.start + m.replacement.len()..], &file.text[m.end..]);
                prop_assert_eq!(restore_mutant(&out, m).unwrap(), file.text.clone());
            }
        }
    }
}
