//! JSON, CSV and Markdown renderings of an [`Analysis`].

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::analysis::{Analysis, Shares, StatusCounts};
use crate::harness::Status;

use super::config::Format;

pub fn analysis_json(analysis: &Analysis) -> String {
    let mut s = serde_json::to_string_pretty(analysis).expect("analysis serializes");
    s.push('\n');
    s
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn counts_record(c: &StatusCounts) -> [String; 7] {
    [c.killed, c.survived, c.stillborn, c.timeout, c.stale, c.suppressed, c.total].map(|n| n.to_string())
}

const COUNT_HEADERS: [&str; 7] = ["killed", "survived", "stillborn", "timeout", "stale", "suppressed", "total"];

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w).expect("in-memory CSV");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 CSV")
}

pub fn operators_csv(a: &Analysis) -> String {
    csv_string(|w| {
        let mut header = vec!["family", "operator"];
        header.extend(COUNT_HEADERS);
        w.write_record(&header)?;
        for row in &a.breakdown.operators {
            let mut rec = vec![row.family.to_string(), row.operator.to_string()];
            rec.extend(counts_record(&row.counts));
            w.write_record(&rec)?;
        }
        Ok(())
    })
}

pub fn families_csv(a: &Analysis) -> String {
    csv_string(|w| {
        let mut header = vec!["family"];
        header.extend(COUNT_HEADERS);
        header.extend(["coverage", "skr", "subsuming"]);
        w.write_record(&header)?;
        for f in &a.summary.families {
            let mut rec = vec![f.family.to_string()];
            rec.extend(counts_record(&f.counts));
            rec.extend([opt(f.coverage), opt(f.skr), f.subsuming.to_string()]);
            w.write_record(&rec)?;
        }
        let mut rec = vec!["total".to_string()];
        rec.extend(counts_record(&a.breakdown.total));
        rec.extend([opt(a.summary.coverage), String::new(), a.subsumption.subsuming.len().to_string()]);
        w.write_record(&rec)
    })
}

pub fn distribution_csv(a: &Analysis) -> String {
    csv_string(|w| {
        w.write_record(["population", "level", "key", "share", "base"])?;
        let d = &a.distribution;
        for (name, shares) in [("all", &d.all), ("killed", &d.killed), ("subsuming", &d.subsuming)] {
            for (f, v) in &shares.family {
                w.write_record([name, "family", f.as_str(), &v.to_string(), &shares.base.to_string()])?;
            }
            for (o, v) in &shares.operator {
                w.write_record([name, "operator", o.as_str(), &v.to_string(), &shares.base.to_string()])?;
            }
        }
        Ok(())
    })
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{:.1}%", 100.0 * x))
}

fn code(s: &str) -> String {
    let flat = s.split_whitespace().collect::<Vec<_>>().join(" ");
    let flat =
        if flat.chars().count() > 80 { format!("{}...", flat.chars().take(77).collect::<String>()) } else { flat };
    if flat.contains('`') {
        format!("`` {flat} ``")
    } else {
        format!("`{flat}`")
    }
}

fn shares_line(name: &str, s: &Shares) -> String {
    if s.empty {
        return format!("| {name} | 0 | - | - |\n");
    }
    let get = |f: crate::operators::Family| s.family.get(&f).copied().unwrap_or(0.0);
    format!(
        "| {name} | {} | {:.1}% | {:.1}% |\n",
        s.base,
        100.0 * get(crate::operators::Family::Traditional),
        100.0 * get(crate::operators::Family::NullType)
    )
}

/// Markdown summary. Surviving mutants are always listed; killing tests
/// of killed mutants only with `show_killing`.
pub fn summary_md(a: &Analysis, show_killing: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Mutation report: {}\n", a.summary.project);
    let _ = writeln!(
        s,
        "{} mutants, {} suppressed as equivalent. Mutation coverage {}.\n",
        a.total_mutants,
        a.suppressed.len(),
        pct(a.summary.coverage)
    );

    s.push_str("## Families\n\n| family | killed | survived | stillborn | timeout | stale | suppressed | total | coverage | SKR | subsuming |\n|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n");
    for f in &a.summary.families {
        let c = &f.counts;
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            f.family,
            c.killed,
            c.survived,
            c.stillborn,
            c.timeout,
            c.stale,
            c.suppressed,
            c.total,
            pct(f.coverage),
            f.skr.map_or_else(|| "n/a".into(), |v| format!("{v:.3}")),
            f.subsuming
        );
    }

    s.push_str("\n## Operators\n\n| operator | killed | survived | stillborn | timeout | stale | suppressed | total |\n|---|---:|---:|---:|---:|---:|---:|---:|\n");
    for r in &a.breakdown.operators {
        let c = &r.counts;
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            r.operator, c.killed, c.survived, c.stillborn, c.timeout, c.stale, c.suppressed, c.total
        );
    }

    let sub = &a.subsumption;
    let _ = writeln!(
        s,
        "\n## Subsumption\n\nKill matrix: {} mutants x {} tests ({} killed without per-test data, {} timeouts excluded).\n{} kill-set classes, {} subsumption edges, {} subsuming mutants, {} redundant.\n",
        sub.matrix_mutants, sub.matrix_tests, sub.unresolved_killed, sub.timeouts, sub.classes, sub.edges, sub.subsuming.len(), sub.redundant
    );
    s.push_str("| population | mutants | traditional | null-type |\n|---|---:|---:|---:|\n");
    s.push_str(&shares_line("all", &a.distribution.all));
    s.push_str(&shares_line("killed", &a.distribution.killed));
    s.push_str(&shares_line("subsuming", &a.distribution.subsuming));

    let survivors: Vec<_> = a.mutants.iter().filter(|m| m.status == Status::Survived && !m.suppressed).collect();
    let _ = writeln!(s, "\n## Surviving mutants ({})\n", survivors.len());
    if survivors.is_empty() {
        s.push_str("None.\n");
    }
    for m in survivors {
        let _ = writeln!(
            s,
            "- `{}:{}:{}` {} `{}`: {} -> {}",
            m.file,
            m.line,
            m.column,
            m.operator,
            m.id,
            code(&m.original),
            code(&m.replacement)
        );
    }

    let suppressed: Vec<_> = a.mutants.iter().filter(|m| m.suppressed).collect();
    if !suppressed.is_empty() {
        let _ = writeln!(s, "\n## Suppressed as equivalent ({})\n", suppressed.len());
        for m in suppressed {
            let _ = writeln!(
                s,
                "- `{}:{}:{}` {} `{}` ({}): {} -> {}",
                m.file,
                m.line,
                m.column,
                m.operator,
                m.id,
                m.status.as_str(),
                code(&m.original),
                code(&m.replacement)
            );
        }
    }

    if show_killing {
        let killed: Vec<_> = a.mutants.iter().filter(|m| m.status == Status::Killed).collect();
        let _ = writeln!(s, "\n## Killed mutants ({})\n", killed.len());
        for m in killed {
            let tests = if m.kill_set_resolved { m.killing_tests.join(", ") } else { "(no per-test data)".into() };
            let _ = writeln!(s, "- `{}:{}` {} `{}`: {}", m.file, m.line, m.operator, m.id, tests);
        }
    }
    s
}

/// Write the requested formats into `dir`, returning the files written.
pub fn emit_report(a: &Analysis, formats: &[Format], dir: &Path, show_killing: bool) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> io::Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    for f in formats {
        match f {
            Format::Json => put("analysis.json", analysis_json(a))?,
            Format::Csv => {
                put("operators.csv", operators_csv(a))?;
                put("families.csv", families_csv(a))?;
                put("distribution.csv", distribution_csv(a))?;
            }
            Format::Md => put("summary.md", summary_md(a, show_killing))?,
        }
    }
    Ok(written)
}
