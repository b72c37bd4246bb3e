//! Acceptance suite. Runs every criterion in order and prints one line per
//! criterion; exits non-zero if any fails.
//!
//! Runs without the libtest harness so the fixture runs are timed alone and
//! shared between criteria. Positional arguments filter by criterion name
//! (`criterion_1` ... `criterion_6`).

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use common::{fixture, java_toolchain, matrix_from, oracle_edges, oracle_subsuming, run_fixture};
use nullforge::analysis::{
    coverage_ratio, dynamic_subsumption, mutation_coverage, skr_correlation, subsuming_set, Analysis, KillMatrix,
    ProjectSummary,
};
use nullforge::harness::{MutantOutcome, Status};
use nullforge::operators::{apply_mutant, enumerate_operators, generate_mutants, Family, OperatorId, Selection};
use nullforge::report::{self, RunOutput};
use nullforge::source::{locate_sites, parse_source, SourceFile};

const FIXTURE_TIME_LIMIT: Duration = Duration::from_secs(300);
const R_SQUARED_TARGET: f64 = 0.81;
const R_SQUARED_TOLERANCE: f64 = 0.15;
const CORRELATION_TIME_LIMIT: Duration = Duration::from_secs(1);
const RANDOM_MATRICES: usize = 1000;
const RANDOM_MAX_DIM: usize = 10;
const EXHAUSTIVE_MAX_MUTANTS: usize = 4;
const EXHAUSTIVE_MAX_TESTS: usize = 3;
const INVOLUTION_SITES: usize = 100;
const COVERAGE_TOLERANCE: f64 = 1e-12;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct FixtureRuns {
    tadq: RunOutput,
    nadq: RunOutput,
    elapsed: Duration,
    _dir: tempfile::TempDir,
}

fn fixture_runs() -> Result<FixtureRuns, String> {
    java_toolchain()?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let vs = fixture("videostore");
    let t0 = Instant::now();
    let tadq =
        run_fixture(&vs.join("nullforge-tadq.toml"), &dir.path().join("tadq")).map_err(|e| format!("TAdq run: {e}"))?;
    let nadq =
        run_fixture(&vs.join("nullforge-nadq.toml"), &dir.path().join("nadq")).map_err(|e| format!("NAdq run: {e}"))?;
    Ok(FixtureRuns { tadq, nadq, elapsed: t0.elapsed(), _dir: dir })
}

fn detected(status: Status) -> bool {
    matches!(status, Status::Killed | Status::Timeout)
}

fn criterion_1(runs: &Result<FixtureRuns, String>) -> Verdict {
    let runs = runs.as_ref().map_err(Clone::clone)?;
    let (tadq, nadq) = (&runs.tadq.analysis, &runs.nadq.analysis);

    let trad_escaping: Vec<_> = tadq
        .mutants
        .iter()
        .filter(|m| m.operator.family() == Family::Traditional && !m.suppressed && !detected(m.status))
        .map(|m| format!("{}:{} {} {}", m.file, m.line, m.operator, m.status.as_str()))
        .collect();
    ensure(trad_escaping.is_empty(), || format!("TAdq leaves traditional mutants alive: {trad_escaping:?}"))?;
    let trad_total = tadq.mutants.iter().filter(|m| m.operator.family() == Family::Traditional).count();

    let null_survivors: Vec<_> = tadq
        .mutants
        .iter()
        .filter(|m| m.operator.family() == Family::NullType && !m.suppressed && m.status == Status::Survived)
        .collect();
    let noi = null_survivors.iter().filter(|m| m.operator == OperatorId::NullifyObjectInitialization).count();
    ensure(null_survivors.len() >= 3 && noi >= 1, || {
        format!(
            "TAdq null-type survivors: {} ({} NullifyObjectInitialization), need >= 3 with >= 1",
            null_survivors.len(),
            noi
        )
    })?;

    let null_alive: Vec<_> = nadq
        .mutants
        .iter()
        .filter(|m| m.operator.family() == Family::NullType && !m.suppressed && !detected(m.status))
        .map(|m| format!("{}:{} {} {}", m.file, m.line, m.operator, m.status.as_str()))
        .collect();
    ensure(null_alive.is_empty(), || format!("NAdq leaves null-type mutants alive: {null_alive:?}"))?;
    let null_suppressed =
        nadq.mutants.iter().filter(|m| m.operator.family() == Family::NullType && m.suppressed).count();
    ensure(null_suppressed >= 1, || "no null-type mutant suppressed as equivalent".into())?;
    ensure(runs.elapsed < FIXTURE_TIME_LIMIT, || format!("fixture runs took {:.1}s", runs.elapsed.as_secs_f64()))?;

    Ok(format!(
        "TAdq: {trad_total} traditional, none alive unless suppressed; {} null-type survive ({noi} NOI). NAdq: every unsuppressed null-type killed, {null_suppressed} suppressed. {:.1}s",
        null_survivors.len(),
        runs.elapsed.as_secs_f64()
    ))
}

/// Project, traditional (survived, killed), null-type (survived, killed).
type Row = (&'static str, (usize, usize), (usize, usize));

const TABLE: [Row; 15] = [
    ("Commons CLI", (24, 318), (71, 415)),
    ("JSQLParser", (31, 457), (358, 1062)),
    ("jOpt", (17, 189), (37, 494)),
    ("Lang", (559, 5455), (564, 5469)),
    ("Joda", (892, 3978), (836, 5371)),
    ("Codec", (364, 1612), (147, 927)),
    ("Collections", (638, 2705), (1179, 5851)),
    ("VRaptor", (111, 478), (795, 2111)),
    ("HTTP Request", (49, 178), (69, 383)),
    ("FileUpload", (81, 273), (137, 211)),
    ("jsoup", (291, 928), (553, 1455)),
    ("JGraphT", (416, 940), (834, 1457)),
    ("PITest", (398, 672), (551, 2964)),
    ("JFreeChart", (10558, 5603), (8563, 6248)),
    ("PMD", (5205, 2734), (5099, 4613)),
];

fn table_projects() -> Vec<ProjectSummary> {
    TABLE.iter().map(|&(name, trad, null)| ProjectSummary::from_family_counts(name, trad, null)).collect()
}

fn criterion_2() -> Verdict {
    let t0 = Instant::now();
    let c = skr_correlation(&table_projects()).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    ensure(!c.degenerate, || "correlation flagged degenerate".into())?;
    let (r, r_squared) = c.r.zip(c.r_squared).ok_or("correlation undefined")?;
    ensure(c.pairs_used == TABLE.len(), || format!("{} of {} pairs used", c.pairs_used, TABLE.len()))?;
    ensure((r_squared - R_SQUARED_TARGET).abs() <= R_SQUARED_TOLERANCE, || {
        format!("r^2 = {r_squared:.4}, outside {R_SQUARED_TARGET} +/- {R_SQUARED_TOLERANCE}")
    })?;
    ensure(elapsed < CORRELATION_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("r = {r:.4}, r^2 = {r_squared:.4} over {} projects in {elapsed:?}", c.pairs_used))
}

fn compare_with_oracle(matrix: &KillMatrix) -> Option<String> {
    let graph = dynamic_subsumption(matrix);
    let edges = graph.edge_ids();
    let expected_edges = oracle_edges(matrix);
    if edges != expected_edges {
        return Some(format!("edges {edges:?} != oracle {expected_edges:?} for {:?}", matrix.rows));
    }
    let set = subsuming_set(&graph);
    let expected_set = oracle_subsuming(matrix);
    if set != expected_set {
        return Some(format!("subsuming {set:?} != oracle {expected_set:?} for {:?}", matrix.rows));
    }
    None
}

/// Row ids in shuffled lexicographic order, so representative choice does not
/// line up with row position.
fn shuffled_ids(rng: &mut StdRng, n: usize) -> Vec<String> {
    let mut ids: Vec<String> = (0..n).map(|i| format!("{:016x}", 0x1000 + i * 0x11)).collect();
    ids.shuffle(rng);
    ids
}

fn criterion_3() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    let mut checked = 0usize;
    let mut mismatches = Vec::new();

    for _ in 0..RANDOM_MATRICES {
        let m = rng.gen_range(1..=RANDOM_MAX_DIM);
        let t = rng.gen_range(1..=RANDOM_MAX_DIM);
        let density: f64 = rng.gen_range(0.0..=1.0);
        let rows = (0..m).map(|_| (0..t).map(|_| rng.gen_bool(density)).collect()).collect();
        let ids = shuffled_ids(&mut rng, m);
        checked += 1;
        mismatches.extend(compare_with_oracle(&matrix_from(ids, rows)));
    }

    let mut exhaustive = 0usize;
    for m in 1..=EXHAUSTIVE_MAX_MUTANTS {
        for t in 1..=EXHAUSTIVE_MAX_TESTS {
            for bits in 0u32..(1 << (m * t)) {
                let rows = (0..m).map(|r| (0..t).map(|c| bits & (1 << (r * t + c)) != 0).collect()).collect();
                let ids = shuffled_ids(&mut rng, m);
                exhaustive += 1;
                mismatches.extend(compare_with_oracle(&matrix_from(ids, rows)));
            }
        }
    }

    ensure(mismatches.is_empty(), || format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]))?;
    Ok(format!("0 mismatches over {checked} random and {exhaustive} exhaustive matrices"))
}

fn check_conservation(label: &str, a: &Analysis) -> Result<(), String> {
    for row in &a.breakdown.operators {
        ensure(row.counts.is_conserved(), || {
            format!("{label}: {} counts do not add up: {:?}", row.operator, row.counts)
        })?;
    }
    for row in &a.breakdown.families {
        ensure(row.counts.is_conserved(), || {
            format!("{label}: {} counts do not add up: {:?}", row.family, row.counts)
        })?;
    }
    let t = &a.breakdown.total;
    ensure(t.is_conserved() && t.total == a.total_mutants && a.mutants.len() == a.total_mutants, || {
        format!("{label}: totals {t:?} vs {} mutants", a.total_mutants)
    })
}

fn statuses(a: &Analysis) -> Vec<(String, Status)> {
    a.mutants.iter().map(|m| (m.id.clone(), m.status)).collect()
}

fn same_run(label: &str, first: &RunOutput, second: &RunOutput) -> Result<(), String> {
    ensure(statuses(&first.analysis) == statuses(&second.analysis), || {
        format!("{label}: ids or statuses differ between runs")
    })?;
    let bytes = |o: &RunOutput| std::fs::read(o.dir.join(report::ANALYSIS_FILE)).map_err(|e| e.to_string());
    ensure(bytes(first)? == bytes(second)?, || format!("{label}: analysis.json differs between runs"))
}

fn criterion_4(runs: &Result<FixtureRuns, String>) -> Verdict {
    let runs = runs.as_ref().map_err(Clone::clone)?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let nadq2 = run_fixture(&fixture("videostore").join("nullforge-nadq.toml"), &dir.path().join("nadq"))
        .map_err(|e| format!("second NAdq run: {e}"))?;
    let printer_cfg = fixture("printer").join("nullforge.toml");
    let p1 = run_fixture(&printer_cfg, &dir.path().join("p1")).map_err(|e| format!("printer run: {e}"))?;
    let p2 = run_fixture(&printer_cfg, &dir.path().join("p2")).map_err(|e| format!("second printer run: {e}"))?;

    let all =
        [("TAdq", &runs.tadq), ("NAdq", &runs.nadq), ("NAdq rerun", &nadq2), ("printer", &p1), ("printer rerun", &p2)];
    for (label, o) in all {
        check_conservation(label, &o.analysis)?;
    }
    let pc = &p1.analysis.breakdown.total;
    ensure(pc.stillborn >= 1 && pc.timeout >= 1, || {
        format!("printer fixture should yield stillborn and timeout mutants: {pc:?}")
    })?;

    same_run("VideoStore NAdq", &runs.nadq, &nadq2)?;
    same_run("printer", &p1, &p2)?;

    let stored = std::fs::read(nadq2.dir.join(report::ANALYSIS_FILE)).map_err(|e| e.to_string())?;
    for _ in 0..2 {
        report::analyze_dir(&nadq2.dir, None).map_err(|e| e.to_string())?;
        let again = std::fs::read(nadq2.dir.join(report::ANALYSIS_FILE)).map_err(|e| e.to_string())?;
        ensure(again == stored, || "re-analysis changed analysis.json".into())?;
    }

    let mutants: usize = all.iter().map(|(_, o)| o.analysis.total_mutants).sum();
    Ok(format!(
        "counts conserved per operator over 5 runs ({mutants} mutants, incl. {} stillborn, {} timeout); reruns and re-analysis byte-identical",
        pc.stillborn, pc.timeout
    ))
}

/// Source, operator, and the expected file text of each mutant.
const GOLDEN: &[(&str, OperatorId, &[&str])] = &[
    (
        "class A { String name() { return \"a\" + 1; } int size() { return 3; } }",
        OperatorId::NullifyReturnValue,
        &["class A { String name() { return null; } int size() { return 3; } }"],
    ),
    (
        "class A { int len(String s, int k) { return s.length() + k; } }",
        OperatorId::NullifyInputVariable,
        &["class A { int len(String s, int k) { s = null; return s.length() + k; } }"],
    ),
    (
        "class A { A(Object o) { this(o, 1); use(o); } A(Object o, int n) { use(o); } void use(Object o) { o.hashCode(); } }",
        OperatorId::NullifyInputVariable,
        &[
            "class A { A(Object o) { this(o, 1); o = null; use(o); } A(Object o, int n) { use(o); } void use(Object o) { o.hashCode(); } }",
            "class A { A(Object o) { this(o, 1); use(o); } A(Object o, int n) { o = null; use(o); } void use(Object o) { o.hashCode(); } }",
            "class A { A(Object o) { this(o, 1); use(o); } A(Object o, int n) { use(o); } void use(Object o) { o = null; o.hashCode(); } }",
        ],
    ),
    (
        "class A { Object make() { Object o = new StringBuilder(\"x\"); return o; } }",
        OperatorId::NullifyObjectInitialization,
        &["class A { Object make() { Object o = null; return o; } }"],
    ),
    (
        "class A { int f(String s) { if (s == null) { return 0; } return s != null ? 1 : 2; } }",
        OperatorId::NegateNullCheck,
        &[
            "class A { int f(String s) { if (s != null) { return 0; } return s != null ? 1 : 2; } }",
            "class A { int f(String s) { if (s == null) { return 0; } return s == null ? 1 : 2; } }",
        ],
    ),
];

fn mutate_text(text: &str, op: OperatorId) -> Result<Vec<String>, String> {
    let file = SourceFile::new("A.java", text);
    let parsed = parse_source(&file).map_err(|e| e.to_string())?;
    let mutants = generate_mutants(&locate_sites(&parsed, &[op]));
    mutants.iter().map(|m| apply_mutant(text, m).map_err(|e| e.to_string())).collect()
}

const OPERANDS: &[&str] = &["s", "this.name", "items[i]", "find(key)", "a.b.c", "(x)", "cache.get(k)", "next"];

fn null_check(rng: &mut StdRng) -> String {
    let lhs = OPERANDS.choose(rng).expect("non-empty");
    let op = if rng.gen_bool(0.5) { "==" } else { "!=" };
    let pad = |rng: &mut StdRng| [" ", "", "  "].choose(rng).expect("non-empty").to_string();
    let (l, r) = (pad(rng), pad(rng));
    if rng.gen_bool(0.3) {
        format!("null{l}{op}{r}{lhs}")
    } else {
        format!("{lhs}{l}{op}{r}null")
    }
}

fn involution_case(rng: &mut StdRng) -> String {
    let check = null_check(rng);
    match rng.gen_range(0..3) {
        0 => format!("class C {{ boolean f(Object[] items, int i) {{ return {check}; }} }}"),
        1 => format!("class C {{ void f() {{ if ({check}) {{ run(); }} }} }}"),
        _ => format!("class C {{ int f() {{ while ({check}) {{ step(); }} return 0; }} }}"),
    }
}

fn criterion_5() -> Verdict {
    let null_ops: BTreeSet<OperatorId> =
        enumerate_operators(&Selection::Family(Family::NullType)).into_iter().map(|o| o.id).collect();
    let expected: BTreeSet<OperatorId> = [
        OperatorId::NullifyReturnValue,
        OperatorId::NullifyInputVariable,
        OperatorId::NullifyObjectInitialization,
        OperatorId::NegateNullCheck,
    ]
    .into();
    ensure(null_ops == expected, || format!("null-type catalog is {null_ops:?}"))?;
    let in_all = enumerate_operators(&Selection::All).iter().filter(|o| o.id.family() == Family::NullType).count();
    ensure(in_all == 4, || format!("{in_all} null-type operators in the full catalog"))?;

    for (src, op, want) in GOLDEN {
        let got = mutate_text(src, *op)?;
        ensure(got == *want, || format!("{op} on {src:?}: got {got:?}"))?;
    }

    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    for _ in 0..INVOLUTION_SITES {
        let text = involution_case(&mut rng);
        let once = mutate_text(&text, OperatorId::NegateNullCheck)?;
        ensure(once.len() == 1, || format!("{} mutants for {text:?}", once.len()))?;
        ensure(once[0] != text, || format!("no change for {text:?}"))?;
        let twice = mutate_text(&once[0], OperatorId::NegateNullCheck)?;
        ensure(twice == [text.clone()], || format!("negating twice: {text:?} -> {:?} -> {twice:?}", once[0]))?;
    }
    Ok(format!("4 null-type operators, {} golden cases, involution holds on {INVOLUTION_SITES} sites", GOLDEN.len()))
}

fn outcome(id: usize, status: Status) -> MutantOutcome {
    MutantOutcome {
        mutant_id: format!("{id:016x}"),
        ordinal: id,
        operator: OperatorId::NegateNullCheck,
        status,
        killing_tests: Vec::new(),
        kill_set_resolved: false,
        wall_time_ms: 0,
    }
}

fn criterion_6() -> Verdict {
    let mut outcomes: Vec<MutantOutcome> = (0..22).map(|i| outcome(i, Status::Killed)).collect();
    outcomes.extend((22..25).map(|i| outcome(i, Status::Survived)));
    let suppressed: BTreeSet<String> = [outcomes[24].mutant_id.clone()].into();
    let small = mutation_coverage(&outcomes, &suppressed).map_err(|e| e.to_string())?;
    ensure((small - 22.0 / 24.0).abs() <= COVERAGE_TOLERANCE, || {
        format!("K=22 S=3 one suppressed: {small}, want 22/24")
    })?;

    let cli = table_projects().into_iter().find(|p| p.project == "Commons CLI").expect("in table");
    let trad = cli.family(Family::Traditional).and_then(|f| f.coverage).ok_or("no Commons CLI coverage")?;
    ensure((trad - 318.0 / 342.0).abs() <= COVERAGE_TOLERANCE, || format!("Commons CLI: {trad}, want 318/342"))?;
    let direct = coverage_ratio(318, 24).ok_or("undefined")?;
    ensure((direct - 318.0 / 342.0).abs() <= COVERAGE_TOLERANCE, || format!("coverage_ratio(318, 24) = {direct}"))?;
    Ok(format!("22/24 = {small:.12}, Commons CLI 318/342 = {trad:.12}"))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        if !args.iter().any(|a| a == "--ignored") {
            (1..=6).for_each(|i| println!("criterion_{i}: test"));
        }
        return ExitCode::SUCCESS;
    }
    let filters: Vec<&str> = args.iter().filter(|a| !a.starts_with('-')).map(String::as_str).collect();
    let wanted = |name: &str| filters.is_empty() || filters.iter().any(|f| name.contains(f));
    let names = ["criterion_1", "criterion_2", "criterion_3", "criterion_4", "criterion_5", "criterion_6"];
    if !names.iter().any(|n| wanted(n)) {
        return ExitCode::SUCCESS;
    }

    let runs = if wanted("criterion_1") || wanted("criterion_4") { fixture_runs() } else { Err("not run".into()) };
    let checks: [(&str, &str, &dyn Fn() -> Verdict); 6] = [
        ("criterion_1", "VideoStore suites", &|| criterion_1(&runs)),
        ("criterion_2", "SKR correlation", &criterion_2),
        ("criterion_3", "subsumption vs oracle", &criterion_3),
        ("criterion_4", "conservation and determinism", &|| criterion_4(&runs)),
        ("criterion_5", "null-type operators", &criterion_5),
        ("criterion_6", "coverage arithmetic", &criterion_6),
    ];
    let mut failed = 0;
    for (name, title, check) in checks {
        if !wanted(name) {
            continue;
        }
        match check() {
            Ok(detail) => println!("{name} ({title}): PASS - {detail}"),
            Err(why) => {
                failed += 1;
                println!("{name} ({title}): FAIL - {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
