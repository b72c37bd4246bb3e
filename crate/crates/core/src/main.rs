use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use nullforge::report::config::{self, parse_formats, resolve_settings, ConfigFile, Format, Overrides, Settings};
use nullforge::report::{self, PipelineError};

const DEFAULT_OUT: &str = "nullforge-out";

#[derive(Parser, Debug)]
#[command(
    name = "nullforge",
    version,
    about = "Source-level mutation testing for Java, with null-type mutation operators"
)]
struct Cli {
    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List mutation sites as JSON lines, without building anything.
    Scan(ScanArgs),
    /// Generate mutants, run the test suite against each, analyze and report.
    Run(RunArgs),
    /// Recompute analysis.json from a run directory's stored outcomes.
    Analyze(AnalyzeArgs),
    /// Render reports from a run directory's analysis.json.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct ProjectArgs {
    /// Configuration file [default: <project>/nullforge.toml or ./nullforge.toml]
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Project root, overriding the configuration file.
    #[arg(long, value_name = "DIR")]
    project: Option<PathBuf>,
    /// Operators to enable: all, traditional, null-type, or operator ids (comma separated).
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    operators: Option<Vec<String>>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    project: ProjectArgs,
    /// Write sites here instead of standard output.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    project: ProjectArgs,
    /// Worker count [default: available cores]
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Per-mutant timeout as a multiple of the baseline wall time.
    #[arg(long, value_name = "F")]
    timeout_factor: Option<f64>,
    /// Report formats: json, csv, md (repeat or comma separate) [default: all]
    #[arg(long, value_name = "FMT", value_delimiter = ',')]
    format: Option<Vec<String>>,
    /// File of mutant ids to treat as equivalent.
    #[arg(long, value_name = "FILE")]
    suppress: Option<PathBuf>,
    /// Run directory [default: $NULLFORGE_OUT or ./nullforge-out]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Run directory [default: $NULLFORGE_OUT or ./nullforge-out]
    dir: Option<PathBuf>,
    /// Suppression list replacing the one recorded for the run.
    #[arg(long, value_name = "FILE")]
    suppress: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Run directory [default: $NULLFORGE_OUT or ./nullforge-out]
    dir: Option<PathBuf>,
    #[arg(long, value_name = "FMT", value_delimiter = ',')]
    format: Option<Vec<String>>,
    /// Where to write [default: <run dir>/reports]
    #[arg(long, value_name = "DIR")]
    dest: Option<PathBuf>,
    /// List the killing tests of every killed mutant in the Markdown summary.
    #[arg(long)]
    show_killing: bool,
}

fn default_out() -> PathBuf {
    std::env::var_os("NULLFORGE_OUT")
        .filter(|v| !v.is_empty())
        .map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from)
}

fn display(path: &Path, base: &Path) -> String {
    path.strip_prefix(base).map_or_else(|_| path.display().to_string(), |p| p.display().to_string())
}

fn load_settings(args: &ProjectArgs, mut overrides: Overrides, cwd: &Path) -> Result<Settings, PipelineError> {
    let path = match (&args.config, &args.project) {
        (Some(c), _) => Some(cwd.join(c)),
        (None, Some(p)) => Some(cwd.join(p).join(config::DEFAULT_CONFIG_FILE)).filter(|p| p.is_file()),
        (None, None) => Some(cwd.join(config::DEFAULT_CONFIG_FILE)).filter(|p| p.is_file()),
    };
    let (file, dir) = match path {
        Some(p) => (ConfigFile::load(&p)?, p.parent().map_or_else(|| cwd.to_path_buf(), Path::to_path_buf)),
        None => (ConfigFile::default(), cwd.to_path_buf()),
    };
    overrides.project = args.project.clone();
    overrides.operators = args.operators.clone();
    Ok(resolve_settings(&file, &dir, &overrides, cwd, &default_out())?)
}

fn scan(args: ScanArgs, cwd: &Path) -> Result<(), PipelineError> {
    let settings = load_settings(&args.project, Overrides::default(), cwd)?;
    let generated = report::generate(&settings.run)?;
    let mut out: Box<dyn Write> = match &args.output {
        Some(p) => {
            let p = cwd.join(p);
            Box::new(io::BufWriter::new(
                std::fs::File::create(&p).map_err(|source| PipelineError::Io { path: p, source })?,
            ))
        }
        None => Box::new(io::stdout().lock()),
    };
    let write_err =
        |source| PipelineError::Io { path: args.output.clone().unwrap_or_else(|| "<stdout>".into()), source };
    for site in &generated.sites {
        serde_json::to_writer(&mut out, site).map_err(io::Error::from).map_err(write_err)?;
        out.write_all(b"\n").map_err(write_err)?;
    }
    out.flush().map_err(write_err)?;
    eprintln!(
        "{} sites, {} mutants in {} files ({} skipped)",
        generated.sites.len(),
        generated.mutants.len(),
        generated.files.len(),
        generated.skipped.len()
    );
    Ok(())
}

fn run(args: RunArgs, cwd: &Path, quiet: bool) -> Result<(), PipelineError> {
    let overrides = Overrides {
        jobs: args.jobs,
        timeout_factor: args.timeout_factor,
        suppress: args.suppress.clone(),
        formats: args.format.clone(),
        out: args.out.clone(),
        ..Default::default()
    };
    let settings = load_settings(&args.project, overrides, cwd)?;
    let output = report::run(&settings, |done, total, o| {
        if !quiet {
            eprintln!("[{done}/{total}] {:<9} {} {}", o.status.as_str(), o.mutant_id, o.operator);
        }
    })?;
    let a = &output.analysis;
    let c = &a.breakdown.total;
    println!(
        "{} mutants: {} killed, {} survived, {} stillborn, {} timeout, {} stale ({} suppressed)",
        c.total, c.killed, c.survived, c.stillborn, c.timeout, c.stale, c.suppressed
    );
    match a.summary.coverage {
        Some(v) => println!("mutation coverage: {:.2}%", 100.0 * v),
        None => println!("mutation coverage: undefined"),
    }
    for m in a.mutants.iter().filter(|m| m.status == nullforge::harness::Status::Survived && !m.suppressed) {
        println!("survived: {}:{} {} {}", m.file, m.line, m.operator, m.id);
    }
    println!("run directory: {}", display(&output.dir, cwd));
    Ok(())
}

fn analyze(args: AnalyzeArgs, cwd: &Path) -> Result<(), PipelineError> {
    let dir = cwd.join(args.dir.unwrap_or_else(default_out));
    let suppress = args.suppress.map(|p| cwd.join(p));
    let a = report::analyze_dir(&dir, suppress.as_deref())?;
    println!("{}: {} mutants analyzed", display(&dir.join(report::ANALYSIS_FILE), cwd), a.total_mutants);
    Ok(())
}

fn render(args: ReportArgs, cwd: &Path) -> Result<(), PipelineError> {
    let dir = cwd.join(args.dir.unwrap_or_else(default_out));
    let formats = match &args.format {
        Some(f) => parse_formats(f)?,
        None => vec![Format::Json, Format::Csv, Format::Md],
    };
    let dest = args.dest.map(|d| cwd.join(d));
    for p in report::report_dir(&dir, &formats, dest.as_deref(), args.show_killing)? {
        println!("{}", display(&p, cwd));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    let cwd = match std::env::current_dir() {
        Ok(d) => d,
        Err(e) => {
            error!("cannot determine working directory: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Scan(a) => scan(a, &cwd),
        Command::Run(a) => run(a, &cwd, cli.quiet),
        Command::Analyze(a) => analyze(a, &cwd),
        Command::Report(a) => render(a, &cwd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
