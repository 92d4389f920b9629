//! `ppiped`: search for, dump, and verify perfect parallelepipeds.
//!
//! Exit statuses: 0 success, 1 verification failure, 2 usage error,
//! 3 I/O or arithmetic-budget failure.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ppiped::certificate::{reconstruct, CSV_HEADER};
use ppiped::search::{self, Checkpoint, Event, SearchConfig, StatsRecord};
use ppiped::{Certificate, Error};

const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ppiped",
    version,
    about = "Exhaustive search and exact verification of perfect parallelepipeds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search all non-oblique configurations with largest edge in [min-edge, max-edge].
    Search(SearchArgs),
    /// Verify certificate files, or reconstruct one from edges and minor diagonals.
    Verify(VerifyArgs),
    /// Dump every perfect parallelogram as `x1 x2 d_minor d_major`.
    Parallelograms(RangeArgs),
    /// Print the funnel table from a checkpoint or a search log.
    Stats { path: PathBuf },
}

#[derive(Args)]
struct RangeArgs {
    #[arg(long)]
    max_edge: u32,
    #[arg(long, default_value_t = 1)]
    min_edge: u32,
    /// Output file (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// One JSON certificate per line.
    Line,
    /// The 13 lengths, comma-separated.
    Csv,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    range: RangeArgs,
    #[arg(long, value_enum, default_value_t = Format::Line)]
    format: Format,
    /// Worker threads (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from --checkpoint.
    #[arg(long, requires = "checkpoint")]
    resume: bool,
    /// Emit only certificates whose edges have gcd 1.
    #[arg(long)]
    primitive_only: bool,
    /// Stop after completing this many largest-edge values.
    #[arg(long, hide = true)]
    halt_after: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Certificate files, one record per line (`-` for stdin).
    #[arg(conflicts_with = "edges")]
    inputs: Vec<PathBuf>,
    /// Inline edges `x1,x2,x3`.
    #[arg(long, value_delimiter = ',', requires = "minors")]
    edges: Option<Vec<i64>>,
    /// Inline minor diagonals `d12,d13,d23`.
    #[arg(long, value_delimiter = ',', requires = "edges")]
    minors: Option<Vec<i64>>,
}

/// An error paired with the exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Usage(_) | Error::CheckpointMismatch { .. }) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: anyhow!(msg.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Search(args) => cmd_search(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Parallelograms(args) => cmd_parallelograms(args),
        Command::Stats { path } => cmd_stats(&path),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_certificate(out: &mut dyn Write, c: &Certificate, format: Format) -> io::Result<()> {
    match format {
        Format::Line => writeln!(out, "{}", c.to_json_line()),
        Format::Csv => writeln!(out, "{}", c.to_csv_line()),
    }
}

fn print_stats(to: &mut dyn Write, record: &StatsRecord) -> io::Result<()> {
    writeln!(to, "{}", record.stats)?;
    writeln!(
        to,
        "STATS {}",
        serde_json::to_string(record).expect("stats serialize")
    )
}

fn cmd_search(args: SearchArgs) -> Result<u8, Failure> {
    let config = SearchConfig {
        max_edge: args.range.max_edge,
        min_edge: args.range.min_edge,
        primitive_only: args.primitive_only,
        workers: args.workers.unwrap_or_else(|| SearchConfig::new(1).workers),
        checkpoint_path: args.checkpoint.clone(),
        resume: args.resume,
        stop_after: args.halt_after,
    };
    config.validate()?;

    let mut out = open_output(args.range.output.as_deref())?;
    if args.format == Format::Csv {
        writeln!(out, "# {CSV_HEADER}").context("writing output")?;
    }
    let mut stderr = io::stderr().lock();
    let outcome = search::run_with(&config, |event| {
        let io_err = |e: io::Error| Error::Io(e);
        match event {
            Event::Resumed {
                certificates,
                stats,
                completed,
            } => {
                for c in certificates {
                    write_certificate(&mut out, c, args.format).map_err(io_err)?;
                }
                writeln!(
                    stderr,
                    "resumed: {completed} largest-edge values done, {} certificates so far",
                    stats.realizable
                )
                .map_err(io_err)?;
            }
            Event::Finished {
                x1,
                certificates,
                stats,
                remaining,
            } => {
                for c in certificates {
                    write_certificate(&mut out, c, args.format).map_err(io_err)?;
                }
                if !certificates.is_empty() {
                    out.flush().map_err(io_err)?;
                }
                writeln!(
                    stderr,
                    "x1={x1} remaining={remaining} tested={} ge1={} ge2={} ge3={} all4={} realizable={}",
                    stats.configs_tested, stats.pass_ge1, stats.pass_ge2, stats.pass_ge3, stats.pass_all4, stats.realizable
                )
                .map_err(io_err)?;
            }
        }
        Ok(())
    })?;
    out.flush().context("writing output")?;

    if !outcome.complete {
        writeln!(stderr, "halted before completion; continue with --resume").ok();
    }
    let record = StatsRecord {
        max_edge: config.max_edge,
        min_edge: config.min_edge,
        complete: outcome.complete,
        stats: outcome.stats,
    };
    print_stats(&mut stderr, &record).context("writing diagnostics")?;
    Ok(0)
}

fn cmd_parallelograms(args: RangeArgs) -> Result<u8, Failure> {
    let index = ppiped::enumerate_range(args.max_edge, args.min_edge)?;
    let mut out = open_output(args.output.as_deref())?;
    for p in index.iter() {
        writeln!(out, "{p}").context("writing output")?;
    }
    out.flush().context("writing output")?;
    eprintln!(
        "{} perfect parallelograms, index footprint {} bytes",
        index.len(),
        index.footprint_bytes()
    );
    Ok(0)
}

fn fmt_list<T: ToString>(values: impl IntoIterator<Item = T>) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn verify_inline(edges: &[i64], minors: &[i64]) -> Result<u8, Failure> {
    let (Ok(edges), Ok(minors)) = (<[i64; 3]>::try_from(edges), <[i64; 3]>::try_from(minors))
    else {
        return Err(usage(
            "--edges and --minors each take exactly three comma-separated integers",
        ));
    };
    println!("edges: {}", fmt_list(edges));
    println!("minor diagonals: {}", fmt_list(minors));
    let r = match reconstruct(edges, minors) {
        Ok(r) => r,
        Err(reason) => {
            println!("verdict: invalid ({reason})");
            return Ok(EXIT_INVALID);
        }
    };
    let show = |v: Option<i64>, sq: String| v.map_or(format!("sqrt({sq})"), |v| v.to_string());
    let major_sq = |k: usize| {
        let (i, j) = [(0, 1), (0, 2), (1, 2)][k];
        2 * (edges[i] as i128).pow(2) + 2 * (edges[j] as i128).pow(2) - (minors[k] as i128).pow(2)
    };
    println!(
        "major diagonals: {}",
        fmt_list((0..3).map(|k| show(r.major_diagonals[k], major_sq(k).to_string())))
    );
    println!(
        "body diagonals: {}",
        fmt_list((0..4).map(|k| show(r.body_diagonals[k], r.body_diagonal_squares[k].to_string())))
    );
    println!("gram_det: {}", r.gram_det);
    match r.into_certificate().and_then(|c| c.verify().map(|_| c)) {
        Ok(c) => {
            println!("primitive: {}", c.primitive);
            println!("certificate: {}", c.to_json_line());
            println!("verdict: valid");
            Ok(0)
        }
        Err(reason) => {
            println!("verdict: invalid ({reason})");
            Ok(EXIT_INVALID)
        }
    }
}

fn verify_reader(
    name: &str,
    reader: impl BufRead,
    failures: &mut usize,
    records: &mut usize,
) -> Result<(), Failure> {
    for (n, line) in reader.lines().enumerate() {
        let line = line.with_context(|| format!("reading {name}"))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        *records += 1;
        match Certificate::parse_record(trimmed).and_then(|c| c.verify().map(|_| c)) {
            Ok(c) => println!("{name}:{}: valid: {c}", n + 1),
            Err(reason) => {
                *failures += 1;
                println!("{name}:{}: invalid ({reason})", n + 1);
            }
        }
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Failure> {
    if let (Some(edges), Some(minors)) = (&args.edges, &args.minors) {
        return verify_inline(edges, minors);
    }
    let mut failures = 0;
    let mut records = 0;
    let inputs = if args.inputs.is_empty() {
        vec![PathBuf::from("-")]
    } else {
        args.inputs
    };
    for path in &inputs {
        if path == Path::new("-") {
            verify_reader("<stdin>", io::stdin().lock(), &mut failures, &mut records)?;
        } else {
            let file =
                File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
            verify_reader(
                &path.display().to_string(),
                BufReader::new(file),
                &mut failures,
                &mut records,
            )?;
        }
    }
    println!(
        "{records} records, {} valid, {failures} invalid",
        records - failures
    );
    Ok(if failures == 0 { 0 } else { EXIT_INVALID })
}

/// Reads a checkpoint file, a search log ending in a `STATS` line, or a
/// bare stats record.
fn load_stats(path: &Path) -> anyhow::Result<StatsRecord> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    if let Ok(cp) = serde_json::from_str::<serde_json::Value>(&text) {
        if cp.get("completed_x1").is_some() {
            return Ok(Checkpoint::load(path)?.stats_record());
        }
        return serde_json::from_value(cp)
            .with_context(|| format!("{} is not a stats record", path.display()));
    }
    let line = text
        .lines()
        .rev()
        .find_map(|l| l.strip_prefix("STATS "))
        .ok_or_else(|| anyhow!("{} contains no checkpoint or STATS record", path.display()))?;
    serde_json::from_str(line)
        .with_context(|| format!("corrupt STATS record in {}", path.display()))
}

fn cmd_stats(path: &Path) -> Result<u8, Failure> {
    let record = load_stats(path).map_err(|error| Failure {
        code: EXIT_FAILURE,
        error,
    })?;
    if !record.stats.is_monotone() {
        return Err(Failure {
            code: EXIT_FAILURE,
            error: anyhow!("funnel counters are not monotone"),
        });
    }
    println!(
        "edges {}..={}{}",
        record.min_edge,
        record.max_edge,
        if record.complete { "" } else { " (incomplete)" }
    );
    print_stats(&mut io::stdout().lock(), &record).context("writing output")?;
    Ok(0)
}
