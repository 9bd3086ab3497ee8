//! Command-line driver for the unital library.
//!
//! Machine-readable JSON goes to standard output (or `--out`); human
//! summaries go to standard error. All output is deterministic: repeated
//! runs with the same flags, at any worker count, are byte-identical.
//!
//! Exit codes: 0 success, 1 invalid input, 2 verification failure,
//! 3 theorem violation (an axiom or existence theorem failed to hold, which
//! means an implementation bug or a counterexample).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use buekenhout::onan::{
    build_search_report, construct, exhaustive_search, Certificate, ConstructionTrace,
};
use buekenhout::unitals::enumerate_valid_bm_params;
use buekenhout::{Error, Field, FieldSpec, ProjPoint, Unital, UnitalParams};

#[derive(Parser)]
#[command(name = "buekenhout", version, about = "Unitals in PG(2,q^2) and their O'Nan configurations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Extra progress detail on standard error.
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Orthogonal Buekenhout-Metz unital U_{alpha,beta}.
    Bm,
    /// Buekenhout-Tits unital (q = 2^m, m odd > 1; parameter-free).
    Tits,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Full,
    Anchored,
}

#[derive(Args)]
struct UnitalArgs {
    /// Characteristic.
    #[arg(long)]
    p: u64,
    /// Extension degree; the plane has order q^2 = p^(2m).
    #[arg(long)]
    m: u32,
    #[arg(long, value_enum)]
    kind: Kind,
    /// alpha as an element index of GF(q^2); required for --kind bm unless --scan.
    #[arg(long)]
    alpha: Option<u64>,
    /// beta as an element index of GF(q^2); required for --kind bm unless --scan.
    #[arg(long)]
    beta: Option<u64>,
    /// Enumerate all valid (alpha, beta) parameter pairs instead.
    #[arg(long)]
    scan: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the deterministic field header for GF(p^m) and GF(p^2m).
    Fields {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        m: u32,
    },
    /// Build a unital, verify the design axioms, and emit its descriptor.
    Build {
        #[command(flatten)]
        unital: UnitalArgs,
        /// Include the sorted point set (element index triples).
        #[arg(long)]
        dump_points: bool,
        /// Write the JSON here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Construct a verified O'Nan configuration and emit its certificate.
    FindOnan {
        #[command(flatten)]
        unital: UnitalArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively enumerate O'Nan configurations, deduplicated by
    /// canonical form.
    Search {
        #[command(flatten)]
        unital: UnitalArgs,
        #[arg(long, value_enum, default_value_t = Mode::Full)]
        mode: Mode,
        /// Anchor vertex as "i,j,k" element indices (anchored mode);
        /// defaults to the unital point (0,0,1).
        #[arg(long)]
        anchor: Option<String>,
        /// Worker threads; 0 means one per core. Affects wall time only.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Keep at most this many configurations in the report list
        /// (0 = unlimited). Counts and statistics are always exact.
        #[arg(long, default_value_t = 100)]
        max_list: usize,
        /// Also report whether this certificate's configuration occurs in
        /// the census.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify an emitted certificate from scratch in a fresh process.
    Verify {
        #[arg(long)]
        certificate: PathBuf,
    },
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> CliError {
        CliError { code: 1, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        let code = match &e {
            Error::TheoremViolation { .. } | Error::AxiomViolation(_) => 3,
            Error::VerificationFailed(_) | Error::ConfigRejected(_) => 2,
            _ => 1,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::input(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        CliError::input(format!("json error: {e}"))
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}

fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), CliError> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    match out {
        Some(path) => std::fs::write(path, json)?,
        None => print!("{json}"),
    }
    Ok(())
}

fn build_field(p: u64, m: u32) -> Result<Arc<Field>, CliError> {
    Ok(Arc::new(Field::build(p, m)?))
}

fn single_unital(field: &Arc<Field>, args: &UnitalArgs) -> Result<Unital, CliError> {
    match args.kind {
        Kind::Bm => {
            let (Some(alpha), Some(beta)) = (args.alpha, args.beta) else {
                return Err(CliError::input(
                    "--kind bm needs --alpha and --beta (element indices), or --scan",
                ));
            };
            Ok(Unital::new_bm(field.clone(), field.fq2(alpha)?, field.fq2(beta)?)?)
        }
        Kind::Tits => {
            if args.alpha.is_some() || args.beta.is_some() {
                return Err(CliError::input("--kind tits takes no alpha/beta parameters"));
            }
            Ok(Unital::new_tits(field.clone())?)
        }
    }
}

#[derive(Serialize)]
struct BuildOutput {
    field: FieldSpec,
    unital: buekenhout::unitals::UnitalDescriptor,
    point_count: u64,
    /// intersection size -> number of lines
    line_histogram: BTreeMap<u32, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<[u32; 3]>>,
}

#[derive(Serialize)]
struct ScanOutput {
    field: FieldSpec,
    kind: String,
    total_parameter_pairs: u64,
    valid: Vec<buekenhout::unitals::UnitalDescriptor>,
}

fn cmd_build(args: UnitalArgs, dump_points: bool, out: Option<PathBuf>, verbose: bool) -> Result<(), CliError> {
    let field = build_field(args.p, args.m)?;
    if args.scan {
        if args.kind == Kind::Tits {
            return Err(CliError::input("--scan applies to --kind bm only"));
        }
        let valid: Vec<_> = enumerate_valid_bm_params(&field)
            .into_iter()
            .map(|p| {
                Unital::from_params(field.clone(), UnitalParams::OrthogonalBm(p)).descriptor()
            })
            .collect();
        eprintln!("scan: {} valid parameter pairs over GF({}^2)", valid.len(), field.q());
        let output = ScanOutput {
            field: field.spec(),
            kind: "orthogonal-bm".into(),
            total_parameter_pairs: field.q2() * field.q2(),
            valid,
        };
        return emit(&out, &output);
    }

    let started = Instant::now();
    let unital = single_unital(&field, &args)?;
    let point_count = unital.points()?.len() as u64;
    let mut histogram: BTreeMap<u32, u64> = BTreeMap::new();
    for line in buekenhout::pg2::all_lines(&field) {
        let members = buekenhout::pg2::points_on_line(&field, &line)
            .iter()
            .filter(|p| unital.contains(p))
            .count() as u32;
        *histogram.entry(members).or_insert(0) += 1;
    }
    for &size in histogram.keys() {
        if size != 1 && size != field.q() + 1 {
            return Err(Error::AxiomViolation(format!(
                "some line meets the unital in {size} points"
            ))
            .into());
        }
    }
    if verbose {
        eprintln!(
            "built and checked {} lines in {:?}",
            histogram.values().sum::<u64>(),
            started.elapsed()
        );
    }
    eprintln!(
        "unital over GF({}^2): {} points, histogram {:?}",
        field.q(),
        point_count,
        histogram
    );
    let output = BuildOutput {
        field: field.spec(),
        unital: unital.descriptor(),
        point_count,
        line_histogram: histogram,
        points: if dump_points {
            Some(unital.points()?.iter().map(|p| p.indices(&field)).collect())
        } else {
            None
        },
    };
    emit(&out, &output)
}

#[derive(Serialize)]
struct ScanEntry {
    alpha: u64,
    beta: u64,
    trace: ConstructionTrace,
}

#[derive(Serialize)]
struct OnanScanOutput {
    field: FieldSpec,
    kind: String,
    valid_nonclassical: u64,
    succeeded: u64,
    entries: Vec<ScanEntry>,
}

fn cmd_find_onan(args: UnitalArgs, out: Option<PathBuf>, verbose: bool) -> Result<(), CliError> {
    let field = build_field(args.p, args.m)?;
    if args.scan {
        if args.kind == Kind::Tits {
            return Err(CliError::input("--scan applies to --kind bm only"));
        }
        let params: Vec<_> =
            enumerate_valid_bm_params(&field).into_iter().filter(|p| !p.classical).collect();
        let mut entries = Vec::with_capacity(params.len());
        for p in &params {
            let unital = Unital::from_params(field.clone(), UnitalParams::OrthogonalBm(*p));
            let (_, trace) = construct(&unital)?;
            if verbose {
                eprintln!(
                    "ok alpha={} beta={}",
                    field.fq2_index(p.alpha),
                    field.fq2_index(p.beta)
                );
            }
            entries.push(ScanEntry {
                alpha: field.fq2_index(p.alpha),
                beta: field.fq2_index(p.beta),
                trace,
            });
        }
        eprintln!(
            "constructed O'Nan configurations for all {} valid nonclassical parameter pairs",
            entries.len()
        );
        let output = OnanScanOutput {
            field: field.spec(),
            kind: "orthogonal-bm".into(),
            valid_nonclassical: params.len() as u64,
            succeeded: entries.len() as u64,
            entries,
        };
        return emit(&out, &output);
    }

    let unital = single_unital(&field, &args)?;
    if unital.is_classical() {
        return Err(CliError::input(
            "classical unital (alpha = 0): contains no O'Nan configuration, nothing to construct",
        ));
    }
    let started = Instant::now();
    let (config, trace) = construct(&unital)?;
    let certificate = Certificate::new(&unital, &config, trace);
    eprintln!(
        "verified O'Nan configuration in {:?}; lines {:?}",
        started.elapsed(),
        certificate.lines
    );
    emit(&out, &certificate)
}

fn parse_anchor(field: &Field, spec: &str) -> Result<ProjPoint, CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::input("--anchor expects three comma-separated element indices"));
    }
    let mut idx = [0u32; 3];
    for (slot, part) in idx.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<u32>()
            .map_err(|_| CliError::input("--anchor indices must be integers"))?;
    }
    Ok(ProjPoint::from_indices(field, idx)?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    args: UnitalArgs,
    mode: Mode,
    anchor: Option<String>,
    workers: usize,
    max_list: usize,
    certificate: Option<PathBuf>,
    out: Option<PathBuf>,
    verbose: bool,
) -> Result<(), CliError> {
    let field = build_field(args.p, args.m)?;
    if args.scan {
        return Err(CliError::input("--scan is not supported for search"));
    }
    let anchor_point = match mode {
        Mode::Full => {
            if field.q() > 5 {
                return Err(CliError::input(format!(
                    "full search is supported for q <= 5 (got q = {}); use --mode anchored",
                    field.q()
                )));
            }
            if anchor.is_some() {
                return Err(CliError::input("--anchor requires --mode anchored"));
            }
            None
        }
        Mode::Anchored => Some(match &anchor {
            Some(spec) => parse_anchor(&field, spec)?,
            None => ProjPoint::from_indices(&field, [0, 0, 1])?,
        }),
    };
    let unital = single_unital(&field, &args)?;

    let cert_key = match &certificate {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let cert: Certificate = serde_json::from_str(&text)?;
            Some(cert.canonical_key())
        }
        None => None,
    };

    let started = Instant::now();
    let run = || exhaustive_search(&unital, anchor_point.as_ref());
    let outcome = if workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::input(format!("cannot build thread pool: {e}")))?;
        pool.install(run)?
    } else {
        run()?
    };
    let elapsed = started.elapsed();
    eprintln!(
        "search visited {} candidates over {} vertices in {:?}; {} configurations",
        outcome.candidates,
        outcome.vertices,
        elapsed,
        outcome.count()
    );
    if verbose {
        eprintln!("secant pairs: {}, total visits: {}", outcome.secant_pairs, outcome.total_visits());
    }
    let limit = if max_list == 0 { None } else { Some(max_list) };
    let report =
        build_search_report(&unital, &outcome, anchor_point.as_ref(), limit, cert_key.as_ref());
    emit(&out, &report)
}

#[derive(Serialize)]
struct VerifyOutput {
    verified: bool,
    unital: buekenhout::unitals::UnitalDescriptor,
    lines: [[u32; 3]; 4],
}

fn cmd_verify(path: PathBuf) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&path)?;
    let cert: Certificate = serde_json::from_str(&text)?;
    cert.reverify().map_err(|e| {
        let mut err = CliError::from(e);
        err.code = 2;
        err
    })?;
    eprintln!("certificate re-verified");
    emit(&None, &VerifyOutput { verified: true, unital: cert.unital.clone(), lines: cert.lines })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fields { p, m } => {
            let field = build_field(p, m)?;
            eprintln!("GF({}) inside GF({})", field.q(), field.q2());
            emit(&None, &field.spec())
        }
        Command::Build { unital, dump_points, out } => cmd_build(unital, dump_points, out, cli.verbose),
        Command::FindOnan { unital, out } => cmd_find_onan(unital, out, cli.verbose),
        Command::Search { unital, mode, anchor, workers, max_list, certificate, out } => {
            cmd_search(unital, mode, anchor, workers, max_list, certificate, out, cli.verbose)
        }
        Command::Verify { certificate } => cmd_verify(certificate),
    }
}
