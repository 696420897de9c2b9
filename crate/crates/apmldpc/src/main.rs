//! Command-line front end: code construction reports, witness search
//! dispatch, store re-certification, exact latent certification, and
//! report rendering.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 certification
//! failure, 3 construction failure.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use apmldpc::code::{check_active_orthogonality, constrained_residues, psi, CssCode};
use apmldpc::config::{OutPaths, RunConfig};
use apmldpc::exact::{exact_latent, Attestation, ExactError, ExactOptions, Exclusion};
use apmldpc::runner::{
    dims_for, recertify, run_search, selected_codes, write_outputs, CertifyOutcome, RecertVerdict,
    RunnerError,
};
use apmldpc::spec::Catalog;
use apmldpc::store::{read_store, render_csv, render_text, replay, report_rows};

const DEFAULT_CATALOG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/catalog.toml");

const EXIT_USAGE: i32 = 1;
const EXIT_CERTIFICATION: i32 = 2;
const EXIT_CONSTRUCTION: i32 = 3;

#[derive(Parser)]
#[command(
    name = "apmldpc",
    version,
    about = "Affine-permutation CSS codes: construction, distance-bound searches, certification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build codes and print their parameters and check structure.
    Build(BuildArgs),
    /// Re-certify every record in a witness store.
    Certify(CertifyArgs),
    /// Run the configured witness searches and write store and reports.
    Search(SearchArgs),
    /// Exact latent-distance certification at one block factor.
    Exact(ExactArgs),
    /// Render the bounds table from an existing witness store.
    Report(ReportArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Catalog file (overrides the config file's `catalog` key).
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Run configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn load(&self) -> Result<(RunConfig, Catalog), String> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)
                .map_err(|e| format!("{}: {e}", path.display()))?,
            None => RunConfig::default(),
        };
        if let Some(path) = &self.catalog {
            cfg.catalog = Some(path.clone());
        }
        let catalog_path = cfg
            .catalog
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CATALOG));
        let catalog = Catalog::load(&catalog_path)
            .map_err(|e| format!("{}: {e}", catalog_path.display()))?;
        Ok((cfg, catalog))
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Code ids to build (repeatable); all catalog codes when omitted.
    #[arg(long = "code")]
    codes: Vec<String>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Witness store to re-certify (JSON lines).
    store: PathBuf,
    /// Restrict to these code ids (repeatable).
    #[arg(long = "code")]
    codes: Vec<String>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Code ids to search (repeatable); overrides the config selection.
    #[arg(long = "code")]
    codes: Vec<String>,
    /// Comma-separated method list; overrides the config selection.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Master seed; overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results are independent of this.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; overrides the config's [out] paths.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Code id to certify.
    #[arg(long)]
    code: String,
    /// Block factor m; must divide the code's P.
    #[arg(short, long)]
    m: usize,
    /// Quotient weight threshold tau; the certified bound is m*tau.
    #[arg(long)]
    tau: usize,
    /// Output directory for CNF exports; overrides the config path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Attestation JSON files ({cnf_hash, solver_name, result}).
    #[arg(long = "attest")]
    attestations: Vec<PathBuf>,
    /// Known certified latent witness weight on the X side.
    #[arg(long)]
    witness_x: Option<usize>,
    /// Known certified latent witness weight on the Z side.
    #[arg(long)]
    witness_z: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Witness store to render (JSON lines).
    store: PathBuf,
    /// Print CSV instead of the aligned text table.
    #[arg(long)]
    csv: bool,
    /// Also write report.txt and report.csv under this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Search(args) => cmd_search(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Report(args) => cmd_report(args),
    };
    std::process::exit(code);
}

fn fail(msg: impl std::fmt::Display, code: i32) -> i32 {
    eprintln!("error: {msg}");
    code
}

fn runner_exit(err: &RunnerError) -> i32 {
    match err {
        RunnerError::Build(_) => EXIT_CONSTRUCTION,
        _ => EXIT_USAGE,
    }
}

fn cmd_build(args: BuildArgs) -> i32 {
    let (mut cfg, catalog) = match args.common.load() {
        Ok(v) => v,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    if !args.codes.is_empty() {
        cfg.codes = args.codes;
    }
    let specs = match selected_codes(&catalog, &cfg) {
        Ok(v) => v,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    for spec in specs {
        let report = check_active_orthogonality(spec);
        let delta: BTreeSet<usize> = constrained_residues(spec);
        let nonzero: Vec<usize> = (0..spec.half())
            .filter(|&r| !psi(spec, r).is_zero())
            .collect();
        println!(
            "{}  P={} (J, L)=({}, {})",
            spec.id, spec.p, spec.j, spec.l
        );
        println!("  constrained residues: {}", set_string(&delta));
        if report.passes() {
            println!(
                "  psi: vanishes on all constrained residues; nonzero at {}",
                list_string(&nonzero)
            );
        } else {
            println!(
                "  psi: FAILS on constrained residues {}",
                list_string(&report.failing())
            );
            eprintln!("error: {}: active checks do not commute", spec.id);
            return EXIT_CONSTRUCTION;
        }
        let code = match CssCode::build(spec) {
            Ok(code) => code,
            Err(e) => return fail(e, EXIT_CONSTRUCTION),
        };
        println!(
            "  n={}  k={}  rank_x={}  rank_z={}  girth_x={}  girth_z={}",
            code.n, code.k, code.rank_x, code.rank_z, code.girth_x, code.girth_z
        );
        if code.girth_warning() {
            println!("  warning: girth below 8");
        }
    }
    0
}

fn set_string(set: &BTreeSet<usize>) -> String {
    let items: Vec<String> = set.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn list_string(items: &[usize]) -> String {
    let items: Vec<String> = items.iter().map(usize::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn outcome_line(outcome: &CertifyOutcome) -> String {
    let claim = if outcome.claimed {
        "accepted"
    } else {
        "rejected"
    };
    let result = match &outcome.verdict {
        RecertVerdict::Match(_) => "confirmed".to_string(),
        RecertVerdict::Mismatch(cert) => format!(
            "MISMATCH (recomputed kernel_ok={} non_stabilizer={} ranks {}/{})",
            cert.kernel_ok, cert.non_stabilizer, cert.rank_base, cert.rank_aug
        ),
        RecertVerdict::Invalid(reason) => format!("INVALID ({reason})"),
    };
    format!(
        "{} {} {} w={} {}: {}",
        outcome.code_id, outcome.side, outcome.method, outcome.weight, claim, result
    )
}

fn cmd_certify(args: CertifyArgs) -> i32 {
    let (_, catalog) = match args.common.load() {
        Ok(v) => v,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    let mut records = match read_store(&args.store) {
        Ok(v) => v,
        Err(e) => return fail(format!("{}: {e}", args.store.display()), EXIT_USAGE),
    };
    if !args.codes.is_empty() {
        records.retain(|r| args.codes.contains(&r.code_id));
    }
    if records.is_empty() {
        println!("no records to certify");
        return 0;
    }
    let outcomes = match recertify(&records, &catalog) {
        Ok(v) => v,
        Err(e) => return fail(&e, runner_exit(&e)),
    };
    let mut failures = 0usize;
    for outcome in &outcomes {
        println!("{}", outcome_line(outcome));
        if !outcome.passes() {
            failures += 1;
        }
    }
    let claimed = outcomes.iter().filter(|o| o.claimed).count();
    if failures == 0 {
        println!(
            "{} records, {} claimed accepted, all confirmed",
            outcomes.len(),
            claimed
        );
        0
    } else {
        println!(
            "{} records, {} claimed accepted, {} FAILED re-certification",
            outcomes.len(),
            claimed,
            failures
        );
        EXIT_CERTIFICATION
    }
}

fn cmd_search(args: SearchArgs) -> i32 {
    let (mut cfg, catalog) = match args.common.load() {
        Ok(v) => v,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    if !args.codes.is_empty() {
        cfg.codes = args.codes;
    }
    if !args.methods.is_empty() {
        cfg.methods = args.methods;
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    if let Some(dir) = &args.out {
        cfg.out = OutPaths {
            store: dir.join("witnesses.jsonl"),
            report_text: dir.join("report.txt"),
            report_csv: dir.join("report.csv"),
            cnf_dir: dir.join("cnf"),
        };
    }
    if let Err(e) = cfg.validate() {
        return fail(e, EXIT_USAGE);
    }
    if cfg.exact_selected() {
        eprintln!("note: exact certification needs a block factor and threshold; run the `exact` command");
    }
    let output = match run_search(&catalog, &cfg) {
        Ok(v) => v,
        Err(e) => return fail(&e, runner_exit(&e)),
    };
    if let Err(e) = write_outputs(&output, &catalog, &cfg.out) {
        return fail(&e, runner_exit(&e));
    }
    println!(
        "registered {} certified witnesses across {} codes",
        output.records.len(),
        output.dims.len()
    );
    println!("store:  {}", cfg.out.store.display());
    println!("report: {}", cfg.out.report_text.display());
    println!("csv:    {}", cfg.out.report_csv.display());
    match std::fs::read_to_string(&cfg.out.report_text) {
        Ok(text) => {
            println!();
            print!("{text}");
        }
        Err(e) => return fail(e, EXIT_USAGE),
    }
    0
}

fn exact_exit(err: &ExactError) -> i32 {
    match err {
        ExactError::BadBlockFactor { .. } | ExactError::BadThreshold => EXIT_USAGE,
        _ => EXIT_CONSTRUCTION,
    }
}

fn cmd_exact(args: ExactArgs) -> i32 {
    let (cfg, catalog) = match args.common.load() {
        Ok(v) => v,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    let spec = match catalog.get(&args.code) {
        Ok(spec) => spec,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    let code = match CssCode::build(spec) {
        Ok(code) => code,
        Err(e) => return fail(e, EXIT_CONSTRUCTION),
    };
    let mut attestations = Vec::new();
    for path in &args.attestations {
        match Attestation::load(path) {
            Ok(att) => attestations.push(att),
            Err(e) => return fail(format!("{}: {e}", path.display()), EXIT_USAGE),
        }
    }
    let cnf_dir = args.out.unwrap_or_else(|| cfg.out.cnf_dir.clone());
    let opts = ExactOptions {
        cnf_dir: Some(cnf_dir),
        attestations,
        witness_weights: (args.witness_x, args.witness_z),
        ..ExactOptions::default()
    };
    let verdicts = match exact_latent(&code, args.m, args.tau, &opts) {
        Ok(v) => v,
        Err(e) => return fail(&e, exact_exit(&e)),
    };
    for v in &verdicts {
        let rank = if v.rank_pass { "pass" } else { "FAIL" };
        let exclusion = match &v.exclusion {
            Exclusion::ProvedExhaustive => "proved by exhaustive sweep".to_string(),
            Exclusion::Refuted { support } => {
                format!("refuted: weight-{} vector below threshold", support.len())
            }
            Exclusion::CnfExported { path, cnf_hash } => {
                format!(
                    "pending external UNSAT attestation ({}; hash {})",
                    path.display(),
                    &cnf_hash[..16.min(cnf_hash.len())]
                )
            }
            Exclusion::AttestedUnsat { solver, .. } => {
                format!("attested UNSAT by {solver}")
            }
            Exclusion::Inconclusive => "inconclusive".to_string(),
        };
        let witness = v
            .witness_weight
            .map_or_else(|| "none".to_string(), |w| w.to_string());
        println!(
            "{} {} m={} tau={}: rank test {rank}; compressed dim {}; exclusion: {exclusion}; best latent witness weight: {witness}",
            code.spec.id, v.side, v.m, v.tau, v.dim
        );
        println!("  {}", v.statement);
    }
    0
}

fn cmd_report(args: ReportArgs) -> i32 {
    let (_, catalog) = match args.common.load() {
        Ok(v) => v,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    let records = match read_store(&args.store) {
        Ok(v) => v,
        Err(e) => return fail(format!("{}: {e}", args.store.display()), EXIT_USAGE),
    };
    let dims = match dims_for(&records, &catalog) {
        Ok(v) => v,
        Err(e) => return fail(&e, runner_exit(&e)),
    };
    let ledger = match replay(&records, &catalog) {
        Ok(v) => v,
        Err(e) => return fail(e, EXIT_USAGE),
    };
    let rows: Vec<_> = report_rows(&ledger, &catalog)
        .into_iter()
        .filter(|row| dims.contains_key(&row.code_id))
        .collect();
    let text = render_text(&rows, &dims);
    let csv = render_csv(&rows, &dims);
    if args.csv {
        print!("{csv}");
    } else {
        print!("{text}");
    }
    if let Some(dir) = &args.out {
        if let Err(e) = std::fs::create_dir_all(dir) {
            return fail(e, EXIT_USAGE);
        }
        let txt_path = dir.join("report.txt");
        let csv_path = dir.join("report.csv");
        if let Err(e) = std::fs::write(&txt_path, &text) {
            return fail(e, EXIT_USAGE);
        }
        if let Err(e) = std::fs::write(&csv_path, &csv) {
            return fail(e, EXIT_USAGE);
        }
        println!();
        println!("wrote {} and {}", txt_path.display(), csv_path.display());
    }
    0
}
