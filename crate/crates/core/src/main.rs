use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use design_sieve::formulas::{cardinality_bounds, derived_quantities, nozaki_bound, nozaki_dimension};
use design_sieve::record::{analyze_candidate, survivor_kind, Mode, PipelineSettings};
use design_sieve::report::{self, Format};
use design_sieve::scan::{scan, ScanOptions};
use design_sieve::spectrum::{Policy, Quantity};
use design_sieve::{DesignCandidate, Error};

const EXIT_SURVIVORS: u8 = 10;

#[derive(Parser)]
#[command(name = "design-sieve", version, about = "Search for spherical 4-distance 7-designs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan every M for each dimension in a range.
    Scan(ScanArgs),
    /// Run the full pipeline on one (n, M) and print every intermediate.
    Check(CheckArgs),
    /// Print the cardinality range and Nozaki bound for dimensions.
    Bounds {
        #[arg(long)]
        n: u64,
        /// Print every dimension from `--n` to here.
        #[arg(long)]
        n_max: Option<u64>,
    },
}

#[derive(Args)]
struct PolicyArgs {
    /// Starting precision for root enclosures.
    #[arg(long, value_name = "BITS", default_value_t = Policy::default().precision_start)]
    precision_start: u32,
    /// Precision at which refinement gives up.
    #[arg(long, value_name = "BITS", default_value_t = Policy::default().precision_max)]
    precision_max: u32,
    /// Enclosure width, as `2^-BITS`, needed to call a value numerically integral.
    #[arg(long, value_name = "BITS", default_value_t = Policy::default().confirmation_width)]
    confirmation_width: u32,
    /// Refute integer Nozaki products that admit no bounded factorization.
    #[arg(long)]
    enable_k_factorization_stage: bool,
}

impl PolicyArgs {
    fn settings(&self, mode: Mode) -> anyhow::Result<PipelineSettings> {
        anyhow::ensure!(
            self.precision_start >= 1 && self.precision_start <= self.precision_max,
            "need 1 <= --precision-start <= --precision-max"
        );
        Ok(PipelineSettings {
            mode,
            policy: Policy {
                precision_start: self.precision_start,
                precision_max: self.precision_max,
                confirmation_width: self.confirmation_width,
            },
            k_factorization_stage: self.enable_k_factorization_stage,
        })
    }
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, default_value_t = 3)]
    n_min: u64,
    #[arg(long)]
    n_max: u64,
    #[arg(long, value_enum, default_value_t = Mode::Staged)]
    mode: Mode,
    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Reports to write; repeat or comma-separate. Defaults to all.
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Skip dimensions the ledger in `--out` already marks done.
    #[arg(long)]
    resume: bool,
    #[command(flatten)]
    policy: PolicyArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    m: u64,
    /// Also print the JSONL record.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    policy: PolicyArgs,
}

fn run_scan(args: ScanArgs) -> anyhow::Result<ExitCode> {
    let mut formats = args.format.clone();
    if formats.is_empty() {
        formats = Format::ALL.to_vec();
    }
    formats.dedup();
    let opts = ScanOptions {
        n_min: args.n_min,
        n_max: args.n_max,
        settings: args.policy.settings(args.mode)?,
        jobs: args.jobs,
        resume: args.resume,
        formats,
    };
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let (report, _) = scan(&opts, &args.out)?;
    print!("{}", report::summary(&report));
    Ok(if report.survivors.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SURVIVORS)
    })
}

fn run_check(args: CheckArgs) -> anyhow::Result<ExitCode> {
    let c = DesignCandidate::new(args.n, args.m)?;
    let settings = args.policy.settings(Mode::Staged)?;
    let (lo, hi) = cardinality_bounds(c.n())?;
    let q = derived_quantities(&c);
    let r = analyze_candidate(&c, &settings)?;

    println!("n = {}, M = {}  ({lo} < M <= {hi})", c.n(), c.m());
    println!("A = {}", q.a);
    println!("B = {}", q.b);
    let coeffs: Vec<String> = q.quartic.descending().iter().map(|x| x.to_string()).collect();
    println!("quartic coefficients (t^4..t^0) = {}", coeffs.join(", "));
    println!("R(n, M) = {}", q.r);
    println!("coarse sieve: {}", if r.coarse { "pass" } else { "fail" });
    for (name, l) in [("lemma 3", &r.lemma3), ("lemma 5", &r.lemma5)] {
        println!(
            "{name}: case {}, requires {}: {} [{}]",
            l.case,
            l.required,
            if l.passed { "pass" } else { "fail" },
            l.coverage
        );
    }
    println!("XYZT = {} ({})", r.xyzt, if r.xyzt_integer { "integer" } else { "not an integer" });
    println!(
        "k_a k_b k_c k_d = {} ({}), |k| <= {}",
        r.nozaki,
        if r.nozaki_integer { "integer" } else { "not an integer" },
        r.k_bound
    );
    if let Some(feasible) = r.k_factorization {
        println!("bounded factorization of the k product: {}", if feasible { "exists" } else { "none" });
    }
    for (name, e) in ["a", "b", "c", "d"].iter().zip(&r.roots) {
        println!("{name} in [{}, {}]", e[0], e[1]);
    }
    let quantities = Quantity::ALL.map(|q| q.to_string());
    for (name, e) in quantities.iter().zip(r.xyz_t.iter().chain(&r.k)) {
        println!("{name} in [{}, {}]", e[0], e[1]);
    }
    for v in &r.verdicts {
        println!("{}: {} at {} bits", v.quantity, v.outcome, v.precision_bits);
    }
    println!("stage: {}", r.stage);
    match (&r.refutation, survivor_kind(&r)) {
        (Some(reason), _) => println!("refuted: {reason}"),
        (None, Some(kind)) => println!("SURVIVOR ({kind})"),
        (None, None) => {}
    }
    if args.json {
        print!("{}", report::jsonl(std::slice::from_ref(&r)));
    }
    Ok(if r.is_survivor() {
        ExitCode::from(EXIT_SURVIVORS)
    } else {
        ExitCode::SUCCESS
    })
}

fn run_bounds(n: u64, n_max: Option<u64>) -> anyhow::Result<ExitCode> {
    let n_max = n_max.unwrap_or(n);
    if n > n_max {
        return Err(Error::InvalidRange { n_min: n, n_max }.into());
    }
    println!("n\ttight\tabsolute\tcandidates\tN\tk_bound");
    for n in n..=n_max {
        let (lo, hi) = cardinality_bounds(n)?;
        println!(
            "{n}\t{lo}\t{hi}\t{}\t{}\t{}",
            hi - lo,
            nozaki_dimension(n),
            nozaki_bound(n)
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scan(args) => run_scan(args),
        Command::Check(args) => run_check(args),
        Command::Bounds { n, n_max } => run_bounds(n, n_max),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
