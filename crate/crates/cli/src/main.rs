//! Campaign CLI: `run` executes configured verification suites and writes
//! report rows; `describe` prints a suite's contract; `version` prints the
//! build version.
//!
//! Exit codes for `run`: 0 all pass; 1 ordinary failures or precondition
//! rows; 2 anomaly (a theorem-backed suite failed, or an internal error);
//! 3 verified search candidate; 4 configuration errors.

mod config;
mod runner;
mod suites;

use clap::{Parser, Subcommand};

use config::{CampaignConfig, Format};

#[derive(Parser)]
#[command(name = "trace-jensen", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification campaigns from a config file and/or flags.
    Run(RunArgs),
    /// Print a suite's reference, preconditions and report schema.
    Describe { suite: String },
    /// Print the version.
    Version,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<String>,
    /// Comma-separated suite ids.
    #[arg(long, value_delimiter = ',')]
    suites: Vec<String>,
    /// Number of seeds per suite.
    #[arg(long)]
    seeds: Option<usize>,
    /// Base seed.
    #[arg(long)]
    seed_base: Option<u64>,
    /// Dimension range `a..b` (inclusive).
    #[arg(long)]
    dims: Option<String>,
    /// Comma-separated catalog function names.
    #[arg(long, value_delimiter = ',')]
    functions: Vec<String>,
    /// Report path.
    #[arg(long)]
    out: Option<String>,
    /// Report format.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Relative verdict tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated grid sizes for the sine split suite.
    #[arg(long, value_delimiter = ',')]
    lp_grids: Vec<usize>,
    /// Trials per arm for the three-factor search.
    #[arg(long)]
    rst_trials: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => run(args),
        Command::Describe { suite } => match suites::describe(&suite) {
            Some(text) => {
                print!("{text}");
                0
            }
            None => {
                eprintln!("unknown suite `{suite}`; known suites:");
                for s in suites::SUITES {
                    eprintln!("  {}", s.id);
                }
                4
            }
        },
        Command::Version => {
            println!("trace-jensen {}", env!("CARGO_PKG_VERSION"));
            0
        }
    };
    std::process::exit(code);
}

fn run(args: RunArgs) -> i32 {
    let mut cfg = match args.config {
        Some(path) => {
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read config `{path}`: {e}");
                    return 4;
                }
            };
            match serde_json::from_str::<CampaignConfig>(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config parse error in `{path}`: {e}");
                    return 4;
                }
            }
        }
        None => CampaignConfig::default(),
    };

    // flag overrides mirror config fields
    if !args.suites.is_empty() {
        cfg.suites = args.suites;
    }
    if let Some(n) = args.seeds {
        cfg.seeds.count = n;
    }
    if let Some(b) = args.seed_base {
        cfg.seeds.base = b;
    }
    if let Some(d) = args.dims {
        match parse_dims(&d) {
            Some((lo, hi)) => {
                cfg.dims.min = lo;
                cfg.dims.max = hi;
            }
            None => {
                eprintln!("invalid --dims `{d}`; expected `a..b`");
                return 4;
            }
        }
    }
    if !args.functions.is_empty() {
        cfg.functions = args.functions;
    }
    if let Some(o) = args.out {
        cfg.output.path = o;
    }
    if let Some(f) = args.format {
        cfg.output.format = match f.as_str() {
            "json" => Format::Json,
            "csv" => Format::Csv,
            other => {
                eprintln!("unknown format `{other}`; expected json or csv");
                return 4;
            }
        };
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(t) = args.tol {
        cfg.tolerances.rel = t;
    }
    if !args.lp_grids.is_empty() {
        cfg.lp_grids = args.lp_grids;
    }
    if let Some(r) = args.rst_trials {
        cfg.rst_trials = r;
    }

    if let Err(e) = cfg.validate() {
        eprintln!("invalid configuration: {e}");
        return 4;
    }

    let summary = match runner::execute(&cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("campaign failed: {e}");
            return 2;
        }
    };
    for err in &summary.hard_errors {
        eprintln!("internal error: {err}");
    }
    match runner::dump_anomalies(&cfg, &summary) {
        Ok(Some(path)) => eprintln!("anomaly/candidate dump: {path}"),
        Ok(None) => {}
        Err(e) => eprintln!("could not write anomaly dump: {e}"),
    }
    println!(
        "rows: {} pass, {} fail, {} precondition-failed -> {}",
        summary.pass, summary.fail, summary.precondition_failed, cfg.output.path
    );
    let code = summary.exit_code();
    println!(
        "exit {code} ({})",
        match code {
            0 => "all pass",
            1 => "ordinary failures or precondition rows",
            2 => "anomaly: a theorem-backed suite failed",
            3 => "verified search candidate",
            _ => "configuration error",
        }
    );
    code
}

fn parse_dims(text: &str) -> Option<(usize, usize)> {
    let (lo, hi) = text.split_once("..")?;
    Some((lo.parse().ok()?, hi.parse().ok()?))
}
