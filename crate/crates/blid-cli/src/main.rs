use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use blid_cli::config::SuiteConfig;
use blid_cli::report::emit_plotdata;
use blid_cli::suites::SUITE_NAMES;
use blid_cli::{oneshot, runner};

#[derive(Parser)]
#[command(
    name = "blid",
    version,
    about = "Build and verify bounded local-identity maps",
    long_about = "Runs the verification suites for blid maps (damped identities on \
                  discretized function spaces) and their applications: germ extension, \
                  jet realization, conjugacy equations, and nonlinearity cutoff. \
                  Each suite writes a JSON report and CSV plot data; the exit code \
                  is 0 only when every case passes."
)]
struct Cli {
    /// TOML config; defaults are used when omitted
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed, overriding the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for reports and plot data
    #[arg(long, global = true, value_name = "DIR", default_value = "reports")]
    out: PathBuf,
    /// Worker threads; 0 lets the pool decide
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify identity balls, image bounds, metric containment, and
    /// differentiability of every blid construction
    VerifyBlid,
    /// Verify germ extensions, or extend one germ over one element
    Extend {
        /// Catalog germ for one-shot mode (geometric, mean, mean-square,
        /// exp-mean, constant)
        #[arg(long)]
        germ: Option<String>,
        /// Blid selector: pointwise, taylor:<k> or scaled:<c>
        #[arg(long, default_value = "pointwise")]
        blid: String,
        /// Serialized element; presence switches to one-shot mode
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
        /// Where to write the one-shot result (stdout when omitted)
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Verify jet realizations against their prescribed derivatives
    Borel,
    /// Verify the conjugacy-equation solver, or solve one system
    Cohomology {
        /// Square matrix as JSON rows; presence switches to one-shot mode
        #[arg(long, value_name = "FILE")]
        matrix: Option<PathBuf>,
        /// Jet sequence as JSON (required with --matrix)
        #[arg(long, value_name = "FILE")]
        jets: Option<PathBuf>,
        /// Truncation order; defaults to the highest jet degree
        #[arg(long)]
        order: Option<u32>,
        /// Where to write the one-shot result (stdout when omitted)
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Verify the nonlinearity cutoff and its smallness bounds
    LinearizeCutoff,
    /// Run every suite
    All,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => SuiteConfig::load(path)?,
        None => SuiteConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    cfg.validate()?;
    if cfg.workers > 0 {
        // Ignore the error from configuring an already-built pool.
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .ok();
    }

    match cli.command {
        Command::VerifyBlid => run_suites(&["verify-blid"], &cfg, &cli.out),
        Command::Borel => run_suites(&["borel"], &cfg, &cli.out),
        Command::LinearizeCutoff => run_suites(&["linearize-cutoff"], &cfg, &cli.out),
        Command::All => run_suites(&SUITE_NAMES, &cfg, &cli.out),
        Command::Extend { germ, blid, input, output } => match input {
            Some(input) => {
                let Some(germ) = germ else {
                    bail!("--germ is required with --input");
                };
                let value = oneshot::extend_once(&cfg, &germ, &blid, &input)?;
                oneshot::deliver(&value, output.as_deref())?;
                Ok(true)
            }
            None if germ.is_some() => bail!("--input is required with --germ"),
            None => run_suites(&["extend"], &cfg, &cli.out),
        },
        Command::Cohomology { matrix, jets, order, output } => match matrix {
            Some(matrix) => {
                let Some(jets) = jets else {
                    bail!("--jets is required with --matrix");
                };
                let value = oneshot::cohomology_once(&matrix, &jets, order)?;
                oneshot::deliver(&value, output.as_deref())?;
                Ok(true)
            }
            None if jets.is_some() || order.is_some() => {
                bail!("--matrix is required with --jets or --order")
            }
            None => run_suites(&["cohomology"], &cfg, &cli.out),
        },
    }
}

fn run_suites(names: &[&str], cfg: &SuiteConfig, out: &PathBuf) -> Result<bool> {
    let mut all_pass = true;
    for name in names {
        let (report, series) = runner::run_suite(name, cfg)?;
        for case in &report.cases {
            let tag = if case.pass { "PASS" } else { "FAIL" };
            println!("{tag} {name} {}: {}", case.case_id, case.summary);
        }
        let n_pass = report.cases.iter().filter(|c| c.pass).count();
        let path = report.write(out)?;
        emit_plotdata(&report, &series, out)?;
        println!(
            "suite {name}: {n_pass}/{} cases passed, report at {}",
            report.cases.len(),
            path.display()
        );
        all_pass &= report.pass;
    }
    Ok(all_pass)
}
