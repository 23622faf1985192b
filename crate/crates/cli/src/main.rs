use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use pplab::experiments::{self, OutputFormat, RunReport, Scenario, ScenarioConfig};

/// Poisson-approximation experiments for functionals of point processes.
#[derive(Debug, Parser)]
#[command(name = "pplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write rows here instead of the config's output path.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Output format, overriding the config.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run a built-in verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// List the available scenarios.
    ListScenarios,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Suite {
    Mecke,
    Glauber,
    Ot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    GnuplotDat,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
            Format::GnuplotDat => OutputFormat::GnuplotDat,
        }
    }
}

/// Instances and tolerances of the transport suite.
const OT_INSTANCES: usize = 200;
const OT_COST_TOL: f64 = 1e-9;
const OT_GAP_TOL: f64 = 1e-8;

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("PPLAB_THREADS") {
        let n: usize = v.parse().with_context(|| format!("PPLAB_THREADS={v} is not a thread count"))?;
        if n == 0 {
            bail!("PPLAB_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        info!("using {n} worker threads");
    }
    Ok(())
}

fn print_report(report: &RunReport) {
    for r in &report.rows {
        eprintln!("{}", experiments::describe(r));
    }
    let s = &report.summary;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
    eprintln!(
        "{}: slope {} (predicted {}), {} violation(s), {:.1}s",
        s.scenario,
        fmt(s.slope),
        fmt(s.rate_pred),
        s.violations.len(),
        s.elapsed_seconds
    );
}

/// Whether every threshold of the run was met.
fn run_config(mut config: ScenarioConfig, output: Option<PathBuf>, format: Option<Format>) -> anyhow::Result<bool> {
    if let Some(f) = format {
        config.format = f.into();
    }
    if output.is_some() {
        config.output = output;
    }
    let report = experiments::run(&config)?;
    print_report(&report);
    match &config.output {
        Some(path) => experiments::emit(&report.rows, config.format, path)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", experiments::render(&report.rows, config.format)?),
    }
    Ok(report.summary.violations.is_empty())
}

fn verify(suite: Suite, seed: u64) -> anyhow::Result<bool> {
    let scenario = match suite {
        Suite::Ot => {
            let c = experiments::ot_self_check(OT_INSTANCES, seed)?;
            let ok = c.max_cost_error <= OT_COST_TOL && c.max_duality_gap < OT_GAP_TOL;
            println!(
                "ot: {} instances, max cost error {:.2e}, max duality gap {:.2e}: {}",
                c.instances,
                c.max_cost_error,
                c.max_duality_gap,
                if ok { "pass" } else { "FAIL" }
            );
            return Ok(ok);
        }
        Suite::Mecke => Scenario::MeckeVerify,
        Suite::Glauber => Scenario::GlauberVerify,
    };
    let mut config = ScenarioConfig::example(scenario);
    config.seed = seed;
    let report = experiments::run(&config)?;
    for (i, r) in report.rows.iter().enumerate() {
        let ok = !report.summary.violations.contains(&i);
        println!("{}  {}", if ok { "pass" } else { "FAIL" }, experiments::describe(r));
    }
    Ok(report.summary.violations.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Run { config, output, format } => {
            let config = ScenarioConfig::from_path(&config).with_context(|| format!("reading {}", config.display()))?;
            run_config(config, output, format)
        }
        Command::Verify { suite, seed } => verify(suite, seed),
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<18} {}", s.name(), s.description());
            }
            Ok(true)
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
