use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use losflow::data::CohortConfig;
use losflow::experiments::{self as exp, load_config, RunOptions};
use losflow::Result;

#[derive(Parser)]
#[command(name = "losflow", version, about = "LOS classification and GW/SSU patient-flow simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replication count; overrides the config.
    #[arg(long)]
    replications: Option<usize>,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            out: self.out.clone(),
            seed: self.seed,
            replications: self.replications,
        }
    }

    fn load<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        match &self.config {
            Some(p) => load_config(p),
            None => Err(losflow::Error::Config {
                path: "--config".into(),
                message: "this command needs a config file".into(),
            }),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Preprocess, cross-validate, compare models and score features.
    Pipeline(Common),
    /// Simulate one scenario and classifier over replications.
    Simulate(Common),
    /// Sweep GW/SSU capacities under common random numbers.
    CapacitySweep(Common),
    /// Sweep confusion-noise FP/FN rates under common random numbers.
    FpfnSweep(Common),
    /// Per-feature statistics and label balance.
    Summarize(Common),
    /// Write a synthetic encounter cohort as CSV.
    GenerateCohort(Common),
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pipeline(c) => exp::cmd_pipeline(&c.load()?, &c.options()).map(drop),
        Command::Simulate(c) => exp::cmd_simulate(&c.load()?, &c.options()).map(drop),
        Command::CapacitySweep(c) => exp::cmd_capacity_sweep(&c.load()?, &c.options()).map(drop),
        Command::FpfnSweep(c) => exp::cmd_fpfn_sweep(&c.load()?, &c.options()).map(drop),
        Command::Summarize(c) => exp::cmd_summarize(&c.load()?, &c.options()).map(drop),
        Command::GenerateCohort(c) => {
            let cfg: CohortConfig = match &c.config {
                Some(p) => load_config(p)?,
                None => CohortConfig::default(),
            };
            exp::cmd_generate_cohort(&cfg, &c.options()).map(drop)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
