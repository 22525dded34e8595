use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ewsim::attribution::attribute;
use ewsim::market_data::write_history;
use ewsim::portfolio::read_trades;
use ewsim::report::{emit_summary, run_grid, DataSource, Format, RunConfig};

/// Equal-weighted portfolio simulation and attribution.
#[derive(Debug, Parser)]
#[command(name = "simulate", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Run configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for synthetic data, overriding `data.synthetic.seed`.
    #[arg(long)]
    seed: Option<u64>,

    /// Also write the loaded market history as CSV to this path.
    #[arg(long)]
    export_market: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Attribute trading profit for an existing trade log.
    Attribute {
        /// Trade log CSV (`date,security_id,weight_change,price_index,is_reconstitution_buy`).
        #[arg(long)]
        trades: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tc_bps: f64,
        /// Destination for `date,trading_profit`; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn simulate(cli: &Cli) -> Result<()> {
    let Some(config_path) = &cli.config else {
        bail!("missing --config <path>");
    };
    let mut config = RunConfig::from_path(config_path)
        .with_context(|| format!("loading config {}", config_path.display()))?;
    if let Some(seed) = cli.seed {
        match (config.data.source, config.data.synthetic.as_mut()) {
            (DataSource::Synthetic, Some(spec)) => spec.seed = seed,
            _ => bail!("--seed applies only to synthetic data"),
        }
    }
    if let Some(path) = &cli.export_market {
        let history = config.load_market()?;
        write_history(&history, BufWriter::new(File::create(path)?))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let out_dir = cli.out.clone().unwrap_or_else(|| config.output.dir.clone());
    let report = run_grid(&config, &out_dir)?;
    let mut stdout = io::stdout().lock();
    stdout.write_all(&emit_summary(&report.rows, Format::Plain))?;
    eprintln!(
        "wrote {} files for {} cell(s) to {}",
        report.files.len(),
        report.cells.len(),
        out_dir.display()
    );
    Ok(())
}

fn attribute_log(trades: &PathBuf, tc_bps: f64, out: Option<&PathBuf>) -> Result<()> {
    if !(tc_bps >= 0.0) {
        bail!("--tc-bps must be non-negative");
    }
    let events = read_trades(File::open(trades).with_context(|| format!("opening {}", trades.display()))?)?;
    let series = attribute(&events, tc_bps)?;
    match out {
        Some(path) => series.write_csv(BufWriter::new(File::create(path)?))?,
        None => series.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Some(Command::Attribute { trades, tc_bps, out }) => attribute_log(trades, *tc_bps, out.as_ref()),
        None => simulate(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
