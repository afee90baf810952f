use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use csie_core::format::parse_iso_date;
use csie_core::screener::DEFAULT_TOP_K;
use csie_core::NaiveDate;

use crate::io::InputFormat;

#[derive(Debug, Parser)]
#[command(name = "csie", version, about = "Entropy-based market volatility, betas and portfolio screening")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse per-day or long EOD files into a panel snapshot
    Ingest(IngestArgs),
    /// Daily CSIE of the market or a symbol subset, with its moving average
    Csie(CsieArgs),
    /// Windowed IE of one symbol or an index
    Ie(IeArgs),
    /// Rates of return and entropy betas against the market CSIE
    Betas(BetasArgs),
    /// Find symbols beating an index on return at equal or lower beta
    Screen(ScreenArgs),
    /// Screen every calendar year and tabulate the outcomes
    Backtest(BacktestArgs),
    /// Write a synthetic market and its index from a spec file
    Generate(GenerateArgs),
    /// Re-render the scatter plot of a screen report
    Plot(PlotArgs),
}

fn iso_date(s: &str) -> Result<NaiveDate, String> {
    parse_iso_date(s).ok_or_else(|| format!("expected YYYY-MM-DD, got {s:?}"))
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Key-value file supplying flags; the command line takes precedence
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Cap on worker threads
    #[arg(long, value_parser = positive)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct Interval {
    /// First day; defaults to the first trading day of the data
    #[arg(long, value_parser = iso_date)]
    pub start: Option<NaiveDate>,
    /// Last day; defaults to the last trading day of the data
    #[arg(long, value_parser = iso_date)]
    pub end: Option<NaiveDate>,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// Input files or directories
    #[arg(long = "input", required = true, num_args = 1.., value_name = "PATH")]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    /// Snapshot file to write
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CsieArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[command(flatten)]
    pub interval: Interval,
    /// Moving-average window in trading days
    #[arg(long, value_parser = positive)]
    pub window: Option<usize>,
    #[arg(long, default_value_t = 1.34)]
    pub alpha: f64,
    /// Comma-separated symbols; the series is then the subset's own CSIE
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<String>>,
    /// CSV file to write
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(group = clap::ArgGroup::new("subject").required(true).args(["symbol", "index"]))]
pub struct IeArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub symbol: Option<String>,
    /// Index file in the long format
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[command(flatten)]
    pub interval: Interval,
    #[arg(long, value_parser = positive)]
    pub window: usize,
    #[arg(long, default_value_t = 1.34)]
    pub alpha: f64,
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct BetasArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    /// Index file; its record comes first
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Comma-separated symbols; defaults to every eligible symbol
    #[arg(long, value_delimiter = ',')]
    pub symbols: Option<Vec<String>>,
    /// Comma-separated set whose own CSIE beta is appended as `portfolio`
    #[arg(long, value_delimiter = ',')]
    pub portfolio: Option<Vec<String>>,
    #[command(flatten)]
    pub interval: Interval,
    #[arg(long, value_parser = positive)]
    pub window: usize,
    #[arg(long, default_value_t = 1.34)]
    pub alpha: f64,
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ScreenArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    #[command(flatten)]
    pub interval: Interval,
    #[arg(long, value_parser = positive)]
    pub window: usize,
    #[arg(long, default_value_t = 1.34)]
    pub alpha: f64,
    /// Also require a strictly positive beta
    #[arg(long)]
    pub positive_beta: bool,
    /// Members shown on the plot
    #[arg(long, default_value_t = DEFAULT_TOP_K, value_parser = positive)]
    pub top_k: usize,
    /// Directory receiving report.csv, scatter.svg and run.manifest
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct BacktestArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    /// Years such as `2019,2021` or `2001-2021`; defaults to every year in the data
    #[arg(long)]
    pub years: Option<String>,
    #[arg(long, value_parser = positive)]
    pub window: usize,
    #[arg(long, default_value_t = 1.34)]
    pub alpha: f64,
    #[arg(long)]
    pub positive_beta: bool,
    /// Also write every year's members next to the output
    #[arg(long)]
    pub verbose: bool,
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Market spec file
    #[arg(long)]
    pub spec: PathBuf,
    /// Also write one file per trading day into this directory
    #[arg(long, value_name = "DIR")]
    pub per_day: Option<PathBuf>,
    /// Directory receiving snapshot.csv, index.csv and run.manifest
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// report.csv written by `screen`
    #[arg(long)]
    pub report: PathBuf,
    /// Members to plot; defaults to the report's own setting
    #[arg(long, value_parser = positive)]
    pub top_k: Option<usize>,
    /// SVG file to write
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

/// Parses `2019,2021`, `2001-2003` or a mix of both.
pub fn parse_years(s: &str) -> Result<Vec<i32>, String> {
    let mut years = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("invalid year list entry {part:?}");
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (i32, i32) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                years.extend(a..=b);
            }
            None => years.push(part.parse().map_err(|_| bad())?),
        }
    }
    if years.is_empty() {
        return Err("no years given".into());
    }
    Ok(years)
}
