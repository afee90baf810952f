//! CSV renderings of series, beta records, selection reports and backtests.

use std::collections::BTreeMap;

use csie_core::screener::Summary;
use csie_core::{BacktestRow, BetaRecord, EntropySeries, PortfolioBeta, SelectionReport};

use crate::error::{CliError, Result};
use crate::num::csv;
use crate::svg::{Point, Scatter};

pub const BACKTEST_HEADER: &str = "year,index_ror_pct,index_beta,n_selected,n_positive_beta,\
max_ror_pct,beta_of_max,min_ror_pct,beta_of_min,avg_ror_pct,set_beta";
pub const BETA_HEADER: &str = "subject,ror_pct,beta,window,start,end";
pub const MEMBER_HEADER: &str = "symbol,ror_pct,beta";
pub const MEMBER_DUMP_HEADER: &str = "year,symbol,ror_pct,beta";
/// Placeholder for cells without a value.
pub const EMPTY: &str = "-";

/// `date,<name>` rows, optionally with a window-averaged column. Averages are
/// dated by the first day of their window, so the tail of that column is
/// empty.
pub fn series_csv(name: &str, daily: &EntropySeries, averaged: Option<&EntropySeries>) -> String {
    let mut s = match averaged {
        Some(_) => format!("date,{name},{name}_ma\n"),
        None => format!("date,{name}\n"),
    };
    for (i, (date, v)) in daily.dates().iter().zip(daily.values()).enumerate() {
        s += &format!("{date},{}", csv(*v));
        if let Some(ma) = averaged {
            s.push(',');
            s += &ma.values().get(i).map_or(EMPTY.to_string(), |m| csv(*m));
        }
        s.push('\n');
    }
    s
}

pub fn beta_records_csv(records: &[BetaRecord]) -> String {
    let mut s = format!("{BETA_HEADER}\n");
    for r in records {
        s += &format!(
            "{},{},{},{},{},{}\n",
            r.subject,
            csv(r.ror_pct),
            csv(r.beta),
            r.window,
            r.start,
            r.end
        );
    }
    s
}

fn opt(v: Option<f64>) -> String {
    v.map_or(EMPTY.to_string(), csv)
}

fn summary_cells(summary: Option<&Summary>) -> [String; 5] {
    match summary {
        Some(s) => [
            csv(s.max_ror_pct),
            csv(s.beta_of_max),
            csv(s.min_ror_pct),
            csv(s.beta_of_min),
            csv(s.avg_ror_pct),
        ],
        None => core::array::from_fn(|_| EMPTY.to_string()),
    }
}

const SUMMARY_KEYS: [&str; 5] = ["max_ror_pct", "beta_of_max", "min_ror_pct", "beta_of_min", "avg_ror_pct"];

/// The report as `# key=value` lines followed by the member table.
pub fn selection_csv(report: &SelectionReport) -> String {
    let c = &report.config;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| s += &format!("# {k}={v}\n");
    kv("benchmark", report.benchmark().to_string());
    kv("start", c.start.to_string());
    kv("end", c.end.to_string());
    kv("interval_start", report.start.to_string());
    kv("interval_end", report.end.to_string());
    kv("window", c.window.to_string());
    kv("alpha", c.params.alpha().to_string());
    kv("positive_beta", c.require_positive_beta.to_string());
    kv("top_k", c.top_k.to_string());
    kv("index_ror_pct", csv(report.index.ror_pct));
    kv("index_beta", csv(report.index.beta));
    kv("n_eligible", report.n_eligible.to_string());
    kv("n_selected", report.members.len().to_string());
    kv("n_positive_beta", report.n_positive_beta.to_string());
    match &report.portfolio {
        PortfolioBeta::Computed(r) => {
            kv("portfolio_beta", csv(r.beta));
            kv("portfolio_ror_pct", csv(r.ror_pct));
        }
        PortfolioBeta::InsufficientMembers(n) => {
            kv("portfolio_beta", format!("insufficient members ({n})"));
        }
    }
    for (k, v) in SUMMARY_KEYS.iter().zip(summary_cells(report.summary.as_ref())) {
        kv(k, v);
    }
    s += MEMBER_HEADER;
    s.push('\n');
    for m in &report.members {
        s += &format!("{},{},{}\n", m.subject, csv(m.ror_pct), csv(m.beta));
    }
    s
}

/// Title used on scatter plots.
pub fn plot_title(benchmark: &str, start: &str, end: &str, window: &str) -> String {
    format!("{benchmark} {start} to {end}, w={window}")
}

fn reparse(x: f64) -> f64 {
    csv(x).parse().expect("rendered numbers parse")
}

/// Scatter of the report's top-k members. Values are taken at CSV precision
/// so that re-plotting the written report gives the same picture.
pub fn selection_scatter(report: &SelectionReport, top_k: usize) -> Scatter {
    Scatter {
        title: plot_title(
            report.benchmark(),
            &report.start.to_string(),
            &report.end.to_string(),
            &report.config.window.to_string(),
        ),
        benchmark: report.benchmark().to_string(),
        index_ror_pct: reparse(report.index.ror_pct),
        index_beta: reparse(report.index.beta),
        points: report.members[..top_k.min(report.members.len())]
            .iter()
            .map(|m| Point { label: m.subject.clone(), ror_pct: reparse(m.ror_pct), beta: reparse(m.beta) })
            .collect(),
    }
}

/// A report CSV read back: its header entries and member rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedReport {
    pub header: BTreeMap<String, String>,
    pub members: Vec<(String, f64, f64)>,
}

impl ParsedReport {
    pub fn get(&self, key: &str) -> Result<&str> {
        self.header
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Data(format!("report lacks `{key}`")))
    }

    pub fn number(&self, key: &str) -> Result<f64> {
        let v = self.get(key)?;
        v.parse().map_err(|_| CliError::Data(format!("report `{key}` is not a number: {v}")))
    }

    pub fn scatter(&self, top_k: usize) -> Result<Scatter> {
        let benchmark = self.get("benchmark")?;
        Ok(Scatter {
            title: plot_title(
                benchmark,
                self.get("interval_start")?,
                self.get("interval_end")?,
                self.get("window")?,
            ),
            benchmark: benchmark.to_string(),
            index_ror_pct: self.number("index_ror_pct")?,
            index_beta: self.number("index_beta")?,
            points: self.members[..top_k.min(self.members.len())]
                .iter()
                .map(|(label, ror_pct, beta)| Point { label: label.clone(), ror_pct: *ror_pct, beta: *beta })
                .collect(),
        })
    }
}

pub fn parse_selection_csv(text: &str) -> Result<ParsedReport> {
    let bad = |line: usize, what: &str| CliError::Data(format!("report line {line}: {what}"));
    let mut header = BTreeMap::new();
    let mut members = Vec::new();
    let mut seen_table = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if let Some(entry) = line.strip_prefix("# ") {
            let (k, v) = entry.split_once('=').ok_or_else(|| bad(line_no, "expected # key=value"))?;
            header.insert(k.to_string(), v.to_string());
        } else if !seen_table {
            if line != MEMBER_HEADER {
                return Err(bad(line_no, "expected the member header"));
            }
            seen_table = true;
        } else if !line.is_empty() {
            let f: Vec<&str> = line.split(',').collect();
            let [symbol, ror, beta] = f[..] else { return Err(bad(line_no, "expected 3 columns")) };
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line_no, "bad number"));
            members.push((symbol.to_string(), num(ror)?, num(beta)?));
        }
    }
    if !seen_table {
        return Err(CliError::Data("report has no member table".into()));
    }
    Ok(ParsedReport { header, members })
}

pub fn backtest_csv(rows: &[BacktestRow]) -> String {
    let mut s = format!("{BACKTEST_HEADER}\n");
    for row in rows {
        let cells: Vec<String> = match &row.outcome {
            Ok(r) => {
                let mut cells = vec![
                    csv(r.index.ror_pct),
                    csv(r.index.beta),
                    r.members.len().to_string(),
                    r.n_positive_beta.to_string(),
                ];
                cells.extend(summary_cells(r.summary.as_ref()));
                cells.push(opt(r.portfolio.beta()));
                cells
            }
            Err(_) => vec![EMPTY.to_string(); 10],
        };
        s += &format!("{},{}\n", row.year, cells.join(","));
    }
    s
}

/// Every member of every successful year, in report order.
pub fn member_dump_csv(rows: &[BacktestRow]) -> String {
    let mut s = format!("{MEMBER_DUMP_HEADER}\n");
    for row in rows {
        if let Ok(r) = &row.outcome {
            for m in &r.members {
                s += &format!("{},{},{},{}\n", row.year, m.subject, csv(m.ror_pct), csv(m.beta));
            }
        }
    }
    s
}

