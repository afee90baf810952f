use std::io::Write;
use std::path::{Path, PathBuf};

use csie_core::beta::MarketContext;
use csie_core::entropy::{self, Membership};
use csie_core::{screener, synth};
use csie_core::{EntropyParams, MarketPanel, NaiveDate, PanelBuilder, PanelView, ScreenConfig};
use sha2::{Digest, Sha256};

use crate::args::{
    parse_years, BacktestArgs, BetasArgs, CsieArgs, GenerateArgs, IeArgs, IngestArgs, Interval,
    PlotArgs, ScreenArgs,
};
use crate::error::{CliError, Result};
use crate::manifest::{self, RunManifest};
use crate::{io, num, report, specfile, svg};

fn join(list: &[String]) -> String {
    list.join(",")
}

/// Interval endpoints, defaulting to the first and last trading day.
fn endpoints(panel: &MarketPanel, interval: &Interval) -> Result<(NaiveDate, NaiveDate)> {
    let dates = panel.calendar().dates();
    let (Some(first), Some(last)) = (dates.first(), dates.last()) else {
        return Err(CliError::Data("the snapshot holds no trading days".into()));
    };
    Ok((interval.start.unwrap_or(*first), interval.end.unwrap_or(*last)))
}

fn view<'a>(
    panel: &'a MarketPanel,
    interval: &Interval,
    subset: Option<&[String]>,
) -> Result<PanelView<'a>> {
    let (start, end) = endpoints(panel, interval)?;
    Ok(panel.slice(start, end, subset)?)
}

fn record_interval(m: &mut RunManifest, interval: &Interval) {
    m.set_opt("start", interval.start).set_opt("end", interval.end);
}

fn stdout_line(line: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").map_err(|e| CliError::Data(format!("stdout: {e}")))
}

pub fn ingest(a: &IngestArgs) -> Result<()> {
    let mut builder = PanelBuilder::new();
    let mut manifest = RunManifest::new("ingest");
    let mut stderr = std::io::stderr().lock();
    let (mut files, mut failed, mut accepted, mut rejected) = (0usize, 0usize, 0usize, 0usize);

    for input in &a.inputs {
        let paths = io::expand_input(input)?;
        let mut aggregate = Sha256::new();
        for path in &paths {
            let file = io::ingest_file(path, a.format, &mut builder);
            let _ = io::print_diagnostics(&file, &mut stderr);
            files += 1;
            accepted += file.accepted;
            rejected += file.errors.len();
            failed += usize::from(file.failure.is_some());
            let name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
            aggregate.update(format!("{name} {}\n", file.digest.as_deref().unwrap_or("-")));
            if paths.len() == 1 && path == input {
                manifest.digest(input, file.digest.as_deref().unwrap_or("-"));
            }
        }
        if input.is_dir() {
            manifest.digest(input, &hex::encode(aggregate.finalize()));
        }
        manifest.set_path("input", input);
    }
    if files == 0 {
        return Err(CliError::Data("no input files".into()));
    }
    let _ = writeln!(
        stderr,
        "files={files} rows_accepted={accepted} rows_rejected={rejected} files_failed={failed}"
    );
    drop(stderr);

    let panel = builder.finish()?;
    io::write_snapshot(&panel, &a.output)?;
    manifest
        .set("format", format!("{:?}", a.format).to_lowercase().replace("perday", "per-day"))
        .set_path("output", &a.output)
        .set_opt("threads", a.common.threads);
    manifest.write(&manifest::beside(&a.output))?;
    stdout_line(&format!(
        "days={} symbols={} bars={} sparsity_pct={}",
        panel.n_days(),
        panel.n_symbols(),
        panel.n_bars(),
        num::sig(panel.sparsity_pct(), 4)
    ))?;
    if failed > 0 {
        return Err(CliError::Data(format!("{failed} of {files} input files failed")));
    }
    Ok(())
}

pub fn csie(a: &CsieArgs) -> Result<()> {
    let params = EntropyParams::new(a.alpha)?;
    let (panel, digest) = io::load_snapshot(&a.snapshot)?;
    let view = view(&panel, &a.interval, a.subset.as_deref())?;
    let daily = entropy::csie_series(&view, Membership::Market, &params)?;
    let averaged = a.window.map(|w| entropy::moving_average(&daily, w)).transpose()?;
    io::write_text(&a.output, &report::series_csv("csie", &daily, averaged.as_ref()))?;

    let mut m = RunManifest::new("csie");
    m.digest(&a.snapshot, &digest).set_path("snapshot", &a.snapshot);
    record_interval(&mut m, &a.interval);
    m.set_opt("window", a.window)
        .set("alpha", a.alpha)
        .set_opt("subset", a.subset.as_deref().map(join))
        .set_path("output", &a.output)
        .set_opt("threads", a.common.threads);
    m.write(&manifest::beside(&a.output))
}

pub fn ie(a: &IeArgs) -> Result<()> {
    let params = EntropyParams::new(a.alpha)?;
    let (panel, digest) = io::load_snapshot(&a.snapshot)?;
    let view = view(&panel, &a.interval, None)?;
    let mut m = RunManifest::new("ie");
    m.digest(&a.snapshot, &digest);

    let bars = match (&a.symbol, &a.index) {
        (Some(symbol), _) => {
            let id = panel
                .symbol_id(symbol)
                .ok_or_else(|| CliError::Data(format!("unknown symbol {symbol}")))?;
            view.symbol_bars(id).ok_or_else(|| {
                CliError::Data(format!("{symbol} is not traded on every day of the interval"))
            })?
        }
        (None, Some(path)) => {
            let (index, index_digest) = io::load_index(path)?;
            m.digest(path, &index_digest);
            index.aligned_bars(&view)?
        }
        (None, None) => return Err(CliError::Usage("give --symbol or --index".into())),
    };
    let series = entropy::ie_series(view.dates(), &bars, a.window, &params)?;
    io::write_text(&a.output, &report::series_csv("ie", &series, None))?;

    m.set_path("snapshot", &a.snapshot)
        .set_opt("symbol", a.symbol.as_ref())
        .set_opt("index", a.index.as_ref().map(|p| p.display()));
    record_interval(&mut m, &a.interval);
    m.set("window", a.window)
        .set("alpha", a.alpha)
        .set_path("output", &a.output)
        .set_opt("threads", a.common.threads);
    m.write(&manifest::beside(&a.output))
}

pub fn betas(a: &BetasArgs) -> Result<()> {
    let params = EntropyParams::new(a.alpha)?;
    let (panel, digest) = io::load_snapshot(&a.snapshot)?;
    let view = view(&panel, &a.interval, None)?;
    let mut m = RunManifest::new("betas");
    m.digest(&a.snapshot, &digest);

    let ctx = MarketContext::new(view, a.window, params)?;
    let mut records = Vec::new();
    if let Some(path) = &a.index {
        let (index, index_digest) = io::load_index(path)?;
        m.digest(path, &index_digest);
        records.push(ctx.index_beta(&index)?);
    }
    let ids = match &a.symbols {
        Some(list) => panel.resolve_symbols(list)?,
        None => ctx.view().eligible_symbols(),
    };
    records.extend(ctx.symbol_betas(&ids)?);
    if let Some(list) = &a.portfolio {
        records.push(ctx.portfolio_beta(&panel.resolve_symbols(list)?, "portfolio")?);
    }
    io::write_text(&a.output, &report::beta_records_csv(&records))?;

    m.set_path("snapshot", &a.snapshot)
        .set_opt("index", a.index.as_ref().map(|p| p.display()))
        .set_opt("symbols", a.symbols.as_deref().map(join))
        .set_opt("portfolio", a.portfolio.as_deref().map(join));
    record_interval(&mut m, &a.interval);
    m.set("window", a.window)
        .set("alpha", a.alpha)
        .set_path("output", &a.output)
        .set_opt("threads", a.common.threads);
    m.write(&manifest::beside(&a.output))
}

pub fn screen(a: &ScreenArgs) -> Result<()> {
    let params = EntropyParams::new(a.alpha)?;
    let (panel, digest) = io::load_snapshot(&a.snapshot)?;
    let (index, index_digest) = io::load_index(&a.index)?;
    let (start, end) = endpoints(&panel, &a.interval)?;
    let config = ScreenConfig {
        params,
        require_positive_beta: a.positive_beta,
        top_k: a.top_k,
        ..ScreenConfig::new(start, end, a.window)
    };
    let result = screener::screen(&config, &panel, &index)?;

    io::write_text(&a.output.join("report.csv"), &report::selection_csv(&result))?;
    let plot = report::selection_scatter(&result, a.top_k);
    io::write_text(&a.output.join("scatter.svg"), &svg::render(&plot))?;

    let mut m = RunManifest::new("screen");
    m.digest(&a.snapshot, &digest)
        .digest(&a.index, &index_digest)
        .set_path("snapshot", &a.snapshot)
        .set_path("index", &a.index);
    record_interval(&mut m, &a.interval);
    m.set("window", a.window)
        .set("alpha", a.alpha)
        .set("positive-beta", a.positive_beta)
        .set("top-k", a.top_k)
        .set_path("output", &a.output)
        .set_opt("threads", a.common.threads);
    m.write(&manifest::inside(&a.output))?;

    stdout_line(&format!(
        "benchmark={} interval={}..{} index_ror_pct={} index_beta={} eligible={} selected={} positive_beta={}",
        result.benchmark(),
        result.start,
        result.end,
        num::csv(result.index.ror_pct),
        num::csv(result.index.beta),
        result.n_eligible,
        result.members.len(),
        result.n_positive_beta
    ))
}

/// Where `--verbose` writes the per-year members.
pub fn members_path(output: &Path) -> PathBuf {
    output.with_extension("members.csv")
}

pub fn backtest(a: &BacktestArgs) -> Result<()> {
    let params = EntropyParams::new(a.alpha)?;
    let (panel, digest) = io::load_snapshot(&a.snapshot)?;
    let (index, index_digest) = io::load_index(&a.index)?;
    let years = match &a.years {
        Some(s) => parse_years(s).map_err(CliError::Usage)?,
        None => panel.calendar().years(),
    };
    if years.is_empty() {
        return Err(CliError::Data("the snapshot holds no trading days".into()));
    }
    let rows = screener::annual_backtest(&panel, &index, &years, a.window, params, a.positive_beta);

    io::write_text(&a.output, &report::backtest_csv(&rows))?;
    if a.verbose {
        io::write_text(&members_path(&a.output), &report::member_dump_csv(&rows))?;
    }
    let mut m = RunManifest::new("backtest");
    m.digest(&a.snapshot, &digest)
        .digest(&a.index, &index_digest)
        .set_path("snapshot", &a.snapshot)
        .set_path("index", &a.index)
        .set_opt("years", a.years.as_ref())
        .set("window", a.window)
        .set("alpha", a.alpha)
        .set("positive-beta", a.positive_beta)
        .set("verbose", a.verbose)
        .set_path("output", &a.output)
        .set_opt("threads", a.common.threads);
    m.write(&manifest::beside(&a.output))?;

    let mut failed = 0;
    let mut stderr = std::io::stderr().lock();
    for row in &rows {
        if let Err(e) = &row.outcome {
            failed += 1;
            let _ = writeln!(stderr, "year {}: {e}", row.year);
        }
    }
    if failed == rows.len() {
        return Err(CliError::Data("every year failed".into()));
    }
    Ok(())
}

pub fn generate(a: &GenerateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.spec).map_err(|e| CliError::io(&a.spec, e))?;
    let spec = specfile::parse_spec(&text)?;
    let panel = synth::generate_market(&spec.market)?;
    let index = synth::generate_index(&panel, &spec.index);

    io::write_snapshot(&panel, &a.output.join("snapshot.csv"))?;
    io::write_index(&index, &a.output.join("index.csv"))?;
    if let Some(dir) = &a.per_day {
        io::write_per_day_files(&panel, &spec.market_name, dir)?;
    }
    let mut m = RunManifest::new("generate");
    m.digest(&a.spec, &io::sha256_hex(text.as_bytes()))
        .set_path("spec", &a.spec)
        .set_opt("per-day", a.per_day.as_ref().map(|p| p.display()))
        .set_path("output", &a.output)
        .set_opt("threads", a.common.threads);
    m.write(&manifest::inside(&a.output))?;
    stdout_line(&format!(
        "days={} symbols={} bars={}",
        panel.n_days(),
        panel.n_symbols(),
        panel.n_bars()
    ))
}

pub fn plot(a: &PlotArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.report).map_err(|e| CliError::io(&a.report, e))?;
    let parsed = report::parse_selection_csv(&text)?;
    let top_k = match a.top_k {
        Some(k) => k,
        None => parsed
            .get("top_k")?
            .parse()
            .map_err(|_| CliError::Data("report `top_k` is not a count".into()))?,
    };
    io::write_text(&a.output, &svg::render(&parsed.scatter(top_k)?))?;
    let mut m = RunManifest::new("plot");
    m.digest(&a.report, &io::sha256_hex(text.as_bytes()))
        .set_path("report", &a.report)
        .set_opt("top-k", a.top_k)
        .set_path("output", &a.output)
        .set_opt("threads", a.common.threads);
    m.write(&manifest::beside(&a.output))
}
