//! File-level input and output: chunked reading with digests, ingestion of
//! per-day and long files, snapshot and index persistence.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use csie_core::format::{self, EodRows};
use csie_core::{EodFormat, IndexSeries, MarketPanel, NaiveDate, OhlcvBar, PanelBuilder, RowError};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

const CHUNK_BYTES: usize = 32 << 20;
const WRITE_BUFFER: usize = 1 << 20;
/// Row diagnostics printed per file before summarising the rest.
const MAX_REPORTED_ROWS: usize = 5;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Streams a text file in line-aligned chunks. `f` receives each chunk and
/// the number of lines before it. Returns the file's SHA-256.
pub fn read_chunks(path: &Path, mut f: impl FnMut(&str, usize) -> Result<()>) -> Result<String> {
    let mut file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let size = file.metadata().map_or(0, |m| m.len() as usize);
    // One spare byte lets a small file arrive, and hit end of file, in one chunk.
    let chunk = CHUNK_BYTES.min(size + 1).max(4096);
    let mut hasher = Sha256::new();
    let mut buf: Vec<u8> = Vec::with_capacity(chunk);
    let mut lines_before = 0usize;
    let mut eof = false;
    while !eof {
        let filled = buf.len();
        buf.resize(filled + chunk, 0);
        let mut end = filled;
        while end < buf.len() {
            match file.read(&mut buf[end..]) {
                Ok(0) => {
                    eof = true;
                    break;
                }
                Ok(n) => end += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(CliError::io(path, e)),
            }
        }
        hasher.update(&buf[filled..end]);
        buf.truncate(end);
        let cut = if eof {
            buf.len()
        } else {
            match buf.iter().rposition(|b| *b == b'\n') {
                Some(i) => i + 1,
                None => continue,
            }
        };
        let text = std::str::from_utf8(&buf[..cut])
            .map_err(|_| CliError::Data(format!("{}: not valid UTF-8", path.display())))?;
        f(text, lines_before)?;
        lines_before += text.bytes().filter(|b| *b == b'\n').count();
        buf.drain(..cut);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    /// Per-day when the file name carries a date, long otherwise.
    Auto,
    PerDay,
    Long,
}

/// Files named by one input path: the path itself, or a directory's entries
/// (one level, sorted by name, hidden files skipped).
pub fn expand_input(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = fs::metadata(path).map_err(|e| CliError::io(path, e))?;
    if !meta.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| CliError::io(path, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| !file_name(p).starts_with('.'))
        .collect();
    entries.sort();
    Ok(entries)
}

fn file_name(path: &Path) -> &str {
    path.file_name().and_then(|n| n.to_str()).unwrap_or("")
}

fn resolve_format(path: &Path, format: InputFormat) -> std::result::Result<EodFormat, String> {
    let dated = format::per_day_file_date(file_name(path));
    match (format, dated) {
        (InputFormat::Long, _) | (InputFormat::Auto, None) => Ok(EodFormat::Long),
        (_, Some(date)) => Ok(EodFormat::PerDay(date)),
        (InputFormat::PerDay, None) => {
            Err("per-day file names must look like MARKET_YYYYMMDD.txt".into())
        }
    }
}

/// Outcome of ingesting one file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileReport {
    pub path: PathBuf,
    pub accepted: usize,
    pub errors: Vec<RowError>,
    pub digest: Option<String>,
    /// Set when nothing from the file could be used.
    pub failure: Option<String>,
}

/// Parses `path` into `builder`, collecting row errors.
pub fn ingest_file(path: &Path, format: InputFormat, builder: &mut PanelBuilder) -> FileReport {
    let mut report = FileReport { path: path.to_path_buf(), ..FileReport::default() };
    let eod = match resolve_format(path, format) {
        Ok(f) => f,
        Err(msg) => {
            report.failure = Some(msg);
            return report;
        }
    };
    let read = read_chunks(path, |text, base| {
        for row in EodRows::new(text, eod) {
            match row {
                Ok(row) => {
                    builder.push(row.symbol, row.date, row.bar);
                    report.accepted += 1;
                }
                Err(mut e) => {
                    e.line += base;
                    report.errors.push(e);
                }
            }
        }
        Ok(())
    });
    match read {
        Ok(digest) => report.digest = Some(digest),
        Err(e) => report.failure = Some(e.to_string()),
    }
    if report.failure.is_none() && report.accepted == 0 && !report.errors.is_empty() {
        report.failure = Some("no valid rows".into());
    }
    report
}

/// Writes row diagnostics for one file to `out`.
pub fn print_diagnostics(report: &FileReport, out: &mut impl Write) -> io::Result<()> {
    let name = report.path.display();
    for e in report.errors.iter().take(MAX_REPORTED_ROWS) {
        writeln!(out, "{name}: {e}")?;
    }
    if !report.errors.is_empty() {
        writeln!(out, "{name}: {} rows rejected, {} accepted", report.errors.len(), report.accepted)?;
    }
    if let Some(f) = &report.failure {
        writeln!(out, "{name}: failed: {f}")?;
    }
    Ok(())
}

/// Loads a long-format file that must parse cleanly, such as a snapshot.
pub fn load_long_file(path: &Path) -> Result<(MarketPanel, String)> {
    let mut builder = PanelBuilder::new();
    let digest = read_chunks(path, |text, base| {
        for row in EodRows::new(text, EodFormat::Long) {
            let row = row.map_err(|mut e| {
                e.line += base;
                CliError::Data(format!("{}: {e}", path.display()))
            })?;
            builder.push(row.symbol, row.date, row.bar);
        }
        Ok(())
    })?;
    Ok((builder.finish()?, digest))
}

pub fn load_snapshot(path: &Path) -> Result<(MarketPanel, String)> {
    load_long_file(path)
}

/// Loads an index: a long-format file holding exactly one symbol.
pub fn load_index(path: &Path) -> Result<(IndexSeries, String)> {
    let (panel, digest) = load_long_file(path)?;
    let [name] = panel.symbols() else {
        return Err(CliError::Data(format!(
            "{}: an index file must hold exactly one symbol, found {}",
            path.display(),
            panel.n_symbols()
        )));
    };
    let dates = panel.calendar().dates().to_vec();
    let bars: Vec<OhlcvBar> = (0..panel.n_days()).map(|d| panel.day_cells(d).1[0]).collect();
    Ok((IndexSeries::new(name.clone(), dates, bars)?, digest))
}

/// Adapts an `io::Write` to `fmt::Write`, keeping the first IO error.
struct FmtAdapter<W: Write> {
    inner: W,
    error: Option<io::Error>,
}

impl<W: Write> std::fmt::Write for FmtAdapter<W> {
    fn write_str(&mut self, s: &str) -> std::fmt::Result {
        self.inner.write_all(s.as_bytes()).map_err(|e| {
            self.error = Some(e);
            std::fmt::Error
        })
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(BufWriter::with_capacity(WRITE_BUFFER, file))
}

/// Creates `path` and streams formatted text into it.
pub fn write_formatted(
    path: &Path,
    body: impl FnOnce(&mut dyn std::fmt::Write) -> std::fmt::Result,
) -> Result<()> {
    let mut out = FmtAdapter { inner: create(path)?, error: None };
    if body(&mut out).is_err() {
        let e = out.error.unwrap_or_else(|| io::Error::other("formatting failed"));
        return Err(CliError::io(path, e));
    }
    out.inner.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_formatted(path, |out| out.write_str(text))
}

pub fn write_snapshot(panel: &MarketPanel, path: &Path) -> Result<()> {
    write_formatted(path, |out| format::write_snapshot(panel, &mut FmtRef(out)))
}

pub fn write_index(index: &IndexSeries, path: &Path) -> Result<()> {
    write_formatted(path, |out| {
        writeln!(out, "{}", format::LONG_HEADER)?;
        for (date, bar) in index.dates().iter().zip(index.bars()) {
            format::write_long_row(&mut FmtRef(out), index.name(), *date, bar)?;
        }
        Ok(())
    })
}

/// Writes one `<market>_YYYYMMDD.txt` file per trading day into `dir`.
pub fn write_per_day_files(panel: &MarketPanel, market: &str, dir: &Path) -> Result<usize> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for day in 0..panel.n_days() {
        let date: NaiveDate = panel.calendar().dates()[day];
        let path = dir.join(format!("{market}_{}.txt", date.format("%Y%m%d")));
        let (symbols, bars) = panel.day_cells(day);
        write_formatted(&path, |out| {
            writeln!(out, "{}", format::PER_DAY_HEADER)?;
            for (s, b) in symbols.iter().zip(bars) {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    panel.symbol_name(*s),
                    b.open(),
                    b.high(),
                    b.low(),
                    b.close(),
                    b.volume()
                )?;
            }
            Ok(())
        })?;
    }
    Ok(panel.n_days())
}

/// Lets a `&mut dyn fmt::Write` be passed where a sized writer is expected.
struct FmtRef<'a>(&'a mut dyn std::fmt::Write);

impl std::fmt::Write for FmtRef<'_> {
    fn write_str(&mut self, s: &str) -> std::fmt::Result {
        self.0.write_str(s)
    }
}

pub fn file_digest(path: &Path) -> Result<String> {
    read_chunks(path, |_, _| Ok(()))
}
