#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use csie_core::entropy::{csie_series, Membership};
use csie_core::{EntropyParams, IndexSeries, MarketPanel, OhlcvBar};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    fn from(out: Output) -> Self {
        Self {
            code: out.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        }
    }
}

/// Runs the `csie` binary.
pub fn csie<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Run::from(Command::new(env!("CARGO_BIN_EXE_csie")).args(args).output().expect("csie runs"))
}

/// Runs `csie` and insists on success.
pub fn csie_ok<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let run = csie(args);
    assert_eq!(run.code, 0, "csie failed: {}", run.stderr);
    run
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Generates `spec` into `dir`, returning the snapshot and index paths.
pub fn generate(spec: &Path, dir: &Path) -> (PathBuf, PathBuf) {
    csie_ok(["generate", "--spec", p(spec), "--output", p(dir)]);
    (dir.join("snapshot.csv"), dir.join("index.csv"))
}

/// An index whose daily return follows `gain` times the market's daily
/// CSIE scaled by its largest magnitude, without wicks. Its entropy beta
/// takes the sign of `gain`.
pub fn tracking_index(panel: &MarketPanel, gain: f64, name: &str) -> IndexSeries {
    let view = panel.full_view().unwrap();
    let h = csie_series(&view, Membership::Market, &EntropyParams::default()).unwrap();
    let peak = h.values().iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let mut close = 1000.0;
    let bars = h
        .values()
        .iter()
        .map(|x| {
            let open = close;
            close = open * (1.0 + gain * x / peak);
            let volume = (1e9 / close).round() as u64;
            OhlcvBar::new(open, open.max(close), open.min(close), close, volume).unwrap()
        })
        .collect();
    IndexSeries::new(name, h.dates().to_vec(), bars).unwrap()
}

/// An index of flat bars compounding `daily` per day over the panel's
/// calendar. Its entropy is zero throughout.
pub fn flat_rising_index(panel: &MarketPanel, daily: f64, name: &str) -> IndexSeries {
    let mut level = 100.0;
    let bars = (0..panel.n_days())
        .map(|_| {
            level *= 1.0 + daily;
            OhlcvBar::flat(level, 1_000_000).unwrap()
        })
        .collect();
    IndexSeries::new(name, panel.calendar().dates().to_vec(), bars).unwrap()
}

fn attr(tag: &str, name: &str) -> f64 {
    let key = format!(" {name}=\"");
    let start = tag.find(&key).unwrap() + key.len();
    let end = start + tag[start..].find('"').unwrap();
    tag[start..end].parse().unwrap()
}

/// Member point centres and reference line positions of a scatter SVG:
/// `(points, x of the return line, y of the beta line)`.
pub fn svg_geometry(svg: &str) -> (Vec<(f64, f64)>, f64, f64) {
    let points = svg
        .lines()
        .filter(|l| l.starts_with("<circle class=\"member\""))
        .map(|l| (attr(l, "cx"), attr(l, "cy")))
        .collect();
    let ror = svg.lines().find(|l| l.contains("class=\"ref-ror\"")).unwrap();
    let beta = svg.lines().find(|l| l.contains("class=\"ref-beta\"")).unwrap();
    (points, attr(ror, "x1"), attr(beta, "y1"))
}
