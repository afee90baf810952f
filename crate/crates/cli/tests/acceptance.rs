//! Acceptance suite. Prints one PASS or FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::{csie_ok, fixture, p, read};
use csie_cli::{io, report, specfile};
use csie_core::beta::{self, rate_of_return, BetaError};
use csie_core::entropy::{self, csie_series, Membership};
use csie_core::markowitz::{self, PriceMatrix, WeightAllocation};
use csie_core::rng::Xoshiro256StarStar;
use csie_core::screener::{self, annual_backtest};
use csie_core::synth::{self, MarketSpec, SymbolSpec};
use csie_core::{
    EntropyParams, EntropySeries, IndexSeries, MarketPanel, NaiveDate, OhlcvBar, PanelBuilder,
    ScreenConfig, SeriesKind, SymbolId,
};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs()
    }
}

// Random inputs.

struct Gen(Xoshiro256StarStar);

impl Gen {
    fn new(seed: u64) -> Self {
        Gen(Xoshiro256StarStar::seed_from_u64(seed))
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.0.next_f64()
    }

    fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as usize
    }

    fn normal(&mut self) -> f64 {
        self.0.next_normal()
    }

    fn volume(&mut self) -> u64 {
        self.int(1, 10_000_000) as u64
    }

    fn bar(&mut self) -> OhlcvBar {
        let open = self.uniform(5.0, 300.0);
        let close = open * (0.02 * self.normal()).exp();
        let high = open.max(close) * (1.0 + 0.01 * self.normal().abs());
        let low = open.min(close) * (1.0 - 0.01 * self.normal().abs());
        OhlcvBar::new(open, high, low, close, self.volume()).unwrap()
    }

    fn bars(&mut self, m: usize) -> Vec<OhlcvBar> {
        (0..m).map(|_| self.bar()).collect()
    }
}

// Independent reference implementations.

/// Entropy of a set of bars, written out directly from the definitions.
fn oracle_entropy(bars: &[OhlcvBar], alpha: f64) -> f64 {
    let lambda: Vec<f64> = bars.iter().map(|b| b.close() * b.volume() as f64).collect();
    let total: f64 = lambda.iter().sum();
    let m = lambda.iter().filter(|l| **l > 0.0).count() as f64;
    let f = (alpha - 1.0) / (alpha + (m + 1.0) / (m - 1.0));
    let (mut oc, mut olhc) = (0.0, 0.0);
    for (b, l) in bars.iter().zip(&lambda) {
        if *l == 0.0 {
            continue;
        }
        let psi = l / total;
        let w = psi * psi.ln();
        let (o, h, lo, c) = (b.open(), b.high(), b.low(), b.close());
        oc -= (c / o - 1.0) * w;
        olhc -= ((h / o - 1.0) * (h / c - 1.0) + (lo / o - 1.0) * (lo / c - 1.0)) * w;
    }
    (1.0 - f) * oc + f * olhc
}

fn oracle_mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn oracle_cov(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (oracle_mean(x), oracle_mean(y));
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (x.len() - 1) as f64
}

fn oracle_ma(x: &[f64], w: usize) -> Vec<f64> {
    x.windows(w).map(oracle_mean).collect()
}

fn oracle_ie(bars: &[OhlcvBar], w: usize) -> Vec<f64> {
    bars.windows(w).map(|win| oracle_entropy(win, 1.34)).collect()
}

fn oracle_ror(bars: &[OhlcvBar]) -> f64 {
    (bars[bars.len() - 1].close() / bars[0].close() - 1.0) * 100.0
}

/// `(symbol, ror, beta)` for every eligible symbol, the index's `(ror, beta)`,
/// all recomputed from raw bars over days `first..=last`.
struct BruteForce {
    symbols: Vec<(String, f64, f64)>,
    index: (f64, f64),
}

fn brute_force(panel: &MarketPanel, index: &IndexSeries, first: usize, last: usize, w: usize) -> BruteForce {
    let daily: Vec<f64> = (first..=last)
        .map(|d| {
            let bars: Vec<OhlcvBar> = panel.day_cells(d).1.to_vec();
            oracle_entropy(&bars, 1.34)
        })
        .collect();
    let market = oracle_ma(&daily, w);
    let var = oracle_cov(&market, &market);
    let beta_of = |bars: &[OhlcvBar]| oracle_cov(&oracle_ie(bars, w), &market) / var;

    let mut symbols = Vec::new();
    for (id, name) in panel.symbols().iter().enumerate() {
        let id = SymbolId(id as u32);
        let bars: Option<Vec<OhlcvBar>> = (first..=last)
            .map(|d| panel.bar(d, id).copied().filter(|b| b.volume() > 0))
            .collect();
        if let Some(bars) = bars {
            symbols.push((name.clone(), oracle_ror(&bars), beta_of(&bars)));
        }
    }
    let dates = &panel.calendar().dates()[first..=last];
    let index_bars: Vec<OhlcvBar> = dates
        .iter()
        .map(|d| index.bars()[index.dates().iter().position(|x| x == d).unwrap()])
        .collect();
    BruteForce { symbols, index: (oracle_ror(&index_bars), beta_of(&index_bars)) }
}

// Entropy criteria.

fn flat_days_are_zero() -> Check {
    let mut g = Gen::new(1);
    let params = EntropyParams::default();
    for i in 0..1000 {
        let m = g.int(2, 50);
        let bars: Vec<OhlcvBar> =
            (0..m).map(|_| OhlcvBar::flat(g.uniform(0.5, 500.0), g.volume()).unwrap()).collect();
        let day = entropy::csie_day(&bars, &params).unwrap();
        let window = entropy::ie_window(&bars, &params).unwrap();
        ensure(day == 0.0 && window == 0.0, || format!("instance {i}: {day}, {window}"))?;
    }
    Ok("1000 flat instances, csie_day and ie_window exactly 0".into())
}

fn olhc_component_is_non_negative() -> Check {
    let mut g = Gen::new(2);
    let mut smallest = f64::INFINITY;
    for i in 0..10_000 {
        let m = g.int(1, 50);
        let bars = g.bars(m);
        let weights = entropy::traded_value_weights(&bars).unwrap();
        let h = entropy::csie_olhc(&bars, &weights);
        smallest = smallest.min(h);
        ensure(h >= 0.0, || format!("instance {i}: {h}"))?;
    }
    Ok(format!("10000 random bar sets, min {smallest:e}"))
}

fn degenerate_days_have_the_sign_of_their_moves() -> Check {
    let mut g = Gen::new(3);
    let params = EntropyParams::default();
    for (sign, label) in [(1.0, "up"), (-1.0, "down")] {
        for i in 0..1000 {
            let m = g.int(2, 50);
            let bars: Vec<OhlcvBar> = (0..m)
                .map(|_| {
                    let open = g.uniform(1.0, 300.0);
                    let close = open * (1.0 + sign * g.uniform(1e-4, 0.1));
                    OhlcvBar::new(open, open.max(close), open.min(close), close, g.volume()).unwrap()
                })
                .collect();
            let h = entropy::csie_day(&bars, &params).unwrap();
            ensure(h * sign > 0.0, || format!("{label} instance {i}: {h}"))?;
        }
    }
    Ok("1000 all-up days > 0, 1000 all-down days < 0".into())
}

fn csie_matches_reference() -> Check {
    let mut g = Gen::new(4);
    let params = EntropyParams::default();
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let m = g.int(2, 50);
        let bars = g.bars(m);
        let got = entropy::csie_day(&bars, &params).unwrap();
        let want = oracle_entropy(&bars, 1.34);
        let e = rel_err(got, want);
        worst = worst.max(e);
        ensure(e <= 1e-12, || format!("day {i} (m={m}): {got} vs {want}, rel {e:e}"))?;
    }
    Ok(format!("1000 random days, worst relative error {worst:e}"))
}

fn f_weight_values() -> Check {
    let params = EntropyParams::default();
    let two = entropy::weight_f(2, &params).unwrap();
    let large = entropy::weight_f(1_000_000, &params).unwrap();
    ensure((two - 0.0783410).abs() <= 1e-6, || format!("f(2) = {two}"))?;
    ensure((large - 0.1452991).abs() <= 1e-6, || format!("f(1e6) = {large}"))?;
    Ok(format!("f(2) = {two:.7}, f(1e6) = {large:.7}"))
}

// Baseline criteria.

fn portfolio_variance_matches_double_sum() -> Check {
    let mut g = Gen::new(5);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let (n, m) = (g.int(2, 50), g.int(1, 10));
        let mut prices = vec![0.0; n * m];
        for a in 0..m {
            let mut level = g.uniform(5.0, 300.0);
            for d in 0..n {
                level *= (0.02 * g.normal()).exp();
                prices[d * m + a] = level;
            }
        }
        let raw: Vec<f64> = (0..m).map(|_| g.uniform(0.01, 1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let drift = 1.0 - w.iter().sum::<f64>();
        w[0] += drift;
        let weights = WeightAllocation::new(w.clone()).map_err(|e| e.to_string())?;
        let matrix = PriceMatrix::new(n, m, prices.clone()).unwrap();
        let got = markowitz::portfolio_variance(&matrix, &weights).unwrap();

        let column = |a: usize| (0..n).map(|d| prices[d * m + a]).collect::<Vec<f64>>();
        let cols: Vec<Vec<f64>> = (0..m).map(column).collect();
        let mut want = 0.0;
        for k in 0..m {
            for l in 0..m {
                want += w[k] * w[l] * oracle_cov(&cols[k], &cols[l]);
            }
        }
        let e = rel_err(got, want);
        worst = worst.max(e);
        ensure(e <= 1e-12, || format!("instance {i} (n={n}, m={m}): {got} vs {want}, rel {e:e}"))?;
    }
    Ok(format!("1000 instances, worst relative error {worst:e}"))
}

fn identical_columns_give_uniform_covariance() -> Check {
    let mut g = Gen::new(6);
    for i in 0..100 {
        let (n, m) = (g.int(2, 50), g.int(2, 10));
        let path: Vec<f64> = (0..n).map(|_| g.uniform(1.0, 200.0)).collect();
        let prices: Vec<f64> = path.iter().flat_map(|p| std::iter::repeat_n(*p, m)).collect();
        let cov = markowitz::covariance_matrix(&PriceMatrix::new(n, m, prices).unwrap()).unwrap();
        let base = cov.get(0, 0);
        for k in 0..m {
            for l in 0..m {
                let e = (cov.get(k, l) - base).abs();
                ensure(e <= 1e-12 * base.abs().max(1.0), || {
                    format!("instance {i}: entry ({k},{l}) {} vs {base}", cov.get(k, l))
                })?;
            }
        }
    }
    Ok("100 matrices with identical columns, all entries equal".into())
}

// Beta criteria.

fn windowed(values: Vec<f64>, w: usize) -> EntropySeries {
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let dates = (0..values.len()).map(|i| start + chrono::Days::new(i as u64)).collect();
    EntropySeries::new(dates, values, SeriesKind::Windowed(w))
}

fn random_smoothed(g: &mut Gen) -> Vec<f64> {
    let w = g.int(2, 20);
    let daily: Vec<f64> = (0..g.int(w + 2, 300)).map(|_| 0.01 * g.normal()).collect();
    oracle_ma(&daily, w)
}

fn self_beta_is_one() -> Check {
    let mut g = Gen::new(7);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let s = windowed(random_smoothed(&mut g), 5);
        let b = beta::beta(&s, &s).unwrap();
        worst = worst.max((b - 1.0).abs());
        ensure((b - 1.0).abs() <= 1e-12, || format!("series {i}: {b}"))?;
    }
    Ok(format!("1000 series, worst |beta - 1| {worst:e}"))
}

fn affine_subject_scales_beta() -> Check {
    let mut g = Gen::new(8);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let x = random_smoothed(&mut g);
        let c = g.uniform(-1.0, 1.0);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + c).collect();
        let b = beta::beta(&windowed(y, 5), &windowed(x, 5)).unwrap();
        worst = worst.max((b - 2.0).abs());
        ensure((b - 2.0).abs() <= 1e-9, || format!("series {i}: {b}"))?;
    }
    Ok(format!("1000 series, worst |beta - 2| {worst:e}"))
}

fn degenerate_market_is_an_error() -> Check {
    let flat = windowed(vec![0.25; 40], 5);
    let zero = windowed(vec![0.0; 40], 5);
    let subject = windowed((0..40).map(|i| i as f64).collect(), 5);
    for market in [&flat, &zero] {
        let r = beta::beta(&subject, market);
        ensure(r == Err(BetaError::DegenerateMarket), || format!("got {r:?}"))?;
    }
    Ok("constant market series rejected as degenerate".into())
}

// Screener criteria.

struct Market {
    panel: MarketPanel,
    index: IndexSeries,
    negative_index: IndexSeries,
    config: ScreenConfig,
    first: usize,
    last: usize,
}

fn random_market(seed: u64) -> Market {
    let mut g = Gen::new(1000 + seed);
    let n_symbols = g.int(10, 100);
    let days = g.int(60, 300);
    let spec = MarketSpec {
        symbols: (0..n_symbols)
            .map(|i| SymbolSpec {
                symbol: format!("S{i:03}"),
                drift: g.uniform(-0.001, 0.002),
                volatility: g.uniform(0.005, 0.04),
                loading: g.uniform(0.0, 1.0),
                volume_base: g.uniform(1e4, 5e6),
                volume_noise: g.uniform(0.0, 0.6),
            })
            .collect(),
        days,
        start: NaiveDate::from_ymd_opt(2015, 1, 5).unwrap(),
        factor_drift: g.uniform(-0.0005, 0.001),
        factor_volatility: g.uniform(0.005, 0.02),
        seed,
    };
    let dense = synth::generate_market(&spec).unwrap();
    let index = synth::generate_index(&dense, "IDX");

    // Punch holes: some symbols miss days or trade zero volume.
    let gappy: BTreeSet<usize> = (0..n_symbols).filter(|_| g.uniform(0.0, 1.0) < 0.2).collect();
    let mut builder = PanelBuilder::new();
    for (date, symbol, bar) in dense.records() {
        let id: usize = symbol[1..].parse().unwrap();
        if gappy.contains(&id) {
            let r = g.uniform(0.0, 1.0);
            if r < 0.01 {
                continue;
            }
            if r < 0.02 {
                let zero = OhlcvBar::new(bar.open(), bar.high(), bar.low(), bar.close(), 0).unwrap();
                builder.push(symbol, date, zero);
                continue;
            }
        }
        builder.push(symbol, date, *bar);
    }
    let panel = builder.finish().unwrap();
    let negative_index = common::tracking_index(&panel, -0.02, "INV");

    let window = [5, 10, 20][g.int(0, 2)];
    let first = g.int(0, days / 4);
    let len = g.int((window + 1).max((days - first) / 2), days - first);
    let last = first + len - 1;
    let dates = panel.calendar().dates();
    let config = ScreenConfig::new(dates[first], dates[last], window);
    Market { panel, index, negative_index, config, first, last }
}

fn member_set(report: &csie_core::SelectionReport) -> BTreeSet<String> {
    report.members.iter().map(|m| m.subject.clone()).collect()
}

struct ScreenRuns {
    equal: Result<String, String>,
    subset: Result<String, String>,
    negative: Result<String, String>,
    audit: Result<String, String>,
}

fn screener_runs() -> ScreenRuns {
    let (mut equal, mut subset, mut negative, mut audit) = (Ok(()), Ok(()), Ok(()), Ok(()));
    let (mut selected, mut checked, mut refined) = (0usize, 0usize, 0usize);
    for seed in 0..100u64 {
        let m = random_market(seed);
        let plain = screener::screen(&m.config, &m.panel, &m.index).unwrap();
        let brute = brute_force(&m.panel, &m.index, m.first, m.last, m.config.window);
        let (r_idx, b_idx) = brute.index;
        let expected: BTreeSet<String> = brute
            .symbols
            .iter()
            .filter(|(_, r, b)| *b <= b_idx && *r >= r_idx)
            .map(|(s, _, _)| s.clone())
            .collect();
        let got = member_set(&plain);
        selected += got.len();
        if equal.is_ok() && got != expected {
            equal = Err(format!("market {seed}: screen {got:?} vs brute force {expected:?}"));
        }

        let positive_config = ScreenConfig { require_positive_beta: true, ..m.config.clone() };
        let positive = screener::screen(&positive_config, &m.panel, &m.index).unwrap();
        refined += positive.members.len();
        let pos = member_set(&positive);
        if subset.is_ok() && (!pos.is_subset(&got) || positive.members.iter().any(|r| r.beta <= 0.0)) {
            subset = Err(format!("market {seed}: {pos:?} not a positive subset of {got:?}"));
        }

        let inverted = screener::screen(&positive_config, &m.panel, &m.negative_index).unwrap();
        if negative.is_ok() && !(inverted.index.beta < 0.0 && inverted.members.is_empty()) {
            negative = Err(format!(
                "market {seed}: index beta {}, {} members",
                inverted.index.beta,
                inverted.members.len()
            ));
        }

        let raw: std::collections::BTreeMap<&str, (f64, f64)> =
            brute.symbols.iter().map(|(s, r, b)| (s.as_str(), (*r, *b))).collect();
        for member in plain.members.iter().chain(&positive.members) {
            checked += 1;
            let ok = raw.get(member.subject.as_str()).is_some_and(|(r, b)| *b <= b_idx && *r >= r_idx);
            if audit.is_ok() && !ok {
                audit = Err(format!("market {seed}: {} fails on raw bars", member.subject));
            }
        }
    }
    ScreenRuns {
        equal: equal.map(|_| format!("100 markets, member sets equal, {selected} members total")),
        subset: subset.map(|_| format!("100 markets, {refined} positive-beta members all in the plain sets")),
        negative: negative.map(|_| "100 markets with a negative-beta index, every refined selection empty".into()),
        audit: audit.map(|_| format!("{checked} emitted members re-satisfy the predicate on raw bars")),
    }
}

// Schema and determinism.

fn backtest_golden() -> Check {
    const HEADER: &str = "year,index_ror_pct,index_beta,n_selected,n_positive_beta,max_ror_pct,beta_of_max,min_ror_pct,beta_of_min,avg_ror_pct,set_beta";
    let dir = tempfile::tempdir().unwrap();
    let (snapshot, index) = common::generate(&fixture("demo.spec"), dir.path());
    for (flag, golden) in [(None, "demo_backtest.csv"), (Some("--positive-beta"), "demo_backtest_positive.csv")] {
        let out = dir.path().join(golden);
        let mut args = vec!["backtest", "--snapshot", p(&snapshot), "--index", p(&index), "--window", "10"];
        args.extend(flag);
        args.extend(["-o", p(&out)]);
        csie_ok(args);
        let text = read(&out);
        ensure(text.lines().next() == Some(HEADER), || format!("header {:?}", text.lines().next()))?;
        ensure(text == read(&fixture(golden)), || format!("{golden} differs"))?;
    }
    Ok("header byte-exact, both demo backtests match their golden files".into())
}

fn threads_do_not_change_outputs() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let mut digests: Vec<Vec<(String, String)>> = Vec::new();
    for threads in ["1", "8"] {
        let out = root.join(format!("t{threads}"));
        let o = |name: &str| out.join(name);
        let t = ["--threads", threads];
        let gen = o("gen");
        let (snap, index) = (gen.join("snapshot.csv"), gen.join("index.csv"));
        let s = p(&snap);
        let i = p(&index);
        let runs: Vec<Vec<String>> = vec![
            vec!["generate", "--spec", p(&fixture("demo.spec")), "--per-day", p(&o("days")), "-o", p(&gen)],
            vec!["ingest", "--input", p(&o("days")), "-o", p(&o("ingest.csv"))],
            vec!["csie", "--snapshot", s, "--window", "20", "-o", p(&o("csie.csv"))],
            vec!["csie", "--snapshot", s, "--subset", "STEADY,WILD,S01", "-o", p(&o("subset.csv"))],
            vec!["ie", "--snapshot", s, "--symbol", "WILD", "--window", "20", "-o", p(&o("ie.csv"))],
            vec!["ie", "--snapshot", s, "--index", i, "--window", "20", "-o", p(&o("ie_index.csv"))],
            vec!["betas", "--snapshot", s, "--index", i, "--portfolio", "STEADY,WILD", "--window", "10", "-o", p(&o("betas.csv"))],
            vec!["screen", "--snapshot", s, "--index", i, "--window", "10", "-o", p(&o("screen"))],
            vec!["backtest", "--snapshot", s, "--index", i, "--window", "10", "--verbose", "-o", p(&o("bt.csv"))],
            vec!["plot", "--report", p(&o("screen/report.csv")), "-o", p(&o("plot.svg"))],
        ]
        .into_iter()
        .map(|v| v.into_iter().map(String::from).collect())
        .collect();
        for args in runs {
            csie_ok(args.iter().map(String::as_str).chain(t));
        }
        let mut files = Vec::new();
        collect_outputs(&out, &out, &mut files);
        digests.push(files);
    }
    ensure(digests[0] == digests[1], || {
        let differ: Vec<&String> = digests[0]
            .iter()
            .zip(&digests[1])
            .filter(|(a, b)| a != b)
            .map(|(a, _)| &a.0)
            .collect();
        format!("outputs differ: {differ:?}")
    })?;
    Ok(format!("8 commands, {} output files identical under 1 and 8 threads", digests[0].len()))
}

/// Relative path and digest of every non-manifest file under `dir`.
fn collect_outputs(root: &Path, dir: &Path, out: &mut Vec<(String, String)>) {
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_outputs(root, &path, out);
        } else if path.extension().is_none_or(|e| e != "manifest") {
            let rel = path.strip_prefix(root).unwrap().display().to_string();
            out.push((rel, io::file_digest(&path).unwrap()));
        }
    }
}

// Performance.

const BENCH_SPEC: &str = "\
seed = 5600
days = 5600
start = 2000-01-03
factor_drift = 0.0002
factor_volatility = 0.011
market = BENCH
family prefix=S count=5000 drift=-0.0005..0.0008 volatility=0.005..0.04 loading=0..1 volume_base=1e4..5e6 volume_noise=0.1..0.5
";

fn performance_budget() -> Check {
    let spec = specfile::parse_spec(BENCH_SPEC).map_err(|e| e.to_string())?;
    let scratch = tempfile::tempdir_in(env!("CARGO_TARGET_TMPDIR")).unwrap();
    let days_dir = scratch.path().join("days");

    let t = Instant::now();
    let panel = synth::generate_market(&spec.market).unwrap();
    let generated = t.elapsed().as_secs_f64();
    let bars = panel.n_bars();
    let t = Instant::now();
    io::write_per_day_files(&panel, &spec.market_name, &days_dir).unwrap();
    let written = t.elapsed().as_secs_f64();
    drop(panel);

    // What `csie ingest` does: parse every file, build the panel, write the snapshot.
    let t = Instant::now();
    let mut builder = PanelBuilder::new();
    let mut rejected = 0;
    for path in io::expand_input(&days_dir).unwrap() {
        let file = io::ingest_file(&path, io::InputFormat::Auto, &mut builder);
        rejected += file.errors.len() + usize::from(file.failure.is_some());
    }
    let panel = builder.finish().unwrap();
    let parsed = t.elapsed().as_secs_f64();
    io::write_snapshot(&panel, &scratch.path().join("snapshot.csv")).unwrap();
    let ingest = t.elapsed().as_secs_f64();
    std::fs::remove_dir_all(&days_dir).unwrap();

    let t = Instant::now();
    let view = panel.full_view().unwrap();
    let series = csie_series(&view, Membership::Market, &EntropyParams::default()).unwrap();
    let csie = t.elapsed().as_secs_f64();

    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut report = String::new();
    let _ = writeln!(report, "# Benchmark report\n");
    let _ = writeln!(report, "market: {} symbols x {} days, {bars} bars", panel.n_symbols(), panel.n_days());
    let _ = writeln!(report, "hardware threads: {threads}\n");
    let _ = writeln!(report, "| step | seconds |\n|---|---|");
    let _ = writeln!(report, "| generate market | {generated:.2} |");
    let _ = writeln!(report, "| write per-day files | {written:.2} |");
    let _ = writeln!(report, "| ingest: parse and build panel | {parsed:.2} |");
    let _ = writeln!(report, "| ingest: total with snapshot write | {ingest:.2} |");
    let _ = writeln!(report, "| full-history daily market CSIE | {csie:.2} |");
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../target/benchmark-report.md");
    std::fs::write(&path, &report).unwrap();

    ensure(bars == 28_000_000 && rejected == 0 && series.len() == 5600, || {
        format!("bars {bars}, rejected {rejected}, series {}", series.len())
    })?;
    ensure(ingest < 120.0 && csie < 10.0, || {
        format!("ingest {ingest:.1} s (budget 120), csie {csie:.2} s (budget 10), {threads} thread(s)")
    })?;
    Ok(format!("ingest {ingest:.1} s, csie {csie:.2} s on {threads} thread(s); report in target/benchmark-report.md"))
}

// Arithmetic spot checks.

fn index_return_spot_check() -> Check {
    let bars = [OhlcvBar::flat(100.0, 1).unwrap(), OhlcvBar::flat(94.23, 1).unwrap()];
    let r = rate_of_return(&bars).unwrap();
    ensure((r + 5.77).abs() <= 0.005, || format!("{r}"))?;
    Ok(format!("100 -> 94.23 gives {r:.4}%"))
}

fn zero_member_years_render_dashes() -> Check {
    let text = read(&fixture("demo.spec")).replace("days = 520", "days = 780");
    let spec = specfile::parse_spec(&text).map_err(|e| e.to_string())?;
    let panel = synth::generate_market(&spec.market).unwrap();
    let index = common::tracking_index(&panel, -0.02, "INV");
    let years = panel.calendar().years();
    let rows = annual_backtest(&panel, &index, &years, 10, EntropyParams::default(), true);
    let csv = report::backtest_csv(&rows);
    let lines: Vec<&str> = csv.lines().collect();
    ensure(lines.len() == years.len() + 1, || format!("{} lines for {} years", lines.len(), years.len()))?;
    for line in &lines[1..] {
        let cells: Vec<&str> = line.split(',').collect();
        ensure(cells.len() == 11 && cells[3] == "0" && cells[4] == "0", || format!("row {line}"))?;
        ensure(cells[5..].iter().all(|c| *c == "-"), || format!("row {line}"))?;
    }
    Ok(format!("{} zero-member years, every summary cell is \"-\"", years.len()))
}

fn main() {
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut record = |name: &str, outcome: Check| match outcome {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(detail) => {
            failed += 1;
            println!("FAIL {name}: {detail}");
        }
    };
    let guarded = |f: fn() -> Check| {
        panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        })
    };

    record("entropy/flat-day-zero", guarded(flat_days_are_zero));
    record("entropy/olhc-non-negative", guarded(olhc_component_is_non_negative));
    record("entropy/sign-semantics", guarded(degenerate_days_have_the_sign_of_their_moves));
    record("entropy/oracle-equivalence", guarded(csie_matches_reference));
    record("entropy/f-weight", guarded(f_weight_values));
    record("baseline/portfolio-variance-oracle", guarded(portfolio_variance_matches_double_sum));
    record("baseline/identical-columns", guarded(identical_columns_give_uniform_covariance));
    record("beta/self-beta", guarded(self_beta_is_one));
    record("beta/affine", guarded(affine_subject_scales_beta));
    record("beta/degenerate-market", guarded(degenerate_market_is_an_error));

    match panic::catch_unwind(screener_runs) {
        Ok(runs) => {
            record("screener/brute-force-set-equality", runs.equal);
            record("screener/positive-beta-subset", runs.subset);
            record("screener/negative-index-empty", runs.negative);
            record("screener/post-hoc-audit", runs.audit);
        }
        Err(_) => {
            for name in ["brute-force-set-equality", "positive-beta-subset", "negative-index-empty", "post-hoc-audit"] {
                record(&format!("screener/{name}"), Err("screener runs panicked".into()));
            }
        }
    }

    record("schema/backtest-header-golden", guarded(backtest_golden));
    record("schema/threads-1-vs-8", guarded(threads_do_not_change_outputs));
    record("spot/index-ror", guarded(index_return_spot_check));
    record("spot/zero-member-dash-rows", guarded(zero_member_years_render_dashes));
    record("performance/ingest-and-csie", guarded(performance_budget));

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
