//! Deterministic synthetic markets for tests, benchmarks and demos.
//!
//! Each symbol's daily log-return blends a common factor with its own noise:
//! `r = loading · factor + (1 - loading) · idiosyncratic`. Closes compound
//! from 100, each open is the previous close, and wicks extend the body by a
//! bounded random fraction scaled by the idiosyncratic volatility.

use alloc::string::String;
use alloc::vec::Vec;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use thiserror::Error;

use crate::bar::OhlcvBar;
use crate::panel::{IndexSeries, MarketPanel, PanelBuilder};
use crate::rng::Xoshiro256StarStar;
use crate::sum::CompensatedSum;

const START_PRICE: f64 = 100.0;
const MAX_WICK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("market needs at least 2 days, got {0}")]
    TooFewDays(usize),
    #[error("market needs at least 2 symbols, got {0}")]
    TooFewSymbols(usize),
    #[error("symbol {symbol}: {reason}")]
    BadSymbol { symbol: String, reason: &'static str },
    #[error("duplicate symbol {0}")]
    DuplicateSymbol(String),
    #[error("factor drift and volatility must be finite, volatility non-negative")]
    BadFactor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSpec {
    pub symbol: String,
    /// Mean daily log-return.
    pub drift: f64,
    /// Daily log-return standard deviation.
    pub volatility: f64,
    /// Share of the return driven by the common factor, in `[0, 1]`.
    pub loading: f64,
    pub volume_base: f64,
    /// Relative volume jitter, in `[0, 1)`.
    pub volume_noise: f64,
}

impl SymbolSpec {
    fn validate(&self) -> Result<(), SynthError> {
        let bad = |reason| SynthError::BadSymbol { symbol: self.symbol.clone(), reason };
        if self.symbol.is_empty() {
            return Err(bad("empty identifier"));
        }
        if !self.drift.is_finite() {
            return Err(bad("drift must be finite"));
        }
        if !(self.volatility.is_finite() && self.volatility >= 0.0) {
            return Err(bad("volatility must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.loading) {
            return Err(bad("loading must lie in [0, 1]"));
        }
        if !(self.volume_base.is_finite() && self.volume_base > 0.0) {
            return Err(bad("volume base must be positive"));
        }
        if !(0.0..1.0).contains(&self.volume_noise) {
            return Err(bad("volume noise must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketSpec {
    pub symbols: Vec<SymbolSpec>,
    pub days: usize,
    /// First trading day; later days follow on weekdays.
    pub start: NaiveDate,
    pub factor_drift: f64,
    pub factor_volatility: f64,
    pub seed: u64,
}

impl MarketSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.days < 2 {
            return Err(SynthError::TooFewDays(self.days));
        }
        if self.symbols.len() < 2 {
            return Err(SynthError::TooFewSymbols(self.symbols.len()));
        }
        if !(self.factor_drift.is_finite()
            && self.factor_volatility.is_finite()
            && self.factor_volatility >= 0.0)
        {
            return Err(SynthError::BadFactor);
        }
        let mut names: Vec<&str> = self.symbols.iter().map(|s| s.symbol.as_str()).collect();
        names.sort_unstable();
        if let Some(pair) = names.windows(2).find(|p| p[0] == p[1]) {
            return Err(SynthError::DuplicateSymbol(pair[0].into()));
        }
        self.symbols.iter().try_for_each(SymbolSpec::validate)
    }

    /// The weekday calendar the market trades on.
    pub fn calendar(&self) -> Vec<NaiveDate> {
        let mut dates = Vec::with_capacity(self.days);
        let mut date = self.start;
        while dates.len() < self.days {
            if !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
                dates.push(date);
            }
            date = date + Days::new(1);
        }
        dates
    }
}

/// Generates the market described by `spec`. Identical specs give identical
/// panels.
pub fn generate_market(spec: &MarketSpec) -> Result<MarketPanel, SynthError> {
    spec.validate()?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(spec.seed);
    let mut closes = alloc::vec![START_PRICE; spec.symbols.len()];
    let mut builder = PanelBuilder::new();

    for date in spec.calendar() {
        let factor = spec.factor_drift + spec.factor_volatility * rng.next_normal();
        for (s, close) in spec.symbols.iter().zip(closes.iter_mut()) {
            // Five draws per symbol-day whatever the parameters, so changing
            // one symbol's spec never shifts another symbol's stream.
            let z_idio = rng.next_normal();
            let z_high = rng.next_normal();
            let z_low = rng.next_normal();
            let u_volume = rng.next_symmetric();
            let _reserved = rng.next_f64();

            let idio = s.drift + s.volatility * z_idio;
            let r = s.loading * factor + (1.0 - s.loading) * idio;
            let open = *close;
            let next = open * libm::exp(r);
            let wick_scale = (1.0 - s.loading) * s.volatility;
            let up = libm::fmin(libm::fabs(z_high) * wick_scale, MAX_WICK);
            let down = libm::fmin(libm::fabs(z_low) * wick_scale, MAX_WICK);
            let high = open.max(next) * (1.0 + up);
            let low = open.min(next) * (1.0 - down);
            let volume = libm::round(s.volume_base * (1.0 + s.volume_noise * u_volume)).max(1.0);

            let bar = OhlcvBar::new(open, high, low, next, volume as u64)
                .expect("generated bars satisfy the OHLC ordering");
            builder.push(&s.symbol, date, bar);
            *close = next;
        }
    }
    Ok(builder.finish().expect("generated records are unique"))
}

/// A traded-value-weighted index of every symbol in the panel, with closes
/// normalized to 100 on the first day and volume summed over members.
pub fn generate_index(panel: &MarketPanel, name: &str) -> IndexSeries {
    let mut dates = Vec::with_capacity(panel.n_days());
    let mut raw = Vec::with_capacity(panel.n_days());
    for day in 0..panel.n_days() {
        let (_, bars) = panel.day_cells(day);
        if bars.is_empty() {
            continue;
        }
        let mut total = CompensatedSum::new();
        for b in bars {
            total.add(b.traded_value());
        }
        let total = total.value();
        let weight = |b: &OhlcvBar| {
            if total > 0.0 {
                b.traded_value() / total
            } else {
                1.0 / bars.len() as f64
            }
        };
        let mut acc = [CompensatedSum::new(); 4];
        let mut volume = 0u64;
        for b in bars {
            let w = weight(b);
            acc[0].add(w * b.open());
            acc[1].add(w * b.high());
            acc[2].add(w * b.low());
            acc[3].add(w * b.close());
            volume = volume.saturating_add(b.volume());
        }
        dates.push(panel.calendar().dates()[day]);
        raw.push((acc.map(|a| a.value()), volume));
    }

    let base = raw.first().map_or(1.0, |(p, _)| p[3]);
    let norm = |x: f64| START_PRICE * (x / base);
    let bars = raw
        .into_iter()
        .map(|([o, h, l, c], v)| {
            let (o, h, l, c) = (norm(o), norm(h), norm(l), norm(c));
            OhlcvBar::new(o, h.max(o).max(c), l.min(o).min(c), c, v)
                .expect("weighted means of valid bars are valid")
        })
        .collect();
    IndexSeries::new(name, dates, bars).expect("panel calendar is strictly increasing")
}
