//! Entropy betas relative to the whole-market CSIE, and rates of return.
//!
//! A beta is the sample covariance of a subject's window-averaged entropy
//! series with the market's window-averaged CSIE, divided by the sample
//! variance of the latter. Subjects are an index (longitudinal IE), a single
//! symbol (longitudinal IE) or a symbol set (its own CSIE).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::NaiveDate;
use thiserror::Error;

use crate::bar::OhlcvBar;
use crate::entropy::{self, EntropyError, EntropyParams, EntropySeries, Membership, SeriesKind};
use crate::panel::{IndexSeries, PanelError, PanelView, SymbolId};
use crate::par;
use crate::sum::{self, CompensatedSum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BetaError {
    #[error("series lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("covariance needs at least 2 observations, got {len}")]
    TooShort { len: usize },
    #[error("subject and market series must be window-averaged with the same window and dates")]
    Misaligned,
    #[error("degenerate market series: zero variance")]
    DegenerateMarket,
    #[error("rate of return needs at least one bar")]
    EmptySeries,
    #[error("{symbol} is not traded on every day of the interval")]
    NotEligible { symbol: String },
    #[error("a portfolio needs at least 2 members, got {size}")]
    PortfolioTooSmall { size: usize },
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Panel(#[from] PanelError),
}

/// One subject's rate of return and entropy beta over an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaRecord {
    pub subject: String,
    pub ror_pct: f64,
    pub beta: f64,
    pub window: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

fn centered_cross(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (sum::mean(a), sum::mean(b));
    let mut acc = CompensatedSum::new();
    for (x, y) in a.iter().zip(b) {
        acc.add((x - ma) * (y - mb));
    }
    acc.value() / (a.len() - 1) as f64
}

/// Sample covariance with the `n - 1` denominator.
pub fn sample_cov(a: &[f64], b: &[f64]) -> Result<f64, BetaError> {
    if a.len() != b.len() {
        return Err(BetaError::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < 2 {
        return Err(BetaError::TooShort { len: a.len() });
    }
    Ok(centered_cross(a, b))
}

pub fn sample_var(a: &[f64]) -> Result<f64, BetaError> {
    sample_cov(a, a)
}

/// Covariance of `subject` with `market` over the variance of `market`.
pub fn beta(subject: &EntropySeries, market: &EntropySeries) -> Result<f64, BetaError> {
    match (subject.kind(), market.kind()) {
        (SeriesKind::Windowed(a), SeriesKind::Windowed(b)) if a == b => {}
        _ => return Err(BetaError::Misaligned),
    }
    if subject.len() != market.len() {
        return Err(BetaError::LengthMismatch { left: subject.len(), right: market.len() });
    }
    if subject.dates() != market.dates() {
        return Err(BetaError::Misaligned);
    }
    beta_of_values(subject.values(), market.values())
}

pub(crate) fn beta_of_values(subject: &[f64], market: &[f64]) -> Result<f64, BetaError> {
    let var = sample_var(market)?;
    let scale = market.iter().fold(0.0f64, |m, x| m.max(libm::fabs(*x)));
    // Rounding noise of a constant series stays below this floor.
    let floor = 64.0 * f64::EPSILON * scale;
    if !(var > floor * floor) {
        return Err(BetaError::DegenerateMarket);
    }
    Ok(sample_cov(subject, market)? / var)
}

/// Close-to-close simple return in percent, first to last bar.
pub fn rate_of_return(bars: &[OhlcvBar]) -> Result<f64, BetaError> {
    let (first, last) = match (bars.first(), bars.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(BetaError::EmptySeries),
    };
    Ok((last.close() / first.close() - 1.0) * 100.0)
}

/// The market's window-averaged CSIE over a view, computed once and shared by
/// every beta taken against it.
#[derive(Debug, Clone)]
pub struct MarketContext<'a> {
    view: PanelView<'a>,
    window: usize,
    params: EntropyParams,
    market: EntropySeries,
}

impl<'a> MarketContext<'a> {
    pub fn new(view: PanelView<'a>, window: usize, params: EntropyParams) -> Result<Self, BetaError> {
        let daily = entropy::csie_series(&view, Membership::Market, &params)?;
        let market = entropy::moving_average(&daily, window)?;
        Ok(Self { view, window, params, market })
    }

    pub fn view(&self) -> &PanelView<'a> {
        &self.view
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn params(&self) -> &EntropyParams {
        &self.params
    }

    /// Window-averaged market CSIE.
    pub fn market_series(&self) -> &EntropySeries {
        &self.market
    }

    fn record(&self, subject: String, ror_pct: f64, beta: f64) -> BetaRecord {
        BetaRecord {
            subject,
            ror_pct,
            beta,
            window: self.window,
            start: self.view.start_date(),
            end: self.view.end_date(),
        }
    }

    fn longitudinal_beta(&self, subject: String, bars: &[OhlcvBar]) -> Result<BetaRecord, BetaError> {
        let ie = entropy::ie_series(self.view.dates(), bars, self.window, &self.params)?;
        let b = beta(&ie, &self.market)?;
        Ok(self.record(subject, rate_of_return(bars)?, b))
    }

    pub fn index_beta(&self, index: &IndexSeries) -> Result<BetaRecord, BetaError> {
        let bars = index.aligned_bars(&self.view)?;
        self.longitudinal_beta(index.name().to_string(), &bars)
    }

    /// The symbol's bars over the view; it must trade with positive volume
    /// every day.
    pub fn eligible_bars(&self, symbol: SymbolId) -> Result<Vec<OhlcvBar>, BetaError> {
        let not_eligible =
            || BetaError::NotEligible { symbol: self.view.panel().symbol_name(symbol).to_string() };
        let bars = self.view.symbol_bars(symbol).ok_or_else(not_eligible)?;
        if bars.iter().any(|b| b.volume() == 0) {
            return Err(not_eligible());
        }
        Ok(bars)
    }

    pub fn symbol_ror(&self, symbol: SymbolId) -> Result<f64, BetaError> {
        rate_of_return(&self.eligible_bars(symbol)?)
    }

    pub fn symbol_beta(&self, symbol: SymbolId) -> Result<BetaRecord, BetaError> {
        let bars = self.eligible_bars(symbol)?;
        self.longitudinal_beta(self.view.panel().symbol_name(symbol).to_string(), &bars)
    }

    /// Betas of many symbols, in input order.
    pub fn symbol_betas(&self, symbols: &[SymbolId]) -> Result<Vec<BetaRecord>, BetaError> {
        par::try_map_indexed(symbols.len(), |i| self.symbol_beta(symbols[i]))
    }

    /// Beta of the set's own CSIE. The return is the equal-weight mean of
    /// member returns.
    pub fn portfolio_beta(&self, set: &[SymbolId], tag: &str) -> Result<BetaRecord, BetaError> {
        if set.len() < 2 {
            return Err(BetaError::PortfolioTooSmall { size: set.len() });
        }
        let rors = set.iter().map(|s| self.symbol_ror(*s)).collect::<Result<Vec<_>, _>>()?;
        let daily = entropy::csie_series(&self.view, Membership::Portfolio(set), &self.params)?;
        let smoothed = entropy::moving_average(&daily, self.window)?;
        let b = beta(&smoothed, &self.market)?;
        Ok(self.record(tag.to_string(), sum::mean(&rors), b))
    }
}
