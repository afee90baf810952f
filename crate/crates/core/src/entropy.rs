//! Intrinsic entropy estimators.
//!
//! For a set of bars (symbols on one day, or days of one symbol) with traded
//! values `λ_j = close_j · volume_j` and shares `ψ_j = λ_j / Σλ`:
//!
//! ```text
//! H^OC   = -Σ (C/O - 1) ψ ln ψ
//! H^OLHC = -Σ [(H/O - 1)(H/C - 1) + (L/O - 1)(L/C - 1)] ψ ln ψ
//! f      = (α - 1) / (α + (m + 1)/(m - 1))
//! H      = (1 - f) H^OC + f H^OLHC
//! ```
//!
//! Cross-sectional entropy (CSIE) applies this to the symbols traded on one
//! day. Longitudinal entropy (IE) applies it to one instrument's days within a
//! rolling window, with the window length taking the place of `m`.
//!
//! Members with zero traded value are dropped before weighting, so `m` counts
//! only the members that carry traded value.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::NaiveDate;
use thiserror::Error;

use crate::bar::OhlcvBar;
use crate::panel::{PanelView, SymbolId};
use crate::par;
use crate::sum::{self, CompensatedSum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("alpha must lie in (1, 1.5], got {0}")]
    InvalidAlpha(f64),
    #[error("no member has positive traded value")]
    NoTradedValue,
    #[error("entropy needs at least 2 members with positive traded value, found {found}")]
    TooFewMembers { found: usize },
    #[error("{date}: entropy needs at least 2 members with positive traded value, found {found}")]
    TooFewMembersOnDay { date: NaiveDate, found: usize },
    #[error("{symbol} has no bar on {date}")]
    MissingMember { symbol: String, date: NaiveDate },
    #[error("window {window} is invalid for a series of length {len}")]
    InvalidWindow { window: usize, len: usize },
    #[error("moving averages apply to raw daily series only")]
    NotDaily,
}

/// Blend parameter for the OC and OLHC components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyParams {
    alpha: f64,
}

impl EntropyParams {
    pub const DEFAULT_ALPHA: f64 = 1.34;

    pub fn new(alpha: f64) -> Result<Self, EntropyError> {
        if alpha > 1.0 && alpha <= 1.5 {
            Ok(Self { alpha })
        } else {
            Err(EntropyError::InvalidAlpha(alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for EntropyParams {
    fn default() -> Self {
        Self { alpha: Self::DEFAULT_ALPHA }
    }
}

/// Traded-value shares of the bars with positive traded value.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    members: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightVector {
    /// Positions, in the bar slice the weights were built from, of the
    /// members that received a weight.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub fn traded_value_weights(bars: &[OhlcvBar]) -> Result<WeightVector, EntropyError> {
    let total = sum::sum(bars.iter().map(OhlcvBar::traded_value));
    if !(total > 0.0) {
        return Err(EntropyError::NoTradedValue);
    }
    let (members, weights) = bars
        .iter()
        .enumerate()
        .filter(|(_, b)| b.traded_value() > 0.0)
        .map(|(i, b)| (i, b.traded_value() / total))
        .unzip();
    Ok(WeightVector { members, weights })
}

/// Weight of the OLHC component for `m` members.
pub fn weight_f(m: usize, params: &EntropyParams) -> Result<f64, EntropyError> {
    if m < 2 {
        return Err(EntropyError::TooFewMembers { found: m });
    }
    let m = m as f64;
    let alpha = params.alpha;
    Ok((alpha - 1.0) / (alpha + (m + 1.0) / (m - 1.0)))
}

#[inline]
fn oc_factor(bar: &OhlcvBar) -> f64 {
    bar.close() / bar.open() - 1.0
}

#[inline]
fn olhc_factor(bar: &OhlcvBar) -> f64 {
    let (o, h, l, c) = (bar.open(), bar.high(), bar.low(), bar.close());
    (h / o - 1.0) * (h / c - 1.0) + (l / o - 1.0) * (l / c - 1.0)
}

#[inline]
fn psi_ln_psi(psi: f64) -> f64 {
    psi * libm::log(psi)
}

fn weighted_component(
    bars: &[OhlcvBar],
    weights: &WeightVector,
    factor: impl Fn(&OhlcvBar) -> f64,
) -> f64 {
    let mut acc = CompensatedSum::new();
    for (&i, &psi) in weights.members.iter().zip(&weights.weights) {
        acc.add(factor(&bars[i]) * psi_ln_psi(psi));
    }
    -acc.value()
}

/// Open-close component. Signed: positive when weighted closes sit above
/// opens.
pub fn csie_oc(bars: &[OhlcvBar], weights: &WeightVector) -> f64 {
    weighted_component(bars, weights, oc_factor)
}

/// Open-low-high-close component. Non-negative for valid bars.
pub fn csie_olhc(bars: &[OhlcvBar], weights: &WeightVector) -> f64 {
    weighted_component(bars, weights, olhc_factor)
}

/// Both components and the member count, in one pass over the bars without
/// allocating.
fn components(bars: &[OhlcvBar]) -> (f64, f64, usize) {
    let mut total = CompensatedSum::new();
    let mut m = 0;
    for bar in bars {
        let lambda = bar.traded_value();
        if lambda > 0.0 {
            total.add(lambda);
            m += 1;
        }
    }
    let total = total.value();
    let mut oc = CompensatedSum::new();
    let mut olhc = CompensatedSum::new();
    for bar in bars {
        let lambda = bar.traded_value();
        if lambda > 0.0 {
            let w = psi_ln_psi(lambda / total);
            oc.add(oc_factor(bar) * w);
            olhc.add(olhc_factor(bar) * w);
        }
    }
    (-oc.value(), -olhc.value(), m)
}

fn blended(bars: &[OhlcvBar], params: &EntropyParams) -> Result<f64, EntropyError> {
    let (oc, olhc, m) = components(bars);
    let f = weight_f(m, params)?;
    Ok((1.0 - f) * oc + f * olhc)
}

/// Cross-sectional entropy of one day's bars.
pub fn csie_day(bars: &[OhlcvBar], params: &EntropyParams) -> Result<f64, EntropyError> {
    blended(bars, params)
}

/// Longitudinal entropy of one instrument over consecutive days.
pub fn ie_window(bars: &[OhlcvBar], params: &EntropyParams) -> Result<f64, EntropyError> {
    blended(bars, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Daily,
    /// Window length `w`; the value at index `k` covers the window that
    /// starts on day `k`.
    Windowed(usize),
}

/// Dated entropy values.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
    kind: SeriesKind,
}

impl EntropySeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>, kind: SeriesKind) -> Self {
        assert_eq!(dates.len(), values.len(), "one value per date");
        Self { dates, values, kind }
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Who contributes to each day's cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership<'a> {
    /// Every symbol traded that day (within the view's subset, if any).
    Market,
    /// A fixed symbol set. Every member must have a bar on every day.
    Portfolio(&'a [SymbolId]),
}

/// Daily CSIE over every day of the view.
pub fn csie_series(
    view: &PanelView<'_>,
    membership: Membership<'_>,
    params: &EntropyParams,
) -> Result<EntropySeries, EntropyError> {
    let panel = view.panel();
    let first = *view.days().start();
    let dates = view.dates();

    let values = par::try_map_indexed(view.n_days(), |k| {
        let day = first + k;
        let date = dates[k];
        let value = match membership {
            Membership::Market => match view.subset() {
                None => csie_day(panel.day_cells(day).1, params),
                Some(_) => {
                    let (syms, bars) = panel.day_cells(day);
                    let picked: Vec<OhlcvBar> = syms
                        .iter()
                        .zip(bars)
                        .filter(|(s, _)| view.contains_symbol(**s))
                        .map(|(_, b)| *b)
                        .collect();
                    csie_day(&picked, params)
                }
            },
            Membership::Portfolio(set) => {
                let picked = set
                    .iter()
                    .map(|s| {
                        panel.bar(day, *s).copied().ok_or_else(|| EntropyError::MissingMember {
                            symbol: panel.symbol_name(*s).to_string(),
                            date,
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                csie_day(&picked, params)
            }
        };
        value.map_err(|e| match e {
            EntropyError::TooFewMembers { found } => EntropyError::TooFewMembersOnDay { date, found },
            other => other,
        })
    })?;

    Ok(EntropySeries { dates: dates.to_vec(), values, kind: SeriesKind::Daily })
}

/// Simple moving average of a daily series, dated by window start.
pub fn moving_average(series: &EntropySeries, window: usize) -> Result<EntropySeries, EntropyError> {
    if series.kind != SeriesKind::Daily {
        return Err(EntropyError::NotDaily);
    }
    let len = series.len();
    if window == 0 || window > len {
        return Err(EntropyError::InvalidWindow { window, len });
    }
    let values = series.values.windows(window).map(sum::mean).collect();
    let dates = series.dates[..len - window + 1].to_vec();
    Ok(EntropySeries { dates, values, kind: SeriesKind::Windowed(window) })
}

/// Rolling-window IE of one instrument, aligned with [`moving_average`] of
/// the same window.
pub fn ie_series(
    dates: &[NaiveDate],
    bars: &[OhlcvBar],
    window: usize,
    params: &EntropyParams,
) -> Result<EntropySeries, EntropyError> {
    assert_eq!(dates.len(), bars.len(), "one bar per date");
    let len = bars.len();
    if window == 0 || window > len {
        return Err(EntropyError::InvalidWindow { window, len });
    }
    let values = bars
        .windows(window)
        .map(|w| ie_window(w, params))
        .collect::<Result<Vec<_>, _>>()?;
    let dates = dates[..len - window + 1].to_vec();
    Ok(EntropySeries { dates, values, kind: SeriesKind::Windowed(window) })
}
