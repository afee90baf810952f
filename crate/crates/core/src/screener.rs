//! Discovery of symbol sets that beat a benchmark index on return at equal or
//! lower entropy-beta risk.
//!
//! For an interval and window the index return and beta set the thresholds.
//! Every symbol traded on each day of the interval is kept when
//! `beta <= index_beta && ror >= index_ror`, and, with the positivity
//! refinement, additionally `beta > 0`. The kept set's own CSIE beta is then
//! reported as the portfolio beta.

use alloc::vec::Vec;
use core::cmp::Ordering;

use chrono::NaiveDate;
use thiserror::Error;

use crate::beta::{BetaError, BetaRecord, MarketContext};
use crate::entropy::EntropyParams;
use crate::panel::{IndexSeries, MarketPanel, PanelError, PanelView, SymbolId};
use crate::par;
use crate::sum;

/// Default cap on reported least-risky members.
pub const DEFAULT_TOP_K: usize = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScreenError {
    #[error("window must be at least 2 days, got {0}")]
    InvalidWindow(usize),
    #[error("interval has {days} trading days; window {window} needs at least {}", window + 1)]
    IntervalTooShort { days: usize, window: usize },
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Beta(#[from] BetaError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub window: usize,
    pub params: EntropyParams,
    pub require_positive_beta: bool,
    pub top_k: usize,
}

impl ScreenConfig {
    pub fn new(start: NaiveDate, end: NaiveDate, window: usize) -> Self {
        Self {
            start,
            end,
            window,
            params: EntropyParams::default(),
            require_positive_beta: false,
            top_k: DEFAULT_TOP_K,
        }
    }
}

/// Beta of the selected set, or why there is none.
#[derive(Debug, Clone, PartialEq)]
pub enum PortfolioBeta {
    Computed(BetaRecord),
    /// Fewer than two members; a cross-section needs at least two.
    InsufficientMembers(usize),
}

impl PortfolioBeta {
    pub fn beta(&self) -> Option<f64> {
        match self {
            PortfolioBeta::Computed(r) => Some(r.beta),
            PortfolioBeta::InsufficientMembers(_) => None,
        }
    }
}

/// Summary columns over the member list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub max_ror_pct: f64,
    pub beta_of_max: f64,
    pub min_ror_pct: f64,
    pub beta_of_min: f64,
    pub avg_ror_pct: f64,
}

impl Summary {
    /// `None` for an empty member list. Among equal returns the member that
    /// comes first wins.
    pub fn of(members: &[BetaRecord]) -> Option<Self> {
        let first = members.first()?;
        let (mut max, mut min) = (first, first);
        for m in &members[1..] {
            if m.ror_pct > max.ror_pct {
                max = m;
            }
            if m.ror_pct < min.ror_pct {
                min = m;
            }
        }
        Some(Self {
            max_ror_pct: max.ror_pct,
            beta_of_max: max.beta,
            min_ror_pct: min.ror_pct,
            beta_of_min: min.beta,
            avg_ror_pct: sum::mean(&members.iter().map(|m| m.ror_pct).collect::<Vec<_>>()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub config: ScreenConfig,
    /// Trading days the interval resolved to.
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub index: BetaRecord,
    pub n_eligible: usize,
    /// Ascending beta; ties by descending return, then symbol.
    pub members: Vec<BetaRecord>,
    pub n_positive_beta: usize,
    pub portfolio: PortfolioBeta,
    pub summary: Option<Summary>,
}

impl SelectionReport {
    pub fn benchmark(&self) -> &str {
        &self.index.subject
    }

    pub fn top_k(&self) -> &[BetaRecord] {
        top_k_least_risky(self, self.config.top_k)
    }
}

/// The selection predicate for one symbol.
pub fn qualifies(candidate: &BetaRecord, index: &BetaRecord, require_positive_beta: bool) -> bool {
    candidate.beta <= index.beta
        && candidate.ror_pct >= index.ror_pct
        && (!require_positive_beta || candidate.beta > 0.0)
}

fn risk_order(a: &BetaRecord, b: &BetaRecord) -> Ordering {
    a.beta
        .total_cmp(&b.beta)
        .then_with(|| b.ror_pct.total_cmp(&a.ror_pct))
        .then_with(|| a.subject.cmp(&b.subject))
}

/// The `k` least risky members.
pub fn top_k_least_risky(report: &SelectionReport, k: usize) -> &[BetaRecord] {
    &report.members[..k.min(report.members.len())]
}

/// Screens every symbol eligible over the configured interval.
pub fn screen(
    config: &ScreenConfig,
    panel: &MarketPanel,
    index: &IndexSeries,
) -> Result<SelectionReport, ScreenError> {
    let view = panel.slice::<&str>(config.start, config.end, None)?;
    screen_view(config, view, index)
}

fn screen_view(
    config: &ScreenConfig,
    view: PanelView<'_>,
    index: &IndexSeries,
) -> Result<SelectionReport, ScreenError> {
    if config.window < 2 {
        return Err(ScreenError::InvalidWindow(config.window));
    }
    if view.n_days() < config.window + 1 {
        return Err(ScreenError::IntervalTooShort { days: view.n_days(), window: config.window });
    }
    let (start, end) = (view.start_date(), view.end_date());
    let eligible = view.eligible_symbols();
    let n_eligible = eligible.len();
    let ctx = MarketContext::new(view, config.window, config.params)?;
    let index_record = ctx.index_beta(index)?;
    let candidates = ctx.symbol_betas(&eligible)?;

    let (mut ids, mut members): (Vec<SymbolId>, Vec<BetaRecord>) = eligible
        .into_iter()
        .zip(candidates)
        .filter(|(_, r)| qualifies(r, &index_record, config.require_positive_beta))
        .unzip();
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|a, b| risk_order(&members[*a], &members[*b]));
    ids = order.iter().map(|i| ids[*i]).collect();
    members = order.iter().map(|i| members[*i].clone()).collect();

    let portfolio = if ids.len() >= 2 {
        PortfolioBeta::Computed(ctx.portfolio_beta(&ids, "portfolio")?)
    } else {
        PortfolioBeta::InsufficientMembers(ids.len())
    };

    Ok(SelectionReport {
        config: config.clone(),
        start,
        end,
        index: index_record,
        n_eligible,
        n_positive_beta: members.iter().filter(|m| m.beta > 0.0).count(),
        summary: Summary::of(&members),
        members,
        portfolio,
    })
}

/// One calendar year's screening outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestRow {
    pub year: i32,
    pub outcome: Result<SelectionReport, ScreenError>,
}

/// Buy-and-hold screening per calendar year, first to last trading day of
/// each year. A failing year yields an error row; the others still run.
pub fn annual_backtest(
    panel: &MarketPanel,
    index: &IndexSeries,
    years: &[i32],
    window: usize,
    params: EntropyParams,
    require_positive_beta: bool,
) -> Vec<BacktestRow> {
    par::map_indexed(years.len(), |i| {
        let year = years[i];
        let outcome = panel.year_view(year).map_err(ScreenError::from).and_then(|view| {
            let config = ScreenConfig {
                start: view.start_date(),
                end: view.end_date(),
                window,
                params,
                require_positive_beta,
                top_k: DEFAULT_TOP_K,
            };
            screen_view(&config, view, index)
        });
        BacktestRow { year, outcome }
    })
}
