//! Cross-sectional intrinsic entropy (CSIE) market volatility analytics.
//!
//! The crate is `no_std` with `alloc`. It holds the numerical core: the
//! day×symbol OHLCV panel, daily CSIE and longitudinal IE estimators,
//! entropy betas relative to the whole market, the screening procedure that
//! discovers symbol sets beating a benchmark index at equal or lower risk, a
//! covariance-based portfolio variance baseline, and a deterministic synthetic
//! market generator, plus the end-of-day text formats. File IO and the command
//! line live in `csie-cli`.
//!
//! Enable the `parallel` feature to spread per-day and per-symbol loops over a
//! rayon pool. Results do not depend on the number of worker threads.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bar;
pub mod beta;
pub mod entropy;
pub mod format;
pub mod markowitz;
pub mod panel;
pub mod rng;
pub mod screener;
pub mod synth;

mod par;
mod sum;

pub use bar::{BarError, OhlcvBar};
pub use beta::{BetaError, BetaRecord, MarketContext};
pub use entropy::{EntropyError, EntropyParams, EntropySeries, SeriesKind, WeightVector};
pub use format::{EodFormat, RowError};
pub use panel::{
    EodRecord, IndexSeries, MarketPanel, PanelBuilder, PanelError, PanelView, SymbolId,
    TradingCalendar,
};
pub use screener::{BacktestRow, PortfolioBeta, ScreenConfig, ScreenError, SelectionReport};

pub use chrono::NaiveDate;
