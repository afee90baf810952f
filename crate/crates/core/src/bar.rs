//! One symbol-day of end-of-day market data.

use thiserror::Error;

/// Open, high, low and close prices plus traded volume for one symbol on one
/// trading day.
///
/// Constructed only through [`OhlcvBar::new`], so every value in circulation
/// satisfies `0 < low <= min(open, close)` and `high >= max(open, close)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhlcvBar {
    open: f64,
    high: f64,
    low: f64,
    close: f64,
    volume: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BarError {
    #[error("{field} price must be finite and strictly positive, got {value}")]
    NonPositivePrice { field: &'static str, value: f64 },
    #[error("high {high} is below max(open, close) = {bound}")]
    HighBelowBody { high: f64, bound: f64 },
    #[error("low {low} is above min(open, close) = {bound}")]
    LowAboveBody { low: f64, bound: f64 },
}

impl OhlcvBar {
    pub fn new(open: f64, high: f64, low: f64, close: f64, volume: u64) -> Result<Self, BarError> {
        for (field, value) in [("open", open), ("high", high), ("low", low), ("close", close)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(BarError::NonPositivePrice { field, value });
            }
        }
        let top = open.max(close);
        if high < top {
            return Err(BarError::HighBelowBody { high, bound: top });
        }
        let bottom = open.min(close);
        if low > bottom {
            return Err(BarError::LowAboveBody { low, bound: bottom });
        }
        Ok(Self { open, high, low, close, volume })
    }

    /// A bar with all four prices equal.
    pub fn flat(price: f64, volume: u64) -> Result<Self, BarError> {
        Self::new(price, price, price, price, volume)
    }

    #[inline]
    pub fn open(&self) -> f64 {
        self.open
    }

    #[inline]
    pub fn high(&self) -> f64 {
        self.high
    }

    #[inline]
    pub fn low(&self) -> f64 {
        self.low
    }

    #[inline]
    pub fn close(&self) -> f64 {
        self.close
    }

    #[inline]
    pub fn volume(&self) -> u64 {
        self.volume
    }

    /// Close times volume.
    #[inline]
    pub fn traded_value(&self) -> f64 {
        self.close * self.volume as f64
    }
}
