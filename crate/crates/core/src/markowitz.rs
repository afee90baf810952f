//! Classical portfolio variance from the covariance matrix of closing prices.
//!
//! Covariances are taken over price levels, not returns, and use the `n - 1`
//! sample denominator.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::panel::{PanelView, SymbolId};
use crate::sum::{self, CompensatedSum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkowitzError {
    #[error("price matrix needs at least {needed} days, got {got}")]
    TooFewDays { needed: usize, got: usize },
    #[error("price matrix is {rows}x{cols} but holds {len} values")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("prices must be finite and positive")]
    BadPrice,
    #[error("{symbol} has gaps in the interval")]
    Gap { symbol: String },
    #[error("expected {expected} weights, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weights must be non-negative and sum to 1")]
    BadWeights,
    #[error("allocation needs at least one asset")]
    NoAssets,
}

/// Closing prices, `n` days by `m` assets, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceMatrix {
    rows: usize,
    cols: usize,
    prices: Vec<f64>,
}

impl PriceMatrix {
    pub fn new(rows: usize, cols: usize, prices: Vec<f64>) -> Result<Self, MarkowitzError> {
        if prices.len() != rows * cols {
            return Err(MarkowitzError::Shape { rows, cols, len: prices.len() });
        }
        if rows == 0 {
            return Err(MarkowitzError::TooFewDays { needed: 1, got: 0 });
        }
        if prices.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(MarkowitzError::BadPrice);
        }
        Ok(Self { rows, cols, prices })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, MarkowitzError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let prices: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(rows.len(), cols, prices)
    }

    /// Closes of `symbols` over every day of the view.
    pub fn from_view(view: &PanelView<'_>, symbols: &[SymbolId]) -> Result<Self, MarkowitzError> {
        let panel = view.panel();
        let mut prices = Vec::with_capacity(view.n_days() * symbols.len());
        for day in view.days() {
            for &s in symbols {
                let bar = panel
                    .bar(day, s)
                    .ok_or_else(|| MarkowitzError::Gap { symbol: panel.symbol_name(s).into() })?;
                prices.push(bar.close());
            }
        }
        Self::new(view.n_days(), symbols.len(), prices)
    }

    pub fn n_days(&self) -> usize {
        self.rows
    }

    pub fn n_assets(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, day: usize, asset: usize) -> f64 {
        self.prices[day * self.cols + asset]
    }

    fn column(&self, asset: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |i| self.get(i, asset))
    }
}

/// Long-only portfolio weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAllocation {
    weights: Vec<f64>,
}

impl WeightAllocation {
    pub fn new(weights: Vec<f64>) -> Result<Self, MarkowitzError> {
        if weights.is_empty() {
            return Err(MarkowitzError::NoAssets);
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || libm::fabs(sum::sum(weights.iter().copied()) - 1.0) > 1e-12
        {
            return Err(MarkowitzError::BadWeights);
        }
        Ok(Self { weights })
    }

    pub fn equal(m: usize) -> Result<Self, MarkowitzError> {
        if m == 0 {
            return Err(MarkowitzError::NoAssets);
        }
        Ok(Self { weights: alloc::vec![1.0 / m as f64; m] })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Symmetric `m×m` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    values: Vec<f64>,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[k * self.dim + l]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }
}

pub fn mean_vector(prices: &PriceMatrix) -> Vec<f64> {
    let n = prices.rows as f64;
    (0..prices.cols).map(|j| sum::sum(prices.column(j)) / n).collect()
}

fn centered(prices: &PriceMatrix) -> Vec<f64> {
    let mu = mean_vector(prices);
    prices
        .prices
        .chunks_exact(prices.cols.max(1))
        .flat_map(|row| row.iter().zip(&mu).map(|(p, m)| p - m))
        .collect()
}

pub fn covariance_matrix(prices: &PriceMatrix) -> Result<CovarianceMatrix, MarkowitzError> {
    let (n, m) = (prices.rows, prices.cols);
    if n < 2 {
        return Err(MarkowitzError::TooFewDays { needed: 2, got: n });
    }
    let dev = centered(prices);
    let mut values = alloc::vec![0.0; m * m];
    for k in 0..m {
        for l in k..m {
            let mut acc = CompensatedSum::new();
            for i in 0..n {
                acc.add(dev[i * m + k] * dev[i * m + l]);
            }
            let c = acc.value() / (n - 1) as f64;
            values[k * m + l] = c;
            values[l * m + k] = c;
        }
    }
    Ok(CovarianceMatrix { dim: m, values })
}

/// `wᵀ · Cov · w`, evaluated as the sample variance of the centered
/// portfolio price path `(P - μ) · w`. Never negative.
pub fn portfolio_variance(
    prices: &PriceMatrix,
    weights: &WeightAllocation,
) -> Result<f64, MarkowitzError> {
    let (n, m) = (prices.rows, prices.cols);
    if weights.weights.len() != m {
        return Err(MarkowitzError::DimensionMismatch { expected: m, got: weights.weights.len() });
    }
    if n < 2 {
        return Err(MarkowitzError::TooFewDays { needed: 2, got: n });
    }
    let dev = centered(prices);
    let path = dev
        .chunks_exact(m)
        .map(|row| sum::sum(row.iter().zip(&weights.weights).map(|(d, w)| d * w)));
    Ok(sum::sum(path.map(|y| y * y)) / (n - 1) as f64)
}
