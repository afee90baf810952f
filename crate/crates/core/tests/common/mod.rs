//! Straight-from-the-formula reference implementations. They share no code
//! with the library: naive left-to-right sums, `std` logarithms, no shared
//! helpers.

#![allow(dead_code)]

use csie_core::{MarketPanel, NaiveDate, OhlcvBar, SymbolId};

pub fn naive_csie(bars: &[OhlcvBar], alpha: f64) -> f64 {
    let traded: Vec<&OhlcvBar> =
        bars.iter().filter(|b| b.close() * b.volume() as f64 > 0.0).collect();
    let mut lambda = 0.0;
    for b in &traded {
        lambda += b.close() * b.volume() as f64;
    }
    let mut h_oc = 0.0;
    let mut h_olhc = 0.0;
    for b in &traded {
        let psi = b.close() * b.volume() as f64 / lambda;
        let (o, h, l, c) = (b.open(), b.high(), b.low(), b.close());
        h_oc -= (c / o - 1.0) * psi * psi.ln();
        h_olhc -= ((h / o - 1.0) * (h / c - 1.0) + (l / o - 1.0) * (l / c - 1.0)) * psi * psi.ln();
    }
    let m = traded.len() as f64;
    let f = (alpha - 1.0) / (alpha + (m + 1.0) / (m - 1.0));
    (1.0 - f) * h_oc + f * h_olhc
}

/// Sum of the absolute magnitudes of every term entering `naive_csie`; the
/// scale against which cancellation error is measured.
pub fn csie_term_scale(bars: &[OhlcvBar]) -> f64 {
    let lambda: f64 = bars.iter().map(|b| b.close() * b.volume() as f64).sum();
    bars.iter()
        .filter(|b| b.volume() > 0)
        .map(|b| {
            let psi = b.close() * b.volume() as f64 / lambda;
            let (o, h, l, c) = (b.open(), b.high(), b.low(), b.close());
            let w = (psi * psi.ln()).abs();
            ((c / o - 1.0).abs() + ((h / o - 1.0) * (h / c - 1.0)).abs()
                + ((l / o - 1.0) * (l / c - 1.0)).abs())
                * w
        })
        .sum()
}

pub fn naive_mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn naive_cov(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (naive_mean(a), naive_mean(b));
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - ma) * (b[i] - mb);
    }
    s / (a.len() as f64 - 1.0)
}

pub fn naive_beta(subject: &[f64], market: &[f64]) -> f64 {
    naive_cov(subject, market) / naive_cov(market, market)
}

pub fn naive_moving_average(xs: &[f64], w: usize) -> Vec<f64> {
    (0..=xs.len() - w).map(|k| naive_mean(&xs[k..k + w])).collect()
}

/// Window-averaged whole-market CSIE over day indices `first..=last`.
pub fn naive_market_smoothed(panel: &MarketPanel, first: usize, last: usize, w: usize, alpha: f64) -> Vec<f64> {
    let daily: Vec<f64> =
        (first..=last).map(|d| naive_csie(panel.day_cells(d).1, alpha)).collect();
    naive_moving_average(&daily, w)
}

pub fn naive_ie_series(bars: &[OhlcvBar], w: usize, alpha: f64) -> Vec<f64> {
    (0..=bars.len() - w).map(|k| naive_csie(&bars[k..k + w], alpha)).collect()
}

pub fn naive_ror(bars: &[OhlcvBar]) -> f64 {
    100.0 * (bars[bars.len() - 1].close() - bars[0].close()) / bars[0].close()
}

pub fn symbol_bars(panel: &MarketPanel, sym: SymbolId, first: usize, last: usize) -> Option<Vec<OhlcvBar>> {
    (first..=last).map(|d| panel.bar(d, sym).copied()).collect()
}

pub fn day_index(panel: &MarketPanel, date: NaiveDate) -> usize {
    panel.calendar().position(date).expect("trading day")
}

/// Relative difference, falling back to absolute near zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub mod fixtures {
    use csie_core::entropy::{csie_series, EntropyParams, Membership};
    use csie_core::rng::Xoshiro256StarStar;
    use csie_core::synth::{MarketSpec, SymbolSpec};
    use csie_core::{IndexSeries, MarketPanel, NaiveDate, OhlcvBar};

    /// A market with symbol parameters drawn from `seed`.
    pub fn random_spec(seed: u64, n_symbols: usize, days: usize) -> MarketSpec {
        let mut rng = Xoshiro256StarStar::seed_from_u64(seed ^ 0x5eed);
        let symbols = (0..n_symbols)
            .map(|i| SymbolSpec {
                symbol: format!("S{i:03}"),
                drift: -0.002 + 0.005 * rng.next_f64(),
                volatility: 0.005 + 0.035 * rng.next_f64(),
                loading: rng.next_f64(),
                volume_base: 1e4 + 1e6 * rng.next_f64(),
                volume_noise: 0.5 * rng.next_f64(),
            })
            .collect();
        MarketSpec {
            symbols,
            days,
            start: NaiveDate::from_ymd_opt(2019, 1, 2).unwrap(),
            factor_drift: 0.0003,
            factor_volatility: 0.012,
            seed,
        }
    }

    /// An index whose daily return is `gain` times the market's daily CSIE
    /// normalized by its largest magnitude, with no wicks and near-constant
    /// traded value. Its entropy beta takes the sign of `gain`.
    pub fn tracking_index(panel: &MarketPanel, gain: f64) -> IndexSeries {
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
        IndexSeries::new("TRACK", h.dates().to_vec(), bars).unwrap()
    }
}
