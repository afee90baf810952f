//! Text form of a synthetic market specification.
//!
//! ```text
//! # comment
//! seed = 7
//! days = 260
//! start = 2021-01-04
//! factor_drift = 0.0004
//! factor_volatility = 0.012
//! index = SYNTH
//! market = DEMO
//! symbol AAA drift=0.001 volatility=0.02 loading=0.6 volume_base=1e6 volume_noise=0.3
//! family prefix=S count=40 drift=-0.001..0.002 volatility=0.01..0.03 loading=0..1 volume_base=1e5..1e6 volume_noise=0.2
//! ```
//!
//! `symbol` lines declare one symbol. `family` lines declare `count`
//! symbols named `prefix` plus a zero-padded number, each parameter either a
//! fixed value or a `lo..hi` range drawn uniformly per symbol. Family draws
//! use their own stream, seeded by the family's `seed` key or, by default,
//! the market seed plus the family's position, so they never disturb the
//! market's price stream. Symbols appear in declaration order.

use csie_core::format::parse_iso_date;
use csie_core::rng::Xoshiro256StarStar;
use csie_core::synth::{MarketSpec, SymbolSpec};
use csie_core::NaiveDate;

use crate::error::{CliError, Result};

pub const DEFAULT_INDEX: &str = "INDEX";
pub const DEFAULT_MARKET: &str = "MARKET";

/// A market spec plus the names used when writing it out.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub market: MarketSpec,
    /// Symbol written to the index file.
    pub index: String,
    /// Prefix of per-day file names.
    pub market_name: String,
}

#[derive(Debug, Clone, Copy)]
enum Param {
    Fixed(f64),
    Uniform(f64, f64),
}

impl Param {
    fn draw(self, rng: &mut Xoshiro256StarStar) -> f64 {
        match self {
            Param::Fixed(v) => v,
            Param::Uniform(lo, hi) => lo + (hi - lo) * rng.next_f64(),
        }
    }
}

fn err(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("spec line {line}: {msg}"))
}

fn number(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| err(line, format!("{key}: expected a number, got {v:?}")))
}

fn param(line: usize, key: &str, v: &str) -> Result<Param> {
    match v.split_once("..") {
        Some((lo, hi)) => {
            let (lo, hi) = (number(line, key, lo)?, number(line, key, hi)?);
            if lo > hi {
                return Err(err(line, format!("{key}: empty range {v}")));
            }
            Ok(Param::Uniform(lo, hi))
        }
        None => Ok(Param::Fixed(number(line, key, v)?)),
    }
}

fn key_values(line: usize, words: &[&str]) -> Result<Vec<(String, String)>> {
    words
        .iter()
        .map(|w| {
            w.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| err(line, format!("expected key=value, got {w:?}")))
        })
        .collect()
}

const SYMBOL_KEYS: [&str; 5] = ["drift", "volatility", "loading", "volume_base", "volume_noise"];

fn symbol_params(line: usize, kv: &[(String, String)]) -> Result<[Param; 5]> {
    let mut out = [None; 5];
    for (k, v) in kv {
        match SYMBOL_KEYS.iter().position(|s| s == k) {
            Some(i) => out[i] = Some(param(line, k, v)?),
            None if matches!(k.as_str(), "prefix" | "count" | "seed") => {}
            None => return Err(err(line, format!("unknown key {k}"))),
        }
    }
    let mut params = [Param::Fixed(0.0); 5];
    for (i, p) in out.into_iter().enumerate() {
        params[i] = p.ok_or_else(|| err(line, format!("missing {}", SYMBOL_KEYS[i])))?;
    }
    Ok(params)
}

fn make_symbol(symbol: String, p: &[Param; 5], rng: &mut Xoshiro256StarStar) -> SymbolSpec {
    SymbolSpec {
        symbol,
        drift: p[0].draw(rng),
        volatility: p[1].draw(rng),
        loading: p[2].draw(rng),
        volume_base: p[3].draw(rng),
        volume_noise: p[4].draw(rng),
    }
}

pub fn parse_spec(text: &str) -> Result<SpecFile> {
    let mut seed = 0u64;
    let mut days = None;
    let mut start = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    let (mut factor_drift, mut factor_volatility) = (0.0, 0.0);
    let mut index = DEFAULT_INDEX.to_string();
    let mut market_name = DEFAULT_MARKET.to_string();
    // Families are expanded once the market seed is known.
    let mut entries: Vec<(usize, Vec<(String, String)>, Option<String>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        match words[0] {
            "symbol" => {
                let name = words.get(1).ok_or_else(|| err(line, "symbol needs a name"))?;
                entries.push((line, key_values(line, &words[2..])?, Some(name.to_string())));
            }
            "family" => entries.push((line, key_values(line, &words[1..])?, None)),
            _ => {
                let (k, v) = body.split_once('=').ok_or_else(|| err(line, "expected key = value"))?;
                let (k, v) = (k.trim(), v.trim());
                match k {
                    "seed" => seed = v.parse().map_err(|_| err(line, "seed must be an unsigned integer"))?,
                    "days" => days = Some(v.parse().map_err(|_| err(line, "days must be a count"))?),
                    "start" => start = parse_iso_date(v).ok_or_else(|| err(line, "start must be YYYY-MM-DD"))?,
                    "factor_drift" => factor_drift = number(line, k, v)?,
                    "factor_volatility" => factor_volatility = number(line, k, v)?,
                    "index" => index = v.to_string(),
                    "market" => market_name = v.to_string(),
                    _ => return Err(err(line, format!("unknown key {k}"))),
                }
            }
        }
    }

    let mut symbols = Vec::new();
    let mut families = 0u64;
    for (line, kv, name) in entries {
        let params = symbol_params(line, &kv)?;
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        match name {
            Some(name) => {
                let fixed = params.iter().all(|p| matches!(p, Param::Fixed(_)));
                if !fixed {
                    return Err(err(line, "ranges are only allowed on family lines"));
                }
                symbols.push(make_symbol(name, &params, &mut Xoshiro256StarStar::seed_from_u64(0)));
            }
            None => {
                let prefix = get("prefix").ok_or_else(|| err(line, "family needs prefix"))?;
                let count: usize = get("count")
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| err(line, "family needs a count"))?;
                let family_seed = match get("seed") {
                    Some(s) => s.parse().map_err(|_| err(line, "seed must be an unsigned integer"))?,
                    None => seed.wrapping_add(1 + families),
                };
                families += 1;
                let width = count.max(1).to_string().len();
                let mut rng = Xoshiro256StarStar::seed_from_u64(family_seed);
                for j in 0..count {
                    symbols.push(make_symbol(format!("{prefix}{j:0width$}"), &params, &mut rng));
                }
            }
        }
    }

    let market = MarketSpec {
        symbols,
        days: days.ok_or_else(|| CliError::Data("spec: days is required".into()))?,
        start,
        factor_drift,
        factor_volatility,
        seed,
    };
    market.validate()?;
    Ok(SpecFile { market, index, market_name })
}
