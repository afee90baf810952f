//! The sparse day×symbol market panel and views over it.
//!
//! Bars are stored day-major in a compressed layout: one contiguous run of
//! cells per trading day, cells within a day sorted by symbol. A whole market
//! day is therefore a borrowed slice, and longitudinal access to one symbol is
//! a binary search per day.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use chrono::{Datelike, NaiveDate};
use hashbrown::HashMap;
use thiserror::Error;

use crate::bar::OhlcvBar;

/// Index of a symbol in [`MarketPanel::symbols`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl SymbolId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PanelError {
    #[error("conflicting bars for symbol {symbol} on {date}")]
    DuplicateBar { symbol: String, date: NaiveDate },
    #[error("calendar dates must be strictly increasing ({prev} then {next})")]
    UnsortedCalendar { prev: NaiveDate, next: NaiveDate },
    #[error("interval start {start} is after end {end}")]
    InvalidRange { start: NaiveDate, end: NaiveDate },
    #[error("no trading days between {start} and {end}")]
    NoTradingDays { start: NaiveDate, end: NaiveDate },
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("series {name} has no bar on trading day {date}")]
    MissingBar { name: String, date: NaiveDate },
    #[error("series {name} has zero volume on trading day {date}")]
    ZeroVolume { name: String, date: NaiveDate },
}

/// Strictly increasing trading days.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TradingCalendar {
    dates: Vec<NaiveDate>,
}

impl TradingCalendar {
    pub fn new(dates: Vec<NaiveDate>) -> Result<Self, PanelError> {
        for pair in dates.windows(2) {
            if pair[0] >= pair[1] {
                return Err(PanelError::UnsortedCalendar { prev: pair[0], next: pair[1] });
            }
        }
        Ok(Self { dates })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn position(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    /// Day indices covering `[start, end]`, with both endpoints snapped
    /// inward to the nearest trading day. `None` when no trading day falls
    /// in the range.
    pub fn snap(&self, start: NaiveDate, end: NaiveDate) -> Option<(usize, usize)> {
        let first = self.dates.partition_point(|d| *d < start);
        let past_last = self.dates.partition_point(|d| *d <= end);
        (first < past_last).then(|| (first, past_last - 1))
    }

    /// Calendar years that have at least one trading day.
    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.dates.iter().map(|d| d.year()).collect();
        years.dedup();
        years
    }
}

/// One parsed input row.
#[derive(Debug, Clone, PartialEq)]
pub struct EodRecord {
    pub symbol: String,
    pub date: NaiveDate,
    pub bar: OhlcvBar,
}

/// Accumulates records in any order and freezes them into a [`MarketPanel`].
#[derive(Debug, Default)]
pub struct PanelBuilder {
    symbol_ids: HashMap<String, u32>,
    names: Vec<String>,
    day_slots: BTreeMap<NaiveDate, usize>,
    days: Vec<Vec<(u32, OhlcvBar)>>,
    last_day: Option<(NaiveDate, usize)>,
}

impl PanelBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, symbol: &str, date: NaiveDate, bar: OhlcvBar) {
        let sym = match self.symbol_ids.get(symbol) {
            Some(&id) => id,
            None => {
                let id = self.names.len() as u32;
                self.symbol_ids.insert(symbol.to_string(), id);
                self.names.push(symbol.to_string());
                id
            }
        };
        let slot = match self.last_day {
            Some((d, slot)) if d == date => slot,
            _ => {
                let next = self.days.len();
                let slot = *self.day_slots.entry(date).or_insert(next);
                if slot == next {
                    // Days tend to hold similar counts; this avoids doubling slack.
                    let hint = self.days.last().map_or(0, Vec::len);
                    self.days.push(Vec::with_capacity(hint));
                }
                self.last_day = Some((date, slot));
                slot
            }
        };
        self.days[slot].push((sym, bar));
    }

    pub fn push_record(&mut self, record: &EodRecord) {
        self.push(&record.symbol, record.date, record.bar);
    }

    pub fn finish(self) -> Result<MarketPanel, PanelError> {
        let PanelBuilder { names, day_slots, mut days, .. } = self;

        let mut order: Vec<u32> = (0..names.len() as u32).collect();
        order.sort_unstable_by(|a, b| names[*a as usize].cmp(&names[*b as usize]));
        let mut rank = alloc::vec![0u32; names.len()];
        for (new, old) in order.iter().enumerate() {
            rank[*old as usize] = new as u32;
        }
        let mut names: Vec<Option<String>> = names.into_iter().map(Some).collect();
        let symbols: Vec<String> =
            order.iter().map(|old| names[*old as usize].take().unwrap_or_default()).collect();

        let total: usize = days.iter().map(Vec::len).sum();
        let mut dates = Vec::with_capacity(day_slots.len());
        let mut day_offsets = Vec::with_capacity(day_slots.len() + 1);
        let mut cell_symbols = Vec::with_capacity(total);
        let mut cell_bars = Vec::with_capacity(total);
        day_offsets.push(0);

        for (date, slot) in day_slots {
            let mut cells = core::mem::take(&mut days[slot]);
            for cell in cells.iter_mut() {
                cell.0 = rank[cell.0 as usize];
            }
            cells.sort_by_key(|c| c.0);
            let mut prev: Option<(u32, OhlcvBar)> = None;
            for (sym, bar) in cells {
                if let Some((psym, pbar)) = prev {
                    if psym == sym {
                        if pbar != bar {
                            return Err(PanelError::DuplicateBar {
                                symbol: symbols[sym as usize].clone(),
                                date,
                            });
                        }
                        continue;
                    }
                }
                cell_symbols.push(SymbolId(sym));
                cell_bars.push(bar);
                prev = Some((sym, bar));
            }
            dates.push(date);
            day_offsets.push(cell_symbols.len());
        }
        cell_symbols.shrink_to_fit();
        cell_bars.shrink_to_fit();

        Ok(MarketPanel {
            calendar: TradingCalendar { dates },
            symbols,
            day_offsets,
            cell_symbols,
            cell_bars,
        })
    }
}

/// Assembles a panel from records. Identical duplicates collapse; conflicting
/// duplicates are an error.
pub fn build_panel<I>(records: I) -> Result<MarketPanel, PanelError>
where
    I: IntoIterator<Item = EodRecord>,
{
    let mut builder = PanelBuilder::new();
    for record in records {
        builder.push(&record.symbol, record.date, record.bar);
    }
    builder.finish()
}

/// Immutable day×symbol container of OHLCV bars.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarketPanel {
    calendar: TradingCalendar,
    symbols: Vec<String>,
    day_offsets: Vec<usize>,
    cell_symbols: Vec<SymbolId>,
    cell_bars: Vec<OhlcvBar>,
}

impl MarketPanel {
    pub fn calendar(&self) -> &TradingCalendar {
        &self.calendar
    }

    pub fn n_days(&self) -> usize {
        self.calendar.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn n_bars(&self) -> usize {
        self.cell_bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_bars.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol_name(&self, id: SymbolId) -> &str {
        &self.symbols[id.index()]
    }

    pub fn symbol_id(&self, symbol: &str) -> Option<SymbolId> {
        self.symbols
            .binary_search_by(|s| s.as_str().cmp(symbol))
            .ok()
            .map(|i| SymbolId(i as u32))
    }

    /// Number of symbols with a bar on `day`.
    pub fn daily_count(&self, day: usize) -> usize {
        self.day_offsets[day + 1] - self.day_offsets[day]
    }

    pub fn daily_counts(&self) -> Vec<usize> {
        (0..self.n_days()).map(|d| self.daily_count(d)).collect()
    }

    /// Fraction of empty cells in the n×m matrix, in percent.
    pub fn sparsity_pct(&self) -> f64 {
        let cells = self.n_days() * self.n_symbols();
        if cells == 0 {
            return 0.0;
        }
        100.0 * (1.0 - self.n_bars() as f64 / cells as f64)
    }

    /// Symbols and bars present on `day`, both sorted by symbol.
    pub fn day_cells(&self, day: usize) -> (&[SymbolId], &[OhlcvBar]) {
        let range = self.day_offsets[day]..self.day_offsets[day + 1];
        (&self.cell_symbols[range.clone()], &self.cell_bars[range])
    }

    pub fn bar(&self, day: usize, symbol: SymbolId) -> Option<&OhlcvBar> {
        let (syms, bars) = self.day_cells(day);
        syms.binary_search(&symbol).ok().map(|i| &bars[i])
    }

    /// Every stored bar in (date, symbol) order.
    pub fn records(&self) -> impl Iterator<Item = (NaiveDate, &str, &OhlcvBar)> + '_ {
        (0..self.n_days()).flat_map(move |day| {
            let date = self.calendar.dates[day];
            let (syms, bars) = self.day_cells(day);
            syms.iter().zip(bars).map(move |(s, b)| (date, self.symbol_name(*s), b))
        })
    }

    pub fn resolve_symbols<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<SymbolId>, PanelError> {
        names
            .iter()
            .map(|name| {
                let name = name.as_ref();
                self.symbol_id(name).ok_or_else(|| PanelError::UnknownSymbol(name.to_string()))
            })
            .collect()
    }

    /// The trading days in `[start, end]`, optionally restricted to a symbol
    /// subset. Endpoints that are not trading days snap inward.
    pub fn slice<S: AsRef<str>>(
        &self,
        start: NaiveDate,
        end: NaiveDate,
        subset: Option<&[S]>,
    ) -> Result<PanelView<'_>, PanelError> {
        if start > end {
            return Err(PanelError::InvalidRange { start, end });
        }
        let (first, last) =
            self.calendar.snap(start, end).ok_or(PanelError::NoTradingDays { start, end })?;
        let subset = match subset {
            Some(names) => {
                let mut ids = self.resolve_symbols(names)?;
                ids.sort_unstable();
                ids.dedup();
                Some(ids)
            }
            None => None,
        };
        Ok(PanelView { panel: self, first, last, subset })
    }

    /// View over the whole calendar. `None` for an empty panel.
    pub fn full_view(&self) -> Option<PanelView<'_>> {
        (!self.calendar.is_empty()).then(|| PanelView {
            panel: self,
            first: 0,
            last: self.n_days() - 1,
            subset: None,
        })
    }

    /// The calendar-year interval, first to last trading day of `year`.
    pub fn year_view(&self, year: i32) -> Result<PanelView<'_>, PanelError> {
        let start = NaiveDate::from_ymd_opt(year, 1, 1).unwrap_or(NaiveDate::MIN);
        let end = NaiveDate::from_ymd_opt(year, 12, 31).unwrap_or(NaiveDate::MAX);
        self.slice::<&str>(start, end, None)
    }
}

/// A contiguous run of trading days of a panel, optionally restricted to a
/// subset of its symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelView<'a> {
    panel: &'a MarketPanel,
    first: usize,
    last: usize,
    subset: Option<Vec<SymbolId>>,
}

impl<'a> PanelView<'a> {
    pub fn panel(&self) -> &'a MarketPanel {
        self.panel
    }

    /// Number of trading days covered.
    pub fn n_days(&self) -> usize {
        self.last - self.first + 1
    }

    /// Panel day indices covered by the view.
    pub fn days(&self) -> core::ops::RangeInclusive<usize> {
        self.first..=self.last
    }

    pub fn dates(&self) -> &'a [NaiveDate] {
        &self.panel.calendar.dates[self.first..=self.last]
    }

    pub fn start_date(&self) -> NaiveDate {
        self.panel.calendar.dates[self.first]
    }

    pub fn end_date(&self) -> NaiveDate {
        self.panel.calendar.dates[self.last]
    }

    pub fn subset(&self) -> Option<&[SymbolId]> {
        self.subset.as_deref()
    }

    pub fn contains_symbol(&self, id: SymbolId) -> bool {
        match &self.subset {
            Some(ids) => ids.binary_search(&id).is_ok(),
            None => id.index() < self.panel.n_symbols(),
        }
    }

    /// Symbols with a positive-volume bar on every day of the view, in symbol
    /// order.
    pub fn eligible_symbols(&self) -> Vec<SymbolId> {
        let mut hits = alloc::vec![0u32; self.panel.n_symbols()];
        for day in self.days() {
            let (syms, bars) = self.panel.day_cells(day);
            for (sym, bar) in syms.iter().zip(bars) {
                if bar.volume() > 0 {
                    hits[sym.index()] += 1;
                }
            }
        }
        let t = self.n_days() as u32;
        hits.iter()
            .enumerate()
            .map(|(i, n)| (SymbolId(i as u32), *n))
            .filter(|(id, n)| *n == t && self.contains_symbol(*id))
            .map(|(id, _)| id)
            .collect()
    }

    /// The symbol's bars over the view, or `None` if any day lacks one.
    pub fn symbol_bars(&self, id: SymbolId) -> Option<Vec<OhlcvBar>> {
        self.days().map(|day| self.panel.bar(day, id).copied()).collect()
    }
}

impl fmt::Display for PanelView<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] ({} days)", self.start_date(), self.end_date(), self.n_days())
    }
}

/// A single instrument's OHLCV history, e.g. a benchmark index.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSeries {
    name: String,
    dates: Vec<NaiveDate>,
    bars: Vec<OhlcvBar>,
}

impl IndexSeries {
    pub fn new(
        name: impl Into<String>,
        dates: Vec<NaiveDate>,
        bars: Vec<OhlcvBar>,
    ) -> Result<Self, PanelError> {
        assert_eq!(dates.len(), bars.len(), "one bar per date");
        let calendar = TradingCalendar::new(dates)?;
        Ok(Self { name: name.into(), dates: calendar.dates, bars })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn bars(&self) -> &[OhlcvBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    /// Bars aligned to every trading day of the view. Each day must be
    /// present with positive volume.
    pub fn aligned_bars(&self, view: &PanelView<'_>) -> Result<Vec<OhlcvBar>, PanelError> {
        view.dates()
            .iter()
            .map(|date| {
                let i = self.dates.binary_search(date).map_err(|_| PanelError::MissingBar {
                    name: self.name.clone(),
                    date: *date,
                })?;
                let bar = self.bars[i];
                if bar.volume() == 0 {
                    return Err(PanelError::ZeroVolume { name: self.name.clone(), date: *date });
                }
                Ok(bar)
            })
            .collect()
    }
}
