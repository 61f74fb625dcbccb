//! Shared domain types: wear states, binned rate tables, costs, limits and
//! failure histories.
//!
//! Deterioration is measured in integer units of 0.01 mm. A freshly installed
//! part carries [`FRESH_WEAR`] units, which is the first wear state of the
//! model. Rates are looked up by band: deterioration `d` falls in band
//! `min(d / bin_width, bin_count - 1)` (zero-based).

use std::fmt;

use crate::error::{Error, Result};

/// Default band width in wear units.
pub const DEFAULT_BIN_WIDTH: u32 = 9;
/// Default number of bands per part.
pub const DEFAULT_BIN_COUNT: usize = 10;
/// Upper bound on any rate entry explored by the estimator.
pub const RATE_MAX: u32 = 20;
/// Wear of a newly installed part.
pub const FRESH_WEAR: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    One,
    Two,
}

impl Part {
    pub fn number(self) -> u8 {
        match self {
            Part::One => 1,
            Part::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct WearState {
    pub d1: u32,
    pub d2: u32,
}

impl WearState {
    pub const fn new(d1: u32, d2: u32) -> Self {
        Self { d1, d2 }
    }

    /// Both parts new.
    pub const fn fresh() -> Self {
        Self::new(FRESH_WEAR, FRESH_WEAR)
    }

    /// State clamped to the limits, as used by the value grid.
    pub fn capped(self, limits: Limits) -> Self {
        Self::new(self.d1.min(limits.l1), self.d2.min(limits.l2))
    }
}

/// Which matrix of a [`RateTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Matrix {
    A,
    B,
}

/// Band geometry shared by both matrices of a rate table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    pub bin_width: u32,
    pub rows: usize,
    pub cols: usize,
}

impl GridShape {
    pub fn new(bin_width: u32, rows: usize, cols: usize) -> Result<Self> {
        if bin_width == 0 {
            return Err(Error::InvalidRateTable("bin width must be positive".into()));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidRateTable(
                "bin counts must be positive".into(),
            ));
        }
        Ok(Self {
            bin_width,
            rows,
            cols,
        })
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Zero-based band of deterioration `d` along an axis with `count` bands.
    #[inline]
    pub fn band(&self, d: u32, count: usize) -> usize {
        ((d / self.bin_width) as usize).min(count - 1)
    }

    /// Whether every sub-limit state of each part has its own band.
    pub fn covers(&self, limits: Limits) -> bool {
        u64::from(self.bin_width) * self.rows as u64 >= u64::from(limits.l1)
            && u64::from(self.bin_width) * self.cols as u64 >= u64::from(limits.l2)
    }
}

impl Default for GridShape {
    fn default() -> Self {
        Self {
            bin_width: DEFAULT_BIN_WIDTH,
            rows: DEFAULT_BIN_COUNT,
            cols: DEFAULT_BIN_COUNT,
        }
    }
}

/// One-based band number of deterioration `d`: `min(d / width + 1, count)`.
pub fn bin_index(d: u32, bin_width: u32, bin_count: usize) -> usize {
    assert!(bin_width > 0 && bin_count > 0);
    ((d / bin_width) as usize + 1).min(bin_count)
}

/// Daily wear increments of both parts, indexed by the bands of both parts.
///
/// Row index is the band of part 1, column index the band of part 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RateTable {
    shape: GridShape,
    a: Vec<u32>,
    b: Vec<u32>,
}

impl RateTable {
    /// Builds a table from row-major matrices. Every entry must be at least 1.
    pub fn new(shape: GridShape, a: Vec<u32>, b: Vec<u32>) -> Result<Self> {
        for (name, m) in [("a", &a), ("b", &b)] {
            if m.len() != shape.cells() {
                return Err(Error::InvalidRateTable(format!(
                    "matrix {name} has {} entries, expected {}x{}",
                    m.len(),
                    shape.rows,
                    shape.cols
                )));
            }
            if let Some(pos) = m.iter().position(|&r| r == 0) {
                return Err(Error::InvalidRateTable(format!(
                    "matrix {name} entry ({}, {}) is zero",
                    pos / shape.cols,
                    pos % shape.cols
                )));
            }
        }
        Ok(Self { shape, a, b })
    }

    pub fn from_rows(bin_width: u32, a: &[Vec<u32>], b: &[Vec<u32>]) -> Result<Self> {
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        if b.len() != rows || a.iter().chain(b).any(|r| r.len() != cols) {
            return Err(Error::InvalidRateTable("ragged matrices".into()));
        }
        let shape = GridShape::new(bin_width, rows, cols)?;
        Self::new(shape, a.concat(), b.concat())
    }

    /// Constant-rate table.
    pub fn uniform(shape: GridShape, a: u32, b: u32) -> Result<Self> {
        Self::new(shape, vec![a; shape.cells()], vec![b; shape.cells()])
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn bin_width(&self) -> u32 {
        self.shape.bin_width
    }

    pub fn rows(&self) -> usize {
        self.shape.rows
    }

    pub fn cols(&self) -> usize {
        self.shape.cols
    }

    pub fn matrix(&self, which: Matrix) -> &[u32] {
        match which {
            Matrix::A => &self.a,
            Matrix::B => &self.b,
        }
    }

    pub fn get(&self, which: Matrix, row: usize, col: usize) -> u32 {
        self.matrix(which)[row * self.shape.cols + col]
    }

    /// Sets one entry. Zero is rejected to keep the table valid.
    pub fn set(&mut self, which: Matrix, row: usize, col: usize, value: u32) -> Result<()> {
        if value == 0 {
            return Err(Error::InvalidRateTable("rates must be at least 1".into()));
        }
        let idx = row * self.shape.cols + col;
        match which {
            Matrix::A => self.a[idx] = value,
            Matrix::B => self.b[idx] = value,
        }
        Ok(())
    }

    pub fn rows_of(&self, which: Matrix) -> Vec<Vec<u32>> {
        self.matrix(which)
            .chunks(self.shape.cols)
            .map(<[u32]>::to_vec)
            .collect()
    }

    /// Increments `(a, b)` for the given wear state.
    #[inline]
    pub fn rate_lookup(&self, state: WearState) -> (u32, u32) {
        let i = self.shape.band(state.d1, self.shape.rows);
        let j = self.shape.band(state.d2, self.shape.cols);
        let idx = i * self.shape.cols + j;
        (self.a[idx], self.b[idx])
    }

    pub fn max_rate(&self) -> u32 {
        self.a.iter().chain(&self.b).copied().max().unwrap_or(1)
    }

    pub fn within_bounds(&self, lo: u32, hi: u32) -> bool {
        self.a
            .iter()
            .chain(&self.b)
            .all(|&r| (lo..=hi).contains(&r))
    }

    /// Whether both matrices are nondecreasing along rows and columns.
    pub fn is_monotone(&self) -> bool {
        let (rows, cols) = (self.shape.rows, self.shape.cols);
        [&self.a, &self.b].iter().all(|m| {
            (0..rows).all(|i| {
                (0..cols).all(|j| {
                    let v = m[i * cols + j];
                    (i + 1 == rows || m[(i + 1) * cols + j] >= v)
                        && (j + 1 == cols || m[i * cols + j + 1] >= v)
                })
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub c1: f64,
    pub c2: f64,
    pub v: f64,
    pub alpha: f64,
}

impl CostModel {
    pub fn new(c1: f64, c2: f64, v: f64, alpha: f64) -> Result<Self> {
        let m = Self { c1, c2, v, alpha };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, c) in [("c1", self.c1), ("c2", self.c2), ("v", self.v)] {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidCostModel(format!(
                    "{name} must be positive, got {c}"
                )));
            }
        }
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidCostModel(format!(
                "discount factor must lie in [0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Non-fatal remarks about the cost structure.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.v > self.c1 + self.c2 {
            out.push(format!(
                "joint replacement cost {} exceeds c1 + c2 = {}; it is never cheaper than two single replacements",
                self.v,
                self.c1 + self.c2
            ));
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            c1: self.c1 * factor,
            c2: self.c2 * factor,
            v: self.v * factor,
            alpha: self.alpha,
        }
    }

    pub fn max_cost(&self) -> f64 {
        self.c1.max(self.c2).max(self.v)
    }

    /// Default value-iteration tolerance, relative to the cost magnitude.
    pub fn default_tolerance(&self) -> f64 {
        1e-8 * (1.0 + self.max_cost())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Limits {
    pub l1: u32,
    pub l2: u32,
}

impl Limits {
    pub fn new(l1: u32, l2: u32) -> Result<Self> {
        if l1 <= FRESH_WEAR || l2 <= FRESH_WEAR {
            return Err(Error::InvalidLimits(format!(
                "limits must exceed the fresh wear {FRESH_WEAR}, got ({l1}, {l2})"
            )));
        }
        Ok(Self { l1, l2 })
    }

    pub fn of(&self, part: Part) -> u32 {
        match part {
            Part::One => self.l1,
            Part::Two => self.l2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Part1,
    Part2,
    Both,
}

impl EventKind {
    pub fn involves(self, part: Part) -> bool {
        matches!(
            (self, part),
            (EventKind::Both, _) | (EventKind::Part1, Part::One) | (EventKind::Part2, Part::Two)
        )
    }

    pub fn from_flags(part1: bool, part2: bool) -> Option<Self> {
        match (part1, part2) {
            (true, true) => Some(EventKind::Both),
            (true, false) => Some(EventKind::Part1),
            (false, true) => Some(EventKind::Part2),
            (false, false) => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EventKind::Part1 => "1",
            EventKind::Part2 => "2",
            EventKind::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" => Some(EventKind::Part1),
            "2" => Some(EventKind::Part2),
            "both" | "1,2" | "12" | "3" => Some(EventKind::Both),
            _ => None,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FailureEvent {
    pub time: u32,
    pub which: EventKind,
}

impl FailureEvent {
    pub const fn new(time: u32, which: EventKind) -> Self {
        Self { time, which }
    }
}

/// Chronological record of limit replacements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FailureHistory {
    events: Vec<FailureEvent>,
    horizon: u32,
}

impl FailureHistory {
    /// Horizon defaults to the time of the last event.
    pub fn new(events: Vec<FailureEvent>) -> Result<Self> {
        let horizon = events.last().map_or(0, |e| e.time);
        Self::with_horizon(events, horizon)
    }

    pub fn with_horizon(events: Vec<FailureEvent>, horizon: u32) -> Result<Self> {
        if let Some(e) = events.first() {
            if e.time == 0 {
                return Err(Error::InvalidHistory("event times start at day 1".into()));
            }
        }
        for w in events.windows(2) {
            if w[1].time <= w[0].time {
                return Err(Error::InvalidHistory(format!(
                    "event times must be strictly increasing ({} then {})",
                    w[0].time, w[1].time
                )));
            }
        }
        if let Some(e) = events.last() {
            if horizon < e.time {
                return Err(Error::InvalidHistory(format!(
                    "horizon {horizon} precedes last event at day {}",
                    e.time
                )));
            }
        }
        Ok(Self { events, horizon })
    }

    pub fn events(&self) -> &[FailureEvent] {
        &self.events
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// Replacement times of one part; joint events count for both.
    pub fn times(&self, part: Part) -> Vec<u32> {
        self.events
            .iter()
            .filter(|e| e.which.involves(part))
            .map(|e| e.time)
            .collect()
    }

    /// Inter-replacement intervals of one part, the first measured from day 0.
    pub fn intervals(&self, part: Part) -> Vec<u32> {
        let mut prev = 0;
        self.times(part)
            .into_iter()
            .map(|t| {
                let d = t - prev;
                prev = t;
                d
            })
            .collect()
    }

    pub fn count(&self, part: Part) -> usize {
        self.events
            .iter()
            .filter(|e| e.which.involves(part))
            .count()
    }

    pub fn counts(&self) -> (usize, usize) {
        (self.count(Part::One), self.count(Part::Two))
    }

    pub fn mean_interval(&self, part: Part) -> Option<f64> {
        let iv = self.intervals(part);
        if iv.is_empty() {
            None
        } else {
            Some(iv.iter().map(|&x| f64::from(x)).sum::<f64>() / iv.len() as f64)
        }
    }

    /// Copy with every event shifted by `offset` days.
    pub fn shifted(&self, offset: u32) -> Self {
        Self {
            events: self
                .events
                .iter()
                .map(|e| FailureEvent::new(e.time + offset, e.which))
                .collect(),
            horizon: self.horizon + offset,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    #[test]
    fn bin_index_examples() {
        assert_eq!(bin_index(0, 9, 10), 1);
        assert_eq!(bin_index(9, 9, 10), 2);
        assert_eq!(bin_index(95, 9, 10), 10);
        assert_eq!(bin_index(8, 9, 10), 1);
        assert_eq!(bin_index(89, 9, 10), 10);
    }

    #[test]
    fn bin_index_is_surjective_on_covered_range() {
        let mut seen = [false; 10];
        for d in 0..90 {
            seen[bin_index(d, 9, 10) - 1] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn rate_lookup_on_published_tables() {
        let t = datasets::example1_rates();
        assert_eq!(t.rate_lookup(WearState::new(0, 0)), (1, 1));
        assert_eq!(t.rate_lookup(WearState::new(85, 85)), (14, 14));
        // row band 5 (45..53), column band 1 (9..17)
        assert_eq!(t.rate_lookup(WearState::new(50, 10)), (7, 7));
    }

    #[test]
    fn rate_lookup_constant_table() {
        let t = RateTable::uniform(GridShape::default(), 4, 4).unwrap();
        for d1 in [0, 17, 44, 200] {
            for d2 in [0, 3, 89] {
                assert_eq!(t.rate_lookup(WearState::new(d1, d2)), (4, 4));
            }
        }
    }

    #[test]
    fn zero_rate_rejected() {
        let shape = GridShape::new(9, 1, 2).unwrap();
        assert!(RateTable::new(shape, vec![1, 0], vec![1, 1]).is_err());
        assert!(RateTable::new(shape, vec![1], vec![1, 1]).is_err());
    }

    #[test]
    fn published_tables_cover_limits_and_bounds() {
        let limits = datasets::EXAMPLE_LIMITS;
        for t in [datasets::example1_rates(), datasets::example2_rates()] {
            assert!(t.shape().covers(limits));
            assert!(t.within_bounds(1, RATE_MAX));
            assert!(t.is_monotone());
        }
    }

    #[test]
    fn cost_model_validation() {
        assert!(CostModel::new(100.0, 120.0, 220.0, 0.95).is_ok());
        assert!(CostModel::new(0.0, 120.0, 220.0, 0.95).is_err());
        assert!(CostModel::new(100.0, 120.0, 220.0, 1.0).is_err());
        let m = CostModel::new(100.0, 120.0, 230.0, 0.95).unwrap();
        assert_eq!(m.warnings().len(), 1);
        assert!(CostModel::new(100.0, 120.0, 220.0, 0.95)
            .unwrap()
            .warnings()
            .is_empty());
    }

    #[test]
    fn history_ordering_and_counts() {
        use EventKind::*;
        let h = FailureHistory::new(vec![
            FailureEvent::new(3, Part1),
            FailureEvent::new(5, Both),
            FailureEvent::new(9, Part2),
        ])
        .unwrap();
        assert_eq!(h.counts(), (2, 2));
        assert_eq!(h.intervals(Part::One), vec![3, 2]);
        assert_eq!(h.intervals(Part::Two), vec![5, 4]);
        assert_eq!(h.horizon(), 9);
        assert!(FailureHistory::new(vec![
            FailureEvent::new(5, Part1),
            FailureEvent::new(5, Part2)
        ])
        .is_err());
        assert!(FailureHistory::new(vec![FailureEvent::new(0, Part1)]).is_err());
    }

    #[test]
    fn published_history_counts() {
        assert_eq!(datasets::example1_history().counts(), (28, 28));
        assert_eq!(datasets::example1_history().horizon(), 550);
        assert_eq!(datasets::example2_history().counts(), (8, 7));
        assert_eq!(datasets::example2_history().horizon(), 114);
    }
}
