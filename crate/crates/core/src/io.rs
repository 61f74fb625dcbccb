//! Plain-text file formats.
//!
//! Every CSV starts with optional `#` comment lines (provenance) followed by
//! a header row. Readers skip comments and blank lines and report errors
//! with 1-based line numbers.

use std::fmt::Write as _;

use crate::anneal::{ScheduleSummary, TraceRow};
use crate::domain::{EventKind, FailureEvent, FailureHistory, Limits, Matrix, RateTable};
use crate::dp::{
    Action, PolicyGrid, StateGrid, Threshold, ThresholdKind, Thresholds, ValueFunction,
};
use crate::error::{Error, Result};
use crate::evaluate::ComparisonRow;
use crate::sim::TrajectoryPoint;

/// `# key=value` comment block.
pub fn comment_block(entries: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        let _ = writeln!(out, "# {k}={v}");
    }
    out
}

/// Value of a `# key=value` comment, if present.
pub fn comment_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| {
        let rest = l.strip_prefix('#')?.trim();
        let (k, v) = rest.split_once('=')?;
        (k.trim() == key).then(|| v.trim())
    })
}

struct Rows<'a> {
    path: &'a str,
    header: (usize, Vec<&'a str>),
    rows: Vec<(usize, Vec<&'a str>)>,
}

impl<'a> Rows<'a> {
    fn read(text: &'a str, path: &'a str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| Error::Parse {
            path: path.into(),
            line: 1,
            message: "missing header row".into(),
        })?;
        let header = (hl, header.split(',').map(str::trim).collect());
        let rows = lines
            .map(|(n, l)| (n, l.split(',').map(str::trim).collect()))
            .collect();
        Ok(Self { path, header, rows })
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.into(),
            line,
            message: message.into(),
        }
    }

    fn expect_header(&self, names: &[&str]) -> Result<()> {
        let got: Vec<String> = self
            .header
            .1
            .iter()
            .map(|s| s.to_ascii_lowercase())
            .collect();
        if got != names {
            return Err(self.err(
                self.header.0,
                format!(
                    "expected header `{}`, got `{}`",
                    names.join(","),
                    self.header.1.join(",")
                ),
            ));
        }
        Ok(())
    }

    fn check_width(&self, line: usize, row: &[&str], n: usize) -> Result<()> {
        if row.len() != n {
            return Err(self.err(line, format!("expected {n} fields, got {}", row.len())));
        }
        Ok(())
    }

    fn num<T: std::str::FromStr>(&self, line: usize, field: &str, what: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.err(line, format!("invalid {what} `{field}`")))
    }
}

pub fn write_history(history: &FailureHistory, header: &str) -> String {
    let mut out = String::from(header);
    let _ = writeln!(out, "# horizon={}", history.horizon());
    out.push_str("time,part\n");
    for e in history.events() {
        let _ = writeln!(out, "{},{}", e.time, e.which.label());
    }
    out
}

/// Reads `time,part` rows; `part` is `1`, `2` or `both`. The horizon is the
/// `# horizon=` comment when present, else the last event time.
pub fn read_history(text: &str, path: &str) -> Result<FailureHistory> {
    let rows = Rows::read(text, path)?;
    rows.expect_header(&["time", "part"])?;
    let mut events = Vec::with_capacity(rows.rows.len());
    for (line, row) in &rows.rows {
        rows.check_width(*line, row, 2)?;
        let time: u32 = rows.num(*line, row[0], "time")?;
        let which = EventKind::parse(row[1])
            .ok_or_else(|| rows.err(*line, format!("invalid part `{}`", row[1])))?;
        if let Some(prev) = events.last().map(|e: &FailureEvent| e.time) {
            if time <= prev {
                return Err(rows.err(*line, format!("time {time} is not after {prev}")));
            }
        }
        if time == 0 {
            return Err(rows.err(*line, "times start at day 1"));
        }
        events.push(FailureEvent::new(time, which));
    }
    let result = match comment_value(text, "horizon") {
        Some(h) => {
            let h: u32 = h
                .parse()
                .map_err(|_| rows.err(1, format!("invalid horizon `{h}`")))?;
            FailureHistory::with_horizon(events, h)
        }
        None => FailureHistory::new(events),
    };
    result.map_err(|e| rows.err(rows.header.0, e.to_string()))
}

fn band_label(k: usize, width: u32) -> String {
    let lo = k as u32 * width;
    format!("{}-{}", lo, lo + width - 1)
}

/// One matrix with band labels on the header row and first column.
pub fn write_rate_matrix(table: &RateTable, which: Matrix, header: &str) -> String {
    let w = table.bin_width();
    let mut out = String::from(header);
    out.push_str(match which {
        Matrix::A => "a",
        Matrix::B => "b",
    });
    for j in 0..table.cols() {
        let _ = write!(out, ",{}", band_label(j, w));
    }
    out.push('\n');
    for i in 0..table.rows() {
        out.push_str(&band_label(i, w));
        for j in 0..table.cols() {
            let _ = write!(out, ",{}", table.get(which, i, j));
        }
        out.push('\n');
    }
    out
}

fn parse_band(label: &str) -> Option<(u32, u32)> {
    let (lo, hi) = label.split_once('-')?;
    Some((lo.trim().parse().ok()?, hi.trim().parse().ok()?))
}

/// Reads one matrix; returns `(bin_width, rows)`.
pub fn read_rate_matrix(text: &str, path: &str) -> Result<(u32, Vec<Vec<u32>>)> {
    let rows = Rows::read(text, path)?;
    let (hl, header) = &rows.header;
    if header.len() < 2 {
        return Err(rows.err(*hl, "header needs at least one band column"));
    }
    let mut width = None;
    for (k, label) in header[1..].iter().enumerate() {
        let (lo, hi) = parse_band(label)
            .ok_or_else(|| rows.err(*hl, format!("invalid band label `{label}`")))?;
        let w = (hi + 1).saturating_sub(lo);
        if w == 0 || lo != k as u32 * w || width.is_some_and(|x| x != w) {
            return Err(rows.err(
                *hl,
                format!("band `{label}` breaks the uniform band layout"),
            ));
        }
        width = Some(w);
    }
    let width = width.unwrap();
    let cols = header.len() - 1;
    let mut out = Vec::new();
    for (k, (line, row)) in rows.rows.iter().enumerate() {
        rows.check_width(*line, row, cols + 1)?;
        if parse_band(row[0]) != Some((k as u32 * width, (k as u32 + 1) * width - 1)) {
            return Err(rows.err(*line, format!("unexpected row label `{}`", row[0])));
        }
        let vals = row[1..]
            .iter()
            .map(|f| rows.num(*line, f, "rate"))
            .collect::<Result<Vec<u32>>>()?;
        if vals.contains(&0) {
            return Err(rows.err(*line, "rates must be at least 1"));
        }
        out.push(vals);
    }
    if out.is_empty() {
        return Err(rows.err(*hl, "no rows"));
    }
    Ok((width, out))
}

pub fn read_rate_table(
    a_text: &str,
    a_path: &str,
    b_text: &str,
    b_path: &str,
) -> Result<RateTable> {
    let (wa, a) = read_rate_matrix(a_text, a_path)?;
    let (wb, b) = read_rate_matrix(b_text, b_path)?;
    if wa != wb || a.len() != b.len() || a[0].len() != b[0].len() {
        return Err(Error::InvalidRateTable(format!(
            "{a_path} and {b_path} have different band layouts"
        )));
    }
    RateTable::from_rows(wa, &a, &b)
}

pub fn write_trajectory(points: &[TrajectoryPoint], header: &str) -> String {
    let mut out = String::from(header);
    out.push_str("day,d1,d2,event\n");
    for p in points {
        let ev = p.event.map_or("", EventKind::label);
        let _ = writeln!(out, "{},{},{},{}", p.day, p.d1, p.d2, ev);
    }
    out
}

pub fn read_trajectory(text: &str, path: &str) -> Result<Vec<TrajectoryPoint>> {
    let rows = Rows::read(text, path)?;
    rows.expect_header(&["day", "d1", "d2", "event"])?;
    rows.rows
        .iter()
        .map(|(line, row)| {
            rows.check_width(*line, row, 4)?;
            let event = if row[3].is_empty() {
                None
            } else {
                Some(EventKind::parse(row[3]).ok_or_else(|| rows.err(*line, "invalid event"))?)
            };
            Ok(TrajectoryPoint {
                day: rows.num(*line, row[0], "day")?,
                d1: rows.num(*line, row[1], "d1")?,
                d2: rows.num(*line, row[2], "d2")?,
                event,
            })
        })
        .collect()
}

pub fn write_value_grid(u: &ValueFunction, header: &str) -> String {
    let mut out = String::from(header);
    out.push_str("d1,d2,u\n");
    for (d1, d2, v) in u.iter() {
        let _ = writeln!(out, "{d1},{d2},{v}");
    }
    out
}

pub fn write_policy_grid(p: &PolicyGrid, header: &str) -> String {
    let mut out = String::from(header);
    out.push_str("d1,d2,action\n");
    for (d1, d2, a) in p.iter() {
        let _ = writeln!(out, "{d1},{d2},{}", a.code());
    }
    out
}

fn read_grid<T: Copy + Default>(
    text: &str,
    path: &str,
    column: &str,
    parse: impl Fn(&Rows, usize, &str) -> Result<T>,
) -> Result<StateGrid<T>> {
    let rows = Rows::read(text, path)?;
    rows.expect_header(&["d1", "d2", column])?;
    let mut cells = Vec::with_capacity(rows.rows.len());
    let mut max = (0u32, 0u32);
    for (line, row) in &rows.rows {
        rows.check_width(*line, row, 3)?;
        let d1: u32 = rows.num(*line, row[0], "d1")?;
        let d2: u32 = rows.num(*line, row[1], "d2")?;
        max = (max.0.max(d1), max.1.max(d2));
        cells.push((*line, d1, d2, parse(&rows, *line, row[2])?));
    }
    let limits = Limits {
        l1: max.0,
        l2: max.1,
    };
    let mut grid = StateGrid::filled(limits, T::default());
    let expected = (max.0 as usize + 1) * (max.1 as usize + 1);
    if cells.len() != expected {
        return Err(rows.err(
            rows.header.0,
            format!("expected {expected} cells, got {}", cells.len()),
        ));
    }
    for (k, (line, d1, d2, v)) in cells.into_iter().enumerate() {
        if grid.index(d1, d2) != k {
            return Err(rows.err(line, "cells must be listed in row-major order"));
        }
        grid.set(d1, d2, v);
    }
    Ok(grid)
}

pub fn read_value_grid(text: &str, path: &str) -> Result<ValueFunction> {
    read_grid(text, path, "u", |rows, line, f| rows.num(line, f, "value"))
}

pub fn read_policy_grid(text: &str, path: &str) -> Result<PolicyGrid> {
    read_grid(text, path, "action", |rows, line, f| {
        let code: u8 = rows.num(line, f, "action code")?;
        Action::from_code(code).ok_or_else(|| rows.err(line, format!("unknown action code {code}")))
    })
}

pub fn write_thresholds(t: &Thresholds, header: &str) -> String {
    let mut out = String::from(header);
    out.push_str("part,other_wear,threshold,kind\n");
    for (part, list) in [(1, &t.part1), (2, &t.part2)] {
        for (k, th) in list.iter().enumerate() {
            let _ = writeln!(out, "{part},{k},{},{}", th.at, th.kind.label());
        }
    }
    out
}

pub fn write_sa_trace(trace: &[TraceRow], header: &str) -> String {
    let mut out = String::from(header);
    out.push_str("iter,temp,objective,accepted,proposed\n");
    for r in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iter,
            r.temp,
            r.objective,
            u8::from(r.accepted),
            r.proposed
        );
    }
    out
}

pub fn read_sa_trace(text: &str, path: &str) -> Result<Vec<TraceRow>> {
    let rows = Rows::read(text, path)?;
    rows.expect_header(&["iter", "temp", "objective", "accepted", "proposed"])?;
    rows.rows
        .iter()
        .map(|(line, row)| {
            rows.check_width(*line, row, 5)?;
            let accepted = match row[3] {
                "1" => true,
                "0" => false,
                other => return Err(rows.err(*line, format!("invalid accepted flag `{other}`"))),
            };
            Ok(TraceRow {
                iter: rows.num(*line, row[0], "iteration")?,
                temp: rows.num(*line, row[1], "temperature")?,
                objective: rows.num(*line, row[2], "objective")?,
                accepted,
                proposed: rows.num(*line, row[4], "objective")?,
            })
        })
        .collect()
}

/// One row per schedule: `n,t0,cool,run_1..run_k,average`.
pub fn write_sa_summary(rows: &[ScheduleSummary], header: &str) -> String {
    let mut out = String::from(header);
    let k = rows.first().map_or(0, |r| r.results.len());
    out.push_str("n,t0,cool");
    for i in 1..=k {
        let _ = write!(out, ",run_{i}");
    }
    out.push_str(",average\n");
    for r in rows {
        let _ = write!(out, "{},{},{}", r.iters_per_temp, r.t0, r.cool);
        for v in &r.results {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", r.average);
    }
    out
}

pub fn read_sa_summary(text: &str, path: &str) -> Result<Vec<ScheduleSummary>> {
    let rows = Rows::read(text, path)?;
    let (hl, header) = &rows.header;
    let width = header.len();
    let runs_ok = width >= 4
        && header[..3] == ["n", "t0", "cool"]
        && header[width - 1] == "average"
        && header[3..width - 1]
            .iter()
            .enumerate()
            .all(|(i, h)| *h == format!("run_{}", i + 1));
    if !runs_ok {
        return Err(rows.err(*hl, "expected header `n,t0,cool,run_1..run_k,average`"));
    }
    rows.rows
        .iter()
        .map(|(line, row)| {
            rows.check_width(*line, row, width)?;
            Ok(ScheduleSummary {
                iters_per_temp: rows.num(*line, row[0], "n")?,
                t0: rows.num(*line, row[1], "t0")?,
                cool: rows.num(*line, row[2], "cool")?,
                results: row[3..width - 1]
                    .iter()
                    .map(|f| rows.num(*line, f, "objective"))
                    .collect::<Result<_>>()?,
                average: rows.num(*line, row[width - 1], "average")?,
            })
        })
        .collect()
}

pub fn write_comparison(rows: &[ComparisonRow], header: &str) -> String {
    let mut out = String::from(header);
    out.push_str("scenario,historical_mean,policy_mean,reduction_pct\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.scenario, r.historical_mean, r.policy_mean, r.reduction_pct
        );
    }
    out
}

pub fn read_comparison(text: &str, path: &str) -> Result<Vec<ComparisonRow>> {
    let rows = Rows::read(text, path)?;
    rows.expect_header(&[
        "scenario",
        "historical_mean",
        "policy_mean",
        "reduction_pct",
    ])?;
    rows.rows
        .iter()
        .map(|(line, row)| {
            rows.check_width(*line, row, 4)?;
            Ok(ComparisonRow {
                scenario: row[0].to_string(),
                historical_mean: rows.num(*line, row[1], "mean")?,
                policy_mean: rows.num(*line, row[2], "mean")?,
                reduction_pct: rows.num(*line, row[3], "percentage")?,
            })
        })
        .collect()
}

pub fn read_walk_series(text: &str, path: &str) -> Result<Vec<f64>> {
    let rows = Rows::read(text, path)?;
    rows.expect_header(&["step", "objective"])?;
    rows.rows
        .iter()
        .enumerate()
        .map(|(k, (line, row))| {
            rows.check_width(*line, row, 2)?;
            let step: usize = rows.num(*line, row[0], "step")?;
            if step != k {
                return Err(rows.err(*line, format!("expected step {k}, got {step}")));
            }
            rows.num(*line, row[1], "objective")
        })
        .collect()
}

pub fn read_thresholds(text: &str, path: &str) -> Result<Thresholds> {
    let rows = Rows::read(text, path)?;
    rows.expect_header(&["part", "other_wear", "threshold", "kind"])?;
    let mut out = Thresholds {
        part1: Vec::new(),
        part2: Vec::new(),
    };
    for (line, row) in &rows.rows {
        rows.check_width(*line, row, 4)?;
        let list = match row[0] {
            "1" => &mut out.part1,
            "2" => &mut out.part2,
            other => return Err(rows.err(*line, format!("invalid part `{other}`"))),
        };
        let k: usize = rows.num(*line, row[1], "wear")?;
        if k != list.len() {
            return Err(rows.err(
                *line,
                format!("expected other_wear {}, got {k}", list.len()),
            ));
        }
        let kind = match row[3] {
            "single" => ThresholdKind::Single,
            "joint" => ThresholdKind::Joint,
            other => return Err(rows.err(*line, format!("invalid kind `{other}`"))),
        };
        list.push(Threshold {
            at: rows.num(*line, row[2], "threshold")?,
            kind,
        });
    }
    Ok(out)
}

/// Heatmap colours, one per action code.
pub const ACTION_COLOURS: [[u8; 3]; 4] = [
    [0, 0, 255],   // proceed: blue
    [255, 0, 0],   // replace part 1: red
    [0, 160, 0],   // replace part 2: green
    [128, 0, 128], // replace both: purple
];

/// Binary PPM, one pixel per state; rows are part-1 wear, columns part-2 wear.
pub fn policy_heatmap_ppm(p: &PolicyGrid) -> Vec<u8> {
    let l = p.limits();
    let mut out = format!("P6\n{} {}\n255\n", l.l2 + 1, l.l1 + 1).into_bytes();
    for (_, _, a) in p.iter() {
        out.extend_from_slice(&ACTION_COLOURS[a.code() as usize]);
    }
    out
}

pub fn heatmap_legend() -> String {
    let mut out = String::from(
        "policy heatmap: one pixel per wear state\nrows: part 1 wear (top = 0)\ncolumns: part 2 wear (left = 0)\n",
    );
    for a in Action::ALL {
        let [r, g, b] = ACTION_COLOURS[a.code() as usize];
        let _ = writeln!(out, "{} {}: rgb({r},{g},{b})", a.code(), a.name());
    }
    out
}

/// Decodes a PPM written by [`policy_heatmap_ppm`] back into a policy grid.
pub fn read_policy_heatmap(bytes: &[u8]) -> Result<PolicyGrid> {
    let bad = |m: &str| Error::Parse {
        path: "<ppm>".into(),
        line: 0,
        message: m.into(),
    };
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header"))?);
    }
    pos += 1;
    if fields[0] != "P6" || fields[3] != "255" {
        return Err(bad("not an 8-bit P6 image"));
    }
    let w: u32 = fields[1].parse().map_err(|_| bad("width"))?;
    let h: u32 = fields[2].parse().map_err(|_| bad("height"))?;
    if w == 0 || h == 0 {
        return Err(bad("empty image"));
    }
    let limits = Limits {
        l1: h - 1,
        l2: w - 1,
    };
    let pixels = &bytes[pos..];
    if pixels.len() != (w * h * 3) as usize {
        return Err(bad("pixel data size mismatch"));
    }
    let cells = pixels
        .chunks(3)
        .map(|px| {
            ACTION_COLOURS
                .iter()
                .position(|c| c == px)
                .map(|k| Action::ALL[k])
                .ok_or_else(|| bad("unknown colour"))
        })
        .collect::<Result<Vec<_>>>()?;
    StateGrid::from_vec(limits, cells)
}
