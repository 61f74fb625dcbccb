//! Simulated annealing over rate tables, minimising the interval objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{FailureHistory, GridShape, Limits, Matrix, Part, RateTable, RATE_MAX};
use crate::error::{Error, Result};
use crate::sim::{ObjectiveValue, SseObjective};

/// Retries before a clamped move falls back to scanning for a legal one.
const NEIGHBOR_RETRIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaConfig {
    /// Target fraction of uphill moves accepted at the start.
    pub a0: f64,
    /// Geometric cooling factor; 1 keeps the temperature fixed.
    pub cool: f64,
    pub iters_per_temp: u32,
    pub total_iters: u32,
    pub init_temp_samples: u32,
    pub seed: u64,
    pub rate_min: u32,
    pub rate_max: u32,
    pub shape: GridShape,
    /// Skips temperature sampling when set.
    pub initial_temperature: Option<f64>,
    pub record_trace: bool,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            a0: 0.5,
            cool: 0.999,
            iters_per_temp: 20,
            total_iters: 30_000,
            init_temp_samples: 1000,
            seed: 0,
            rate_min: 1,
            rate_max: RATE_MAX,
            shape: GridShape::default(),
            initial_temperature: None,
            record_trace: true,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.a0 > 0.0 && self.a0 < 1.0) {
            return bad(format!("a0 must lie in (0, 1), got {}", self.a0));
        }
        if !(self.cool > 0.0 && self.cool <= 1.0) {
            return bad(format!("cool must lie in (0, 1], got {}", self.cool));
        }
        if self.iters_per_temp == 0 || self.total_iters < self.iters_per_temp {
            return bad(format!(
                "need total_iters >= iters_per_temp >= 1, got {} and {}",
                self.total_iters, self.iters_per_temp
            ));
        }
        if self.initial_temperature.is_none() && self.init_temp_samples < 2 {
            return bad("init_temp_samples must be at least 2".into());
        }
        if let Some(t) = self.initial_temperature {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("initial temperature must be positive, got {t}"));
            }
        }
        if self.rate_min == 0 || self.rate_max < self.rate_min {
            return bad(format!(
                "rate bounds must satisfy 1 <= min <= max, got [{}, {}]",
                self.rate_min, self.rate_max
            ));
        }
        Ok(())
    }
}

/// Constant table per part: `limit / mean interval`, rounded and clamped.
pub fn initial_solution(
    history: &FailureHistory,
    limits: Limits,
    shape: GridShape,
    rate_max: u32,
) -> Result<RateTable> {
    let rate = |part: Part| -> Result<u32> {
        let mean = history
            .mean_interval(part)
            .ok_or(Error::DegenerateHistory(part))?;
        let r = (f64::from(limits.of(part)) / mean).round();
        Ok((r as u32).clamp(1, rate_max.max(1)))
    };
    RateTable::uniform(shape, rate(Part::One)?, rate(Part::Two)?)
}

/// Copy of `rates` with one entry moved by ±1 inside `[lo, hi]`. Returns an
/// unchanged copy only when no legal move exists.
pub fn neighbor<R: Rng + ?Sized>(rates: &RateTable, lo: u32, hi: u32, rng: &mut R) -> RateTable {
    let mut out = rates.clone();
    let (rows, cols) = (rates.rows(), rates.cols());
    let moved = |v: u32, up: bool| {
        if up {
            v.checked_add(1)
        } else {
            v.checked_sub(1)
        }
    };
    let legal = |v: Option<u32>| v.filter(|x| (lo..=hi).contains(x));
    for _ in 0..NEIGHBOR_RETRIES {
        let which = if rng.random::<bool>() {
            Matrix::A
        } else {
            Matrix::B
        };
        let (i, j) = (rng.random_range(0..rows), rng.random_range(0..cols));
        let up = rng.random::<bool>();
        if let Some(v) = legal(moved(rates.get(which, i, j), up)) {
            out.set(which, i, j, v).expect("bounded below by 1");
            return out;
        }
    }
    for which in [Matrix::A, Matrix::B] {
        for i in 0..rows {
            for j in 0..cols {
                for up in [true, false] {
                    if let Some(v) = legal(moved(rates.get(which, i, j), up)) {
                        out.set(which, i, j, v).expect("bounded below by 1");
                        return out;
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureEstimate {
    pub t0: f64,
    /// Mean of the strictly positive objective changes.
    pub delta_plus: f64,
    /// Sampled moves that lowered the objective.
    pub m1: usize,
    /// Sampled moves that raised it.
    pub m2: usize,
    /// No sampled move raised the objective; `t0` is the fallback 1.
    pub flat: bool,
}

/// Starting temperature from sampled move statistics.
pub fn temperature_from_counts(
    delta_plus: f64,
    m1: usize,
    m2: usize,
    a0: f64,
) -> TemperatureEstimate {
    if m2 == 0 {
        return TemperatureEstimate {
            t0: 1.0,
            delta_plus,
            m1,
            m2,
            flat: true,
        };
    }
    let (m1f, m2f) = (m1 as f64, m2 as f64);
    let denom = m2f * a0 - m1f * (1.0 - a0);
    let t0 = if denom > 0.0 {
        delta_plus / (m2f / denom).ln()
    } else {
        delta_plus / (1.0 / a0).ln()
    };
    TemperatureEstimate {
        t0,
        delta_plus,
        m1,
        m2,
        flat: false,
    }
}

/// Table with independent uniform entries in `[lo, hi]`.
pub fn random_table<R: Rng + ?Sized>(shape: GridShape, lo: u32, hi: u32, rng: &mut R) -> RateTable {
    let mut draw = || {
        (0..shape.cells())
            .map(|_| rng.random_range(lo..=hi))
            .collect()
    };
    let a = draw();
    let b = draw();
    RateTable::new(shape, a, b).expect("entries drawn from [lo, hi] with lo >= 1")
}

/// Samples random tables and one neighbour each to size the first temperature.
pub fn initial_temperature<R: Rng + ?Sized>(
    objective: &SseObjective,
    config: &SaConfig,
    rng: &mut R,
) -> TemperatureEstimate {
    let (mut m1, mut m2, mut sum_plus) = (0usize, 0usize, 0.0);
    for _ in 0..config.init_temp_samples {
        let base = random_table(config.shape, config.rate_min, config.rate_max, rng);
        let next = neighbor(&base, config.rate_min, config.rate_max, rng);
        let delta = objective.evaluate(&next).sse - objective.evaluate(&base).sse;
        if delta > 0.0 {
            m2 += 1;
            sum_plus += delta;
        } else if delta < 0.0 {
            m1 += 1;
        }
    }
    let delta_plus = if m2 > 0 { sum_plus / m2 as f64 } else { 0.0 };
    temperature_from_counts(delta_plus, m1, m2, config.a0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: u32,
    pub temp: f64,
    /// Objective of the current state after the accept/reject decision.
    pub objective: f64,
    /// Objective of the proposed neighbour.
    pub proposed: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaRun {
    pub seed: u64,
    pub best: RateTable,
    pub best_objective: f64,
    pub best_value: ObjectiveValue,
    pub temperature: TemperatureEstimate,
    /// Row 0 is the starting table; empty unless `record_trace` is set.
    pub trace: Vec<TraceRow>,
    pub accepted: u32,
}

impl SaRun {
    pub fn initial_temperature(&self) -> f64 {
        self.temperature.t0
    }
}

/// One Metropolis annealing run, reproducible from `config.seed`.
pub fn anneal(history: &FailureHistory, limits: Limits, config: &SaConfig) -> Result<SaRun> {
    config.validate()?;
    let objective = SseObjective::new(history, limits)?;
    let start = initial_solution(history, limits, config.shape, config.rate_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let temperature = match config.initial_temperature {
        Some(t0) => TemperatureEstimate {
            t0,
            delta_plus: 0.0,
            m1: 0,
            m2: 0,
            flat: false,
        },
        None => initial_temperature(&objective, config, &mut rng),
    };

    let mut current = start;
    let mut current_value = objective.evaluate(&current);
    let mut best = current.clone();
    let mut best_value = current_value;
    let mut temp = temperature.t0;
    let mut accepted_count = 0;
    let mut trace = Vec::new();
    if config.record_trace {
        trace.reserve(config.total_iters as usize + 1);
        trace.push(TraceRow {
            iter: 0,
            temp,
            objective: current_value.sse,
            proposed: current_value.sse,
            accepted: true,
        });
    }

    for iter in 1..=config.total_iters {
        let candidate = neighbor(&current, config.rate_min, config.rate_max, &mut rng);
        let value = objective.evaluate(&candidate);
        let delta = value.sse - current_value.sse;
        let accepted = delta <= 0.0 || rng.random::<f64>() < (-delta / temp).exp();
        if accepted {
            accepted_count += 1;
            current = candidate;
            current_value = value;
            if current_value.sse < best_value.sse {
                best = current.clone();
                best_value = current_value;
            }
        }
        if config.record_trace {
            trace.push(TraceRow {
                iter,
                temp,
                objective: current_value.sse,
                proposed: value.sse,
                accepted,
            });
        }
        if iter % config.iters_per_temp == 0 {
            temp *= config.cool;
        }
    }

    Ok(SaRun {
        seed: config.seed,
        best,
        best_objective: best_value.sse,
        best_value,
        temperature,
        trace,
        accepted: accepted_count,
    })
}

/// Independent runs, one per seed, in parallel.
pub fn anneal_seeds(
    history: &FailureHistory,
    limits: Limits,
    config: &SaConfig,
    seeds: &[u64],
) -> Result<Vec<SaRun>> {
    seeds
        .par_iter()
        .map(|&seed| anneal(history, limits, &SaConfig { seed, ..*config }))
        .collect()
}

/// One row of a multi-seed summary: a schedule and its per-seed results.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSummary {
    pub iters_per_temp: u32,
    pub cool: f64,
    pub t0: f64,
    pub results: Vec<f64>,
    pub average: f64,
}

/// Runs every `(iters_per_temp, cool)` pair over all seeds, in parallel.
pub fn anneal_grid(
    history: &FailureHistory,
    limits: Limits,
    base: &SaConfig,
    iters_per_temp: &[u32],
    cools: &[f64],
    seeds: &[u64],
) -> Result<Vec<ScheduleSummary>> {
    let jobs: Vec<(u32, f64, u64)> = iters_per_temp
        .iter()
        .flat_map(|&n| {
            cools
                .iter()
                .flat_map(move |&c| seeds.iter().map(move |&s| (n, c, s)))
        })
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(n, cool, seed)| {
            let config = SaConfig {
                iters_per_temp: n,
                cool,
                seed,
                record_trace: false,
                ..*base
            };
            anneal(history, limits, &config).map(|r| (r.best_objective, r.temperature.t0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(runs
        .chunks(seeds.len().max(1))
        .zip(jobs.chunks(seeds.len().max(1)))
        .map(|(res, job)| {
            let results: Vec<f64> = res.iter().map(|r| r.0).collect();
            let k = results.len().max(1) as f64;
            ScheduleSummary {
                iters_per_temp: job[0].0,
                cool: job[0].1,
                t0: res.iter().map(|r| r.1).sum::<f64>() / k,
                average: results.iter().sum::<f64>() / k,
                results,
            }
        })
        .collect())
}
