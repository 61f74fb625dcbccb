//! Fitness-landscape diagnostics of the interval objective: amplitude,
//! hill-climbing walk length and lag-1 autocorrelation of a random walk.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::anneal::{neighbor, random_table};
use crate::domain::{GridShape, Matrix, RateTable, RATE_MAX};
use crate::error::{Error, Result};
use crate::sim::SseObjective;

/// Stream ids keep the three estimators' random sequences apart.
const POPULATION_STREAM: u64 = 1;
const WALK_STREAM: u64 = 2;
const CLIMB_STREAM_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeConfig {
    pub population: usize,
    pub walk_starts: usize,
    pub walk_steps: usize,
    pub seed: u64,
    pub shape: GridShape,
    pub rate_min: u32,
    pub rate_max: u32,
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        Self {
            population: 1000,
            walk_starts: 500,
            walk_steps: 1000,
            seed: 0,
            shape: GridShape::default(),
            rate_min: 1,
            rate_max: RATE_MAX,
        }
    }
}

impl LandscapeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.population == 0 {
            return bad("population must be at least 1");
        }
        if self.walk_starts == 0 {
            return bad("walk_starts must be at least 1");
        }
        if self.walk_steps < 3 {
            return bad("walk_steps must be at least 3");
        }
        if self.rate_min == 0 || self.rate_max < self.rate_min {
            return bad("rate bounds must satisfy 1 <= min <= max");
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// `|P| (max − min) / Σ f`.
pub fn amplitude(objectives: &[f64]) -> Result<f64> {
    if objectives.is_empty() {
        return Err(Error::ZeroMass);
    }
    let sum: f64 = objectives.iter().sum();
    if sum == 0.0 {
        return Err(Error::ZeroMass);
    }
    let (lo, hi) = objectives
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| {
            (lo.min(f), hi.max(f))
        });
    Ok(objectives.len() as f64 * (hi - lo) / sum)
}

/// Lag-1 autocorrelation of a series, normalised by its sample variance.
pub fn lag1_autocorrelation(series: &[f64]) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::InvalidConfig("need at least 3 observations".into()));
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let dev: Vec<f64> = series.iter().map(|f| f - mean).collect();
    let squares: f64 = dev.iter().map(|x| x * x).sum();
    if squares == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let lagged: f64 = dev.windows(2).map(|w| w[0] * w[1]).sum();
    Ok(lagged / squares)
}

pub fn sample_population(objective: &SseObjective, config: &LandscapeConfig) -> Vec<f64> {
    let mut rng = config.rng(POPULATION_STREAM);
    (0..config.population)
        .map(|_| {
            let t = random_table(config.shape, config.rate_min, config.rate_max, &mut rng);
            objective.evaluate(&t).sse
        })
        .collect()
}

/// Every single-cell ±1 move that stays inside `[lo, hi]`.
pub fn all_neighbors(rates: &RateTable, lo: u32, hi: u32) -> Vec<RateTable> {
    let mut out = Vec::new();
    for which in [Matrix::A, Matrix::B] {
        for i in 0..rates.rows() {
            for j in 0..rates.cols() {
                let v = rates.get(which, i, j);
                for next in [v.checked_sub(1), v.checked_add(1)].into_iter().flatten() {
                    if (lo..=hi).contains(&next) {
                        let mut t = rates.clone();
                        t.set(which, i, j, next).expect("bounded below by 1");
                        out.push(t);
                    }
                }
            }
        }
    }
    out
}

/// First-improvement descent; returns the number of improving moves taken.
pub fn hill_climb<F, R>(start: RateTable, lo: u32, hi: u32, f: F, rng: &mut R) -> usize
where
    F: Fn(&RateTable) -> f64,
    R: Rng + ?Sized,
{
    let mut current = start;
    let mut value = f(&current);
    let mut steps = 0;
    loop {
        let mut candidates = all_neighbors(&current, lo, hi);
        candidates.shuffle(rng);
        let improved = candidates.into_iter().find_map(|c| {
            let v = f(&c);
            (v < value).then_some((c, v))
        });
        match improved {
            Some((c, v)) => {
                current = c;
                value = v;
                steps += 1;
            }
            None => return steps,
        }
    }
}

/// Walk lengths from `walk_starts` random tables, one stream per start.
pub fn walk_lengths(objective: &SseObjective, config: &LandscapeConfig) -> Vec<usize> {
    (0..config.walk_starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = config.rng(CLIMB_STREAM_BASE + k as u64);
            let start = random_table(config.shape, config.rate_min, config.rate_max, &mut rng);
            hill_climb(
                start,
                config.rate_min,
                config.rate_max,
                |t| objective.evaluate(t).sse,
                &mut rng,
            )
        })
        .collect()
}

pub fn mean_walk_length(objective: &SseObjective, config: &LandscapeConfig) -> f64 {
    let lengths = walk_lengths(objective, config);
    lengths.iter().sum::<usize>() as f64 / lengths.len() as f64
}

/// Objective series along a random walk of `walk_steps` neighbour moves.
pub fn random_walk(objective: &SseObjective, config: &LandscapeConfig) -> Vec<f64> {
    let mut rng = config.rng(WALK_STREAM);
    let mut current = random_table(config.shape, config.rate_min, config.rate_max, &mut rng);
    let mut series = Vec::with_capacity(config.walk_steps);
    series.push(objective.evaluate(&current).sse);
    while series.len() < config.walk_steps {
        current = neighbor(&current, config.rate_min, config.rate_max, &mut rng);
        series.push(objective.evaluate(&current).sse);
    }
    series
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeReport {
    pub seed: u64,
    /// `None` when the population's objectives sum to zero.
    pub amplitude: Option<f64>,
    pub population: usize,
    pub mean_walk_length: f64,
    pub walk_starts: usize,
    /// `None` when the walk's objective never changed.
    pub r1: Option<f64>,
    pub walk_steps: usize,
    pub walk_series: Vec<f64>,
}

pub fn analyze(objective: &SseObjective, config: &LandscapeConfig) -> Result<LandscapeReport> {
    config.validate()?;
    let population = sample_population(objective, config);
    let amplitude = match amplitude(&population) {
        Ok(a) => Some(a),
        Err(Error::ZeroMass) => None,
        Err(e) => return Err(e),
    };
    let mean_walk_length = mean_walk_length(objective, config);
    let walk_series = random_walk(objective, config);
    let r1 = match lag1_autocorrelation(&walk_series) {
        Ok(r) => Some(r),
        Err(Error::ZeroVariance) => None,
        Err(e) => return Err(e),
    };
    Ok(LandscapeReport {
        seed: config.seed,
        amplitude,
        population: config.population,
        mean_walk_length,
        walk_starts: config.walk_starts,
        r1,
        walk_steps: config.walk_steps,
        walk_series,
    })
}

impl LandscapeReport {
    /// Flat `key = value` text; undefined estimates are written as notes.
    pub fn to_text(&self, header: &str) -> String {
        let mut out = String::from(header);
        let opt =
            |v: Option<f64>, why: &str| v.map_or(format!("undefined ({why})"), |x| x.to_string());
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "amplitude = {}", opt(self.amplitude, "zero mass"));
        let _ = writeln!(out, "amplitude_samples = {}", self.population);
        let _ = writeln!(out, "mean_walk_length = {}", self.mean_walk_length);
        let _ = writeln!(out, "walk_starts = {}", self.walk_starts);
        let _ = writeln!(out, "r1 = {}", opt(self.r1, "zero variance"));
        let _ = writeln!(out, "walk_steps = {}", self.walk_steps);
        out
    }

    pub fn series_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str("step,objective\n");
        for (k, f) in self.walk_series.iter().enumerate() {
            let _ = writeln!(out, "{k},{f}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::domain::{EventKind, FailureEvent, FailureHistory, Limits};
    use proptest::prelude::*;
    use std::collections::HashMap;

    #[test]
    fn amplitude_examples() {
        assert_eq!(amplitude(&[1.0, 3.0]).unwrap(), 1.0);
        assert_eq!(amplitude(&[4.0, 4.0, 4.0]).unwrap(), 0.0);
        assert_eq!(amplitude(&[0.0, 0.0]), Err(Error::ZeroMass));
        assert_eq!(amplitude(&[]), Err(Error::ZeroMass));
    }

    #[test]
    fn autocorrelation_examples() {
        let linear: Vec<f64> = (1..=10).map(f64::from).collect();
        assert!(lag1_autocorrelation(&linear).unwrap() > 0.5);
        let alternating: Vec<f64> = (0..10).map(|k| f64::from(1 + k % 2)).collect();
        assert!(lag1_autocorrelation(&alternating).unwrap() < 0.0);
        assert_eq!(lag1_autocorrelation(&[2.0; 5]), Err(Error::ZeroVariance));
    }

    fn flat_objective() -> SseObjective {
        // no table can reach the limit before the simulation cap
        let h = FailureHistory::new(vec![FailureEvent::new(10, EventKind::Both)]).unwrap();
        SseObjective::new(&h, Limits::new(100_000, 100_000).unwrap()).unwrap()
    }

    #[test]
    fn flat_landscape_has_no_walks() {
        let config = LandscapeConfig {
            population: 20,
            walk_starts: 10,
            walk_steps: 20,
            ..Default::default()
        };
        let report = analyze(&flat_objective(), &config).unwrap();
        assert_eq!(report.mean_walk_length, 0.0);
        assert_eq!(report.r1, None);
        assert_eq!(report.amplitude, Some(0.0));
        assert!(report
            .to_text("")
            .contains("r1 = undefined (zero variance)"));
    }

    /// Expected first-improvement walk length: the first improving neighbour
    /// in a random order is uniform over the improving neighbours.
    fn expected_walk(
        t: &RateTable,
        lo: u32,
        hi: u32,
        f: &dyn Fn(&RateTable) -> f64,
        memo: &mut HashMap<RateTable, f64>,
    ) -> f64 {
        if let Some(&v) = memo.get(t) {
            return v;
        }
        let here = f(t);
        let better: Vec<RateTable> = all_neighbors(t, lo, hi)
            .into_iter()
            .filter(|n| f(n) < here)
            .collect();
        let v = if better.is_empty() {
            0.0
        } else {
            1.0 + better
                .iter()
                .map(|n| expected_walk(n, lo, hi, f, memo))
                .sum::<f64>()
                / better.len() as f64
        };
        memo.insert(t.clone(), v);
        v
    }

    #[test]
    fn walk_length_matches_enumeration_on_tiny_space() {
        let shape = GridShape::new(9, 1, 1).unwrap();
        let objective =
            SseObjective::new(&datasets::example2_history(), datasets::EXAMPLE_LIMITS).unwrap();
        let f = |t: &RateTable| objective.evaluate(t).sse;
        let (lo, hi) = (1, 12);
        let mut memo = HashMap::new();
        let space: Vec<RateTable> = (lo..=hi)
            .flat_map(|a| (lo..=hi).map(move |b| RateTable::uniform(shape, a, b).unwrap()))
            .collect();
        let exact: f64 = space
            .iter()
            .map(|t| expected_walk(t, lo, hi, &f, &mut memo))
            .sum::<f64>()
            / space.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let reps = 200;
        let mut total = 0;
        for t in &space {
            for _ in 0..reps {
                total += hill_climb(t.clone(), lo, hi, f, &mut rng);
            }
        }
        let observed = total as f64 / (space.len() * reps) as f64;
        assert!(
            (observed - exact).abs() < 0.05,
            "observed {observed}, exact {exact}"
        );
    }

    #[test]
    fn planted_optimum_two_point_walks() {
        let shape = GridShape::new(9, 1, 1).unwrap();
        let target = RateTable::uniform(shape, 2, 1).unwrap();
        let f = |t: &RateTable| {
            let (a, b) = (t.get(Matrix::A, 0, 0), t.get(Matrix::B, 0, 0));
            f64::from(a.abs_diff(2) + b.abs_diff(1))
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for a in 1..=2 {
            for b in 1..=2 {
                let start = RateTable::uniform(shape, a, b).unwrap();
                assert!(hill_climb(start, 1, 2, f, &mut rng) <= 2);
            }
        }
        assert_eq!(hill_climb(target, 1, 2, f, &mut rng), 0);
    }

    #[test]
    fn analysis_is_reproducible() {
        let objective =
            SseObjective::new(&datasets::example2_history(), datasets::EXAMPLE_LIMITS).unwrap();
        let config = LandscapeConfig {
            population: 50,
            walk_starts: 8,
            walk_steps: 50,
            seed: 7,
            ..Default::default()
        };
        let a = analyze(&objective, &config).unwrap();
        assert_eq!(a, analyze(&objective, &config).unwrap());
        assert_eq!(a.walk_series.len(), 50);
        assert_eq!(a.series_csv("").lines().count(), 51);
    }

    proptest! {
        #[test]
        fn amplitude_is_scale_and_order_invariant(mut xs in prop::collection::vec(0.1f64..1e4, 1..40), lambda in 0.01f64..100.0) {
            let a = amplitude(&xs).unwrap();
            prop_assert!(a >= 0.0);
            let scaled: Vec<f64> = xs.iter().map(|x| x * lambda).collect();
            prop_assert!((amplitude(&scaled).unwrap() - a).abs() < 1e-9 * (1.0 + a));
            xs.reverse();
            prop_assert!((amplitude(&xs).unwrap() - a).abs() < 1e-9 * (1.0 + a));
        }

        #[test]
        fn r1_is_bounded(xs in prop::collection::vec(-1e3f64..1e3, 3..60)) {
            match lag1_autocorrelation(&xs) {
                Ok(r) => prop_assert!((-1.0..=1.0).contains(&r)),
                Err(e) => prop_assert_eq!(e, Error::ZeroVariance),
            }
        }
    }
}
