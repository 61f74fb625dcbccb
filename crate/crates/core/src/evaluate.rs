//! Undiscounted cost of replacement records and policies, and the percent
//! reduction of one over the other.

use std::collections::HashMap;

use crate::domain::{CostModel, EventKind, FailureHistory, RateTable, WearState};
use crate::dp::{Action, PolicyGrid};
use crate::error::{Error, Result};
use crate::sim::step_day;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReplacementCounts {
    pub part1: usize,
    pub part2: usize,
    pub both: usize,
}

impl ReplacementCounts {
    fn record(&mut self, kind: EventKind) {
        match kind {
            EventKind::Part1 => self.part1 += 1,
            EventKind::Part2 => self.part2 += 1,
            EventKind::Both => self.both += 1,
        }
    }

    pub fn cost(&self, costs: CostModel) -> f64 {
        self.part1 as f64 * costs.c1 + self.part2 as f64 * costs.c2 + self.both as f64 * costs.v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    pub mean_cost_per_day: f64,
    pub total_cost: f64,
    pub horizon_days: u32,
    pub replacements: ReplacementCounts,
}

impl CostReport {
    fn from_counts(counts: ReplacementCounts, costs: CostModel, horizon: u32) -> Self {
        let total = counts.cost(costs);
        Self {
            mean_cost_per_day: total / f64::from(horizon),
            total_cost: total,
            horizon_days: horizon,
            replacements: counts,
        }
    }
}

fn event_of(action: Action) -> Option<EventKind> {
    EventKind::from_flags(action.replaces_part1(), action.replaces_part2())
}

/// Total event cost over the history's horizon.
pub fn historical_cost(history: &FailureHistory, costs: CostModel) -> Result<CostReport> {
    if history.is_empty() || history.horizon() == 0 {
        return Err(Error::InvalidHistory("history is empty".into()));
    }
    let mut counts = ReplacementCounts::default();
    for e in history.events() {
        counts.record(e.which);
    }
    Ok(CostReport::from_counts(counts, costs, history.horizon()))
}

/// Rejects policies that would let a part run past its limit.
pub fn check_admissible(policy: &PolicyGrid) -> Result<()> {
    let limits = policy.limits();
    match policy
        .iter()
        .find(|&(d1, d2, a)| !a.admissible(d1, d2, limits))
    {
        Some((d1, d2, a)) => Err(Error::StructureViolation(format!(
            "action {a} is not allowed at ({d1},{d2})"
        ))),
        None => Ok(()),
    }
}

/// Each day: act on the current (capped) state, pay, reset, then wear.
fn day(policy: &PolicyGrid, rates: &RateTable, state: WearState) -> (Action, WearState) {
    let action = policy.action_at(state.capped(policy.limits()));
    (action, step_day(action.apply(state), rates))
}

/// Runs the policy for `horizon` days from two fresh parts.
pub fn policy_cost(
    policy: &PolicyGrid,
    rates: &RateTable,
    costs: CostModel,
    horizon: u32,
) -> Result<CostReport> {
    if horizon == 0 {
        return Err(Error::InvalidConfig(
            "horizon must be at least 1 day".into(),
        ));
    }
    check_admissible(policy)?;
    let mut counts = ReplacementCounts::default();
    let mut state = WearState::fresh();
    for _ in 0..horizon {
        let (action, next) = day(policy, rates, state);
        if let Some(kind) = event_of(action) {
            counts.record(kind);
        }
        state = next;
    }
    Ok(CostReport::from_counts(counts, costs, horizon))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleCost {
    /// First day (0-based) of the repeating segment.
    pub start: u32,
    pub length: u32,
    pub mean_cost_per_day: f64,
}

/// Exact long-run mean cost of the deterministic trajectory.
pub fn cycle_average_cost(
    policy: &PolicyGrid,
    rates: &RateTable,
    costs: CostModel,
) -> Result<CycleCost> {
    check_admissible(policy)?;
    let mut seen: HashMap<WearState, u32> = HashMap::new();
    let mut daily = Vec::new();
    let mut state = WearState::fresh();
    for t in 0u32.. {
        if let Some(&start) = seen.get(&state) {
            let cycle = &daily[start as usize..];
            let total: f64 = cycle.iter().sum();
            let length = t - start;
            return Ok(CycleCost {
                start,
                length,
                mean_cost_per_day: total / f64::from(length),
            });
        }
        seen.insert(state, t);
        let (action, next) = day(policy, rates, state);
        daily.push(event_of(action).map_or(0.0, |k| match k {
            EventKind::Part1 => costs.c1,
            EventKind::Part2 => costs.c2,
            EventKind::Both => costs.v,
        }));
        state = next;
    }
    unreachable!("wear states after an admissible action are bounded")
}

/// Percent reduction of `optimal` relative to `historical`.
pub fn compare(optimal: &CostReport, historical: &CostReport) -> Result<f64> {
    reduction_pct(optimal.mean_cost_per_day, historical.mean_cost_per_day)
}

pub fn reduction_pct(optimal_mean: f64, historical_mean: f64) -> Result<f64> {
    if historical_mean == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok(100.0 * (historical_mean - optimal_mean) / historical_mean)
}

/// One line of the comparison summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub scenario: String,
    pub historical_mean: f64,
    pub policy_mean: f64,
    pub reduction_pct: f64,
}

impl ComparisonRow {
    pub fn new(
        scenario: impl Into<String>,
        optimal: &CostReport,
        historical: &CostReport,
    ) -> Result<Self> {
        Ok(Self {
            scenario: scenario.into(),
            historical_mean: historical.mean_cost_per_day,
            policy_mean: optimal.mean_cost_per_day,
            reduction_pct: compare(optimal, historical)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::domain::{GridShape, Limits};
    use crate::dp::{extract_policy, value_iteration};
    use crate::sim::{simulate_limit_policy, StopCondition};
    use proptest::prelude::*;

    fn optimal(rates: &RateTable, costs: CostModel, limits: Limits) -> PolicyGrid {
        let sol = value_iteration(rates, costs, limits, costs.default_tolerance()).unwrap();
        extract_policy(&sol.values, rates, costs, limits)
    }

    #[test]
    fn historical_example_totals() {
        let r = historical_cost(&datasets::example1_history(), datasets::EXAMPLE1_COSTS).unwrap();
        assert_eq!(r.total_cost, 6160.0);
        assert_eq!(r.horizon_days, 550);
        assert!((r.mean_cost_per_day - 11.2).abs() < 1e-12);

        let r = historical_cost(&datasets::example2_history(), datasets::EXAMPLE2_COSTS).unwrap();
        assert_eq!(
            r.replacements,
            ReplacementCounts {
                part1: 7,
                part2: 6,
                both: 1
            }
        );
        assert_eq!(r.total_cost, 2900.0);
        assert!((r.mean_cost_per_day - 2900.0 / 114.0).abs() < 1e-12);

        let zero = CostModel {
            c1: 0.0,
            c2: 0.0,
            v: 0.0,
            alpha: 0.9,
        };
        let r = historical_cost(&datasets::example1_history(), zero).unwrap();
        assert_eq!(r.total_cost, 0.0);
        assert!(historical_cost(&FailureHistory::new(vec![]).unwrap(), zero).is_err());
    }

    #[test]
    fn compare_arithmetic() {
        assert_eq!(reduction_pct(10.0, 10.0).unwrap(), 0.0);
        assert_eq!(reduction_pct(8.0, 10.0).unwrap(), 20.0);
        assert_eq!(reduction_pct(1.0, 0.0), Err(Error::DivisionByZero));
    }

    #[test]
    fn limit_policy_matches_simulation() {
        for (rates, costs) in [
            (datasets::example1_rates(), datasets::EXAMPLE1_COSTS),
            (datasets::example2_rates(), datasets::EXAMPLE2_COSTS),
        ] {
            let limits = datasets::EXAMPLE_LIMITS;
            let horizon = 777;
            let report =
                policy_cost(&PolicyGrid::limit_policy(limits), &rates, costs, horizon).unwrap();
            // an event at the end of day t is paid on the morning of day t + 1
            let sim =
                simulate_limit_policy(&rates, limits, StopCondition::Days(horizon - 1), false)
                    .unwrap();
            let expected = historical_cost(&sim.history, costs).unwrap();
            assert_eq!(report.replacements, expected.replacements);
            assert_eq!(report.total_cost, expected.total_cost);
        }
    }

    #[test]
    fn example_reductions() {
        let limits = datasets::EXAMPLE_LIMITS;
        let cases = [
            (
                datasets::example1_rates(),
                datasets::EXAMPLE1_COSTS,
                datasets::example1_history(),
                10.0,
            ),
            (
                datasets::example2_rates(),
                datasets::EXAMPLE2_COSTS,
                datasets::example2_history(),
                20.0,
            ),
        ];
        for (rates, costs, history, floor) in cases {
            let hist = historical_cost(&history, costs).unwrap();
            let opt = policy_cost(&optimal(&rates, costs, limits), &rates, costs, 10_000).unwrap();
            let pct = compare(&opt, &hist).unwrap();
            assert!(pct >= floor, "reduction {pct} below {floor}");
        }
    }

    #[test]
    fn mean_over_long_horizon_tracks_cycle_average() {
        let limits = datasets::EXAMPLE_LIMITS;
        for (rates, costs) in [
            (datasets::example1_rates(), datasets::EXAMPLE1_COSTS),
            (
                datasets::example2_rates(),
                datasets::EXAMPLE2_COSTS_SHARED_SETUP,
            ),
        ] {
            let policy = optimal(&rates, costs, limits);
            let cycle = cycle_average_cost(&policy, &rates, costs).unwrap();
            assert!(cycle.start + cycle.length <= (limits.l1 + 1) * (limits.l2 + 1));
            let horizon = (10 * cycle.length).max(cycle.start + 10 * cycle.length);
            let r = policy_cost(&policy, &rates, costs, horizon).unwrap();
            let rel =
                (r.mean_cost_per_day - cycle.mean_cost_per_day).abs() / cycle.mean_cost_per_day;
            assert!(rel < 0.05, "relative gap {rel}");
        }
    }

    #[test]
    fn inadmissible_policy_rejected() {
        let limits = Limits::new(5, 5).unwrap();
        let policy = PolicyGrid::filled(limits, Action::Proceed);
        let rates = RateTable::uniform(GridShape::new(3, 2, 2).unwrap(), 1, 1).unwrap();
        assert!(matches!(
            policy_cost(&policy, &rates, datasets::EXAMPLE1_COSTS, 10),
            Err(Error::StructureViolation(_))
        ));
    }

    fn small_instance() -> impl Strategy<Value = (RateTable, CostModel, Limits)> {
        (
            2u32..4,
            1usize..3,
            1usize..3,
            any::<u64>(),
            1.0f64..50.0,
            1.0f64..50.0,
            0.3f64..1.3,
            0.3f64..0.95,
        )
            .prop_map(|(w, rows, cols, seed, c1, c2, share, alpha)| {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let shape = GridShape::new(w, rows, cols).unwrap();
                let a = (0..shape.cells())
                    .map(|_| rng.random_range(1..=3))
                    .collect();
                let b = (0..shape.cells())
                    .map(|_| rng.random_range(1..=3))
                    .collect();
                let rates = RateTable::new(shape, a, b).unwrap();
                let limits = Limits::new(w * rows as u32 - 1, w * cols as u32 - 1)
                    .unwrap_or(Limits::new(2, 2).unwrap());
                let v = share * (c1 + c2);
                (rates, CostModel::new(c1, c2, v, alpha).unwrap(), limits)
            })
    }

    proptest! {
        #[test]
        fn compare_is_scale_invariant(opt in 0.0f64..100.0, hist in 0.1f64..100.0, lambda in 0.01f64..100.0) {
            let a = reduction_pct(opt, hist).unwrap();
            let b = reduction_pct(opt * lambda, hist * lambda).unwrap();
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }

        #[test]
        fn cycles_are_short_and_exact((rates, costs, limits) in small_instance()) {
            let policy = optimal(&rates, costs, limits);
            let cycle = cycle_average_cost(&policy, &rates, costs).unwrap();
            prop_assert!(cycle.start + cycle.length <= (limits.l1 + 1) * (limits.l2 + 1));
            let total = policy_cost(&policy, &rates, costs, cycle.start + cycle.length).unwrap().total_cost
                - if cycle.start == 0 { 0.0 } else {
                    policy_cost(&policy, &rates, costs, cycle.start).unwrap().total_cost
                };
            prop_assert!((total / f64::from(cycle.length) - cycle.mean_cost_per_day).abs() < 1e-9);
        }
    }
}
