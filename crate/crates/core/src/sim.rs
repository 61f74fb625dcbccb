//! Deterministic day-by-day wear simulation under the limit-replacement
//! regime, and the squared-deviation objective that compares a simulated
//! replacement record with a historical one.

use crate::domain::{
    EventKind, FailureEvent, FailureHistory, Limits, Part, RateTable, WearState, FRESH_WEAR,
};
use crate::error::{Error, Result};

/// Multiple of the historical horizon after which a simulation gives up.
pub const CAP_FACTOR: u32 = 10;

/// Advances one day. Increments are read from the start-of-day state.
#[inline]
pub fn step_day(state: WearState, rates: &RateTable) -> WearState {
    let (a, b) = rates.rate_lookup(state);
    WearState::new(state.d1 + a, state.d2 + b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCondition {
    /// Run exactly this many days.
    Days(u32),
    /// Run until each part has at least the given number of replacements,
    /// failing once `max_days` have elapsed.
    Counts { n1: usize, n2: usize, max_days: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryPoint {
    pub day: u32,
    /// End-of-day wear, before any replacement that day.
    pub d1: u32,
    pub d2: u32,
    pub event: Option<EventKind>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutcome {
    pub history: FailureHistory,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

/// Simulates the limit-replacement policy from two fresh parts.
///
/// At the end of each day any part at or over its limit is replaced and its
/// wear returns to [`FRESH_WEAR`]. A simultaneous crossing is one joint event.
pub fn simulate_limit_policy(
    rates: &RateTable,
    limits: Limits,
    stop: StopCondition,
    record_trajectory: bool,
) -> Result<SimOutcome> {
    let max_days = match stop {
        StopCondition::Days(d) => d,
        StopCondition::Counts { max_days, .. } => max_days,
    };
    let mut state = WearState::fresh();
    let mut events = Vec::new();
    let mut trajectory = record_trajectory.then(Vec::new);
    let (mut n1, mut n2) = (0usize, 0usize);

    let done = |n1: usize, n2: usize| match stop {
        StopCondition::Days(_) => false,
        StopCondition::Counts { n1: t1, n2: t2, .. } => n1 >= t1 && n2 >= t2,
    };

    let mut day = 0;
    while !done(n1, n2) && day < max_days {
        day += 1;
        state = step_day(state, rates);
        let hit1 = state.d1 >= limits.l1;
        let hit2 = state.d2 >= limits.l2;
        let event = EventKind::from_flags(hit1, hit2);
        if let Some(t) = trajectory.as_mut() {
            t.push(TrajectoryPoint {
                day,
                d1: state.d1,
                d2: state.d2,
                event,
            });
        }
        if let Some(which) = event {
            events.push(FailureEvent::new(day, which));
        }
        if hit1 {
            state.d1 = FRESH_WEAR;
            n1 += 1;
        }
        if hit2 {
            state.d2 = FRESH_WEAR;
            n2 += 1;
        }
    }

    if !done(n1, n2) && matches!(stop, StopCondition::Counts { .. }) {
        return Err(Error::NonTerminating { cap: max_days });
    }
    let horizon = match stop {
        StopCondition::Days(d) => d,
        StopCondition::Counts { .. } => day,
    };
    Ok(SimOutcome {
        history: FailureHistory::with_horizon(events, horizon)?,
        trajectory,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    /// Sum of squared interval deviations plus missing-event penalties.
    pub sse: f64,
    /// Number of historical events per part that the simulation reproduced.
    pub matched_events: (usize, usize),
    pub penalty_applied: bool,
    /// Same sum computed on absolute replacement times, for diagnostics.
    pub absolute_sse: f64,
}

/// Objective prepared once per history; evaluating it only runs the simulation.
#[derive(Debug, Clone)]
pub struct SseObjective {
    limits: Limits,
    times: [Vec<u32>; 2],
    intervals: [Vec<u32>; 2],
    penalty: f64,
    cap: u32,
}

impl SseObjective {
    pub fn new(history: &FailureHistory, limits: Limits) -> Result<Self> {
        if history.is_empty() {
            return Err(Error::InvalidHistory(
                "objective needs at least one event".into(),
            ));
        }
        let horizon = history.horizon();
        Ok(Self {
            limits,
            times: [history.times(Part::One), history.times(Part::Two)],
            intervals: [history.intervals(Part::One), history.intervals(Part::Two)],
            penalty: f64::from(horizon) * f64::from(horizon),
            cap: horizon.saturating_mul(CAP_FACTOR),
        })
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn target_counts(&self) -> (usize, usize) {
        (self.times[0].len(), self.times[1].len())
    }

    /// Penalty charged per historical event the simulation never produced.
    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn evaluate(&self, rates: &RateTable) -> ObjectiveValue {
        let (t1, t2) = self.target_counts();
        let mut sim: [Vec<u32>; 2] = [Vec::with_capacity(t1), Vec::with_capacity(t2)];
        let mut state = WearState::fresh();
        let mut day = 0;
        while (sim[0].len() < t1 || sim[1].len() < t2) && day < self.cap {
            day += 1;
            state = step_day(state, rates);
            if state.d1 >= self.limits.l1 {
                state.d1 = FRESH_WEAR;
                sim[0].push(day);
            }
            if state.d2 >= self.limits.l2 {
                state.d2 = FRESH_WEAR;
                sim[1].push(day);
            }
        }

        let mut sse = 0.0;
        let mut absolute = 0.0;
        let mut penalty_applied = false;
        let mut matched = [0usize; 2];
        for k in 0..2 {
            let mut prev = 0;
            for (n, (&hist_iv, &hist_t)) in self.intervals[k].iter().zip(&self.times[k]).enumerate()
            {
                match sim[k].get(n) {
                    Some(&t) => {
                        let eps = f64::from(t - prev) - f64::from(hist_iv);
                        sse += eps * eps;
                        let abs = f64::from(t) - f64::from(hist_t);
                        absolute += abs * abs;
                        prev = t;
                        matched[k] += 1;
                    }
                    None => {
                        sse += self.penalty;
                        absolute += self.penalty;
                        penalty_applied = true;
                    }
                }
            }
        }
        ObjectiveValue {
            sse,
            matched_events: (matched[0], matched[1]),
            penalty_applied,
            absolute_sse: absolute,
        }
    }
}

/// Squared deviation between simulated and historical inter-replacement
/// intervals, matching the nth replacement of each part in order.
pub fn sse_objective(
    rates: &RateTable,
    limits: Limits,
    history: &FailureHistory,
) -> Result<ObjectiveValue> {
    Ok(SseObjective::new(history, limits)?.evaluate(rates))
}
