//! Discounted-cost replacement MDP over capped wear states.
//!
//! Each day the operator may proceed, replace part 1, replace part 2 or
//! replace both; a replaced part restarts from [`FRESH_WEAR`] and then wears
//! for one day. States at a limit must replace that part. The value of a
//! state is
//!
//! ```text
//! u(s) = min { alpha u(next(s)),
//!              c1 + alpha u(next(fresh, d2)),
//!              c2 + alpha u(next(d1, fresh)),
//!              v  + alpha u(next(fresh, fresh)) }
//! ```
//!
//! restricted to the admissible actions, where `next` applies one day of
//! wear and caps each coordinate at its limit.

use std::fmt;

use crate::domain::{CostModel, Limits, RateTable, WearState, FRESH_WEAR};
use crate::error::{Error, Result};

/// Sweep budget for value iteration.
pub const MAX_SWEEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Action {
    Proceed = 0,
    Replace1 = 1,
    Replace2 = 2,
    ReplaceBoth = 3,
}

impl Action {
    /// Tie-break preference order.
    pub const ALL: [Action; 4] = [
        Action::Proceed,
        Action::Replace1,
        Action::Replace2,
        Action::ReplaceBoth,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn replaces_part1(self) -> bool {
        matches!(self, Action::Replace1 | Action::ReplaceBoth)
    }

    pub fn replaces_part2(self) -> bool {
        matches!(self, Action::Replace2 | Action::ReplaceBoth)
    }

    /// Whether the action may be taken in a capped state.
    pub fn admissible(self, d1: u32, d2: u32, limits: Limits) -> bool {
        let at1 = d1 >= limits.l1;
        let at2 = d2 >= limits.l2;
        match self {
            Action::Proceed => !at1 && !at2,
            Action::Replace1 => !at2,
            Action::Replace2 => !at1,
            Action::ReplaceBoth => true,
        }
    }

    /// Wear state right after the action, before the day's wear.
    pub fn apply(self, state: WearState) -> WearState {
        WearState::new(
            if self.replaces_part1() {
                FRESH_WEAR
            } else {
                state.d1
            },
            if self.replaces_part2() {
                FRESH_WEAR
            } else {
                state.d2
            },
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Proceed => "proceed",
            Action::Replace1 => "replace-1",
            Action::Replace2 => "replace-2",
            Action::ReplaceBoth => "replace-both",
        }
    }
}

impl Default for Action {
    fn default() -> Self {
        Action::Proceed
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dense grid over capped states `(d1, d2)`, `0 <= dk <= lk`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid<T> {
    limits: Limits,
    cells: Vec<T>,
}

impl<T: Copy> StateGrid<T> {
    pub fn filled(limits: Limits, value: T) -> Self {
        Self {
            limits,
            cells: vec![value; Self::size(limits)],
        }
    }

    pub fn from_vec(limits: Limits, cells: Vec<T>) -> Result<Self> {
        if cells.len() != Self::size(limits) {
            return Err(Error::InvalidConfig(format!(
                "grid for limits ({}, {}) needs {} cells, got {}",
                limits.l1,
                limits.l2,
                Self::size(limits),
                cells.len()
            )));
        }
        Ok(Self { limits, cells })
    }

    fn size(limits: Limits) -> usize {
        (limits.l1 as usize + 1) * (limits.l2 as usize + 1)
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    #[inline]
    pub fn index(&self, d1: u32, d2: u32) -> usize {
        d1 as usize * (self.limits.l2 as usize + 1) + d2 as usize
    }

    #[inline]
    pub fn get(&self, d1: u32, d2: u32) -> T {
        self.cells[self.index(d1, d2)]
    }

    pub fn set(&mut self, d1: u32, d2: u32, value: T) {
        let i = self.index(d1, d2);
        self.cells[i] = value;
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    /// `(d1, d2, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, T)> + '_ {
        let cols = self.limits.l2 + 1;
        self.cells
            .iter()
            .enumerate()
            .map(move |(k, &v)| (k as u32 / cols, k as u32 % cols, v))
    }
}

pub type ValueFunction = StateGrid<f64>;
pub type PolicyGrid = StateGrid<Action>;

impl PolicyGrid {
    /// Replace each part exactly when it reaches its limit.
    pub fn limit_policy(limits: Limits) -> Self {
        let mut p = Self::filled(limits, Action::Proceed);
        for d1 in 0..=limits.l1 {
            for d2 in 0..=limits.l2 {
                let a = match (d1 >= limits.l1, d2 >= limits.l2) {
                    (true, true) => Action::ReplaceBoth,
                    (true, false) => Action::Replace1,
                    (false, true) => Action::Replace2,
                    (false, false) => Action::Proceed,
                };
                p.set(d1, d2, a);
            }
        }
        p
    }

    pub fn action_at(&self, state: WearState) -> Action {
        let s = state.capped(self.limits);
        self.get(s.d1, s.d2)
    }

    pub fn count(&self, action: Action) -> usize {
        self.cells.iter().filter(|&&a| a == action).count()
    }
}

/// Precomputed deterministic transitions of the replacement MDP.
#[derive(Debug, Clone)]
pub struct ReplacementMdp {
    limits: Limits,
    costs: CostModel,
    /// Successor index after proceeding from each state.
    next: Vec<usize>,
    /// Successor after replacing part 1, by d2.
    next_fresh1: Vec<usize>,
    /// Successor after replacing part 2, by d1.
    next_fresh2: Vec<usize>,
    next_fresh_both: usize,
}

impl ReplacementMdp {
    pub fn new(rates: &RateTable, costs: CostModel, limits: Limits) -> Self {
        let grid = StateGrid::filled(limits, ());
        let succ = |s: WearState| {
            let (a, b) = rates.rate_lookup(s);
            grid.index((s.d1 + a).min(limits.l1), (s.d2 + b).min(limits.l2))
        };
        let next = grid
            .iter()
            .map(|(d1, d2, _)| succ(WearState::new(d1, d2)))
            .collect();
        let next_fresh1 = (0..=limits.l2)
            .map(|d2| succ(WearState::new(FRESH_WEAR, d2)))
            .collect();
        let next_fresh2 = (0..=limits.l1)
            .map(|d1| succ(WearState::new(d1, FRESH_WEAR)))
            .collect();
        Self {
            limits,
            costs,
            next,
            next_fresh1,
            next_fresh2,
            next_fresh_both: succ(WearState::fresh()),
        }
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn costs(&self) -> CostModel {
        self.costs
    }

    /// State index reached at the end of the day after taking `action`.
    pub fn successor(&self, d1: u32, d2: u32, action: Action) -> usize {
        match action {
            Action::Proceed => self.next[d1 as usize * (self.limits.l2 as usize + 1) + d2 as usize],
            Action::Replace1 => self.next_fresh1[d2 as usize],
            Action::Replace2 => self.next_fresh2[d1 as usize],
            Action::ReplaceBoth => self.next_fresh_both,
        }
    }

    pub fn immediate_cost(&self, action: Action) -> f64 {
        match action {
            Action::Proceed => 0.0,
            Action::Replace1 => self.costs.c1,
            Action::Replace2 => self.costs.c2,
            Action::ReplaceBoth => self.costs.v,
        }
    }

    /// Cost of each action in `(d1, d2)`; inadmissible actions are infinite.
    #[inline]
    pub fn action_costs(&self, u: &[f64], d1: u32, d2: u32) -> [f64; 4] {
        let alpha = self.costs.alpha;
        Action::ALL.map(|a| {
            if a.admissible(d1, d2, self.limits) {
                self.immediate_cost(a) + alpha * u[self.successor(d1, d2, a)]
            } else {
                f64::INFINITY
            }
        })
    }

    fn backup_into(&self, u: &[f64], out: &mut [f64]) {
        let cols = self.limits.l2 + 1;
        for (k, slot) in out.iter_mut().enumerate() {
            let (d1, d2) = (k as u32 / cols, k as u32 % cols);
            *slot = self
                .action_costs(u, d1, d2)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
        }
    }

    pub fn backup(&self, u: &ValueFunction) -> ValueFunction {
        let mut out = vec![0.0; u.cells().len()];
        self.backup_into(u.cells(), &mut out);
        StateGrid {
            limits: self.limits,
            cells: out,
        }
    }

    /// Argmin action per state, preferring earlier actions in [`Action::ALL`]
    /// on exact ties.
    pub fn greedy_policy(&self, u: &ValueFunction) -> PolicyGrid {
        let cells = u
            .iter()
            .map(|(d1, d2, _)| {
                let q = self.action_costs(u.cells(), d1, d2);
                let mut best = 0;
                for k in 1..4 {
                    if q[k] < q[best] {
                        best = k;
                    }
                }
                Action::ALL[best]
            })
            .collect();
        StateGrid {
            limits: self.limits,
            cells,
        }
    }
}

/// One Bellman backup of `u`.
pub fn bellman_backup(
    u: &ValueFunction,
    rates: &RateTable,
    costs: CostModel,
    limits: Limits,
) -> ValueFunction {
    ReplacementMdp::new(rates, costs, limits).backup(u)
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub values: ValueFunction,
    pub iterations: usize,
    /// Sup-norm difference between successive sweeps.
    pub residuals: Vec<f64>,
}

/// Value iteration from `u = 0` until successive sweeps differ by less
/// than `tol` in the sup norm.
pub fn value_iteration(
    rates: &RateTable,
    costs: CostModel,
    limits: Limits,
    tol: f64,
) -> Result<Solution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mdp = ReplacementMdp::new(rates, costs, limits);
    let mut u = vec![0.0; mdp.next.len()];
    let mut next = vec![0.0; u.len()];
    let mut residuals = Vec::new();
    loop {
        mdp.backup_into(&u, &mut next);
        let residual = u
            .iter()
            .zip(&next)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        residuals.push(residual);
        std::mem::swap(&mut u, &mut next);
        if residual < tol {
            break;
        }
        if residuals.len() >= MAX_SWEEPS {
            return Err(Error::IterationCap {
                cap: MAX_SWEEPS,
                residual,
            });
        }
    }
    Ok(Solution {
        values: StateGrid { limits, cells: u },
        iterations: residuals.len(),
        residuals,
    })
}

pub fn extract_policy(
    u: &ValueFunction,
    rates: &RateTable,
    costs: CostModel,
    limits: Limits,
) -> PolicyGrid {
    ReplacementMdp::new(rates, costs, limits).greedy_policy(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdKind {
    /// The part is replaced on its own at the threshold.
    Single,
    /// Both parts are replaced at the threshold.
    Joint,
}

impl ThresholdKind {
    pub fn label(self) -> &'static str {
        match self {
            ThresholdKind::Single => "single",
            ThresholdKind::Joint => "joint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Threshold {
    pub at: u32,
    pub kind: ThresholdKind,
}

/// Replacement limits of each part as a function of the other part's wear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thresholds {
    /// Smallest `d1` at which part 1 is replaced, for each `d2`.
    pub part1: Vec<Threshold>,
    /// Smallest `d2` at which part 2 is replaced, for each `d1`.
    pub part2: Vec<Threshold>,
}

/// Reads the replacement limits off a threshold-shaped policy.
pub fn thresholds(policy: &PolicyGrid) -> Result<Thresholds> {
    let limits = policy.limits();
    let scan = |len: u32, at: &dyn Fn(u32) -> Action, replaces: fn(Action) -> bool, label: &str| {
        let first = (0..=len).find(|&k| replaces(at(k))).ok_or_else(|| {
            Error::StructureViolation(format!("{label}: no replacement up to the limit"))
        })?;
        if let Some(k) = (first + 1..=len).find(|&k| !replaces(at(k))) {
            return Err(Error::StructureViolation(format!(
                "{label}: replacement at {first} but {} at {k}",
                at(k)
            )));
        }
        let kind = if at(first) == Action::ReplaceBoth {
            ThresholdKind::Joint
        } else {
            ThresholdKind::Single
        };
        Ok(Threshold { at: first, kind })
    };
    let part1 = (0..=limits.l2)
        .map(|d2| {
            scan(
                limits.l1,
                &|d1| policy.get(d1, d2),
                Action::replaces_part1,
                &format!("part 1 at d2={d2}"),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let part2 = (0..=limits.l1)
        .map(|d1| {
            scan(
                limits.l2,
                &|d2| policy.get(d1, d2),
                Action::replaces_part2,
                &format!("part 2 at d1={d1}"),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Thresholds { part1, part2 })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub violations: usize,
    /// First offending state `(d1, d2)`.
    pub first: Option<(u32, u32)>,
}

impl CheckOutcome {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            violations: 0,
            first: None,
        }
    }

    fn flag(&mut self, d1: u32, d2: u32) {
        self.violations += 1;
        self.first.get_or_insert((d1, d2));
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    /// Hard checks.
    pub checks: Vec<CheckOutcome>,
    /// States where replacing part 2 is optimal but proceeding is not optimal
    /// after part 2 is renewed. Informational only.
    pub replace2_then_proceed: CheckOutcome,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed())
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.checks.iter().chain([&self.replace2_then_proceed]) {
            write!(
                f,
                "{}={} violations={}",
                c.name,
                if c.passed() { "pass" } else { "fail" },
                c.violations
            )?;
            if let Some((d1, d2)) = c.first {
                write!(f, " first=({d1},{d2})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Checks the monotone value function and threshold-shaped policy that the
/// model is expected to produce.
///
/// * `u` is nondecreasing in each coordinate;
/// * limit states only use admissible actions;
/// * once part 1 (resp. 2) is replaced at some wear, it is replaced at every
///   higher wear of that part;
/// * the joint-replacement region is closed upwards in both coordinates.
pub fn check_structure(u: &ValueFunction, policy: &PolicyGrid) -> StructureReport {
    let limits = u.limits();
    let mut mono = CheckOutcome::new("value_monotone");
    let mut boundary = CheckOutcome::new("boundary_admissible");
    let mut thr1 = CheckOutcome::new("part1_threshold");
    let mut thr2 = CheckOutcome::new("part2_threshold");
    let mut joint = CheckOutcome::new("joint_upward_closed");
    let mut diag = CheckOutcome::new("replace2_then_proceed");

    for d1 in 0..=limits.l1 {
        for d2 in 0..=limits.l2 {
            let v = u.get(d1, d2);
            if d1 < limits.l1 && u.get(d1 + 1, d2) < v {
                mono.flag(d1 + 1, d2);
            }
            if d2 < limits.l2 && u.get(d1, d2 + 1) < v {
                mono.flag(d1, d2 + 1);
            }
            let a = policy.get(d1, d2);
            if !a.admissible(d1, d2, limits) {
                boundary.flag(d1, d2);
            }
            if d1 < limits.l1 && a.replaces_part1() && !policy.get(d1 + 1, d2).replaces_part1() {
                thr1.flag(d1 + 1, d2);
            }
            if d2 < limits.l2 && a.replaces_part2() && !policy.get(d1, d2 + 1).replaces_part2() {
                thr2.flag(d1, d2 + 1);
            }
            if a == Action::ReplaceBoth
                && ((d1 < limits.l1 && policy.get(d1 + 1, d2) != Action::ReplaceBoth)
                    || (d2 < limits.l2 && policy.get(d1, d2 + 1) != Action::ReplaceBoth))
            {
                joint.flag(d1, d2);
            }
            if a == Action::Replace2 && policy.get(d1, FRESH_WEAR.min(limits.l2)) != Action::Proceed
            {
                diag.flag(d1, d2);
            }
        }
    }
    StructureReport {
        checks: vec![mono, boundary, thr1, thr2, joint],
        replace2_then_proceed: diag,
    }
}
