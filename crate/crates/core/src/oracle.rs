//! Exhaustive stationary-policy enumeration for tiny replacement problems.
//!
//! Independent of the value-iteration path: successors are recomputed from
//! the rate table and every admissible deterministic policy is evaluated
//! exactly by solving `(I - alpha P) u = c`. The optimal value is the
//! elementwise minimum over all policies.

use crate::domain::{CostModel, Limits, RateTable, WearState, FRESH_WEAR};
use crate::dp::{Action, PolicyGrid, StateGrid};

#[derive(Debug, Clone)]
pub struct OracleSolution {
    /// Optimal value per state, row-major over `(d1, d2)`.
    pub values: Vec<f64>,
    pub policies_evaluated: usize,
}

struct Model {
    limits: Limits,
    cols: usize,
    n: usize,
    rates: RateTable,
    costs: CostModel,
}

impl Model {
    fn new(rates: &RateTable, costs: CostModel, limits: Limits) -> Self {
        let cols = limits.l2 as usize + 1;
        Self {
            limits,
            cols,
            n: (limits.l1 as usize + 1) * cols,
            rates: rates.clone(),
            costs,
        }
    }

    fn coords(&self, k: usize) -> (u32, u32) {
        ((k / self.cols) as u32, (k % self.cols) as u32)
    }

    fn admissible(&self, k: usize) -> Vec<Action> {
        let (d1, d2) = self.coords(k);
        let at1 = d1 == self.limits.l1;
        let at2 = d2 == self.limits.l2;
        let mut out = Vec::new();
        if !at1 && !at2 {
            out.push(Action::Proceed);
        }
        if !at2 {
            out.push(Action::Replace1);
        }
        if !at1 {
            out.push(Action::Replace2);
        }
        out.push(Action::ReplaceBoth);
        out
    }

    /// `(cost, successor)` of an action.
    fn transition(&self, k: usize, action: Action) -> (f64, usize) {
        let (mut d1, mut d2) = self.coords(k);
        let mut cost = 0.0;
        if matches!(action, Action::Replace1 | Action::ReplaceBoth) {
            d1 = FRESH_WEAR;
        }
        if matches!(action, Action::Replace2 | Action::ReplaceBoth) {
            d2 = FRESH_WEAR;
        }
        cost += match action {
            Action::Proceed => 0.0,
            Action::Replace1 => self.costs.c1,
            Action::Replace2 => self.costs.c2,
            Action::ReplaceBoth => self.costs.v,
        };
        let (a, b) = self.rates.rate_lookup(WearState::new(d1, d2));
        let n1 = (d1 + a).min(self.limits.l1) as usize;
        let n2 = (d2 + b).min(self.limits.l2) as usize;
        (cost, n1 * self.cols + n2)
    }

    fn evaluate(&self, actions: &[Action]) -> Vec<f64> {
        let n = self.n;
        let alpha = self.costs.alpha;
        // augmented matrix [I - alpha P | c]
        let mut m = vec![vec![0.0; n + 1]; n];
        for (k, row) in m.iter_mut().enumerate() {
            let (c, s) = self.transition(k, actions[k]);
            row[k] += 1.0;
            row[s] -= alpha;
            row[n] = c;
        }
        solve_dense(m)
    }
}

fn solve_dense(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        for j in col..=n {
            m[col][j] /= p;
        }
        for r in 0..n {
            if r != col && m[r][col] != 0.0 {
                let f = m[r][col];
                for j in col..=n {
                    m[r][j] -= f * m[col][j];
                }
            }
        }
    }
    m.into_iter().map(|row| row[n]).collect()
}

/// Optimal values by enumerating every admissible stationary policy.
///
/// The number of policies is `4^interior * 2^boundary`, so keep grids tiny.
pub fn enumerate_policies(rates: &RateTable, costs: CostModel, limits: Limits) -> OracleSolution {
    let model = Model::new(rates, costs, limits);
    let choices: Vec<Vec<Action>> = (0..model.n).map(|k| model.admissible(k)).collect();
    let mut idx = vec![0usize; model.n];
    let mut best = vec![f64::INFINITY; model.n];
    let mut count = 0;
    loop {
        let actions: Vec<Action> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        let values = model.evaluate(&actions);
        for (b, v) in best.iter_mut().zip(values) {
            *b = b.min(v);
        }
        count += 1;
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == model.n {
                return OracleSolution {
                    values: best,
                    policies_evaluated: count,
                };
            }
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact discounted cost of following `policy` from every state.
pub fn evaluate_policy(
    policy: &PolicyGrid,
    rates: &RateTable,
    costs: CostModel,
    limits: Limits,
) -> Vec<f64> {
    let model = Model::new(rates, costs, limits);
    model.evaluate(policy.cells())
}

/// Whether the policy's exact value is within `tol` of the optimum everywhere.
pub fn policy_is_optimal(
    policy: &PolicyGrid,
    best: &OracleSolution,
    rates: &RateTable,
    costs: CostModel,
    limits: Limits,
    tol: f64,
) -> bool {
    evaluate_policy(policy, rates, costs, limits)
        .iter()
        .zip(&best.values)
        .all(|(v, b)| (v - b).abs() <= tol)
}

/// Greedy policy w.r.t. the oracle values, preferring earlier actions of
/// [`Action::ALL`] among those within `1e-9` of the best.
pub fn greedy_from_values(
    values: &[f64],
    rates: &RateTable,
    costs: CostModel,
    limits: Limits,
) -> PolicyGrid {
    let model = Model::new(rates, costs, limits);
    let cells = (0..model.n)
        .map(|k| {
            let q: Vec<(Action, f64)> = model
                .admissible(k)
                .into_iter()
                .map(|a| {
                    let (c, s) = model.transition(k, a);
                    (a, c + costs.alpha * values[s])
                })
                .collect();
            let min = q.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
            q.iter().find(|x| x.1 <= min + 1e-9).unwrap().0
        })
        .collect();
    StateGrid::from_vec(limits, cells).expect("grid size matches limits")
}
