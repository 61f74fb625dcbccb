//! The two worked examples: gear-pair failure histories and the rate tables
//! estimated for them, with 0.9 mm replacement limits.

use crate::domain::{
    CostModel, EventKind, FailureEvent, FailureHistory, Limits, RateTable, DEFAULT_BIN_WIDTH,
};

pub const EXAMPLE_LIMITS: Limits = Limits { l1: 90, l2: 90 };
pub const EXAMPLE_DISCOUNT: f64 = 0.95;

pub const EXAMPLE1_COSTS: CostModel = CostModel {
    c1: 100.0,
    c2: 120.0,
    v: 220.0,
    alpha: EXAMPLE_DISCOUNT,
};
/// Example 1 with a cheaper joint replacement.
pub const EXAMPLE1_COSTS_SHARED_SETUP: CostModel = CostModel {
    v: 200.0,
    ..EXAMPLE1_COSTS
};

pub const EXAMPLE2_COSTS: CostModel = CostModel {
    c1: 100.0,
    c2: 300.0,
    v: 400.0,
    alpha: EXAMPLE_DISCOUNT,
};
pub const EXAMPLE2_COSTS_SHARED_SETUP: CostModel = CostModel {
    v: 350.0,
    ..EXAMPLE2_COSTS
};

/// `(part, day)` pairs; part 3 marks a joint replacement.
const EXAMPLE1_EVENTS: [(u8, u32); 56] = [
    (1, 26),
    (2, 28),
    (1, 46),
    (2, 49),
    (1, 64),
    (2, 68),
    (1, 81),
    (2, 84),
    (1, 99),
    (2, 103),
    (1, 116),
    (2, 120),
    (1, 133),
    (2, 136),
    (2, 154),
    (1, 172),
    (2, 175),
    (1, 190),
    (2, 193),
    (1, 209),
    (2, 211),
    (1, 229),
    (2, 232),
    (1, 247),
    (2, 251),
    (1, 264),
    (2, 267),
    (1, 283),
    (1, 303),
    (2, 306),
    (1, 321),
    (2, 325),
    (1, 338),
    (2, 342),
    (1, 355),
    (2, 358),
    (1, 374),
    (2, 376),
    (1, 394),
    (2, 397),
    (1, 412),
    (2, 416),
    (2, 432),
    (1, 447),
    (2, 451),
    (1, 464),
    (2, 468),
    (1, 481),
    (2, 484),
    (1, 499),
    (2, 503),
    (1, 516),
    (2, 520),
    (1, 533),
    (2, 537),
    (1, 550),
];

const EXAMPLE2_EVENTS: [(u8, u32); 13] = [
    (1, 21),
    (2, 25),
    (1, 35),
    (2, 40),
    (1, 48),
    (2, 54),
    (1, 61),
    (2, 68),
    (1, 74),
    (2, 82),
    (1, 86),
    (2, 97),
    (1, 99),
];
const EXAMPLE2_JOINT_DAY: u32 = 114;

const EXAMPLE1_A: [[u32; 10]; 10] = [
    [1, 1, 3, 3, 4, 4, 4, 5, 6, 7],
    [1, 1, 3, 3, 4, 4, 5, 5, 8, 12],
    [3, 3, 3, 3, 4, 5, 6, 8, 9, 12],
    [3, 3, 3, 4, 4, 5, 6, 9, 9, 12],
    [3, 3, 4, 4, 5, 6, 7, 10, 11, 12],
    [4, 7, 8, 8, 8, 9, 9, 11, 11, 12],
    [4, 9, 10, 11, 11, 11, 11, 11, 12, 13],
    [6, 11, 12, 13, 13, 13, 13, 13, 13, 14],
    [7, 12, 12, 13, 14, 14, 14, 14, 14, 14],
    [7, 12, 12, 14, 14, 14, 14, 14, 14, 14],
];

const EXAMPLE1_B: [[u32; 10]; 10] = [
    [1, 1, 1, 1, 4, 7, 7, 9, 9, 9],
    [1, 2, 2, 2, 4, 7, 7, 9, 10, 11],
    [1, 2, 4, 4, 4, 8, 8, 9, 11, 12],
    [4, 5, 5, 5, 6, 9, 11, 12, 13, 13],
    [5, 6, 7, 7, 8, 9, 11, 13, 13, 13],
    [6, 7, 8, 9, 10, 10, 11, 13, 13, 13],
    [6, 8, 11, 11, 12, 13, 13, 13, 13, 13],
    [6, 8, 11, 11, 12, 13, 13, 13, 13, 13],
    [6, 8, 13, 13, 13, 13, 13, 13, 13, 13],
    [7, 9, 13, 13, 13, 13, 13, 14, 14, 14],
];

const EXAMPLE2_A: [[u32; 10]; 10] = [
    [1, 1, 1, 3, 5, 5, 8, 8, 8, 10],
    [2, 3, 5, 5, 6, 7, 8, 8, 8, 10],
    [2, 4, 5, 6, 6, 7, 9, 10, 11, 11],
    [2, 4, 5, 7, 9, 9, 10, 10, 11, 11],
    [2, 7, 7, 7, 10, 10, 10, 10, 12, 12],
    [2, 7, 7, 8, 10, 11, 11, 11, 12, 13],
    [5, 7, 7, 10, 10, 13, 13, 13, 13, 13],
    [9, 10, 12, 12, 12, 13, 14, 14, 14, 14],
    [9, 12, 12, 12, 12, 13, 14, 14, 14, 14],
    [12, 12, 12, 13, 13, 14, 14, 14, 14, 14],
];

const EXAMPLE2_B: [[u32; 10]; 10] = [
    [1, 1, 1, 1, 1, 4, 6, 7, 8, 10],
    [1, 2, 2, 3, 7, 8, 8, 8, 8, 13],
    [1, 2, 2, 3, 7, 9, 9, 10, 12, 13],
    [3, 3, 3, 4, 7, 12, 12, 12, 13, 13],
    [3, 3, 4, 4, 8, 12, 12, 12, 13, 13],
    [3, 3, 4, 7, 8, 12, 12, 12, 13, 13],
    [3, 4, 6, 8, 8, 12, 12, 12, 14, 14],
    [3, 7, 10, 11, 12, 12, 12, 12, 14, 14],
    [9, 10, 10, 11, 12, 12, 13, 13, 14, 14],
    [10, 10, 10, 12, 12, 12, 13, 14, 14, 14],
];

fn table(a: &[[u32; 10]; 10], b: &[[u32; 10]; 10]) -> RateTable {
    let rows = |m: &[[u32; 10]; 10]| m.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
    RateTable::from_rows(DEFAULT_BIN_WIDTH, &rows(a), &rows(b)).expect("published tables are valid")
}

fn event(part: u8, time: u32) -> FailureEvent {
    let which = match part {
        1 => EventKind::Part1,
        2 => EventKind::Part2,
        _ => EventKind::Both,
    };
    FailureEvent::new(time, which)
}

/// Replacement history of example 1 (56 events over 550 days).
pub fn example1_history() -> FailureHistory {
    FailureHistory::new(EXAMPLE1_EVENTS.iter().map(|&(p, t)| event(p, t)).collect())
        .expect("published history is ordered")
}

/// Replacement history of example 2, ending with a joint replacement at day 114.
pub fn example2_history() -> FailureHistory {
    let mut events: Vec<_> = EXAMPLE2_EVENTS.iter().map(|&(p, t)| event(p, t)).collect();
    events.push(FailureEvent::new(EXAMPLE2_JOINT_DAY, EventKind::Both));
    FailureHistory::new(events).expect("published history is ordered")
}

pub fn example1_rates() -> RateTable {
    table(&EXAMPLE1_A, &EXAMPLE1_B)
}

pub fn example2_rates() -> RateTable {
    table(&EXAMPLE2_A, &EXAMPLE2_B)
}
