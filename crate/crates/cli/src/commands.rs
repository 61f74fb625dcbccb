//! One function per verb. Each reads its inputs, writes its outputs under
//! the configured directory and returns a short textual summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use wearpolicy::anneal::{anneal_grid, anneal_seeds, ScheduleSummary};
use wearpolicy::dp::{check_structure, extract_policy, thresholds, value_iteration, Action};
use wearpolicy::evaluate::{historical_cost, policy_cost, ComparisonRow};
use wearpolicy::io;
use wearpolicy::landscape::analyze;
use wearpolicy::lp::build_replacement_lp;
use wearpolicy::sim::{simulate_limit_policy, SseObjective, StopCondition};
use wearpolicy::{CostModel, FailureHistory, Matrix, RateTable};

use crate::config::RunConfig;
use crate::{CliError, Verb, EXIT_OK, EXIT_STRUCTURE, VERSION};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    pub exit_code: i32,
}

struct Writer {
    dir: PathBuf,
    header: Vec<(&'static str, String)>,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(verb: Verb, config: &RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(&config.output_dir)?;
        Ok(Self {
            dir: config.output_dir.clone(),
            header: vec![
                ("tool", format!("wearpolicy {VERSION}")),
                ("command", verb.name().to_string()),
                ("config_hash", config.hash()),
                ("seed", config.seed.to_string()),
            ],
            files: Vec::new(),
        })
    }

    fn comments(&self) -> String {
        io::comment_block(&self.header)
    }

    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.files.push(path);
        Ok(())
    }

    fn finish(self, summary: String, exit_code: i32) -> Outcome {
        Outcome { files: self.files, summary, exit_code }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_history(config: &RunConfig) -> Result<FailureHistory, CliError> {
    let p = config.require(&config.history, "history")?;
    Ok(io::read_history(&read(p)?, &p.display().to_string())?)
}

fn load_rates(config: &RunConfig) -> Result<RateTable, CliError> {
    let a = config.require(&config.rates_a, "rates_a")?;
    let b = config.require(&config.rates_b, "rates_b")?;
    Ok(io::read_rate_table(
        &read(a)?,
        &a.display().to_string(),
        &read(b)?,
        &b.display().to_string(),
    )?)
}

pub fn run_command(verb: Verb, config: &RunConfig) -> Result<Outcome, CliError> {
    match verb {
        Verb::Simulate => cmd_simulate(config),
        Verb::Estimate => cmd_estimate(config),
        Verb::Solve => cmd_solve(config),
        Verb::Landscape => cmd_landscape(config),
        Verb::Evaluate => cmd_evaluate(config),
        Verb::ExportLp => cmd_export_lp(config),
    }
}

pub fn cmd_simulate(config: &RunConfig) -> Result<Outcome, CliError> {
    let rates = load_rates(config)?;
    let limits = config.limits()?;
    let s = &config.simulate;
    let stop = match (s.days, s.counts) {
        (Some(d), _) => StopCondition::Days(d),
        (None, Some([n1, n2])) => StopCondition::Counts {
            n1,
            n2,
            max_days: s.max_days.unwrap_or(1_000_000),
        },
        (None, None) => {
            return Err(CliError::Validation("set simulate.days or simulate.counts".into()))
        }
    };
    let out = simulate_limit_policy(&rates, limits, stop, s.trajectory)?;
    let mut w = Writer::new(Verb::Simulate, config)?;
    w.write("history.csv", io::write_history(&out.history, &w.comments()))?;
    if let Some(t) = &out.trajectory {
        w.write("trajectory.csv", io::write_trajectory(t, &w.comments()))?;
    }
    let (n1, n2) = out.history.counts();
    let summary = format!(
        "simulated {} days: {} events (part 1: {n1}, part 2: {n2})\n",
        out.history.horizon(),
        out.history.len()
    );
    Ok(w.finish(summary, EXIT_OK))
}

pub fn cmd_estimate(config: &RunConfig) -> Result<Outcome, CliError> {
    let history = load_history(config)?;
    let limits = config.limits()?;
    let sa = config.sa_config()?;
    let seeds = config.seeds();
    let runs = anneal_seeds(&history, limits, &sa, &seeds)?;
    let best = runs
        .iter()
        .min_by(|x, y| x.best_objective.total_cmp(&y.best_objective))
        .expect("at least one seed");

    let grid_n = &config.anneal.grid_iters_per_temp;
    let grid_cool = &config.anneal.grid_cool;
    let summary_rows = if grid_n.is_empty() && grid_cool.is_empty() {
        let results: Vec<f64> = runs.iter().map(|r| r.best_objective).collect();
        let k = results.len() as f64;
        vec![ScheduleSummary {
            iters_per_temp: sa.iters_per_temp,
            cool: sa.cool,
            t0: runs.iter().map(|r| r.temperature.t0).sum::<f64>() / k,
            average: results.iter().sum::<f64>() / k,
            results,
        }]
    } else {
        let ns = if grid_n.is_empty() { vec![sa.iters_per_temp] } else { grid_n.clone() };
        let cools = if grid_cool.is_empty() { vec![sa.cool] } else { grid_cool.clone() };
        anneal_grid(&history, limits, &sa, &ns, &cools, &seeds)?
    };

    let mut w = Writer::new(Verb::Estimate, config)?;
    let head = w.comments();
    w.write("rates_a.csv", io::write_rate_matrix(&best.best, Matrix::A, &head))?;
    w.write("rates_b.csv", io::write_rate_matrix(&best.best, Matrix::B, &head))?;
    w.write("trace.csv", io::write_sa_trace(&best.trace, &head))?;
    w.write("sa_summary.csv", io::write_sa_summary(&summary_rows, &head))?;

    let v = best.best_value;
    let t = best.temperature;
    let mut report = head.clone();
    let _ = writeln!(report, "best_seed = {}", best.seed);
    let _ = writeln!(report, "best_objective = {}", best.best_objective);
    let _ = writeln!(report, "matched_events = {},{}", v.matched_events.0, v.matched_events.1);
    let _ = writeln!(report, "penalty_applied = {}", v.penalty_applied);
    let _ = writeln!(report, "absolute_sse = {}", v.absolute_sse);
    let _ = writeln!(report, "monotone = {}", best.best.is_monotone());
    let _ = writeln!(report, "initial_temperature = {}", t.t0);
    let _ = writeln!(report, "delta_plus = {}", t.delta_plus);
    let _ = writeln!(report, "m1 = {}", t.m1);
    let _ = writeln!(report, "m2 = {}", t.m2);
    let _ = writeln!(report, "flat_landscape = {}", t.flat);
    let _ = writeln!(report, "accepted_moves = {}", best.accepted);
    w.write("estimate_report.txt", &report)?;

    let mut summary = format!(
        "best objective {} (seed {}) over {} seed(s)\n",
        best.best_objective,
        best.seed,
        seeds.len()
    );
    for r in &runs {
        let _ = writeln!(summary, "  seed {}: {}", r.seed, r.best_objective);
    }
    Ok(w.finish(summary, EXIT_OK))
}

fn warn_costs(costs: &CostModel, summary: &mut String) {
    for warning in costs.warnings() {
        let _ = writeln!(summary, "warning: {warning}");
    }
}

pub fn cmd_solve(config: &RunConfig) -> Result<Outcome, CliError> {
    let rates = load_rates(config)?;
    let limits = config.limits()?;
    let costs = config.costs()?;
    let tol = config.solve.tolerance.unwrap_or_else(|| costs.default_tolerance());
    let solution = value_iteration(&rates, costs, limits, tol)?;
    let policy = extract_policy(&solution.values, &rates, costs, limits);
    let report = check_structure(&solution.values, &policy);

    let mut w = Writer::new(Verb::Solve, config)?;
    let head = w.comments();
    w.write("values.csv", io::write_value_grid(&solution.values, &head))?;
    w.write("policy.csv", io::write_policy_grid(&policy, &head))?;
    w.write("policy.ppm", io::policy_heatmap_ppm(&policy))?;
    w.write("policy_legend.txt", format!("{head}{}", io::heatmap_legend()))?;
    let threshold_note = match thresholds(&policy) {
        Ok(t) => {
            w.write("thresholds.csv", io::write_thresholds(&t, &head))?;
            None
        }
        Err(e) => Some(e.to_string()),
    };
    let mut structure = head.clone();
    let _ = writeln!(structure, "iterations = {}", solution.iterations);
    let _ = writeln!(structure, "final_residual = {}", solution.residuals.last().copied().unwrap_or(0.0));
    let _ = write!(structure, "{report}");
    if let Some(note) = &threshold_note {
        let _ = writeln!(structure, "thresholds=fail {note}");
    }
    w.write("structure.txt", &structure)?;
    if config.solve.export_lp {
        let lp = build_replacement_lp(&rates, costs, limits);
        let lp_header = w.header.iter().map(|(k, v)| format!("{k}={v}\n")).collect::<String>();
        w.write("model.lp", lp.to_lp_string(&lp_header))?;
    }

    let mut summary = String::new();
    warn_costs(&costs, &mut summary);
    let _ = writeln!(summary, "converged in {} sweeps", solution.iterations);
    for a in Action::ALL {
        let _ = writeln!(summary, "  {}: {} states", a.name(), policy.count(a));
    }
    let passed = report.passed() && threshold_note.is_none();
    if passed {
        summary.push_str("structure checks passed\n");
        Ok(w.finish(summary, EXIT_OK))
    } else {
        let first = report
            .first_failure()
            .map(|c| c.name.to_string())
            .or(threshold_note)
            .unwrap_or_default();
        let _ = writeln!(summary, "structure checks failed: {first}");
        Ok(w.finish(summary, EXIT_STRUCTURE))
    }
}

pub fn cmd_landscape(config: &RunConfig) -> Result<Outcome, CliError> {
    let history = load_history(config)?;
    let objective = SseObjective::new(&history, config.limits()?)?;
    let report = analyze(&objective, &config.landscape_config()?)?;
    let mut w = Writer::new(Verb::Landscape, config)?;
    let head = w.comments();
    w.write("landscape.txt", report.to_text(&head))?;
    w.write("walk_series.csv", report.series_csv(&head))?;
    let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.4}"));
    let summary = format!(
        "amplitude {} ({} samples), mean walk length {:.3} ({} starts), r1 {} ({} steps)\n",
        fmt(report.amplitude),
        report.population,
        report.mean_walk_length,
        report.walk_starts,
        fmt(report.r1),
        report.walk_steps
    );
    Ok(w.finish(summary, EXIT_OK))
}

pub fn cmd_evaluate(config: &RunConfig) -> Result<Outcome, CliError> {
    let history = load_history(config)?;
    let rates = load_rates(config)?;
    let limits = config.limits()?;
    let base = config.costs()?;
    let fixed_policy = match &config.evaluate.policy {
        Some(_) => {
            let p = config.require(&config.evaluate.policy, "evaluate.policy")?;
            Some(io::read_policy_grid(&read(p)?, &p.display().to_string())?)
        }
        None => None,
    };
    let scenarios: Vec<(String, CostModel)> = if config.evaluate.scenarios.is_empty() {
        vec![("base".to_string(), base)]
    } else {
        config
            .evaluate
            .scenarios
            .iter()
            .map(|s| {
                let c = CostModel::new(
                    s.c1.unwrap_or(base.c1),
                    s.c2.unwrap_or(base.c2),
                    s.v.unwrap_or(base.v),
                    s.alpha.unwrap_or(base.alpha),
                )?;
                Ok((s.name.clone(), c))
            })
            .collect::<Result<_, CliError>>()?
    };

    let mut rows = Vec::new();
    for (name, costs) in scenarios {
        let policy = match &fixed_policy {
            Some(p) => p.clone(),
            None => {
                let sol = value_iteration(&rates, costs, limits, costs.default_tolerance())?;
                extract_policy(&sol.values, &rates, costs, limits)
            }
        };
        if policy.limits() != limits {
            return Err(CliError::Validation("policy grid does not match the limits".into()));
        }
        let hist = historical_cost(&history, costs)?;
        let opt = policy_cost(&policy, &rates, costs, config.evaluate.horizon)?;
        rows.push(ComparisonRow::new(name, &opt, &hist)?);
    }

    let mut w = Writer::new(Verb::Evaluate, config)?;
    w.write("comparison.csv", io::write_comparison(&rows, &w.comments()))?;
    let mut summary = String::new();
    for r in &rows {
        let _ = writeln!(
            summary,
            "{}: historical {:.3}/day, policy {:.3}/day, reduction {:.1}%",
            r.scenario, r.historical_mean, r.policy_mean, r.reduction_pct
        );
    }
    Ok(w.finish(summary, EXIT_OK))
}

pub fn cmd_export_lp(config: &RunConfig) -> Result<Outcome, CliError> {
    let rates = load_rates(config)?;
    let lp = build_replacement_lp(&rates, config.costs()?, config.limits()?);
    let mut w = Writer::new(Verb::ExportLp, config)?;
    let header = w.header.iter().map(|(k, v)| format!("{k}={v}\n")).collect::<String>();
    w.write("model.lp", lp.to_lp_string(&header))?;
    let summary = format!(
        "{} variables, {} constraints\n",
        lp.objective.len(),
        lp.constraints.len()
    );
    Ok(w.finish(summary, EXIT_OK))
}
