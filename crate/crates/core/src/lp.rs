//! Linear-programming form of the replacement problem, written in CPLEX LP
//! text format.
//!
//! The optimal value function is the largest `u` satisfying, for every
//! capped state and every admissible action,
//! `u(s) <= cost(action) + alpha u(next(s, action))`. The objective maximises
//! the sum of all `u(s)`. A small reader is included so exported files can be
//! checked and loaded back.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::domain::{CostModel, Limits, RateTable};
use crate::dp::{Action, ReplacementMdp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LpConstraint {
    pub name: String,
    /// `(coefficient, variable)` pairs on the left-hand side.
    pub terms: Vec<(f64, String)>,
    /// Right-hand side of `terms <= rhs`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub objective: Vec<(f64, String)>,
    pub constraints: Vec<LpConstraint>,
}

pub fn variable_name(d1: u32, d2: u32) -> String {
    format!("u_{d1}_{d2}")
}

fn constraint_prefix(action: Action) -> &'static str {
    match action {
        Action::Proceed => "keep",
        Action::Replace1 => "rep1",
        Action::Replace2 => "rep2",
        Action::ReplaceBoth => "both",
    }
}

/// One variable per capped state, one constraint per admissible action.
pub fn build_replacement_lp(rates: &RateTable, costs: CostModel, limits: Limits) -> LpModel {
    let mdp = ReplacementMdp::new(rates, costs, limits);
    let cols = limits.l2 + 1;
    let mut objective = Vec::new();
    let mut constraints = Vec::new();
    for d1 in 0..=limits.l1 {
        for d2 in 0..=limits.l2 {
            let own = variable_name(d1, d2);
            objective.push((1.0, own.clone()));
            for action in Action::ALL {
                if !action.admissible(d1, d2, limits) {
                    continue;
                }
                let s = mdp.successor(d1, d2, action) as u32;
                let next = variable_name(s / cols, s % cols);
                let terms = if next == own {
                    vec![(1.0 - costs.alpha, own.clone())]
                } else {
                    vec![(1.0, own.clone()), (-costs.alpha, next)]
                };
                constraints.push(LpConstraint {
                    name: format!("{}_{d1}_{d2}", constraint_prefix(action)),
                    terms,
                    rhs: mdp.immediate_cost(action),
                });
            }
        }
    }
    LpModel {
        objective,
        constraints,
    }
}

fn write_expr(out: &mut String, terms: &[(f64, String)]) {
    for (k, (coef, var)) in terms.iter().enumerate() {
        if k > 0 && k % 8 == 0 {
            out.push_str("\n   ");
        }
        let sign = if *coef < 0.0 { '-' } else { '+' };
        let mag = coef.abs();
        if k == 0 && sign == '+' {
            // leading plus is implicit
        } else {
            let _ = write!(out, " {sign}");
        }
        if mag == 1.0 {
            let _ = write!(out, " {var}");
        } else {
            let _ = write!(out, " {mag} {var}");
        }
    }
}

impl LpModel {
    pub fn variables(&self) -> Vec<&str> {
        self.objective.iter().map(|(_, v)| v.as_str()).collect()
    }

    pub fn to_lp_string(&self, header: &str) -> String {
        let mut out = String::new();
        for line in header.lines() {
            let _ = writeln!(out, "\\ {line}");
        }
        out.push_str("Maximize\n obj:");
        write_expr(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.name);
            write_expr(&mut out, &c.terms);
            let _ = writeln!(out, " <= {}", c.rhs);
        }
        out.push_str("End\n");
        out
    }

    /// Reads the subset of LP format produced by [`LpModel::to_lp_string`]:
    /// a maximisation objective and `<=` constraints.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            Preamble,
            Objective,
            Constraints,
            Done,
        }
        let mut section = Section::Preamble;
        let mut objective_tokens: Vec<(usize, String)> = Vec::new();
        let mut constraint_tokens: Vec<(usize, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('\\').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.to_ascii_lowercase().as_str() {
                "maximize" | "maximise" | "max" => {
                    section = Section::Objective;
                    continue;
                }
                "subject to" | "such that" | "st" | "s.t." => {
                    section = Section::Constraints;
                    continue;
                }
                "end" => {
                    section = Section::Done;
                    continue;
                }
                _ => {}
            }
            let sink = match section {
                Section::Objective => &mut objective_tokens,
                Section::Constraints => &mut constraint_tokens,
                Section::Preamble | Section::Done => {
                    return Err(parse_err(lineno, format!("unexpected line `{line}`")))
                }
            };
            for tok in tokenize(line) {
                sink.push((lineno + 1, tok));
            }
        }
        if section != Section::Done {
            return Err(parse_err(text.lines().count(), "missing End".into()));
        }

        let mut obj = objective_tokens.into_iter().peekable();
        match (obj.next(), obj.next()) {
            (Some((_, _name)), Some((_, colon))) if colon == ":" => {}
            _ => return Err(parse_err(0, "objective must be named".into())),
        }
        let objective = parse_terms(&mut obj, None)?;

        let mut constraints = Vec::new();
        let mut toks = constraint_tokens.into_iter().peekable();
        while let Some((line, name)) = toks.next() {
            match toks.next() {
                Some((_, c)) if c == ":" => {}
                _ => return Err(parse_err(line, format!("constraint `{name}` lacks a name"))),
            }
            let terms = parse_terms(&mut toks, Some("<="))?;
            let rhs = match toks.next() {
                Some((l, num)) => num
                    .parse::<f64>()
                    .map_err(|_| parse_err(l, format!("bad right-hand side `{num}`")))?,
                None => return Err(parse_err(line, "missing right-hand side".into())),
            };
            constraints.push(LpConstraint { name, terms, rhs });
        }
        Ok(Self {
            objective,
            constraints,
        })
    }

    /// Largest violation of any constraint by the given assignment.
    pub fn max_violation(&self, value: &BTreeMap<String, f64>) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let lhs: f64 = c
                    .terms
                    .iter()
                    .map(|(k, v)| k * value.get(v).copied().unwrap_or(0.0))
                    .sum();
                lhs - c.rhs
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_to(&self, path: &Path, header: &str) -> Result<()> {
        std::fs::write(path, self.to_lp_string(header))?;
        Ok(())
    }
}

/// Builds the LP and writes it to `path`.
pub fn export_lp(
    rates: &RateTable,
    costs: CostModel,
    limits: Limits,
    path: &Path,
    header: &str,
) -> Result<LpModel> {
    let model = build_replacement_lp(rates, costs, limits);
    model.write_to(path, header)?;
    Ok(model)
}

fn parse_err(line: usize, message: String) -> Error {
    Error::Parse {
        path: "<lp>".into(),
        line,
        message,
    }
}

fn tokenize(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<String>| {
        if !cur.is_empty() {
            out.push(std::mem::take(cur));
        }
    };
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => flush(&mut cur, &mut out),
            ':' | '+' => {
                flush(&mut cur, &mut out);
                out.push(c.to_string());
            }
            '-' if cur.is_empty() => out.push("-".into()),
            '<' | '>' | '=' => {
                flush(&mut cur, &mut out);
                let mut op = c.to_string();
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    op.push('=');
                    i += 1;
                }
                out.push(op);
            }
            _ => cur.push(c),
        }
        i += 1;
    }
    flush(&mut cur, &mut out);
    out
}

fn parse_terms(
    toks: &mut std::iter::Peekable<impl Iterator<Item = (usize, String)>>,
    stop: Option<&str>,
) -> Result<Vec<(f64, String)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    loop {
        let Some((line, tok)) = toks.peek().cloned() else {
            break;
        };
        if Some(tok.as_str()) == stop {
            toks.next();
            return Ok(terms);
        }
        toks.next();
        match tok.as_str() {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            "<" | ">" | "<=" | ">=" | "=" | "=<" | "=>" => {
                return Err(parse_err(line, format!("unsupported relation `{tok}`")))
            }
            _ => {
                if let Ok(x) = tok.parse::<f64>() {
                    coef = Some(x);
                } else {
                    terms.push((sign * coef.take().unwrap_or(1.0), tok));
                    sign = 1.0;
                }
            }
        }
    }
    if stop.is_some() {
        return Err(parse_err(0, "expression ended before its relation".into()));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::domain::GridShape;
    use crate::dp::value_iteration;

    fn toy() -> (RateTable, CostModel, Limits) {
        (
            RateTable::uniform(GridShape::new(1, 3, 3).unwrap(), 1, 1).unwrap(),
            CostModel::new(1.0, 1.0, 1.5, 0.5).unwrap(),
            Limits::new(2, 2).unwrap(),
        )
    }

    #[test]
    fn toy_counts() {
        let (r, c, l) = toy();
        let lp = build_replacement_lp(&r, c, l);
        assert_eq!(lp.variables().len(), 9);
        // 4 interior states x 4 actions, 4 edge states x 2, corner x 1
        assert_eq!(lp.constraints.len(), 25);
        assert!(lp.constraints.len() <= 36);
    }

    #[test]
    fn round_trip_example1() {
        let lp = build_replacement_lp(
            &datasets::example1_rates(),
            datasets::EXAMPLE1_COSTS,
            datasets::EXAMPLE_LIMITS,
        );
        assert_eq!(lp.variables().len(), 91 * 91);
        let text = lp.to_lp_string("example 1\nseed=0");
        let back = LpModel::parse(&text).unwrap();
        assert_eq!(back, lp);
    }

    #[test]
    fn fixed_point_is_feasible_and_tight() {
        let (rates, costs, limits) = (
            datasets::example2_rates(),
            datasets::EXAMPLE2_COSTS,
            datasets::EXAMPLE_LIMITS,
        );
        let lp = build_replacement_lp(&rates, costs, limits);
        let tol = 1e-10;
        let sol = value_iteration(&rates, costs, limits, tol).unwrap();
        let values: BTreeMap<String, f64> = sol
            .values
            .iter()
            .map(|(d1, d2, v)| (variable_name(d1, d2), v))
            .collect();
        assert!(lp.max_violation(&values) < 1e-6);
        // every state has at least one tight constraint
        let mut tight: BTreeMap<&str, bool> = BTreeMap::new();
        for c in &lp.constraints {
            let lhs: f64 = c.terms.iter().map(|(k, v)| k * values[v]).sum();
            let own = c.terms[0].1.as_str();
            let e = tight.entry(own).or_default();
            *e |= (lhs - c.rhs).abs() < 1e-6;
        }
        assert_eq!(tight.len(), 91 * 91);
        assert!(tight.values().all(|&t| t));
    }

    #[test]
    fn zero_discount_rhs_are_costs() {
        let (r, mut c, l) = toy();
        c.alpha = 0.0;
        let lp = build_replacement_lp(&r, c, l);
        let corner = lp
            .constraints
            .iter()
            .find(|c| c.name == "both_2_2")
            .unwrap();
        assert_eq!(corner.rhs, 1.5);
        assert_eq!(corner.terms[0], (1.0, "u_2_2".to_string()));
    }

    #[test]
    fn parser_rejects_garbage() {
        assert!(LpModel::parse("Maximize\n obj: x\nSubject To\n c: x >= 1\nEnd\n").is_err());
        assert!(LpModel::parse("Maximize\n obj: x\n").is_err());
        let ok = LpModel::parse(
            "\\ hi\nMaximize\n obj: x + 2 y\nSubject To\n c1: x - 0.5 y <= 3\nEnd\n",
        )
        .unwrap();
        assert_eq!(ok.objective, vec![(1.0, "x".into()), (2.0, "y".into())]);
        assert_eq!(
            ok.constraints[0].terms,
            vec![(1.0, "x".into()), (-0.5, "y".into())]
        );
        assert_eq!(ok.constraints[0].rhs, 3.0);
    }
}
