//! Checks computed quantities of the built-in scenarios against a manifest
//! of expected values with tolerances.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::decision::{
    experimental_design_report, Action, NdeSystem, OneStepProblem, OneStepSolution, Policy, TwoStepProblem,
};
use crate::error::{Error, Result};
use crate::nde_models::roc_indices;
use crate::quadrature::{QuadSettings, ScanGrid};
use crate::report::fmt_num;

const MANIFEST_JSON: &str = include_str!("../data/verify_manifest.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `|actual − expected| ≤ tolerance`.
    Approx,
    /// Exact string match.
    Text,
    /// `actual > expected`.
    GreaterThan,
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// A number printed in the reference publication.
    Published,
    /// Follows from the model by construction.
    Derived,
    /// An exact limiting case.
    Limit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub id: String,
    pub criterion: u32,
    pub scenario: String,
    /// `group.name`, e.g. `model3.cost`.
    pub quantity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<f64>,
    /// Kept as printed so the default tolerance can read its last digit.
    pub expected: String,
    pub kind: CheckKind,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn tolerance(&self) -> Result<f64> {
        match self.abs_tol {
            Some(t) => Ok(t),
            None => default_tolerance(&self.expected),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub description: String,
    pub checks: Vec<Check>,
}

impl Manifest {
    /// The manifest shipped with the crate.
    pub fn builtin() -> Manifest {
        Manifest::from_json(MANIFEST_JSON).expect("shipped manifest parses")
    }

    pub fn from_json(text: &str) -> Result<Manifest> {
        serde_json::from_str(text).map_err(|e| Error::config("manifest", e.to_string()))
    }

    pub fn for_scenario<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Check> + 'a {
        self.checks.iter().filter(move |c| c.scenario == name)
    }
}

/// The larger of one unit in the last printed digit and 2% of the value.
pub fn default_tolerance(expected: &str) -> Result<f64> {
    let bad = || Error::config("expected", format!("`{expected}` is not a number"));
    let value: f64 = expected.trim().parse().map_err(|_| bad())?;
    let lower = expected.trim().to_ascii_lowercase();
    let (mantissa, exp) = match lower.split_once('e') {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (lower.as_str(), 0),
    };
    let decimals = mantissa.split_once('.').map_or(0, |(_, d)| d.len()) as i32;
    let unit = 10f64.powi(exp - decimals);
    Ok(unit.max(0.02 * value.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Text(String),
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Num(v) => f.write_str(&fmt_num(*v)),
            Value::Text(t) => f.write_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub check: Check,
    pub actual: Option<Value>,
    pub passed: bool,
    pub error: Option<String>,
}

impl Outcome {
    pub fn line(&self) -> String {
        let c = &self.check;
        let status = if self.passed { "PASS" } else { "FAIL" };
        let actual = match (&self.actual, &self.error) {
            (Some(v), _) => v.to_string(),
            (None, Some(e)) => format!("error: {e}"),
            (None, None) => "missing".into(),
        };
        let expected = match c.kind {
            CheckKind::Approx => match c.tolerance() {
                Ok(t) => format!("{} +/- {}", c.expected, fmt_num(t)),
                Err(_) => c.expected.clone(),
            },
            CheckKind::Text => format!("\"{}\"", c.expected),
            CheckKind::GreaterThan => format!("> {}", c.expected),
        };
        format!("{status} [{:>2}] {:<44} actual {actual:<14} expected {expected}", c.criterion, c.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub outcomes: Vec<Outcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }

    pub fn criterion(&self, k: u32) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter().filter(move |o| o.check.criterion == k)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "== verify {} ==", self.scenario);
        for o in &self.outcomes {
            let _ = writeln!(out, "{}", o.line());
        }
        let n_fail = self.failures().count();
        let _ = writeln!(out, "{} checks, {} passed, {} failed", self.outcomes.len(), self.outcomes.len() - n_fail, n_fail);
        out
    }
}

fn judge(check: &Check, actual: &Value) -> Result<bool> {
    match (check.kind, actual) {
        (CheckKind::Text, Value::Text(t)) => Ok(*t == check.expected),
        (CheckKind::Approx, Value::Num(v)) => {
            let e: f64 = check.expected.parse().map_err(|_| Error::config("expected", check.expected.clone()))?;
            Ok((v - e).abs() <= check.tolerance()?)
        }
        (CheckKind::GreaterThan, Value::Num(v)) => {
            let e: f64 = check.expected.parse().map_err(|_| Error::config("expected", check.expected.clone()))?;
            Ok(*v > e)
        }
        _ => Err(Error::invalid(format!("`{}` has the wrong value type for its check kind", check.id))),
    }
}

type Group = BTreeMap<String, Value>;

/// Computes quantity groups on demand and keeps them for reuse.
struct Evaluator<'a> {
    cfg: &'a ScenarioConfig,
    settings: Option<QuadSettings>,
    cache: HashMap<(String, Option<u64>), Group>,
}

fn num(pairs: &[(&str, f64)]) -> Group {
    pairs.iter().map(|(k, v)| (k.to_string(), Value::Num(*v))).collect()
}

fn require_at(group: &str, at: Option<f64>) -> Result<f64> {
    at.ok_or_else(|| Error::config("at", format!("`{group}` needs an evaluation point")))
}

impl<'a> Evaluator<'a> {
    fn native(&self) -> Result<OneStepProblem> {
        let p = self.cfg.one_step_problem()?;
        Ok(match self.settings {
            Some(s) => p.with_settings(s),
            None => p,
        })
    }

    fn two_step(&self) -> Result<TwoStepProblem> {
        let mut t = self.cfg.two_step_problem()?;
        if let Some(s) = self.settings {
            t.settings = s;
        }
        Ok(t)
    }

    /// The binary-condition problem: derived at `x_th` for a base model,
    /// otherwise the native one.
    fn binary(&self, x_th: Option<f64>) -> Result<OneStepProblem> {
        let p = self.native()?;
        if !matches!(p.nde, NdeSystem::Base { .. }) {
            return Ok(p);
        }
        let x = x_th
            .or(self.cfg.x_th_condition)
            .ok_or_else(|| Error::config("x_th_condition", "needed for a binary condition"))?;
        p.with_condition_threshold(x, None)
    }

    fn get(&mut self, group: &str, at: Option<f64>) -> Result<&Group> {
        let key = (group.to_string(), at.map(f64::to_bits));
        if !self.cache.contains_key(&key) {
            let g = self.compute(group, at)?;
            self.cache.insert(key.clone(), g);
        }
        Ok(&self.cache[&key])
    }

    fn value(&mut self, quantity: &str, at: Option<f64>) -> Result<Value> {
        let (group, name) = quantity
            .split_once('.')
            .ok_or_else(|| Error::config("quantity", format!("`{quantity}` has no group")))?;
        self.get(group, at)?
            .get(name)
            .cloned()
            .ok_or_else(|| Error::config("quantity", format!("unknown quantity `{quantity}`")))
    }

    fn number(&mut self, quantity: &str, at: Option<f64>) -> Result<f64> {
        match self.value(quantity, at)? {
            Value::Num(v) => Ok(v),
            Value::Text(_) => Err(Error::invalid(format!("`{quantity}` is not numeric"))),
        }
    }

    fn compute(&mut self, group: &str, at: Option<f64>) -> Result<Group> {
        let sweep = || self.cfg.threshold_sweep();
        match group {
            "prior" => {
                let d = self.native()?.prior_decision()?;
                let mut g = num(&[
                    ("pf_no_repair", d.pf_no_repair),
                    ("cost_no_repair", d.no_repair_cost),
                    ("cost_repair", d.repair_cost),
                    ("cost", d.cost),
                ]);
                g.insert("action".into(), Value::Text(d.action.to_string()));
                Ok(g)
            }
            "model1" => {
                let sol = self.native()?.solve()?;
                let mut g = num(&[("cost", sol.expected_cost), ("voi", sol.voi)]);
                if let Some(b) = boundaries(&sol).last() {
                    g.insert("threshold".into(), Value::Num(*b));
                }
                Ok(g)
            }
            "model2" => {
                let sol = self.native()?.with_threshold(require_at(group, at)?)?.solve()?;
                Ok(num(&[("cost", sol.expected_cost), ("voi", sol.voi)]))
            }
            "model2_sweep" => {
                let best = self.native()?.calibrate_threshold(&sweep()?)?.best;
                Ok(num(&[("best_threshold", best.s_th), ("best_cost", best.cost)]))
            }
            "model3" => {
                let p = self.binary(at)?;
                let sol = p.solve()?;
                let b = boundaries(&sol);
                let mut g = num(&[
                    ("prior_y1", p.condition.prior_y1().unwrap_or(f64::NAN)),
                    ("pf_y1", p.failure.prob(1.0, Action::DoNothing)),
                    ("pf_y0", p.failure.prob(0.0, Action::DoNothing)),
                    ("cost", sol.expected_cost),
                    ("voi", sol.voi),
                ]);
                if let Some(t) = sol.lr_test {
                    g.insert("lr_ratio".into(), Value::Num(t.ratio));
                }
                if let (Some(lo), Some(hi)) = (b.first(), b.last()) {
                    g.insert("boundary_low".into(), Value::Num(*lo));
                    g.insert("boundary_high".into(), Value::Num(*hi));
                    g.insert("threshold".into(), Value::Num(*hi));
                }
                Ok(g)
            }
            "model4" => {
                let s = require_at(group, at)?;
                let p = self.binary(None)?;
                let p4 = p.with_threshold(s)?;
                let NdeSystem::Confusion { matrix } = p4.nde else { unreachable!("threshold gives a confusion matrix") };
                let cost = p4.solve()?.expected_cost;
                let optimum = self.number("model3.cost", None)?;
                Ok(num(&[
                    ("pod", matrix.pod),
                    ("pfa", matrix.pfa),
                    ("cost", cost),
                    ("excess_percent", 100.0 * (cost - optimum) / optimum),
                ]))
            }
            "model4_sweep" => {
                let p = self.binary(None)?;
                let best = p.calibrate_threshold(&sweep()?)?.best;
                let prior = p.prior_decision()?.cost;
                let diag = ScanGrid::linear(21).nodes(crate::quadrature::Interval { lo: 0.0, hi: 1.0 })?;
                let mut max_voi: f64 = 0.0;
                for q in diag {
                    for pt in p.cost_surface(&[q], &[q])? {
                        max_voi = max_voi.max((prior - pt.cost).abs());
                    }
                }
                Ok(num(&[
                    ("best_threshold", best.s_th),
                    ("best_cost", best.cost),
                    ("diagonal_max_abs_voi", max_voi),
                ]))
            }
            "roc" => {
                let p = self.binary(at)?;
                let NdeSystem::Roc { model } = &p.nde else {
                    return Err(Error::invalid("the ROC indices need a continuous signal"));
                };
                let idx = roc_indices(model, 2001)?;
                let youden_cost = p.evaluate_threshold(idx.youden.s_th)?.cost;
                Ok(num(&[
                    ("youden_threshold", idx.youden.s_th),
                    ("youden_cost", youden_cost),
                    ("corner_threshold", idx.closest_to_corner.s_th),
                    ("auc", idx.auc),
                ]))
            }
            "design" => {
                let x = at
                    .or(self.cfg.x_th_condition)
                    .ok_or_else(|| Error::config("x_th_condition", "needed for the design study"))?;
                let rows = experimental_design_report(&self.native()?, x, &self.cfg.designs(), &sweep()?)?;
                let mut g = Group::new();
                for r in rows {
                    g.insert(format!("{}.threshold", r.name), Value::Num(r.s_th));
                    g.insert(format!("{}.perceived_cost", r.name), Value::Num(r.perceived_cost));
                    g.insert(format!("{}.effective_cost", r.name), Value::Num(r.effective_cost));
                }
                Ok(g)
            }
            "twostep_prior" => {
                let prior = self.two_step()?.prior_solution();
                let mut g = num(&[("cost", prior.cost)]);
                g.insert("actions".into(), Value::Text(format!("({}, {})", prior.actions.0, prior.actions.1)));
                Ok(g)
            }
            "twostep_continuous" => {
                let t = self.two_step()?;
                let sol = t.solve_continuous()?;
                let prior = t.prior_solution().cost;
                let mut g = num(&[
                    ("cost", sol.expected_cost),
                    ("voi", prior - sol.expected_cost),
                    ("history_disagreement", history_disagreement(&t, &sol)? as f64),
                ]);
                if let Some(s) = sol.first_step_threshold {
                    g.insert("first_threshold".into(), Value::Num(s));
                }
                Ok(g)
            }
            "twostep_fixed" => {
                let t = self.two_step()?;
                let e = t.evaluate_point(require_at(group, at)?)?;
                Ok(num(&[
                    ("pod", e.policy.pod),
                    ("pfa", e.policy.pfa),
                    ("cost", e.policy.expected_cost),
                    ("voi", t.prior_solution().cost - e.policy.expected_cost),
                ]))
            }
            "twostep_optimized" => {
                let t = self.two_step()?;
                let best = t.optimize_point(&sweep()?)?.best;
                Ok(num(&[
                    ("threshold", best.s_th),
                    ("cost", best.policy.expected_cost),
                    ("voi", t.prior_solution().cost - best.policy.expected_cost),
                ]))
            }
            "twostep_point" => {
                let e = self.two_step()?.evaluate_point(require_at(group, at)?)?;
                let optimized = self.number("twostep_optimized.cost", None)?;
                Ok(num(&[
                    ("memoryless_cost", e.memoryless_cost),
                    ("optimal_cost", e.policy.expected_cost),
                    ("memoryless_minus_optimized", e.memoryless_cost - optimized),
                    ("optimal_minus_optimized", e.policy.expected_cost - optimized),
                ]))
            }
            other => Err(Error::config("quantity", format!("unknown group `{other}`"))),
        }
    }
}

fn boundaries(sol: &OneStepSolution) -> Vec<f64> {
    match &sol.policy {
        Policy::Region { region } => region.boundaries.clone(),
        _ => Vec::new(),
    }
}

/// Number of `(s_1, s_2)` grid pairs, with `a_1 = a_R` at `s_1`, where `a_2`
/// differs from its value at the first such `s_1`.
fn history_disagreement(t: &TwoStepProblem, plan: &crate::decision::ContinuousTwoStep) -> Result<usize> {
    let NdeSystem::Roc { model } = &t.nde else {
        return Ok(0);
    };
    let span = model.signal_span()?;
    let s2_grid = ScanGrid::linear(201).nodes(span)?;
    let s1_grid: Vec<f64> =
        ScanGrid::linear(81).nodes(span)?.into_iter().filter(|&s| plan.first_step.contains(s)).collect();
    let Some(&s_ref) = s1_grid.first() else {
        return Ok(0);
    };
    let reference = t.second_step_region(plan, s_ref)?;
    let mut count = 0;
    for &s1 in &s1_grid[1..] {
        let region = t.second_step_region(plan, s1)?;
        count += s2_grid.iter().filter(|&&s2| region.action(s2) != reference.action(s2)).count();
    }
    Ok(count)
}

/// Evaluates every manifest check for `cfg.name`. `settings` overrides the
/// quadrature settings of the scenario.
pub fn verify(cfg: &ScenarioConfig, manifest: &Manifest, settings: Option<QuadSettings>) -> VerifyReport {
    let mut ev = Evaluator { cfg, settings, cache: HashMap::new() };
    let outcomes = manifest
        .for_scenario(&cfg.name)
        .map(|check| {
            let result = ev.value(&check.quantity, check.at).and_then(|v| judge(check, &v).map(|ok| (v, ok)));
            match result {
                Ok((v, ok)) => Outcome { check: check.clone(), actual: Some(v), passed: ok, error: None },
                Err(e) => Outcome { check: check.clone(), actual: None, passed: false, error: Some(e.to_string()) },
            }
        })
        .collect();
    VerifyReport { scenario: cfg.name.clone(), outcomes }
}
