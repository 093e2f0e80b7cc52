use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Calibration, DesignRow, OneStepSolution, SurfacePoint};
use crate::report::{fmt_num, Cell, CsvTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

impl NamedValue {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        NamedValue { name: name.into(), value }
    }
}

/// Summary of a solved decision problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub title: String,
    pub prior_action: String,
    pub prior_cost: f64,
    pub posterior_policy: String,
    pub expected_cost: f64,
    pub voi: f64,
    pub net_voi: f64,
    pub optimal_thresholds: Vec<NamedValue>,
    pub notes: Vec<String>,
}

impl PolicyReport {
    pub fn from_one_step(title: impl Into<String>, sol: &OneStepSolution, signal_unit: &str, nde_cost: f64) -> Self {
        let mut thresholds = Vec::new();
        let mut notes = Vec::new();
        if let Some(t) = sol.lr_test {
            if t.ratio.is_finite() {
                thresholds.push(NamedValue::new("likelihood_ratio", t.ratio));
            }
        }
        if let super::Policy::Region { region } = &sol.policy {
            for (k, b) in region.boundaries.iter().enumerate() {
                thresholds.push(NamedValue::new(format!("s_boundary_{}", k + 1), *b));
            }
            if region.boundaries.len() > 1 {
                notes.push(format!(
                    "the repair region has {} boundaries; the likelihood ratio is not monotone in s (unequal class spreads)",
                    region.boundaries.len()
                ));
            }
        }
        let voi = sol.prior.cost - sol.expected_cost;
        PolicyReport {
            title: title.into(),
            prior_action: sol.prior.action.to_string(),
            prior_cost: sol.prior.cost,
            posterior_policy: sol.policy.describe(signal_unit),
            expected_cost: sol.expected_cost,
            voi,
            net_voi: voi - nde_cost,
            optimal_thresholds: thresholds,
            notes,
        }
    }

    pub fn to_text(&self, money_unit: &str) -> String {
        let u = if money_unit.is_empty() { String::new() } else { format!(" {money_unit}") };
        let mut out = String::new();
        let _ = writeln!(out, "== {} ==", self.title);
        let _ = writeln!(out, "prior action:     {}", self.prior_action);
        let _ = writeln!(out, "prior cost C_0:   {}{u}", fmt_num(self.prior_cost));
        let _ = writeln!(out, "posterior policy: {}", self.posterior_policy);
        let _ = writeln!(out, "expected cost C_e: {}{u}", fmt_num(self.expected_cost));
        let _ = writeln!(out, "VoI:              {}{u}", fmt_num(self.voi));
        let _ = writeln!(out, "net VoI:          {}{u}", fmt_num(self.net_voi));
        for t in &self.optimal_thresholds {
            let _ = writeln!(out, "{}: {}", t.name, fmt_num(t.value));
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

pub fn calibration_csv(c: &Calibration) -> CsvTable {
    let mut t = CsvTable::new(&["s_th", "cost", "action_I0", "action_I1"]);
    for e in &c.sweep {
        t.push(vec![e.s_th.into(), e.cost.into(), e.action_i0.label().into(), e.action_i1.label().into()]);
    }
    t
}

pub fn surface_csv(points: &[SurfacePoint]) -> CsvTable {
    let mut t = CsvTable::new(&["pfa", "pod", "cost", "action_I0", "action_I1", "zone"]);
    for p in points {
        t.push(vec![
            p.pfa.into(),
            p.pod.into(),
            p.cost.into(),
            p.action_i0.label().into(),
            p.action_i1.label().into(),
            p.zone().into(),
        ]);
    }
    t
}

pub fn design_csv(rows: &[DesignRow]) -> CsvTable {
    let mut t = CsvTable::new(&["design", "s_th", "perceived_cost", "effective_cost", "action_I0", "action_I1"]);
    for r in rows {
        t.push(vec![
            Cell::Text(r.name.clone()),
            r.s_th.into(),
            r.perceived_cost.into(),
            r.effective_cost.into(),
            r.action_i0.label().into(),
            r.action_i1.label().into(),
        ]);
    }
    t
}
