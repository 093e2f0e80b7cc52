//! Two inspections in sequence, solved by backward induction on the belief
//! `Pr(Y = 1 | history)`.
//!
//! At step `i` the component is inspected and then repaired or left alone.
//! Repair resets the condition (`Y_i' = 0`); otherwise `Y_i' = Y_i`. The
//! condition at the next step follows the transition `Pr(Y_2 | Y_1')`.
//! Each step costs `c_R` on repair, `c_F` if the component is left damaged.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Action, Costs, NamedValue, NdeSystem, OneStepProblem, PolicyReport, RepairRegion, SignalSearch};
use crate::bayes::{ConditionPrior, FailureCurve, FailureModel};
use crate::error::{Error, Result};
use crate::nde_models::{roc_point, ConfusionMatrix, RocModel};
use crate::quadrature::{find_roots, integrate_with_breaks, minimize_scalar, Interval, QuadSettings, ScanGrid};
use crate::report::{Cell, CsvTable};

/// Smallest belief grid used for the continuous second-step value.
pub const MIN_BELIEF_POINTS: usize = 513;

/// `Pr(Y_2 = 1 | Y_1' = y)` for `y = 0, 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from_0: f64,
    pub from_1: f64,
}

impl Transition {
    pub fn new(from_0: f64, from_1: f64) -> Result<Self> {
        if !((0.0..=1.0).contains(&from_0) && (0.0..=1.0).contains(&from_1)) {
            return Err(Error::invalid("transition probabilities must lie in [0, 1]"));
        }
        Ok(Transition { from_0, from_1 })
    }

    pub fn identity() -> Self {
        Transition { from_0: 0.0, from_1: 1.0 }
    }

    /// From the full table `table[y1'][y2]`; each row must sum to 1.
    pub fn from_table(table: [[f64; 2]; 2]) -> Result<Self> {
        for row in table {
            if (row[0] + row[1] - 1.0).abs() > 1e-12 {
                return Err(Error::invalid("each transition row must sum to 1"));
            }
        }
        Transition::new(table[0][1], table[1][1])
    }

    pub fn table(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.from_0, self.from_0], [1.0 - self.from_1, self.from_1]]
    }

    /// Belief about `Y_2` given the belief about `Y_1'`.
    pub fn next(&self, b: f64) -> f64 {
        b * self.from_1 + (1.0 - b) * self.from_0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepProblem {
    pub prior_y1: f64,
    pub transition: Transition,
    pub step_costs: [Costs; 2],
    /// ROC model or confusion matrix, applied at both steps.
    pub nde: NdeSystem,
    #[serde(default)]
    pub nde_cost: f64,
    pub search: Option<SignalSearch>,
    pub belief_points: usize,
    pub settings: QuadSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepPrior {
    pub actions: (Action, Action),
    pub cost: f64,
    /// Every open-loop action pair with its expected cost.
    pub table: Vec<(Action, Action, f64)>,
}

/// Piecewise-linear second-step value over the belief.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefValue {
    pub beliefs: Vec<f64>,
    pub values: Vec<f64>,
}

impl BeliefValue {
    pub fn eval(&self, b: f64) -> f64 {
        let b = b.clamp(0.0, 1.0);
        let k = self.beliefs.partition_point(|&x| x <= b);
        if k == 0 {
            return self.values[0];
        }
        if k >= self.beliefs.len() {
            return *self.values.last().expect("non-empty grid");
        }
        let (x0, x1) = (self.beliefs[k - 1], self.beliefs[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (b - x0) / (x1 - x0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousTwoStep {
    pub expected_cost: f64,
    /// Where `a_1 = a_R` on `S_1`.
    pub first_step: RepairRegion,
    /// The first-step boundary inside the bulk of the signal distribution.
    pub first_step_threshold: Option<f64>,
    pub value: BeliefValue,
}

/// Actions of a two-step policy on binary indications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointPolicy {
    pub pod: f64,
    pub pfa: f64,
    pub expected_cost: f64,
    /// `a_1` per `I_1`.
    pub first: [Action; 2],
    /// `a_2` per `(I_1, I_2)`.
    pub second: [[Action; 2]; 2],
}

impl FixedPointPolicy {
    /// Compact label: `a_1(I_1=0) a_1(I_1=1) / a_2(00) a_2(01) a_2(10) a_2(11)`,
    /// each as `0` or `R`.
    pub fn code(&self) -> String {
        let c = |a: Action| if a == Action::Repair { 'R' } else { '0' };
        let mut s = String::new();
        s.extend(self.first.iter().map(|&a| c(a)));
        s.push('/');
        s.extend(self.second.iter().flatten().map(|&a| c(a)));
        s
    }

    /// Repair exactly on a positive indication, at both steps.
    pub fn is_memoryless(&self) -> bool {
        let cb = [Action::DoNothing, Action::Repair];
        self.first == cb && self.second == [cb, cb]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEval {
    pub s_th: f64,
    pub policy: FixedPointPolicy,
    pub memoryless_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSweep {
    pub best: PointEval,
    pub sweep: Vec<PointEval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TwoStepKind {
    Continuous,
    FixedPoint { pod: f64, pfa: f64 },
    OptimizePoint { sweep: SignalSearch },
}

impl TwoStepProblem {
    pub fn new(prior_y1: f64, transition: Transition, step_costs: [Costs; 2], nde: NdeSystem) -> Result<Self> {
        let p = TwoStepProblem {
            prior_y1,
            transition,
            step_costs,
            nde,
            nde_cost: 0.0,
            search: None,
            belief_points: MIN_BELIEF_POINTS,
            settings: QuadSettings::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_search(mut self, search: SignalSearch) -> Self {
        self.search = Some(search);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.prior_y1) {
            return Err(Error::invalid("Pr(Y_1=1) must lie in [0, 1]"));
        }
        Transition::new(self.transition.from_0, self.transition.from_1)?;
        for c in &self.step_costs {
            c.validate()?;
        }
        if !matches!(self.nde, NdeSystem::Roc { .. } | NdeSystem::Confusion { .. }) {
            return Err(Error::invalid("the two-step problem needs an ROC model or a confusion matrix"));
        }
        if self.belief_points < MIN_BELIEF_POINTS {
            return Err(Error::invalid(format!("belief grid needs at least {MIN_BELIEF_POINTS} points")));
        }
        Ok(())
    }

    fn roc(&self) -> Result<&RocModel> {
        match &self.nde {
            NdeSystem::Roc { model } => Ok(model),
            _ => Err(Error::invalid("this solution needs an ROC model")),
        }
    }

    /// The single-step problem faced at step `k` (0 or 1) with belief `b`
    /// and `nde`.
    pub fn step_problem(&self, k: usize, b: f64, nde: NdeSystem) -> Result<OneStepProblem> {
        let failure = FailureModel::new(FailureCurve::Binary { y0: 0.0, y1: 1.0 }, FailureCurve::Constant { p: 0.0 })?;
        let mut p = OneStepProblem::new(ConditionPrior::binary(b.clamp(0.0, 1.0))?, nde, failure, self.step_costs[k])?
            .with_settings(self.settings);
        p.search = self.search;
        Ok(p)
    }

    fn step_cost(&self, k: usize, b: f64, a: Action) -> (f64, f64) {
        let c = &self.step_costs[k];
        match a {
            Action::Repair => (c.repair, 0.0),
            Action::DoNothing => (c.failure * b, b),
        }
    }

    /// Best open-loop action pair.
    pub fn prior_solution(&self) -> TwoStepPrior {
        let mut table = Vec::with_capacity(4);
        let mut best: Option<(Action, Action, f64)> = None;
        for a1 in Action::ALL {
            for a2 in Action::ALL {
                let (c1, b1) = self.step_cost(0, self.prior_y1, a1);
                let (c2, _) = self.step_cost(1, self.transition.next(b1), a2);
                let c = c1 + c2;
                table.push((a1, a2, c));
                if best.map_or(true, |(_, _, v)| c < v) {
                    best = Some((a1, a2, c));
                }
            }
        }
        let (a1, a2, cost) = best.expect("four candidates");
        TwoStepPrior { actions: (a1, a2), cost, table }
    }

    fn second_value(&self, b: f64) -> Result<f64> {
        Ok(self.step_problem(1, b, self.nde.clone())?.solve()?.expected_cost)
    }

    /// Second-step optimal cost on an adaptive belief grid: uniform nodes,
    /// then midpoints wherever linear interpolation is off.
    pub fn second_step_value(&self) -> Result<BeliefValue> {
        let n = self.belief_points.max(MIN_BELIEF_POINTS);
        let mut beliefs: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        let mut values = beliefs.par_iter().map(|&b| self.second_value(b)).collect::<Result<Vec<_>>>()?;
        let scale = self.step_costs[1].failure.max(self.step_costs[1].repair).max(1e-300);
        for _ in 0..3 {
            let mids: Vec<f64> = beliefs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            let mid_values = mids.par_iter().map(|&b| self.second_value(b)).collect::<Result<Vec<_>>>()?;
            let mut nb = Vec::with_capacity(beliefs.len() * 2);
            let mut nv = Vec::with_capacity(beliefs.len() * 2);
            let mut refined = false;
            for k in 0..mids.len() {
                nb.push(beliefs[k]);
                nv.push(values[k]);
                let interp = 0.5 * (values[k] + values[k + 1]);
                if (mid_values[k] - interp).abs() > 1e-7 * scale {
                    nb.push(mids[k]);
                    nv.push(mid_values[k]);
                    refined = true;
                }
            }
            nb.push(*beliefs.last().expect("non-empty"));
            nv.push(*values.last().expect("non-empty"));
            beliefs = nb;
            values = nv;
            if !refined {
                break;
            }
        }
        Ok(BeliefValue { beliefs, values })
    }

    /// `Pr(Y_1 = 1 | S_1 = s)`, computed from log densities.
    fn first_belief(&self, roc: &RocModel, s: f64) -> Result<f64> {
        let p = self.prior_y1;
        let a = (1.0 - p).ln() + roc.lik_y0.ln_density(s)?;
        let b = p.ln() + roc.lik_y1.ln_density(s)?;
        if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
            return Err(Error::ZeroEvidence { evidence: 0.0 });
        }
        Ok(1.0 / (1.0 + (a - b).exp()))
    }

    /// Per-evidence costs `(repair, do nothing)` of the first action given
    /// the first-step belief, with optimal play afterwards.
    fn first_costs(&self, value: &BeliefValue, b1: f64) -> (f64, f64) {
        let c = &self.step_costs[0];
        let rep = c.repair + value.eval(self.transition.next(0.0));
        let nor = c.failure * b1 + value.eval(self.transition.next(b1));
        (rep, nor)
    }

    pub fn solve_continuous(&self) -> Result<ContinuousTwoStep> {
        let roc = self.roc()?;
        let value = self.second_step_value()?;
        let step = self.step_problem(0, self.prior_y1, self.nde.clone())?;
        let search = step.boundary_search()?;
        let margin = |s: f64| match self.first_belief(roc, s) {
            Ok(b) => {
                let (rep, nor) = self.first_costs(&value, b);
                nor - rep
            }
            Err(_) => f64::NAN,
        };
        let roots = find_roots(margin, search.bracket, search.grid);
        let support = roc.signal_support();
        let span = roc.signal_span()?;

        let mut edges = vec![support.lo];
        edges.extend(roots.iter().copied());
        edges.push(support.hi);
        let nodes = search.grid.nodes(search.bracket)?;
        let mut intervals: Vec<Interval> = Vec::new();
        for w in edges.windows(2) {
            let probe = nodes.iter().filter(|&&s| s > w[0] && s < w[1]).map(|&s| margin(s)).find(|m| m.is_finite());
            if probe.is_some_and(|m| m > 0.0) {
                intervals.push(Interval { lo: w[0], hi: w[1] });
            }
        }
        let first_step = RepairRegion { intervals, boundaries: roots.clone() };

        // The ROC carries its own class prior; the first step uses `prior_y1`.
        let first_roc = roc.with_prior(self.prior_y1);
        let integrand = |s: f64| {
            let ev = match first_roc.evidence(s) {
                Ok(e) if e > 0.0 => e,
                _ => return 0.0,
            };
            match self.first_belief(roc, s) {
                Ok(b) => {
                    let (rep, nor) = self.first_costs(&value, b);
                    ev * rep.min(nor)
                }
                Err(_) => 0.0,
            }
        };
        let mut breaks = roots.clone();
        breaks.extend([span.lo, span.hi]);
        for y in [false, true] {
            breaks.push(roc.likelihood(y).quantile(0.5)?);
        }
        let settings = QuadSettings { max_subdivisions: 20_000, ..self.settings.with_rel_tol(1e-8) };
        let expected_cost = integrate_with_breaks(integrand, support, &breaks, &settings)?;

        let first_step_threshold = roots.iter().rev().copied().find(|r| span.contains(*r));
        Ok(ContinuousTwoStep { expected_cost, first_step, first_step_threshold, value })
    }

    /// Repair region for `S_2` after observing `s1` and acting optimally.
    pub fn second_step_region(&self, plan: &ContinuousTwoStep, s1: f64) -> Result<RepairRegion> {
        let roc = self.roc()?;
        let b_after = if plan.first_step.contains(s1) { 0.0 } else { self.first_belief(roc, s1)? };
        self.step_problem(1, self.transition.next(b_after), self.nde.clone())?.continuous_policy()
    }

    pub fn second_step_action(&self, plan: &ContinuousTwoStep, s1: f64, s2: f64) -> Result<Action> {
        Ok(self.second_step_region(plan, s1)?.action(s2))
    }

    /// Exact backward induction over the four indication histories.
    pub fn solve_fixed_point(&self, cm: ConfusionMatrix) -> FixedPointPolicy {
        let p = self.prior_y1;
        let (c1, c2) = (&self.step_costs[0], &self.step_costs[1]);
        let lik = |y: bool, i: bool| cm.likelihood(y, i);
        // Second-step cost and actions for a belief about Y_2.
        let second = |b: f64| -> (f64, [Action; 2]) {
            let mut cost = 0.0;
            let mut acts = [Action::DoNothing; 2];
            for (k, i) in [false, true].into_iter().enumerate() {
                let nor = c2.failure * b * lik(true, i);
                let rep = c2.repair * (b * lik(true, i) + (1.0 - b) * lik(false, i));
                acts[k] = Action::cheaper(nor, rep);
                cost += nor.min(rep);
            }
            (cost, acts)
        };
        let mut total = 0.0;
        let mut first = [Action::DoNothing; 2];
        let mut after = [[Action::DoNothing; 2]; 2];
        for (k, i) in [false, true].into_iter().enumerate() {
            let pi = p * lik(true, i) + (1.0 - p) * lik(false, i);
            let (v_rep, acts_rep) = second(self.transition.next(0.0));
            if pi <= 0.0 {
                after[k] = acts_rep;
                continue;
            }
            let b = p * lik(true, i) / pi;
            let (v_nor, acts_nor) = second(self.transition.next(b));
            let rep = (c1.repair + v_rep) * pi;
            let nor = c1.failure * p * lik(true, i) + v_nor * pi;
            first[k] = Action::cheaper(nor, rep);
            after[k] = if first[k] == Action::Repair { acts_rep } else { acts_nor };
            total += rep.min(nor);
        }
        FixedPointPolicy { pod: cm.pod, pfa: cm.pfa, expected_cost: total, first, second: after }
    }

    /// Cost of repairing exactly on `I_i = 1` at both steps, history ignored.
    pub fn memoryless_policy_cost(&self, cm: ConfusionMatrix) -> f64 {
        let (c1, c2) = (&self.step_costs[0], &self.step_costs[1]);
        let py = |p1: f64, y: bool| if y { p1 } else { 1.0 - p1 };
        let mut total = 0.0;
        for y1 in [false, true] {
            for i1 in [false, true] {
                let w = py(self.prior_y1, y1) * cm.likelihood(y1, i1);
                let y1p = y1 && !i1;
                total += w * (if i1 { c1.repair } else { 0.0 } + if y1p { c1.failure } else { 0.0 });
                let p2 = self.transition.next(if y1p { 1.0 } else { 0.0 });
                for y2 in [false, true] {
                    for i2 in [false, true] {
                        let w2 = w * py(p2, y2) * cm.likelihood(y2, i2);
                        let step = if i2 {
                            c2.repair
                        } else if y2 {
                            c2.failure
                        } else {
                            0.0
                        };
                        total += w2 * step;
                    }
                }
            }
        }
        total
    }

    pub fn evaluate_point(&self, s_th: f64) -> Result<PointEval> {
        let cm = roc_point(self.roc()?, s_th)?;
        Ok(PointEval { s_th, policy: self.solve_fixed_point(cm), memoryless_cost: self.memoryless_policy_cost(cm) })
    }

    /// Sweeps the operating point along the ROC curve.
    pub fn optimize_point(&self, sweep: &SignalSearch) -> Result<PointSweep> {
        let nodes = sweep.grid.nodes(sweep.bracket)?;
        let evals = nodes.par_iter().map(|&s| self.evaluate_point(s)).collect::<Result<Vec<_>>>()?;
        let (k, _) = evals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.policy.expected_cost.total_cmp(&b.1.policy.expected_cost))
            .expect("sweep is non-empty");
        let mut best = evals[k];
        let (a, b) = (nodes[k.saturating_sub(1)], nodes[(k + 1).min(nodes.len() - 1)]);
        if a < b {
            let f = |s: f64| self.evaluate_point(s).map(|e| e.policy.expected_cost).unwrap_or(f64::NAN);
            let m = minimize_scalar(f, Interval { lo: a, hi: b }, ScanGrid { points: 5, scale: sweep.grid.scale })?;
            if m.min < best.policy.expected_cost {
                best = self.evaluate_point(m.argmin)?;
            }
        }
        Ok(PointSweep { best, sweep: evals })
    }

    /// Optimal fixed-point cost and policy code over a `(PFA, PoD)` grid.
    pub fn fixed_point_surface(&self, pfa_grid: &[f64], pod_grid: &[f64]) -> Result<Vec<FixedPointPolicy>> {
        let cells: Vec<(f64, f64)> =
            pod_grid.iter().flat_map(|&pod| pfa_grid.iter().map(move |&pfa| (pfa, pod))).collect();
        cells.par_iter().map(|&(pfa, pod)| Ok(self.solve_fixed_point(ConfusionMatrix::new(pod, pfa)?))).collect()
    }

    pub fn solve(&self, kind: TwoStepKind) -> Result<PolicyReport> {
        let prior = self.prior_solution();
        let prior_action = format!("({}, {})", prior.actions.0, prior.actions.1);
        let (title, policy, cost, thresholds, notes) = match kind {
            TwoStepKind::Continuous => {
                let sol = self.solve_continuous()?;
                let mut t: Vec<NamedValue> = sol
                    .first_step
                    .boundaries
                    .iter()
                    .enumerate()
                    .map(|(k, b)| NamedValue::new(format!("s1_boundary_{}", k + 1), *b))
                    .collect();
                if let Some(s) = sol.first_step_threshold {
                    t.push(NamedValue::new("s_th1", s));
                }
                let desc = format!(
                    "a_1: {}; a_2 by threshold on S_2 given the belief after step 1",
                    super::Policy::Region { region: sol.first_step.clone() }.describe("")
                );
                let notes = vec![format!("second-step value on {} belief points", sol.value.beliefs.len())];
                ("two-step, continuous signal", desc, sol.expected_cost, t, notes)
            }
            TwoStepKind::FixedPoint { pod, pfa } => {
                let pol = self.solve_fixed_point(ConfusionMatrix::new(pod, pfa)?);
                let desc = format!("policy code {} (a_1 per I_1 / a_2 per I_1 I_2)", pol.code());
                ("two-step, fixed operating point", desc, pol.expected_cost, Vec::new(), Vec::new())
            }
            TwoStepKind::OptimizePoint { sweep } => {
                let best = self.optimize_point(&sweep)?.best;
                let desc = format!("policy code {} (a_1 per I_1 / a_2 per I_1 I_2)", best.policy.code());
                let t = vec![
                    NamedValue::new("s_th", best.s_th),
                    NamedValue::new("pod", best.policy.pod),
                    NamedValue::new("pfa", best.policy.pfa),
                ];
                ("two-step, optimized operating point", desc, best.policy.expected_cost, t, Vec::new())
            }
        };
        let voi = prior.cost - cost;
        Ok(PolicyReport {
            title: title.into(),
            prior_action,
            prior_cost: prior.cost,
            posterior_policy: policy,
            expected_cost: cost,
            voi,
            net_voi: voi - self.nde_cost,
            optimal_thresholds: thresholds,
            notes,
        })
    }
}

pub fn point_sweep_csv(s: &PointSweep) -> CsvTable {
    let mut t = CsvTable::new(&["s_th", "pod", "pfa", "cost", "memoryless_cost", "policy"]);
    for e in &s.sweep {
        t.push(vec![
            e.s_th.into(),
            e.policy.pod.into(),
            e.policy.pfa.into(),
            e.policy.expected_cost.into(),
            e.memoryless_cost.into(),
            Cell::Text(e.policy.code()),
        ]);
    }
    t
}

pub fn fixed_point_surface_csv(points: &[FixedPointPolicy]) -> CsvTable {
    let mut t = CsvTable::new(&["pfa", "pod", "cost", "policy"]);
    for p in points {
        t.push(vec![p.pfa.into(), p.pod.into(), p.expected_cost.into(), Cell::Text(p.code())]);
    }
    t
}
