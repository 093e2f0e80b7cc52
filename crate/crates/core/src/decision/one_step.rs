use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Action, Costs, SignalSearch};
use crate::bayes::{ConditionPrior, FailureCurve, FailureModel, MIN_EVIDENCE};
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::nde_models::{
    confusion_from_pod_curve, interval_mass, pod_curve_from_base, roc_from_base, roc_point, BaseModel,
    ConfusionMatrix, PodCurve, RocModel, RocProvenance, SignalOrientation,
};
use crate::quadrature::{find_roots, integrate_with_breaks, minimize_scalar, Interval, QuadSettings, Scale, ScanGrid};

/// The NDE system the decision is based on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NdeSystem {
    Base { model: BaseModel, orientation: SignalOrientation },
    Pod { curve: PodCurve },
    Roc { model: RocModel },
    Confusion { matrix: ConfusionMatrix },
}

impl NdeSystem {
    pub fn has_continuous_signal(&self) -> bool {
        matches!(self, NdeSystem::Base { .. } | NdeSystem::Roc { .. })
    }

    pub fn needs_continuous_condition(&self) -> bool {
        matches!(self, NdeSystem::Base { .. } | NdeSystem::Pod { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observation {
    Signal(f64),
    Indication(bool),
}

/// Unnormalized conditional expected costs of both actions given one
/// observation, `w_a(z) = E_Θ[L(Θ; z)·(c_A(a) + c_F·Pr(F|Θ, a))]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub no_repair: f64,
    pub repair: f64,
    pub evidence: f64,
}

impl Weights {
    pub fn action(&self) -> Action {
        Action::cheaper(self.no_repair, self.repair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorDecision {
    pub action: Action,
    pub cost: f64,
    pub no_repair_cost: f64,
    pub repair_cost: f64,
    pub pf_no_repair: f64,
    pub pf_repair: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioSide {
    Above,
    Below,
    Always,
    Never,
}

/// Likelihood-ratio form of the decision rule for a binary condition:
/// repair when `L(Y=1; z) / L(Y=0; z)` lies on `repair_when` of `ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrTest {
    pub ratio: f64,
    pub repair_when: RatioSide,
}

impl LrTest {
    pub fn decide(&self, l0: f64, l1: f64) -> Action {
        let repair = match self.repair_when {
            RatioSide::Above => l1 > self.ratio * l0,
            RatioSide::Below => l1 < self.ratio * l0,
            RatioSide::Always => true,
            RatioSide::Never => false,
        };
        if repair {
            Action::Repair
        } else {
            Action::DoNothing
        }
    }
}

/// A union of disjoint signal intervals on which `a_R` is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RepairRegion {
    pub intervals: Vec<Interval>,
    /// Every sign change of the decision margin, ascending.
    pub boundaries: Vec<f64>,
}

impl RepairRegion {
    pub fn contains(&self, s: f64) -> bool {
        self.intervals.iter().any(|i| s > i.lo && s < i.hi)
    }

    pub fn action(&self, s: f64) -> Action {
        if self.contains(s) {
            Action::Repair
        } else {
            Action::DoNothing
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    Constant { action: Action },
    Indication { on_i0: Action, on_i1: Action },
    Region { region: RepairRegion },
}

impl Policy {
    pub fn describe(&self, signal_unit: &str) -> String {
        match self {
            Policy::Constant { action } => format!("{action} for every outcome"),
            Policy::Indication { on_i0, on_i1 } => format!("I=0: {on_i0}, I=1: {on_i1}"),
            Policy::Region { region } => {
                if region.intervals.is_empty() {
                    return "a_0 for every signal".into();
                }
                let parts: Vec<String> = region
                    .intervals
                    .iter()
                    .map(|i| format!("[{}, {}]", crate::report::fmt_num(i.lo), crate::report::fmt_num(i.hi)))
                    .collect();
                let unit = if signal_unit.is_empty() { String::new() } else { format!(" {signal_unit}") };
                format!("a_R for s in {}{unit}, a_0 elsewhere", parts.join(" U "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneStepSolution {
    pub prior: PriorDecision,
    pub policy: Policy,
    pub expected_cost: f64,
    pub voi: f64,
    pub net_voi: f64,
    pub lr_test: Option<LrTest>,
}

/// Outcome of fixing the signal threshold at `s_th`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEval {
    pub s_th: f64,
    pub cost: f64,
    pub action_i0: Action,
    pub action_i1: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub best: ThresholdEval,
    pub sweep: Vec<ThresholdEval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub pfa: f64,
    pub pod: f64,
    pub cost: f64,
    pub action_i0: Action,
    pub action_i1: Action,
}

impl SurfacePoint {
    /// Both outcomes lead to the same action, so the inspection is worthless.
    pub fn voi_zero(&self) -> bool {
        self.action_i0 == self.action_i1
    }

    pub fn inverted(&self) -> bool {
        self.pod < self.pfa
    }

    pub fn zone(&self) -> &'static str {
        if self.voi_zero() {
            "prior_action"
        } else if self.inverted() {
            "inverted"
        } else {
            "informative"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub name: String,
    pub s_th: f64,
    pub perceived_cost: f64,
    pub effective_cost: f64,
    pub action_i0: Action,
    pub action_i1: Action,
}

/// A one-step repair decision informed by one NDE outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneStepProblem {
    pub condition: ConditionPrior,
    pub nde: NdeSystem,
    pub failure: FailureModel,
    pub costs: Costs,
    /// Where decision boundaries are searched for continuous signals.
    pub search: Option<SignalSearch>,
    pub settings: QuadSettings,
}

impl OneStepProblem {
    pub fn new(condition: ConditionPrior, nde: NdeSystem, failure: FailureModel, costs: Costs) -> Result<Self> {
        let p = OneStepProblem { condition, nde, failure, costs, search: None, settings: QuadSettings::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_search(mut self, search: SignalSearch) -> Self {
        self.search = Some(search);
        self
    }

    pub fn with_settings(mut self, settings: QuadSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_nde(&self, nde: NdeSystem) -> Result<Self> {
        let p = OneStepProblem { nde, ..self.clone() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.costs.validate()?;
        self.settings.validate()?;
        let binary = self.condition.is_binary();
        if self.nde.needs_continuous_condition() == binary {
            return Err(Error::invalid(if binary {
                "base and PoD models need a continuous condition prior"
            } else {
                "ROC and confusion models need a binary condition prior"
            }));
        }
        if binary {
            for c in [self.failure.no_repair, self.failure.repair] {
                if matches!(c, FailureCurve::LognormalFragility { .. }) {
                    return Err(Error::invalid("a binary condition needs per-class failure probabilities"));
                }
            }
        }
        Ok(())
    }

    /// `c_A(a) + c_F·Pr(F | θ, a)`.
    pub fn cost(&self, theta: f64, a: Action) -> f64 {
        self.costs.action_cost(a) + self.costs.failure * self.failure.prob(theta, a)
    }

    pub fn prior_decision(&self) -> Result<PriorDecision> {
        let s = &self.settings;
        let pf0 = self.condition.expect(|t| self.failure.prob(t, Action::DoNothing), s)?;
        let pfr = self.condition.expect(|t| self.failure.prob(t, Action::Repair), s)?;
        let c0 = self.costs.failure * pf0;
        let cr = self.costs.repair + self.costs.failure * pfr;
        let action = Action::cheaper(c0, cr);
        Ok(PriorDecision {
            action,
            cost: c0.min(cr),
            no_repair_cost: c0,
            repair_cost: cr,
            pf_no_repair: pf0,
            pf_repair: pfr,
        })
    }

    fn weights_with<L: Fn(f64) -> f64>(&self, lik: L, settings: &QuadSettings) -> Result<Weights> {
        let c = &self.condition;
        Ok(Weights {
            evidence: c.expect(&lik, settings)?,
            no_repair: c.expect(|t| lik(t) * self.cost(t, Action::DoNothing), settings)?,
            repair: c.expect(|t| lik(t) * self.cost(t, Action::Repair), settings)?,
        })
    }

    /// `(L(Y=0; z), L(Y=1; z))` for binary-condition models.
    fn class_likelihoods(&self, z: Observation) -> Result<(f64, f64)> {
        match (&self.nde, z) {
            (NdeSystem::Roc { model }, Observation::Signal(s)) => {
                Ok((model.lik_y0.density(s)?, model.lik_y1.density(s)?))
            }
            (NdeSystem::Confusion { matrix }, Observation::Indication(i)) => {
                Ok((matrix.likelihood(false, i), matrix.likelihood(true, i)))
            }
            _ => Err(Error::invalid("observation does not match the NDE model")),
        }
    }

    pub fn weights(&self, z: Observation) -> Result<Weights> {
        match (&self.nde, z) {
            (NdeSystem::Base { model, .. }, Observation::Signal(s)) => {
                self.weights_with(|x| model.density(s, x), &self.settings.with_abs_tol(1e-300))
            }
            (NdeSystem::Pod { curve }, Observation::Indication(i)) => self.weights_with(
                |x| {
                    let p = curve.pod(x);
                    if i {
                        p
                    } else {
                        1.0 - p
                    }
                },
                &self.settings,
            ),
            _ => {
                let (l0, l1) = self.class_likelihoods(z)?;
                self.weights_with(|y| if y > 0.5 { l1 } else { l0 }, &self.settings)
            }
        }
    }

    /// `ln w_0(s) − ln w_R(s)`; positive where repair is optimal.
    ///
    /// Given class densities are combined in log space, so the margin
    /// stays finite far into the tails where the densities underflow.
    pub fn log_margin(&self, s: f64) -> Result<f64> {
        match &self.nde {
            NdeSystem::Roc { model } => {
                let (ln0, ln1) = (model.lik_y0.ln_density(s)?, model.lik_y1.ln_density(s)?);
                let ConditionPrior::Binary { prior_y1: p } = self.condition else {
                    unreachable!("validated binary condition")
                };
                let ln_w = |a: Action| {
                    log_sum_exp(
                        (1.0 - p).ln() + ln0 + self.cost(0.0, a).ln(),
                        p.ln() + ln1 + self.cost(1.0, a).ln(),
                    )
                };
                Ok(ln_w(Action::DoNothing) - ln_w(Action::Repair))
            }
            NdeSystem::Base { .. } => {
                let w = self.weights(Observation::Signal(s))?;
                Ok(w.no_repair.ln() - w.repair.ln())
            }
            _ => Err(Error::invalid("decision margin needs a continuous signal")),
        }
    }

    pub fn optimal_action(&self, z: Observation) -> Result<Action> {
        if let (NdeSystem::Roc { model }, Observation::Signal(s)) = (&self.nde, z) {
            let (ln0, ln1) = (model.lik_y0.ln_density(s)?, model.lik_y1.ln_density(s)?);
            if ln0 == f64::NEG_INFINITY && ln1 == f64::NEG_INFINITY {
                return Err(Error::ZeroEvidence { evidence: 0.0 });
            }
            return Ok(if self.log_margin(s)? > 0.0 { Action::Repair } else { Action::DoNothing });
        }
        let w = self.weights(z)?;
        if w.evidence.is_nan() || w.evidence < MIN_EVIDENCE {
            return Err(Error::ZeroEvidence { evidence: w.evidence });
        }
        Ok(w.action())
    }

    /// The decision rule as a likelihood-ratio test, derived from the
    /// direct cost comparison `p·L1·Δ1 + (1−p)·L0·Δ0 > 0` with
    /// `Δy = cost(y, a_0) − cost(y, a_R)`.
    pub fn lr_test(&self) -> Option<LrTest> {
        let ConditionPrior::Binary { prior_y1: p } = self.condition else {
            return None;
        };
        let delta = |y: f64| self.cost(y, Action::DoNothing) - self.cost(y, Action::Repair);
        let (a, b) = (p * delta(1.0), (1.0 - p) * delta(0.0));
        Some(if a > 0.0 {
            LrTest { ratio: -b / a, repair_when: RatioSide::Above }
        } else if a < 0.0 {
            LrTest { ratio: -b / a, repair_when: RatioSide::Below }
        } else if b > 0.0 {
            LrTest { ratio: f64::NAN, repair_when: RatioSide::Always }
        } else {
            LrTest { ratio: f64::NAN, repair_when: RatioSide::Never }
        })
    }

    pub fn signal_support(&self) -> Result<Interval> {
        match &self.nde {
            NdeSystem::Base { model, .. } => Ok(model.signal_support()),
            NdeSystem::Roc { model } => Ok(model.signal_support()),
            _ => Err(Error::invalid("binary observations have no signal support")),
        }
    }

    /// The configured boundary search, or one spanning the bulk of the
    /// signal distribution.
    pub fn boundary_search(&self) -> Result<SignalSearch> {
        if let Some(s) = self.search {
            return Ok(s);
        }
        let span = match (&self.nde, &self.condition) {
            (NdeSystem::Roc { model }, _) => model.signal_span()?,
            (NdeSystem::Base { model, .. }, ConditionPrior::Continuous(prior)) => {
                let (x0, x1) = (prior.quantile(1e-6), prior.quantile(1.0 - 1e-6));
                let lo = model.conditional(x0).quantile(1e-6).min(model.conditional(x1).quantile(1e-6));
                let hi = model.conditional(x0).quantile(1.0 - 1e-6).max(model.conditional(x1).quantile(1.0 - 1e-6));
                Interval::new(lo, hi)?
            }
            _ => return Err(Error::invalid("binary observations have no decision boundaries")),
        };
        let positive = self.signal_support()?.lo >= 0.0;
        if positive {
            SignalSearch::new(Interval::new(span.lo / 100.0, span.hi * 100.0)?, ScanGrid::log(1201))
        } else {
            let w = span.width();
            SignalSearch::new(Interval::new(span.lo - 3.0 * w, span.hi + 3.0 * w)?, ScanGrid::linear(1201))
        }
    }

    /// Repair intervals on the signal axis for a continuous observation.
    pub fn continuous_policy(&self) -> Result<RepairRegion> {
        let search = self.boundary_search()?;
        let margin = |s: f64| self.log_margin(s).unwrap_or(f64::NAN);
        let roots = find_roots(margin, search.bracket, search.grid);
        let support = self.signal_support()?;
        let nodes = search.grid.nodes(search.bracket)?;

        let mut edges = vec![support.lo];
        edges.extend(roots.iter().copied().filter(|r| *r > support.lo && *r < support.hi));
        edges.push(support.hi);

        let mut intervals: Vec<Interval> = Vec::new();
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let probe = nodes
                .iter()
                .filter(|&&s| s > lo && s < hi)
                .map(|&s| margin(s))
                .find(|m| m.is_finite())
                .or_else(|| {
                    let mid = if lo.is_finite() && hi.is_finite() {
                        if search.grid.scale == Scale::Log && lo > 0.0 {
                            (lo * hi).sqrt()
                        } else {
                            0.5 * (lo + hi)
                        }
                    } else {
                        return None;
                    };
                    Some(margin(mid)).filter(|m| m.is_finite())
                });
            if probe.is_some_and(|m| m > 0.0) {
                match intervals.last_mut() {
                    Some(last) if last.hi == lo => last.hi = hi,
                    _ => intervals.push(Interval { lo, hi }),
                }
            }
        }
        Ok(RepairRegion { intervals, boundaries: roots })
    }

    fn indication_action(&self, i: bool, prior: Action) -> Result<Action> {
        match self.optimal_action(Observation::Indication(i)) {
            Ok(a) => Ok(a),
            Err(Error::ZeroEvidence { .. }) => Ok(prior),
            Err(e) => Err(e),
        }
    }

    pub fn optimal_policy(&self) -> Result<Policy> {
        if self.nde.has_continuous_signal() {
            return Ok(Policy::Region { region: self.continuous_policy()? });
        }
        let prior = self.prior_decision()?.action;
        Ok(Policy::Indication {
            on_i0: self.indication_action(false, prior)?,
            on_i1: self.indication_action(true, prior)?,
        })
    }

    /// Expected total cost of following `policy`, obtained by integrating
    /// over the condition the probability that the policy repairs.
    pub fn preposterior_cost(&self, policy: &Policy) -> Result<f64> {
        let s = &self.settings;
        let blend = |t: f64, p_repair: f64| {
            let c0 = self.cost(t, Action::DoNothing);
            c0 + p_repair * (self.cost(t, Action::Repair) - c0)
        };
        match policy {
            Policy::Constant { action } => self.condition.expect(|t| self.cost(t, *action), s),
            Policy::Indication { on_i0, on_i1 } => {
                let p_repair = |p1: f64| {
                    let mut r = 0.0;
                    if *on_i1 == Action::Repair {
                        r += p1;
                    }
                    if *on_i0 == Action::Repair {
                        r += 1.0 - p1;
                    }
                    r
                };
                match &self.nde {
                    NdeSystem::Pod { curve } => self.condition.expect(|x| blend(x, p_repair(curve.pod(x))), s),
                    NdeSystem::Confusion { matrix } => self.condition.expect(
                        |y| blend(y, p_repair(if y > 0.5 { matrix.pod } else { matrix.pfa })),
                        s,
                    ),
                    _ => Err(Error::invalid("indication policy needs a binary observation")),
                }
            }
            Policy::Region { region } => match &self.nde {
                NdeSystem::Base { model, .. } => self.condition.expect(
                    |x| {
                        let d = model.conditional(x);
                        let m: f64 = region.intervals.iter().map(|i| interval_mass(&d, i.lo, i.hi)).sum();
                        blend(x, m.min(1.0))
                    },
                    s,
                ),
                NdeSystem::Roc { model } => {
                    let mut m = [0.0; 2];
                    for i in &region.intervals {
                        m[0] += model.lik_y0.interval_mass(i.lo, i.hi)?;
                        m[1] += model.lik_y1.interval_mass(i.lo, i.hi)?;
                    }
                    self.condition.expect(|y| blend(y, if y > 0.5 { m[1] } else { m[0] }.min(1.0)), s)
                }
                _ => Err(Error::invalid("region policy needs a continuous signal")),
            },
        }
    }

    /// Optimal preposterior cost computed the other way round: the sum or
    /// integral over outcomes of `min(w_0, w_R)`.
    pub fn preposterior_cost_direct(&self) -> Result<f64> {
        if !self.nde.has_continuous_signal() {
            let mut total = 0.0;
            for i in [false, true] {
                let w = self.weights(Observation::Indication(i))?;
                total += w.no_repair.min(w.repair);
            }
            return Ok(total);
        }
        let region = self.continuous_policy()?;
        let mut breaks = region.boundaries.clone();
        match (&self.nde, &self.condition) {
            (NdeSystem::Roc { model }, _) => {
                let span = model.signal_span()?;
                breaks.extend([span.lo, span.hi]);
            }
            (NdeSystem::Base { model, .. }, ConditionPrior::Continuous(prior)) => {
                for q in [1e-6, 0.5, 1.0 - 1e-6] {
                    let d = model.conditional(prior.quantile(q));
                    breaks.extend([d.quantile(1e-6), d.quantile(0.5), d.quantile(1.0 - 1e-6)]);
                }
            }
            _ => {}
        }
        let f = |s: f64| match self.weights(Observation::Signal(s)) {
            Ok(w) => w.no_repair.min(w.repair),
            Err(_) => f64::NAN,
        };
        integrate_with_breaks(f, self.signal_support()?, &breaks, &self.settings)
    }

    pub fn solve(&self) -> Result<OneStepSolution> {
        let prior = self.prior_decision()?;
        let policy = self.optimal_policy()?;
        let expected_cost = self.preposterior_cost(&policy)?;
        let voi = prior.cost - expected_cost;
        Ok(OneStepSolution {
            prior,
            policy,
            expected_cost,
            voi,
            net_voi: voi - self.costs.inspection,
            lr_test: self.lr_test(),
        })
    }

    /// Fixes the signal threshold: base → PoD curve, ROC → confusion matrix.
    pub fn with_threshold(&self, s_th: f64) -> Result<OneStepProblem> {
        let nde = match &self.nde {
            NdeSystem::Base { model, orientation } => {
                NdeSystem::Pod { curve: pod_curve_from_base(model, s_th, *orientation) }
            }
            NdeSystem::Roc { model } => NdeSystem::Confusion { matrix: roc_point(model, s_th)? },
            _ => return Err(Error::invalid("a signal threshold needs a continuous signal")),
        };
        self.with_nde(nde)
    }

    /// Fixes the condition threshold: base → ROC, PoD curve → confusion
    /// matrix. The class likelihoods come from `design` (the prior when
    /// `None`); the class prior and failure probabilities always come from
    /// the prior.
    pub fn with_condition_threshold(&self, x_th: f64, design: Option<&Distribution>) -> Result<OneStepProblem> {
        let ConditionPrior::Continuous(prior) = self.condition else {
            return Err(Error::invalid("a condition threshold needs a continuous condition"));
        };
        let design = design.unwrap_or(&prior);
        let nde = match &self.nde {
            NdeSystem::Base { model, orientation } => NdeSystem::Roc {
                model: roc_from_base(model, x_th, design, &prior, *orientation, &self.settings)?,
            },
            NdeSystem::Pod { curve } => {
                NdeSystem::Confusion { matrix: confusion_from_pod_curve(curve, x_th, design, &self.settings)? }
            }
            _ => unreachable!("validated continuous condition"),
        };
        let p = OneStepProblem {
            condition: ConditionPrior::binary(prior.sf(x_th))?,
            nde,
            failure: self.failure.binarize(&prior, x_th, &self.settings)?,
            ..self.clone()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn evaluate_threshold(&self, s_th: f64) -> Result<ThresholdEval> {
        let p = self.with_threshold(s_th)?;
        let policy = p.optimal_policy()?;
        let cost = p.preposterior_cost(&policy)?;
        let Policy::Indication { on_i0, on_i1 } = policy else {
            unreachable!("binary observation gives an indication policy")
        };
        Ok(ThresholdEval { s_th, cost, action_i0: on_i0, action_i1: on_i1 })
    }

    /// Sweeps the signal threshold, then refines around the best node.
    pub fn calibrate_threshold(&self, sweep: &SignalSearch) -> Result<Calibration> {
        let nodes = sweep.grid.nodes(sweep.bracket)?;
        let evals = nodes.par_iter().map(|&s| self.evaluate_threshold(s)).collect::<Result<Vec<_>>>()?;
        let (k, _) = evals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost))
            .expect("sweep is non-empty");
        let mut best = evals[k];
        let (a, b) = (nodes[k.saturating_sub(1)], nodes[(k + 1).min(nodes.len() - 1)]);
        if a < b {
            let f = |s: f64| self.evaluate_threshold(s).map(|e| e.cost).unwrap_or(f64::NAN);
            let m = minimize_scalar(f, Interval { lo: a, hi: b }, ScanGrid { points: 5, scale: sweep.grid.scale })?;
            if m.min < best.cost {
                best = self.evaluate_threshold(m.argmin)?;
            }
        }
        Ok(Calibration { best, sweep: evals })
    }

    /// Optimal cost and actions over a `(PFA, PoD)` grid.
    pub fn cost_surface(&self, pfa_grid: &[f64], pod_grid: &[f64]) -> Result<Vec<SurfacePoint>> {
        if !self.condition.is_binary() {
            return Err(Error::invalid("the cost surface needs a binary condition"));
        }
        let cells: Vec<(f64, f64)> =
            pod_grid.iter().flat_map(|&pod| pfa_grid.iter().map(move |&pfa| (pfa, pod))).collect();
        cells
            .par_iter()
            .map(|&(pfa, pod)| {
                let p = self.with_nde(NdeSystem::Confusion { matrix: ConfusionMatrix::new(pod, pfa)? })?;
                let policy = p.optimal_policy()?;
                let cost = p.preposterior_cost(&policy)?;
                let Policy::Indication { on_i0, on_i1 } = policy else { unreachable!() };
                Ok(SurfacePoint { pfa, pod, cost, action_i0: on_i0, action_i1: on_i1 })
            })
            .collect()
    }

    /// Flags a derived ROC that was learned on a population other than the
    /// one it is applied to.
    pub fn design_mismatch(&self) -> bool {
        match &self.nde {
            NdeSystem::Roc { model } => match &model.provenance {
                RocProvenance::Derived { experimental_design, application_prior, .. } => {
                    experimental_design != application_prior
                }
                RocProvenance::Given => false,
            },
            _ => false,
        }
    }
}

/// Perceived and effective costs of a threshold calibrated on ROC models
/// learned from each experimental design.
///
/// `problem` must hold a base model. For each design the optimal threshold
/// and its cost are computed from that design's ROC (perceived); the same
/// threshold and actions are then evaluated on the ROC learned from the
/// application prior itself (effective).
pub fn experimental_design_report(
    problem: &OneStepProblem,
    x_th: f64,
    designs: &[(String, Distribution)],
    sweep: &SignalSearch,
) -> Result<Vec<DesignRow>> {
    if !matches!(problem.nde, NdeSystem::Base { .. }) {
        return Err(Error::invalid("the experimental-design study needs a base model"));
    }
    let reference = problem.with_condition_threshold(x_th, None)?;
    designs
        .par_iter()
        .map(|(name, d)| {
            let perceived = problem.with_condition_threshold(x_th, Some(d))?.calibrate_threshold(sweep)?.best;
            let policy = Policy::Indication { on_i0: perceived.action_i0, on_i1: perceived.action_i1 };
            let effective = reference.with_threshold(perceived.s_th)?.preposterior_cost(&policy)?;
            Ok(DesignRow {
                name: name.clone(),
                s_th: perceived.s_th,
                perceived_cost: perceived.cost,
                effective_cost: effective,
                action_i0: perceived.action_i0,
                action_i1: perceived.action_i1,
            })
        })
        .collect()
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Default sweep for thresholds: log-spaced on positive signals, linear
/// otherwise.
pub fn default_sweep(span: Interval, positive: bool, points: usize) -> Result<SignalSearch> {
    let grid = if positive { ScanGrid::log(points) } else { ScanGrid::linear(points) };
    SignalSearch::new(span, grid)
}
