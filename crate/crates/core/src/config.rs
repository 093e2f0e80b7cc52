//! JSON scenario files.
//!
//! Field names carry their unit: `_money` for costs, `_signal` for signal
//! values, `_condition` for condition values.

use serde::{Deserialize, Serialize};

use crate::bayes::{ConditionPrior, FailureCurve, FailureModel};
use crate::decision::{Costs, NdeSystem, OneStepProblem, SignalSearch, Transition, TwoStepProblem};
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::nde_models::{BaseModel, ConfusionMatrix, Polynomial, RocModel, SignalFamily, SignalOrientation};
use crate::quadrature::{Interval, Scale, ScanGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NdeSpec {
    /// Signal given condition: `family` with median `Σ c_k x^k` and
    /// constant `scale` (log scale for lognormal).
    BaseModel {
        family: SignalFamily,
        median_poly: Vec<f64>,
        scale: f64,
        /// Defaults to the support of the condition prior.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        condition_support: Option<[f64; 2]>,
    },
    Roc { lik_y0: Distribution, lik_y1: Distribution },
    Confusion { pod: f64, pfa: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedDesign {
    pub name: String,
    pub distribution: Distribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub lo_signal: f64,
    pub hi_signal: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SearchSpec {
    pub fn to_search(&self, field: &str) -> Result<SignalSearch> {
        let bracket = Interval::new(self.lo_signal, self.hi_signal).map_err(|e| Error::config(field, e.to_string()))?;
        SignalSearch::new(bracket, ScanGrid { points: self.points, scale: self.scale })
            .map_err(|e| Error::config(field, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStepSpec {
    pub prior_y1: f64,
    /// `transition[y1'][y2] = Pr(Y_2 = y2 | Y_1' = y1')`.
    pub transition: [[f64; 2]; 2],
    #[serde(rename = "c_R_money")]
    pub c_r_money: f64,
    #[serde(rename = "c_F_money")]
    pub c_f_money: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_s_th_signal: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memoryless_s_th_signal: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub money_unit: String,
    #[serde(default)]
    pub signal_unit: String,
    /// Prior of the continuous condition; required with a base model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_prior: Option<Distribution>,
    /// `Pr(Y = 1)` for a binary condition without a base model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_y1: Option<f64>,
    pub nde: NdeSpec,
    #[serde(default)]
    pub orientation: SignalOrientation,
    pub failure: FailureModel,
    #[serde(rename = "c_R_money")]
    pub c_r_money: f64,
    #[serde(rename = "c_F_money")]
    pub c_f_money: f64,
    #[serde(default)]
    pub nde_cost_money: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_th_condition: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_th_signal: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub experimental_designs: Vec<NamedDesign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_search: Option<SearchSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_sweep: Option<SearchSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_step: Option<TwoStepSpec>,
}

fn field_err(field: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::config(field, other.to_string()),
    }
}

fn probability(field: &str, p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::config(field, format!("{p} is not a probability")))
    }
}

fn money(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::config(field, format!("{v} is not a non-negative amount")))
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde_json reports the unknown or missing field inside backticks.
            let field = msg.split('`').nth(1).unwrap_or("<document>").to_string();
            Error::config(field, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        money("c_R_money", self.c_r_money)?;
        money("c_F_money", self.c_f_money)?;
        money("nde_cost_money", self.nde_cost_money)?;
        if let Some(d) = self.condition_prior {
            d.validated().map_err(field_err("condition_prior"))?;
        }
        if let Some(p) = self.prior_y1 {
            probability("prior_y1", p)?;
        }
        FailureModel::new(self.failure.no_repair, self.failure.repair).map_err(field_err("failure"))?;
        match &self.nde {
            NdeSpec::BaseModel { .. } => {
                if self.condition_prior.is_none() {
                    return Err(Error::config("condition_prior", "required with a base model"));
                }
                self.base_model()?;
            }
            NdeSpec::Roc { lik_y0, lik_y1 } => {
                lik_y0.validated().map_err(field_err("nde.lik_y0"))?;
                lik_y1.validated().map_err(field_err("nde.lik_y1"))?;
            }
            NdeSpec::Confusion { pod, pfa } => {
                probability("nde.pod", *pod)?;
                probability("nde.pfa", *pfa)?;
            }
        }
        if !matches!(self.nde, NdeSpec::BaseModel { .. }) {
            if self.prior_y1.is_none() {
                return Err(Error::config("prior_y1", "required without a base model"));
            }
            for (name, c) in [("failure.no_repair", self.failure.no_repair), ("failure.repair", self.failure.repair)] {
                if matches!(c, FailureCurve::LognormalFragility { .. }) {
                    return Err(Error::config(name, "a binary condition needs per-class failure probabilities"));
                }
            }
        }
        for (k, d) in self.experimental_designs.iter().enumerate() {
            let field = format!("experimental_designs[{k}].distribution");
            d.distribution.validated().map_err(field_err(&field))?;
            let Some(x_th) = self.x_th_condition else {
                return Err(Error::config("x_th_condition", "required with experimental designs"));
            };
            let f = d.distribution.cdf(x_th);
            if !(crate::nde_models::DEGENERATE_TOL..=1.0 - crate::nde_models::DEGENERATE_TOL).contains(&f) {
                return Err(Error::config(field, format!("degenerate at x_th (cdf {f})")));
            }
        }
        if let Some(x) = self.x_th_condition {
            if !x.is_finite() {
                return Err(Error::config("x_th_condition", "must be finite"));
            }
            if let Some(prior) = self.condition_prior {
                let f = prior.cdf(x);
                if !(crate::nde_models::DEGENERATE_TOL..=1.0 - crate::nde_models::DEGENERATE_TOL).contains(&f) {
                    return Err(Error::config("x_th_condition", format!("prior is degenerate there (cdf {f})")));
                }
            }
        }
        if let Some(s) = self.s_th_signal {
            if !s.is_finite() {
                return Err(Error::config("s_th_signal", "must be finite"));
            }
        }
        if let Some(s) = &self.boundary_search {
            s.to_search("boundary_search")?;
        }
        if let Some(s) = &self.threshold_sweep {
            s.to_search("threshold_sweep")?;
        }
        if let Some(t) = &self.two_step {
            probability("two_step.prior_y1", t.prior_y1)?;
            money("two_step.c_R_money", t.c_r_money)?;
            money("two_step.c_F_money", t.c_f_money)?;
            for row in t.transition {
                for p in row {
                    probability("two_step.transition", p)?;
                }
            }
            Transition::from_table(t.transition).map_err(field_err("two_step.transition"))?;
            if matches!(self.nde, NdeSpec::BaseModel { .. }) {
                return Err(Error::config("two_step", "needs an ROC model or a confusion matrix"));
            }
            if let Some(n) = t.belief_points {
                if n < crate::decision::MIN_BELIEF_POINTS {
                    return Err(Error::config(
                        "two_step.belief_points",
                        format!("at least {} points", crate::decision::MIN_BELIEF_POINTS),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn base_model(&self) -> Result<BaseModel> {
        let NdeSpec::BaseModel { family, median_poly, scale, condition_support } = &self.nde else {
            return Err(Error::config("nde", "not a base model"));
        };
        let support = match condition_support {
            Some([lo, hi]) => Interval::new(*lo, *hi).map_err(field_err("nde.condition_support"))?,
            None => self.condition_prior.map(|d| d.support()).unwrap_or(Interval::real_line()),
        };
        BaseModel::new(*family, Polynomial(median_poly.clone()), *scale, support).map_err(field_err("nde"))
    }

    pub fn costs(&self) -> Result<Costs> {
        Ok(Costs::new(self.c_r_money, self.c_f_money)?.with_inspection(self.nde_cost_money))
    }

    pub fn nde_system(&self) -> Result<NdeSystem> {
        Ok(match &self.nde {
            NdeSpec::BaseModel { .. } => NdeSystem::Base { model: self.base_model()?, orientation: self.orientation },
            NdeSpec::Roc { lik_y0, lik_y1 } => NdeSystem::Roc {
                model: RocModel::given(*lik_y0, *lik_y1, self.prior_y1.unwrap_or(0.5), self.orientation)?,
            },
            NdeSpec::Confusion { pod, pfa } => NdeSystem::Confusion { matrix: ConfusionMatrix::new(*pod, *pfa)? },
        })
    }

    pub fn boundary_search(&self) -> Result<Option<SignalSearch>> {
        self.boundary_search.map(|s| s.to_search("boundary_search")).transpose()
    }

    /// The configured threshold sweep, or a default spanning the bulk of
    /// the signal.
    pub fn threshold_sweep(&self) -> Result<SignalSearch> {
        if let Some(s) = &self.threshold_sweep {
            return s.to_search("threshold_sweep");
        }
        let p = self.one_step_problem()?;
        let p = match (&p.nde, self.x_th_condition) {
            (NdeSystem::Base { .. }, Some(x)) => p.with_condition_threshold(x, None)?,
            _ => p,
        };
        match &p.nde {
            NdeSystem::Roc { model } => {
                let span = model.signal_span()?;
                let positive = model.signal_support().lo >= 0.0;
                crate::decision::default_sweep(span, positive, 401)
            }
            _ => Err(Error::config("threshold_sweep", "required for this model")),
        }
    }

    /// The problem in its native model: base (1), ROC (3) or confusion (4).
    pub fn one_step_problem(&self) -> Result<OneStepProblem> {
        let condition = match &self.nde {
            NdeSpec::BaseModel { .. } => ConditionPrior::Continuous(self.condition_prior.expect("validated")),
            _ => ConditionPrior::binary(self.prior_y1.expect("validated"))?,
        };
        let mut p = OneStepProblem::new(condition, self.nde_system()?, self.failure, self.costs()?)?;
        p.search = self.boundary_search()?;
        Ok(p)
    }

    pub fn two_step_problem(&self) -> Result<TwoStepProblem> {
        let Some(t) = &self.two_step else {
            return Err(Error::config("two_step", "missing"));
        };
        let costs = Costs::new(t.c_r_money, t.c_f_money)?;
        let mut p = TwoStepProblem::new(t.prior_y1, Transition::from_table(t.transition)?, [costs, costs], self.nde_system()?)?;
        p.nde_cost = self.nde_cost_money;
        p.search = self.boundary_search()?;
        if let Some(n) = t.belief_points {
            p.belief_points = n;
        }
        Ok(p)
    }

    pub fn designs(&self) -> Vec<(String, Distribution)> {
        self.experimental_designs.iter().map(|d| (d.name.clone(), d.distribution)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::builtin;

    #[test]
    fn builtins_round_trip() {
        for name in ["hypothetical", "halfcell"] {
            let cfg = builtin(name).unwrap();
            let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(cfg, back);
        }
    }

    #[test]
    fn unit_suffixes_in_json() {
        let text = builtin("halfcell").unwrap().to_json();
        for key in ["\"c_R_money\"", "\"c_F_money\"", "\"s_th_signal\"", "\"lo_signal\""] {
            assert!(text.contains(key), "{key}");
        }
    }

    #[test]
    fn negative_cost_names_field() {
        let mut cfg = builtin("hypothetical").unwrap();
        cfg.c_f_money = -1.0;
        match cfg.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "c_F_money"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn transition_rows_must_sum_to_one() {
        let mut cfg = builtin("halfcell").unwrap();
        cfg.two_step.as_mut().unwrap().transition = [[0.9, 0.05], [0.0, 1.0]];
        match cfg.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "two_step.transition"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_reported() {
        let mut v: serde_json::Value = serde_json::from_str(&builtin("halfcell").unwrap().to_json()).unwrap();
        v["c_X_money"] = serde_json::json!(3.0);
        match ScenarioConfig::from_json(&v.to_string()) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "c_X_money"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_design_is_rejected() {
        let mut cfg = builtin("hypothetical").unwrap();
        cfg.experimental_designs[2].distribution = Distribution::uniform(0.2, 0.5).unwrap();
        match cfg.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "experimental_designs[2].distribution"),
            other => panic!("{other:?}"),
        }
    }
}
