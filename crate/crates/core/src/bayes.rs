//! Posterior inference over the condition and the failure event.

use serde::{Deserialize, Serialize};

use crate::decision::Action;
use crate::distributions::{std_normal_cdf, Distribution};
use crate::error::{Error, Result};
use crate::quadrature::{Interval, QuadSettings};
use crate::report::CsvTable;

/// Evidence below this is treated as an impossible observation.
pub const MIN_EVIDENCE: f64 = 1e-300;

/// Prior over the condition: a continuous distribution over `X`, or the
/// probability of the damaged class `Y = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionPrior {
    Continuous(Distribution),
    Binary { prior_y1: f64 },
}

impl ConditionPrior {
    pub fn binary(prior_y1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&prior_y1) {
            return Err(Error::invalid("Pr(Y=1) must lie in [0, 1]"));
        }
        Ok(ConditionPrior::Binary { prior_y1 })
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, ConditionPrior::Binary { .. })
    }

    pub fn prior_y1(&self) -> Option<f64> {
        match self {
            ConditionPrior::Binary { prior_y1 } => Some(*prior_y1),
            ConditionPrior::Continuous(_) => None,
        }
    }

    /// `E_Θ[g(Θ)]`. Binary conditions are encoded as `θ ∈ {0.0, 1.0}`.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G, settings: &QuadSettings) -> Result<f64> {
        match self {
            ConditionPrior::Continuous(d) => d.expect(g, d.support(), settings),
            ConditionPrior::Binary { prior_y1 } => {
                let mut v = 0.0;
                if *prior_y1 < 1.0 {
                    v += (1.0 - prior_y1) * g(0.0);
                }
                if *prior_y1 > 0.0 {
                    v += prior_y1 * g(1.0);
                }
                Ok(v)
            }
        }
    }
}

/// `Pr(F | θ)` under one action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureCurve {
    Constant { p: f64 },
    /// `floor + (1 - floor)·Φ((ln x - mu_log) / sigma_log)`; `floor` for `x ≤ 0`.
    LognormalFragility { floor: f64, mu_log: f64, sigma_log: f64 },
    /// Per-class probabilities for a binary condition.
    Binary { y0: f64, y1: f64 },
}

impl FailureCurve {
    pub fn prob(&self, theta: f64) -> f64 {
        match *self {
            FailureCurve::Constant { p } => p,
            FailureCurve::LognormalFragility { floor, mu_log, sigma_log } => {
                if theta <= 0.0 {
                    floor
                } else {
                    floor + (1.0 - floor) * std_normal_cdf((theta.ln() - mu_log) / sigma_log)
                }
            }
            FailureCurve::Binary { y0, y1 } => {
                if theta > 0.5 {
                    y1
                } else {
                    y0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let in_unit = |p: f64| (0.0..=1.0).contains(&p);
        let ok = match *self {
            FailureCurve::Constant { p } => in_unit(p),
            FailureCurve::LognormalFragility { floor, mu_log, sigma_log } => {
                in_unit(floor) && mu_log.is_finite() && sigma_log > 0.0
            }
            FailureCurve::Binary { y0, y1 } => in_unit(y0) && in_unit(y1),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("malformed failure curve {self:?}")))
        }
    }
}

/// `Pr(F | θ, a)` for the two actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureModel {
    pub no_repair: FailureCurve,
    pub repair: FailureCurve,
}

impl FailureModel {
    pub fn new(no_repair: FailureCurve, repair: FailureCurve) -> Result<Self> {
        no_repair.validate()?;
        repair.validate()?;
        Ok(FailureModel { no_repair, repair })
    }

    pub fn curve(&self, action: Action) -> &FailureCurve {
        match action {
            Action::DoNothing => &self.no_repair,
            Action::Repair => &self.repair,
        }
    }

    pub fn prob(&self, theta: f64, action: Action) -> f64 {
        self.curve(action).prob(theta)
    }

    /// Failure probabilities per condition class `{Y=1} = {X > x_th}`,
    /// averaged over the prior so that binary and continuous analyses
    /// share the same marginal failure probability.
    pub fn binarize(&self, prior: &Distribution, x_th: f64, settings: &QuadSettings) -> Result<FailureModel> {
        let support = prior.support();
        let below = Interval { lo: support.lo.min(x_th), hi: x_th };
        let above = Interval { lo: x_th, hi: support.hi.max(x_th) };
        let (f_lo, f_hi) = (prior.cdf(x_th), prior.sf(x_th));
        if f_lo <= 0.0 || f_hi <= 0.0 {
            return Err(Error::DegenerateDesign { cdf: f_lo });
        }
        let class = |curve: &FailureCurve| -> Result<FailureCurve> {
            Ok(FailureCurve::Binary {
                y0: prior.expect(|x| curve.prob(x), below, settings)? / f_lo,
                y1: prior.expect(|x| curve.prob(x), above, settings)? / f_hi,
            })
        };
        Ok(FailureModel { no_repair: class(&self.no_repair)?, repair: class(&self.repair)? })
    }
}

/// `p(z) = E_Θ[L(Θ; z)]`.
pub fn evidence<L: Fn(f64) -> f64>(prior: &ConditionPrior, likelihood: L, settings: &QuadSettings) -> Result<f64> {
    let e = prior.expect(likelihood, settings)?;
    if e.is_nan() || e < MIN_EVIDENCE {
        return Err(Error::ZeroEvidence { evidence: e });
    }
    Ok(e)
}

/// Posterior `p(θ|z) = L(θ; z) p(θ) / p(z)`, kept as the unnormalized
/// likelihood plus the evidence.
pub struct Posterior<'a> {
    pub prior: ConditionPrior,
    likelihood: Box<dyn Fn(f64) -> f64 + 'a>,
    pub evidence: f64,
}

impl std::fmt::Debug for Posterior<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Posterior").field("prior", &self.prior).field("evidence", &self.evidence).finish()
    }
}

impl<'a> Posterior<'a> {
    /// Posterior density for a continuous condition, posterior mass of the
    /// class for a binary one.
    pub fn density(&self, theta: f64) -> f64 {
        let prior = match &self.prior {
            ConditionPrior::Continuous(d) => d.pdf(theta),
            ConditionPrior::Binary { prior_y1 } => {
                if theta > 0.5 {
                    *prior_y1
                } else {
                    1.0 - prior_y1
                }
            }
        };
        if prior == 0.0 {
            return 0.0;
        }
        (self.likelihood)(theta) * prior / self.evidence
    }

    /// `Pr(Y = 1 | z)` for a binary condition.
    pub fn prob_y1(&self) -> Option<f64> {
        match self.prior {
            ConditionPrior::Binary { .. } => Some(self.density(1.0)),
            ConditionPrior::Continuous(_) => None,
        }
    }

    /// `E_{Θ|z}[g(Θ)]`.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G, settings: &QuadSettings) -> Result<f64> {
        Ok(self.prior.expect(|t| g(t) * (self.likelihood)(t), settings)? / self.evidence)
    }

    pub fn tabulate(&self, grid: &[f64]) -> CsvTable {
        let mut t = CsvTable::new(&["theta", "density"]);
        for &x in grid {
            t.push(vec![x.into(), self.density(x).into()]);
        }
        t
    }
}

pub fn posterior<'a, L>(prior: &ConditionPrior, likelihood: L, settings: &QuadSettings) -> Result<Posterior<'a>>
where
    L: Fn(f64) -> f64 + 'a,
{
    let e = evidence(prior, &likelihood, settings)?;
    Ok(Posterior { prior: *prior, likelihood: Box::new(likelihood), evidence: e })
}

/// `Pr(F | z, a) = E_Θ[Pr(F|Θ, a) L(Θ; z)] / p(z)`.
pub fn posterior_failure<L>(
    prior: &ConditionPrior,
    likelihood: L,
    failure: &FailureModel,
    action: Action,
    settings: &QuadSettings,
) -> Result<f64>
where
    L: Fn(f64) -> f64,
{
    let e = evidence(prior, &likelihood, settings)?;
    let curve = failure.curve(action);
    Ok(prior.expect(|t| curve.prob(t) * likelihood(t), settings)? / e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn hypothetical_failure() -> FailureModel {
        FailureModel::new(
            FailureCurve::LognormalFragility { floor: 1e-5, mu_log: 0.1, sigma_log: 1.0 },
            FailureCurve::Constant { p: 1e-4 },
        )
        .unwrap()
    }

    fn lognormal_signal(s: f64, x: f64) -> f64 {
        let mu = (2.0 * x.powi(3) + x * x + 1e-2 * (-0.5f64).exp()).ln();
        Distribution::Lognormal { mu_log: mu, sigma_log: 1.0 }.pdf(s)
    }

    #[test]
    fn constant_likelihood_evidence() {
        let p = ConditionPrior::binary(0.05).unwrap();
        let e = evidence(&p, |_| 0.5, &QuadSettings::default()).unwrap();
        assert!((e - 0.5).abs() < 1e-15);
    }

    #[test]
    fn halfcell_evidence_two_terms() {
        let p = ConditionPrior::binary(0.05).unwrap();
        let (d0, d1) = (Distribution::normal(-0.207, 0.0804).unwrap(), Distribution::normal(-0.354, 0.08).unwrap());
        for s in [-0.5, -0.3, -0.2, 0.0] {
            let e = evidence(&p, |y| if y > 0.5 { d1.pdf(s) } else { d0.pdf(s) }, &QuadSettings::default()).unwrap();
            let oracle = 0.95 * d0.pdf(s) + 0.05 * d1.pdf(s);
            assert!((e - oracle).abs() < 1e-14 * oracle.max(1.0));
        }
    }

    #[test]
    fn impossible_observation() {
        let p = ConditionPrior::binary(0.3).unwrap();
        assert!(matches!(evidence(&p, |_| 0.0, &QuadSettings::default()), Err(Error::ZeroEvidence { .. })));
    }

    #[test]
    fn uninformative_posterior_is_prior() {
        let d = Distribution::exponential(0.03).unwrap();
        let p = ConditionPrior::Continuous(d);
        let post = posterior(&p, |_| 2.0, &QuadSettings::default()).unwrap();
        for x in [0.0, 0.01, 0.1, 0.3] {
            assert!((post.density(x) - d.pdf(x)).abs() < 1e-9 * d.pdf(x).max(1.0));
        }
    }

    #[test]
    fn binary_bayes_rule() {
        let (pod, pfa, p1) = (0.82, 0.37, 0.036);
        let prior = ConditionPrior::binary(p1).unwrap();
        let post = posterior(&prior, |y| if y > 0.5 { pod } else { pfa }, &QuadSettings::default()).unwrap();
        let oracle = pod * p1 / (pod * p1 + pfa * (1.0 - p1));
        assert!((post.prob_y1().unwrap() - oracle).abs() < 1e-15);
    }

    #[test]
    fn continuous_posterior_normalizes() {
        let d = Distribution::exponential(0.03).unwrap();
        let prior = ConditionPrior::Continuous(d);
        let s = QuadSettings::default().with_abs_tol(1e-300);
        let post = posterior(&prior, |x| lognormal_signal(0.03, x), &s).unwrap();
        let mass = integrate(|x| post.density(x), Interval::positive(), &s).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn repair_failure_is_observation_free() {
        let prior = ConditionPrior::Continuous(Distribution::exponential(0.03).unwrap());
        let s = QuadSettings::default().with_abs_tol(1e-300);
        for z in [0.003, 0.03, 0.3] {
            let p = posterior_failure(&prior, |x| lognormal_signal(z, x), &hypothetical_failure(), Action::Repair, &s).unwrap();
            assert!((p - 1e-4).abs() < 1e-12);
        }
    }

    #[test]
    fn prior_failure_probability() {
        let prior = ConditionPrior::Continuous(Distribution::exponential(0.03).unwrap());
        let p = posterior_failure(&prior, |_| 1.0, &hypothetical_failure(), Action::DoNothing, &QuadSettings::default())
            .unwrap();
        assert!((p - 1.2e-3).abs() < 0.05 * 1.2e-3, "{p}");
    }

    #[test]
    fn binary_failure_two_term_sum() {
        let d = Distribution::exponential(0.03).unwrap();
        let s = QuadSettings::default();
        let bin = hypothetical_failure().binarize(&d, 0.1, &s).unwrap();
        let FailureCurve::Binary { y0, y1 } = bin.no_repair else { panic!() };
        assert!((y1 - 1.7e-2).abs() < 0.02 * 1.7e-2 + 1e-3);
        assert!((y0 - 5.8e-4).abs() < 0.02 * 5.8e-4 + 1e-5);

        let (pod, pfa) = (0.82, 0.37);
        let p1 = d.sf(0.1);
        let prior = ConditionPrior::binary(p1).unwrap();
        let lik = |y: f64| if y > 0.5 { pod } else { pfa };
        let got = posterior_failure(&prior, lik, &bin, Action::DoNothing, &s).unwrap();
        let post_y1 = pod * p1 / (pod * p1 + pfa * (1.0 - p1));
        let oracle = y1 * post_y1 + y0 * (1.0 - post_y1);
        assert!((got - oracle).abs() < 1e-15);
        // Class averages reproduce the marginal failure probability.
        let marginal = prior.expect(|y| bin.prob(y, Action::DoNothing), &s).unwrap();
        let direct = d.expect(|x| hypothetical_failure().prob(x, Action::DoNothing), d.support(), &s).unwrap();
        assert!((marginal - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn marginalization_recovers_prior() {
        // E_S[Pr(Y=1|S)] = Pr(Y=1) on a discretized signal grid.
        let p1 = 0.05;
        let prior = ConditionPrior::binary(p1).unwrap();
        let (d0, d1) = (Distribution::normal(-0.207, 0.0804).unwrap(), Distribution::normal(-0.354, 0.08).unwrap());
        let n = 4000;
        let (lo, hi) = (-1.0, 0.6);
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let s = lo + (k as f64 + 0.5) * h;
            let lik = move |y: f64| if y > 0.5 { d1.pdf(s) } else { d0.pdf(s) };
            if let Ok(post) = posterior(&prior, lik, &QuadSettings::default()) {
                acc += post.prob_y1().unwrap() * post.evidence * h;
            }
        }
        assert!((acc - p1).abs() < 1e-4);
    }
}
