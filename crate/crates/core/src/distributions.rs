//! Univariate continuous distributions used for condition priors,
//! experimental designs and signal noise.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Interval, QuadSettings};

/// Tail mass beyond which integration switches from the plain finite rule
/// to the mapped semi-infinite rule.
pub const TAIL_MASS: f64 = 1e-12;

/// Standard normal cdf.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        -SQRT_2 * erfc_inv(2.0 * p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Distribution {
    Exponential { mean: f64 },
    /// Parametrized by the mean and standard deviation of `ln X`.
    Lognormal { mu_log: f64, sigma_log: f64 },
    Normal { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Distribution {
    pub fn exponential(mean: f64) -> Result<Self> {
        Distribution::Exponential { mean }.validated()
    }

    pub fn lognormal(mu_log: f64, sigma_log: f64) -> Result<Self> {
        Distribution::Lognormal { mu_log, sigma_log }.validated()
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Distribution::Normal { mu, sigma }.validated()
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Distribution::Uniform { lo, hi }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Distribution::Exponential { mean } => mean.is_finite() && mean > 0.0,
            Distribution::Lognormal { mu_log, sigma_log } => mu_log.is_finite() && sigma_log.is_finite() && sigma_log > 0.0,
            Distribution::Normal { mu, sigma } => mu.is_finite() && sigma.is_finite() && sigma > 0.0,
            Distribution::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::invalid(format!("malformed distribution {self:?}")))
        }
    }

    pub fn support(&self) -> Interval {
        match *self {
            Distribution::Exponential { .. } | Distribution::Lognormal { .. } => Interval::positive(),
            Distribution::Normal { .. } => Interval::real_line(),
            Distribution::Uniform { lo, hi } => Interval { lo, hi },
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x / mean).exp() / mean
                }
            }
            Distribution::Lognormal { mu_log, sigma_log } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_pdf((x.ln() - mu_log) / sigma_log) / (x * sigma_log)
                }
            }
            Distribution::Normal { mu, sigma } => std_normal_pdf((x - mu) / sigma) / sigma,
            Distribution::Uniform { lo, hi } => {
                if x >= lo && x <= hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    /// Log-density; `-inf` outside the support. Stays finite deep in the
    /// normal tails where `pdf` underflows.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Lognormal { mu_log, sigma_log } => {
                if x <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let z = (x.ln() - mu_log) / sigma_log;
                    -0.5 * z * z - 0.5 * (2.0 * PI).ln() - (x * sigma_log).ln()
                }
            }
            Distribution::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                -0.5 * z * z - 0.5 * (2.0 * PI).ln() - sigma.ln()
            }
            _ => self.pdf(x).ln(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            Distribution::Lognormal { mu_log, sigma_log } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - mu_log) / sigma_log)
                }
            }
            Distribution::Normal { mu, sigma } => std_normal_cdf((x - mu) / sigma),
            Distribution::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// Survival function `1 - cdf`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Exponential { mean } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-x / mean).exp()
                }
            }
            Distribution::Lognormal { mu_log, sigma_log } => {
                if x <= 0.0 {
                    1.0
                } else {
                    std_normal_cdf(-(x.ln() - mu_log) / sigma_log)
                }
            }
            Distribution::Normal { mu, sigma } => std_normal_cdf(-(x - mu) / sigma),
            Distribution::Uniform { .. } => 1.0 - self.cdf(x),
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let support = self.support();
        if p <= 0.0 {
            return support.lo;
        }
        if p >= 1.0 {
            return support.hi;
        }
        match *self {
            Distribution::Exponential { mean } => -mean * (-p).ln_1p(),
            Distribution::Lognormal { mu_log, sigma_log } => (mu_log + sigma_log * std_normal_quantile(p)).exp(),
            Distribution::Normal { mu, sigma } => mu + sigma * std_normal_quantile(p),
            Distribution::Uniform { lo, hi } => lo + p * (hi - lo),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Exponential { mean } => mean,
            Distribution::Lognormal { mu_log, sigma_log } => (mu_log + 0.5 * sigma_log * sigma_log).exp(),
            Distribution::Normal { mu, .. } => mu,
            Distribution::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    /// Finite interval holding all but `TAIL_MASS` of the probability on
    /// each infinite side.
    pub fn effective_support(&self) -> Interval {
        let s = self.support();
        let lo = if s.lo.is_finite() { s.lo } else { self.quantile(TAIL_MASS) };
        let hi = if s.hi.is_finite() { s.hi } else { self.quantile(1.0 - TAIL_MASS) };
        Interval { lo, hi }
    }

    /// `∫_range g(x)·pdf(x) dx`, i.e. the partial expectation of `g`.
    ///
    /// The bulk between the tail quantiles is integrated on a finite
    /// interval; whatever lies beyond goes through the mapped rule so no
    /// mass is dropped.
    pub fn expect<G>(&self, g: G, range: Interval, settings: &QuadSettings) -> Result<f64>
    where
        G: Fn(f64) -> f64,
    {
        let Some(range) = range.intersect(&self.support()) else {
            return Ok(0.0);
        };
        let eff = self.effective_support();
        let mut cuts = vec![range.lo];
        for c in [eff.lo, self.quantile(0.5), eff.hi] {
            if c > range.lo && c < range.hi {
                cuts.push(c);
            }
        }
        cuts.push(range.hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let integrand = |x: f64| {
            let w = self.pdf(x);
            if w == 0.0 {
                0.0
            } else {
                g(x) * w
            }
        };
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += integrate(integrand, Interval { lo: w[0], hi: w[1] }, settings)?;
        }
        Ok(total)
    }
}
