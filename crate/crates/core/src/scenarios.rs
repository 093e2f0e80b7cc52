//! The two built-in scenarios and a brute-force discretized oracle for
//! expected costs.

use crate::bayes::{FailureCurve, FailureModel};
use crate::config::{NamedDesign, NdeSpec, ScenarioConfig, SearchSpec, TwoStepSpec};
use crate::decision::Action;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::nde_models::{interval_mass, BaseModel, RocModel, SignalFamily, SignalOrientation};
use crate::quadrature::Scale;

pub const BUILTIN_NAMES: [&str; 2] = ["hypothetical", "halfcell"];

pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    match name {
        "hypothetical" => Ok(hypothetical()),
        "halfcell" => Ok(halfcell()),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

/// Crack-like condition with an exponential prior, lognormal signal and a
/// lognormal fragility curve.
fn hypothetical() -> ScenarioConfig {
    ScenarioConfig {
        name: "hypothetical".into(),
        money_unit: String::new(),
        signal_unit: String::new(),
        condition_prior: Some(Distribution::Exponential { mean: 0.03 }),
        prior_y1: None,
        nde: NdeSpec::BaseModel {
            family: SignalFamily::Lognormal,
            median_poly: vec![1e-2 * (-0.5f64).exp(), 0.0, 1.0, 2.0],
            scale: 1.0,
            condition_support: None,
        },
        orientation: SignalOrientation::SignalAbove,
        failure: FailureModel {
            no_repair: FailureCurve::LognormalFragility { floor: 1e-5, mu_log: 0.1, sigma_log: 1.0 },
            repair: FailureCurve::Constant { p: 1e-4 },
        },
        c_r_money: 1.0,
        c_f_money: 800.0,
        nde_cost_money: 0.0,
        x_th_condition: Some(0.1),
        s_th_signal: Some(0.03),
        experimental_designs: vec![
            NamedDesign { name: "ED1".into(), distribution: Distribution::Exponential { mean: 0.03 } },
            NamedDesign { name: "ED2".into(), distribution: Distribution::Lognormal { mu_log: -2.5, sigma_log: 0.5 } },
            NamedDesign { name: "ED3".into(), distribution: Distribution::Uniform { lo: 0.0, hi: 0.5 } },
        ],
        boundary_search: Some(SearchSpec { lo_signal: 1e-6, hi_signal: 10.0, points: 1201, scale: Scale::Log }),
        threshold_sweep: Some(SearchSpec { lo_signal: 1e-3, hi_signal: 0.2, points: 401, scale: Scale::Log }),
        two_step: None,
    }
}

/// Half-cell potential mapping of reinforced concrete: normal potential
/// distributions for intact (`Y=0`) and corroding (`Y=1`) sections, detected
/// on low potentials.
fn halfcell() -> ScenarioConfig {
    ScenarioConfig {
        name: "halfcell".into(),
        money_unit: "M EUR".into(),
        signal_unit: "V".into(),
        condition_prior: None,
        prior_y1: Some(0.05),
        nde: NdeSpec::Roc {
            lik_y0: Distribution::Normal { mu: -0.207, sigma: 0.0804 },
            lik_y1: Distribution::Normal { mu: -0.354, sigma: 0.08 },
        },
        orientation: SignalOrientation::SignalBelow,
        failure: FailureModel {
            no_repair: FailureCurve::Binary { y0: 0.0, y1: 1.0 },
            repair: FailureCurve::Constant { p: 0.0 },
        },
        c_r_money: 5.0,
        c_f_money: 50.0,
        nde_cost_money: 0.0,
        x_th_condition: None,
        s_th_signal: Some(-0.2515),
        experimental_designs: Vec::new(),
        boundary_search: Some(SearchSpec { lo_signal: -40.0, hi_signal: 2.0, points: 4201, scale: Scale::Linear }),
        threshold_sweep: Some(SearchSpec { lo_signal: -0.6, hi_signal: 0.0, points: 601, scale: Scale::Linear }),
        two_step: Some(TwoStepSpec {
            prior_y1: 0.1,
            transition: [[0.95, 0.05], [0.0, 1.0]],
            c_r_money: 5.0,
            c_f_money: 50.0,
            fixed_s_th_signal: Some(-0.2515),
            memoryless_s_th_signal: Some(-0.4),
            belief_points: None,
        }),
    }
}

/// Joint probability table of (condition cell, signal cell).
///
/// Cells hold equal marginal mass: condition nodes sit at prior quantiles,
/// signal edges at quantiles of the marginal signal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleGrid {
    /// Representative condition per row.
    pub x_grid: Vec<f64>,
    /// Representative signal per column.
    pub s_grid: Vec<f64>,
    /// `mass[i][j] = Pr(X in row i, S in column j)`.
    pub mass: Vec<Vec<f64>>,
}

fn invert_cdf<F: Fn(f64) -> Result<f64>>(cdf: &F, p: f64, lo: f64, hi: f64, log: bool) -> Result<f64> {
    let (fwd, inv): (fn(f64) -> f64, fn(f64) -> f64) = if log { (f64::ln, f64::exp) } else { (|x| x, |x| x) };
    let (mut a, mut b) = (fwd(lo), fwd(hi));
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if cdf(inv(m))? < p {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(inv(0.5 * (a + b)))
}

/// Signal edges and representatives at marginal quantiles `j/n` and `(j+½)/n`.
fn signal_cells<F: Fn(f64) -> Result<f64>>(cdf: F, lo: f64, hi: f64, log: bool, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut edges = Vec::with_capacity(n + 1);
    let mut reps = Vec::with_capacity(n);
    for j in 0..n {
        if j > 0 {
            edges.push(invert_cdf(&cdf, j as f64 / n as f64, lo, hi, log)?);
        }
        reps.push(invert_cdf(&cdf, (j as f64 + 0.5) / n as f64, lo, hi, log)?);
    }
    Ok((edges, reps))
}

impl OracleGrid {
    /// Continuous condition and signal.
    pub fn from_base(base: &BaseModel, prior: &Distribution, n_x: usize, n_s: usize) -> Result<Self> {
        if n_x < 2 || n_s < 2 {
            return Err(Error::invalid("oracle grid needs at least 2 cells per axis"));
        }
        let w = 1.0 / n_x as f64;
        let x_grid: Vec<f64> = (0..n_x).map(|i| prior.quantile((i as f64 + 0.5) * w)).collect();
        let conds: Vec<Distribution> = x_grid.iter().map(|&x| base.conditional(x)).collect();
        let log = base.family == SignalFamily::Lognormal;
        let (lo, hi) = if log { (1e-300, 1e300) } else { (-1e300, 1e300) };
        let cdf = |s: f64| Ok(conds.iter().map(|d| d.cdf(s)).sum::<f64>() * w);
        let (inner, s_grid) = signal_cells(cdf, lo, hi, log, n_s)?;
        let support = base.signal_support();
        let mut edges = vec![support.lo];
        edges.extend(inner);
        edges.push(support.hi);
        let mass = conds
            .iter()
            .map(|d| edges.windows(2).map(|e| w * interval_mass(d, e[0], e[1])).collect())
            .collect();
        Ok(OracleGrid { x_grid, s_grid, mass })
    }

    /// Binary condition (`x_grid = [0, 1]`) with a continuous signal.
    pub fn from_roc(roc: &RocModel, prior_y1: f64, n_s: usize) -> Result<Self> {
        if n_s < 2 {
            return Err(Error::invalid("oracle grid needs at least 2 signal cells"));
        }
        let support = roc.signal_support();
        let log = support.lo >= 0.0;
        let span = roc.signal_span()?;
        let (lo, hi) = if log { (span.lo * 1e-6, span.hi * 1e6) } else {
            let w = span.width();
            (span.lo - 100.0 * w, span.hi + 100.0 * w)
        };
        let cdf = |s: f64| Ok((1.0 - prior_y1) * roc.lik_y0.cdf(s)? + prior_y1 * roc.lik_y1.cdf(s)?);
        let (inner, s_grid) = signal_cells(cdf, lo, hi, log, n_s)?;
        let mut edges = vec![support.lo];
        edges.extend(inner);
        edges.push(support.hi);
        let mut mass = Vec::with_capacity(2);
        for (y, p) in [(false, 1.0 - prior_y1), (true, prior_y1)] {
            let lik = roc.likelihood(y);
            mass.push(edges.windows(2).map(|e| Ok(p * lik.interval_mass(e[0], e[1])?)).collect::<Result<Vec<_>>>()?);
        }
        Ok(OracleGrid { x_grid: vec![0.0, 1.0], s_grid, mass })
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().flatten().sum()
    }
}

/// Exhaustive sum of `cost(x, policy(s))` over the joint table.
pub fn oracle_expected_cost<P, C>(grid: &OracleGrid, policy: P, cost: C) -> f64
where
    P: Fn(f64) -> Action,
    C: Fn(f64, Action) -> f64,
{
    let actions: Vec<Action> = grid.s_grid.iter().map(|&s| policy(s)).collect();
    let mut total = 0.0;
    for (i, &x) in grid.x_grid.iter().enumerate() {
        let c = [cost(x, Action::DoNothing), cost(x, Action::Repair)];
        for (j, &a) in actions.iter().enumerate() {
            total += grid.mass[i][j] * c[a as usize];
        }
    }
    total
}
