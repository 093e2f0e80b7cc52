//! The four NDE quality models and the transitions between them.
//!
//! | model | condition  | observation | type            |
//! |-------|------------|-------------|-----------------|
//! | (1)   | continuous | continuous  | [`BaseModel`]   |
//! | (2)   | continuous | binary      | [`PodCurve`]    |
//! | (3)   | binary     | continuous  | [`RocModel`]    |
//! | (4)   | binary     | binary      | [`ConfusionMatrix`] |
//!
//! Models (2)–(4) are obtained from (1) by thresholding the signal at
//! `s_th`, the condition at `x_th`, or both. Thresholding the condition
//! needs a distribution of conditions (the experimental design), which is
//! why an ROC curve is tied to the population it was learned on.

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::quadrature::{minimize_scalar, Interval, QuadSettings, ScanGrid};
use crate::report::{Cell, CsvTable};

/// Design cdf values outside `[DEGENERATE_TOL, 1 - DEGENERATE_TOL]` make the
/// class-conditional densities meaningless.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Which side of the signal threshold counts as a detection (`I = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SignalOrientation {
    /// `{I=1} = {S > s_th}`
    #[default]
    SignalAbove,
    /// `{I=1} = {S < s_th}`
    SignalBelow,
}

impl SignalOrientation {
    /// Probability of the detection side given the cdf and survival
    /// function evaluated at the threshold.
    #[inline]
    pub fn detection_mass(self, cdf: f64, sf: f64) -> f64 {
        match self {
            SignalOrientation::SignalAbove => sf,
            SignalOrientation::SignalBelow => cdf,
        }
    }

    pub fn detects(self, s: f64, s_th: f64) -> bool {
        match self {
            SignalOrientation::SignalAbove => s > s_th,
            SignalOrientation::SignalBelow => s < s_th,
        }
    }
}

// ---------------------------------------------------------------------------
// Model (1): base model
// ---------------------------------------------------------------------------

/// Polynomial with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalFamily {
    /// `ln S | x ~ N(ln median(x), scale²)`
    Lognormal,
    /// `S | x ~ N(median(x), scale²)`
    Normal,
}

/// Conditional distribution of the signal given the condition, `f_{S|X}`.
///
/// The signal median is a polynomial in the condition; the spread is
/// constant (on log scale for the lognormal family).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseModel {
    pub family: SignalFamily,
    pub median: Polynomial,
    pub scale: f64,
    pub condition_support: Interval,
}

impl BaseModel {
    pub fn new(family: SignalFamily, median: Polynomial, scale: f64, condition_support: Interval) -> Result<Self> {
        let m = BaseModel { family, median, scale, condition_support };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::invalid("base model scale must be positive"));
        }
        if self.median.0.is_empty() || self.median.0.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("base model median polynomial is empty or not finite"));
        }
        if self.family == SignalFamily::Lognormal {
            let lo = if self.condition_support.lo.is_finite() { self.condition_support.lo } else { -1e6 };
            let hi = if self.condition_support.hi.is_finite() { self.condition_support.hi } else { lo + 1e3 };
            for k in 0..=64 {
                let x = lo + (hi - lo) * k as f64 / 64.0;
                if self.median.eval(x) <= 0.0 {
                    return Err(Error::invalid(format!("lognormal base model median is not positive at x = {x}")));
                }
            }
        }
        Ok(())
    }

    /// `S | X = x`.
    pub fn conditional(&self, x: f64) -> Distribution {
        let m = self.median.eval(x);
        match self.family {
            SignalFamily::Lognormal => Distribution::Lognormal { mu_log: m.ln(), sigma_log: self.scale },
            SignalFamily::Normal => Distribution::Normal { mu: m, sigma: self.scale },
        }
    }

    pub fn signal_support(&self) -> Interval {
        match self.family {
            SignalFamily::Lognormal => Interval::positive(),
            SignalFamily::Normal => Interval::real_line(),
        }
    }

    pub fn density(&self, s: f64, x: f64) -> f64 {
        self.conditional(x).pdf(s)
    }

    /// Marginal signal density `∫ f_{S|X}(s|x) f_X(x) dx`.
    pub fn marginal_density(&self, prior: &Distribution, s: f64, settings: &QuadSettings) -> Result<f64> {
        prior.expect(|x| self.density(s, x), self.condition_support, settings)
    }
}

// ---------------------------------------------------------------------------
// Model (2): PoD curve
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PodSource {
    Derived { base: BaseModel, s_th: f64, orientation: SignalOrientation },
    /// A PoD curve that does not depend on the condition at all.
    Constant { pod: f64 },
}

/// Probability of detection as a function of the condition, `Pr(I=1|X=x)`.
///
/// Evaluated lazily from its source; use [`PodCurve::tabulate`] to sample it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PodCurve {
    pub source: PodSource,
}

impl PodCurve {
    pub fn constant(pod: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pod) {
            return Err(Error::invalid("constant PoD must lie in [0, 1]"));
        }
        Ok(PodCurve { source: PodSource::Constant { pod } })
    }

    pub fn pod(&self, x: f64) -> f64 {
        match &self.source {
            PodSource::Derived { base, s_th, orientation } => {
                let d = base.conditional(x);
                orientation.detection_mass(d.cdf(*s_th), d.sf(*s_th))
            }
            PodSource::Constant { pod } => *pod,
        }
    }

    pub fn s_th(&self) -> Option<f64> {
        match &self.source {
            PodSource::Derived { s_th, .. } => Some(*s_th),
            PodSource::Constant { .. } => None,
        }
    }

    pub fn tabulate(&self, xs: &[f64]) -> CsvTable {
        let mut t = CsvTable::new(&["x", "pod"]);
        for &x in xs {
            t.push(vec![x.into(), self.pod(x).into()]);
        }
        t
    }
}

/// Model (1) → (2): fix the signal threshold.
pub fn pod_curve_from_base(base: &BaseModel, s_th: f64, orientation: SignalOrientation) -> PodCurve {
    PodCurve { source: PodSource::Derived { base: base.clone(), s_th, orientation } }
}

// ---------------------------------------------------------------------------
// Model (3): ROC model
// ---------------------------------------------------------------------------

/// Signal density of one condition class, `f_{S|Y=y}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLikelihood {
    Given(Distribution),
    /// Mixture of the base model over the design restricted to `range`,
    /// normalized by the design mass of `range`.
    Derived {
        base: BaseModel,
        design: Distribution,
        range: Interval,
        mass: f64,
        settings: QuadSettings,
    },
}

impl ClassLikelihood {
    pub fn density(&self, s: f64) -> Result<f64> {
        match self {
            ClassLikelihood::Given(d) => Ok(d.pdf(s)),
            ClassLikelihood::Derived { base, design, range, mass, settings } => {
                Ok(design.expect(|x| base.density(s, x), *range, settings)? / mass)
            }
        }
    }

    pub fn ln_density(&self, s: f64) -> Result<f64> {
        match self {
            ClassLikelihood::Given(d) => Ok(d.ln_pdf(s)),
            ClassLikelihood::Derived { .. } => Ok(self.density(s)?.ln()),
        }
    }

    pub fn cdf(&self, s: f64) -> Result<f64> {
        match self {
            ClassLikelihood::Given(d) => Ok(d.cdf(s)),
            ClassLikelihood::Derived { base, design, range, mass, settings } => {
                Ok((design.expect(|x| base.conditional(x).cdf(s), *range, settings)? / mass).clamp(0.0, 1.0))
            }
        }
    }

    pub fn sf(&self, s: f64) -> Result<f64> {
        match self {
            ClassLikelihood::Given(d) => Ok(d.sf(s)),
            ClassLikelihood::Derived { base, design, range, mass, settings } => {
                Ok((design.expect(|x| base.conditional(x).sf(s), *range, settings)? / mass).clamp(0.0, 1.0))
            }
        }
    }

    /// `Pr(lo < S < hi)`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> Result<f64> {
        if lo >= hi {
            return Ok(0.0);
        }
        match self {
            ClassLikelihood::Given(d) => Ok(interval_mass(d, lo, hi)),
            ClassLikelihood::Derived { base, design, range, mass, settings } => {
                let v = design.expect(|x| interval_mass(&base.conditional(x), lo, hi), *range, settings)?;
                Ok((v / mass).clamp(0.0, 1.0))
            }
        }
    }

    pub fn signal_support(&self) -> Interval {
        match self {
            ClassLikelihood::Given(d) => d.support(),
            ClassLikelihood::Derived { base, .. } => base.signal_support(),
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        match self {
            ClassLikelihood::Given(d) => Ok(d.quantile(p)),
            ClassLikelihood::Derived { .. } => {
                let positive = self.signal_support().lo >= 0.0;
                quantile_by_bisection(|s| self.cdf(s), p, positive)
            }
        }
    }
}

/// Mass of `(lo, hi)` computed from whichever tail is more accurate.
pub(crate) fn interval_mass(d: &Distribution, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    let a = d.cdf(hi) - d.cdf(lo);
    let b = d.sf(lo) - d.sf(hi);
    if d.cdf(lo) > 0.5 {
        b.max(0.0)
    } else {
        a.max(0.0)
    }
}

fn quantile_by_bisection<F>(cdf: F, p: f64, positive: bool) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    // Bisect on ln s for positive supports.
    let inv = |u: f64| if positive { u.exp() } else { u };
    let (mut a, mut b) = (-1.0, 1.0);
    let mut step = 2.0;
    for _ in 0..200 {
        if cdf(inv(a))? <= p {
            break;
        }
        a -= step;
        step *= 2.0;
    }
    step = 2.0;
    for _ in 0..200 {
        if cdf(inv(b))? >= p {
            break;
        }
        b += step;
        step *= 2.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a) <= 1e-12 * m.abs().max(1.0) {
            break;
        }
        if cdf(inv(m))? < p {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(inv(0.5 * (a + b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RocProvenance {
    Derived {
        x_th: f64,
        experimental_design: Distribution,
        application_prior: Distribution,
    },
    Given,
}

/// Model (3): two class-conditional signal densities and the class prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocModel {
    pub lik_y0: ClassLikelihood,
    pub lik_y1: ClassLikelihood,
    pub prior_y1: f64,
    pub orientation: SignalOrientation,
    pub provenance: RocProvenance,
}

impl RocModel {
    pub fn given(lik_y0: Distribution, lik_y1: Distribution, prior_y1: f64, orientation: SignalOrientation) -> Result<Self> {
        if !(0.0..=1.0).contains(&prior_y1) {
            return Err(Error::invalid("prior Pr(Y=1) must lie in [0, 1]"));
        }
        Ok(RocModel {
            lik_y0: ClassLikelihood::Given(lik_y0.validated()?),
            lik_y1: ClassLikelihood::Given(lik_y1.validated()?),
            prior_y1,
            orientation,
            provenance: RocProvenance::Given,
        })
    }

    pub fn likelihood(&self, y: bool) -> &ClassLikelihood {
        if y {
            &self.lik_y1
        } else {
            &self.lik_y0
        }
    }

    pub fn with_prior(&self, prior_y1: f64) -> Self {
        RocModel { prior_y1, ..self.clone() }
    }

    pub fn signal_support(&self) -> Interval {
        self.lik_y0.signal_support()
    }

    /// Mixture density `Pr(Y=1) f_{S|Y=1} + Pr(Y=0) f_{S|Y=0}`.
    pub fn evidence(&self, s: f64) -> Result<f64> {
        Ok(self.prior_y1 * self.lik_y1.density(s)? + (1.0 - self.prior_y1) * self.lik_y0.density(s)?)
    }

    /// Threshold range covering `[1e-6, 1 - 1e-6]` of both classes.
    pub fn signal_span(&self) -> Result<Interval> {
        let p = 1e-6;
        let lo = self.lik_y0.quantile(p)?.min(self.lik_y1.quantile(p)?);
        let hi = self.lik_y0.quantile(1.0 - p)?.max(self.lik_y1.quantile(1.0 - p)?);
        Interval::new(lo, hi)
    }

    pub fn sweep_scale(&self) -> crate::quadrature::Scale {
        if self.signal_support().lo >= 0.0 {
            crate::quadrature::Scale::Log
        } else {
            crate::quadrature::Scale::Linear
        }
    }
}

fn check_design(design: &Distribution, x_th: f64) -> Result<f64> {
    let f = design.cdf(x_th);
    if !(DEGENERATE_TOL..=1.0 - DEGENERATE_TOL).contains(&f) {
        return Err(Error::DegenerateDesign { cdf: f });
    }
    Ok(f)
}

/// Model (1) → (3): threshold the condition at `x_th`.
///
/// The class densities mix the base model over the experimental design;
/// the class prior comes from the application prior.
pub fn roc_from_base(
    base: &BaseModel,
    x_th: f64,
    exp_design: &Distribution,
    app_prior: &Distribution,
    orientation: SignalOrientation,
    settings: &QuadSettings,
) -> Result<RocModel> {
    let f_exp = check_design(exp_design, x_th)?;
    let support = exp_design.support();
    let lo_range = Interval { lo: support.lo.min(x_th), hi: x_th };
    let hi_range = Interval { lo: x_th, hi: support.hi.max(x_th) };
    let inner = settings.with_abs_tol(1e-300);
    Ok(RocModel {
        lik_y0: ClassLikelihood::Derived {
            base: base.clone(),
            design: *exp_design,
            range: lo_range,
            mass: f_exp,
            settings: inner,
        },
        lik_y1: ClassLikelihood::Derived {
            base: base.clone(),
            design: *exp_design,
            range: hi_range,
            mass: exp_design.sf(x_th),
            settings: inner,
        },
        prior_y1: app_prior.sf(x_th),
        orientation,
        provenance: RocProvenance::Derived {
            x_th,
            experimental_design: *exp_design,
            application_prior: *app_prior,
        },
    })
}

// ---------------------------------------------------------------------------
// Model (4): confusion matrix
// ---------------------------------------------------------------------------

/// A single operating point `(PoD, PFA)`; the likelihood table `Pr(I|Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub pod: f64,
    pub pfa: f64,
}

impl ConfusionMatrix {
    pub fn new(pod: f64, pfa: f64) -> Result<Self> {
        if !((0.0..=1.0).contains(&pod) && (0.0..=1.0).contains(&pfa)) {
            return Err(Error::invalid(format!("PoD {pod} / PFA {pfa} must lie in [0, 1]")));
        }
        Ok(ConfusionMatrix { pod, pfa })
    }

    /// `Pr(I = i | Y = y)`.
    pub fn likelihood(&self, y: bool, i: bool) -> f64 {
        let p1 = if y { self.pod } else { self.pfa };
        if i {
            p1
        } else {
            1.0 - p1
        }
    }
}

/// Model (3) → (4): fix the signal threshold on an ROC model.
pub fn roc_point(roc: &RocModel, s_th: f64) -> Result<ConfusionMatrix> {
    let side = |lik: &ClassLikelihood| -> Result<f64> {
        Ok(match roc.orientation {
            SignalOrientation::SignalAbove => lik.sf(s_th)?,
            SignalOrientation::SignalBelow => lik.cdf(s_th)?,
        })
    };
    ConfusionMatrix::new(side(&roc.lik_y1)?.clamp(0.0, 1.0), side(&roc.lik_y0)?.clamp(0.0, 1.0))
}

/// Model (2) → (4): average the PoD curve over the design on each side of
/// `x_th`.
pub fn confusion_from_pod_curve(
    pod_curve: &PodCurve,
    x_th: f64,
    exp_design: &Distribution,
    settings: &QuadSettings,
) -> Result<ConfusionMatrix> {
    let f_exp = check_design(exp_design, x_th)?;
    let support = exp_design.support();
    let pod = exp_design.expect(|x| pod_curve.pod(x), Interval { lo: x_th, hi: support.hi.max(x_th) }, settings)?
        / exp_design.sf(x_th);
    let pfa = exp_design.expect(|x| pod_curve.pod(x), Interval { lo: support.lo.min(x_th), hi: x_th }, settings)? / f_exp;
    ConfusionMatrix::new(pod.clamp(0.0, 1.0), pfa.clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// ROC curve tracing and indices
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub s_th: f64,
    pub pfa: f64,
    pub pod: f64,
}

/// Sweeps `n` thresholds so that PFA runs from about 0 to about 1.
pub fn roc_curve_trace(roc: &RocModel, n: usize) -> Result<Vec<RocPoint>> {
    if n < 2 {
        return Err(Error::invalid("roc trace needs at least 2 points"));
    }
    let span = roc.signal_span()?;
    let grid = ScanGrid { points: n, scale: roc.sweep_scale() };
    let mut nodes = grid.nodes(span)?;
    if roc.orientation == SignalOrientation::SignalAbove {
        nodes.reverse();
    }
    let mut out = Vec::with_capacity(n);
    for s in nodes {
        let cm = roc_point(roc, s)?;
        out.push(RocPoint { s_th: s, pfa: cm.pfa, pod: cm.pod });
    }
    // Guard against quadrature jitter in derived models.
    for k in 1..out.len() {
        out[k].pfa = out[k].pfa.max(out[k - 1].pfa);
        out[k].pod = out[k].pod.max(out[k - 1].pod);
    }
    Ok(out)
}

pub fn trace_csv(points: &[RocPoint]) -> CsvTable {
    let mut t = CsvTable::new(&["s_th", "pfa", "pod"]);
    for p in points {
        t.push(vec![Cell::Num(p.s_th), Cell::Num(p.pfa), Cell::Num(p.pod)]);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdValue {
    pub s_th: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocIndices {
    pub auc: f64,
    /// Threshold maximizing `PoD - PFA`, with that maximum.
    pub youden: ThresholdValue,
    /// Threshold minimizing the distance to the perfect corner `(0, 1)`.
    pub closest_to_corner: ThresholdValue,
}

pub fn roc_indices(roc: &RocModel, n: usize) -> Result<RocIndices> {
    let trace = roc_curve_trace(roc, n)?;
    let mut auc = 0.0;
    let mut prev = (0.0, 0.0);
    for p in trace.iter().map(|p| (p.pfa, p.pod)).chain(std::iter::once((1.0, 1.0))) {
        auc += (p.0 - prev.0) * 0.5 * (p.1 + prev.1);
        prev = p;
    }

    let span = roc.signal_span()?;
    let grid = ScanGrid { points: n.max(3), scale: roc.sweep_scale() };
    let point = |s: f64| roc_point(roc, s).map(|c| (c.pod, c.pfa)).unwrap_or((f64::NAN, f64::NAN));
    let youden = minimize_scalar(
        |s| {
            let (pod, pfa) = point(s);
            pfa - pod
        },
        span,
        grid,
    )?;
    let corner = minimize_scalar(
        |s| {
            let (pod, pfa) = point(s);
            pfa.hypot(1.0 - pod)
        },
        span,
        grid,
    )?;
    Ok(RocIndices {
        auc,
        youden: ThresholdValue { s_th: youden.argmin, value: -youden.min },
        closest_to_corner: ThresholdValue { s_th: corner.argmin, value: corner.min },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::std_normal_cdf;
    use crate::quadrature::integrate;
    use proptest::prelude::*;

    fn hypothetical_base() -> BaseModel {
        BaseModel::new(
            SignalFamily::Lognormal,
            Polynomial(vec![1e-2 * (-0.5f64).exp(), 0.0, 1.0, 2.0]),
            1.0,
            Interval::positive(),
        )
        .unwrap()
    }

    fn halfcell() -> RocModel {
        RocModel::given(
            Distribution::normal(-0.207, 0.0804).unwrap(),
            Distribution::normal(-0.354, 0.08).unwrap(),
            0.05,
            SignalOrientation::SignalBelow,
        )
        .unwrap()
    }

    #[test]
    fn pod_at_zero_condition_admits_false_calls() {
        let pod = pod_curve_from_base(&hypothetical_base(), 0.01, SignalOrientation::SignalAbove);
        // Median at x=0 is 1e-2·e^{-1/2}; the threshold sits half a log-sd above it.
        assert!((pod.pod(0.0) - (1.0 - std_normal_cdf(0.5))).abs() < 1e-12);
        assert!((pod.pod(0.0) - 0.3).abs() < 0.01);
    }

    #[test]
    fn pod_closed_form() {
        let x: f64 = 0.05;
        let median = 2.0 * x.powi(3) + x * x + 1e-2 * (-0.5f64).exp();
        let oracle = 1.0 - std_normal_cdf((0.03f64).ln() - median.ln());
        let pod = pod_curve_from_base(&hypothetical_base(), 0.03, SignalOrientation::SignalAbove);
        assert!((pod.pod(x) - oracle).abs() < 1e-14);
    }

    #[test]
    fn pod_limits() {
        let base = hypothetical_base();
        let above = pod_curve_from_base(&base, f64::INFINITY, SignalOrientation::SignalAbove);
        let below = pod_curve_from_base(&base, 0.0, SignalOrientation::SignalAbove);
        for x in [0.0, 0.01, 0.1, 1.0] {
            assert_eq!(above.pod(x), 0.0);
            assert_eq!(below.pod(x), 1.0);
        }
    }

    #[test]
    fn degenerate_design_rejected() {
        let base = hypothetical_base();
        let design = Distribution::uniform(0.0, 0.5).unwrap();
        let err = roc_from_base(&base, 0.6, &design, &design, SignalOrientation::SignalAbove, &QuadSettings::default())
            .unwrap_err();
        assert!(matches!(err, Error::DegenerateDesign { .. }));
    }

    #[test]
    fn derived_class_densities_normalize() {
        let base = hypothetical_base();
        let prior = Distribution::exponential(0.03).unwrap();
        let roc = roc_from_base(&base, 0.1, &prior, &prior, SignalOrientation::SignalAbove, &QuadSettings::default()).unwrap();
        let s = QuadSettings::default().with_rel_tol(1e-8);
        for lik in [&roc.lik_y0, &roc.lik_y1] {
            let mass = integrate(|v| lik.density(v).unwrap(), Interval::positive(), &s).unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "{mass}");
        }
        assert!((roc.prior_y1 - (-0.1f64 / 0.03).exp()).abs() < 1e-15);
    }

    #[test]
    fn halfcell_point_closed_form() {
        let roc = halfcell();
        let cm = roc_point(&roc, -0.2515).unwrap();
        assert!((cm.pod - std_normal_cdf((-0.2515 + 0.354) / 0.08)).abs() < 1e-14);
        assert!((cm.pfa - std_normal_cdf((-0.2515 + 0.207) / 0.0804)).abs() < 1e-14);
        assert!((cm.pod - 0.90).abs() < 0.01 && (cm.pfa - 0.29).abs() < 0.01);
    }

    #[test]
    fn extreme_threshold_gives_origin() {
        let cm = roc_point(&halfcell(), -50.0).unwrap();
        assert!(cm.pod < 1e-12 && cm.pfa < 1e-12);
    }

    #[test]
    fn constant_pod_curve_confusion() {
        let pc = PodCurve::constant(0.4).unwrap();
        let d = Distribution::exponential(0.03).unwrap();
        let cm = confusion_from_pod_curve(&pc, 0.1, &d, &QuadSettings::default()).unwrap();
        assert!((cm.pod - 0.4).abs() < 1e-9 && (cm.pfa - 0.4).abs() < 1e-9);
    }

    #[test]
    fn halfcell_trace_matches_closed_form() {
        let roc = halfcell();
        let trace = roc_curve_trace(&roc, 201).unwrap();
        assert_eq!(trace.len(), 201);
        for p in &trace {
            let pod = std_normal_cdf((p.s_th + 0.354) / 0.08);
            let pfa = std_normal_cdf((p.s_th + 0.207) / 0.0804);
            assert!((p.pod - pod).abs() < 1e-14 && (p.pfa - pfa).abs() < 1e-14);
        }
        assert!(trace[0].pfa < 1e-5 && trace[0].pod < 1e-3);
        assert!(trace[200].pfa > 1.0 - 1e-3 && trace[200].pod > 1.0 - 1e-5);
    }

    #[test]
    fn halfcell_indices() {
        let idx = roc_indices(&halfcell(), 401).unwrap();
        assert!(idx.auc > 0.5 && idx.auc <= 1.0);
        assert!((idx.youden.s_th + 0.28).abs() < 0.005);
        assert!((idx.closest_to_corner.s_th - idx.youden.s_th).abs() < 0.005);
    }

    #[test]
    fn uninformative_indices() {
        let d = Distribution::normal(0.0, 1.0).unwrap();
        let roc = RocModel::given(d, d, 0.3, SignalOrientation::SignalAbove).unwrap();
        let idx = roc_indices(&roc, 101).unwrap();
        assert!((idx.auc - 0.5).abs() < 1e-9);
        assert!(idx.youden.value.abs() < 1e-12);
    }

    #[test]
    fn pod_table_header() {
        let t = pod_curve_from_base(&hypothetical_base(), 0.01, SignalOrientation::SignalAbove).tabulate(&[0.0, 0.1]);
        assert!(t.to_csv().starts_with("x,pod\n"));
    }

    proptest! {
        #[test]
        fn pod_nonincreasing_in_threshold(x in 0.0f64..0.5, a in 1e-4f64..1.0, b in 1e-4f64..1.0) {
            let base = hypothetical_base();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let p_lo = pod_curve_from_base(&base, lo, SignalOrientation::SignalAbove).pod(x);
            let p_hi = pod_curve_from_base(&base, hi, SignalOrientation::SignalAbove).pod(x);
            prop_assert!(p_hi <= p_lo);
            prop_assert!((0.0..=1.0).contains(&p_lo));
        }

        #[test]
        fn given_trace_monotone(mu0 in -1.0f64..1.0, gap in -1.0f64..1.0, s0 in 0.05f64..1.0, s1 in 0.05f64..1.0) {
            let roc = RocModel::given(
                Distribution::normal(mu0, s0).unwrap(),
                Distribution::normal(mu0 + gap, s1).unwrap(),
                0.2,
                SignalOrientation::SignalAbove,
            ).unwrap();
            let trace = roc_curve_trace(&roc, 50).unwrap();
            for w in trace.windows(2) {
                prop_assert!(w[1].pfa >= w[0].pfa && w[1].pod >= w[0].pod);
            }
        }
    }
}
