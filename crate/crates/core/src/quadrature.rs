//! One-dimensional numerical integration, grid-seeded minimization and
//! root bracketing.
//!
//! Integration is adaptive 21-point Gauss–Kronrod with a global error
//! budget. Semi-infinite and infinite domains are mapped onto finite ones:
//! `x = a + t/(1-t)` for `[a, ∞)`, the mirrored map for `(-∞, b]` and
//! `x = t/(1-t²)` for the whole real line.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integration or search domain. Either endpoint may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::invalid(format!("interval requires lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub const fn real_line() -> Self {
        Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub const fn positive() -> Self {
        Interval { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Intersection with another interval, `None` when empty.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings { rel_tol: 1e-9, abs_tol: 1e-12, max_subdivisions: 2000 }
    }
}

impl QuadSettings {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_subdivisions >= 1) {
            return Err(Error::invalid(format!("bad quadrature settings {self:?}")));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Gauss–Kronrod 21 rule
// ---------------------------------------------------------------------------

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_292_457_543,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// 10-point Gauss weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand { x })
        }
    };

    let fc = eval(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_k = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = kronrod * half;
    let res_abs = abs_k * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error: err })
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, settings: &QuadSettings) -> Result<f64> {
    let first = gk21(f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;
    // Error that cannot be reduced further because the segment is at
    // machine resolution.
    let mut frozen_err = 0.0;
    let mut frozen_value = 0.0;

    loop {
        if total_err <= settings.abs_tol.max(settings.rel_tol * total.abs()) {
            return Ok(total);
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if (worst.b - worst.a) <= 8.0 * f64::EPSILON * scale || mid <= worst.a || mid >= worst.b {
            frozen_err += worst.error;
            frozen_value += worst.value;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        if subdivisions >= settings.max_subdivisions {
            heap.push(worst);
            break;
        }
        let left = gk21(f, worst.a, mid)?;
        let right = gk21(f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }

    // Recompute sums to shed accumulated cancellation before the final test.
    let mut sum = 0.0;
    let mut err = frozen_err;
    for s in heap.iter() {
        sum += s.value;
        err += s.error;
    }
    let value = sum + frozen_value;
    if err <= settings.abs_tol.max(settings.rel_tol * value.abs()) {
        return Ok(value);
    }
    Err(Error::NonConvergence { subdivisions, estimate: value, error: err })
}

/// Integrates `f` over `domain`.
///
/// Returns the estimate once the global error estimate is below
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F>(f: F, domain: Interval, settings: &QuadSettings) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    settings.validate()?;
    if domain.lo.is_nan() || domain.hi.is_nan() || domain.lo >= domain.hi {
        return Err(Error::invalid(format!("empty integration domain [{}, {}]", domain.lo, domain.hi)));
    }
    match (domain.lo.is_finite(), domain.hi.is_finite()) {
        (true, true) => adaptive(&f, domain.lo, domain.hi, settings),
        (true, false) => {
            let a = domain.lo;
            let g = |t: f64| {
                let u = 1.0 - t;
                f(a + t / u) / (u * u)
            };
            adaptive(&g, 0.0, 1.0, settings)
        }
        (false, true) => {
            let b = domain.hi;
            let g = |t: f64| {
                let u = 1.0 - t;
                f(b - t / u) / (u * u)
            };
            adaptive(&g, 0.0, 1.0, settings)
        }
        (false, false) => {
            let g = |t: f64| {
                let u = 1.0 - t * t;
                f(t / u) * (1.0 + t * t) / (u * u)
            };
            adaptive(&g, -1.0, 1.0, settings)
        }
    }
}

/// Integrates `f` over `domain`, splitting at every interior breakpoint.
///
/// Kinks and jumps of the integrand (e.g. a policy switching action) should
/// be passed as breakpoints.
pub fn integrate_with_breaks<F>(f: F, domain: Interval, breaks: &[f64], settings: &QuadSettings) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > domain.lo && *b < domain.hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(domain.lo);
    edges.extend(cuts);
    edges.push(domain.hi);

    let mut total = 0.0;
    for w in edges.windows(2) {
        if w[0] < w[1] {
            total += integrate(&f, Interval { lo: w[0], hi: w[1] }, settings)?;
        }
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Grid scans: minimization and root finding
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// A uniform evaluation grid in linear or logarithmic coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl ScanGrid {
    pub fn linear(points: usize) -> Self {
        ScanGrid { points, scale: Scale::Linear }
    }

    pub fn log(points: usize) -> Self {
        ScanGrid { points, scale: Scale::Log }
    }

    fn forward(&self, x: f64) -> f64 {
        match self.scale {
            Scale::Linear => x,
            Scale::Log => x.ln(),
        }
    }

    fn inverse(&self, u: f64) -> f64 {
        match self.scale {
            Scale::Linear => u,
            Scale::Log => u.exp(),
        }
    }

    /// The grid nodes over a finite bracket, endpoints included.
    pub fn nodes(&self, bracket: Interval) -> Result<Vec<f64>> {
        if !bracket.is_finite() {
            return Err(Error::invalid("scan bracket must be finite"));
        }
        if self.points < 2 {
            return Err(Error::invalid("scan grid needs at least 2 points"));
        }
        if self.scale == Scale::Log && bracket.lo <= 0.0 {
            return Err(Error::invalid("log-scale scan requires a positive bracket"));
        }
        let (u0, u1) = (self.forward(bracket.lo), self.forward(bracket.hi));
        let n = self.points - 1;
        Ok((0..=n)
            .map(|k| {
                if k == 0 {
                    bracket.lo
                } else if k == n {
                    bracket.hi
                } else {
                    self.inverse(u0 + (u1 - u0) * k as f64 / n as f64)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub argmin: f64,
    pub min: f64,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Grid scan followed by golden-section refinement around the best node.
pub fn minimize_scalar<F>(f: F, bracket: Interval, grid: ScanGrid) -> Result<Minimum>
where
    F: Fn(f64) -> f64,
{
    minimize_scalar_tol(f, bracket, grid, 1e-9, 1e-12)
}

pub fn minimize_scalar_tol<F>(f: F, bracket: Interval, grid: ScanGrid, rel_tol: f64, abs_tol: f64) -> Result<Minimum>
where
    F: Fn(f64) -> f64,
{
    if grid.points < 3 {
        return Err(Error::invalid("minimize_scalar needs at least 3 grid points"));
    }
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective { x })
        }
    };
    let nodes = grid.nodes(bracket)?;
    let values = nodes.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?;
    let (best, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is non-empty");

    let mut a = grid.forward(nodes[best.saturating_sub(1)]);
    let mut b = grid.forward(nodes[(best + 1).min(nodes.len() - 1)]);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = eval(grid.inverse(c))?;
    let mut fd = eval(grid.inverse(d))?;
    for _ in 0..300 {
        let (xa, xb) = (grid.inverse(a), grid.inverse(b));
        let mid = 0.5 * (xa + xb);
        if (xb - xa).abs() < rel_tol * mid.abs() + abs_tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = eval(grid.inverse(c))?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = eval(grid.inverse(d))?;
        }
    }
    let (u, fu) = if fc <= fd { (c, fc) } else { (d, fd) };
    let refined = Minimum { argmin: grid.inverse(u), min: fu };
    if refined.min <= values[best] {
        Ok(refined)
    } else {
        Ok(Minimum { argmin: nodes[best], min: values[best] })
    }
}

/// All sign changes of `f` detected on the grid, refined by bisection and
/// returned in ascending order.
///
/// Completeness is bounded by the grid density: two roots closer than one
/// grid step cancel out and are not reported. Nodes where `f` is not
/// finite are skipped.
pub fn find_roots<F>(f: F, bracket: Interval, grid: ScanGrid) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    let Ok(nodes) = grid.nodes(bracket) else {
        return Vec::new();
    };
    let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    let mut roots: Vec<f64> = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for (&x, &v) in nodes.iter().zip(&values) {
        if !v.is_finite() {
            continue;
        }
        if v == 0.0 {
            roots.push(x);
            prev = Some((x, v));
            continue;
        }
        if let Some((px, pv)) = prev {
            if pv != 0.0 && (pv < 0.0) != (v < 0.0) {
                roots.push(bisect(&f, px, pv, x, grid));
            }
        }
        prev = Some((x, v));
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
    roots
}

fn bisect<F: Fn(f64) -> f64>(f: &F, lo: f64, flo: f64, hi: f64, grid: ScanGrid) -> f64 {
    let mut a = grid.forward(lo);
    let mut b = grid.forward(hi);
    let neg_at_a = flo < 0.0;
    for _ in 0..200 {
        let (xa, xb) = (grid.inverse(a), grid.inverse(b));
        if (xb - xa).abs() <= 1e-14 * xa.abs().max(xb.abs()) + 1e-300 {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(grid.inverse(m));
        if fm == 0.0 {
            return grid.inverse(m);
        }
        // Non-finite midpoints are pushed toward the finite end.
        if !fm.is_finite() || (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    grid.inverse(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn settings() -> QuadSettings {
        QuadSettings::default()
    }

    #[test]
    fn constant_on_finite_interval() {
        let v = integrate(|_| 1.0, Interval::new(0.0, 0.5).unwrap(), &settings()).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponential_density_on_half_line() {
        let mean = 0.03;
        let v = integrate(|x| (-x / mean).exp() / mean, Interval::positive(), &settings()).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn gaussian_on_real_line() {
        let v = integrate(
            |x| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            Interval::real_line(),
            &settings(),
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn lower_half_line() {
        let v = integrate(|x| x.exp(), Interval { lo: f64::NEG_INFINITY, hi: 0.0 }, &settings()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nan_integrand_reported() {
        let err = integrate(|x| if x > 0.3 { f64::NAN } else { 1.0 }, Interval::new(0.0, 1.0).unwrap(), &settings())
            .unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn budget_exhaustion_reported() {
        let s = QuadSettings { rel_tol: 1e-14, abs_tol: 1e-300, max_subdivisions: 2 };
        let err = integrate(|x: f64| (1.0 / x).sin(), Interval::new(1e-4, 1.0).unwrap(), &s).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn kink_with_breakpoint() {
        let v = integrate_with_breaks(|x: f64| x.abs(), Interval::new(-1.0, 2.0).unwrap(), &[0.0], &settings())
            .unwrap();
        assert!((v - 2.5).abs() < 1e-13);
    }

    #[test]
    fn minimize_quadratic() {
        let m = minimize_scalar(|x| (x - 2.0).powi(2), Interval::new(0.0, 5.0).unwrap(), ScanGrid::linear(11))
            .unwrap();
        assert!((m.argmin - 2.0).abs() < 1e-6);
    }

    #[test]
    fn minimize_v_shape() {
        let m = minimize_scalar(|x: f64| x.abs(), Interval::new(-1.0, 1.0).unwrap(), ScanGrid::linear(5)).unwrap();
        assert!(m.argmin.abs() < 1e-6);
    }

    #[test]
    fn minimize_log_scale() {
        let m = minimize_scalar(|x: f64| (x.ln() - 0.01f64.ln()).powi(2), Interval::new(1e-5, 10.0).unwrap(), ScanGrid::log(40))
            .unwrap();
        assert!((m.argmin - 0.01).abs() < 1e-8);
    }

    #[test]
    fn minimize_rejects_nonfinite() {
        let err = minimize_scalar(|x: f64| if x > 0.5 { f64::NAN } else { x }, Interval::new(0.0, 1.0).unwrap(), ScanGrid::linear(5))
            .unwrap_err();
        assert!(matches!(err, Error::NonFiniteObjective { .. }));
    }

    #[test]
    fn roots_of_parabola() {
        let r = find_roots(|x| x * x - 1.0, Interval::new(-3.0, 3.0).unwrap(), ScanGrid::linear(61));
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_real_roots() {
        let r = find_roots(|x| x * x + 1.0, Interval::new(-3.0, 3.0).unwrap(), ScanGrid::linear(61));
        assert!(r.is_empty());
    }

    proptest! {
        #[test]
        fn linearity(c in prop::collection::vec(-3.0f64..3.0, 4), d in prop::collection::vec(-3.0f64..3.0, 4),
                     a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let poly = |k: &[f64], x: f64| k.iter().rev().fold(0.0, |acc, &ci| acc * x + ci);
            let dom = Interval::new(-1.0, 2.0).unwrap();
            let s = settings();
            let lhs = integrate(|x| a * poly(&c, x) + b * poly(&d, x), dom, &s).unwrap();
            let rhs = a * integrate(|x| poly(&c, x), dom, &s).unwrap() + b * integrate(|x| poly(&d, x), dom, &s).unwrap();
            prop_assert!((lhs - rhs).abs() <= 10.0 * s.rel_tol * lhs.abs().max(1.0));
        }

        #[test]
        fn additivity(mid in 0.1f64..2.9, k in 0.2f64..3.0) {
            let f = |x: f64| (-k * x).exp() * (1.0 + x * x);
            let s = settings();
            let whole = integrate(f, Interval::new(0.0, 3.0).unwrap(), &s).unwrap();
            let parts = integrate(f, Interval::new(0.0, mid).unwrap(), &s).unwrap()
                + integrate(f, Interval::new(mid, 3.0).unwrap(), &s).unwrap();
            prop_assert!((whole - parts).abs() <= 10.0 * s.rel_tol * whole.abs());
        }

        #[test]
        fn roots_sign_symmetric(r1 in -2.5f64..-0.2, r2 in 0.2f64..2.5) {
            let f = |x: f64| (x - r1) * (x - r2) * (1.0 + 0.1 * x);
            let dom = Interval::new(-3.0, 3.0).unwrap();
            let a = find_roots(f, dom, ScanGrid::linear(101));
            let b = find_roots(|x| -f(x), dom, ScanGrid::linear(101));
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn minimum_not_above_grid(shift in -0.9f64..0.9, w in 1.0f64..30.0) {
            let f = |x: f64| (w * (x - shift)).sin() + 0.3 * x * x;
            let dom = Interval::new(-1.0, 1.0).unwrap();
            let grid = ScanGrid::linear(21);
            let m = minimize_scalar(f, dom, grid).unwrap();
            let grid_min = grid.nodes(dom).unwrap().into_iter().map(f).fold(f64::INFINITY, f64::min);
            prop_assert!(m.min <= grid_min);
        }
    }
}
