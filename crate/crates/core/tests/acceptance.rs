//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use nde_voi::decision::{NdeSystem, OneStepProblem, Policy};
use nde_voi::distributions::Distribution;
use nde_voi::nde_models::{roc_from_base, ClassLikelihood, SignalOrientation};
use nde_voi::quadrature::{integrate_with_breaks, QuadSettings};
use nde_voi::scenarios::{builtin, oracle_expected_cost, OracleGrid};
use nde_voi::verify::{verify, Manifest, VerifyReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIME_LIMIT: Duration = Duration::from_secs(60);

struct Line {
    criterion: u32,
    passed: bool,
    detail: String,
}

fn from_manifest(reports: &[VerifyReport], k: u32) -> Line {
    let outcomes: Vec<_> = reports.iter().flat_map(|r| r.criterion(k)).collect();
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.line()).collect();
    Line {
        criterion: k,
        passed: !outcomes.is_empty() && failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} checks", outcomes.len())
        } else {
            failed.join("\n        ")
        },
    }
}

fn hypothetical() -> OneStepProblem {
    builtin("hypothetical").unwrap().one_step_problem().unwrap()
}

fn unit_mass(lik: &ClassLikelihood, settings: &QuadSettings) -> nde_voi::Result<f64> {
    let breaks = [lik.quantile(1e-9)?, lik.quantile(0.5)?, lik.quantile(1.0 - 1e-9)?];
    integrate_with_breaks(|s| lik.density(s).unwrap_or(f64::NAN), lik.signal_support(), &breaks, settings)
}

fn random_design(rng: &mut ChaCha8Rng) -> Distribution {
    match rng.gen_range(0..3) {
        0 => Distribution::Exponential { mean: rng.gen_range(0.01..0.1) },
        1 => Distribution::Lognormal { mu_log: rng.gen_range(-3.5..-1.5), sigma_log: rng.gen_range(0.3..1.0) },
        _ => Distribution::Uniform { lo: 0.0, hi: rng.gen_range(0.35..1.0) },
    }
}

/// Class densities, the base-model marginal over the design and the
/// two-class signal mixture all integrate to one.
fn normalization() -> Line {
    let cfg = builtin("hypothetical").unwrap();
    let base = cfg.base_model().unwrap();
    let prior = cfg.condition_prior.unwrap();
    let settings = QuadSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for draw in 0..50 {
        let x_th = rng.gen_range(0.02..0.3);
        let design = random_design(&mut rng);
        let run = || -> nde_voi::Result<f64> {
            let roc = roc_from_base(&base, x_th, &design, &prior, SignalOrientation::SignalAbove, &settings)?;
            let mut dev: f64 = 0.0;
            for y in [false, true] {
                dev = dev.max((unit_mass(roc.likelihood(y), &settings)? - 1.0).abs());
            }
            let breaks = [roc.lik_y0.quantile(1e-9)?, roc.lik_y0.quantile(0.5)?, roc.lik_y1.quantile(0.5)?, roc.lik_y1.quantile(1.0 - 1e-9)?];
            let mixture = integrate_with_breaks(
                |s| roc.evidence(s).unwrap_or(f64::NAN),
                roc.signal_support(),
                &breaks,
                &settings,
            )?;
            let x = design.quantile(spread_quantile(draw));
            let cond = base.conditional(x);
            let conditional = integrate_with_breaks(
                |s| base.density(s, x),
                base.signal_support(),
                &[cond.quantile(1e-9), cond.quantile(0.5), cond.quantile(1.0 - 1e-9)],
                &settings,
            )?;
            Ok(dev.max((mixture - 1.0).abs()).max((conditional - 1.0).abs()))
        };
        match run() {
            Ok(d) => worst = worst.max(d),
            Err(e) => errors.push(format!("draw {draw} (x_th {x_th}, {design:?}): {e}")),
        }
    }
    Line {
        criterion: 13,
        passed: errors.is_empty() && worst <= 1e-6,
        detail: if errors.is_empty() { format!("max |mass - 1| = {worst:e} over 50 draws") } else { errors.join("; ") },
    }
}

/// A fixed spread of quantiles so each draw also checks one conditional.
fn spread_quantile(draw: usize) -> f64 {
    (draw as f64 + 0.5) / 50.0
}

/// Base → PoD curve → confusion equals base → ROC → confusion.
fn commutativity() -> Line {
    let p = hypothetical();
    let s_grid: Vec<f64> = (0..10).map(|k| 1e-3 * (200f64).powf(k as f64 / 9.0)).collect();
    let x_grid: Vec<f64> = (0..10).map(|k| 0.02 + 0.03 * k as f64).collect();
    let mut worst: f64 = 0.0;
    for &x in &x_grid {
        let via_roc = p.with_condition_threshold(x, None).unwrap();
        for &s in &s_grid {
            let a = via_roc.with_threshold(s).unwrap();
            let b = p.with_threshold(s).unwrap().with_condition_threshold(x, None).unwrap();
            let (NdeSystem::Confusion { matrix: m1 }, NdeSystem::Confusion { matrix: m2 }) = (&a.nde, &b.nde) else {
                panic!("both routes end in a confusion matrix");
            };
            worst = worst.max((m1.pod - m2.pod).abs()).max((m1.pfa - m2.pfa).abs());
        }
    }
    Line { criterion: 14, passed: worst <= 1e-4, detail: format!("max |difference| = {worst:e} over 10x10 grid") }
}

/// The continuous optimum beats every thresholded alternative.
fn dominance() -> Line {
    let mut notes = Vec::new();
    let mut passed = true;
    let mut check = |label: &str, optimum: f64, others: &[f64], c0: f64| {
        let worst = others.iter().map(|c| optimum - c).fold(f64::NEG_INFINITY, f64::max);
        let ok = worst <= 1e-3 * c0;
        passed &= ok;
        notes.push(format!("{label}: max(opt - alt) = {worst:.3e}"));
    };

    let cfg = builtin("hypothetical").unwrap();
    let p1 = cfg.one_step_problem().unwrap();
    let sweep = cfg.threshold_sweep().unwrap();
    let sol1 = p1.solve().unwrap();
    let cal2 = p1.calibrate_threshold(&sweep).unwrap();
    let costs2: Vec<f64> = cal2.sweep.iter().map(|e| e.cost).collect();
    check("hypothetical model1 vs model2", sol1.expected_cost, &costs2, sol1.prior.cost);
    let p3 = p1.with_condition_threshold(0.1, None).unwrap();
    let sol3 = p3.solve().unwrap();
    let costs4: Vec<f64> = p3.calibrate_threshold(&sweep).unwrap().sweep.iter().map(|e| e.cost).collect();
    check("hypothetical model3 vs model4", sol3.expected_cost, &costs4, sol3.prior.cost);

    let cfg = builtin("halfcell").unwrap();
    let p = cfg.one_step_problem().unwrap();
    let sweep = cfg.threshold_sweep().unwrap();
    let sol = p.solve().unwrap();
    let costs: Vec<f64> = p.calibrate_threshold(&sweep).unwrap().sweep.iter().map(|e| e.cost).collect();
    check("halfcell model3 vs model4", sol.expected_cost, &costs, sol.prior.cost);

    let t = cfg.two_step_problem().unwrap();
    let cont = t.solve_continuous().unwrap().expected_cost;
    let points: Vec<f64> = t.optimize_point(&sweep).unwrap().sweep.iter().map(|e| e.policy.expected_cost).collect();
    check("halfcell two-step continuous vs fixed points", cont, &points, t.prior_solution().cost);

    Line { criterion: 15, passed, detail: notes.join("; ") }
}

/// Brute-force sums over quantile grids against the quadrature path.
fn oracle() -> Line {
    let mut notes = Vec::new();
    let mut passed = true;

    let cfg = builtin("hypothetical").unwrap();
    let p = cfg.one_step_problem().unwrap();
    let sol = p.solve().unwrap();
    let Policy::Region { region } = &sol.policy else { panic!("continuous policy") };
    let (base, prior) = (cfg.base_model().unwrap(), cfg.condition_prior.unwrap());
    let mut errs = Vec::new();
    for n in [400, 800] {
        let g = OracleGrid::from_base(&base, &prior, n, n).unwrap();
        let c = oracle_expected_cost(&g, |s| region.action(s), |x, a| p.cost(x, a));
        errs.push((c - sol.expected_cost).abs() / sol.expected_cost);
    }
    passed &= errs[0] <= 0.01 && errs[1] <= 0.01 && errs[1] < errs[0];
    notes.push(format!("hypothetical model1 rel err {:.2e} (400) -> {:.2e} (800)", errs[0], errs[1]));

    let p = builtin("halfcell").unwrap().one_step_problem().unwrap();
    let sol = p.solve().unwrap();
    let Policy::Region { region } = &sol.policy else { panic!("continuous policy") };
    let NdeSystem::Roc { model } = &p.nde else { panic!("roc model") };
    let mut errs = Vec::new();
    for n in [400, 800] {
        let g = OracleGrid::from_roc(model, 0.05, n).unwrap();
        let c = oracle_expected_cost(&g, |s| region.action(s), |y, a| p.cost(y, a));
        errs.push((c - sol.expected_cost).abs() / sol.expected_cost);
    }
    passed &= errs[0] <= 0.01 && errs[1] <= 0.01 && errs[1] <= errs[0];
    notes.push(format!("halfcell model3 rel err {:.2e} (400) -> {:.2e} (800)", errs[0], errs[1]));

    Line { criterion: 16, passed, detail: notes.join("; ") }
}

fn main() {
    let manifest = Manifest::builtin();
    let mut reports = Vec::new();
    let mut timing = Vec::new();
    for name in ["hypothetical", "halfcell"] {
        let start = Instant::now();
        reports.push(verify(&builtin(name).unwrap(), &manifest, None));
        let elapsed = start.elapsed();
        timing.push(format!("{name} {:.2} s", elapsed.as_secs_f64()));
        if elapsed > TIME_LIMIT {
            println!("scenario {name} took {elapsed:?}, over the {TIME_LIMIT:?} limit");
            std::process::exit(1);
        }
    }

    let mut lines: Vec<Line> = (1..=12).map(|k| from_manifest(&reports, k)).collect();
    lines.push(normalization());
    lines.push(commutativity());
    lines.push(dominance());
    lines.push(oracle());

    println!("scenario run times: {}", timing.join(", "));
    for l in &lines {
        println!("criterion {:>2}: {}  {}", l.criterion, if l.passed { "PASS" } else { "FAIL" }, l.detail);
    }
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!("acceptance: {} of {} criteria passed", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
