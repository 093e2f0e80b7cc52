use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nde_voi::config::ScenarioConfig;
use nde_voi::decision::{
    calibration_csv, design_csv, experimental_design_report, fixed_point_surface_csv, point_sweep_csv, surface_csv,
    NdeSystem, OneStepProblem, PolicyReport, SignalSearch, TwoStepKind, TwoStepProblem,
};
use nde_voi::nde_models::{roc_curve_trace, roc_indices, trace_csv};
use nde_voi::quadrature::{QuadSettings, ScanGrid};
use nde_voi::report::{fmt_num, write_atomic, Cell, CsvTable};
use nde_voi::scenarios::{builtin, BUILTIN_NAMES};
use nde_voi::verify::{verify, Manifest};
use nde_voi::Error;

#[derive(Parser)]
#[command(name = "nde-voi", version, about = "Value of information of NDE inspections for repair decisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Built-in scenario name or path to a JSON scenario file.
    #[arg(long, global = true, default_value = "hypothetical")]
    scenario: String,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Condition threshold x_th.
    #[arg(long, global = true)]
    xth: Option<f64>,
    /// Signal threshold s_th.
    #[arg(long, global = true)]
    sth: Option<f64>,
    /// Number of points in sweeps and tables.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Relative tolerance of the numerical integration.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// PoD curve of the base model at a signal threshold.
    Pod,
    /// ROC trace and summary indices.
    Roc,
    /// One-step decision: policy report and threshold sweeps.
    Decide,
    /// Thresholds calibrated on each experimental design.
    Expdesign,
    /// Two-step decision: continuous and fixed-point solutions.
    Twostep,
    /// Check computed values against the shipped manifest.
    Verify,
    /// Write the scenario as a JSON config file.
    Export,
}

enum Failure {
    Config(String),
    Run(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::UnknownScenario(_) => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(format!("i/o error: {e}"))
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

struct Ctx {
    cfg: ScenarioConfig,
    common: Common,
}

impl Ctx {
    fn settings(&self) -> Option<QuadSettings> {
        self.common.tol.map(|t| QuadSettings::default().with_rel_tol(t))
    }

    fn one_step(&self) -> Outcome<OneStepProblem> {
        let p = self.cfg.one_step_problem()?;
        Ok(match self.settings() {
            Some(s) => p.with_settings(s),
            None => p,
        })
    }

    fn two_step(&self) -> Outcome<TwoStepProblem> {
        let mut t = self.cfg.two_step_problem()?;
        if let Some(s) = self.settings() {
            t.settings = s;
        }
        Ok(t)
    }

    fn x_th(&self) -> Option<f64> {
        self.common.xth.or(self.cfg.x_th_condition)
    }

    fn sweep(&self) -> Outcome<SignalSearch> {
        let s = self.cfg.threshold_sweep()?;
        Ok(match self.common.grid {
            Some(n) => SignalSearch::new(s.bracket, ScanGrid { points: n, scale: s.grid.scale })?,
            None => s,
        })
    }

    fn grid(&self, default: usize) -> Outcome<usize> {
        match self.common.grid {
            Some(n) if n < 2 => Err(Failure::Config(format!("config error in `--grid`: {n} is below 2 points"))),
            Some(n) => Ok(n),
            None => Ok(default),
        }
    }

    fn write(&self, name: &str, contents: &str) -> Outcome<()> {
        std::fs::create_dir_all(&self.common.out)?;
        let path = self.common.out.join(name);
        write_atomic(&path, contents)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    /// The one-step problem on a binary condition: thresholded at `x_th`
    /// when the scenario has a continuous condition.
    fn binary(&self) -> Outcome<OneStepProblem> {
        let p = self.one_step()?;
        if !p.nde.needs_continuous_condition() {
            return Ok(p);
        }
        let x = self.x_th().ok_or_else(|| Failure::Config("config error in `x_th_condition`: required".into()))?;
        Ok(p.with_condition_threshold(x, None)?)
    }
}

fn load(scenario: &str) -> Outcome<ScenarioConfig> {
    if BUILTIN_NAMES.contains(&scenario) {
        return Ok(builtin(scenario)?);
    }
    let path = Path::new(scenario);
    if !path.exists() {
        return Err(Failure::Config(format!(
            "`{scenario}` is neither a built-in scenario ({}) nor a file",
            BUILTIN_NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(ScenarioConfig::from_json(&text)?)
}

fn model_name(nde: &NdeSystem) -> &'static str {
    match nde {
        NdeSystem::Base { .. } => "base model",
        NdeSystem::Pod { .. } => "PoD curve",
        NdeSystem::Roc { .. } => "ROC model",
        NdeSystem::Confusion { .. } => "confusion matrix",
    }
}

fn run_pod(ctx: &Ctx) -> Outcome<()> {
    let s_th = ctx
        .common
        .sth
        .or(ctx.cfg.s_th_signal)
        .ok_or_else(|| Failure::Config("config error in `s_th_signal`: required for the PoD curve".into()))?;
    let p = ctx.one_step()?.with_threshold(s_th)?;
    let NdeSystem::Pod { curve } = &p.nde else {
        return Err(Failure::Config("config error in `nde`: the PoD curve needs a base model".into()));
    };
    let prior = ctx.cfg.condition_prior.expect("base model has a condition prior");
    let support = prior.support();
    let lo = if support.lo.is_finite() { support.lo } else { prior.quantile(1e-3) };
    let hi = prior.quantile(0.999);
    let n = ctx.grid(201)?;
    let xs: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    ctx.write("pod_curve.csv", &curve.tabulate(&xs).to_csv())
}

fn run_roc(ctx: &Ctx) -> Outcome<()> {
    let p = ctx.binary()?;
    let NdeSystem::Roc { model } = &p.nde else {
        return Err(Failure::Config("config error in `nde`: the ROC needs a continuous signal".into()));
    };
    let n = ctx.grid(201)?;
    ctx.write("roc_trace.csv", &trace_csv(&roc_curve_trace(model, n)?).to_csv())?;
    let idx = roc_indices(model, n.max(401))?;
    println!("AUC: {}", fmt_num(idx.auc));
    println!("Youden index {} at s_th = {}", fmt_num(idx.youden.value), fmt_num(idx.youden.s_th));
    println!(
        "closest to (0, 1): distance {} at s_th = {}",
        fmt_num(idx.closest_to_corner.value),
        fmt_num(idx.closest_to_corner.s_th)
    );
    if p.design_mismatch() {
        println!("note: the ROC was learned on a design that differs from the application prior");
    }
    let json = serde_json::to_string_pretty(&idx).expect("indices serialize") + "\n";
    ctx.write("roc_indices.json", &json)
}

fn run_decide(ctx: &Ctx) -> Outcome<()> {
    let mut p = ctx.one_step()?;
    if ctx.common.xth.is_some() {
        p = ctx.binary()?;
    }
    if let Some(s) = ctx.common.sth {
        p = p.with_threshold(s)?;
    }
    let sol = p.solve()?;
    let title = format!("one-step decision, {}", model_name(&p.nde));
    let mut report = PolicyReport::from_one_step(title, &sol, &ctx.cfg.signal_unit, ctx.cfg.nde_cost_money);
    if p.nde.has_continuous_signal() {
        let cal = p.calibrate_threshold(&ctx.sweep()?)?;
        report.notes.push(format!(
            "best fixed threshold s_th = {} with expected cost {}",
            fmt_num(cal.best.s_th),
            fmt_num(cal.best.cost)
        ));
        ctx.write("threshold_sweep.csv", &calibration_csv(&cal).to_csv())?;
    }
    if p.condition.is_binary() {
        let n = ctx.grid(41)?;
        let axis: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        ctx.write("cost_surface.csv", &surface_csv(&p.cost_surface(&axis, &axis)?).to_csv())?;
    }
    let text = report.to_text(&ctx.cfg.money_unit);
    print!("{text}");
    ctx.write("decision_report.txt", &text)?;
    ctx.write("decision_report.json", &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))
}

fn run_expdesign(ctx: &Ctx) -> Outcome<()> {
    let x = ctx.x_th().ok_or_else(|| Failure::Config("config error in `x_th_condition`: required".into()))?;
    let designs = ctx.cfg.designs();
    if designs.is_empty() {
        return Err(Failure::Config("config error in `experimental_designs`: none given".into()));
    }
    let p = ctx.one_step()?;
    let sweep = ctx.sweep()?;
    let rows = experimental_design_report(&p, x, &designs, &sweep)?;
    let mut curves = CsvTable::new(&["design", "s_th", "perceived_cost"]);
    for (name, d) in &designs {
        for e in p.with_condition_threshold(x, Some(d))?.calibrate_threshold(&sweep)?.sweep {
            curves.push(vec![Cell::Text(name.clone()), e.s_th.into(), e.cost.into()]);
        }
    }
    let table = design_csv(&rows).to_csv();
    print!("{table}");
    ctx.write("design_table.csv", &table)?;
    ctx.write("design_sweep.csv", &curves.to_csv())
}

fn run_twostep(ctx: &Ctx) -> Outcome<()> {
    let t = ctx.two_step()?;
    let plan = ctx.cfg.two_step.as_ref().expect("two-step problem exists");
    let sweep = ctx.sweep()?;
    let mut text = String::new();
    if matches!(t.nde, NdeSystem::Roc { .. }) {
        text += &t.solve(TwoStepKind::Continuous)?.to_text(&ctx.cfg.money_unit);
        let value = t.second_step_value()?;
        let mut table = CsvTable::new(&["belief", "second_step_cost"]);
        for (b, v) in value.beliefs.iter().zip(&value.values) {
            table.push(vec![(*b).into(), (*v).into()]);
        }
        ctx.write("second_step_value.csv", &table.to_csv())?;

        if let Some(s) = ctx.common.sth.or(plan.fixed_s_th_signal) {
            let e = t.evaluate_point(s)?;
            let fixed = TwoStepKind::FixedPoint { pod: e.policy.pod, pfa: e.policy.pfa };
            text += &t.solve(fixed)?.to_text(&ctx.cfg.money_unit);
        }
        text += &t.solve(TwoStepKind::OptimizePoint { sweep })?.to_text(&ctx.cfg.money_unit);
        let points = t.optimize_point(&sweep)?;
        ctx.write("point_sweep.csv", &point_sweep_csv(&points).to_csv())?;
        if let Some(s) = plan.memoryless_s_th_signal {
            let e = t.evaluate_point(s)?;
            text += &format!(
                "at s_th = {}: memoryless policy {}, optimal actions {} (policy code {})\n",
                fmt_num(s),
                fmt_num(e.memoryless_cost),
                fmt_num(e.policy.expected_cost),
                e.policy.code()
            );
        }
    } else if let NdeSystem::Confusion { matrix } = t.nde {
        text += &t.solve(TwoStepKind::FixedPoint { pod: matrix.pod, pfa: matrix.pfa })?.to_text(&ctx.cfg.money_unit);
    }
    let n = ctx.grid(41)?;
    let axis: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    ctx.write("fixed_point_surface.csv", &fixed_point_surface_csv(&t.fixed_point_surface(&axis, &axis)?).to_csv())?;
    print!("{text}");
    ctx.write("twostep_report.txt", &text)
}

fn run_verify(ctx: &Ctx) -> Outcome<()> {
    let report = verify(&ctx.cfg, &Manifest::builtin(), ctx.settings());
    if report.outcomes.is_empty() {
        return Err(Failure::Config(format!("no manifest checks for scenario `{}`", ctx.cfg.name)));
    }
    let text = report.to_text();
    print!("{text}");
    ctx.write(&format!("verify_{}.txt", ctx.cfg.name), &text)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn run_export(ctx: &Ctx) -> Outcome<()> {
    ctx.write(&format!("{}.json", ctx.cfg.name), &ctx.cfg.to_json())
}

fn init_threads() -> Outcome<()> {
    let Ok(v) = std::env::var("NDE_VOI_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("NDE_VOI_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Run(e.to_string()))
}

fn run(cli: Cli) -> Outcome<()> {
    init_threads()?;
    if let Some(t) = cli.common.tol {
        if !(t > 0.0 && t < 1.0) {
            return Err(Failure::Config(format!("config error in `--tol`: {t} is not in (0, 1)")));
        }
    }
    let ctx = Ctx { cfg: load(&cli.common.scenario)?, common: cli.common };
    match cli.command {
        Command::Pod => run_pod(&ctx),
        Command::Roc => run_roc(&ctx),
        Command::Decide => run_decide(&ctx),
        Command::Expdesign => run_expdesign(&ctx),
        Command::Twostep => run_twostep(&ctx),
        Command::Verify => run_verify(&ctx),
        Command::Export => run_export(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
    }
}
