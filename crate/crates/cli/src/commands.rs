use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fisherlab::analytic::{density_x, fisher_p_exact, product_closed, AnalyticState};
use fisherlab::fisher::{fisher_density, Estimator, FisherOptions};
use fisherlab::propagator::{EvolutionPlan, InitialState, Propagation, DEFAULT_MAX_N};
use fisherlab::series::{
    crossing_time, fit_decay, linear_times, log_times, CurveSeries, SeriesEntry,
};
use rayon::prelude::*;

use crate::config::{layered, parse_list, Config};
use crate::error::{exit, CliError, Result};
use crate::output::{emit, render, Format};
use crate::state::{Component, StateSpec};

/// Largest order for which reference products are produced.
pub const MAX_REFERENCE_ORDER: usize = 5;

/// Relative error accepted against reference products.
pub const REPRODUCE_TOL: f64 = 1e-3;

/// Environment variable overriding the lattice cap.
pub const MAX_N_ENV: &str = "FISHERLAB_MAX_N";

#[derive(Debug, Parser)]
#[command(name = "fisherlab", version, about = "Position/momentum Fisher information under free evolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Product curve of one Hermite-Gaussian family member against its reference.
    Reproduce(ReproduceArgs),
    /// Long-time decay fit of the product for an arbitrary initial state.
    Conjecture(ConjectureArgs),
    /// Reproduce runs over every (k, delta) pair, one output file each.
    Sweep(SweepArgs),
    /// Runs the invariant suite.
    Check(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// key = value file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub estimator: Option<Estimator>,
    /// Largest lattice the grid selection may use.
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ConjectureArgs {
    /// e.g. `hermite(3,1)`, `0.6*gaussian(1) + (0,0.8)*hermite(2,1)`, `file(psi.txt)`.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// First log-spaced time (default t_max / 10).
    #[arg(long, allow_negative_numbers = true)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Share of the log-spaced samples, counted from the end, used in the fit (default 0.5).
    #[arg(long, allow_negative_numbers = true)]
    pub fit_tail_fraction: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SweepArgs {
    /// Comma-separated orders.
    #[arg(long)]
    pub ks: Option<String>,
    /// Comma-separated widths.
    #[arg(long)]
    pub deltas: Option<String>,
    /// Fixed end time; by default each member runs to 10 delta^2.
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Settings shared by every subcommand after layering flags over config.
#[derive(Debug, Clone)]
pub struct Shared {
    pub config: Config,
    pub estimator: Estimator,
    pub max_n: usize,
    pub workers: Option<usize>,
    pub boundary_tol: f64,
}

impl Shared {
    pub fn resolve(args: &CommonArgs) -> Result<Shared> {
        let config = match &args.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let estimator = layered(args.estimator, &config, "estimator")?.unwrap_or_default();
        let max_n = match layered(args.max_n, &config, "max_n")? {
            Some(n) => n,
            None => match std::env::var(MAX_N_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{MAX_N_ENV}=`{v}` is not an integer")))?,
                Err(_) => DEFAULT_MAX_N,
            },
        };
        if max_n < fisherlab::grid::MIN_POINTS {
            return Err(CliError::Usage(format!("max-n must be at least {}", fisherlab::grid::MIN_POINTS)));
        }
        let workers = layered(args.workers, &config, "workers")?;
        if workers == Some(0) {
            return Err(CliError::Usage("workers must be positive".into()));
        }
        let boundary_tol = config
            .get::<f64>("boundary_tol")?
            .unwrap_or(fisherlab::grid::BOUNDARY_TOL);
        if !(boundary_tol > 0.0) {
            return Err(CliError::Usage("boundary_tol must be positive".into()));
        }
        Ok(Shared {
            config,
            estimator,
            max_n,
            workers,
            boundary_tol,
        })
    }

    fn plan(&self, base: fisherlab::grid::Grid, times: Vec<f64>) -> Result<EvolutionPlan> {
        let mut plan = EvolutionPlan::new(base, times)?;
        plan.grid_options.max_n = self.max_n;
        plan.boundary_tol = self.boundary_tol;
        Ok(plan)
    }

    /// Runs `f` on a pool sized by `workers`.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(f))
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be positive and finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be non-negative and finite, got {v}")))
    }
}

fn output_format(flag: Option<Format>, cfg: &Config, out: Option<&Path>) -> Result<Format> {
    Ok(layered(flag, cfg, "format")?
        .or_else(|| out.and_then(Format::from_path))
        .unwrap_or_default())
}

/// One Hermite-Gaussian member evolved over `times` with reference products attached.
#[derive(Debug, Clone)]
pub struct FamilyRun {
    pub series: CurveSeries,
    pub crossing: Option<f64>,
}

impl FamilyRun {
    pub fn max_rel_err(&self) -> f64 {
        self.series.max_rel_err().unwrap_or(f64::NAN)
    }

    pub fn within_tolerance(&self) -> bool {
        self.max_rel_err() < REPRODUCE_TOL
    }
}

pub fn family_component(k: usize, delta: f64) -> Component {
    if k == 0 {
        Component::Gaussian { delta }
    } else {
        Component::Hermite { k, delta }
    }
}

/// Evolves `psi^(k)` with width `delta` and compares with the closed product
/// (k <= 1) or with the closed position density combined with the exact
/// momentum Fisher information (2 <= k <= 5).
pub fn run_family(
    k: usize,
    delta: f64,
    times: Vec<f64>,
    threshold: f64,
    shared: &Shared,
) -> Result<FamilyRun> {
    if k > MAX_REFERENCE_ORDER {
        return Err(CliError::Usage(format!(
            "k = {k}: reference products exist only for k <= {MAX_REFERENCE_ORDER}"
        )));
    }
    positive("delta", delta)?;
    let spec = StateSpec::Single(family_component(k, delta));
    let (init, base) = spec.build()?;
    let plan = shared.plan(base, times)?;
    let prop = Propagation::prepare(&init, &plan, shared.estimator)?;
    let mut series = prop.series(init.label(), &plan.t_values)?;
    series.meta.k = Some(k);
    series.meta.delta = Some(delta);

    let refs: Vec<Option<f64>> = series
        .entries
        .par_iter()
        .map(|e| reference_product(k, delta, e.t, &prop))
        .collect::<Result<_>>()?;
    for (e, r) in series.entries.iter_mut().zip(refs) {
        *e = SeriesEntry::new(e.t, e.i_x, e.i_p, r);
    }

    let mut refine = |t: f64| prop.fisher_at(t).map(|r| r.product);
    let crossing = crossing_time(&series, threshold, Some(&mut refine))?;
    Ok(FamilyRun { series, crossing })
}

fn reference_product(k: usize, delta: f64, t: f64, prop: &Propagation) -> Result<Option<f64>> {
    let state = AnalyticState::new(k, delta, t)?;
    if let Some(p) = product_closed(&state) {
        return Ok(Some(p));
    }
    let grid = prop.grid();
    let rho: Vec<f64> = grid.xs().iter().map(|&x| density_x(&state, x)).collect();
    let i_x = fisher_density(&rho, grid.dx(), &FisherOptions::default())?.value;
    Ok(Some(i_x * fisher_p_exact(k, delta)?))
}

fn family_summary(run: &FamilyRun, threshold: f64) -> String {
    let s = &run.series;
    let mut out = format!(
        "state: {}  estimator: {}  grid: n = {}, dx = {:.6e}\nmax rel_err: {:.3e}\n",
        s.meta.state,
        s.meta.estimator.name(),
        s.meta.grid.n,
        s.meta.grid.dx,
        run.max_rel_err()
    );
    match run.crossing {
        Some(t) => out += &format!("crossing below {threshold}: t* = {t:.10}\n"),
        None => out += &format!("crossing below {threshold}: none in [0, {}]\n", s.t_max()),
    }
    out
}

pub fn reproduce(args: &ReproduceArgs) -> Result<i32> {
    let shared = Shared::resolve(&args.common)?;
    let cfg = &shared.config;
    let k = layered(args.k, cfg, "k")?.unwrap_or(0);
    let delta = positive("delta", layered(args.delta, cfg, "delta")?.unwrap_or(1.0))?;
    let t_max = non_negative(
        "t-max",
        layered(args.t_max, cfg, "t_max")?.unwrap_or(10.0 * delta * delta),
    )?;
    let steps = layered(args.steps, cfg, "steps")?.unwrap_or(41);
    if steps < 2 {
        return Err(CliError::Usage(format!("steps must be at least 2, got {steps}")));
    }
    if !(t_max > 0.0) {
        return Err(CliError::Usage("t-max must be positive".into()));
    }
    let threshold = layered(args.threshold, cfg, "threshold")?.unwrap_or(4.0);
    let out: Option<PathBuf> = layered(args.out.clone(), cfg, "out")?;
    let format = output_format(args.format, cfg, out.as_deref())?;

    let run = shared.install(|| run_family(k, delta, linear_times(t_max, steps), threshold, &shared))??;
    emit(&render(&run.series, format)?, out.as_deref())?;
    eprint!("{}", family_summary(&run, threshold));
    if run.within_tolerance() {
        Ok(exit::OK)
    } else {
        eprintln!("FAIL: max rel_err {:.3e} >= {REPRODUCE_TOL:e}", run.max_rel_err());
        Ok(exit::TOLERANCE)
    }
}

/// Verdict attached to a decay fit.
pub fn verdict(exponent: f64) -> &'static str {
    if exponent < 0.0 {
        "conjecture-consistent"
    } else {
        "counterobservation"
    }
}

pub struct ConjectureRun {
    pub series: CurveSeries,
}

pub fn run_conjecture(
    spec: &StateSpec,
    t_min: f64,
    t_max: f64,
    steps: usize,
    fit_tail_fraction: f64,
    shared: &Shared,
) -> Result<ConjectureRun> {
    if !(fit_tail_fraction > 0.0 && fit_tail_fraction <= 0.9) {
        return Err(CliError::Usage(format!(
            "fit-tail-fraction must lie in (0, 0.9], got {fit_tail_fraction}"
        )));
    }
    positive("t-max", t_max)?;
    positive("t-min", t_min)?;
    if !(t_min < t_max) {
        return Err(CliError::Usage(format!("t-min ({t_min}) must be below t-max ({t_max})")));
    }
    let tail = (fit_tail_fraction * steps as f64).ceil() as usize;
    if tail < 5 {
        return Err(CliError::Usage(format!(
            "the fit window holds {tail} samples; at least 5 are needed (raise --steps)"
        )));
    }
    let times = log_times(t_min, t_max, steps);
    let (init, base): (InitialState, _) = spec.build()?;
    let plan = shared.plan(base, times)?;
    let mut series =
        Propagation::prepare(&init, &plan, shared.estimator)?.series(init.label(), &plan.t_values)?;
    if let Some((k, delta)) = spec.family_member() {
        series.meta.k = Some(k);
        series.meta.delta = Some(delta);
        series.attach_analytic(|t| {
            AnalyticState::new(k, delta, t).ok().and_then(|s| product_closed(&s))
        });
    }
    let t_lo = plan.t_values[plan.t_values.len() - tail];
    series.fit = Some(fit_decay(&series, (t_lo, t_max))?);
    Ok(ConjectureRun { series })
}

pub fn conjecture(args: &ConjectureArgs) -> Result<i32> {
    let shared = Shared::resolve(&args.common)?;
    let cfg = &shared.config;
    let state: String = layered(args.state.clone(), cfg, "state")?
        .ok_or_else(|| CliError::Usage("--state is required".into()))?;
    let spec = StateSpec::parse(&state)?;
    let t_max = layered(args.t_max, cfg, "t_max")?.unwrap_or(100.0);
    let t_min = layered(args.t_min, cfg, "t_min")?.unwrap_or(t_max / 10.0);
    let steps = layered(args.steps, cfg, "steps")?.unwrap_or(40);
    let frac = layered(args.fit_tail_fraction, cfg, "fit_tail_fraction")?.unwrap_or(0.5);
    let out: Option<PathBuf> = layered(args.out.clone(), cfg, "out")?;
    let format = output_format(args.format, cfg, out.as_deref())?;

    let run = shared.install(|| run_conjecture(&spec, t_min, t_max, steps, frac, &shared))??;
    emit(&render(&run.series, format)?, out.as_deref())?;
    let fit = run.series.fit.expect("fit is always attached");
    eprintln!(
        "state: {}  estimator: {}  grid: n = {}, dx = {:.6e}",
        run.series.meta.state,
        run.series.meta.estimator.name(),
        run.series.meta.grid.n,
        run.series.meta.grid.dx
    );
    eprintln!(
        "fit over t in [{:.6e}, {:.6e}]: product ~ {:.6e} * t^{:.6}  (rms log residual {:.3e})",
        fit.window.0, fit.window.1, fit.amplitude, fit.exponent, fit.residual
    );
    eprintln!("verdict: {}", verdict(fit.exponent));
    Ok(if fit.exponent < 0.0 {
        exit::OK
    } else {
        exit::TOLERANCE
    })
}

pub fn sweep(args: &SweepArgs) -> Result<i32> {
    let shared = Shared::resolve(&args.common)?;
    let cfg = &shared.config;
    let ks: Vec<usize> = parse_list(
        &layered(args.ks.clone(), cfg, "ks")?.unwrap_or_else(|| "0,1".into()),
        "k",
    )?;
    let deltas: Vec<f64> = parse_list(
        &layered(args.deltas.clone(), cfg, "deltas")?.unwrap_or_else(|| "1".into()),
        "delta",
    )?;
    if ks.is_empty() || deltas.is_empty() {
        return Err(CliError::Usage("empty --ks or --deltas".into()));
    }
    for &d in &deltas {
        positive("delta", d)?;
    }
    if let Some(&k) = ks.iter().find(|&&k| k > MAX_REFERENCE_ORDER) {
        return Err(CliError::Usage(format!("k = {k} exceeds {MAX_REFERENCE_ORDER}")));
    }
    let t_max: Option<f64> = layered(args.t_max, cfg, "t_max")?;
    if let Some(t) = t_max {
        positive("t-max", t)?;
    }
    let steps = layered(args.steps, cfg, "steps")?.unwrap_or(41);
    if steps < 2 {
        return Err(CliError::Usage(format!("steps must be at least 2, got {steps}")));
    }
    let threshold = layered(args.threshold, cfg, "threshold")?.unwrap_or(4.0);
    let out_dir: PathBuf = layered(args.out_dir.clone(), cfg, "out_dir")?
        .ok_or_else(|| CliError::Usage("--out-dir is required".into()))?;
    let format = layered(args.format, cfg, "format")?.unwrap_or_default();
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;

    let members: Vec<(usize, f64)> = ks
        .iter()
        .flat_map(|&k| deltas.iter().map(move |&d| (k, d)))
        .collect();
    let runs: Vec<Result<FamilyRun>> = shared.install(|| {
        members
            .par_iter()
            .map(|&(k, d)| {
                let t = t_max.unwrap_or(10.0 * d * d);
                run_family(k, d, linear_times(t, steps), threshold, &shared)
            })
            .collect()
    })?;

    let mut code = exit::OK;
    for ((k, d), run) in members.iter().zip(runs) {
        let run = run?;
        let path = out_dir.join(format!("k{k}_delta{d}.{}", format.extension()));
        emit(&render(&run.series, format)?, Some(&path))?;
        eprint!("{}", family_summary(&run, threshold));
        if !run.within_tolerance() {
            eprintln!("FAIL: k = {k}, delta = {d}");
            code = exit::TOLERANCE;
        }
    }
    Ok(code)
}
