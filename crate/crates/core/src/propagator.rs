//! Exact free-particle evolution, `psi~(p, t) = exp(-i p^2 t / 2) psi~(p, 0)`,
//! with grid selection that accounts for ballistic spreading.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{self, next_smooth_even};
use crate::fisher::{fisher_product, Estimator, FisherOptions, FisherResult};
use crate::grid::{sample, Grid, Space, WaveFunction, BOUNDARY_TOL};
use crate::series::{CurveSeries, GridSummary, SeriesEntry, SeriesMeta};

/// Default cap on lattice size.
pub const DEFAULT_MAX_N: usize = 1 << 22;

/// Relative tolerance on the constancy of `I_p` along a series.
pub const MOMENTUM_DRIFT_TOL: f64 = 1e-8;

/// Applies the free propagator for time `t` (negative allowed) and checks the
/// output for mass at the lattice edges.
pub fn evolve_free(wf0: &WaveFunction, t: f64) -> Result<WaveFunction> {
    evolve_free_with(wf0, t, BOUNDARY_TOL)
}

pub fn evolve_free_with(wf0: &WaveFunction, t: f64, boundary_tol: f64) -> Result<WaveFunction> {
    wf0.expect_space(Space::Position)?;
    if !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    let out = propagate_momentum(&wf0.to_momentum()?, t)?.to_position()?;
    out.check_boundary(boundary_tol)?;
    Ok(out)
}

fn propagate_momentum(mom: &WaveFunction, t: f64) -> Result<WaveFunction> {
    let g = *mom.grid();
    let amplitudes = mom
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let p = g.p(i);
            z * Complex64::from_polar(1.0, -0.5 * p * p * t)
        })
        .collect();
    WaveFunction::new(g, amplitudes, Space::Momentum)
}

/// Knobs for [`auto_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    /// Half-width of the position window in units of the spread at `t_max`.
    pub coverage: f64,
    /// Probability mass allowed outside the cutoffs used for sizing.
    pub mass_tail: f64,
    /// Margin on both the momentum cutoff and the initial position cutoff.
    pub safety: f64,
    /// Extra resolution factor so that densities (whose band is twice that
    /// of the amplitude) are resolved as well.
    pub density_band: f64,
    /// Additional refinement in both spaces, used for finite-difference estimators.
    pub oversample: usize,
    pub max_n: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            coverage: 12.0,
            mass_tail: 1e-12,
            safety: 1.5,
            density_band: 2.0,
            oversample: 1,
            max_n: DEFAULT_MAX_N,
        }
    }
}

/// Moments of a state that determine its free spreading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadingEstimate {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// Symmetrized covariance `<(xp + px)/2> - <x><p>`.
    pub cov_xp: f64,
}

impl SpreadingEstimate {
    pub fn of(wf: &WaveFunction) -> Result<Self> {
        wf.expect_space(Space::Position)?;
        let wf = wf.normalize()?;
        let mom = wf.to_momentum()?;
        let mean_x = wf.moment(1)?;
        let var_x = (wf.moment(2)? - mean_x * mean_x).max(0.0);
        let mean_p = mom.moment(1)?;
        let var_p = (mom.moment(2)? - mean_p * mean_p).max(0.0);
        let dpsi = fft::spectral_derivative_complex(wf.amplitudes(), wf.spacing());
        let sym: f64 = wf
            .amplitudes()
            .iter()
            .zip(&dpsi)
            .enumerate()
            .map(|(m, (psi, d))| wf.coord(m) * (psi.conj() * d).im)
            .sum::<f64>()
            * wf.spacing();
        Ok(SpreadingEstimate {
            mean_x,
            mean_p,
            var_x,
            var_p,
            cov_xp: sym - mean_x * mean_p,
        })
    }

    /// Exact free-particle position variance at time t.
    pub fn var_x_at(&self, t: f64) -> f64 {
        (self.var_x + 2.0 * self.cov_xp * t + self.var_p * t * t).max(0.0)
    }
}

/// Smallest `r` such that the mass of `density` outside `[center - r, center + r]`
/// is at most `tail`.
fn mass_cutoff(coords: &[f64], density: &[f64], spacing: f64, center: f64, tail: f64) -> f64 {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| {
        let da = (coords[a] - center).abs();
        let db = (coords[b] - center).abs();
        db.total_cmp(&da)
    });
    let mut outside = 0.0;
    for &i in &order {
        outside += density[i] * spacing;
        if outside > tail {
            return (coords[i] - center).abs();
        }
    }
    0.0
}

/// Window and spacing a lattice needs to evolve a state over `[0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRequirement {
    pub lo: f64,
    pub hi: f64,
    pub dx: f64,
}

impl GridRequirement {
    /// The half-width covers `coverage` spreads at the widest time and
    /// `2 * safety` times the initial tail cutoff; the spacing resolves
    /// `density_band * safety` times the momentum tail cutoff.
    pub fn of(wf0: &WaveFunction, t_max: f64, opts: &GridOptions) -> Result<Self> {
        if !(t_max >= 0.0) || !t_max.is_finite() {
            return Err(Error::InvalidTime(t_max));
        }
        let est = SpreadingEstimate::of(wf0)?;
        let wf = wf0.normalize()?;
        let mom = wf.to_momentum()?;

        let sigma_max = est.var_x_at(0.0).max(est.var_x_at(t_max)).sqrt();
        let x_cut =
            mass_cutoff(&wf.coords(), &wf.density(), wf.spacing(), est.mean_x, opts.mass_tail);
        let p_cut = mass_cutoff(&mom.coords(), &mom.density(), mom.spacing(), 0.0, opts.mass_tail)
            .max(mom.spacing());

        let oversample = opts.oversample.max(1) as f64;
        let half_width = (opts.coverage * sigma_max)
            .max(2.0 * opts.safety * x_cut)
            .max(wf.spacing())
            * oversample;
        let start = est.mean_x;
        let end = est.mean_x + est.mean_p * t_max;
        Ok(GridRequirement {
            lo: start.min(end) - half_width,
            hi: start.max(end) + half_width,
            dx: PI / (opts.density_band * opts.safety * p_cut) / oversample,
        })
    }

    /// Smallest lattice meeting the requirement, with a 2-3-5-smooth size.
    pub fn to_grid(&self, max_n: usize) -> Result<Grid> {
        let needed = ((self.hi - self.lo) / self.dx).ceil();
        if !(needed <= max_n as f64) {
            return Err(resource_error(needed, max_n));
        }
        let n = next_smooth_even((needed as usize).max(crate::grid::MIN_POINTS));
        if n > max_n {
            return Err(Error::ResourceLimit { required: n, max_n });
        }
        let pad = (n as f64 * self.dx - (self.hi - self.lo)) / 2.0;
        Grid::new(self.lo - pad, self.dx, n)
    }

    /// Lattice meeting the requirement that is also commensurate with `src`,
    /// so that [`regrid_fourier`] can move samples onto it.
    pub fn to_grid_compatible(&self, src: &Grid, max_n: usize) -> Result<Grid> {
        compatible_grid(src, self.lo, self.hi, self.dx, max_n)
    }
}

fn resource_error(required: f64, max_n: usize) -> Error {
    Error::ResourceLimit {
        required: if required.is_finite() && required < usize::MAX as f64 {
            required as usize
        } else {
            usize::MAX
        },
        max_n,
    }
}

/// Lattice adequate for evolving `wf0` over `[0, t_max]`; see [`GridRequirement`].
pub fn auto_grid(wf0: &WaveFunction, t_max: f64, opts: &GridOptions) -> Result<Grid> {
    GridRequirement::of(wf0, t_max, opts)?.to_grid(opts.max_n)
}

/// Grid covering `[lo, hi]` and `src`, with spacing `src.dx / r <= dx` for an
/// integer `r`, aligned with `src`'s lattice.
pub fn compatible_grid(src: &Grid, lo: f64, hi: f64, dx: f64, max_n: usize) -> Result<Grid> {
    if !(dx > 0.0) || !dx.is_finite() || !(hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "bad target window [{lo}, {hi}] with spacing {dx}"
        )));
    }
    let ratio = (src.dx() / dx - 1e-9).ceil().max(1.0);
    let lo = lo.min(src.x_min());
    let hi = hi.max(src.x_max());
    let pad_left = ((src.x_min() - lo) / src.dx() - 1e-9).ceil().max(0.0);
    let x_min = src.x_min() - pad_left * src.dx();
    let coarse = ((hi - x_min) / src.dx() - 1e-9).ceil().max(crate::grid::MIN_POINTS as f64);
    let required = coarse * ratio;
    if !(required <= max_n as f64) {
        return Err(resource_error(required, max_n));
    }
    let coarse = next_smooth_even(coarse as usize);
    let n = coarse * ratio as usize;
    if n > max_n {
        return Err(Error::ResourceLimit { required: n, max_n });
    }
    Grid::new(x_min, src.dx() / ratio, n)
}

/// Band-limited resampling of `wf` onto a commensurate `target` grid: zero
/// padding in position, then zero padding in momentum for refinement.
pub fn regrid_fourier(wf: &WaveFunction, target: &Grid) -> Result<WaveFunction> {
    wf.expect_space(Space::Position)?;
    let src = wf.grid();
    let ratio_f = src.dx() / target.dx();
    let ratio = ratio_f.round();
    if ratio < 1.0 || (ratio_f - ratio).abs() > 1e-9 * ratio {
        return Err(Error::GridMismatch(format!(
            "spacing ratio {ratio_f} is not a positive integer"
        )));
    }
    let ratio = ratio as usize;
    let offset_f = (src.x_min() - target.x_min()) / src.dx();
    let offset = offset_f.round();
    if offset < 0.0 || (offset_f - offset).abs() > 1e-6 {
        return Err(Error::GridMismatch(format!(
            "source origin is offset by {offset_f} source cells"
        )));
    }
    let offset = offset as usize;
    if target.n() % ratio != 0 {
        return Err(Error::GridMismatch(format!(
            "target size {} not divisible by refinement {ratio}",
            target.n()
        )));
    }
    let coarse_n = target.n() / ratio;
    if offset + src.n() > coarse_n {
        return Err(Error::GridMismatch("target does not cover the source".into()));
    }
    let mut coarse = vec![Complex64::new(0.0, 0.0); coarse_n];
    coarse[offset..offset + src.n()].copy_from_slice(wf.amplitudes());
    let coarse_grid = Grid::new(target.x_min(), src.dx(), coarse_n)?;
    let coarse = WaveFunction::new(coarse_grid, coarse, Space::Position)?;
    if ratio == 1 {
        return Ok(coarse);
    }
    let mom = coarse.to_momentum()?;
    let n = target.n();
    let mut fine = vec![Complex64::new(0.0, 0.0); n];
    for (i, z) in mom.amplitudes().iter().enumerate() {
        let j = coarse_grid.p_index(i);
        fine[(j + (n / 2) as i64) as usize] = *z;
    }
    WaveFunction::new(*target, fine, Space::Momentum)?.to_position()
}

/// Initial condition of an evolution.
#[derive(Clone)]
pub enum InitialState {
    /// Closed form at t = 0; re-evaluated on any working grid.
    Analytic {
        label: String,
        f: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    },
    /// Sampled data; moved between grids by Fourier interpolation.
    Sampled { label: String, wf: WaveFunction },
}

impl InitialState {
    pub fn analytic<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        InitialState::Analytic {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn sampled(label: impl Into<String>, wf: WaveFunction) -> Self {
        InitialState::Sampled {
            label: label.into(),
            wf,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            InitialState::Analytic { label, .. } | InitialState::Sampled { label, .. } => label,
        }
    }

    /// Normalized samples on `grid`.
    pub fn on_grid(&self, grid: &Grid) -> Result<WaveFunction> {
        match self {
            InitialState::Analytic { f, .. } => sample(|x| f(x), grid)?.normalize(),
            InitialState::Sampled { wf, .. } => {
                if wf.grid() == grid {
                    wf.normalize()
                } else {
                    regrid_fourier(wf, grid)?.normalize()
                }
            }
        }
    }
}

impl fmt::Debug for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Analytic { label, .. } => write!(f, "Analytic({label})"),
            InitialState::Sampled { label, wf } => {
                write!(f, "Sampled({label}, n = {})", wf.len())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegridPolicy {
    Fixed,
    #[default]
    AutoExpand,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionPlan {
    /// Grid on which the initial state is first sampled (the working grid
    /// under [`RegridPolicy::Fixed`]).
    pub base_grid: Grid,
    /// Ascending, finite, non-negative times.
    pub t_values: Vec<f64>,
    pub regrid_policy: RegridPolicy,
    pub grid_options: GridOptions,
    pub fisher_options: FisherOptions,
    pub boundary_tol: f64,
}

impl EvolutionPlan {
    pub fn new(base_grid: Grid, t_values: Vec<f64>) -> Result<Self> {
        let plan = EvolutionPlan {
            base_grid,
            t_values,
            regrid_policy: RegridPolicy::AutoExpand,
            grid_options: GridOptions::default(),
            fisher_options: FisherOptions::default(),
            boundary_tol: BOUNDARY_TOL,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_values.is_empty() {
            return Err(Error::InvalidArgument("plan has no time values".into()));
        }
        for w in self.t_values.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "time values must be strictly ascending ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&t) = self.t_values.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::InvalidTime(t));
        }
        Ok(())
    }

    pub fn t_max(&self) -> f64 {
        self.t_values.last().copied().unwrap_or(0.0)
    }
}

/// An initial state prepared on its working grid, ready to be evaluated at
/// arbitrary times. Every time point is computed independently from the
/// initial momentum amplitudes.
#[derive(Debug, Clone)]
pub struct Propagation {
    initial: WaveFunction,
    momentum: WaveFunction,
    estimator: Estimator,
    fisher_options: FisherOptions,
    boundary_tol: f64,
}

impl Propagation {
    pub fn prepare(initial: &InitialState, plan: &EvolutionPlan, estimator: Estimator) -> Result<Self> {
        plan.validate()?;
        let base = initial.on_grid(&plan.base_grid)?;
        let working = match plan.regrid_policy {
            RegridPolicy::Fixed => base,
            RegridPolicy::AutoExpand => {
                let mut opts = plan.grid_options;
                if estimator == Estimator::AmplitudeForm {
                    opts.oversample = opts.oversample.max(8);
                }
                let req = GridRequirement::of(&base, plan.t_max(), &opts)?;
                match initial {
                    InitialState::Analytic { .. } => initial.on_grid(&req.to_grid(opts.max_n)?)?,
                    InitialState::Sampled { .. } => {
                        let grid = req.to_grid_compatible(base.grid(), opts.max_n)?;
                        regrid_fourier(&base, &grid)?.normalize()?
                    }
                }
            }
        };
        working.check_boundary(plan.boundary_tol)?;
        let momentum = working.to_momentum()?;
        Ok(Propagation {
            initial: working,
            momentum,
            estimator,
            fisher_options: plan.fisher_options,
            boundary_tol: plan.boundary_tol,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.initial.grid()
    }

    pub fn initial(&self) -> &WaveFunction {
        &self.initial
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    /// Position-space state at time t.
    pub fn at(&self, t: f64) -> Result<WaveFunction> {
        if !t.is_finite() {
            return Err(Error::InvalidTime(t));
        }
        let out = propagate_momentum(&self.momentum, t)?.to_position()?;
        out.check_boundary(self.boundary_tol)?;
        Ok(out)
    }

    pub fn fisher_at(&self, t: f64) -> Result<FisherResult> {
        fisher_product(&self.at(t)?, self.estimator, &self.fisher_options)
    }

    /// Fisher data at every time, in order, asserting that `I_p` stays constant.
    pub fn series(&self, label: &str, t_values: &[f64]) -> Result<CurveSeries> {
        let results: Vec<FisherResult> = t_values
            .par_iter()
            .map(|&t| self.fisher_at(t))
            .collect::<Result<_>>()?;
        let reference = results.first().map(|r| r.i_p).unwrap_or(0.0);
        let rel_drift = results
            .iter()
            .map(|r| (r.i_p - reference).abs() / reference.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if rel_drift > MOMENTUM_DRIFT_TOL {
            return Err(Error::MomentumDrift { rel_drift });
        }
        let entries = t_values
            .iter()
            .zip(&results)
            .map(|(&t, r)| SeriesEntry::new(t, r.i_x, r.i_p, None))
            .collect();
        Ok(CurveSeries {
            meta: SeriesMeta {
                state: label.to_string(),
                k: None,
                delta: None,
                estimator: self.estimator,
                grid: GridSummary::from(self.grid()),
            },
            entries,
            fit: None,
        })
    }
}

/// Evolves `initial` to every time in `plan` and records the Fisher data.
pub fn evolve_series(
    initial: &InitialState,
    plan: &EvolutionPlan,
    estimator: Estimator,
) -> Result<CurveSeries> {
    Propagation::prepare(initial, plan, estimator)?.series(initial.label(), &plan.t_values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{psi_k, AnalyticState};
    use crate::grid::make_grid;

    fn gaussian(delta: f64) -> impl Fn(f64) -> Complex64 + Send + Sync + 'static {
        let s = AnalyticState::new(0, delta, 0.0).unwrap();
        move |x| psi_k(&s, x)
    }

    fn max_diff(a: &WaveFunction, b: &WaveFunction) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(u, v)| (u - v).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_evolution_matches_closed_form() {
        let g = make_grid(-20.0, 20.0, 2048).unwrap();
        let wf0 = sample(gaussian(1.0), &g).unwrap().normalize().unwrap();
        let wf1 = evolve_free(&wf0, 1.0).unwrap();
        let s = AnalyticState::new(0, 1.0, 1.0).unwrap();
        let exact = sample(|x| psi_k(&s, x), &g).unwrap();
        assert!(max_diff(&wf1, &exact) < 1e-10);
    }

    #[test]
    fn zero_time_and_reversal() {
        let g = make_grid(-20.0, 20.0, 1024).unwrap();
        let wf0 = sample(gaussian(0.8), &g).unwrap().normalize().unwrap();
        assert!(max_diff(&evolve_free(&wf0, 0.0).unwrap(), &wf0) < 1e-13);
        let fwd = evolve_free(&wf0, 2.5).unwrap();
        let back = evolve_free(&fwd, -2.5).unwrap();
        assert!(max_diff(&back, &wf0) < 1e-12);
        assert!((fwd.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_violation_is_reported() {
        let g = make_grid(-6.0, 6.0, 256).unwrap();
        let wf0 = sample(gaussian(1.0), &g).unwrap().normalize().unwrap();
        assert!(matches!(evolve_free(&wf0, 10.0), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn auto_grid_covers_spreading() {
        let g = make_grid(-12.0, 12.0, 512).unwrap();
        let wf0 = sample(gaussian(1.0), &g).unwrap().normalize().unwrap();
        let grid = auto_grid(&wf0, 10.0, &GridOptions::default()).unwrap();
        let half = 12.0 * ((1.0f64 + 100.0) / 2.0).sqrt();
        assert!(grid.x_min() <= -half && grid.x_max() >= half);

        let grid0 = auto_grid(&wf0, 0.0, &GridOptions::default()).unwrap();
        let sigma0 = 0.5f64.sqrt();
        assert!(grid0.x_min() <= -12.0 * sigma0 && grid0.x_max() >= 12.0 * sigma0);
    }

    #[test]
    fn auto_grid_respects_cap() {
        let g = make_grid(-1.0, 1.0, 1024).unwrap();
        let wf0 = sample(gaussian(0.05), &g).unwrap().normalize().unwrap();
        assert!(matches!(
            auto_grid(&wf0, 1e4, &GridOptions::default()),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn spreading_estimate_of_chirped_gaussian() {
        // A Gaussian evolved to t = 2 has cov_xp = t sigma_p^2 = 1 for delta = 1.
        let g = make_grid(-30.0, 30.0, 2048).unwrap();
        let s = AnalyticState::new(0, 1.0, 2.0).unwrap();
        let wf = sample(|x| psi_k(&s, x), &g).unwrap();
        let est = SpreadingEstimate::of(&wf).unwrap();
        assert!((est.var_p - 0.5).abs() < 1e-10);
        assert!((est.var_x - 2.5).abs() < 1e-10);
        assert!((est.cov_xp - 1.0).abs() < 1e-10);
        // Back-propagating by 2 refocuses to the t = 0 width.
        assert!((est.var_x_at(-2.0) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn regrid_refines_and_pads_exactly() {
        let g = make_grid(-10.0, 10.0, 200).unwrap();
        let f = gaussian(1.0);
        let coarse = sample(&f, &g).unwrap();
        let target = compatible_grid(&g, -25.0, 25.0, g.dx() / 3.0, DEFAULT_MAX_N).unwrap();
        assert!((target.dx() * 3.0 - g.dx()).abs() < 1e-15);
        let fine = regrid_fourier(&coarse, &target).unwrap();
        let exact = sample(&f, &target).unwrap();
        assert!(max_diff(&fine, &exact) < 1e-12);
        let bad = Grid::new(-25.0, g.dx() / 2.5, 1000).unwrap();
        assert!(matches!(regrid_fourier(&coarse, &bad), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn plan_validation() {
        let g = make_grid(-10.0, 10.0, 64).unwrap();
        assert!(EvolutionPlan::new(g, vec![0.0, 1.0, 2.0]).is_ok());
        assert!(EvolutionPlan::new(g, vec![]).is_err());
        assert!(EvolutionPlan::new(g, vec![1.0, 1.0]).is_err());
        assert!(EvolutionPlan::new(g, vec![-1.0, 1.0]).is_err());
        assert!(EvolutionPlan::new(g, vec![0.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn gaussian_series_products() {
        let g = make_grid(-12.0, 12.0, 512).unwrap();
        let plan = EvolutionPlan::new(g, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let init = InitialState::analytic("gaussian(1)", gaussian(1.0));
        let series = evolve_series(&init, &plan, Estimator::DensityForm).unwrap();
        let expected = [4.0, 2.0, 0.8, 0.4];
        for (e, want) in series.entries.iter().zip(expected) {
            assert!((e.product - want).abs() < 1e-4 * want, "{} vs {want}", e.product);
        }
    }
}
