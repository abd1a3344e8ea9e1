//! Invariant suite behind `fisherlab check`.
//!
//! Every check prints one `[PASS]` or `[FAIL]` line with the worst observed
//! deviation and the tolerance it was held to.

use std::f64::consts::PI;
use std::time::Instant;

use fisherlab::analytic::{fisher_p_exact, norm_const_sq, psi_k, AnalyticState};
use fisherlab::fisher::{fisher_amplitude, fisher_density, fisher_product, Estimator, FisherOptions};
use fisherlab::grid::{make_grid, sample, Grid, Space, WaveFunction};
use fisherlab::propagator::evolve_free;
use fisherlab::series::{fit_decay, linear_times, log_times, parse_csv, CurveSeries, SeriesEntry};
use fisherlab::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::{run_conjecture, run_family, Shared};
use crate::state::{Component, StateSpec};

const SEED: u64 = 0x5eed_f15e;

/// Outcome of a single check: a detail line, and whether it passed.
pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn(&Shared) -> Result<(bool, String), String>;

fn within(name: &str, worst: f64, tol: f64) -> (bool, String) {
    (worst < tol, format!("{name} {worst:.3e} (tol {tol:e})"))
}

fn all(parts: Vec<(bool, String)>) -> (bool, String) {
    let ok = parts.iter().all(|p| p.0);
    let detail = parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("; ");
    (ok, detail)
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn family(k: usize, d: f64, t: f64, grid: &Grid) -> Result<WaveFunction, String> {
    let s = AnalyticState::new(k, d, t).map_err(e)?;
    sample(|x| psi_k(&s, x), grid)
        .and_then(|w| w.normalize())
        .map_err(e)
}

fn random_superposition(rng: &mut ChaCha8Rng, grid: &Grid, real: bool, max_k: usize) -> Result<WaveFunction, String> {
    let terms: Vec<(Complex64, AnalyticState)> = (0..=max_k)
        .map(|k| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
            (Complex64::new(re, im), AnalyticState::new(k, 1.0, 0.0).unwrap())
        })
        .collect();
    sample(|x| terms.iter().map(|(c, s)| c * psi_k(s, x)).sum(), grid)
        .and_then(|w| w.normalize())
        .map_err(e)
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels)
        .map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h))
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn parseval(_: &Shared) -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut norm_err: f64 = 0.0;
    let mut trip_err: f64 = 0.0;
    let mut dual_err: f64 = 0.0;
    for n in [8usize, 9, 97, 100, 1000, 1024, 4097] {
        let grid = Grid::new(rng.gen_range(-20.0..0.0), rng.gen_range(0.01..0.5), n).map_err(e)?;
        let amps = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let wf = WaveFunction::new(grid, amps, Space::Position)
            .and_then(|w| w.normalize())
            .map_err(e)?;
        let mom = wf.to_momentum().map_err(e)?;
        norm_err = norm_err.max((mom.norm_sq() - wf.norm_sq()).abs());
        let back = mom.to_position().map_err(e)?;
        trip_err = trip_err.max(max_diff(back.amplitudes(), wf.amplitudes()));
        dual_err = dual_err.max((grid.dx() * grid.dp() * n as f64 - 2.0 * PI).abs());
    }
    Ok(all(vec![
        within("norm", norm_err, 1e-12),
        within("round trip", trip_err, 1e-12),
        within("dx dp n - 2pi", dual_err, 1e-12),
    ]))
}

fn fourier_gaussian(_: &Shared) -> Result<(bool, String), String> {
    let grid = make_grid(-12.0, 12.0, 4096).map_err(e)?;
    let wf = family(0, 1.0, 0.0, &grid)?;
    let mom = wf.to_momentum().map_err(e)?;
    let worst = mom
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let p = grid.p(j);
            (z - PI.powf(-0.25) * (-p * p / 2.0).exp()).norm()
        })
        .fold(0.0, f64::max);
    Ok(within("max |psi~ - closed form|", worst, 1e-10))
}

fn evolution_invariants(_: &Shared) -> Result<(bool, String), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let grid = make_grid(-60.0, 60.0, 4096).map_err(e)?;
    let mut norm: f64 = 0.0;
    let mut group: f64 = 0.0;
    let mut mom: f64 = 0.0;
    for _ in 0..4 {
        let wf = random_superposition(&mut rng, &grid, false, 4)?;
        let p0 = wf.to_momentum().map_err(e)?.density();
        for (t1, t2) in [(0.5, 1.5), (3.0, -2.0), (-1.0, 4.0)] {
            let one = evolve_free(&wf, t1 + t2).map_err(e)?;
            let two = evolve_free(&evolve_free(&wf, t1).map_err(e)?, t2).map_err(e)?;
            norm = norm.max((one.norm_sq() - 1.0).abs());
            group = group.max(max_diff(one.amplitudes(), two.amplitudes()));
            let pt = one.to_momentum().map_err(e)?.density();
            mom = mom.max(p0.iter().zip(&pt).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
    }
    Ok(all(vec![
        within("unitarity", norm, 1e-12),
        within("group law", group, 1e-11),
        within("|psi~|^2 drift", mom, 1e-12),
    ]))
}

fn oracle_match(_: &Shared) -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    for k in 0..=3 {
        for d in [0.5, 1.0, 2.0] {
            let sigma = (13.0 * d * d * (2 * k + 1) as f64).sqrt();
            let grid = make_grid(-16.0 * sigma, 16.0 * sigma, 8192).map_err(e)?;
            let wf0 = family(k, d, 0.0, &grid)?;
            for t in [d * d, 5.0 * d * d] {
                let out = evolve_free(&wf0, t).map_err(e)?;
                let s = AnalyticState::new(k, d, t).map_err(e)?;
                let exact: Vec<Complex64> = grid.xs().iter().map(|&x| psi_k(&s, x)).collect();
                worst = worst.max(max_diff(out.amplitudes(), &exact));
            }
        }
    }
    Ok(within("max |psi_num - psi_closed|", worst, 1e-8))
}

fn momentum_fisher(_: &Shared) -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    for k in 0..=5usize {
        for d in [0.5, 1.0, 2.0] {
            let cut = 12.0 / d;
            let mass = simpson(|p| p.powi(2 * k as i32) * (-d * d * p * p).exp(), 0.0, cut, 20_000);
            let fisher = simpson(
                |p| {
                    let s = 2.0 * k as f64 - 2.0 * d * d * p * p;
                    let poly = if k == 0 { 4.0 * d.powi(4) * p * p } else { s * s * p.powi(2 * k as i32 - 2) };
                    poly * (-d * d * p * p).exp()
                },
                0.0,
                cut,
                20_000,
            ) / mass;
            let exact = fisher_p_exact(k, d).map_err(e)?;
            worst = worst.max((fisher - exact).abs() / exact);
        }
    }
    Ok(within("closed I_p vs quadrature", worst, 1e-10))
}

fn normalization(_: &Shared) -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    for k in 0..=5usize {
        for d in [0.5, 1.0, 2.0] {
            let hw = 14.0 * d * (1.0 + k as f64).sqrt();
            let grid = make_grid(-hw, hw, 4096).map_err(e)?;
            let g = sample(
                |x| Complex64::new(PI.powf(-0.25) / d.sqrt() * (-x * x / (2.0 * d * d)).exp(), 0.0),
                &grid,
            )
            .and_then(|w| w.to_momentum())
            .map_err(e)?;
            let amps = g
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(j, z)| z * Complex64::new(0.0, grid.p(j)).powu(k as u32))
                .collect();
            let raw = WaveFunction::new(grid, amps, Space::Momentum)
                .and_then(|w| w.to_position())
                .map_err(e)?;
            let expected = norm_const_sq(k, d).map_err(e)?;
            worst = worst.max((1.0 / raw.norm_sq() - expected).abs() / expected);
        }
    }
    Ok(within("|N_k|^2 rel err", worst, 1e-8))
}

fn estimators(_: &Shared) -> Result<(bool, String), String> {
    let opts = FisherOptions::default();
    let grid = make_grid(-20.0, 20.0, 8192).map_err(e)?;
    let mut nodeless: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut cases = vec![family(0, 1.0, 0.0, &grid)?, family(0, 0.8, 2.0, &grid)?];
    for _ in 0..3 {
        // k = 0 plus an imaginary k = 1 admixture has no zeros
        let a = rng.gen_range(0.3..1.0);
        let b = rng.gen_range(0.3..1.0);
        let s0 = AnalyticState::new(0, 1.0, 0.0).unwrap();
        let s1 = AnalyticState::new(1, 1.0, 0.0).unwrap();
        cases.push(
            sample(|x| psi_k(&s0, x) * a + psi_k(&s1, x) * Complex64::new(0.0, b), &grid)
                .and_then(|w| w.normalize())
                .map_err(e)?,
        );
    }
    for wf in &cases {
        let a = fisher_density(&wf.density(), wf.spacing(), &opts).map_err(e)?.value;
        let b = fisher_amplitude(wf, &opts).map_err(e)?.value;
        nodeless = nodeless.max((a - b).abs() / a);
    }
    let mut noded: f64 = 0.0;
    for k in 1..=3 {
        let wf = family(k, 1.0, 0.0, &grid)?;
        let a = fisher_density(&wf.density(), wf.spacing(), &opts).map_err(e)?.value;
        let b = fisher_amplitude(&wf, &opts).map_err(e)?.value;
        noded = noded.max((a - b).abs() / a);
    }
    Ok(all(vec![
        within("nodeless", nodeless, 1e-6),
        within("noded", noded, 1e-4),
    ]))
}

fn products(_: &Shared) -> Result<(bool, String), String> {
    let opts = FisherOptions::default();
    let grid = make_grid(-20.0, 20.0, 4096).map_err(e)?;
    let g = fisher_product(&family(0, 1.0, 0.0, &grid)?, Estimator::DensityForm, &opts).map_err(e)?;
    let h = fisher_product(&family(1, 1.0, 0.0, &grid)?, Estimator::DensityForm, &opts).map_err(e)?;
    let g1 = fisher_product(
        &evolve_free(&family(0, 1.0, 0.0, &grid)?, 1.0).map_err(e)?,
        Estimator::DensityForm,
        &opts,
    )
    .map_err(e)?;
    Ok(all(vec![
        within("gaussian |P - 4|", (g.product - 4.0).abs(), 1e-6),
        within("hermite(1) |P - 36|", (h.product - 36.0).abs(), 1e-4),
        within("gaussian t=1 |P - 2|", (g1.product - 2.0).abs(), 1e-4),
        within("regularized mass", h.diagnostics.regularized_mass, 1e-8),
    ]))
}

fn real_states(_: &Shared) -> Result<(bool, String), String> {
    let opts = FisherOptions::default();
    let grid = make_grid(-20.0, 20.0, 4096).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut lowest = f64::INFINITY;
    let mut identity: f64 = 0.0;
    for _ in 0..25 {
        let wf = random_superposition(&mut rng, &grid, true, 6)?;
        let r = fisher_product(&wf, Estimator::DensityForm, &opts).map_err(e)?;
        lowest = lowest.min(r.product);
        let p2 = wf.to_momentum().and_then(|m| m.moment(2)).map_err(e)?;
        identity = identity.max((r.i_x - 4.0 * p2).abs() / r.i_x);
    }
    let (ok, detail) = all(vec![within("I_x vs 4<p^2>", identity, 1e-6)]);
    let bound = lowest >= 4.0 * (1.0 - 1e-6);
    Ok((
        ok && bound,
        format!("min product {lowest:.9} (bound {}); {detail}", 4.0 * (1.0 - 1e-6)),
    ))
}

fn symmetries(_: &Shared) -> Result<(bool, String), String> {
    let opts = FisherOptions::default();
    let grid = make_grid(-30.0, 30.0, 8192).map_err(e)?;
    let xs = grid.xs();
    let s1 = AnalyticState::new(1, 1.0, 0.0).unwrap();
    let s0 = AnalyticState::new(0, 1.0, 0.0).unwrap();
    let base = |x: f64| (psi_k(&s1, x) * 0.6 + psi_k(&s0, x - 0.5) * Complex64::new(0.0, 0.8)).norm_sqr();
    let mass: f64 = xs.iter().map(|&x| base(x)).sum::<f64>() * grid.dx();
    let fd = |rho: Vec<f64>| fisher_density(&rho, grid.dx(), &opts).map(|r| r.value).map_err(e);
    let i1 = fd(xs.iter().map(|&x| base(x) / mass).collect())?;
    let mut scaling: f64 = 0.0;
    for lambda in [0.5, 2.0, 3.0] {
        let il = fd(xs.iter().map(|&x| base(x / lambda) / lambda / mass).collect())?;
        scaling = scaling.max((il * lambda * lambda - i1).abs() / i1);
    }
    let mut shift: f64 = 0.0;
    for steps in [-700i32, 13, 400] {
        let a = steps as f64 * grid.dx();
        shift = shift.max((fd(xs.iter().map(|&x| base(x - a) / mass).collect())? - i1).abs() / i1);
    }
    Ok(all(vec![
        within("scaling", scaling, 1e-6),
        within("translation", shift, 1e-9),
    ]))
}

fn curves(shared: &Shared) -> Result<(bool, String), String> {
    let g = run_family(0, 1.0, linear_times(3.0, 4), 4.0, shared).map_err(e)?;
    let expected = [4.0, 2.0, 0.8, 0.4];
    let worst = g
        .series
        .entries
        .iter()
        .zip(expected)
        .map(|(en, p)| (en.product - p).abs())
        .fold(0.0, f64::max);
    let h = run_family(1, 1.0, linear_times(10.0, 41), 4.0, shared).map_err(e)?;
    let t_star = h.crossing.ok_or("no crossing for hermite(1,1)")?;
    let root = 8f64.sqrt();
    Ok(all(vec![
        within("gaussian products", worst, 1e-4),
        within("hermite(1) rel err", h.max_rel_err(), 1e-3),
        within("crossing rel err", (t_star - root).abs() / root, 1e-3),
    ]))
}

fn decay(shared: &Shared) -> Result<(bool, String), String> {
    let spec = StateSpec::Single(Component::Hermite { k: 3, delta: 1.0 });
    let run = run_conjecture(&spec, 20.0, 200.0, 16, 0.9, shared).map_err(e)?;
    let fit = run.series.fit.ok_or("no fit")?;
    let mixed = StateSpec::parse("gaussian(1) + hermite(2,1)").map_err(e)?;
    let mixed = run_conjecture(&mixed, 1.0, 100.0, 20, 0.5, shared).map_err(e)?;
    let alpha = mixed.series.fit.ok_or("no fit")?.exponent;
    let (ok, detail) = within("hermite(3,1) |alpha + 2|", (fit.exponent + 2.0).abs(), 0.02);
    Ok((ok && alpha < 0.0, format!("{detail}; superposition alpha {alpha:.4}")))
}

fn series_io(shared: &Shared) -> Result<(bool, String), String> {
    let spec = StateSpec::parse("0.6*gaussian(1) + (0,0.8)*hermite(2,1)").map_err(e)?;
    let a = run_conjecture(&spec, 0.5, 20.0, 12, 0.5, shared).map_err(e)?.series;
    let single = Shared {
        workers: Some(1),
        ..shared.clone()
    };
    let b = single
        .install(|| run_conjecture(&spec, 0.5, 20.0, 12, 0.5, &single))
        .map_err(e)?
        .map_err(e)?
        .series;
    let same = a.to_csv() == b.to_csv();
    let back = parse_csv(&a.to_csv()).map_err(e)?;
    let tail: Vec<SeriesEntry> = log_times(10.0, 100.0, 30)[1..]
        .iter()
        .map(|&t| SeriesEntry::new(t, 4.0 / (1.0 + t * t), 1.0, None))
        .collect();
    let synthetic = CurveSeries {
        entries: tail,
        fit: None,
        ..a.clone()
    };
    let alpha = fit_decay(&synthetic, (10.0, 100.0)).map_err(e)?.exponent;
    let (ok, detail) = within("4/(1+t^2) |alpha + 2|", (alpha + 2.0).abs(), 5e-3);
    Ok((
        ok && same && back == a.entries,
        format!(
            "byte-identical across worker counts: {same}; csv round trip: {}; {detail}",
            back == a.entries
        ),
    ))
}

const CHECKS: &[(&str, CheckFn)] = &[
    ("parseval_round_trip", parseval),
    ("fourier_convention", fourier_gaussian),
    ("evolution_invariants", evolution_invariants),
    ("propagator_oracle", oracle_match),
    ("momentum_fisher_quadrature", momentum_fisher),
    ("normalization_constants", normalization),
    ("estimator_agreement", estimators),
    ("product_values", products),
    ("real_state_bound", real_states),
    ("scaling_translation", symmetries),
    ("curves_and_crossing", curves),
    ("decay_fit", decay),
    ("determinism_and_csv", series_io),
];

/// Runs every check, printing one line each.
pub fn run_all(shared: &Shared) -> Vec<Outcome> {
    CHECKS
        .iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let (passed, detail) = match f(shared) {
                Ok(r) => r,
                Err(msg) => (false, format!("error: {msg}")),
            };
            let tag = if passed { "PASS" } else { "FAIL" };
            println!("[{tag}] {name}: {detail} ({:.2} s)", start.elapsed().as_secs_f64());
            Outcome {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

pub fn check(args: &crate::commands::CommonArgs) -> crate::error::Result<i32> {
    let shared = Shared::resolve(args)?;
    let start = Instant::now();
    let outcomes = shared.install(|| run_all(&shared))?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{} checks, {} failed, {:.1} s",
        outcomes.len(),
        failed,
        start.elapsed().as_secs_f64()
    );
    Ok(if failed == 0 {
        crate::error::exit::OK
    } else {
        crate::error::exit::TOLERANCE
    })
}
