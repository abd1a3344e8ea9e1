//! Uniform position lattices, sampled wave functions and the unitary Fourier
//! transform between position and momentum representations.
//!
//! Conventions (natural units, hbar = m = 1):
//!
//! * position samples `x_m = x_min + m dx`, `m = 0..n`;
//! * momentum samples `p_j = j dp`, `j = -n/2 .. n - n/2`, with `dp = 2 pi / (n dx)`;
//! * `psi~(p) = (2 pi)^{-1/2} \int e^{-i x p} psi(x) dx`, discretized by the
//!   trapezoid rule on the (zero-padded) lattice.
//!
//! With these choices the discrete transform is exactly unitary between the
//! weighted inner products `sum |psi|^2 dx` and `sum |psi~|^2 dp`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// Smallest accepted lattice size.
pub const MIN_POINTS: usize = 8;

/// Tolerance on `|norm^2 - 1|` after [`WaveFunction::normalize`].
pub const NORM_TOL: f64 = 1e-12;

/// Default limit on probability mass in the outer 5% of samples.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Uniform 1-D position lattice; the momentum lattice is derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    dx: f64,
    n: usize,
}

impl Grid {
    pub fn new(x_min: f64, dx: f64, n: usize) -> Result<Self> {
        if !x_min.is_finite() || !dx.is_finite() || dx <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive and finite (x_min = {x_min}, dx = {dx})"
            )));
        }
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points, got {n}"
            )));
        }
        Ok(Grid { x_min, dx, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// One past the last sample, `x_min + n dx`.
    pub fn x_max(&self) -> f64 {
        self.x_min + self.n as f64 * self.dx
    }

    pub fn extent(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn x(&self, m: usize) -> f64 {
        self.x_min + m as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.x(m)).collect()
    }

    /// Momentum spacing `2 pi / (n dx)`.
    pub fn dp(&self) -> f64 {
        2.0 * PI / (self.n as f64 * self.dx)
    }

    /// Signed momentum index of the `i`-th (ascending) momentum sample.
    pub fn p_index(&self, i: usize) -> i64 {
        i as i64 - (self.n / 2) as i64
    }

    pub fn p(&self, i: usize) -> f64 {
        self.p_index(i) as f64 * self.dp()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.p(i)).collect()
    }

    /// Largest representable |p|, i.e. `pi / dx`.
    pub fn p_max(&self) -> f64 {
        PI / self.dx
    }
}

/// Builds the lattice `x_m = x_min + m (x_max - x_min) / n`, `m = 0..n`.
pub fn make_grid(x_min: f64, x_max: f64, n: usize) -> Result<Grid> {
    if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "extent must be positive (x_min = {x_min}, x_max = {x_max})"
        )));
    }
    if n < MIN_POINTS {
        return Err(Error::InvalidGrid(format!(
            "need at least {MIN_POINTS} points, got {n}"
        )));
    }
    Grid::new(x_min, (x_max - x_min) / n as f64, n)
}

/// Which representation the amplitudes of a [`WaveFunction`] live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Position,
    Momentum,
}

/// Complex amplitudes sampled on a grid, in position or momentum space.
///
/// A momentum-space wave function keeps the position grid it was transformed
/// from; its samples sit on that grid's momentum lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    amplitudes: Vec<Complex64>,
    space: Space,
}

impl WaveFunction {
    pub fn new(grid: Grid, amplitudes: Vec<Complex64>, space: Space) -> Result<Self> {
        if amplitudes.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                found: amplitudes.len(),
            });
        }
        if let Some(index) = amplitudes.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(WaveFunction {
            grid,
            amplitudes,
            space,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Lattice spacing in this wave function's own space (`dx` or `dp`).
    pub fn spacing(&self) -> f64 {
        match self.space {
            Space::Position => self.grid.dx(),
            Space::Momentum => self.grid.dp(),
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        match self.space {
            Space::Position => self.grid.x(i),
            Space::Momentum => self.grid.p(i),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.coord(i)).collect()
    }

    /// `|psi|^2` at each sample.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Discrete `sum |psi|^2 * spacing`.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.spacing()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sq() - 1.0).abs() <= tol
    }

    /// Probability mass held by the outer 5% of samples (2.5% at each end,
    /// at least one sample per end).
    pub fn boundary_mass(&self) -> f64 {
        let n = self.len();
        let edge = ((n as f64 * 0.025).ceil() as usize).clamp(1, n / 2);
        let h = self.spacing();
        let lo: f64 = self.amplitudes[..edge].iter().map(|z| z.norm_sqr()).sum();
        let hi: f64 = self.amplitudes[n - edge..].iter().map(|z| z.norm_sqr()).sum();
        (lo + hi) * h
    }

    /// `true` when the boundary mass exceeds `tol` relative to the total mass.
    pub fn is_grid_too_small(&self, tol: f64) -> bool {
        let total = self.norm_sq();
        total > 0.0 && self.boundary_mass() > tol * total
    }

    pub fn check_boundary(&self, tol: f64) -> Result<()> {
        if self.is_grid_too_small(tol) {
            let boundary_mass = self.boundary_mass() / self.norm_sq();
            return Err(Error::GridTooSmall {
                boundary_mass,
                tolerance: tol,
            });
        }
        Ok(())
    }

    /// Returns `self / ||self||`.
    pub fn normalize(&self) -> Result<WaveFunction> {
        let norm_sq = self.norm_sq();
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / norm_sq.sqrt();
        Ok(WaveFunction {
            grid: self.grid,
            amplitudes: self.amplitudes.iter().map(|z| z * scale).collect(),
            space: self.space,
        })
    }

    pub fn scaled(&self, factor: Complex64) -> WaveFunction {
        WaveFunction {
            grid: self.grid,
            amplitudes: self.amplitudes.iter().map(|z| z * factor).collect(),
            space: self.space,
        }
    }

    /// Position to momentum representation:
    /// `psi~(p_j) = dx / sqrt(2 pi) * sum_m e^{-i x_m p_j} psi(x_m)`.
    pub fn to_momentum(&self) -> Result<WaveFunction> {
        self.expect_space(Space::Position)?;
        let n = self.len();
        let g = self.grid;
        let mut buf = self.amplitudes.clone();
        fft::forward(&mut buf);
        let pref = g.dx() / (2.0 * PI).sqrt();
        let amplitudes = (0..n)
            .map(|i| {
                let j = g.p_index(i);
                let p = g.p(i);
                buf[fft::bin_of(j, n)] * Complex64::from_polar(pref, -g.x_min() * p)
            })
            .collect();
        Ok(WaveFunction {
            grid: g,
            amplitudes,
            space: Space::Momentum,
        })
    }

    /// Inverse of [`to_momentum`](Self::to_momentum):
    /// `psi(x_m) = dp / sqrt(2 pi) * sum_j e^{+i x_m p_j} psi~(p_j)`.
    pub fn to_position(&self) -> Result<WaveFunction> {
        self.expect_space(Space::Momentum)?;
        let n = self.len();
        let g = self.grid;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (i, z) in self.amplitudes.iter().enumerate() {
            let j = g.p_index(i);
            buf[fft::bin_of(j, n)] = z * Complex64::from_polar(1.0, g.x_min() * g.p(i));
        }
        fft::inverse(&mut buf);
        let pref = g.dp() / (2.0 * PI).sqrt();
        Ok(WaveFunction {
            grid: g,
            amplitudes: buf.into_iter().map(|z| z * pref).collect(),
            space: Space::Position,
        })
    }

    /// `sum coord^order |psi|^2 spacing` in this wave function's own space.
    pub fn moment(&self, order: u32) -> Result<f64> {
        if order > 4 {
            return Err(Error::InvalidOrder(order));
        }
        let norm_sq = self.norm_sq();
        if (norm_sq - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm_sq });
        }
        let h = self.spacing();
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, z)| self.coord(i).powi(order as i32) * z.norm_sqr())
            .sum::<f64>()
            * h)
    }

    pub(crate) fn expect_space(&self, expected: Space) -> Result<()> {
        if self.space != expected {
            return Err(Error::WrongSpace {
                expected,
                found: self.space,
            });
        }
        Ok(())
    }
}

/// Samples `f` at every position of `grid`. The result is not normalized.
pub fn sample<F>(f: F, grid: &Grid) -> Result<WaveFunction>
where
    F: Fn(f64) -> Complex64,
{
    let amplitudes: Vec<Complex64> = (0..grid.n()).map(|m| f(grid.x(m))).collect();
    WaveFunction::new(*grid, amplitudes, Space::Position)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_gaussian(x: f64) -> Complex64 {
        Complex64::new(PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0)
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn make_grid_spacing() {
        let g = make_grid(-10.0, 10.0, 2048).unwrap();
        assert_eq!(g.dx(), 20.0 / 2048.0);
        assert_eq!(g.x(0), -10.0);
        assert_eq!(g.n(), 2048);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(matches!(make_grid(-10.0, 10.0, 4), Err(Error::InvalidGrid(_))));
        assert!(matches!(make_grid(5.0, -5.0, 64), Err(Error::InvalidGrid(_))));
        assert!(make_grid(1.0, 1.0, 64).is_err());
    }

    #[test]
    fn lattice_duality() {
        for (lo, hi, n) in [(-10.0, 10.0, 2048), (-3.0, 17.5, 100), (0.0, 1.0, 9)] {
            let g = make_grid(lo, hi, n).unwrap();
            let prod = g.dx() * g.dp() * n as f64;
            assert!((prod - 2.0 * PI).abs() <= 4.0 * f64::EPSILON * 2.0 * PI);
        }
    }

    #[test]
    fn momentum_lattice_is_centered_and_ascending() {
        let g = make_grid(-1.0, 1.0, 9).unwrap();
        let ps = g.ps();
        assert_eq!(g.p_index(0), -4);
        assert_eq!(g.p_index(8), 4);
        assert!(ps.windows(2).all(|w| w[1] > w[0]));
        let g = make_grid(-1.0, 1.0, 8).unwrap();
        assert_eq!(g.p_index(0), -4);
        assert_eq!(g.p_index(7), 3);
        assert_eq!(g.p(4), 0.0);
    }

    #[test]
    fn sampled_unit_gaussian_is_normalized() {
        let g = make_grid(-10.0, 10.0, 2048).unwrap();
        let wf = sample(unit_gaussian, &g).unwrap();
        assert!((wf.norm_sq() - 1.0).abs() < 1e-12);
        assert_eq!(wf.space(), Space::Position);
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let g = make_grid(-10.0, 10.0, 64).unwrap();
        let wf = sample(|_| Complex64::new(0.0, 0.0), &g).unwrap();
        assert_eq!(wf.norm_sq(), 0.0);
        assert_eq!(wf.normalize(), Err(Error::ZeroNorm));
    }

    #[test]
    fn sample_rejects_non_finite() {
        let g = make_grid(-10.0, 10.0, 64).unwrap();
        let r = sample(|x| Complex64::new(1.0 / x.abs().min(0.0), 0.0), &g);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn growing_function_flags_boundary() {
        let g = make_grid(-10.0, 10.0, 64).unwrap();
        let wf = sample(|x| Complex64::new((x * x).exp(), 0.0), &g).unwrap();
        let wf = wf.normalize().unwrap();
        assert!(wf.is_grid_too_small(BOUNDARY_TOL));
        assert!(matches!(
            wf.check_boundary(BOUNDARY_TOL),
            Err(Error::GridTooSmall { .. })
        ));
    }

    #[test]
    fn normalize_scales_and_is_idempotent() {
        let g = make_grid(-10.0, 10.0, 2048).unwrap();
        let unit = sample(unit_gaussian, &g).unwrap();
        let doubled = unit.scaled(Complex64::new(2.0, 0.0)).normalize().unwrap();
        assert!(max_diff(doubled.amplitudes(), unit.amplitudes()) < 1e-14);
        assert!((doubled.norm_sq() - 1.0).abs() < NORM_TOL);
        let again = doubled.normalize().unwrap();
        assert!(max_diff(again.amplitudes(), doubled.amplitudes()) < 1e-15);
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = make_grid(-12.0, 12.0, 4096).unwrap();
        let wf = sample(unit_gaussian, &g).unwrap();
        let mom = wf.to_momentum().unwrap();
        assert_eq!(mom.space(), Space::Momentum);
        let err = (0..g.n())
            .map(|i| (mom.amplitudes()[i] - unit_gaussian(g.p(i))).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "max error {err}");

        let back = sample(unit_gaussian, &g).unwrap();
        let mom_exact =
            WaveFunction::new(g, g.ps().into_iter().map(unit_gaussian).collect(), Space::Momentum)
                .unwrap();
        let pos = mom_exact.to_position().unwrap();
        assert!(max_diff(pos.amplitudes(), back.amplitudes()) < 1e-10);
    }

    #[test]
    fn modulation_shifts_momentum() {
        let g = make_grid(-12.0, 12.0, 1024).unwrap();
        let shift = 7;
        let p0 = shift as f64 * g.dp();
        let wf = sample(|x| unit_gaussian(x) * Complex64::from_polar(1.0, p0 * x), &g).unwrap();
        let mom = wf.to_momentum().unwrap();
        for i in shift..g.n() {
            let expected = unit_gaussian(g.p(i) - p0);
            assert!((mom.amplitudes()[i] - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn round_trip_and_wrong_space() {
        let g = make_grid(-9.0, 11.0, 500).unwrap();
        let wf = sample(
            |x| Complex64::new((-(x - 1.0).powi(2)).exp(), 0.3 * x * (-x * x).exp()),
            &g,
        )
        .unwrap()
        .normalize()
        .unwrap();
        let mom = wf.to_momentum().unwrap();
        assert!((mom.norm_sq() - wf.norm_sq()).abs() < 1e-12);
        let back = mom.to_position().unwrap();
        assert!(max_diff(back.amplitudes(), wf.amplitudes()) < 1e-12);
        assert!(matches!(wf.to_position(), Err(Error::WrongSpace { .. })));
        assert!(matches!(mom.to_momentum(), Err(Error::WrongSpace { .. })));
    }

    #[test]
    fn moments_of_unit_gaussian() {
        let g = make_grid(-12.0, 12.0, 4096).unwrap();
        let wf = sample(unit_gaussian, &g).unwrap().normalize().unwrap();
        assert!((wf.moment(0).unwrap() - 1.0).abs() < 1e-12);
        assert!(wf.moment(1).unwrap().abs() < 1e-12);
        // <x^2> for e^{-x^2}/sqrt(pi) is 1/2, <x^4> is 3/4.
        assert!((wf.moment(2).unwrap() - 0.5).abs() < 1e-9);
        assert!((wf.moment(4).unwrap() - 0.75).abs() < 1e-9);
        assert_eq!(wf.moment(5), Err(Error::InvalidOrder(5)));
        let unnormalized = wf.scaled(Complex64::new(1.1, 0.0));
        assert!(matches!(unnormalized.moment(2), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn translation_covariance_of_momentum_density() {
        let a = 2.75;
        let g = make_grid(-12.0, 12.0, 2048).unwrap();
        let shifted = Grid::new(g.x_min() + a, g.dx(), g.n()).unwrap();
        let f = |x: f64| unit_gaussian(x) * Complex64::from_polar(1.0, 0.4 * x);
        let d0 = sample(f, &g).unwrap().to_momentum().unwrap().density();
        let d1 = sample(|x| f(x - a), &shifted)
            .unwrap()
            .to_momentum()
            .unwrap()
            .density();
        let err = d0.iter().zip(&d1).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }
}
