//! Closed-form free-particle family `psi^(k)(x, t) = N_k d^k/dx^k psi^(0)(x, t)`,
//! the successive derivatives of a spreading Gaussian packet.
//!
//! With `c(t)^2 = 1 / (2 (delta^2 + i t))`,
//!
//! ```text
//! psi^(0)(x, t) = pi^{-1/4} sqrt(2 delta) c(t) exp(-c(t)^2 x^2)
//! psi^(k)(x, t) = N_k (-1)^k c(t)^k H_k(c(t) x) psi^(0)(x, t)
//! |N_k|^2      = sqrt(pi) delta^{2k} / Gamma(k + 1/2)
//! ```
//!
//! `N_k` is taken real and positive. Every member solves
//! `i psi_t = -psi_xx / 2` exactly, and its momentum density
//! `delta^{2k+1} p^{2k} exp(-delta^2 p^2) / Gamma(k + 1/2)` does not depend on t.

use std::f64::consts::PI;
use std::ops::{Mul, Sub};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported derivative / Hermite order.
pub const MAX_ORDER: usize = 64;

/// Member `(k, delta, t)` of the Hermite-Gaussian family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticState {
    k: usize,
    delta: f64,
    t: f64,
}

impl AnalyticState {
    pub fn new(k: usize, delta: f64, t: f64) -> Result<Self> {
        if k > MAX_ORDER {
            return Err(Error::OrderOutOfRange(k));
        }
        check_delta(delta)?;
        if !t.is_finite() {
            return Err(Error::InvalidTime(t));
        }
        Ok(AnalyticState { k, delta, t })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn at_time(&self, t: f64) -> Result<Self> {
        AnalyticState::new(self.k, self.delta, t)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidDelta(delta));
    }
    Ok(())
}

/// Complex width `c(t)^2 = 1 / (2 (delta^2 + i t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexWidth {
    pub c_squared: Complex64,
}

impl ComplexWidth {
    /// Principal square root of `c^2`.
    pub fn c(&self) -> Complex64 {
        self.c_squared.sqrt()
    }
}

pub fn c_of_t(delta: f64, t: f64) -> Result<ComplexWidth> {
    check_delta(delta)?;
    if t.is_nan() {
        return Err(Error::InvalidTime(t));
    }
    let c_squared = if t.is_infinite() {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(1.0, 0.0) / Complex64::new(2.0 * delta * delta, 2.0 * t)
    };
    Ok(ComplexWidth { c_squared })
}

/// Physicists' Hermite polynomial `H_k(y)` by the three-term recurrence.
pub fn hermite<T>(k: usize, y: T) -> Result<T>
where
    T: Copy + From<f64> + Mul<Output = T> + Mul<f64, Output = T> + Sub<Output = T>,
{
    if k > MAX_ORDER {
        return Err(Error::OrderOutOfRange(k));
    }
    let mut prev = T::from(1.0);
    if k == 0 {
        return Ok(prev);
    }
    let mut cur = y * 2.0;
    for j in 1..k {
        let next = y * cur * 2.0 - prev * (2.0 * j as f64);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `Gamma(k + 1/2) = sqrt(pi) prod_{j=1..k} (j - 1/2)`.
pub fn gamma_half(k: usize) -> f64 {
    (1..=k).fold(PI.sqrt(), |acc, j| acc * (j as f64 - 0.5))
}

/// `|N_k|^2 = sqrt(pi) delta^{2k} / Gamma(k + 1/2)`; independent of t.
pub fn norm_const_sq(k: usize, delta: f64) -> Result<f64> {
    if k > MAX_ORDER {
        return Err(Error::OrderOutOfRange(k));
    }
    check_delta(delta)?;
    Ok(PI.sqrt() * delta.powi(2 * k as i32) / gamma_half(k))
}

/// `psi^(k)(x, t)` with real positive `N_k`.
pub fn psi_k(state: &AnalyticState, x: f64) -> Complex64 {
    let w = c_of_t(state.delta, state.t).expect("validated state");
    let c = w.c();
    let base = c * (PI.powf(-0.25) * (2.0 * state.delta).sqrt()) * (-w.c_squared * x * x).exp();
    if state.k == 0 {
        return base;
    }
    let n_k = norm_const_sq(state.k, state.delta).expect("validated state").sqrt();
    let sign = if state.k % 2 == 0 { 1.0 } else { -1.0 };
    let h = hermite(state.k, c * x).expect("validated state");
    c.powu(state.k as u32) * h * base * (n_k * sign)
}

/// `|psi^(k)(x, t)|^2`.
pub fn density_x(state: &AnalyticState, x: f64) -> f64 {
    psi_k(state, x).norm_sqr()
}

/// `|psi~^(k)(p)|^2 = delta^{2k+1} p^{2k} exp(-delta^2 p^2) / Gamma(k + 1/2)`.
pub fn density_p(state: &AnalyticState, p: f64) -> f64 {
    let k = state.k as i32;
    let d = state.delta;
    d.powi(2 * k + 1) * p.powi(2 * k) * (-d * d * p * p).exp() / gamma_half(state.k)
}

/// `psi~^(k)(p, t) = N_k (i p)^k sqrt(delta) pi^{-1/4} exp(-(delta^2 + i t) p^2 / 2)`,
/// in the same Fourier convention as [`crate::grid::WaveFunction::to_momentum`].
pub fn psi_k_momentum(state: &AnalyticState, p: f64) -> Complex64 {
    let d = state.delta;
    let n_k = norm_const_sq(state.k, d).expect("validated state").sqrt();
    let ipk = Complex64::new(0.0, p).powu(state.k as u32);
    let gauss = Complex64::new(-d * d * p * p / 2.0, -state.t * p * p / 2.0).exp();
    ipk * gauss * (n_k * d.sqrt() * PI.powf(-0.25))
}

/// Closed-form Fisher product where one is known: `4 d^4 / (d^4 + t^2)` for
/// k = 0 and `36 d^4 / (d^4 + t^2)` for k = 1.
pub fn product_closed(state: &AnalyticState) -> Option<f64> {
    let d4 = state.delta.powi(4);
    let ratio = d4 / (d4 + state.t * state.t);
    match state.k {
        0 => Some(4.0 * ratio),
        1 => Some(36.0 * ratio),
        _ => None,
    }
}

/// Momentum-space Fisher information of the k-th family member:
/// `2 delta^2` for k = 0, `4 delta^2 (k - 1/4) / (k - 1/2)` for k >= 1.
pub fn fisher_p_exact(k: usize, delta: f64) -> Result<f64> {
    if k > MAX_ORDER {
        return Err(Error::OrderOutOfRange(k));
    }
    check_delta(delta)?;
    let d2 = delta * delta;
    if k == 0 {
        return Ok(2.0 * d2);
    }
    let k = k as f64;
    Ok(4.0 * d2 * (k - 0.25) / (k - 0.5))
}

/// Position-space Fisher information at t = 0 of the first two members:
/// `2 / delta^2` and `6 / delta^2`.
pub fn fisher_x_initial(k: usize, delta: f64) -> Option<f64> {
    match k {
        0 => Some(2.0 / (delta * delta)),
        1 => Some(6.0 / (delta * delta)),
        _ => None,
    }
}
