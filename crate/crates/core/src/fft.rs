//! Thin wrapper over `rustfft` with a per-thread plan cache, plus spectral
//! and finite-difference derivatives on uniform lattices.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT, `X_k = sum_m x_m e^{-2 pi i m k / n}`.
pub(crate) fn forward(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// Unnormalized inverse DFT, `x_m = sum_k X_k e^{+2 pi i m k / n}`.
pub(crate) fn inverse(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    fft.process(buf);
}

/// Signed frequency index of DFT bin `k` for length `n`, in `[-n/2, n - n/2)`.
pub(crate) fn signed_index(k: usize, n: usize) -> i64 {
    let half = n / 2;
    if k < n - half {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// DFT bin holding signed frequency `j`.
pub(crate) fn bin_of(j: i64, n: usize) -> usize {
    j.rem_euclid(n as i64) as usize
}

/// First and second derivatives of periodic samples with spacing `h`,
/// by multiplication with `i kappa` in the conjugate domain. The Nyquist bin
/// is dropped from the first derivative.
pub(crate) fn spectral_derivatives_real(values: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let mut spec: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&mut spec);
    let (d1, d2) = derivative_spectra(&spec, h);
    let d1 = real_back(d1);
    let d2 = real_back(d2);
    debug_assert_eq!(d1.len(), n);
    (d1, d2)
}

/// First derivative of complex periodic samples with spacing `h`.
pub(crate) fn spectral_derivative_complex(values: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut spec = values.to_vec();
    forward(&mut spec);
    let (mut d1, _) = derivative_spectra(&spec, h);
    inverse(&mut d1);
    let scale = 1.0 / n as f64;
    d1.iter().map(|z| z * scale).collect()
}

fn derivative_spectra(spec: &[Complex64], h: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = spec.len();
    let base = 2.0 * PI / (n as f64 * h);
    let mut d1 = vec![Complex64::new(0.0, 0.0); n];
    let mut d2 = vec![Complex64::new(0.0, 0.0); n];
    for (k, &c) in spec.iter().enumerate() {
        let j = signed_index(k, n);
        let kappa = base * j as f64;
        if n % 2 != 0 || j != -(n as i64 / 2) {
            d1[k] = c * Complex64::new(0.0, kappa);
        }
        d2[k] = c * (-kappa * kappa);
    }
    (d1, d2)
}

fn real_back(mut buf: Vec<Complex64>) -> Vec<f64> {
    let n = buf.len();
    inverse(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|z| z.re * scale).collect()
}

/// Fourth-order central first derivative; samples outside the lattice are zero.
pub(crate) fn fd4_first<T>(values: &[T], h: f64) -> Vec<T>
where
    T: Copy
        + Default
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>,
{
    let n = values.len();
    let at = |i: isize| -> T {
        if i < 0 || i >= n as isize {
            T::default()
        } else {
            values[i as usize]
        }
    };
    (0..n as isize)
        .map(|m| {
            let a = at(m - 2) - at(m + 2);
            let b = at(m + 1) - at(m - 1);
            (a + b * 8.0) * (1.0 / (12.0 * h))
        })
        .collect()
}

/// Fourth-order central second derivative; samples outside the lattice are zero.
pub(crate) fn fd4_second(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let at = |i: isize| -> f64 {
        if i < 0 || i >= n as isize {
            0.0
        } else {
            values[i as usize]
        }
    };
    (0..n as isize)
        .map(|m| {
            (-at(m - 2) + 16.0 * at(m - 1) - 30.0 * at(m) + 16.0 * at(m + 1) - at(m + 2))
                / (12.0 * h * h)
        })
        .collect()
}

/// Smallest even integer `>= n` whose only prime factors are 2, 3 and 5.
pub fn next_smooth_even(n: usize) -> usize {
    let mut m = n.max(2);
    if m % 2 == 1 {
        m += 1;
    }
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 2;
    }
}
