//! Translational Fisher information `I = \int (rho')^2 / rho` of sampled
//! densities, by two independent estimators:
//!
//! * **density form**: differentiate `rho` directly (spectrally by default);
//! * **amplitude form**: `4 \int (d|psi|)^2`, with `d|psi| = Re(conj(psi) psi') / |psi|`
//!   and `psi'` from fourth-order central differences.
//!
//! Both need care at nodes, where `rho` vanishes but the integrand has a
//! finite limit. Samples below `floor * max(rho)` are regularized: an isolated
//! sub-floor sample flanked by supra-floor neighbours is treated as a node and
//! contributes the limiting value (`2 rho''` resp. `4 |psi'|^2`); every other
//! sub-floor sample contributes zero. The probability mass of all sub-floor
//! samples is reported in [`Diagnostics`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Space, WaveFunction};

/// Which Fisher estimator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    DensityForm,
    AmplitudeForm,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::DensityForm => "density_form",
            Estimator::AmplitudeForm => "amplitude_form",
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density_form" | "density" => Ok(Estimator::DensityForm),
            "amplitude_form" | "amplitude" => Ok(Estimator::AmplitudeForm),
            other => Err(Error::InvalidArgument(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Derivative scheme used by [`fisher_density`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeScheme {
    #[default]
    Spectral,
    FiniteDifference4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherOptions {
    /// Regularization floor relative to the peak density.
    pub floor: f64,
    pub scheme: DerivativeScheme,
    /// Accepted `|sum rho h - 1|`.
    pub normalization_tol: f64,
    /// Most negative density value tolerated as roundoff.
    pub negative_tol: f64,
}

impl Default for FisherOptions {
    fn default() -> Self {
        FisherOptions {
            floor: 1e-12,
            scheme: DerivativeScheme::Spectral,
            normalization_tol: 1e-6,
            negative_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Sub-floor samples treated as isolated nodes.
    pub node_count: usize,
    /// Probability mass of all sub-floor samples.
    pub regularized_mass: f64,
}

impl Diagnostics {
    fn merge(self, other: Diagnostics) -> Diagnostics {
        Diagnostics {
            node_count: self.node_count + other.node_count,
            regularized_mass: self.regularized_mass + other.regularized_mass,
        }
    }
}

/// Fisher information of a single density together with regularization data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityFisher {
    pub value: f64,
    pub diagnostics: Diagnostics,
}

/// Position and momentum Fisher information of one pure state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherResult {
    pub i_x: f64,
    pub i_p: f64,
    pub product: f64,
    pub estimator: Estimator,
    pub diagnostics: Diagnostics,
}

enum Class {
    Regular,
    Node,
    Dropped,
}

fn classify(density: &[f64], threshold: f64) -> Vec<Class> {
    let n = density.len();
    (0..n)
        .map(|m| {
            if density[m] >= threshold {
                Class::Regular
            } else if m > 0
                && m + 1 < n
                && density[m - 1] >= threshold
                && density[m + 1] >= threshold
            {
                Class::Node
            } else {
                Class::Dropped
            }
        })
        .collect()
}

fn validate_density(density: &[f64], spacing: f64, opts: &FisherOptions) -> Result<Vec<f64>> {
    if density.len() < crate::grid::MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "density needs at least {} samples",
            crate::grid::MIN_POINTS
        )));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidArgument(format!("bad spacing {spacing}")));
    }
    let mut cleaned = Vec::with_capacity(density.len());
    for (index, &value) in density.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value < -opts.negative_tol {
            return Err(Error::NegativeDensity { index, value });
        }
        cleaned.push(value.max(0.0));
    }
    let mass: f64 = cleaned.iter().sum::<f64>() * spacing;
    if (mass - 1.0).abs() > opts.normalization_tol {
        return Err(Error::NotNormalized { norm_sq: mass });
    }
    Ok(cleaned)
}

/// `\int (rho')^2 / rho` for a normalized density sampled with `spacing`.
pub fn fisher_density(density: &[f64], spacing: f64, opts: &FisherOptions) -> Result<DensityFisher> {
    let rho = validate_density(density, spacing, opts)?;
    let (d1, d2) = match opts.scheme {
        DerivativeScheme::Spectral => fft::spectral_derivatives_real(&rho, spacing),
        DerivativeScheme::FiniteDifference4 => {
            (fft::fd4_first(&rho, spacing), fft::fd4_second(&rho, spacing))
        }
    };
    let peak = rho.iter().cloned().fold(0.0, f64::max);
    let threshold = opts.floor * peak;

    let mut sum = 0.0;
    let mut diag = Diagnostics::default();
    for (m, class) in classify(&rho, threshold).into_iter().enumerate() {
        match class {
            Class::Regular => sum += d1[m] * d1[m] / rho[m],
            Class::Node => {
                // rho ~ a (x - x0)^2 near a node, so (rho')^2 / rho -> 4a = 2 rho''.
                sum += 2.0 * d2[m].max(0.0);
                diag.node_count += 1;
                diag.regularized_mass += rho[m] * spacing;
            }
            Class::Dropped => diag.regularized_mass += rho[m] * spacing,
        }
    }
    Ok(DensityFisher {
        value: sum * spacing,
        diagnostics: diag,
    })
}

/// `4 \int (d|psi|)^2` of a normalized wave function in its own space.
pub fn fisher_amplitude(wf: &WaveFunction, opts: &FisherOptions) -> Result<DensityFisher> {
    let norm_sq = wf.norm_sq();
    if (norm_sq - 1.0).abs() > opts.normalization_tol {
        return Err(Error::NotNormalized { norm_sq });
    }
    let h = wf.spacing();
    let psi = wf.amplitudes();
    let dpsi = fft::fd4_first(psi, h);
    let rho = wf.density();
    let peak = rho.iter().cloned().fold(0.0, f64::max);
    let threshold = opts.floor * peak;

    let mut sum = 0.0;
    let mut diag = Diagnostics::default();
    for (m, class) in classify(&rho, threshold).into_iter().enumerate() {
        match class {
            Class::Regular => {
                // d|psi| = Re(conj(psi) psi') / |psi|; the unit phasor keeps this
                // well conditioned as |psi| -> 0.
                let phasor = psi[m] / psi[m].norm();
                let d_abs = (phasor.conj() * dpsi[m]).re;
                sum += d_abs * d_abs;
            }
            Class::Node => {
                // |psi| ~ |psi'(x0)| |x - x0| on either side of a simple zero.
                sum += dpsi[m].norm_sqr();
                diag.node_count += 1;
                diag.regularized_mass += rho[m] * h;
            }
            Class::Dropped => diag.regularized_mass += rho[m] * h,
        }
    }
    Ok(DensityFisher {
        value: 4.0 * sum * h,
        diagnostics: diag,
    })
}

fn estimate(wf: &WaveFunction, estimator: Estimator, opts: &FisherOptions) -> Result<DensityFisher> {
    match estimator {
        Estimator::DensityForm => fisher_density(&wf.density(), wf.spacing(), opts),
        Estimator::AmplitudeForm => fisher_amplitude(wf, opts),
    }
}

/// `I_x` from `|psi|^2` and `I_p` from `|to_momentum(psi)|^2`, with the same estimator.
pub fn fisher_product(
    wf: &WaveFunction,
    estimator: Estimator,
    opts: &FisherOptions,
) -> Result<FisherResult> {
    wf.expect_space(Space::Position)?;
    let x = estimate(wf, estimator, opts)?;
    let p = estimate(&wf.to_momentum()?, estimator, opts)?;
    Ok(FisherResult {
        i_x: x.value,
        i_p: p.value,
        product: x.value * p.value,
        estimator,
        diagnostics: x.diagnostics.merge(p.diagnostics),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rustfft::num_complex::Complex64;

    use super::*;
    use crate::grid::{make_grid, sample};

    fn gaussian_density(x: f64) -> f64 {
        (-x * x).exp() / PI.sqrt()
    }

    #[test]
    fn gaussian_density_fisher_is_two() {
        let g = make_grid(-12.0, 12.0, 2048).unwrap();
        let rho: Vec<f64> = g.xs().into_iter().map(gaussian_density).collect();
        let r = fisher_density(&rho, g.dx(), &FisherOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
        assert!(r.diagnostics.regularized_mass < 1e-8);

        let shifted: Vec<f64> = g.xs().into_iter().map(|x| gaussian_density(x - 3.0)).collect();
        let s = fisher_density(&shifted, g.dx(), &FisherOptions::default()).unwrap();
        assert!((s.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn finite_difference_scheme_agrees_on_fine_grid() {
        let g = make_grid(-12.0, 12.0, 8192).unwrap();
        let rho: Vec<f64> = g.xs().into_iter().map(gaussian_density).collect();
        let opts = FisherOptions {
            scheme: DerivativeScheme::FiniteDifference4,
            ..Default::default()
        };
        let r = fisher_density(&rho, g.dx(), &opts).unwrap();
        assert!((r.value - 2.0).abs() < 1e-7, "{}", r.value);
    }

    #[test]
    fn noded_density_uses_limit_at_node() {
        // rho = 2/sqrt(pi) x^2 e^{-x^2}; score 2/x - 2x; I = 6.
        let g = make_grid(-12.0, 12.0, 2048).unwrap();
        let rho: Vec<f64> = g
            .xs()
            .into_iter()
            .map(|x| 2.0 / PI.sqrt() * x * x * (-x * x).exp())
            .collect();
        let r = fisher_density(&rho, g.dx(), &FisherOptions::default()).unwrap();
        assert!((r.value - 6.0).abs() < 1e-6, "{}", r.value);
        assert_eq!(r.diagnostics.node_count, 1);
        assert!(r.diagnostics.regularized_mass < 1e-8);
    }

    #[test]
    fn rejects_bad_densities() {
        let g = make_grid(-12.0, 12.0, 256).unwrap();
        let mut rho: Vec<f64> = g.xs().into_iter().map(gaussian_density).collect();
        let opts = FisherOptions::default();
        let doubled: Vec<f64> = rho.iter().map(|v| 2.0 * v).collect();
        assert!(matches!(
            fisher_density(&doubled, g.dx(), &opts),
            Err(Error::NotNormalized { .. })
        ));
        rho[3] = -1e-10;
        assert!(matches!(
            fisher_density(&rho, g.dx(), &opts),
            Err(Error::NegativeDensity { index: 3, .. })
        ));
        rho[3] = -1e-16;
        assert!(fisher_density(&rho, g.dx(), &opts).is_ok());
    }

    #[test]
    fn amplitude_form_and_global_phase() {
        let g = make_grid(-12.0, 12.0, 4096).unwrap();
        let wf = sample(|x| Complex64::new(PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0), &g).unwrap();
        let opts = FisherOptions::default();
        let a = fisher_amplitude(&wf, &opts).unwrap().value;
        assert!((a - 2.0).abs() < 1e-8, "{a}");
        let rotated = wf.scaled(Complex64::from_polar(1.0, 0.7));
        let b = fisher_amplitude(&rotated, &opts).unwrap().value;
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn amplitude_form_on_first_hermite_function() {
        let g = make_grid(-12.0, 12.0, 4096).unwrap();
        let norm = (2.0 / PI.sqrt()).sqrt();
        let wf = sample(|x| Complex64::new(norm * x * (-x * x / 2.0).exp(), 0.0), &g).unwrap();
        let r = fisher_amplitude(&wf, &FisherOptions::default()).unwrap();
        assert!((r.value - 6.0).abs() < 1e-4, "{}", r.value);
    }

    #[test]
    fn product_of_coherent_state_is_four() {
        let g = make_grid(-12.0, 12.0, 2048).unwrap();
        let wf = sample(|x| Complex64::new(PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0), &g).unwrap();
        let r = fisher_product(&wf, Estimator::DensityForm, &FisherOptions::default()).unwrap();
        assert!((r.product - 4.0).abs() < 1e-6);
        assert!((r.product - r.i_x * r.i_p).abs() <= 1e-15 * r.product);
        assert!(fisher_product(&wf.to_momentum().unwrap(), Estimator::DensityForm, &FisherOptions::default()).is_err());
    }

    #[test]
    fn estimator_names_parse() {
        for e in [Estimator::DensityForm, Estimator::AmplitudeForm] {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
        }
        assert!("entropy".parse::<Estimator>().is_err());
    }
}
