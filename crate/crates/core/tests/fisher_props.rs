use fisherlab::analytic::{psi_k, AnalyticState};
use fisherlab::fisher::{
    fisher_amplitude, fisher_density, fisher_product, Estimator, FisherOptions,
};
use fisherlab::grid::{make_grid, sample, Grid, WaveFunction};
use fisherlab::Complex64;
use proptest::prelude::*;

fn hermite_wf(k: usize, d: f64, t: f64, grid: &Grid) -> WaveFunction {
    let s = AnalyticState::new(k, d, t).unwrap();
    sample(|x| psi_k(&s, x), grid).unwrap().normalize().unwrap()
}

/// `sum_k c_k psi^(k)(x - shift)` at t = 0 with unit width.
fn superposition(coefs: &[Complex64], shift: f64, grid: &Grid) -> WaveFunction {
    let states: Vec<AnalyticState> = (0..coefs.len())
        .map(|k| AnalyticState::new(k, 1.0, 0.0).unwrap())
        .collect();
    sample(
        |x| {
            coefs
                .iter()
                .zip(&states)
                .map(|(c, s)| c * psi_k(s, x - shift))
                .sum()
        },
        grid,
    )
    .unwrap()
    .normalize()
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn estimators_agree_on_nodeless_states() {
    let opts = FisherOptions::default();
    let grid = make_grid(-20.0, 20.0, 8192).unwrap();
    let cases = vec![
        hermite_wf(0, 1.0, 0.0, &grid),
        hermite_wf(0, 0.7, 1.3, &grid),
        superposition(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.8)], 0.0, &grid),
        superposition(
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.5),
                Complex64::new(0.2, 0.0),
            ],
            1.5,
            &grid,
        ),
    ];
    for wf in &cases {
        let a = fisher_density(&wf.density(), wf.spacing(), &opts).unwrap();
        let b = fisher_amplitude(wf, &opts).unwrap();
        assert_eq!(a.diagnostics.node_count, 0);
        assert!(rel(b.value, a.value) < 1e-6, "{} vs {}", a.value, b.value);
    }
}

#[test]
fn estimators_agree_on_noded_states() {
    let opts = FisherOptions::default();
    for k in 1..=3 {
        // odd sample count puts a sample exactly on the central node
        for n in [8192usize, 8191] {
            let grid = Grid::new(-20.0, 40.0 / n as f64, n).unwrap();
            let wf = hermite_wf(k, 1.0, 0.0, &grid);
            let a = fisher_density(&wf.density(), wf.spacing(), &opts).unwrap();
            let b = fisher_amplitude(&wf, &opts).unwrap();
            assert!(rel(b.value, a.value) < 1e-4, "k={k} n={n}: {} vs {}", a.value, b.value);
            assert!(a.diagnostics.regularized_mass < 1e-8);
        }
    }
}

#[test]
fn product_examples() {
    let opts = FisherOptions::default();
    let grid = make_grid(-20.0, 20.0, 4096).unwrap();
    let g = fisher_product(&hermite_wf(0, 1.0, 0.0, &grid), Estimator::DensityForm, &opts).unwrap();
    assert!((g.product - 4.0).abs() < 1e-6);
    assert!((g.product - g.i_x * g.i_p).abs() <= 1e-15 * g.product);
    let h = fisher_product(&hermite_wf(1, 1.0, 0.0, &grid), Estimator::DensityForm, &opts).unwrap();
    assert!((h.product - 36.0).abs() < 1e-4);
    assert!(h.diagnostics.regularized_mass < 1e-8);
    let fine = make_grid(-100.0, 100.0, 1 << 16).unwrap();
    let a = fisher_product(&hermite_wf(1, 1.0, 0.0, &fine), Estimator::AmplitudeForm, &opts).unwrap();
    assert!((a.product - 36.0).abs() / 36.0 < 1e-4, "{}", a.product);
}

#[test]
fn scaling_law() {
    let opts = FisherOptions::default();
    let grid = make_grid(-30.0, 30.0, 8192).unwrap();
    let xs = grid.xs();
    let base = |x: f64| {
        let s = AnalyticState::new(1, 1.0, 0.0).unwrap();
        let a = AnalyticState::new(0, 1.0, 0.0).unwrap();
        (psi_k(&s, x) * 0.6 + psi_k(&a, x - 0.5) * Complex64::new(0.0, 0.8)).norm_sqr()
    };
    let mass: f64 = xs.iter().map(|&x| base(x)).sum::<f64>() * grid.dx();
    let rho = |lambda: f64| -> Vec<f64> {
        xs.iter().map(|&x| base(x / lambda) / lambda / mass).collect()
    };
    let i1 = fisher_density(&rho(1.0), grid.dx(), &opts).unwrap().value;
    for lambda in [0.5, 2.0, 3.0] {
        let il = fisher_density(&rho(lambda), grid.dx(), &opts).unwrap().value;
        assert!(rel(il * lambda * lambda, i1) < 1e-6, "lambda={lambda}: {il} vs {i1}");
    }
}

#[test]
fn momentum_second_moment_example() {
    let grid = make_grid(-20.0, 20.0, 4096).unwrap();
    let mom = hermite_wf(1, 1.0, 0.0, &grid).to_momentum().unwrap();
    assert!((mom.moment(2).unwrap() - 1.5).abs() < 1e-9);
    assert!((mom.moment(0).unwrap() - 1.0).abs() < 1e-12);
}

fn coefs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..=max_len)
        .prop_filter("nonzero", |v| v.iter().map(|c| c * c).sum::<f64>() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_states_respect_bound_and_identity(c in coefs(7)) {
        let grid = make_grid(-20.0, 20.0, 4096).unwrap();
        let cs: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let wf = superposition(&cs, 0.0, &grid);
        let r = fisher_product(&wf, Estimator::DensityForm, &FisherOptions::default()).unwrap();
        prop_assert!(r.product >= 4.0 * (1.0 - 1e-6), "product {}", r.product);
        let p2 = wf.to_momentum().unwrap().moment(2).unwrap();
        prop_assert!(rel(r.i_x, 4.0 * p2) < 1e-6, "i_x {} vs 4<p^2> {}", r.i_x, 4.0 * p2);
    }

    #[test]
    fn translation_by_grid_steps(c in coefs(4), im in coefs(4), steps in -300i64..300) {
        let grid = make_grid(-25.0, 25.0, 4096).unwrap();
        let cs: Vec<Complex64> = c.iter().zip(im.iter().chain(std::iter::repeat(&0.0)))
            .map(|(&a, &b)| Complex64::new(a, b)).collect();
        let shift = steps as f64 * grid.dx();
        let opts = FisherOptions::default();
        let a = superposition(&cs, 0.0, &grid);
        let b = superposition(&cs, shift, &grid);
        let fa = fisher_density(&a.density(), a.spacing(), &opts).unwrap().value;
        let fb = fisher_density(&b.density(), b.spacing(), &opts).unwrap().value;
        prop_assert!(rel(fb, fa) < 1e-9, "{} vs {}", fa, fb);
    }

    #[test]
    fn global_phase_and_nonnegativity(c in coefs(5), phi in 0.0f64..6.3) {
        let grid = make_grid(-20.0, 20.0, 2048).unwrap();
        let cs: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.3 * v)).collect();
        let wf = superposition(&cs, 0.0, &grid);
        let opts = FisherOptions::default();
        let a = fisher_product(&wf, Estimator::DensityForm, &opts).unwrap();
        let b = fisher_product(&wf.scaled(Complex64::from_polar(1.0, phi)), Estimator::DensityForm, &opts).unwrap();
        prop_assert!(a.i_x >= 0.0 && a.i_p >= 0.0);
        prop_assert!(rel(b.product, a.product) < 1e-9, "{} vs {}", a.product, b.product);
    }
}
