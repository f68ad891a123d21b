mod common;

use common::{gl10, singular_left};
use num_complex::Complex64;
use proptest::prelude::*;
use tflp_core::grid::SampleGrid;
use tflp_core::levy::{sample_increments, JumpLaw, LevyDriverSpec};

fn unit_increments(spec: &LevyDriverSpec, n: usize, seed: u64) -> Vec<f64> {
    let grid = SampleGrid::new(0.0, n as f64, n).unwrap();
    sample_increments(spec, &grid, seed).unwrap()
}

fn ts(alpha: f64, lambda_noise: f64, symmetric: bool) -> LevyDriverSpec {
    LevyDriverSpec::TemperedStable { alpha, lambda_noise, scale: 1.0, symmetric }
}

/// `int_0^inf (e^{i th x} - 1 - i th x) e^{-l x} x^{-1-a} dx` by quadrature.
fn ts_exponent_quadrature(alpha: f64, l: f64, theta: f64) -> Complex64 {
    let w = |x: f64| (-l * x).exp() * x.powf(-1.0 - alpha);
    let re = |x: f64| -2.0 * (0.5 * theta * x).sin().powi(2) * w(x);
    let im = |x: f64| {
        let y = theta * x;
        let odd = if y.abs() < 1e-3 { -y * y * y / 6.0 * (1.0 - y * y / 20.0) } else { y.sin() - y };
        odd * w(x)
    };
    let far = 1.0 + 90.0 / l;
    let part = |f: &dyn Fn(f64) -> f64| singular_left(f, 0.0, 1.0, 8.0, 400) + gl10(f, 1.0, far, 20_000);
    Complex64::new(part(&re), part(&im))
}

#[test]
fn second_moment_examples() {
    assert!((LevyDriverSpec::standard_compound_poisson().second_moment() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(LevyDriverSpec::GaussianValidation { sigma: 2.0 }.second_moment(), 4.0);
}

#[test]
fn compound_poisson_exponent() {
    let spec = LevyDriverSpec::standard_compound_poisson();
    assert_eq!(spec.char_exponent(0.0), Complex64::new(0.0, 0.0));
    for theta in [0.3, 1.0, 2.5, -4.0] {
        let psi = spec.char_exponent(theta);
        assert!((psi.re - (theta.sin() / theta - 1.0)).abs() < 1e-15);
        assert_eq!(psi.im, 0.0);
    }
}

#[test]
fn tempered_stable_exponent_matches_levy_measure_quadrature() {
    for (alpha, l) in [(1.65, 0.5), (0.7, 1.0), (1.2, 2.0)] {
        for theta in [1.0, 0.4, 3.0] {
            let plus = ts_exponent_quadrature(alpha, l, theta);
            let minus = ts_exponent_quadrature(alpha, l, -theta);
            let one = ts(alpha, l, false).char_exponent(theta);
            let two = ts(alpha, l, true).char_exponent(theta);
            assert!((one - plus).norm() < 1e-7 * plus.norm(), "alpha={alpha} l={l} th={theta}: {one} vs {plus}");
            assert!((two - plus - minus).norm() < 1e-7 * plus.norm(), "symmetric alpha={alpha}");
            assert!(two.im.abs() < 1e-12);
        }
    }
}

#[test]
fn zero_intensity_is_silent() {
    let spec = LevyDriverSpec::CompoundPoisson { intensity: 0.0, jumps: JumpLaw::Gaussian(1.0) };
    assert!(unit_increments(&spec, 1000, 3).iter().all(|&x| x == 0.0));
}

fn mean_var(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = x.iter().map(|y| (y - m).powi(4)).sum::<f64>() / n;
    (m, v, ((m4 - v * v) / n).sqrt())
}

#[test]
fn compound_poisson_moments_and_independence() {
    let n = 1_000_000;
    let x = unit_increments(&LevyDriverSpec::standard_compound_poisson(), n, 11);
    let (m, v, v_se) = mean_var(&x);
    assert!(m.abs() < 3.0 * (1.0 / 3.0 / n as f64).sqrt(), "mean {m}");
    assert!((v - 1.0 / 3.0).abs() < 3.0 * v_se, "var {v}");
    let lag1 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / ((n - 1) as f64 * v);
    assert!(lag1.abs() < 4.0 / (n as f64).sqrt(), "lag-1 correlation {lag1}");
}

#[test]
fn tempered_stable_variance_matches_second_moment() {
    let spec = ts(1.65, 0.01, true);
    let x = unit_increments(&spec, 1_000_000, 5);
    let (_, v, v_se) = mean_var(&x);
    let want = spec.second_moment();
    assert!((v - want).abs() < 3.0 * v_se, "var {v} vs {want} (se {v_se})");
}

#[test]
fn empirical_characteristic_function() {
    let n = 100_000;
    for spec in [LevyDriverSpec::standard_compound_poisson(), ts(1.65, 0.5, true), ts(1.2, 1.0, false)] {
        let x = unit_increments(&spec, n, 21);
        for theta in [0.5, 1.0, 2.0] {
            let emp = x.iter().map(|&y| Complex64::new(0.0, theta * y).exp()).sum::<Complex64>() / n as f64;
            let want = spec.char_exponent(theta).exp();
            assert!((emp - want).norm() < 4.0 / (n as f64).sqrt(), "{spec:?} theta={theta}: {emp} vs {want}");
        }
    }
}

#[test]
fn increments_are_reproducible() {
    let spec = ts(1.65, 0.01, true);
    let a = unit_increments(&spec, 5000, 99);
    let b = unit_increments(&spec, 5000, 99);
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_ne!(a, unit_increments(&spec, 5000, 100));
}

proptest! {
    #[test]
    fn exponent_is_real_nonpositive_for_symmetric(theta in -20.0f64..20.0, alpha in 0.1f64..1.95) {
        let psi = ts(alpha, 0.3, true).char_exponent(theta);
        prop_assert!(psi.re <= 1e-12);
        prop_assert!(psi.im.abs() <= 1e-9 * (1.0 + psi.re.abs()));
    }

    #[test]
    fn invalid_specs_rejected(alpha in 2.0f64..5.0, l in -1.0f64..0.0) {
        prop_assert!(ts(alpha, 0.1, true).validate().is_err());
        prop_assert!(ts(1.0, l, true).validate().is_err());
    }
}
