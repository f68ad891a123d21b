mod common;

use common::{g1, gl10, kern, line_integral_cuts, singular_left};
use proptest::prelude::*;
use tflp_core::analytics::{
    acvf_tfln1, acvf_tfln1_asymptotic, acvf_tfln2_fourier, cov_tflp1, cov_tflp2, ct_squared, empirical_acvf,
    fit_semi_lrd, periodogram, spec_density_tfln1, spec_density_tfln2, var_limit_tflp1, var_tflp1,
};
use tflp_core::grid::SampleGrid;
use tflp_core::levy::{sample_increments, LevyDriverSpec};
use tflp_core::process::{noise_path, ProcessKind, SimOptions, Simulator, TemperedParams};
use tflp_core::special::gamma_fn;

use std::f64::consts::PI;

fn params(d: f64, l: f64) -> TemperedParams {
    TemperedParams::new(d, l).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// `EL2 int g^I(s,x) g^I(t,x) dx / Gamma(1+d)^2`.
fn cov1_quadrature(d: f64, l: f64, s: f64, t: f64) -> f64 {
    let f = |x: f64| g1(d, l, s, x) * g1(d, l, t, x);
    line_integral_cuts(f, &[0.0, s, t]) / gamma_fn(1.0 + d).unwrap().powi(2)
}

/// `M(u) = int_0^u v^d e^{-l v} dv` by quadrature.
fn m_int(d: f64, l: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    singular_left(|v| v.powf(d) * (-l * v).exp(), 0.0, u, 3.0, 60)
}

fn g2(d: f64, l: f64, t: f64, y: f64) -> f64 {
    kern(d, l, t - y) - kern(d, l, -y) + l * (m_int(d, l, t - y) - m_int(d, l, -y))
}

#[test]
fn ct_squared_examples() {
    assert_eq!(ct_squared(&params(0.3, 0.5), 0.0), 0.0);
    assert!((ct_squared(&params(0.0, 1.0), 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
}

#[test]
fn variance_and_covariance_match_kernel_quadrature() {
    let p = params(0.3, 0.5);
    let v = var_tflp1(&p, 2.0, 1.0);
    assert!(rel(v, cov1_quadrature(0.3, 0.5, 2.0, 2.0)) < 1e-8, "var {v}");
    let c = cov_tflp1(&p, 1.0, 2.0, 1.0);
    assert!(rel(c, cov1_quadrature(0.3, 0.5, 1.0, 2.0)) < 1e-8, "cov {c}");
    assert_eq!(cov_tflp1(&p, 0.0, 0.0, 1.0), 0.0);
}

#[test]
fn variance_limit_examples() {
    assert!((var_limit_tflp1(&params(0.0, 1.0), 1.0) - 1.0).abs() < 1e-15);
    assert!((var_limit_tflp1(&params(0.0, 0.5), 1.0) - 2.0).abs() < 1e-15);
    let p = params(0.3, 0.5);
    let lim = var_limit_tflp1(&p, 1.0 / 3.0);
    assert!(rel(var_tflp1(&p, 40.0, 1.0 / 3.0), lim) < 1e-6);
}

#[test]
fn tflp2_variance_matches_kernel_quadrature() {
    let (d, l) = (0.3, 1.0);
    let f = |y: f64| g2(d, l, 1.0, y).powi(2);
    let oracle = line_integral_cuts(f, &[0.0, 1.0]) / gamma_fn(1.0 + d).unwrap().powi(2);
    let got = cov_tflp2(&params(d, l), 1.0, 1.0, 1.0).unwrap();
    assert!(rel(got, oracle) < 1e-6, "{got} vs {oracle}");
    assert_eq!(cov_tflp2(&params(d, l), 0.0, 1.0, 1.0).unwrap(), 0.0);
    assert!(cov_tflp2(&params(-0.2, l), 1.0, 1.0, 1.0).is_err());
}

#[test]
fn tfln1_acvf_at_zero_and_large_lag() {
    let p = params(0.2, 0.3);
    assert!(rel(acvf_tfln1(&p, 0.0, 1.0), cov1_quadrature(0.2, 0.3, 1.0, 1.0)) < 1e-8);
    let h = 15.0 / 0.3;
    let ratio = acvf_tfln1(&p, h, 1.0) / acvf_tfln1_asymptotic(&p, h);
    assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
    assert!(acvf_tfln1(&p, h, 1.0) < 0.0, "tail is negative");
}

#[test]
fn spectral_density_examples() {
    let p0 = params(0.0, 1.0);
    assert_eq!(spec_density_tfln1(&p0, 0.0), 0.0);
    assert!(rel(spec_density_tfln1(&p0, PI), 2.0 / (2.0 * PI * (1.0 + PI * PI))) < 1e-14);
    let p = params(0.3, 0.7);
    assert!(rel(spec_density_tfln2(&p, 0.0), 1.0 / (4.0 * PI * 0.7f64.powf(0.6))) < 1e-14);
    assert!(rel(spec_density_tfln2(&p, 1e-9), spec_density_tfln2(&p, 0.0)) < 1e-12);
    // Von Kármán shape: (l^2 + w^2)^{-d} (1 - cos w) / w^2
    let pk = params(0.8333, 1.0);
    for w in [0.5, 2.0, 7.0] {
        let shape = (1.0 - f64::cos(w)) / (w * w) * (1.0 + w * w).powf(-0.8333) / (2.0 * PI);
        assert!(rel(spec_density_tfln2(&pk, w), shape) < 1e-12);
    }
}

/// `int_R h(w) dw` for an even density decaying like `w^{-2-2d}` or faster.
fn density_mass(h: impl Fn(f64) -> f64, decay: f64) -> f64 {
    let w = 4000.0 * PI;
    let body = gl10(&h, 0.0, w, 40_000);
    // tail: 1 - cos averages to 1
    let tail = h(w + PI / 2.0) * (w + PI / 2.0).powf(decay) * w.powf(1.0 - decay) / (decay - 1.0);
    2.0 * (body + tail)
}

#[test]
fn plancherel_two_sided_density() {
    for (d, l) in [(0.2, 0.5), (-0.2, 1.0), (0.4, 2.0)] {
        let p = params(d, l);
        let m1 = density_mass(|w| spec_density_tfln1(&p, w), 2.0 + 2.0 * d);
        assert!(rel(2.0 * m1, acvf_tfln1(&p, 0.0, 1.0)) < 1e-5, "I d={d}");
        let m2 = density_mass(|w| spec_density_tfln2(&p, w), 2.0 + 2.0 * d);
        let g0 = acvf_tfln2_fourier(&p, 0.0, 1.0).unwrap();
        assert!(rel(2.0 * m2, g0) < 1e-5, "II d={d}");
    }
}

#[test]
fn small_lambda_approaches_flp() {
    // the neglected kernel tail beyond |x| ~ 1/l costs O(l^{1-2d})
    for d in [0.2, -0.2, 0.35] {
        let c = gamma_fn(d + 1.0).unwrap().powi(2) / (gamma_fn(2.0 * d + 2.0).unwrap() * (PI * (d + 0.5)).sin());
        let v0 = |t: f64| c * t.abs().powf(1.0 + 2.0 * d) / gamma_fn(1.0 + d).unwrap().powi(2);
        for l in [1e-4, 1e-8] {
            let p = params(d, l);
            let tol = if d < 0.3 { 0.01f64.min(2.0 * l.powf(1.0 - 2.0 * d)) } else { 2.0 * l.powf(1.0 - 2.0 * d) };
            for (s, t) in [(0.3, 1.0), (0.7, 0.7), (1.0, 0.5)] {
                let flp = 0.5 * (v0(s) + v0(t) - v0(t - s));
                let got = cov_tflp1(&p, s, t, 1.0);
                assert!(rel(got, flp) < tol.max(1e-9), "d={d} l={l} s={s} t={t}: {got} vs {flp}");
            }
        }
    }
}

#[test]
fn white_noise_estimators() {
    let n = 100_000;
    let g = SampleGrid::new(0.0, n as f64, n).unwrap();
    let x = sample_increments(&LevyDriverSpec::GaussianValidation { sigma: 1.0 }, &g, 3).unwrap();
    let acvf = empirical_acvf(&x, 20).unwrap();
    assert!((acvf[0] - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
    assert!(acvf[1..].iter().all(|a| a.abs() < 4.0 / (n as f64).sqrt()));
    let pg = periodogram(&x[..65_536], 256).unwrap();
    let mean = pg[1..pg.len() - 1].iter().map(|q| q.1).sum::<f64>() / (pg.len() - 2) as f64;
    assert!((mean * 2.0 * PI - 1.0).abs() < 0.02, "mean level {}", mean * 2.0 * PI);
    assert!(pg[1..pg.len() - 1].iter().all(|q| (q.1 * 2.0 * PI - 1.0).abs() < 0.3));
    assert!(empirical_acvf(&[0.0; 64], 5).unwrap().iter().all(|&a| a == 0.0));
    assert!(periodogram(&[0.0; 512], 64).unwrap().iter().all(|q| q.1 == 0.0));
}

#[test]
fn simulated_tfln1_acvf_within_bartlett_bands() {
    let (d, l) = (0.2, 0.3);
    let p = params(d, l);
    let n = 1usize << 18;
    let el2 = 1.0 / 3.0;
    let obs = SampleGrid::new(0.0, (n + 1) as f64, n + 1).unwrap();
    let sim = Simulator::new(ProcessKind::Tflp1, p, obs, LevyDriverSpec::standard_compound_poisson(), SimOptions::default())
        .unwrap();
    let x = noise_path(&sim.path(41).unwrap(), 1.0).unwrap().values;
    let est = empirical_acvf(&x, 20).unwrap();
    let gamma = |k: i64| acvf_tfln1(&p, k as f64, el2);
    for k in 1..=20i64 {
        // Bartlett: var ~ (1/N) sum_j [g(j)^2 + g(j+k) g(j-k)]
        let var: f64 = (-600..=600i64).map(|j| gamma(j).powi(2) + gamma(j + k) * gamma(j - k)).sum::<f64>() / n as f64;
        let want = gamma(k);
        assert!((est[k as usize] - want).abs() < 4.0 * var.sqrt() + 0.01 * want.abs(), "lag {k}: {} vs {want}", est[k as usize]);
    }
}

#[test]
fn semi_lrd_fits() {
    let p = params(0.2, 0.3);
    let h_max = 20.0 / 0.3;
    let pts: Vec<(f64, f64)> =
        (0..=40).map(|i| h_max * (0.5 + 0.5 * i as f64 / 40.0)).map(|h| (h, acvf_tfln1(&p, h, 1.0))).collect();
    let f = fit_semi_lrd(&pts).unwrap();
    assert!((f.lambda_hat - 0.3).abs() < 0.02 && (f.delta_hat - 0.2).abs() < 0.05, "{f:?}");
    let p2 = params(0.4, 0.5);
    let h_max = 20.0 / 0.5;
    let pts: Vec<(f64, f64)> = (0..=40)
        .map(|i| h_max * (0.5 + 0.5 * i as f64 / 40.0))
        .map(|h| (h, acvf_tfln2_fourier(&p2, h, 1.0).unwrap()))
        .collect();
    let f2 = fit_semi_lrd(&pts).unwrap();
    assert!((f2.delta_hat + 0.6).abs() < 0.1, "{f2:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covariance_gram_is_psd(d in -0.45f64..0.49, l in 0.05f64..4.0, t in proptest::array::uniform4(0.01f64..5.0)) {
        let p = params(d, l);
        let m = nalgebra::Matrix4::from_fn(|i, j| cov_tflp1(&p, t[i], t[j], 1.0));
        let scale = m.diagonal().max();
        let eig = m.symmetric_eigenvalues();
        prop_assert!(eig.min() >= -1e-10 * scale.max(1e-300), "{eig:?}");
    }

    #[test]
    fn variance_below_limit(d in -0.45f64..0.49, l in 0.05f64..4.0, t in 0.01f64..10.0) {
        let p = params(d, l);
        let v = var_tflp1(&p, t, 1.0);
        prop_assert!(v > 0.0 && v <= var_limit_tflp1(&p, 1.0) * (1.0 + 1e-10));
    }
}
