use tflp_core::analytics::{cov_tflp2, var_limit_tflp1, var_tflp1};
use tflp_core::grid::SampleGrid;
use tflp_core::levy::{JumpLaw, LevyDriverSpec};
use tflp_core::process::{
    noise_path, simulate_smooth_regime, simulate_tflp1, ProcessKind, SimOptions, Simulator, TemperedParams,
};

const EL2: f64 = 1.0 / 3.0;

fn cp() -> LevyDriverSpec {
    LevyDriverSpec::standard_compound_poisson()
}

/// Sample variance and its standard error for each column.
fn column_variances(rows: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let n = rows.len() as f64;
    (0..rows[0].len())
        .map(|j| {
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let v = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / (n - 1.0);
            let m4 = rows.iter().map(|r| (r[j] - m).powi(4)).sum::<f64>() / n;
            (v, ((m4 - v * v) / n).sqrt())
        })
        .collect()
}

#[test]
fn zero_driver_gives_zero_paths() {
    let p = TemperedParams::new(0.3, 0.5).unwrap();
    let obs = SampleGrid::new(0.0, 4.0, 64).unwrap();
    let quiet = LevyDriverSpec::CompoundPoisson { intensity: 0.0, jumps: JumpLaw::UniformSymmetric(1.0) };
    for kind in [ProcessKind::Tflp1, ProcessKind::Tflp2] {
        let path = Simulator::new(kind, p, obs, quiet, SimOptions::default()).unwrap().path(4).unwrap();
        assert!(path.values.iter().all(|&v| v == 0.0));
        assert!(noise_path(&path, 1.0).unwrap().values.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn seeds_determine_paths() {
    let p = TemperedParams::new(-0.2, 0.3).unwrap();
    let obs = SampleGrid::new(0.0, 10.0, 200).unwrap();
    let a = simulate_tflp1(&p, &obs, &cp(), 0.0, 17).unwrap();
    let b = simulate_tflp1(&p, &obs, &cp(), 0.0, 17).unwrap();
    let c = simulate_tflp1(&p, &obs, &cp(), 0.0, 18).unwrap();
    assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_ne!(a.values, c.values);
    assert_eq!(a.values[0], 0.0);
    assert_eq!(a.meta.seed, 17);
}

#[test]
fn noise_is_unit_lag_difference() {
    let p = TemperedParams::new(0.2, 0.5).unwrap();
    let obs = SampleGrid::new(0.0, 8.0, 32).unwrap();
    let s = simulate_tflp1(&p, &obs, &cp(), 0.0, 2).unwrap();
    let x = noise_path(&s, 1.0).unwrap();
    assert_eq!(x.meta.kind, ProcessKind::Tfln1);
    assert_eq!(x.values.len(), 29);
    for (k, v) in x.values.iter().enumerate() {
        assert_eq!(*v, s.values[k + 4] - s.values[k]);
    }
}

#[test]
fn increments_are_stationary() {
    let p = TemperedParams::new(0.3, 0.5).unwrap();
    let obs = SampleGrid::new(0.0, 3.0, 6).unwrap();
    let lag = 0.5;
    for kind in [ProcessKind::Tflp1, ProcessKind::Tflp2] {
        let sim = Simulator::new(kind, p, obs, cp(), SimOptions::default()).unwrap();
        let rows: Vec<Vec<f64>> = (0..6000)
            .map(|i| {
                let v = sim.path(1000 + i).unwrap().values;
                // increments over [0, .5], [1, 1.5], [2, 2.5]
                vec![v[1] - v[0], v[3] - v[2], v[5] - v[4]]
            })
            .collect();
        let want = match kind {
            ProcessKind::Tflp1 => var_tflp1(&p, lag, EL2),
            _ => cov_tflp2(&p, lag, lag, EL2).unwrap(),
        };
        for (v, se) in column_variances(&rows) {
            assert!((v - want).abs() < 3.0 * se, "{kind:?}: {v} vs {want} (se {se})");
        }
    }
}

#[test]
fn variance_reaches_plateau() {
    let p = TemperedParams::new(0.2, 0.5).unwrap();
    let obs = SampleGrid::new(0.0, 20.0, 4).unwrap();
    let sim = Simulator::new(ProcessKind::Tflp1, p, obs, cp(), SimOptions { refine: 16, ..SimOptions::default() }).unwrap();
    let rows: Vec<Vec<f64>> = (0..6000).map(|i| sim.path(i).unwrap().values).collect();
    let limit = var_limit_tflp1(&p, EL2);
    let vars = column_variances(&rows);
    // lambda t = 5 and 10
    for &j in &[2usize, 4] {
        let (v, se) = vars[j];
        assert!((v - limit).abs() < 3.0 * se, "t = {}: {v} vs limit {limit} (se {se})", 5.0 * j as f64);
    }
}

#[test]
fn smooth_representation_converges_to_direct_one() {
    let p = TemperedParams::new(0.8, 1.0).unwrap();
    let mut errs = Vec::new();
    for n in [64, 128, 256] {
        let obs = SampleGrid::new(0.0, 4.0, n).unwrap();
        let a = simulate_tflp1(&p, &obs, &cp(), 30.0, 5).unwrap();
        let b = simulate_smooth_regime(&p, &obs, &cp(), 30.0, 5, ProcessKind::Tflp1).unwrap();
        let e = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        errs.push(e);
    }
    for w in errs.windows(2) {
        assert!(w[0] / w[1] > 1.6, "not first order: {errs:?}");
    }
}

fn total_variation(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

#[test]
fn total_variation_under_refinement() {
    let tv_ratio = |d: f64, driver: LevyDriverSpec, smooth: bool| {
        let p = TemperedParams::new(d, 1.0).unwrap();
        let mut tv = Vec::new();
        for n in [1024, 2048] {
            let obs = SampleGrid::new(0.0, 4.0, n).unwrap();
            let path = if smooth {
                simulate_smooth_regime(&p, &obs, &driver, 32.0, 9, ProcessKind::Tflp1).unwrap()
            } else {
                simulate_tflp1(&p, &obs, &driver, 32.0, 9).unwrap()
            };
            tv.push(total_variation(&path.values));
        }
        tv[1] / tv[0]
    };
    let smooth = tv_ratio(0.8, cp(), true);
    assert!((0.9..=1.1).contains(&smooth), "smooth regime ratio {smooth}");
    // finitely many jumps: each contributes a bounded-variation kernel
    let jumps = tv_ratio(0.3, cp(), false);
    assert!((0.95..=1.05).contains(&jumps), "compound Poisson ratio {jumps}");
    // Brownian driver: paths are 0.8-Hölder, discrete TV grows like n^0.2
    let rough = tv_ratio(0.3, LevyDriverSpec::GaussianValidation { sigma: 1.0 }, false);
    assert!(rough > 1.08, "Gaussian driver ratio {rough}");
}

#[test]
fn smooth_representation_requires_d_above_half() {
    let p = TemperedParams::new(0.4, 1.0).unwrap();
    let obs = SampleGrid::new(0.0, 1.0, 8).unwrap();
    assert!(simulate_smooth_regime(&p, &obs, &cp(), 0.0, 1, ProcessKind::Tflp1).is_err());
    assert!(TemperedParams::new(-0.5, 1.0).is_err());
    assert!(TemperedParams::new(0.2, 0.0).is_err());
}
