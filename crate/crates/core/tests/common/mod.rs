//! Reference values computed independently of the library's own quadrature
//! and special-function code.

#![allow(dead_code)]

/// Trapezoid sum `h * sum_k f(a + k h)` over the whole line, stopping once
/// terms fall below `1e-18` of the running total in both directions. Exact to
/// rounding for analytic integrands with fast decay.
pub fn trapezoid_line<F: Fn(f64) -> f64>(f: F, center: f64, h: f64) -> f64 {
    let mut sum = f(center);
    for dir in [1.0, -1.0] {
        let mut k = 1.0;
        loop {
            let v = f(center + dir * k * h);
            sum += v;
            if v.abs() <= 1e-18 * sum.abs() && k > 8.0 {
                break;
            }
            k += 1.0;
            assert!(k < 1e6, "trapezoid did not terminate");
        }
    }
    sum * h
}

/// `K_nu(z) = int_0^inf e^{-z cosh t} cosh(nu t) dt`.
pub fn bessel_k_integral(nu: f64, z: f64) -> f64 {
    0.5 * trapezoid_line(|t| (-z * t.cosh() + nu * t).exp() * 0.5 + (-z * t.cosh() - nu * t).exp() * 0.5, 0.0, 0.01)
}

/// `Gamma(x) = int exp(x s - e^s) ds` for `x > 0`.
pub fn gamma_integral(x: f64) -> f64 {
    assert!(x > 0.0);
    let peak = x.ln();
    trapezoid_line(|s| (x * s - s.exp()).exp(), peak, 0.01 / x.sqrt().max(1.0))
}

/// Composite Gauss-Legendre with 10 nodes on `n` equal panels.
pub fn gl10<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    const X: [f64; 5] = [
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const W: [f64; 5] = [
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_1,
    ];
    let h = (b - a) / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let c = a + (i as f64 + 0.5) * h;
        for j in 0..5 {
            let dx = 0.5 * h * X[j];
            s += W[j] * (f(c - dx) + f(c + dx));
        }
    }
    0.5 * h * s
}

/// `int_a^b f` where `f` may have an integrable power singularity at `a`,
/// via `x = a + (b - a) u^m`.
pub fn singular_left<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: f64, n: usize) -> f64 {
    gl10(|u| if u > 0.0 { f(a + (b - a) * u.powf(m)) * (b - a) * m * u.powf(m - 1.0) } else { 0.0 }, 0.0, 1.0, n)
}

/// `u_+^d e^{-l u}` with `0^0 = 1` and `0^d = 0` for `d > 0`.
pub fn kern(d: f64, l: f64, u: f64) -> f64 {
    if u < 0.0 || (u == 0.0 && d > 0.0) {
        0.0
    } else if u == 0.0 {
        if d == 0.0 { 1.0 } else { f64::INFINITY }
    } else {
        u.powf(d) * (-l * u).exp()
    }
}

/// `g^I(t, x) = K(t - x) - K(-x)`.
pub fn g1(d: f64, l: f64, t: f64, x: f64) -> f64 {
    kern(d, l, t - x) - kern(d, l, -x)
}

/// `int_{-inf}^{max cuts} f` where `f` is smooth except for kinks or
/// integrable power singularities at the points in `cuts`.
pub fn line_integral_cuts<F: Fn(f64) -> f64>(f: F, cuts: &[f64]) -> f64 {
    let mut c: Vec<f64> = cuts.to_vec();
    c.sort_by(f64::total_cmp);
    c.dedup();
    c.insert(0, c[0] - 1.0);
    let far = c[0];
    let mut s = gl10(|v| f(far - v / (1.0 - v)) / ((1.0 - v) * (1.0 - v)), 0.0, 1.0, 2000);
    for w in c.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = 0.5 * (a + b);
        s += singular_left(&f, a, m, 4.0, 200);
        s += singular_left(|x| f(a + b - x), a, m, 4.0, 200);
    }
    s
}
