//! Special functions needed by the statistics kernels: the error function
//! and its inverse, log-gamma, the regularised incomplete beta function,
//! and Gauss-Legendre quadrature nodes.

use std::sync::LazyLock;

const TWO_OVER_SQRT_PI: f64 = 1.128_379_167_095_512_6;

/// Error function, accurate to double precision.
///
/// Uses the non-alternating scaled series
/// `erf(x) = (2/sqrt(pi)) x e^(-x^2) sum (2x^2)^n / (2n+1)!!`,
/// which is free of cancellation; beyond |x| = 6 the result is +-1 to more
/// than 15 digits.
pub fn erf(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    if ax >= 6.0 {
        return 1.0f64.copysign(x);
    }
    let x2 = ax * ax;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut n = 0u32;
    loop {
        term *= 2.0 * x2 / (2.0 * n as f64 + 3.0);
        sum += term;
        n += 1;
        if term < sum * 1e-17 || n > 400 {
            break;
        }
    }
    (TWO_OVER_SQRT_PI * ax * (-x2).exp() * sum).copysign(x)
}

/// Inverse error function on (-1, 1): Winitzki's approximation polished by
/// Newton steps on `erf`.
pub fn erfinv(y: f64) -> f64 {
    assert!(y > -1.0 && y < 1.0, "erfinv domain is (-1, 1)");
    if y == 0.0 {
        return 0.0;
    }
    let a = 0.147f64;
    let ln1my2 = (1.0 - y * y).ln();
    let term = 2.0 / (std::f64::consts::PI * a) + ln1my2 / 2.0;
    let mut x = ((term * term - ln1my2 / a).sqrt() - term).sqrt().copysign(y);
    for _ in 0..4 {
        let err = erf(x) - y;
        let deriv = TWO_OVER_SQRT_PI * (-x * x).exp();
        x -= err / deriv;
    }
    x
}

/// Natural log of the gamma function (Lanczos approximation, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Log of the beta function.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularised incomplete beta function `I_x(a, b)` via the standard
/// continued-fraction expansion.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "beta_inc needs x in [0, 1]");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let front = (a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b)).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        // Continued fraction converges faster on the mirrored arguments.
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-style initial guess, polished by Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp;
        loop {
            let mut p1 = 1.0f64;
            let mut p2 = 0.0f64;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        out.push((-z, w));
        if 2 * (i + 1) <= n && (n % 2 == 0 || i + 1 < m) {
            out.push((z, w));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// 256-node Gauss-Legendre table mapped to `[0, 1]`, shared by the
/// distribution checks; computed once, immutable afterwards.
pub static UNIT_QUADRATURE: LazyLock<Vec<(f64, f64)>> = LazyLock::new(|| {
    gauss_legendre(256)
        .into_iter()
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
});

/// Integrates `f` over `[0, 1]` with the shared quadrature table.
pub fn integrate_unit(f: impl Fn(f64) -> f64) -> f64 {
    UNIT_QUADRATURE.iter().map(|&(x, w)| w * f(x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erf_reference_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-12);
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-12);
        assert!((erf(2.0) - 0.995_322_265_018_952_7).abs() < 1e-12);
        assert!((erf(10.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn erf_is_odd() {
        for &x in &[0.1, 0.7, 1.3, 2.9, 5.5] {
            assert_eq!(erf(-x), -erf(x));
        }
    }

    #[test]
    fn erfinv_round_trips() {
        for &x in &[0.01, 0.3, 0.9, 1.5, 2.5] {
            let y = erf(x);
            assert!((erfinv(y) - x).abs() < 1e-10, "x = {x}");
            assert!((erfinv(-y) + x).abs() < 1e-10);
        }
        // Where erf flattens, round-trip in function space instead.
        for &y in &[0.999, 0.999_999, 0.999_999_99] {
            assert!((erf(erfinv(y)) - y).abs() < 1e-13, "y = {y}");
        }
    }

    #[test]
    fn ln_gamma_reference_values() {
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
        assert!((ln_gamma(1.0)).abs() < 1e-12);
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(10.5) - 13.940_625_219_403_764).abs() < 1e-9);
    }

    #[test]
    fn beta_inc_closed_forms() {
        for &x in &[0.0, 0.2, 0.5, 0.8, 1.0] {
            assert!((beta_inc(1.0, 1.0, x) - x).abs() < 1e-12);
            let expected = 3.0 * x * x - 2.0 * x * x * x;
            assert!((beta_inc(2.0, 2.0, x) - expected).abs() < 1e-12);
            assert!((beta_inc(2.0, 1.0, x) - x * x).abs() < 1e-12);
        }
        // Symmetry.
        assert!((beta_inc(3.0, 5.0, 0.3) - (1.0 - beta_inc(5.0, 3.0, 0.7))).abs() < 1e-12);
    }

    #[test]
    fn quadrature_integrates_polynomials_and_exp() {
        let third = integrate_unit(|x| x * x);
        assert!((third - 1.0 / 3.0).abs() < 1e-14);
        let e = integrate_unit(f64::exp);
        assert!((e - (std::f64::consts::E - 1.0)).abs() < 1e-13);
        let weight_sum: f64 = UNIT_QUADRATURE.iter().map(|&(_, w)| w).sum();
        assert!((weight_sum - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_handles_odd_orders() {
        for n in [3, 5, 17] {
            let nodes = gauss_legendre(n);
            assert_eq!(nodes.len(), n);
            let total: f64 = nodes.iter().map(|&(_, w)| w).sum();
            assert!((total - 2.0).abs() < 1e-13);
        }
    }
}
