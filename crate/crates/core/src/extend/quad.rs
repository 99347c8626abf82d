//! Gauss–Legendre quadrature and Chebyshev series.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Integrates `f` over [a, b] with an n-point Gauss–Legendre rule.
pub fn integrate(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(&w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

/// Composite 8-point Gauss–Legendre over the dyadic rings [2^-(j+1), 2^-j] of [lo, 1],
/// each ring split into `sub` equal panels.
pub fn integrate_dyadic(lo: f64, sub: usize, f: impl Fn(f64) -> f64) -> f64 {
    let sub = sub.max(1);
    let (x, w) = gauss_legendre(8);
    let mut total = 0.0;
    let mut hi = 1.0;
    while hi > lo {
        let a = (0.5 * hi).max(lo);
        for q in 0..sub {
            let p0 = a + (hi - a) * q as f64 / sub as f64;
            let p1 = a + (hi - a) * (q + 1) as f64 / sub as f64;
            let (c, h) = (0.5 * (p0 + p1), 0.5 * (p1 - p0));
            total += x.iter().zip(&w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h;
        }
        hi = a;
    }
    total
}

/// Complex Chebyshev series on [a, b].
#[derive(Clone, Debug, PartialEq)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<Complex64>,
    dcoeffs: Vec<Complex64>,
}

fn derivative_coeffs(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    if n <= 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n - 1).rev() {
        let next = if k + 2 < n { d[k + 2] } else { Complex64::new(0.0, 0.0) };
        d[k] = next + c[k + 1] * (2.0 * (k + 1) as f64);
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

fn clenshaw(c: &[Complex64], x: f64) -> Complex64 {
    let (mut b1, mut b2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for ck in c.iter().skip(1).rev() {
        let b0 = ck + b1 * (2.0 * x) - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + b1 * x - b2
}

impl Chebyshev {
    pub fn new(a: f64, b: f64, coeffs: Vec<Complex64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![Complex64::new(0.0, 0.0)] } else { coeffs };
        let dcoeffs = derivative_coeffs(&coeffs);
        Chebyshev { a, b, coeffs, dcoeffs }
    }

    pub fn zero(a: f64, b: f64) -> Self {
        Chebyshev::new(a, b, vec![Complex64::new(0.0, 0.0)])
    }

    /// Interpolates `f` at degree+1 Chebyshev–Gauss points.
    pub fn interpolate(a: f64, b: f64, degree: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let n = degree + 1;
        let vals: Vec<(f64, Complex64)> = (0..n)
            .map(|i| {
                let th = PI * (i as f64 + 0.5) / n as f64;
                (th, f(0.5 * (a + b) + 0.5 * (b - a) * th.cos()))
            })
            .collect();
        let coeffs = (0..n)
            .map(|j| {
                let s: Complex64 = vals.iter().map(|(th, v)| v * (j as f64 * th).cos()).sum();
                s * (if j == 0 { 1.0 } else { 2.0 } / n as f64)
            })
            .collect();
        Chebyshev::new(a, b, coeffs)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn x(&self, t: f64) -> f64 {
        (2.0 * t - self.a - self.b) / (self.b - self.a)
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        clenshaw(&self.coeffs, self.x(t))
    }

    pub fn deriv(&self, t: f64) -> Complex64 {
        clenshaw(&self.dcoeffs, self.x(t)) * (2.0 / (self.b - self.a))
    }

    pub fn map_coeffs(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Chebyshev::new(
            self.a,
            self.b,
            self.coeffs.iter().enumerate().map(|(j, c)| f(j, *c)).collect(),
        )
    }

    pub fn conj(&self) -> Self {
        self.map_coeffs(|_, c| c.conj())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..12 {
            let deg = 2 * n - 1;
            let val = integrate(0.0, 2.0, n, |x| x.powi(deg as i32));
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert!((val - exact).abs() < 1e-12 * exact, "n={n}");
        }
    }

    #[test]
    fn chebyshev_reproduces_cosh_and_derivative() {
        let c = Chebyshev::interpolate(0.0, 2.0, 30, |t| Complex64::new(t.cosh(), 0.0));
        for t in [0.0, 0.3, 1.7, 2.0] {
            assert!((c.eval(t).re - t.cosh()).abs() < 1e-13);
            assert!((c.deriv(t).re - t.sinh()).abs() < 1e-11);
        }
    }

    #[test]
    fn dyadic_rule_integrates_log() {
        let lo = (-3.0f64).exp();
        let v = integrate_dyadic(lo, 1, |r| r.ln());
        let exact = (-1.0) - (lo * lo.ln() - lo);
        assert!((v - exact).abs() < 1e-13);
    }
}
