//! Least-squares power laws in log-log coordinates.

use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided 95% t interval for the slope (equal to the slope with two points).
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
    /// None when the fit is defined, otherwise the reason it is not.
    pub undefined: Option<String>,
}

impl SlopeFit {
    fn undefined(points: usize, why: &str) -> Self {
        SlopeFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            points,
            undefined: Some(why.to_string()),
        }
    }

    pub fn is_defined(&self) -> bool {
        self.undefined.is_none()
    }
}

/// Fits log y = slope log x + intercept.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> SlopeFit {
    let n = x.len();
    if n != y.len() || n < 2 {
        return SlopeFit::undefined(n, "need at least two paired points");
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return SlopeFit::undefined(n, "nonpositive or non-finite values");
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = ly.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return SlopeFit::undefined(n, "abscissae coincide");
    }
    if syy <= 1e-24 * (1.0 + my * my) {
        return SlopeFit::undefined(n, "family is constant");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (ci_low, ci_high) = if n > 2 {
        let rss: f64 = lx
            .iter()
            .zip(&ly)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        let se = (rss / (n - 2) as f64 / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, (n - 2) as f64)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(f64::NAN);
        (slope - t * se, slope + t * se)
    } else {
        (slope, slope)
    };
    SlopeFit {
        slope,
        intercept,
        ci_low,
        ci_high,
        points: n,
        undefined: None,
    }
}

/// Fit of y / |log x| against x: the exponent once a logarithmic factor is divided out.
pub fn fit_loglog_log_corrected(x: &[f64], y: &[f64]) -> SlopeFit {
    let yc: Vec<f64> = x.iter().zip(y).map(|(a, b)| b / a.ln().abs()).collect();
    fit_loglog(x, &yc)
}

/// n points geometrically spaced on [lo, hi].
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x = geomspace(1e-3, 1e-1, 5);
        let y: Vec<f64> = x.iter().map(|e| 3.0 * e * e).collect();
        let f = fit_loglog(&x, &y);
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(f.ci_high - f.ci_low < 1e-6);
    }

    #[test]
    fn constant_family_is_flagged() {
        let x = geomspace(1e-3, 1e-1, 4);
        assert!(!fit_loglog(&x, &[2.0; 4]).is_defined());
        assert!(!fit_loglog(&x, &[0.0; 4]).is_defined());
    }
}
