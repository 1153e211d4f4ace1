//! Least-squares fits of cost = a·log₂(1/θ) + b.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    /// 95% confidence interval for the slope.
    pub ci_a: (f64, f64),
    pub n: usize,
}

impl LogFit {
    /// The same line with x measured as ln(1/θ) instead of log₂(1/θ).
    pub fn per_natural_log(&self) -> LogFit {
        let k = std::f64::consts::LOG2_E;
        LogFit { a: self.a * k, b: self.b, ci_a: (self.ci_a.0 * k, self.ci_a.1 * k), n: self.n }
    }
}

/// Fit y = a·x + b by ordinary least squares with a Student-t 95% interval
/// on a; x is log₂(1/θ).
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<LogFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::InvalidInput("x and y lengths differ".into()));
    }
    if n < 3 {
        return Err(Error::InvalidInput("need at least three points".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx.is_nan() || sxx <= 1e-12 * (1.0 + mx * mx) * nf {
        return Err(Error::InvalidInput("degenerate spread in log2(1/theta)".into()));
    }
    let a = sxy / sxx;
    let b = my - a * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a * x - b).powi(2)).sum();
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| Error::InvalidInput(format!("t distribution: {e}")))?
        .inverse_cdf(0.975);
    Ok(LogFit { a, b, ci_a: (a - t * se, a + t * se), n })
}

/// Fit over (θ, cost) pairs with θ ∈ (0, 1).
pub fn fit_log_model(points: &[(f64, f64)]) -> Result<LogFit> {
    if points.iter().any(|&(t, _)| !(t > 0.0 && t < 1.0)) {
        return Err(Error::InvalidInput("every theta must lie in (0, 1)".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| -p.0.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    fit_linear(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (1..10).map(|k| (2f64.powi(-k), 3.0 * k as f64 + 1.0)).collect();
        let f = fit_log_model(&pts).unwrap();
        assert!((f.a - 3.0).abs() < 1e-12 && (f.b - 1.0).abs() < 1e-10);
        assert!(f.ci_a.0 <= 3.0 + 1e-9 && f.ci_a.1 >= 3.0 - 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_log_model(&[(0.5, 1.0), (0.5, 2.0), (0.5, 3.0)]).is_err());
        assert!(fit_log_model(&[(0.5, 1.0), (0.25, 2.0)]).is_err());
        assert!(fit_log_model(&[(1.5, 1.0), (0.25, 2.0), (0.1, 3.0)]).is_err());
    }
}
