//! Small statistical helpers: moments, Kolmogorov–Smirnov, Poisson
//! intervals, empirical quantiles.

use statrs::distribution::{ContinuousCDF, Gamma};

use crate::{Error, Result};

/// Sample mean and its standard error.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One-sample Kolmogorov–Smirnov distance to a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, x)| {
        let f = cdf(*x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// CDF of the Kolmogorov distribution.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// Critical value of the one-sample KS distance at significance `level`,
/// with Stephens' finite-sample correction.
pub fn ks_critical_value(n: usize, level: f64) -> f64 {
    let target = 1.0 - level;
    let (mut lo, mut hi) = (0.2, 5.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sqrt_n = (n as f64).sqrt();
    0.5 * (lo + hi) / (sqrt_n + 0.12 + 0.11 / sqrt_n)
}

/// Exact (Garwood) two-sided confidence interval for a Poisson mean.
pub fn poisson_ci(count: u64, confidence: f64) -> Result<(f64, f64)> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::domain("confidence must lie in (0, 1)"));
    }
    let tail = 0.5 * (1.0 - confidence);
    let gamma_quantile = |shape: f64, p: f64| -> Result<f64> {
        Gamma::new(shape, 1.0)
            .map(|g| g.inverse_cdf(p))
            .map_err(|e| Error::domain(e.to_string()))
    };
    let lower = if count == 0 { 0.0 } else { gamma_quantile(count as f64, tail)? };
    let upper = gamma_quantile(count as f64 + 1.0, 1.0 - tail)?;
    Ok((lower, upper))
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    match sorted.get(i + 1) {
        Some(next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_quantile_at_one_percent() {
        // tabulated K_{0.99} = 1.6276
        let k = ks_critical_value(1_000_000, 0.01) * (1000.0 + 0.12 + 0.11 / 1000.0);
        assert!((k - 1.6276).abs() < 1e-3, "{k}");
    }

    #[test]
    fn ks_of_perfect_grid_is_half_step() {
        let n = 100;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_statistic(&xs, |x| x) - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn poisson_interval_known_values() {
        // Garwood 95% interval for k = 10: (4.7954, 18.3904)
        let (lo, hi) = poisson_ci(10, 0.95).unwrap();
        assert!((lo - 4.7954).abs() < 1e-3 && (hi - 18.3904).abs() < 1e-3, "{lo} {hi}");
        let (lo0, hi0) = poisson_ci(0, 0.95).unwrap();
        assert_eq!(lo0, 0.0);
        assert!((hi0 - 3.6889).abs() < 1e-3);
    }

    #[test]
    fn mean_se_and_quantiles() {
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.25), 1.25);
    }
}
