//! Summary statistics over samples of relative errors.

/// Linearly interpolated quantile of sorted data, `prob` in `[0, 1]`.
pub fn quantile(sorted: &[f64], prob: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = prob * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean, population standard deviation and root mean square of `values`.
pub fn moments(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let rmse = (mean * mean + var).sqrt();
    (mean, var.sqrt(), rmse)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub stdev: f64,
    pub rmse: f64,
    pub median: f64,
    pub q01: f64,
    pub q05: f64,
    pub q95: f64,
    pub q99: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let (mean, stdev, rmse) = moments(values);
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            count: values.len(),
            mean,
            stdev,
            rmse,
            median: quantile(&sorted, 0.5),
            q01: quantile(&sorted, 0.01),
            q05: quantile(&sorted, 0.05),
            q95: quantile(&sorted, 0.95),
            q99: quantile(&sorted, 0.99),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert!((quantile(&v, 0.25) - 1.75).abs() < 1e-15);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn moments_population() {
        let (mean, sd, rmse) = moments(&[1.0, 3.0]);
        assert_eq!((mean, sd), (2.0, 1.0));
        assert!((rmse - 5f64.sqrt()).abs() < 1e-15);
    }
}
