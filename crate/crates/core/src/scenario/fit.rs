use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.96;

/// Exponential growth rate of a positive series with its 95% confidence band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    /// Fraction per year.
    pub rate: f64,
    pub std_err: f64,
    pub ci95: (f64, f64),
}

/// Ordinary least squares of `ln(value)` on `year`; the confidence interval
/// is the slope plus or minus 1.96 standard errors.
pub fn fit_growth_rate(years: &[f64], values: &[f64]) -> Result<GrowthFit> {
    if years.len() != values.len() {
        return Err(Error::Domain(format!(
            "{} years but {} values",
            years.len(),
            values.len()
        )));
    }
    let n = years.len();
    if n < 3 {
        return Err(Error::Domain(format!("need at least 3 points, got {n}")));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!(
            "growth fit needs positive finite values, got {v}"
        )));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let nf = n as f64;
    let mean_t = years.iter().sum::<f64>() / nf;
    let mean_y = logs.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, y) in years.iter().zip(&logs) {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (y - mean_y);
    }
    if !(sxx > 0.0) {
        return Err(Error::Domain(
            "growth fit needs at least two distinct years".into(),
        ));
    }
    let rate = sxy / sxx;
    let intercept = mean_y - rate * mean_t;
    let sse: f64 = years
        .iter()
        .zip(&logs)
        .map(|(t, y)| (y - intercept - rate * t).powi(2))
        .sum();
    let std_err = (sse / (nf - 2.0) / sxx).sqrt();
    Ok(GrowthFit {
        rate,
        std_err,
        ci95: (rate - Z95 * std_err, rate + Z95 * std_err),
    })
}
