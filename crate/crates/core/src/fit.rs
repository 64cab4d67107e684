//! Finite-window scaling-exponent estimation shared by the group-growth and
//! volume-growth pipelines.
//!
//! A growth limit `limsup log V(s) / log s` can only be estimated from finitely
//! many samples. The estimator here regresses `log V` against `log s` over a
//! trailing window of the samples and, as a competing hypothesis, `log V`
//! against `s` itself. The second fit winning signals exponential growth.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("series too short: {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },
    #[error("window fraction {0} outside (0, 1]")]
    InvalidWindow(f64),
    #[error("non-positive sample {value} at index {index}")]
    NonPositiveSample { index: usize, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Polynomial,
    Exponential,
    Inconclusive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Polynomial => "polynomial",
            Classification::Exponential => "exponential",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thresholds that turn the two regressions into a classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Minimum slope of `log V` against the linear abscissa for an
    /// exponential verdict.
    pub exponential_slope_threshold: f64,
    /// RMS residual of the log-log fit above which the fit is inconclusive.
    pub residual_cap: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            exponential_slope_threshold: 0.05,
            residual_cap: 0.25,
        }
    }
}

/// Minimum number of samples any scaling fit accepts.
pub const MIN_SAMPLES: usize = 8;

/// Raw result of a scaling regression, indexed into the input arrays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    /// Slope of the log-log fit, or `f64::INFINITY` when exponential.
    pub exponent: f64,
    /// Slope of the log-log fit regardless of classification.
    pub power_slope: f64,
    /// Inclusive index range of the samples used.
    pub window: (usize, usize),
    pub residual: f64,
    pub classification: Classification,
    /// Slope and residual of the competing log-linear fit.
    pub linear_slope: f64,
    pub linear_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of the residuals.
    pub rms: f64,
}

/// Ordinary least squares line through `(x, y)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - (intercept + slope * xi);
            r * r
        })
        .sum();
    LineFit {
        slope,
        intercept,
        rms: (sse / n).sqrt(),
    }
}

/// Index of the first sample in the trailing window of `len` samples.
pub fn window_start(len: usize, window_fraction: f64) -> usize {
    let take = ((window_fraction * len as f64).ceil() as usize).clamp(3.min(len), len);
    len - take
}

/// Fits the scaling exponent of `values` over the trailing `window_fraction`
/// of the samples.
///
/// `log_abscissa` holds the abscissa for the power-law fit (it is logged
/// here); `linear_abscissa` the abscissa for the exponential hypothesis.
pub fn fit_scaling(
    log_abscissa: &[f64],
    linear_abscissa: &[f64],
    values: &[f64],
    window_fraction: f64,
    options: &FitOptions,
) -> Result<ScalingFit, FitError> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(FitError::InvalidWindow(window_fraction));
    }
    if values.len() < MIN_SAMPLES {
        return Err(FitError::SeriesTooShort {
            len: values.len(),
            min: MIN_SAMPLES,
        });
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(FitError::NonPositiveSample { index, value });
    }
    let lo = window_start(values.len(), window_fraction);
    let hi = values.len() - 1;
    let ly: Vec<f64> = values[lo..].iter().map(|v| v.ln()).collect();
    let lx: Vec<f64> = log_abscissa[lo..].iter().map(|s| s.ln()).collect();
    let power = least_squares(&lx, &ly);
    let linear = least_squares(&linear_abscissa[lo..], &ly);

    let classification =
        if linear.rms < power.rms && linear.slope > options.exponential_slope_threshold {
            Classification::Exponential
        } else if power.rms > options.residual_cap {
            Classification::Inconclusive
        } else {
            Classification::Polynomial
        };
    let exponent = match classification {
        Classification::Exponential => f64::INFINITY,
        _ => power.slope,
    };
    Ok(ScalingFit {
        exponent,
        power_slope: power.slope,
        window: (lo, hi),
        residual: power.rms,
        classification,
        linear_slope: linear.slope,
        linear_residual: linear.rms,
    })
}
