//! Polynomial growth of finitely generated matrix groups: exact ball counts,
//! a finite-window growth-degree estimate, and the algebraic degree from
//! lower-central-series ranks.

mod ball;
mod generators;
mod malcev;
mod matrix;

pub use ball::{ball_counts, GrowthSeries};
pub use generators::GeneratorSet;
pub use malcev::{bass_guivarch, hirsch_degree_bound, hirsch_length, malcev_lcs_ranks, LcsRanks};
pub use matrix::IntMatrix;

use thiserror::Error;

use crate::fit::{fit_scaling, Classification, FitError, FitOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("ball exceeded element budget {budget} at radius {radius}")]
    BudgetExceeded { budget: usize, radius: usize },
    #[error("generator {index} is not invertible over the integers")]
    NonInvertibleGenerator { index: usize },
    #[error("generator {index} has size {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("generator set is not unitriangular")]
    NotUnitriangular,
    #[error("radius must be at least 1")]
    InvalidRadius,
    #[error("matrix entry overflowed i64")]
    EntryOverflow,
    #[error("generator file: {0}")]
    Parse(String),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Estimated growth degree of a ball-count series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowGrowthFit {
    /// Fitted degree; `f64::INFINITY` when classified exponential.
    pub exponent: f64,
    /// Inclusive range of radii used.
    pub window: (usize, usize),
    pub residual: f64,
    pub classification: Classification,
}

/// Default trailing window for growth fits.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;

pub fn slow_growth_exponent(
    series: &GrowthSeries,
    window_fraction: f64,
) -> Result<SlowGrowthFit, GrowthError> {
    slow_growth_exponent_with(series, window_fraction, &FitOptions::default())
}

/// Regresses `log counts[m]` on `log(m + 1/2)` over radii `1..=m_max`.
///
/// A ball of radius `m` in a lattice covers roughly the continuum ball of
/// radius `m + 1/2`; regressing on the centred radius removes the leading
/// lower-order bias in the slope, which is what makes short series usable.
pub fn slow_growth_exponent_with(
    series: &GrowthSeries,
    window_fraction: f64,
    options: &FitOptions,
) -> Result<SlowGrowthFit, GrowthError> {
    if series.counts.len() < crate::fit::MIN_SAMPLES {
        return Err(FitError::SeriesTooShort {
            len: series.counts.len(),
            min: crate::fit::MIN_SAMPLES,
        }
        .into());
    }
    let radii: Vec<f64> = (1..series.counts.len()).map(|m| m as f64).collect();
    let centred: Vec<f64> = radii.iter().map(|m| m + 0.5).collect();
    let values: Vec<f64> = series.counts[1..].iter().map(|&c| c as f64).collect();
    let fit = fit_scaling(&centred, &radii, &values, window_fraction, options)?;
    Ok(SlowGrowthFit {
        exponent: fit.exponent,
        window: (fit.window.0 + 1, fit.window.1 + 1),
        residual: fit.residual,
        classification: fit.classification,
    })
}
