//! Volume growth of the fiber sphere `Sigma_q` and the punctured fiber disc
//! under homogeneous Hamiltonian flows.

mod evolve;
mod mesh;

use thiserror::Error;

pub use evolve::{
    evolve_and_measure, mesh_volume, resolution_certificate, RefineSettings, VolumeSeries,
    WRAP_LIMIT,
};
pub use mesh::{
    icosphere, initial_fiber_disc, initial_fiber_sphere, Cells, FiberParam, FiberSphereMesh,
    Insertion, MeshKind, MIN_CIRCLE_SAMPLES, MIN_ICOSPHERE_LEVEL,
};

use crate::fit::{fit_scaling, Classification, FitError, FitOptions};
use crate::flow_models::{FlowConfig, FlowError, HamiltonianModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolumeError {
    #[error("mesh exceeded vertex budget {budget} at t = {time}")]
    BudgetExceeded {
        budget: usize,
        time: f64,
        /// Volumes recorded before the budget ran out.
        partial: Option<Box<VolumeSeries>>,
    },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("invalid mesh resolution {0}")]
    InvalidResolution(usize),
    #[error("puncture radius {0} outside (0, 1)")]
    InvalidPuncture(f64),
    #[error("unsupported fiber dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid base point: {0}")]
    InvalidBasePoint(String),
    #[error("times must be positive and strictly increasing")]
    InvalidTimes,
    #[error("times must span at least one decade")]
    ShortTimeSpan,
    #[error("invalid refinement settings: {0}")]
    InvalidSettings(String),
}

/// Default puncture radius of the fiber disc.
pub const DEFAULT_PUNCTURE: f64 = 0.05;

/// Geometric time grid `2^k` for `k = 0..=k_max`.
pub fn doubling_times(k_max: u32) -> Vec<f64> {
    (0..=k_max).map(|k| 2f64.powi(k as i32)).collect()
}

/// `count` times geometrically spaced from `start` to `end`.
pub fn geometric_times(start: f64, end: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && start > 0.0 && end > start);
    let ratio = (end / start).ln() / (count - 1) as f64;
    (0..count)
        .map(|k| start * (ratio * k as f64).exp())
        .collect()
}

/// Estimated slow volume growth of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowVolFit {
    /// Fitted exponent; `f64::INFINITY` when classified exponential.
    pub exponent: f64,
    /// Time range used.
    pub window: (f64, f64),
    pub residual: f64,
    pub classification: Classification,
}

pub fn slow_vol_fit(
    series: &VolumeSeries,
    window_fraction: f64,
) -> Result<SlowVolFit, VolumeError> {
    slow_vol_fit_with(series, window_fraction, &FitOptions::default())
}

/// Regresses `log volume` on `log t` over the trailing window.
pub fn slow_vol_fit_with(
    series: &VolumeSeries,
    window_fraction: f64,
    options: &FitOptions,
) -> Result<SlowVolFit, VolumeError> {
    fit_times(&series.times, &series.volumes, window_fraction, options)
}

fn fit_times(
    times: &[f64],
    values: &[f64],
    window_fraction: f64,
    options: &FitOptions,
) -> Result<SlowVolFit, VolumeError> {
    if times.len() >= crate::fit::MIN_SAMPLES && times[times.len() - 1] < 10.0 * times[0] {
        return Err(VolumeError::ShortTimeSpan);
    }
    let fit = fit_scaling(times, times, values, window_fraction, options)?;
    Ok(SlowVolFit {
        exponent: fit.exponent,
        window: (times[fit.window.0], times[fit.window.1]),
        residual: fit.residual,
        classification: fit.classification,
    })
}

/// Parameters shared by both meshes of a disc-versus-sphere comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionSettings {
    pub sphere: RefineSettings,
    pub disc: RefineSettings,
    /// Circle samples (2D) or icosphere level (3D).
    pub resolution: usize,
    pub radial_layers: usize,
    pub inner_radius: f64,
    pub window_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionGap {
    pub disc_exponent: f64,
    pub sphere_exponent: f64,
    pub disc_fit: SlowVolFit,
    pub sphere_fit: SlowVolFit,
    pub disc_series: VolumeSeries,
    pub sphere_series: VolumeSeries,
}

impl ReductionGap {
    /// `disc <= sphere + 1 + tolerance`.
    pub fn satisfies_bound(&self, tolerance: f64) -> bool {
        self.disc_exponent <= self.sphere_exponent + 1.0 + tolerance
    }
}

/// Measures the growth of the fiber sphere and of the punctured fiber disc
/// at `q` under the same flow.
pub fn reduction_gap(
    model: &HamiltonianModel,
    q: &[f64],
    times: &[f64],
    config: &FlowConfig,
    settings: &ReductionSettings,
) -> Result<ReductionGap, VolumeError> {
    let mut sphere = initial_fiber_sphere(model, q, settings.resolution)?;
    let sphere_series = evolve_and_measure(model, &mut sphere, times, config, &settings.sphere)?;
    let mut disc = initial_fiber_disc(
        model,
        q,
        settings.resolution,
        settings.radial_layers,
        settings.inner_radius,
    )?;
    let disc_series = evolve_and_measure(model, &mut disc, times, config, &settings.disc)?;
    let sphere_fit = slow_vol_fit(&sphere_series, settings.window_fraction)?;
    let disc_fit = slow_vol_fit(&disc_series, settings.window_fraction)?;
    Ok(ReductionGap {
        disc_exponent: disc_fit.exponent,
        sphere_exponent: sphere_fit.exponent,
        disc_fit,
        sphere_fit,
        disc_series,
        sphere_series,
    })
}

/// Fitted growth exponents `(of the running integral of f, of f)` from samples
/// `(r, f(r))` on an increasing positive grid.
///
/// The running integral uses the trapezoid rule between samples, starting
/// from `r_0 f(r_0)` for the stretch `[0, r_0]`.
pub fn integral_growth_check(samples: &[(f64, f64)]) -> Result<(f64, f64), VolumeError> {
    integral_growth_check_with(samples, 0.5)
}

pub fn integral_growth_check_with(
    samples: &[(f64, f64)],
    window_fraction: f64,
) -> Result<(f64, f64), VolumeError> {
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) || samples.iter().any(|s| !(s.0 > 0.0)) {
        return Err(VolumeError::InvalidTimes);
    }
    let r: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let f: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let mut integral = Vec::with_capacity(samples.len());
    let mut acc = r.first().copied().unwrap_or(0.0) * f.first().copied().unwrap_or(0.0);
    integral.push(acc);
    for w in samples.windows(2) {
        acc += 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1);
        integral.push(acc);
    }
    let options = FitOptions::default();
    let fi = fit_scaling(&r, &r, &integral, window_fraction, &options)?;
    let ff = fit_scaling(&r, &r, &f, window_fraction, &options)?;
    Ok((fi.power_slope, ff.power_slope))
}
