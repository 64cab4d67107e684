//! Fiberwise homogeneous Hamiltonians on model cotangent bundles, their
//! flows, and the identities that homogeneity forces on them.
//!
//! Every model satisfies `H(q, r p) = r^2 H(q, p)`. Two consequences are
//! exposed as residuals that must vanish: Euler's identity
//! `dH(q,p).(0,p) = 2 H(q,p)` and the conjugation
//! `phi^{r t} = delta_r^{-1} . phi^t . delta_r` by the fiber dilation.

mod exact;
mod integrate;
mod model;
mod point;

use std::fmt::Write as _;

use thiserror::Error;

pub use integrate::{flow, FlowConfig, Integrator};
pub use model::{
    parse_model, parse_rational, sample_starshaped, tangent_frame, FourierTerm, HamiltonianModel,
    RadialProfile, PROFILE_CHECK_POINTS,
};
pub use point::{dilation, PhasePoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("zero covector where the Hamiltonian is not smooth")]
    ZeroCovector,
    #[error("Hamiltonian not positive on the fiber ({0})")]
    NonPositiveH(f64),
    #[error("energy drift {drift:e} exceeds cap {cap:e} after all step halvings")]
    EnergyDriftExceeded { drift: f64, cap: f64 },
    #[error("sphere chart constraint violated (|q| = {norm}, q.p = {dot})")]
    ConstraintViolation { norm: f64, dot: f64 },
    #[error("model has no closed-form flow")]
    NoClosedForm,
    #[error("Newton iteration did not converge")]
    NewtonFailed,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),
}

/// Evaluates `H(q, p)`.
pub fn hamiltonian(model: &HamiltonianModel, x: &PhasePoint) -> Result<f64, FlowError> {
    model.hamiltonian(x)
}

/// Chart distance between `phi^{r t}(x)` and `delta_r^{-1} phi^t delta_r x`.
pub fn conjugation_residual(
    model: &HamiltonianModel,
    x: &PhasePoint,
    t: f64,
    r: f64,
    config: &FlowConfig,
) -> Result<f64, FlowError> {
    let direct = flow(model, x, r * t, config)?;
    let conjugated = dilation(&flow(model, &dilation(x, r), t, config)?, 1.0 / r);
    Ok(model.chart_distance(&direct, &conjugated))
}

/// `dH(q,p).(0, p) - 2 H(q, p)` from the analytic gradient.
pub fn euler_residual(model: &HamiltonianModel, x: &PhasePoint) -> Result<f64, FlowError> {
    if x.p().iter().all(|&v| v == 0.0) {
        return Err(FlowError::ZeroCovector);
    }
    let (_, dp) = model.gradient(x)?;
    let liouville: f64 = dp.iter().zip(x.p()).map(|(g, p)| g * p).sum();
    Ok(liouville - 2.0 * model.hamiltonian(x)?)
}

/// Largest deviation between the analytic gradient and central differences
/// with step `h`.
pub fn gradient_mismatch(
    model: &HamiltonianModel,
    x: &PhasePoint,
    h: f64,
) -> Result<f64, FlowError> {
    let d = x.dim();
    let (dq, dp) = model.gradient(x)?;
    let analytic: Vec<f64> = dq[..d].iter().chain(&dp[..d]).copied().collect();
    let z = x.coords();
    let mut worst: f64 = 0.0;
    for j in 0..2 * d {
        let mut plus = z.clone();
        let mut minus = z.clone();
        plus[j] += h;
        minus[j] -= h;
        let fd = (model.hamiltonian(&PhasePoint::from_coords(d, &plus))?
            - model.hamiltonian(&PhasePoint::from_coords(d, &minus))?)
            / (2.0 * h);
        worst = worst.max((fd - analytic[j]).abs());
    }
    Ok(worst)
}

/// Flows `x` through the increasing `times`, each leg starting from the
/// previous state.
pub fn trajectory(
    model: &HamiltonianModel,
    x: &PhasePoint,
    times: &[f64],
    config: &FlowConfig,
) -> Result<Vec<(f64, PhasePoint)>, FlowError> {
    let mut out = Vec::with_capacity(times.len());
    let (mut t_prev, mut state) = (0.0, *x);
    for &t in times {
        state = flow(model, &state, t - t_prev, config)?;
        t_prev = t;
        out.push((t, state));
    }
    Ok(out)
}

/// CSV with header `t,q1..qd,p1..pd`.
pub fn trajectory_csv(samples: &[(f64, PhasePoint)]) -> String {
    let d = samples.first().map_or(0, |(_, x)| x.dim());
    let mut s = String::from("t");
    for i in 1..=d {
        let _ = write!(s, ",q{i}");
    }
    for i in 1..=d {
        let _ = write!(s, ",p{i}");
    }
    s.push('\n');
    for (t, x) in samples {
        let _ = write!(s, "{t}");
        for v in x.q().iter().chain(x.p()) {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}
