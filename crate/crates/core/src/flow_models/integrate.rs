//! Deterministic flow integration with energy-drift control.

use nalgebra::{DMatrix, DVector};

use super::exact::exact_flow;
use super::model::HamiltonianModel;
use super::point::PhasePoint;
use super::FlowError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Integrator {
    /// Closed-form flow; only for models that have one.
    Exact,
    ImplicitMidpoint,
    Rk4,
}

impl Integrator {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.trim() {
            "exact" => Ok(Integrator::Exact),
            "implicit_midpoint" | "midpoint" => Ok(Integrator::ImplicitMidpoint),
            "rk4" => Ok(Integrator::Rk4),
            other => Err(format!("unknown integrator {other:?}")),
        }
    }

    pub fn order(&self) -> Option<u32> {
        match self {
            Integrator::Exact => None,
            Integrator::ImplicitMidpoint => Some(2),
            Integrator::Rk4 => Some(4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub step: f64,
    pub integrator: Integrator,
    pub newton_tolerance: f64,
    /// Allowed `|H(end) - H(start)|` per unit time.
    pub energy_drift_cap: f64,
    /// How often the step may be halved before giving up.
    pub max_halvings: u32,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            step: 1e-3,
            integrator: Integrator::ImplicitMidpoint,
            newton_tolerance: 1e-12,
            energy_drift_cap: 1e-6,
            max_halvings: 8,
        }
    }
}

impl FlowConfig {
    pub fn exact() -> Self {
        FlowConfig {
            integrator: Integrator::Exact,
            ..FlowConfig::default()
        }
    }

    pub fn with_integrator(integrator: Integrator, step: f64) -> Self {
        FlowConfig {
            integrator,
            step,
            ..FlowConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        if !(self.step > 0.0 && self.newton_tolerance > 0.0 && self.energy_drift_cap > 0.0) {
            return Err(FlowError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }
}

/// Tolerance for the sphere constraints `|q| = 1`, `q.p = 0` on input.
const CONSTRAINT_TOLERANCE: f64 = 1e-8;

fn check_constraint(model: &HamiltonianModel, x: &PhasePoint) -> Result<(), FlowError> {
    if let HamiltonianModel::RoundSphere2 = model {
        let qq: f64 = x.q().iter().map(|v| v * v).sum();
        let qp: f64 = x.q().iter().zip(x.p()).map(|(a, b)| a * b).sum();
        let scale = 1.0 + x.p_norm();
        if (qq.sqrt() - 1.0).abs() > CONSTRAINT_TOLERANCE || qp.abs() > CONSTRAINT_TOLERANCE * scale
        {
            return Err(FlowError::ConstraintViolation {
                norm: qq.sqrt(),
                dot: qp,
            });
        }
    }
    Ok(())
}

fn project_sphere(x: &mut PhasePoint) {
    let n = x.q().iter().map(|v| v * v).sum::<f64>().sqrt();
    x.q_mut().iter_mut().for_each(|v| *v /= n);
    let q: Vec<f64> = x.q().to_vec();
    let qp: f64 = q.iter().zip(x.p()).map(|(a, b)| a * b).sum();
    for (pi, qi) in x.p_mut().iter_mut().zip(&q) {
        *pi -= qp * qi;
    }
}

/// The Hamiltonian flow `phi_H^t(x)`.
pub fn flow(
    model: &HamiltonianModel,
    x: &PhasePoint,
    t: f64,
    config: &FlowConfig,
) -> Result<PhasePoint, FlowError> {
    config.validate()?;
    check_constraint(model, x)?;
    if model.singular_at_zero() && x.p().iter().all(|&v| v == 0.0) {
        return Err(FlowError::ZeroCovector);
    }
    let mut y = match config.integrator {
        Integrator::Exact => exact_flow(model, x, t).ok_or(FlowError::NoClosedForm)?,
        Integrator::ImplicitMidpoint | Integrator::Rk4 => integrate(model, x, t, config)?,
    };
    model.reduce(&mut y);
    Ok(y)
}

fn integrate(
    model: &HamiltonianModel,
    x: &PhasePoint,
    t: f64,
    config: &FlowConfig,
) -> Result<PhasePoint, FlowError> {
    if t == 0.0 {
        return Ok(*x);
    }
    let h0 = model.hamiltonian(x)?;
    let cap = config.energy_drift_cap * t.abs();
    let mut step = config.step;
    let mut last_drift = f64::NAN;
    for _ in 0..=config.max_halvings {
        let n = (t.abs() / step).ceil().max(1.0) as usize;
        let dt = t / n as f64;
        let mut y = *x;
        let mut ok = true;
        for _ in 0..n {
            let next = match config.integrator {
                Integrator::ImplicitMidpoint => {
                    midpoint_step(model, &y, dt, config.newton_tolerance)
                }
                _ => rk4_step(model, &y, dt),
            };
            match next {
                Ok(mut z) => {
                    if let HamiltonianModel::RoundSphere2 = model {
                        project_sphere(&mut z);
                    }
                    y = z;
                }
                Err(FlowError::NewtonFailed) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            let drift = (model.hamiltonian(&y)? - h0).abs();
            if drift <= cap {
                return Ok(y);
            }
            last_drift = drift;
        }
        step /= 2.0;
    }
    Err(FlowError::EnergyDriftExceeded {
        drift: last_drift,
        cap,
    })
}

fn rk4_step(model: &HamiltonianModel, x: &PhasePoint, dt: f64) -> Result<PhasePoint, FlowError> {
    let d = x.dim();
    let z = x.coords();
    let at = |z: &[f64]| PhasePoint::from_coords(d, z);
    let axpy =
        |a: f64, v: &[f64]| -> Vec<f64> { z.iter().zip(v).map(|(zi, vi)| zi + a * vi).collect() };
    let k1 = model.vector_field(x)?;
    let k2 = model.vector_field(&at(&axpy(dt / 2.0, &k1)))?;
    let k3 = model.vector_field(&at(&axpy(dt / 2.0, &k2)))?;
    let k4 = model.vector_field(&at(&axpy(dt, &k3)))?;
    let out: Vec<f64> = (0..2 * d)
        .map(|i| z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    Ok(at(&out))
}

const NEWTON_MAX_ITERATIONS: usize = 30;

/// One implicit-midpoint step `z1 = z0 + dt f((z0 + z1) / 2)`, solved by
/// Newton's method with a central-difference Jacobian of the analytic
/// vector field.
fn midpoint_step(
    model: &HamiltonianModel,
    x: &PhasePoint,
    dt: f64,
    tolerance: f64,
) -> Result<PhasePoint, FlowError> {
    let d = x.dim();
    let n = 2 * d;
    let z0 = DVector::from_vec(x.coords());
    let field = |z: &DVector<f64>| -> Result<DVector<f64>, FlowError> {
        Ok(DVector::from_vec(
            model.vector_field(&PhasePoint::from_coords(d, z.as_slice()))?,
        ))
    };
    let mut z1 = &z0 + field(&z0)? * dt;
    for _ in 0..NEWTON_MAX_ITERATIONS {
        let mid = (&z0 + &z1) * 0.5;
        let residual = &z1 - &z0 - field(&mid)? * dt;
        let mut jac = DMatrix::<f64>::identity(n, n);
        for j in 0..n {
            let h = 1e-6 * (1.0 + mid[j].abs());
            let mut plus = mid.clone();
            let mut minus = mid.clone();
            plus[j] += h;
            minus[j] -= h;
            let col = (field(&plus)? - field(&minus)?) / (2.0 * h);
            for i in 0..n {
                jac[(i, j)] -= 0.5 * dt * col[i];
            }
        }
        let delta = jac.lu().solve(&residual).ok_or(FlowError::NewtonFailed)?;
        z1 -= &delta;
        let scale = z1.amax().max(1.0);
        if delta.amax() <= tolerance * scale {
            return Ok(PhasePoint::from_coords(d, z1.as_slice()));
        }
    }
    Err(FlowError::NewtonFailed)
}
