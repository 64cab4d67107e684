//! Closed-form flows for the catalog models that have them.

use super::model::HamiltonianModel;
use super::point::PhasePoint;

/// Below this `|theta|` the entire functions are evaluated from their
/// Taylor series to avoid cancellation.
const SERIES_CUTOFF: f64 = 0.5;

/// Sums `sum_{k>=1} term(k)` until the terms stop mattering.
fn series(term: impl Fn(i32) -> f64) -> f64 {
    let mut sum = 0.0;
    for k in 1..40 {
        let t = term(k);
        sum += t;
        if t.abs() <= 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn factorial(n: i32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `sin(theta) / theta`.
pub(crate) fn sinc(theta: f64) -> f64 {
    if theta.abs() < SERIES_CUTOFF {
        1.0 + series(|k| (-1f64).powi(k) * theta.powi(2 * k) / factorial(2 * k + 1))
    } else {
        theta.sin() / theta
    }
}

/// `(1 - cos(theta)) / theta`.
pub(crate) fn cosc(theta: f64) -> f64 {
    if theta.abs() < SERIES_CUTOFF {
        series(|k| (-1f64).powi(k + 1) * theta.powi(2 * k - 1) / factorial(2 * k))
    } else {
        (1.0 - theta.cos()) / theta
    }
}

/// `(theta/2 + sin(2 theta)/4 - sin(theta)) / theta^2`.
fn g1(theta: f64) -> f64 {
    if theta.abs() < SERIES_CUTOFF {
        series(|k| {
            (-1f64).powi(k) * (2f64.powi(2 * k - 1) - 1.0) * theta.powi(2 * k - 1)
                / factorial(2 * k + 1)
        })
    } else {
        (theta / 2.0 + (2.0 * theta).sin() / 4.0 - theta.sin()) / (theta * theta)
    }
}

/// `(sin(theta)^2 - 1 + cos(theta)) / theta^2`.
fn g2(theta: f64) -> f64 {
    if theta.abs() < SERIES_CUTOFF {
        series(|k| {
            (-1f64).powi(k + 1) * (2f64.powi(2 * k - 1) - 1.0) * theta.powi(2 * k - 2)
                / factorial(2 * k)
        })
    } else {
        (theta.sin().powi(2) - 1.0 + theta.cos()) / (theta * theta)
    }
}

/// `(theta/2 - sin(2 theta)/4) / theta^2`.
fn g3(theta: f64) -> f64 {
    if theta.abs() < SERIES_CUTOFF {
        series(|k| {
            (-1f64).powi(k + 1) * 2f64.powi(2 * k - 1) * theta.powi(2 * k - 1)
                / factorial(2 * k + 1)
        })
    } else {
        (theta / 2.0 - (2.0 * theta).sin() / 4.0) / (theta * theta)
    }
}

/// Exact time-`t` map, or `None` when the model has no closed form.
/// Torus coordinates are returned unreduced.
pub fn exact_flow(model: &HamiltonianModel, x: &PhasePoint, t: f64) -> Option<PhasePoint> {
    let (q, p) = (x.q(), x.p());
    match model {
        HamiltonianModel::FlatTorus { dim, metric } => {
            let mut y = *x;
            for i in 0..*dim {
                let gp: f64 = (0..*dim).map(|j| metric[i][j] * p[j]).sum();
                y.q_mut()[i] += 2.0 * t * gp;
            }
            Some(y)
        }
        HamiltonianModel::RoundSphere2 => {
            // Great circle with angular speed 2|p|.
            let rho = x.p_norm();
            if rho == 0.0 {
                return Some(*x);
            }
            let (s, c) = (2.0 * rho * t).sin_cos();
            let mut qn = [0.0; 3];
            let mut pn = [0.0; 3];
            for i in 0..3 {
                qn[i] = q[i] * c + p[i] / rho * s;
                pn[i] = -rho * q[i] * s + p[i] * c;
            }
            Some(PhasePoint::new(&qn, &pn))
        }
        HamiltonianModel::Nil3 => {
            // (px, w = py + x pz) rotates at angular speed 2 pz; py, pz are
            // conserved.
            let (a, b) = (p[0], p[1] + q[0] * p[2]);
            let theta = 2.0 * p[2] * t;
            let (sn, cs) = theta.sin_cos();
            let s_int = t * sinc(theta);
            let c_int = t * cosc(theta);
            let w_int = b * s_int + a * c_int;
            let xn = q[0] + 2.0 * (a * s_int - b * c_int);
            let yn = q[1] + 2.0 * w_int;
            let quad = b * b * g1(theta) + a * b * g2(theta) + a * a * g3(theta);
            let zn = q[2] + 2.0 * q[0] * w_int + 4.0 * t * t * quad + 2.0 * p[2] * t;
            let px = a * cs - b * sn;
            let w = b * cs + a * sn;
            let py = w - xn * p[2];
            Some(PhasePoint::new(&[xn, yn, zn], &[px, py, p[2]]))
        }
        HamiltonianModel::RandersTorus2 { drift } => {
            let norm = p[0].hypot(p[1]);
            if norm == 0.0 {
                return None;
            }
            let f = norm + drift[0] * p[0] + drift[1] * p[1];
            let mut y = *x;
            for i in 0..2 {
                y.q_mut()[i] += 2.0 * t * f * (p[i] / norm + drift[i]);
            }
            Some(y)
        }
        HamiltonianModel::Sol3 | HamiltonianModel::StarshapedTorus2 { .. } => None,
    }
}
