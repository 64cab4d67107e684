//! Catalog of fiberwise degree-2 homogeneous Hamiltonians.

use std::f64::consts::TAU;
use std::fmt;

use super::point::PhasePoint;
use super::FlowError;

/// Number of grid points (16 per coordinate of `(q1, q2, angle)`) on which a
/// starshaped profile must be positive.
pub const PROFILE_CHECK_POINTS: usize = 4096;

/// One term `cos * cos(phase) + sin * sin(phase)` with
/// `phase = 2 pi (k1 q1 + k2 q2) + m angle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierTerm {
    pub k1: i32,
    pub k2: i32,
    pub m: i32,
    pub cos: f64,
    pub sin: f64,
}

/// Radius of the fiber curve `Sigma_q` in direction `angle`, as a truncated
/// Fourier series on the torus times the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    terms: Vec<FourierTerm>,
}

impl RadialProfile {
    pub fn new(terms: Vec<FourierTerm>) -> Result<Self, FlowError> {
        let profile = RadialProfile { terms };
        let n = 16;
        let mut min = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let q = [i as f64 / n as f64, j as f64 / n as f64];
                    let angle = TAU * k as f64 / n as f64;
                    min = min.min(profile.eval(&q, angle).0);
                }
            }
        }
        debug_assert_eq!(n * n * n, PROFILE_CHECK_POINTS);
        if !(min > 0.0) {
            return Err(FlowError::InvalidModel(format!(
                "radial profile not positive (sampled minimum {min})"
            )));
        }
        Ok(profile)
    }

    pub fn terms(&self) -> &[FourierTerm] {
        &self.terms
    }

    /// Returns `(R, dR/dangle, dR/dq1, dR/dq2)`.
    pub fn eval(&self, q: &[f64], angle: f64) -> (f64, f64, [f64; 2]) {
        let (mut r, mut ra, mut rq) = (0.0, 0.0, [0.0; 2]);
        for t in &self.terms {
            let phase = TAU * (t.k1 as f64 * q[0] + t.k2 as f64 * q[1]) + t.m as f64 * angle;
            let (s, c) = phase.sin_cos();
            r += t.cos * c + t.sin * s;
            let d = -t.cos * s + t.sin * c;
            ra += t.m as f64 * d;
            rq[0] += TAU * t.k1 as f64 * d;
            rq[1] += TAU * t.k2 as f64 * d;
        }
        (r, ra, rq)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianModel {
    /// `H = p^T G p` on the flat torus `R^d / Z^d`.
    FlatTorus { dim: usize, metric: [[f64; 3]; 3] },
    /// Round 2-sphere in the ambient chart `|q| = 1, q.p = 0`, with
    /// `H = |q|^2 |p|^2 - (q.p)^2`, equal to `|p|^2` on the constraint.
    RoundSphere2,
    /// Left-invariant metric `dx^2 + dy^2 + (dz - x dy)^2` on the Heisenberg
    /// group: `H = px^2 + (py + x pz)^2 + pz^2`.
    Nil3,
    /// `H = e^{-2z} px^2 + e^{2z} py^2 + pz^2`.
    Sol3,
    /// Randers co-norm squared: `H = (|p| + b.p)^2`, `|b| < 1`.
    RandersTorus2 { drift: [f64; 2] },
    /// `H = |p|^2 / R(q, angle(p))^2` for a positive radial profile `R`.
    StarshapedTorus2 { profile: RadialProfile },
}

impl fmt::Display for HamiltonianModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HamiltonianModel::FlatTorus { dim, .. } => write!(f, "FlatTorus({dim})"),
            HamiltonianModel::RoundSphere2 => f.write_str("RoundSphere2"),
            HamiltonianModel::Nil3 => f.write_str("Nil3"),
            HamiltonianModel::Sol3 => f.write_str("Sol3"),
            HamiltonianModel::RandersTorus2 { drift } => {
                write!(f, "RandersTorus2({}, {})", drift[0], drift[1])
            }
            HamiltonianModel::StarshapedTorus2 { profile } => {
                write!(f, "StarshapedTorus2({} terms)", profile.terms().len())
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl HamiltonianModel {
    /// Flat torus with a symmetric positive-definite (co)metric.
    pub fn flat_torus(metric: &[Vec<f64>]) -> Result<Self, FlowError> {
        let dim = metric.len();
        if !(1..=3).contains(&dim) || metric.iter().any(|r| r.len() != dim) {
            return Err(FlowError::InvalidModel(format!(
                "flat torus metric must be square of size 1..=3, got {dim} rows"
            )));
        }
        let mut g = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                if (metric[i][j] - metric[j][i]).abs() > 1e-14 {
                    return Err(FlowError::InvalidModel("metric is not symmetric".into()));
                }
                g[i][j] = metric[i][j];
            }
        }
        let m = nalgebra::DMatrix::from_fn(dim, dim, |i, j| g[i][j]);
        if m.cholesky().is_none() {
            return Err(FlowError::InvalidModel(
                "metric is not positive definite".into(),
            ));
        }
        Ok(HamiltonianModel::FlatTorus { dim, metric: g })
    }

    pub fn flat_identity(dim: usize) -> Self {
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::flat_torus(&rows).expect("identity is positive definite")
    }

    pub fn randers(drift: [f64; 2]) -> Result<Self, FlowError> {
        let norm = drift[0].hypot(drift[1]);
        if !(norm < 1.0) {
            return Err(FlowError::InvalidModel(format!(
                "Randers drift norm {norm} must be below 1"
            )));
        }
        Ok(HamiltonianModel::RandersTorus2 { drift })
    }

    pub fn starshaped(terms: Vec<FourierTerm>) -> Result<Self, FlowError> {
        Ok(HamiltonianModel::StarshapedTorus2 {
            profile: RadialProfile::new(terms)?,
        })
    }

    /// Number of chart coordinates of `q` (3 for the ambient sphere chart).
    pub fn chart_dim(&self) -> usize {
        match self {
            HamiltonianModel::FlatTorus { dim, .. } => *dim,
            HamiltonianModel::RoundSphere2 | HamiltonianModel::Nil3 | HamiltonianModel::Sol3 => 3,
            HamiltonianModel::RandersTorus2 { .. } | HamiltonianModel::StarshapedTorus2 { .. } => 2,
        }
    }

    /// Dimension of the configuration manifold (and of each fiber).
    pub fn manifold_dim(&self) -> usize {
        match self {
            HamiltonianModel::RoundSphere2 => 2,
            _ => self.chart_dim(),
        }
    }

    /// Whether the `q` chart is the unit torus, coordinates reduced mod 1.
    pub fn is_torus(&self) -> bool {
        matches!(
            self,
            HamiltonianModel::FlatTorus { .. }
                | HamiltonianModel::RandersTorus2 { .. }
                | HamiltonianModel::StarshapedTorus2 { .. }
        )
    }

    /// Whether `H` fails to be smooth on the zero section.
    pub fn singular_at_zero(&self) -> bool {
        matches!(
            self,
            HamiltonianModel::RandersTorus2 { .. } | HamiltonianModel::StarshapedTorus2 { .. }
        )
    }

    /// Whether `H(q, -p) = H(q, p)` holds identically.
    pub fn is_reversible(&self) -> bool {
        match self {
            HamiltonianModel::RandersTorus2 { drift } => drift == &[0.0, 0.0],
            HamiltonianModel::StarshapedTorus2 { profile } => {
                profile.terms().iter().all(|t| t.m % 2 == 0)
            }
            _ => true,
        }
    }

    /// Whether [`Integrator::Exact`](super::Integrator::Exact) is available.
    pub fn has_closed_form(&self) -> bool {
        !matches!(
            self,
            HamiltonianModel::Sol3 | HamiltonianModel::StarshapedTorus2 { .. }
        )
    }

    fn check_covector(&self, x: &PhasePoint) -> Result<(), FlowError> {
        if self.singular_at_zero() && x.p().iter().all(|&v| v == 0.0) {
            return Err(FlowError::ZeroCovector);
        }
        Ok(())
    }

    pub fn hamiltonian(&self, x: &PhasePoint) -> Result<f64, FlowError> {
        self.check_covector(x)?;
        let (q, p) = (x.q(), x.p());
        Ok(match self {
            HamiltonianModel::FlatTorus { dim, metric } => {
                let mut h = 0.0;
                for i in 0..*dim {
                    for j in 0..*dim {
                        h += p[i] * metric[i][j] * p[j];
                    }
                }
                h
            }
            HamiltonianModel::RoundSphere2 => dot(q, q) * dot(p, p) - dot(q, p).powi(2),
            HamiltonianModel::Nil3 => {
                let w = p[1] + q[0] * p[2];
                p[0] * p[0] + w * w + p[2] * p[2]
            }
            HamiltonianModel::Sol3 => {
                let e = (2.0 * q[2]).exp();
                p[0] * p[0] / e + e * p[1] * p[1] + p[2] * p[2]
            }
            HamiltonianModel::RandersTorus2 { drift } => {
                let f = p[0].hypot(p[1]) + dot(drift, p);
                f * f
            }
            HamiltonianModel::StarshapedTorus2 { profile } => {
                let (r, _, _) = profile.eval(q, p[1].atan2(p[0]));
                dot(p, p) / (r * r)
            }
        })
    }

    /// Analytic `(dH/dq, dH/dp)`.
    pub fn gradient(&self, x: &PhasePoint) -> Result<([f64; 3], [f64; 3]), FlowError> {
        self.check_covector(x)?;
        let (q, p) = (x.q(), x.p());
        let mut dq = [0.0; 3];
        let mut dp = [0.0; 3];
        match self {
            HamiltonianModel::FlatTorus { dim, metric } => {
                for i in 0..*dim {
                    dp[i] = 2.0 * (0..*dim).map(|j| metric[i][j] * p[j]).sum::<f64>();
                }
            }
            HamiltonianModel::RoundSphere2 => {
                let (qq, pp, qp) = (dot(q, q), dot(p, p), dot(q, p));
                for i in 0..3 {
                    dq[i] = 2.0 * pp * q[i] - 2.0 * qp * p[i];
                    dp[i] = 2.0 * qq * p[i] - 2.0 * qp * q[i];
                }
            }
            HamiltonianModel::Nil3 => {
                let w = p[1] + q[0] * p[2];
                dq[0] = 2.0 * w * p[2];
                dp[0] = 2.0 * p[0];
                dp[1] = 2.0 * w;
                dp[2] = 2.0 * w * q[0] + 2.0 * p[2];
            }
            HamiltonianModel::Sol3 => {
                let e = (2.0 * q[2]).exp();
                dq[2] = -2.0 * p[0] * p[0] / e + 2.0 * e * p[1] * p[1];
                dp[0] = 2.0 * p[0] / e;
                dp[1] = 2.0 * e * p[1];
                dp[2] = 2.0 * p[2];
            }
            HamiltonianModel::RandersTorus2 { drift } => {
                let norm = p[0].hypot(p[1]);
                let f = norm + dot(drift, p);
                for i in 0..2 {
                    dp[i] = 2.0 * f * (p[i] / norm + drift[i]);
                }
            }
            HamiltonianModel::StarshapedTorus2 { profile } => {
                let (r, ra, rq) = profile.eval(q, p[1].atan2(p[0]));
                let pp = dot(p, p);
                let r2 = r * r;
                let r3 = r2 * r;
                dp[0] = 2.0 * p[0] / r2 + 2.0 * ra * p[1] / r3;
                dp[1] = 2.0 * p[1] / r2 - 2.0 * ra * p[0] / r3;
                dq[0] = -2.0 * pp * rq[0] / r3;
                dq[1] = -2.0 * pp * rq[1] / r3;
            }
        }
        Ok((dq, dp))
    }

    /// Hamiltonian vector field `(dH/dp, -dH/dq)` as a flat `2d` vector.
    pub fn vector_field(&self, x: &PhasePoint) -> Result<Vec<f64>, FlowError> {
        let d = x.dim();
        let (dq, dp) = self.gradient(x)?;
        let mut v = Vec::with_capacity(2 * d);
        v.extend_from_slice(&dp[..d]);
        v.extend(dq[..d].iter().map(|g| -g));
        Ok(v)
    }

    /// Orthonormal coordinates on the fiber `T*_q M`: maps `u` in
    /// `R^{manifold_dim}` to chart covector coordinates.
    pub fn fiber_embedding(&self, q: &[f64], u: &[f64]) -> Vec<f64> {
        match self {
            HamiltonianModel::RoundSphere2 => {
                let (e1, e2) = tangent_frame(q);
                (0..3).map(|i| u[0] * e1[i] + u[1] * e2[i]).collect()
            }
            _ => u.to_vec(),
        }
    }

    /// The point of `Sigma_q = {H = 1}` in fiber direction `u`, obtained by
    /// rescaling with `H(q, u)^{-1/2}`.
    pub fn unit_fiber_point(&self, q: &[f64], u: &[f64]) -> Result<PhasePoint, FlowError> {
        let p = self.fiber_embedding(q, u);
        let x = PhasePoint::new(q, &p);
        let h = self.hamiltonian(&x)?;
        if !(h > 0.0) {
            return Err(FlowError::NonPositiveH(h));
        }
        Ok(x.dilated(1.0 / h.sqrt()))
    }

    /// Reduces chart coordinates (torus: `q mod 1` into `[0, 1)`).
    pub fn reduce(&self, x: &mut PhasePoint) {
        if self.is_torus() {
            for v in x.q_mut() {
                *v = v.rem_euclid(1.0);
                if *v >= 1.0 {
                    *v = 0.0;
                }
            }
        }
    }

    /// Difference `b - a` in chart coordinates, using the shortest periodic
    /// representative for torus `q` components.
    pub fn chart_difference(&self, a: &PhasePoint, b: &PhasePoint) -> Vec<f64> {
        let d = a.dim();
        let torus = self.is_torus();
        let mut out = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut dq = b.q()[i] - a.q()[i];
            if torus {
                dq -= dq.round();
            }
            out.push(dq);
        }
        out.extend((0..d).map(|i| b.p()[i] - a.p()[i]));
        out
    }

    pub fn chart_distance(&self, a: &PhasePoint, b: &PhasePoint) -> f64 {
        self.chart_difference(a, b)
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Orthonormal basis of the plane orthogonal to the unit vector `q`.
pub fn tangent_frame(q: &[f64]) -> ([f64; 3], [f64; 3]) {
    let axis = (0..3)
        .min_by(|&i, &j| q[i].abs().total_cmp(&q[j].abs()))
        .unwrap();
    let mut a = [0.0; 3];
    a[axis] = 1.0;
    let qa = dot(q, &a);
    let mut e1 = [a[0] - qa * q[0], a[1] - qa * q[1], a[2] - qa * q[2]];
    let n = dot(&e1, &e1).sqrt();
    e1.iter_mut().for_each(|v| *v /= n);
    let e2 = [
        q[1] * e1[2] - q[2] * e1[1],
        q[2] * e1[0] - q[0] * e1[2],
        q[0] * e1[1] - q[1] * e1[0],
    ];
    (e1, e2)
}

/// Parses a compact model string.
///
/// Forms: `flat2`, `flat3`, `flat:<rows>` (rows separated by `;`, entries by
/// `,`, entries may be fractions `a/b`), `sphere`, `nil3`, `sol3`,
/// `randers:<b1>,<b2>`, `starshaped:<terms>` where each `;`-separated term is
/// `k1,k2,m,cos,sin`.
pub fn parse_model(text: &str) -> Result<HamiltonianModel, FlowError> {
    let text = text.trim();
    let bad = |msg: String| FlowError::InvalidModel(format!("{text:?}: {msg}"));
    let (name, args) = match text.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (text, None),
    };
    match (name.to_ascii_lowercase().as_str(), args) {
        ("flat1", None) => Ok(HamiltonianModel::flat_identity(1)),
        ("flat2", None) => Ok(HamiltonianModel::flat_identity(2)),
        ("flat3", None) => Ok(HamiltonianModel::flat_identity(3)),
        ("flat", Some(rows)) => {
            let metric = rows
                .split(';')
                .map(|r| {
                    r.split(',')
                        .map(parse_rational)
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(bad)?;
            HamiltonianModel::flat_torus(&metric)
        }
        ("sphere", None) => Ok(HamiltonianModel::RoundSphere2),
        ("nil3", None) => Ok(HamiltonianModel::Nil3),
        ("sol3", None) => Ok(HamiltonianModel::Sol3),
        ("randers", Some(b)) => {
            let v = b
                .split(',')
                .map(parse_rational)
                .collect::<Result<Vec<_>, _>>()
                .map_err(bad)?;
            if v.len() != 2 {
                return Err(bad("drift needs two components".into()));
            }
            HamiltonianModel::randers([v[0], v[1]])
        }
        ("starshaped", Some(terms)) => {
            let mut out = Vec::new();
            for term in terms.split(';').filter(|t| !t.trim().is_empty()) {
                let f: Vec<&str> = term.split(',').map(str::trim).collect();
                if f.len() != 5 {
                    return Err(bad(format!("term {term:?} needs k1,k2,m,cos,sin")));
                }
                let int = |s: &str| s.parse::<i32>().map_err(|e| bad(format!("{s:?}: {e}")));
                out.push(FourierTerm {
                    k1: int(f[0])?,
                    k2: int(f[1])?,
                    m: int(f[2])?,
                    cos: parse_rational(f[3]).map_err(bad)?,
                    sin: parse_rational(f[4]).map_err(bad)?,
                });
            }
            HamiltonianModel::starshaped(out)
        }
        _ => Err(bad("unknown model".into())),
    }
}

/// Parses `a`, `a.b` or `a/b`.
pub fn parse_rational(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let den = num(b)?;
            if den == 0.0 {
                return Err(format!("{s:?}: zero denominator"));
            }
            Ok(num(a)? / den)
        }
        None => num(s),
    }
}

/// Default starshaped test profile: a mildly anisotropic, `q`-dependent
/// radius.
pub fn sample_starshaped() -> HamiltonianModel {
    HamiltonianModel::starshaped(vec![
        FourierTerm {
            k1: 0,
            k2: 0,
            m: 0,
            cos: 1.0,
            sin: 0.0,
        },
        FourierTerm {
            k1: 1,
            k2: 0,
            m: 0,
            cos: 0.1,
            sin: 0.0,
        },
        FourierTerm {
            k1: 0,
            k2: 1,
            m: 2,
            cos: 0.0,
            sin: 0.15,
        },
        FourierTerm {
            k1: 0,
            k2: 0,
            m: 1,
            cos: 0.05,
            sin: 0.0,
        },
    ])
    .expect("profile stays positive")
}
