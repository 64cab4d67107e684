//! Pushing fiber meshes forward by the flow and measuring their volume.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::flow_models::{flow, FlowConfig, HamiltonianModel, Integrator, PhasePoint};

use super::mesh::{FiberSphereMesh, Insertion, MeshKind};
use super::VolumeError;

/// Wrapped torus displacement above which an edge is always split.
pub const WRAP_LIMIT: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineSettings {
    /// Maximal chart length of an image edge.
    pub refine_threshold: f64,
    /// Maximal number of mesh vertices.
    pub volume_budget: usize,
    /// Diagonal weights applied to `(q, p)` chart coordinates before
    /// measuring lengths and volumes; `None` is the plain chart metric.
    pub metric_weights: Option<[f64; 6]>,
    /// Whether to compute the resolution certificate after the last time.
    pub certify: bool,
    /// When set, the threshold applied at time `t` is `refine_threshold * t`,
    /// which keeps the mesh resolution relative to the image size of a
    /// polynomially spreading sphere.
    pub time_relative: bool,
}

impl RefineSettings {
    pub fn new(refine_threshold: f64, volume_budget: usize) -> Self {
        RefineSettings {
            refine_threshold,
            volume_budget,
            metric_weights: None,
            certify: true,
            time_relative: false,
        }
    }

    /// Edge-length threshold in force at time `t`.
    pub fn threshold_at(&self, t: f64) -> f64 {
        if self.time_relative {
            self.refine_threshold * t
        } else {
            self.refine_threshold
        }
    }
}

/// Volumes of the flowed mesh at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeSeries {
    pub times: Vec<f64>,
    pub volumes: Vec<f64>,
    pub vertices: Vec<usize>,
    pub mesh_kind: MeshKind,
    /// `|V' - V| / V` where `V'` is the final volume after refining once more
    /// with half the threshold. NaN when not computed.
    pub resolution_certificate: f64,
}

impl VolumeSeries {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,volume,vertices\n");
        for ((t, v), n) in self.times.iter().zip(&self.volumes).zip(&self.vertices) {
            let _ = writeln!(s, "{t},{v},{n}");
        }
        s
    }
}

/// Chart displacement between two mesh images with optional weights.
fn weighted_difference(
    model: &HamiltonianModel,
    a: &PhasePoint,
    b: &PhasePoint,
    weights: &Option<[f64; 6]>,
) -> Vec<f64> {
    let mut d = model.chart_difference(a, b);
    if let Some(w) = weights {
        let k = a.dim();
        for (i, v) in d.iter_mut().enumerate() {
            let slot = if i < k { i } else { 3 + (i - k) };
            *v *= w[slot];
        }
    }
    d
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Measure of the simplex spanned by edge vectors `e` from a common vertex.
pub(crate) fn simplex_measure(e: &[Vec<f64>]) -> f64 {
    match e.len() {
        1 => norm(&e[0]),
        2 => {
            // |u ^ v| through the 2x2 minors for accuracy on slivers.
            let (u, v) = (&e[0], &e[1]);
            let mut s = 0.0;
            for i in 0..u.len() {
                for j in i + 1..u.len() {
                    let m = u[i] * v[j] - u[j] * v[i];
                    s += m * m;
                }
            }
            0.5 * s.sqrt()
        }
        3 => {
            let g = |i: usize, j: usize| dot(&e[i], &e[j]);
            let det = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(1, 2))
                - g(0, 1) * (g(0, 1) * g(2, 2) - g(1, 2) * g(0, 2))
                + g(0, 2) * (g(0, 1) * g(1, 2) - g(1, 1) * g(0, 2));
            det.max(0.0).sqrt() / 6.0
        }
        k => panic!("unsupported simplex dimension {k}"),
    }
}

/// Total length, area or 3-volume of the current images.
pub fn mesh_volume(
    model: &HamiltonianModel,
    mesh: &FiberSphereMesh,
    weights: &Option<[f64; 6]>,
) -> f64 {
    let cells = mesh.connectivity.vertex_lists();
    let parts: Vec<f64> = cells
        .par_iter()
        .map(|cell| {
            let base = &mesh.images[cell[0] as usize];
            let edges: Vec<Vec<f64>> = cell[1..]
                .iter()
                .map(|&v| weighted_difference(model, base, &mesh.images[v as usize], weights))
                .collect();
            simplex_measure(&edges)
        })
        .collect();
    parts.iter().sum()
}

fn flow_from_initial(
    model: &HamiltonianModel,
    x: &PhasePoint,
    t: f64,
    config: &FlowConfig,
) -> Result<PhasePoint, VolumeError> {
    Ok(flow(model, x, t, config)?)
}

/// Moves every vertex image to time `t`.
fn advance(
    model: &HamiltonianModel,
    mesh: &mut FiberSphereMesh,
    t: f64,
    config: &FlowConfig,
) -> Result<(), VolumeError> {
    let images = if config.integrator == Integrator::Exact {
        mesh.initial
            .par_iter()
            .map(|x| flow_from_initial(model, x, t, config))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        // Numerical flows continue from the cached state at mesh.time.
        let dt = t - mesh.time;
        mesh.images
            .par_iter()
            .map(|x| flow_from_initial(model, x, dt, config))
            .collect::<Result<Vec<_>, _>>()?
    };
    mesh.images = images;
    mesh.time = t;
    Ok(())
}

/// Splits long image edges until none exceeds the threshold.
///
/// Every cell with an over-long image edge is bisected through its longest
/// parameter edge, so parameter cells stay shape-regular and shrink.
fn refine(
    model: &HamiltonianModel,
    mesh: &mut FiberSphereMesh,
    config: &FlowConfig,
    settings: &RefineSettings,
    threshold: f64,
    budget: usize,
) -> Result<(), VolumeError> {
    let t = mesh.time;
    let torus = model.is_torus();
    loop {
        let edges = mesh.connectivity.edges();
        let lengths: Vec<(f64, bool)> = edges
            .par_iter()
            .map(|&(a, b)| {
                let (xa, xb) = (&mesh.images[a as usize], &mesh.images[b as usize]);
                let d = weighted_difference(model, xa, xb, &settings.metric_weights);
                let wrapped = torus && {
                    let raw = model.chart_difference(xa, xb);
                    raw[..xa.dim()].iter().any(|v| v.abs() > WRAP_LIMIT)
                };
                (norm(&d), wrapped)
            })
            .collect();
        let marked: HashMap<(u32, u32), f64> = edges
            .iter()
            .zip(&lengths)
            .filter(|(_, &(len, wrapped))| wrapped || len > threshold)
            .map(|(&e, &(len, wrapped))| (e, if wrapped { f64::INFINITY } else { len }))
            .collect();
        if marked.is_empty() {
            return Ok(());
        }
        let params = &mesh.parameter_samples;
        let mut targets: Vec<((u32, u32), f64)> = mesh
            .connectivity
            .longest_edge_targets(&marked, |a, b| {
                params[a as usize].distance(&params[b as usize])
            })
            .into_iter()
            .collect();
        // Highest priority first; ties broken lexicographically on vertex indices.
        targets.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        let candidates: Vec<(u32, u32)> = targets.into_iter().map(|(e, _)| e).collect();
        let chosen = mesh.connectivity.independent_edges(&candidates);
        if mesh.vertex_count() + chosen.len() > budget {
            return Err(VolumeError::BudgetExceeded {
                budget,
                time: t,
                partial: None,
            });
        }
        let new_points: Vec<_> = chosen
            .par_iter()
            .map(|&(a, b)| {
                let param = params[a as usize].midpoint(&params[b as usize]);
                let x0 = mesh.initial_point(model, &param)?;
                let xt = flow_from_initial(model, &x0, t, config)?;
                Ok((param, x0, xt))
            })
            .collect::<Result<Vec<_>, VolumeError>>()?;
        let mut splits = Vec::with_capacity(chosen.len());
        for (&edge, (param, x0, xt)) in chosen.iter().zip(new_points) {
            let v = mesh.vertex_count() as u32;
            mesh.parameter_samples.push(param);
            mesh.initial.push(x0);
            mesh.images.push(xt);
            mesh.refinement_log.push(Insertion {
                time: t,
                parent: edge,
                vertex: v,
            });
            splits.push((edge, v));
        }
        mesh.connectivity.split_edges(&splits);
    }
}

/// Flows the mesh through `times`, refining after each step, and records the
/// volume at every time.
pub fn evolve_and_measure(
    model: &HamiltonianModel,
    mesh: &mut FiberSphereMesh,
    times: &[f64],
    config: &FlowConfig,
    settings: &RefineSettings,
) -> Result<VolumeSeries, VolumeError> {
    if times.is_empty()
        || times.iter().any(|t| !(*t > 0.0))
        || times.windows(2).any(|w| w[1] <= w[0])
        || times[0] < mesh.time
    {
        return Err(VolumeError::InvalidTimes);
    }
    if !(settings.refine_threshold > 0.0) || settings.volume_budget == 0 {
        return Err(VolumeError::InvalidSettings(format!("{settings:?}")));
    }
    let mut series = VolumeSeries {
        times: Vec::new(),
        volumes: Vec::new(),
        vertices: Vec::new(),
        mesh_kind: mesh.kind,
        resolution_certificate: f64::NAN,
    };
    for &t in times {
        advance(model, mesh, t, config)?;
        let threshold = settings.threshold_at(t);
        if let Err(e) = refine(
            model,
            mesh,
            config,
            settings,
            threshold,
            settings.volume_budget,
        ) {
            return Err(match e {
                VolumeError::BudgetExceeded { budget, time, .. } => VolumeError::BudgetExceeded {
                    budget,
                    time,
                    partial: Some(Box::new(series)),
                },
                other => other,
            });
        }
        series.times.push(t);
        series
            .volumes
            .push(mesh_volume(model, mesh, &settings.metric_weights));
        series.vertices.push(mesh.vertex_count());
    }
    if settings.certify {
        series.resolution_certificate = resolution_certificate(model, mesh, config, settings);
    }
    Ok(series)
}

/// Relative volume change when the final mesh is refined once more at half
/// the threshold. NaN if that refinement exceeds eight times the budget.
pub fn resolution_certificate(
    model: &HamiltonianModel,
    mesh: &FiberSphereMesh,
    config: &FlowConfig,
    settings: &RefineSettings,
) -> f64 {
    let coarse = mesh_volume(model, mesh, &settings.metric_weights);
    let mut fine = mesh.clone();
    let halved = settings.threshold_at(mesh.time) / 2.0;
    let budget = settings.volume_budget.saturating_mul(8);
    match refine(model, &mut fine, config, settings, halved, budget) {
        Ok(()) => {
            let v = mesh_volume(model, &fine, &settings.metric_weights);
            (v - coarse).abs() / coarse
        }
        Err(_) => f64::NAN,
    }
}
