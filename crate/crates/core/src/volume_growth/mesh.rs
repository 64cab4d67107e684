//! Simplicial meshes of the fiber sphere `Sigma_q` and the punctured fiber
//! disc, parametrized by fiber direction and radius.
//!
//! Vertices carry a parameter `(radius, direction)`; refinement inserts the
//! parameter midpoint of an edge and never moves existing parameters. Cells
//! are refined by edge bisection, which keeps the complex conforming in any
//! dimension: splitting edge `ab` at `m` replaces every cell `{a, b, ...}`
//! by `{a, m, ...}` and `{m, b, ...}`. A cell with a long image edge is cut
//! through its longest parameter edge, so cells keep shrinking even where
//! the flow folds the fiber back onto itself.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::flow_models::{HamiltonianModel, PhasePoint};

use super::VolumeError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshKind {
    Sphere,
    /// Fiber disc with the ball of radius `inner_radius` removed.
    PuncturedDisc {
        inner_radius: f64,
    },
}

impl MeshKind {
    pub fn label(&self) -> &'static str {
        match self {
            MeshKind::Sphere => "sphere",
            MeshKind::PuncturedDisc { .. } => "punctured_disc",
        }
    }
}

/// Point of the fiber parameter space: `p = radius * p_unit(direction)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberParam {
    pub radius: f64,
    pub direction: [f64; 3],
    pub fiber_dim: usize,
}

impl FiberParam {
    fn new(radius: f64, dir: &[f64]) -> Self {
        let mut direction = [0.0; 3];
        direction[..dir.len()].copy_from_slice(dir);
        FiberParam {
            radius,
            direction,
            fiber_dim: dir.len(),
        }
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction[..self.fiber_dim]
    }

    /// Euclidean distance between the points `radius * direction`.
    pub fn distance(&self, other: &FiberParam) -> f64 {
        (0..self.fiber_dim)
            .map(|i| self.radius * self.direction[i] - other.radius * other.direction[i])
            .map(|d| d * d)
            .sum::<f64>()
            .sqrt()
    }

    /// Radius average and normalized direction sum.
    pub fn midpoint(&self, other: &FiberParam) -> FiberParam {
        let d = self.fiber_dim;
        let mut dir = [0.0; 3];
        for i in 0..d {
            dir[i] = self.direction[i] + other.direction[i];
        }
        let n = dir[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
        dir[..d].iter_mut().for_each(|v| *v /= n);
        FiberParam::new(0.5 * (self.radius + other.radius), &dir[..d])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cells {
    Segments(Vec<[u32; 2]>),
    Triangles(Vec<[u32; 3]>),
    Tetrahedra(Vec<[u32; 4]>),
}

impl Cells {
    pub fn len(&self) -> usize {
        match self {
            Cells::Segments(c) => c.len(),
            Cells::Triangles(c) => c.len(),
            Cells::Tetrahedra(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dimension of the cells (1, 2 or 3).
    pub fn cell_dim(&self) -> usize {
        match self {
            Cells::Segments(_) => 1,
            Cells::Triangles(_) => 2,
            Cells::Tetrahedra(_) => 3,
        }
    }

    /// All distinct edges, each as `(lo, hi)`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = match self {
            Cells::Segments(c) => collect_edges(c),
            Cells::Triangles(c) => collect_edges(c),
            Cells::Tetrahedra(c) => collect_edges(c),
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn vertex_lists(&self) -> Vec<Vec<u32>> {
        match self {
            Cells::Segments(c) => c.iter().map(|s| s.to_vec()).collect(),
            Cells::Triangles(c) => c.iter().map(|s| s.to_vec()).collect(),
            Cells::Tetrahedra(c) => c.iter().map(|s| s.to_vec()).collect(),
        }
    }

    /// For every cell containing a key of `marked`, picks the cell's longest
    /// edge under `length` and gives it the largest priority among the
    /// cell's marked edges.
    pub(crate) fn longest_edge_targets(
        &self,
        marked: &HashMap<(u32, u32), f64>,
        length: impl Fn(u32, u32) -> f64,
    ) -> HashMap<(u32, u32), f64> {
        match self {
            Cells::Segments(c) => longest_targets(c, marked, &length),
            Cells::Triangles(c) => longest_targets(c, marked, &length),
            Cells::Tetrahedra(c) => longest_targets(c, marked, &length),
        }
    }

    /// Splits pairwise cell-disjoint edges at the given new vertices.
    pub(crate) fn split_edges(&mut self, splits: &[((u32, u32), u32)]) {
        match self {
            Cells::Segments(c) => split_cells(c, splits),
            Cells::Triangles(c) => split_cells(c, splits),
            Cells::Tetrahedra(c) => split_cells(c, splits),
        }
    }

    /// Greedily picks edges from `candidates` (in order) so that no two
    /// chosen edges share a cell.
    pub(crate) fn independent_edges(&self, candidates: &[(u32, u32)]) -> Vec<(u32, u32)> {
        match self {
            Cells::Segments(c) => independent(c, candidates),
            Cells::Triangles(c) => independent(c, candidates),
            Cells::Tetrahedra(c) => independent(c, candidates),
        }
    }
}

fn key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn cell_edges<const K: usize>(cell: &[u32; K]) -> impl Iterator<Item = (u32, u32)> + '_ {
    (0..K).flat_map(move |i| (i + 1..K).map(move |j| key(cell[i], cell[j])))
}

fn collect_edges<const K: usize>(cells: &[[u32; K]]) -> Vec<(u32, u32)> {
    cells.iter().flat_map(cell_edges).collect()
}

fn incidence<const K: usize>(
    cells: &[[u32; K]],
    wanted: &HashMap<(u32, u32), usize>,
) -> Vec<Vec<usize>> {
    let mut inc = vec![Vec::new(); wanted.len()];
    for (ci, cell) in cells.iter().enumerate() {
        for e in cell_edges(cell) {
            if let Some(&slot) = wanted.get(&e) {
                inc[slot].push(ci);
            }
        }
    }
    inc
}

fn independent<const K: usize>(cells: &[[u32; K]], candidates: &[(u32, u32)]) -> Vec<(u32, u32)> {
    let wanted: HashMap<(u32, u32), usize> = candidates
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, i))
        .collect();
    let inc = incidence(cells, &wanted);
    let mut touched = vec![false; cells.len()];
    let mut out = Vec::new();
    for (i, &e) in candidates.iter().enumerate() {
        if inc[i].iter().all(|&c| !touched[c]) {
            inc[i].iter().for_each(|&c| touched[c] = true);
            out.push(e);
        }
    }
    out
}

fn longest_targets<const K: usize>(
    cells: &[[u32; K]],
    marked: &HashMap<(u32, u32), f64>,
    length: &impl Fn(u32, u32) -> f64,
) -> HashMap<(u32, u32), f64> {
    let mut out: HashMap<(u32, u32), f64> = HashMap::new();
    for cell in cells {
        let priority = cell_edges(cell)
            .filter_map(|e| marked.get(&e).copied())
            .max_by(f64::total_cmp);
        let Some(priority) = priority else { continue };
        let longest = cell_edges(cell)
            .map(|e| (length(e.0, e.1), e))
            .max_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)))
            .map(|(_, e)| e)
            .expect("cells have edges");
        let slot = out.entry(longest).or_insert(priority);
        *slot = slot.max(priority);
    }
    out
}

fn split_cells<const K: usize>(cells: &mut Vec<[u32; K]>, splits: &[((u32, u32), u32)]) {
    let wanted: HashMap<(u32, u32), usize> = splits
        .iter()
        .enumerate()
        .map(|(i, &(e, _))| (e, i))
        .collect();
    let inc = incidence(cells, &wanted);
    for (slot, &((a, b), m)) in splits.iter().enumerate() {
        for &ci in &inc[slot] {
            let original = cells[ci];
            let mut lower = original;
            let mut upper = original;
            for v in lower.iter_mut() {
                if *v == b {
                    *v = m;
                }
            }
            for v in upper.iter_mut() {
                if *v == a {
                    *v = m;
                }
            }
            cells[ci] = lower;
            cells.push(upper);
        }
    }
}

fn point_for(
    model: &HamiltonianModel,
    q: &[f64],
    param: &FiberParam,
    grading: f64,
) -> Result<PhasePoint, VolumeError> {
    let unit = if grading > 0.0 {
        model.unit_fiber_point(q, &graded(param.direction(), grading))?
    } else {
        model.unit_fiber_point(q, param.direction())?
    };
    Ok(unit.dilated(param.radius))
}

fn graded(direction: &[f64], strength: f64) -> Vec<f64> {
    let k = direction.len();
    let s = direction[k - 1].clamp(-1.0, 1.0);
    let w = (strength * s).sinh() / strength.sinh();
    let rest = (1.0 - s * s).sqrt();
    let scale = if rest > 0.0 {
        (1.0 - w * w).max(0.0).sqrt() / rest
    } else {
        0.0
    };
    let mut out: Vec<f64> = direction[..k - 1].iter().map(|v| v * scale).collect();
    out.push(w);
    out
}

/// Record of one inserted vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub time: f64,
    pub parent: (u32, u32),
    pub vertex: u32,
}

/// Discretization of `Sigma_q` (or the punctured disc) together with its
/// current image under the flow.
#[derive(Debug, Clone)]
pub struct FiberSphereMesh {
    pub base_point: Vec<f64>,
    pub kind: MeshKind,
    pub parameter_samples: Vec<FiberParam>,
    /// Initial phase-space points, one per parameter.
    pub initial: Vec<PhasePoint>,
    /// Current images `phi^t(initial)`.
    pub images: Vec<PhasePoint>,
    pub connectivity: Cells,
    pub refinement_log: Vec<Insertion>,
    /// Time the images correspond to.
    pub time: f64,
    /// Strength of the warp concentrating samples near the equator of the
    /// last fiber coordinate; 0 disables it.
    pub equator_grading: f64,
}

impl FiberSphereMesh {
    pub fn vertex_count(&self) -> usize {
        self.parameter_samples.len()
    }

    /// Phase-space point for a fiber parameter at this mesh's base point.
    pub(crate) fn initial_point(
        &self,
        model: &HamiltonianModel,
        param: &FiberParam,
    ) -> Result<PhasePoint, VolumeError> {
        point_for(model, &self.base_point, param, self.equator_grading)
    }

    /// Re-parametrizes an unevolved mesh with an equator-graded warp:
    /// the last direction coordinate `s` becomes `sinh(k s) / sinh(k)`.
    pub fn with_equator_grading(
        mut self,
        model: &HamiltonianModel,
        strength: f64,
    ) -> Result<Self, VolumeError> {
        if !(strength >= 0.0 && strength.is_finite()) {
            return Err(VolumeError::InvalidSettings(format!(
                "equator grading must be finite and non-negative, got {strength}"
            )));
        }
        if self.time != 0.0 || !self.refinement_log.is_empty() {
            return Err(VolumeError::InvalidSettings(
                "equator grading must be set before evolving".into(),
            ));
        }
        self.equator_grading = strength;
        self.initial = self
            .parameter_samples
            .iter()
            .map(|p| self.initial_point(model, p))
            .collect::<Result<_, _>>()?;
        self.images = self.initial.clone();
        Ok(self)
    }

    fn build(
        model: &HamiltonianModel,
        q: &[f64],
        kind: MeshKind,
        params: Vec<FiberParam>,
        connectivity: Cells,
    ) -> Result<Self, VolumeError> {
        let initial = params
            .iter()
            .map(|p| point_for(model, q, p, 0.0))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FiberSphereMesh {
            base_point: q.to_vec(),
            kind,
            parameter_samples: params,
            images: initial.clone(),
            initial,
            connectivity,
            refinement_log: Vec::new(),
            time: 0.0,
            equator_grading: 0.0,
        })
    }

    /// CSV of vertices: `index,radius,u1..uk,q1..qd,p1..pd` (current image).
    pub fn vertices_csv(&self) -> String {
        let k = self.parameter_samples.first().map_or(0, |p| p.fiber_dim);
        let d = self.images.first().map_or(0, |x| x.dim());
        let mut s = String::from("index,radius");
        (1..=k).for_each(|i| {
            let _ = write!(s, ",u{i}");
        });
        (1..=d).for_each(|i| {
            let _ = write!(s, ",q{i}");
        });
        (1..=d).for_each(|i| {
            let _ = write!(s, ",p{i}");
        });
        s.push('\n');
        for (i, (par, x)) in self.parameter_samples.iter().zip(&self.images).enumerate() {
            let _ = write!(s, "{i},{}", par.radius);
            for v in par.direction().iter().chain(x.q()).chain(x.p()) {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    /// CSV of cells: one row of vertex indices per cell.
    pub fn cells_csv(&self) -> String {
        let names = ["a", "b", "c", "d"];
        let k = self.connectivity.cell_dim() + 1;
        let mut s = names[..k].join(",");
        s.push('\n');
        for cell in self.connectivity.vertex_lists() {
            let row: Vec<String> = cell.iter().map(u32::to_string).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Minimum angular samples of a fiber circle.
pub const MIN_CIRCLE_SAMPLES: usize = 16;
/// Minimum icosahedral subdivision level of a fiber 2-sphere.
pub const MIN_ICOSPHERE_LEVEL: usize = 2;

fn circle(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|k| {
            let a = TAU * k as f64 / n as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

/// Unit icosphere: the icosahedron subdivided `levels` times, midpoints
/// projected back to the sphere.
pub fn icosphere(levels: usize) -> (Vec<[f64; 3]>, Vec<[u32; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let normalize = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    verts.iter_mut().for_each(|v| *v = normalize(*v));
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..levels {
        let mut mids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: u32, b: u32, verts: &mut Vec<[f64; 3]>| -> u32 {
            *mids.entry(key(a, b)).or_insert_with(|| {
                let (va, vb) = (verts[a as usize], verts[b as usize]);
                verts.push(normalize([va[0] + vb[0], va[1] + vb[1], va[2] + vb[2]]));
                (verts.len() - 1) as u32
            })
        };
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (verts, faces)
}

/// Mesh of `Sigma_q = {H = 1} ∩ T*_q M`. `resolution` is the number of
/// circle samples for two-dimensional manifolds and the icosphere level for
/// three-dimensional ones.
pub fn initial_fiber_sphere(
    model: &HamiltonianModel,
    q: &[f64],
    resolution: usize,
) -> Result<FiberSphereMesh, VolumeError> {
    check_base_point(model, q)?;
    match model.manifold_dim() {
        2 => {
            if resolution < MIN_CIRCLE_SAMPLES {
                return Err(VolumeError::InvalidResolution(resolution));
            }
            let params = circle(resolution)
                .iter()
                .map(|u| FiberParam::new(1.0, u))
                .collect();
            let n = resolution as u32;
            let segs = (0..n).map(|k| [k, (k + 1) % n]).collect();
            FiberSphereMesh::build(model, q, MeshKind::Sphere, params, Cells::Segments(segs))
        }
        3 => {
            if resolution < MIN_ICOSPHERE_LEVEL {
                return Err(VolumeError::InvalidResolution(resolution));
            }
            let (verts, faces) = icosphere(resolution);
            let params = verts.iter().map(|u| FiberParam::new(1.0, u)).collect();
            FiberSphereMesh::build(model, q, MeshKind::Sphere, params, Cells::Triangles(faces))
        }
        d => Err(VolumeError::UnsupportedDimension(d)),
    }
}

/// Mesh of the punctured fiber disc `{inner_radius^2 <= H <= 1}` at `q`.
/// Angular (or icosphere) resolution as for the sphere; the radial direction
/// gets `radial_layers + 1` shells evenly spaced in radius.
pub fn initial_fiber_disc(
    model: &HamiltonianModel,
    q: &[f64],
    resolution: usize,
    radial_layers: usize,
    inner_radius: f64,
) -> Result<FiberSphereMesh, VolumeError> {
    check_base_point(model, q)?;
    if !(inner_radius > 0.0 && inner_radius < 1.0) {
        return Err(VolumeError::InvalidPuncture(inner_radius));
    }
    if radial_layers == 0 {
        return Err(VolumeError::InvalidResolution(radial_layers));
    }
    let kind = MeshKind::PuncturedDisc { inner_radius };
    let radii: Vec<f64> = (0..=radial_layers)
        .map(|j| inner_radius + (1.0 - inner_radius) * j as f64 / radial_layers as f64)
        .collect();
    let shells = radii.len() as u32;
    match model.manifold_dim() {
        2 => {
            if resolution < MIN_CIRCLE_SAMPLES {
                return Err(VolumeError::InvalidResolution(resolution));
            }
            let dirs = circle(resolution);
            let n = resolution as u32;
            let mut params = Vec::new();
            for &r in &radii {
                params.extend(dirs.iter().map(|u| FiberParam::new(r, u)));
            }
            let at = |j: u32, k: u32| j * n + k % n;
            let mut tris = Vec::new();
            for j in 0..shells - 1 {
                for k in 0..n {
                    tris.push([at(j, k), at(j, k + 1), at(j + 1, k + 1)]);
                    tris.push([at(j, k), at(j + 1, k + 1), at(j + 1, k)]);
                }
            }
            FiberSphereMesh::build(model, q, kind, params, Cells::Triangles(tris))
        }
        3 => {
            if resolution < MIN_ICOSPHERE_LEVEL {
                return Err(VolumeError::InvalidResolution(resolution));
            }
            let (verts, faces) = icosphere(resolution);
            let n = verts.len() as u32;
            let mut params = Vec::new();
            for &r in &radii {
                params.extend(verts.iter().map(|u| FiberParam::new(r, u)));
            }
            // Prisms over each face, cut into three tetrahedra with vertices
            // in ascending order so shared quad faces get matching diagonals.
            let mut tets = Vec::new();
            for j in 0..shells - 1 {
                for face in &faces {
                    let mut f = *face;
                    f.sort_unstable();
                    let [a, b, c] = f.map(|v| j * n + v);
                    let [a2, b2, c2] = f.map(|v| (j + 1) * n + v);
                    tets.push([a, b, c, a2]);
                    tets.push([b, c, a2, b2]);
                    tets.push([c, a2, b2, c2]);
                }
            }
            FiberSphereMesh::build(model, q, kind, params, Cells::Tetrahedra(tets))
        }
        d => Err(VolumeError::UnsupportedDimension(d)),
    }
}

fn check_base_point(model: &HamiltonianModel, q: &[f64]) -> Result<(), VolumeError> {
    if q.len() != model.chart_dim() {
        return Err(VolumeError::InvalidBasePoint(format!(
            "{model} needs {} coordinates, got {}",
            model.chart_dim(),
            q.len()
        )));
    }
    if let HamiltonianModel::RoundSphere2 = model {
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(VolumeError::InvalidBasePoint(format!(
                "|q| = {n}, expected 1"
            )));
        }
    }
    Ok(())
}
