use std::fmt;

/// A point `(q, p)` of a cotangent bundle in chart coordinates.
///
/// Up to three configuration coordinates are stored inline so points are
/// `Copy`; `dim` says how many are live.
#[derive(Clone, Copy, PartialEq)]
pub struct PhasePoint {
    dim: usize,
    q: [f64; 3],
    p: [f64; 3],
}

impl PhasePoint {
    pub fn new(q: &[f64], p: &[f64]) -> Self {
        assert!(q.len() == p.len() && (1..=3).contains(&q.len()));
        let mut x = PhasePoint {
            dim: q.len(),
            q: [0.0; 3],
            p: [0.0; 3],
        };
        x.q[..q.len()].copy_from_slice(q);
        x.p[..p.len()].copy_from_slice(p);
        x
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> &[f64] {
        &self.q[..self.dim]
    }

    pub fn p(&self) -> &[f64] {
        &self.p[..self.dim]
    }

    pub fn q_mut(&mut self) -> &mut [f64] {
        &mut self.q[..self.dim]
    }

    pub fn p_mut(&mut self) -> &mut [f64] {
        &mut self.p[..self.dim]
    }

    /// `(q, p)` concatenated.
    pub fn coords(&self) -> Vec<f64> {
        self.q().iter().chain(self.p()).copied().collect()
    }

    pub fn from_coords(dim: usize, z: &[f64]) -> Self {
        Self::new(&z[..dim], &z[dim..2 * dim])
    }

    pub fn p_norm(&self) -> f64 {
        self.p().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// The fiber dilation `(q, p) -> (q, r p)`.
    pub fn dilated(&self, r: f64) -> Self {
        let mut x = *self;
        x.p_mut().iter_mut().for_each(|v| *v *= r);
        x
    }
}

impl fmt::Debug for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q={:?}, p={:?})", self.q(), self.p())
    }
}

/// The fiber dilation `delta_r`.
pub fn dilation(x: &PhasePoint, r: f64) -> PhasePoint {
    assert!(r > 0.0, "dilation factor must be positive");
    x.dilated(r)
}
