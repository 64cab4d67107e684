//! Finite generating sets of integer matrix groups and their text format.
//!
//! The file format is whitespace separated: a header `n k` followed by `k`
//! blocks of `n` rows with `n` integers each. Lines starting with `#` are
//! ignored.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use sha2::{Digest, Sha256};

use super::matrix::IntMatrix;
use super::GrowthError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    dimension: usize,
    generators: Vec<IntMatrix>,
    unitriangular: bool,
}

impl GeneratorSet {
    /// Validates invertibility over the integers and records whether every
    /// generator is unitriangular. An empty list denotes the trivial group.
    pub fn new(dimension: usize, generators: Vec<IntMatrix>) -> Result<Self, GrowthError> {
        if dimension == 0 {
            return Err(GrowthError::Parse(
                "matrix dimension must be positive".into(),
            ));
        }
        for (index, g) in generators.iter().enumerate() {
            if g.dim() != dimension {
                return Err(GrowthError::DimensionMismatch {
                    index,
                    expected: dimension,
                    found: g.dim(),
                });
            }
            if g.determinant().abs() != BigInt::one() {
                return Err(GrowthError::NonInvertibleGenerator { index });
            }
        }
        let unitriangular = generators.iter().all(IntMatrix::is_unitriangular);
        Ok(GeneratorSet {
            dimension,
            generators,
            unitriangular,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn generators(&self) -> &[IntMatrix] {
        &self.generators
    }

    pub fn is_unitriangular(&self) -> bool {
        self.unitriangular
    }

    /// Generators together with their inverses, duplicates removed, in a
    /// fixed order.
    pub fn symmetric_generators(&self) -> Result<Vec<IntMatrix>, GrowthError> {
        let mut out: Vec<IntMatrix> = Vec::with_capacity(2 * self.generators.len());
        for (index, g) in self.generators.iter().enumerate() {
            let inv = g
                .inverse()
                .ok_or(GrowthError::NonInvertibleGenerator { index })?;
            for m in [g.clone(), inv] {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
        Ok(out)
    }

    /// Stable hex digest of the dimension and generator entries.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.dimension as u64).to_le_bytes());
        hasher.update((self.generators.len() as u64).to_le_bytes());
        for g in &self.generators {
            for v in g.entries() {
                hasher.update(v.to_le_bytes());
            }
        }
        let digest = hasher.finalize();
        digest[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn parse(text: &str) -> Result<Self, GrowthError> {
        let mut tokens = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .flat_map(str::split_whitespace);
        let mut next = |what: &str| -> Result<i64, GrowthError> {
            let tok = tokens.next().ok_or_else(|| {
                GrowthError::Parse(format!("unexpected end of input, expected {what}"))
            })?;
            tok.parse::<i64>()
                .map_err(|_| GrowthError::Parse(format!("invalid integer {tok:?} for {what}")))
        };
        let n = next("matrix size")?;
        let k = next("generator count")?;
        if n <= 0 || k < 0 {
            return Err(GrowthError::Parse(format!("invalid header {n} {k}")));
        }
        let n = n as usize;
        let mut gens = Vec::with_capacity(k as usize);
        for g in 0..k {
            let mut entries = Vec::with_capacity(n * n);
            for idx in 0..n * n {
                entries.push(next(&format!(
                    "entry ({}, {}) of generator {g}",
                    idx / n,
                    idx % n
                ))?);
            }
            gens.push(IntMatrix::from_entries(n, entries));
        }
        if tokens.next().is_some() {
            return Err(GrowthError::Parse(
                "trailing tokens after last generator".into(),
            ));
        }
        GeneratorSet::new(n, gens)
    }

    pub fn load(path: &Path) -> Result<Self, GrowthError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GrowthError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let n = self.dimension;
        let mut s = format!("{} {}\n", n, self.generators.len());
        for g in &self.generators {
            for i in 0..n {
                let row: Vec<String> = (0..n).map(|j| g.get(i, j).to_string()).collect();
                s.push_str(&row.join(" "));
                s.push('\n');
            }
        }
        s
    }

    pub fn trivial(dimension: usize) -> Self {
        GeneratorSet {
            dimension,
            generators: Vec::new(),
            unitriangular: true,
        }
    }

    /// Integer Heisenberg group: `X = M(1,0,0)` and `Y = M(0,1,0)` where
    /// `M(x,y,z)` has `x, z` in the first row and `y` in the second.
    pub fn heisenberg() -> Self {
        Self::new(
            3,
            vec![
                IntMatrix::elementary(3, 0, 1, 1),
                IntMatrix::elementary(3, 1, 2, 1),
            ],
        )
        .expect("unitriangular generators are invertible")
    }

    /// `Z^d` as block-diagonal unipotent `2d x 2d` matrices.
    pub fn free_abelian(d: usize) -> Self {
        let gens = (0..d)
            .map(|i| IntMatrix::elementary(2 * d, 2 * i, 2 * i + 1, 1))
            .collect();
        Self::new(2 * d.max(1), gens).expect("unitriangular generators are invertible")
    }

    /// The full unitriangular group `UT(n, Z)` generated by the elementary
    /// matrices `E_{i,j}` for all `i < j`.
    pub fn full_unitriangular(n: usize) -> Self {
        let mut gens = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                gens.push(IntMatrix::elementary(n, i, j, 1));
            }
        }
        Self::new(n, gens).expect("unitriangular generators are invertible")
    }

    /// `UT(n, Z)` generated by the superdiagonal elementary matrices only.
    pub fn unitriangular_superdiagonal(n: usize) -> Self {
        let gens = (0..n.saturating_sub(1))
            .map(|i| IntMatrix::elementary(n, i, i + 1, 1))
            .collect();
        Self::new(n, gens).expect("unitriangular generators are invertible")
    }

    /// Sanov's free subgroup of `SL(2, Z)` on two generators.
    pub fn free_group_rank2() -> Self {
        Self::new(
            2,
            vec![
                IntMatrix::from_rows(&[vec![1, 2], vec![0, 1]]),
                IntMatrix::from_rows(&[vec![1, 0], vec![2, 1]]),
            ],
        )
        .expect("determinant one")
    }

    /// Named catalog entries: `heisenberg`, `free2`, `trivial`, `zd:<d>`, `ut:<n>`, `ut-super:<n>`.
    pub fn builtin(name: &str) -> Option<Self> {
        let (base, arg) = match name.split_once(':') {
            Some((b, a)) => (b, a.parse::<usize>().ok()),
            None => (name, None),
        };
        match (base, arg) {
            ("heisenberg", None) => Some(Self::heisenberg()),
            ("free2", None) => Some(Self::free_group_rank2()),
            ("trivial", None) => Some(Self::trivial(1)),
            ("zd", Some(d)) if d >= 1 => Some(Self::free_abelian(d)),
            ("ut", Some(n)) if n >= 2 => Some(Self::full_unitriangular(n)),
            ("ut-super", Some(n)) if n >= 2 => Some(Self::unitriangular_superdiagonal(n)),
            _ => None,
        }
    }
}
