//! Square integer matrices with overflow-checked products.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::GrowthError;

/// Row-major `n x n` integer matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        IntMatrix {
            n,
            entries: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_entries(n: usize, entries: Vec<i64>) -> Self {
        assert_eq!(entries.len(), n * n);
        IntMatrix { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        IntMatrix { n, entries }
    }

    /// Identity plus `value` at `(row, col)`.
    pub fn elementary(n: usize, row: usize, col: usize, value: i64) -> Self {
        let mut m = Self::identity(n);
        m.entries[row * n + col] += value;
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.n + col]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// Upper triangular with unit diagonal.
    pub fn is_unitriangular(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let v = self.get(i, j);
                match i.cmp(&j) {
                    std::cmp::Ordering::Equal => v == 1,
                    std::cmp::Ordering::Greater => v == 0,
                    std::cmp::Ordering::Less => true,
                }
            })
        })
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix, GrowthError> {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut entries = vec![0i64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.entries[k * n + j];
                    let prod = a.checked_mul(b).ok_or(GrowthError::EntryOverflow)?;
                    let slot = &mut entries[i * n + j];
                    *slot = slot.checked_add(prod).ok_or(GrowthError::EntryOverflow)?;
                }
            }
        }
        Ok(IntMatrix { n, entries })
    }

    pub fn to_rational(&self) -> Vec<Vec<BigRational>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| BigRational::from_integer(BigInt::from(self.get(i, j))))
                    .collect()
            })
            .collect()
    }

    /// Exact determinant by fraction-free Gaussian elimination.
    pub fn determinant(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| BigInt::from(self.get(i, j))).collect())
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// Integer inverse; `None` unless the determinant is a unit.
    pub fn inverse(&self) -> Option<IntMatrix> {
        let det = self.determinant();
        if det.abs() != BigInt::one() {
            return None;
        }
        let n = self.n;
        let mut a = self.to_rational();
        let mut inv: Vec<Vec<BigRational>> = IntMatrix::identity(n).to_rational();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].clone();
            for j in 0..n {
                a[col][j] = &a[col][j] / &p;
                inv[col][j] = &inv[col][j] / &p;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for j in 0..n {
                    let t = &f * &a[col][j];
                    a[r][j] = &a[r][j] - t;
                    let t = &f * &inv[col][j];
                    inv[r][j] = &inv[r][j] - t;
                }
            }
        }
        let entries = inv
            .into_iter()
            .flatten()
            .map(|v| {
                debug_assert!(v.is_integer());
                v.to_integer().to_i64()
            })
            .collect::<Option<Vec<_>>>()?;
        Some(IntMatrix { n, entries })
    }
}
