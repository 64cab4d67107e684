//! Lower-central-series ranks of unitriangular integer groups through the
//! rational Lie algebra spanned by generator logarithms.
//!
//! For a torsion-free nilpotent lattice, the ranks of the lower central
//! series quotients equal the dimensions of the graded pieces of the Lie
//! algebra generated by `log g` over the generators `g`. Everything is exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::generators::GeneratorSet;
use super::GrowthError;

type Q = BigRational;

/// Torsion-free ranks `r_1, ..., r_c` of the lower central series quotients.
/// The empty list encodes a finite (here: trivial) group.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LcsRanks {
    ranks: Vec<u64>,
}

impl LcsRanks {
    /// Trailing zeros are dropped so the last entry is positive.
    pub fn new(mut ranks: Vec<u64>) -> Self {
        while ranks.last() == Some(&0) {
            ranks.pop();
        }
        LcsRanks { ranks }
    }

    pub fn ranks(&self) -> &[u64] {
        &self.ranks
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Componentwise sum, padding the shorter list with zeros.
    pub fn componentwise_sum(&self, other: &LcsRanks) -> LcsRanks {
        let len = self.ranks.len().max(other.ranks.len());
        let at = |r: &[u64], i: usize| r.get(i).copied().unwrap_or(0);
        LcsRanks::new(
            (0..len)
                .map(|i| at(&self.ranks, i) + at(&other.ranks, i))
                .collect(),
        )
    }
}

/// Polynomial growth degree `sum_k k * r_k`.
pub fn bass_guivarch(ranks: &LcsRanks) -> u64 {
    ranks
        .ranks
        .iter()
        .enumerate()
        .map(|(i, &r)| (i as u64 + 1) * r)
        .sum()
}

/// `sum_k r_k`.
pub fn hirsch_length(ranks: &LcsRanks) -> u64 {
    ranks.ranks.iter().sum()
}

/// `1 + (h-1)h/2`, the largest growth degree a nilpotent group of Hirsch
/// length `h` can reach.
pub fn hirsch_degree_bound(h: u64) -> u64 {
    if h == 0 {
        return 0;
    }
    1 + (h - 1) * h / 2
}

#[derive(Debug, Clone, PartialEq)]
struct RatMatrix {
    n: usize,
    a: Vec<Q>,
}

impl RatMatrix {
    fn zero(n: usize) -> Self {
        RatMatrix {
            n,
            a: vec![Q::zero(); n * n],
        }
    }

    fn mul(&self, rhs: &RatMatrix) -> RatMatrix {
        let n = self.n;
        let mut out = RatMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let x = &self.a[i * n + k];
                if x.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let y = &rhs.a[k * n + j];
                    if !y.is_zero() {
                        out.a[i * n + j] += x * y;
                    }
                }
            }
        }
        out
    }

    fn sub(&self, rhs: &RatMatrix) -> RatMatrix {
        RatMatrix {
            n: self.n,
            a: self.a.iter().zip(&rhs.a).map(|(x, y)| x - y).collect(),
        }
    }

    fn bracket(&self, rhs: &RatMatrix) -> RatMatrix {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    fn is_zero(&self) -> bool {
        self.a.iter().all(Zero::is_zero)
    }
}

/// `log(I + N) = sum_{k=1}^{n-1} (-1)^{k+1} N^k / k` for strictly upper
/// triangular `N`.
fn unipotent_log(g: &crate::group_growth::IntMatrix) -> RatMatrix {
    let n = g.dim();
    let mut nil = RatMatrix::zero(n);
    for i in 0..n {
        for j in 0..n {
            let v = g.get(i, j) - i64::from(i == j);
            nil.a[i * n + j] = Q::from_integer(BigInt::from(v));
        }
    }
    let mut log = RatMatrix::zero(n);
    let mut power = nil.clone();
    for k in 1..n.max(1) {
        if power.is_zero() {
            break;
        }
        let coeff = Q::new(
            BigInt::from(if k % 2 == 1 { 1 } else { -1 }),
            BigInt::from(k),
        );
        for (l, p) in log.a.iter_mut().zip(&power.a) {
            *l += &coeff * p;
        }
        power = power.mul(&nil);
    }
    log
}

/// Incrementally maintained basis in reduced row echelon form.
#[derive(Debug, Clone, Default)]
struct Span {
    rows: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

impl Span {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    fn insert(&mut self, mut v: Vec<Q>) -> bool {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone();
                for (x, r) in v.iter_mut().zip(row) {
                    if !r.is_zero() {
                        *x -= &f * r;
                    }
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let lead = v[p].clone();
        for x in v.iter_mut() {
            *x /= &lead;
        }
        for row in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (x, y) in row.iter_mut().zip(&v) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        self.rows.push(v);
        self.pivots.push(p);
        true
    }
}

fn as_matrix(n: usize, v: &[Q]) -> RatMatrix {
    RatMatrix { n, a: v.to_vec() }
}

/// Computes the lower-central-series ranks of the group generated by a
/// unitriangular generator set.
pub fn malcev_lcs_ranks(gens: &GeneratorSet) -> Result<LcsRanks, GrowthError> {
    if !gens.is_unitriangular() {
        return Err(GrowthError::NotUnitriangular);
    }
    let n = gens.dimension();
    let logs: Vec<RatMatrix> = gens.generators().iter().map(unipotent_log).collect();

    // Lie algebra generated by the logs: close under left brackets with the
    // generators, feeding only newly independent elements back in.
    let mut algebra = Span::default();
    let mut layer: Vec<RatMatrix> = logs
        .iter()
        .filter(|m| algebra.insert(m.a.clone()))
        .cloned()
        .collect();
    while !layer.is_empty() {
        let mut next = Vec::new();
        for b in &layer {
            for g in &logs {
                let c = g.bracket(b);
                if algebra.insert(c.a.clone()) {
                    next.push(c);
                }
            }
        }
        layer = next;
    }

    let basis: Vec<RatMatrix> = algebra.rows.iter().map(|r| as_matrix(n, r)).collect();
    let mut dims = vec![algebra.dim()];
    let mut current = basis.clone();
    while !current.is_empty() {
        let mut span = Span::default();
        for a in &basis {
            for b in &current {
                span.insert(a.bracket(b).a);
            }
        }
        if span.dim() >= current.len() {
            // A strictly upper triangular algebra is nilpotent.
            unreachable!("lower central series failed to descend");
        }
        dims.push(span.dim());
        current = span.rows.iter().map(|r| as_matrix(n, r)).collect();
    }
    let ranks = dims.windows(2).map(|w| (w[0] - w[1]) as u64).collect();
    Ok(LcsRanks::new(ranks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_growth::IntMatrix;

    #[test]
    fn log_of_elementary_is_nilpotent_part() {
        let g = IntMatrix::elementary(3, 0, 1, 5);
        let l = unipotent_log(&g);
        assert_eq!(l.a[1], Q::from_integer(BigInt::from(5)));
        assert_eq!(l.a.iter().filter(|x| !x.is_zero()).count(), 1);
    }

    #[test]
    fn log_of_heisenberg_element() {
        // log M(1,1,0) = N - N^2/2 with N^2 = E_13.
        let g = IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![0, 0, 1]]);
        let l = unipotent_log(&g);
        assert_eq!(l.a[2], Q::new(BigInt::from(-1), BigInt::from(2)));
    }

    #[test]
    fn heisenberg_ranks() {
        let r = malcev_lcs_ranks(&GeneratorSet::heisenberg()).unwrap();
        assert_eq!(r.ranks(), &[2, 1]);
        assert_eq!(bass_guivarch(&r), 4);
        assert_eq!(hirsch_length(&r), 3);
    }

    #[test]
    fn identity_generator_gives_empty_ranks() {
        let g = GeneratorSet::new(3, vec![IntMatrix::identity(3)]).unwrap();
        let r = malcev_lcs_ranks(&g).unwrap();
        assert!(r.is_empty());
        assert_eq!(bass_guivarch(&r), 0);
    }

    #[test]
    fn full_ut4() {
        let r = malcev_lcs_ranks(&GeneratorSet::full_unitriangular(4)).unwrap();
        assert_eq!(r.ranks(), &[3, 2, 1]);
        assert_eq!(bass_guivarch(&r), 10);
        let r = malcev_lcs_ranks(&GeneratorSet::unitriangular_superdiagonal(4)).unwrap();
        assert_eq!(r.ranks(), &[3, 2, 1]);
    }

    #[test]
    fn free_abelian_ranks() {
        for d in 1..=4 {
            let r = malcev_lcs_ranks(&GeneratorSet::free_abelian(d)).unwrap();
            assert_eq!(r.ranks(), &[d as u64]);
            assert_eq!(bass_guivarch(&r), d as u64);
        }
    }

    #[test]
    fn not_unitriangular_rejected() {
        assert!(matches!(
            malcev_lcs_ranks(&GeneratorSet::free_group_rank2()),
            Err(GrowthError::NotUnitriangular)
        ));
    }

    #[test]
    fn rank_formulas() {
        assert_eq!(bass_guivarch(&LcsRanks::new(vec![2, 1])), 4);
        assert_eq!(bass_guivarch(&LcsRanks::new(vec![])), 0);
        assert_eq!(hirsch_length(&LcsRanks::new(vec![3, 2, 1])), 6);
        assert_eq!(hirsch_length(&LcsRanks::new(vec![])), 0);
        assert_eq!(LcsRanks::new(vec![2, 1, 0, 0]).ranks(), &[2, 1]);
        assert_eq!(hirsch_degree_bound(3), 4);
    }
}
