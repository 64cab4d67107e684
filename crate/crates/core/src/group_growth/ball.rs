//! Breadth-first enumeration of Cayley-graph balls.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::generators::GeneratorSet;
use super::matrix::IntMatrix;
use super::GrowthError;

/// Ball sizes `counts[m]` = number of distinct elements of word length at
/// most `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthSeries {
    pub counts: Vec<u64>,
    pub generator_fingerprint: String,
}

impl GrowthSeries {
    pub fn m_max(&self) -> usize {
        self.counts.len().saturating_sub(1)
    }

    /// Sphere sizes `counts[m] - counts[m-1]` (with `counts[-1] = 0`).
    pub fn sphere_sizes(&self) -> Vec<u64> {
        let mut prev = 0;
        self.counts
            .iter()
            .map(|&c| {
                let s = c - prev;
                prev = c;
                s
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,count\n");
        for (m, c) in self.counts.iter().enumerate() {
            let _ = writeln!(s, "{m},{c}");
        }
        s
    }

    /// Checks `counts[0] = 1`, monotonicity and submultiplicativity.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.counts.first() != Some(&1) {
            return Err(format!("counts[0] = {:?}, expected 1", self.counts.first()));
        }
        if let Some(m) = (1..self.counts.len()).find(|&m| self.counts[m] < self.counts[m - 1]) {
            return Err(format!("counts decrease at m = {m}"));
        }
        let n = self.counts.len();
        for a in 0..n {
            for b in 0..n - a {
                let lhs = self.counts[a + b] as u128;
                let rhs = self.counts[a] as u128 * self.counts[b] as u128;
                if lhs > rhs {
                    return Err(format!("counts[{a}+{b}] = {lhs} > {rhs}"));
                }
            }
        }
        Ok(())
    }
}

/// Counts ball sizes up to radius `m_max`, aborting once more than
/// `element_budget` distinct elements have been seen.
pub fn ball_counts(
    gens: &GeneratorSet,
    m_max: usize,
    element_budget: usize,
) -> Result<GrowthSeries, GrowthError> {
    if m_max == 0 {
        return Err(GrowthError::InvalidRadius);
    }
    let step = gens.symmetric_generators()?;
    let identity = IntMatrix::identity(gens.dimension());
    let mut seen: HashSet<IntMatrix> = HashSet::new();
    seen.insert(identity.clone());
    let mut frontier = vec![identity];
    let mut counts = Vec::with_capacity(m_max + 1);
    counts.push(1u64);

    for _ in 0..m_max {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &step {
                let h = g.checked_mul(s)?;
                if !seen.contains(&h) {
                    seen.insert(h.clone());
                    next.push(h);
                    if seen.len() > element_budget {
                        return Err(GrowthError::BudgetExceeded {
                            budget: element_budget,
                            radius: counts.len(),
                        });
                    }
                }
            }
        }
        counts.push(seen.len() as u64);
        frontier = next;
    }

    Ok(GrowthSeries {
        counts,
        generator_fingerprint: gens.fingerprint(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_group() {
        let s = ball_counts(&GeneratorSet::trivial(2), 5, 100).unwrap();
        assert_eq!(s.counts, vec![1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn z2_small_balls() {
        let s = ball_counts(&GeneratorSet::free_abelian(2), 2, 100).unwrap();
        assert_eq!(s.counts, vec![1, 5, 13]);
        assert_eq!(s.to_csv(), "m,count\n0,1\n1,5\n2,13\n");
        assert_eq!(s.sphere_sizes(), vec![1, 4, 8]);
    }

    #[test]
    fn free_group_closed_form() {
        let s = ball_counts(&GeneratorSet::free_group_rank2(), 6, 10_000).unwrap();
        let expected: Vec<u64> = (0..=6u32).map(|m| 2 * 3u64.pow(m) - 1).collect();
        assert_eq!(s.counts, expected);
    }

    #[test]
    fn budget_exceeded() {
        let err = ball_counts(&GeneratorSet::free_group_rank2(), 20, 1000).unwrap_err();
        assert!(matches!(
            err,
            GrowthError::BudgetExceeded { budget: 1000, .. }
        ));
    }

    #[test]
    fn zero_radius_rejected() {
        assert!(matches!(
            ball_counts(&GeneratorSet::heisenberg(), 0, 10),
            Err(GrowthError::InvalidRadius)
        ));
    }

    #[test]
    fn identity_generator_is_trivial() {
        let g = GeneratorSet::new(2, vec![IntMatrix::identity(2)]).unwrap();
        let s = ball_counts(&g, 3, 10).unwrap();
        assert_eq!(s.counts, vec![1, 1, 1, 1]);
    }
}
