//! The growth invariant γ(M) = γ(π₁M) + γ(Ω₀M) on a symbolic catalog of
//! closed manifolds, and the volume-growth lower bound γ(M) − 1.
//!
//! Atom values are catalog constants; products add componentwise and finite
//! covers leave both components unchanged.

mod parse;

use std::fmt;
use std::ops::Add;

use thiserror::Error;

pub use parse::parse_descriptor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GammaError {
    #[error("malformed descriptor at position {position}: expected {expected}, found {found}")]
    MalformedDescriptor {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("invalid parameter for {atom}: {reason}")]
    InvalidParameter { atom: &'static str, reason: String },
    #[error("internal inconsistency for {descriptor}: {reason}")]
    Inconsistent { descriptor: String, reason: String },
}

/// A growth degree: a non-negative integer or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GammaValue {
    Finite(u64),
    Infinite,
}

impl GammaValue {
    pub fn is_finite(self) -> bool {
        matches!(self, GammaValue::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            GammaValue::Finite(v) => Some(v),
            GammaValue::Infinite => None,
        }
    }

    /// `self − 1`, saturating at zero; infinity stays infinite.
    pub fn minus_one(self) -> GammaValue {
        match self {
            GammaValue::Finite(v) => GammaValue::Finite(v.saturating_sub(1)),
            GammaValue::Infinite => GammaValue::Infinite,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            GammaValue::Finite(v) => v as f64,
            GammaValue::Infinite => f64::INFINITY,
        }
    }
}

impl Add for GammaValue {
    type Output = GammaValue;

    fn add(self, rhs: GammaValue) -> GammaValue {
        match (self, rhs) {
            (GammaValue::Finite(a), GammaValue::Finite(b)) => GammaValue::Finite(a + b),
            _ => GammaValue::Infinite,
        }
    }
}

impl fmt::Display for GammaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaValue::Finite(v) => write!(f, "{v}"),
            GammaValue::Infinite => f.write_str("inf"),
        }
    }
}

/// The four closed geometric 3-manifolds modelled on S² × ℝ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum S2xRKind {
    /// S² × S¹
    Product,
    /// The non-orientable S²-bundle over S¹
    Twisted,
    /// RP² × S¹
    ProjectiveProduct,
    /// RP³ # RP³
    ProjectiveSum,
}

impl S2xRKind {
    pub const ALL: [S2xRKind; 4] = [
        S2xRKind::Product,
        S2xRKind::Twisted,
        S2xRKind::ProjectiveProduct,
        S2xRKind::ProjectiveSum,
    ];

    /// 1-based index used in descriptor strings.
    pub fn index(self) -> u32 {
        match self {
            S2xRKind::Product => 1,
            S2xRKind::Twisted => 2,
            S2xRKind::ProjectiveProduct => 3,
            S2xRKind::ProjectiveSum => 4,
        }
    }

    pub fn from_index(i: u32) -> Option<S2xRKind> {
        S2xRKind::ALL.get((i as usize).checked_sub(1)?).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    Circle,
    Sphere(u32),
    RealProjective(u32),
    ComplexProjective(u32),
    QuaternionicProjective(u32),
    CayleyPlane,
    Torus(u32),
    KleinBottle,
    OrientableSurface(u32),
    NilCircleBundle(i64),
    S2xRQuotient(S2xRKind),
    T3FiniteQuotient,
    S3Quotient,
    /// A manifold of the given dimension known to have infinite γ, e.g. with
    /// exponentially growing fundamental group or loop-space homology.
    Fast(u32),
}

impl Atom {
    /// `(γ(π₁), γ(Ω₀))` for the atom.
    pub fn components(self) -> (GammaValue, GammaValue) {
        use GammaValue::{Finite, Infinite};
        match self {
            Atom::Circle => (Finite(1), Finite(0)),
            Atom::Sphere(_)
            | Atom::RealProjective(_)
            | Atom::ComplexProjective(_)
            | Atom::QuaternionicProjective(_)
            | Atom::CayleyPlane
            | Atom::S3Quotient => (Finite(0), Finite(1)),
            Atom::Torus(d) => (Finite(d as u64), Finite(0)),
            Atom::T3FiniteQuotient => (Finite(3), Finite(0)),
            Atom::KleinBottle => (Finite(2), Finite(0)),
            Atom::OrientableSurface(0) => (Finite(0), Finite(1)),
            Atom::OrientableSurface(1) => (Finite(2), Finite(0)),
            Atom::OrientableSurface(_) => (Infinite, Finite(0)),
            Atom::NilCircleBundle(_) => (Finite(4), Finite(0)),
            Atom::S2xRQuotient(_) => (Finite(1), Finite(1)),
            Atom::Fast(_) => (Finite(0), Infinite),
        }
    }

    pub fn dimension(self) -> u32 {
        match self {
            Atom::Circle => 1,
            Atom::Sphere(d) | Atom::RealProjective(d) | Atom::Torus(d) | Atom::Fast(d) => d,
            Atom::ComplexProjective(n) => 2 * n,
            Atom::QuaternionicProjective(n) => 4 * n,
            Atom::CayleyPlane => 16,
            Atom::KleinBottle | Atom::OrientableSurface(_) => 2,
            Atom::NilCircleBundle(_)
            | Atom::S2xRQuotient(_)
            | Atom::T3FiniteQuotient
            | Atom::S3Quotient => 3,
        }
    }

    /// Whether the rational cohomology ring is generated by one element.
    pub fn is_monogenic(self) -> bool {
        matches!(
            self,
            Atom::Sphere(_)
                | Atom::RealProjective(_)
                | Atom::ComplexProjective(_)
                | Atom::QuaternionicProjective(_)
                | Atom::CayleyPlane
                | Atom::S3Quotient
                | Atom::OrientableSurface(0)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Atom::Circle => "Circle",
            Atom::Sphere(_) => "S",
            Atom::RealProjective(_) => "RP",
            Atom::ComplexProjective(_) => "CP",
            Atom::QuaternionicProjective(_) => "HP",
            Atom::CayleyPlane => "OP",
            Atom::Torus(_) => "T",
            Atom::KleinBottle => "K",
            Atom::OrientableSurface(_) => "Sigma",
            Atom::NilCircleBundle(_) => "Nil",
            Atom::S2xRQuotient(_) => "S2xR",
            Atom::T3FiniteQuotient => "T3Q",
            Atom::S3Quotient => "S3Q",
            Atom::Fast(_) => "Fast",
        }
    }

    fn parameter(self) -> Option<i64> {
        match self {
            Atom::Sphere(d)
            | Atom::RealProjective(d)
            | Atom::ComplexProjective(d)
            | Atom::QuaternionicProjective(d)
            | Atom::Torus(d)
            | Atom::OrientableSurface(d)
            | Atom::Fast(d) => Some(d as i64),
            Atom::NilCircleBundle(e) => Some(e),
            Atom::S2xRQuotient(k) => Some(k.index() as i64),
            Atom::Circle
            | Atom::CayleyPlane
            | Atom::KleinBottle
            | Atom::T3FiniteQuotient
            | Atom::S3Quotient => None,
        }
    }

    pub fn validate(self) -> Result<(), GammaError> {
        let bad = |reason: &str| {
            Err(GammaError::InvalidParameter {
                atom: self.name(),
                reason: reason.to_string(),
            })
        };
        match self {
            Atom::Sphere(d) | Atom::RealProjective(d) if d < 2 => {
                bad("dimension must be at least 2")
            }
            Atom::ComplexProjective(0) | Atom::QuaternionicProjective(0) => {
                bad("n must be at least 1")
            }
            Atom::Torus(0) | Atom::Fast(0) => bad("dimension must be at least 1"),
            Atom::NilCircleBundle(0) => bad("euler number must be non-zero"),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parameter() {
            Some(p) => write!(f, "{}({p})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Expression tree over catalog atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ManifoldDescriptor {
    Atom(Atom),
    Product(Box<ManifoldDescriptor>, Box<ManifoldDescriptor>),
    /// A finite cover or quotient of the child.
    FiniteCover(Box<ManifoldDescriptor>),
}

impl ManifoldDescriptor {
    pub fn product(a: ManifoldDescriptor, b: ManifoldDescriptor) -> Self {
        ManifoldDescriptor::Product(Box::new(a), Box::new(b))
    }

    pub fn cover(a: ManifoldDescriptor) -> Self {
        ManifoldDescriptor::FiniteCover(Box::new(a))
    }

    pub fn dimension(&self) -> u32 {
        match self {
            ManifoldDescriptor::Atom(a) => a.dimension(),
            ManifoldDescriptor::Product(a, b) => a.dimension() + b.dimension(),
            ManifoldDescriptor::FiniteCover(a) => a.dimension(),
        }
    }

    /// `(γ(π₁), γ(Ω₀))` without validation.
    pub fn components(&self) -> (GammaValue, GammaValue) {
        match self {
            ManifoldDescriptor::Atom(a) => a.components(),
            ManifoldDescriptor::Product(a, b) => {
                let (a1, a2) = a.components();
                let (b1, b2) = b.components();
                (a1 + b1, a2 + b2)
            }
            ManifoldDescriptor::FiniteCover(a) => a.components(),
        }
    }

    pub fn validate(&self) -> Result<(), GammaError> {
        match self {
            ManifoldDescriptor::Atom(a) => a.validate(),
            ManifoldDescriptor::Product(a, b) => {
                a.validate()?;
                b.validate()
            }
            ManifoldDescriptor::FiniteCover(a) => a.validate(),
        }
    }

    /// The atom underneath any finite-cover markers, if the descriptor is
    /// not a product.
    pub fn base_atom(&self) -> Option<Atom> {
        match self {
            ManifoldDescriptor::Atom(a) => Some(*a),
            ManifoldDescriptor::FiniteCover(a) => a.base_atom(),
            ManifoldDescriptor::Product(..) => None,
        }
    }
}

impl fmt::Display for ManifoldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldDescriptor::Atom(a) => write!(f, "{a}"),
            ManifoldDescriptor::Product(a, b) => {
                write!(f, "{a} x ")?;
                match **b {
                    ManifoldDescriptor::Product(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
            ManifoldDescriptor::FiniteCover(a) => match **a {
                ManifoldDescriptor::Product(..) => write!(f, "cover:({a})"),
                _ => write!(f, "cover:{a}"),
            },
        }
    }
}

impl std::str::FromStr for ManifoldDescriptor {
    type Err = GammaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_descriptor(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaResult {
    pub gamma_pi1: GammaValue,
    pub gamma_loop: GammaValue,
    pub gamma_total: GammaValue,
    pub theorem_bound: GammaValue,
    pub dimension: u32,
    pub slow: bool,
}

/// Largest γ a slow closed manifold of dimension `d` can have.
pub fn dimension_bound(d: u32) -> u64 {
    let d = d as u64;
    d * d.saturating_sub(1) / 2 + 1
}

/// Evaluates γ on a descriptor, checking the catalog's internal invariants.
pub fn gamma(descriptor: &ManifoldDescriptor) -> Result<GammaResult, GammaError> {
    descriptor.validate()?;
    let (gamma_pi1, gamma_loop) = descriptor.components();
    let gamma_total = gamma_pi1 + gamma_loop;
    let dimension = descriptor.dimension();
    let result = GammaResult {
        gamma_pi1,
        gamma_loop,
        gamma_total,
        theorem_bound: gamma_total.minus_one(),
        dimension,
        slow: gamma_total.is_finite(),
    };
    let inconsistent = |reason: String| GammaError::Inconsistent {
        descriptor: descriptor.to_string(),
        reason,
    };
    if gamma_total < GammaValue::Finite(1) {
        return Err(inconsistent("gamma must be at least 1".into()));
    }
    if let GammaValue::Finite(g) = gamma_total {
        if g > dimension_bound(dimension) {
            return Err(inconsistent(format!(
                "gamma {g} exceeds the bound {} in dimension {dimension}",
                dimension_bound(dimension)
            )));
        }
    }
    Ok(result)
}

/// The lower bound γ(M) − 1 on the volume-growth exponent of any Reeb flow
/// on the unit cotangent bundle.
pub fn theorem_bound(descriptor: &ManifoldDescriptor) -> GammaValue {
    let (a, b) = descriptor.components();
    (a + b).minus_one()
}

/// True iff the descriptor is not slow, or is slow and satisfies
/// γ ≤ d(d−1)/2 + 1.
pub fn cross_check_dimension_bound(descriptor: &ManifoldDescriptor) -> bool {
    let (a, b) = descriptor.components();
    match a + b {
        GammaValue::Infinite => true,
        GammaValue::Finite(g) => g <= dimension_bound(descriptor.dimension()),
    }
}

/// One representative of every atom, with small parameters.
pub fn catalog_atoms() -> Vec<ManifoldDescriptor> {
    let mut atoms = vec![
        Atom::Circle,
        Atom::CayleyPlane,
        Atom::KleinBottle,
        Atom::T3FiniteQuotient,
        Atom::S3Quotient,
    ];
    for d in 2..=6 {
        atoms.push(Atom::Sphere(d));
        atoms.push(Atom::RealProjective(d));
    }
    for n in 1..=3 {
        atoms.push(Atom::ComplexProjective(n));
        atoms.push(Atom::QuaternionicProjective(n));
    }
    for d in 1..=6 {
        atoms.push(Atom::Torus(d));
    }
    for g in 0..=3 {
        atoms.push(Atom::OrientableSurface(g));
    }
    for e in [-2, -1, 1, 2, 5] {
        atoms.push(Atom::NilCircleBundle(e));
    }
    atoms.extend(S2xRKind::ALL.map(Atom::S2xRQuotient));
    atoms.extend([Atom::Fast(3), Atom::Fast(4)]);
    atoms.into_iter().map(ManifoldDescriptor::Atom).collect()
}

/// Atoms, their finite covers, and all pairwise products of atoms.
pub fn catalog_sweep() -> Vec<ManifoldDescriptor> {
    let atoms = catalog_atoms();
    let mut out = atoms.clone();
    out.extend(atoms.iter().cloned().map(ManifoldDescriptor::cover));
    for a in &atoms {
        for b in &atoms {
            out.push(ManifoldDescriptor::product(a.clone(), b.clone()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GammaResult {
        gamma(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn headline_values() {
        assert_eq!(g("T(2) x S(2)").gamma_total, GammaValue::Finite(3));
        assert_eq!(g("Nil(1)").gamma_total, GammaValue::Finite(4));
        assert_eq!(g("Sigma(2)").gamma_total, GammaValue::Infinite);
        assert!(!g("Sigma(2)").slow);
    }

    #[test]
    fn three_manifold_values() {
        assert_eq!(g("S3Q").gamma_total, GammaValue::Finite(1));
        for i in 1..=4 {
            assert_eq!(g(&format!("S2xR({i})")).gamma_total, GammaValue::Finite(2));
        }
        assert_eq!(g("T3Q").gamma_total, GammaValue::Finite(3));
        assert_eq!(g("Nil(-3)").gamma_total, GammaValue::Finite(4));
    }

    #[test]
    fn bounds() {
        assert_eq!(
            theorem_bound(&"T(3)".parse().unwrap()),
            GammaValue::Finite(2)
        );
        assert_eq!(
            theorem_bound(&"S(2)".parse().unwrap()),
            GammaValue::Finite(0)
        );
        assert_eq!(
            theorem_bound(&"Nil(1)".parse().unwrap()),
            GammaValue::Finite(3)
        );
        assert_eq!(
            theorem_bound(&"Sigma(5)".parse().unwrap()),
            GammaValue::Infinite
        );
    }

    #[test]
    fn dimension_cross_check() {
        for d in 1..=6 {
            assert!(cross_check_dimension_bound(&ManifoldDescriptor::Atom(
                Atom::Torus(d)
            )));
        }
        assert!(cross_check_dimension_bound(&"Nil(1)".parse().unwrap()));
        assert_eq!(dimension_bound(3), 4);
        assert!(cross_check_dimension_bound(&"Sigma(2)".parse().unwrap()));
    }

    #[test]
    fn invalid_parameters_rejected() {
        for bad in ["S(1)", "RP(1)", "CP(0)", "T(0)", "Nil(0)"] {
            let d: ManifoldDescriptor = bad.parse().unwrap();
            assert!(
                matches!(gamma(&d), Err(GammaError::InvalidParameter { .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn dimensions() {
        assert_eq!(g("CP(2) x HP(1) x OP").dimension, 4 + 4 + 16);
        assert_eq!(g("cover:(T(2) x S(3))").dimension, 5);
    }

    #[test]
    fn sweep_is_consistent() {
        for d in catalog_sweep() {
            assert!(cross_check_dimension_bound(&d), "{d}");
            gamma(&d).unwrap();
        }
    }
}
