//! Descriptor strings.
//!
//! ```text
//! expr  := term ("x" term)*
//! term  := "cover:" term | "(" expr ")" | atom
//! atom  := NAME ["(" INTEGER ")"]
//! ```
//!
//! Products associate to the left. Atom names: Circle, S, RP, CP, HP, OP, T,
//! K, Sigma, Nil, S2xR, T3Q, S3Q, Fast.

use super::{Atom, GammaError, ManifoldDescriptor, S2xRKind};

// Longest names first so that prefixes do not shadow them.
const NAMES: [&str; 14] = [
    "Circle", "Sigma", "Fast", "S2xR", "T3Q", "S3Q", "Nil", "RP", "CP", "HP", "OP", "S", "T", "K",
];

pub fn parse_descriptor(input: &str) -> Result<ManifoldDescriptor, GammaError> {
    let mut p = Parser { input, pos: 0 };
    let d = p.expr()?;
    p.skip_ws();
    if p.pos < input.len() {
        return Err(p.error("'x' or end of input"));
    }
    Ok(d)
}

struct Parser<'a> {
    input: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.input[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.input.len() - trimmed.len();
    }

    fn error(&self, expected: &str) -> GammaError {
        let found = match self.rest().chars().next() {
            Some(c) => format!("'{c}'"),
            None => "end of input".to_string(),
        };
        GammaError::MalformedDescriptor {
            position: self.pos,
            expected: expected.to_string(),
            found,
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ManifoldDescriptor, GammaError> {
        let mut left = self.term()?;
        while self.eat("x") {
            let right = self.term()?;
            left = ManifoldDescriptor::product(left, right);
        }
        Ok(left)
    }

    fn term(&mut self) -> Result<ManifoldDescriptor, GammaError> {
        if self.eat("cover:") {
            return Ok(ManifoldDescriptor::cover(self.term()?));
        }
        if self.eat("(") {
            let inner = self.expr()?;
            if !self.eat(")") {
                return Err(self.error("')'"));
            }
            return Ok(inner);
        }
        self.atom().map(ManifoldDescriptor::Atom)
    }

    fn atom(&mut self) -> Result<Atom, GammaError> {
        self.skip_ws();
        let Some(name) = NAMES.iter().find(|n| self.rest().starts_with(**n)) else {
            return Err(self.error("an atom name, '(' or 'cover:'"));
        };
        self.pos += name.len();
        let atom = match *name {
            "Circle" => Atom::Circle,
            "OP" => Atom::CayleyPlane,
            "K" => Atom::KleinBottle,
            "T3Q" => Atom::T3FiniteQuotient,
            "S3Q" => Atom::S3Quotient,
            _ => {
                let start = self.pos;
                let value = self.parameter(name)?;
                let unsigned = || {
                    u32::try_from(value).map_err(|_| GammaError::MalformedDescriptor {
                        position: start,
                        expected: "a non-negative parameter".into(),
                        found: value.to_string(),
                    })
                };
                match *name {
                    "S" => Atom::Sphere(unsigned()?),
                    "RP" => Atom::RealProjective(unsigned()?),
                    "CP" => Atom::ComplexProjective(unsigned()?),
                    "HP" => Atom::QuaternionicProjective(unsigned()?),
                    "T" => Atom::Torus(unsigned()?),
                    "Sigma" => Atom::OrientableSurface(unsigned()?),
                    "Fast" => Atom::Fast(unsigned()?),
                    "Nil" => Atom::NilCircleBundle(value),
                    "S2xR" => Atom::S2xRQuotient(
                        u32::try_from(value)
                            .ok()
                            .and_then(S2xRKind::from_index)
                            .ok_or_else(|| GammaError::MalformedDescriptor {
                                position: start,
                                expected: "an S2xR index in 1..=4".into(),
                                found: value.to_string(),
                            })?,
                    ),
                    _ => unreachable!("every parametrized name is handled"),
                }
            }
        };
        Ok(atom)
    }

    fn parameter(&mut self, name: &str) -> Result<i64, GammaError> {
        if !self.eat("(") {
            return Err(self.error(&format!("'(' after {name}")));
        }
        self.skip_ws();
        let digits: usize = self
            .rest()
            .char_indices()
            .take_while(|&(i, c)| c.is_ascii_digit() || (i == 0 && c == '-'))
            .map(|(_, c)| c.len_utf8())
            .sum();
        let value = self.rest()[..digits]
            .parse::<i64>()
            .map_err(|_| self.error("an integer"))?;
        self.pos += digits;
        if !self.eat(")") {
            return Err(self.error("')'"));
        }
        Ok(value)
    }
}
