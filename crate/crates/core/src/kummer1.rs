//! The Kummer line K1 = E/{+-1}, a P^1 with coordinate the Edwards
//! y-coordinate: the quotient map is (X0:X1:X2:X3) -> (X0:X2) = (X1:X3).

use std::fmt;

use crate::edwards::{CurveParams, EdwardsPoint};
use crate::error::{Error, Result};
use crate::field::{projective_eq, Field, FieldElement};

/// A point (x0:x1) of P^1; affine value y = x1/x0.
#[derive(Clone)]
pub struct K1Point {
    x0: FieldElement,
    x1: FieldElement,
}

impl K1Point {
    pub fn new(x0: FieldElement, x1: FieldElement) -> Result<K1Point> {
        assert_eq!(x0.field(), x1.field(), "field context mismatch: K1Point");
        if x0.is_zero() && x1.is_zero() {
            return Err(Error::InvalidPoint("(0:0) is not a point of P^1"));
        }
        Ok(K1Point { x0, x1 })
    }

    pub fn coords(&self) -> (&FieldElement, &FieldElement) {
        (&self.x0, &self.x1)
    }

    pub fn x0(&self) -> &FieldElement {
        &self.x0
    }

    pub fn x1(&self) -> &FieldElement {
        &self.x1
    }

    /// Scales so the leading nonzero coordinate is 1.
    pub fn normalized(&self) -> K1Point {
        let lead = if self.x0.is_zero() { &self.x1 } else { &self.x0 };
        let inv = lead.inv().expect("leading coordinate is nonzero");
        K1Point {
            x0: &self.x0 * &inv,
            x1: &self.x1 * &inv,
        }
    }

    /// Parses "x0:x1" with lowercase hex fields.
    pub fn parse(field: &Field, s: &str) -> Result<K1Point> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "expected x0:x1, got {s:?}"
            )));
        }
        K1Point::new(field.from_hex(parts[0])?, field.from_hex(parts[1])?)
    }

    pub(crate) fn in_field(&self, field: &Field) -> K1Point {
        K1Point {
            x0: self.x0.in_field(field),
            x1: self.x1.in_field(field),
        }
    }

    /// Internal constructor for coordinates already known to be nonzero.
    pub(crate) fn from_parts(x0: FieldElement, x1: FieldElement) -> K1Point {
        debug_assert!(!(x0.is_zero() && x1.is_zero()), "(0:0) is not a point");
        K1Point { x0, x1 }
    }
}

impl PartialEq for K1Point {
    fn eq(&self, other: &Self) -> bool {
        projective_eq(&[&self.x0, &self.x1], &[&other.x0, &other.x1])
    }
}

impl fmt::Display for K1Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.x0, self.x1)
    }
}

impl fmt::Debug for K1Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

/// The quotient map E -> K1. Both expressions (X0:X2) and (X1:X3) agree where
/// both are defined; the second is only needed at points with X0 = X2 = 0,
/// which exist only when d is a square.
pub fn project(p: &EdwardsPoint) -> K1Point {
    if !(p.x0().is_zero() && p.x2().is_zero()) {
        K1Point {
            x0: p.x0().clone(),
            x1: p.x2().clone(),
        }
    } else {
        K1Point {
            x0: p.x1().clone(),
            x1: p.x3().clone(),
        }
    }
}

/// Pushes doubling through the quotient:
///
///   (X0:X1) -> ((d-1)X0^4 - d(X0^2-X1^2)^2 : (X0^2-X1^2)^2 + (d-1)X1^4),
///
/// so duplicate(project(P)) = project(2P).
pub fn duplicate(params: &CurveParams, x: &K1Point) -> Result<K1Point> {
    let a = x.x0.square();
    let b = x.x1.square();
    let c = (&a - &b).square();
    let dm1 = params.d_minus_one();
    let out0 = dm1 * &a.square() - params.mul_by_d(&c);
    let out1 = &c + &(dm1 * &b.square());
    if out0.is_zero() && out1.is_zero() {
        return Err(Error::DegenerateOutput("duplicate"));
    }
    Ok(K1Point { x0: out0, x1: out1 })
}
