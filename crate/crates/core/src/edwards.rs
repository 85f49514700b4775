//! The Edwards curve x^2 + y^2 = 1 + d x^2 y^2 as the intersection of two
//! quadrics in P^3,
//!
//!   X0^2 + d X3^2 = X1^2 + X2^2,     X0 X3 = X1 X2,
//!
//! with (X0:X1:X2:X3) = (1:x:y:xy) on the affine part. The full group law
//! here is the reference ("oracle") that everything on the quotient surfaces
//! is checked against. Addition requires a complete curve (d a non-square);
//! the quotient-surface formulas themselves work for any d outside {0, 1}.

use std::fmt;

use num_bigint::BigUint;
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{projective_eq, Field, FieldElement, Op};
use crate::kummer1::K1Point;

/// A curve y^2 + x^2 = 1 + d x^2 y^2 over a prime field, d outside {0, 1}.
#[derive(Clone)]
pub struct CurveParams {
    field: Field,
    d: FieldElement,
    d_minus_one: FieldElement,
    complete: bool,
}

impl CurveParams {
    pub fn new(field: Field, d: FieldElement) -> Result<CurveParams> {
        assert_eq!(&field, d.field(), "field context mismatch: d");
        if d.is_zero() || d.is_one() {
            return Err(Error::InvalidParameter(format!(
                "curve constant d = {d} must avoid 0 and 1"
            )));
        }
        let complete = d.legendre() == -1;
        let d_minus_one = &d - &field.one();
        Ok(CurveParams {
            field,
            d,
            d_minus_one,
            complete,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn d(&self) -> &FieldElement {
        &self.d
    }

    pub(crate) fn d_minus_one(&self) -> &FieldElement {
        &self.d_minus_one
    }

    /// True when d is a non-square, which makes the group law total.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Multiplication by the curve constant, tallied in its own cost class.
    pub fn mul_by_d(&self, a: &FieldElement) -> FieldElement {
        a.field().tick(Op::MulByD);
        a.field()
            .element(a.field().raw_mul(a.value(), self.d.value()))
    }

    /// The same parameters re-homed into another context with equal modulus
    /// (used to run sections under an instrumented field).
    pub fn with_field(&self, field: &Field) -> CurveParams {
        CurveParams {
            field: field.clone(),
            d: self.d.in_field(field),
            d_minus_one: self.d_minus_one.in_field(field),
            complete: self.complete,
        }
    }

    pub fn identity(&self) -> EdwardsPoint {
        EdwardsPoint {
            x0: self.field.one(),
            x1: self.field.zero(),
            x2: self.field.one(),
            x3: self.field.zero(),
        }
    }

    /// Raw check of both defining quadrics (and that the vector is nonzero).
    pub fn contains(&self, p: &EdwardsPoint) -> bool {
        let f = &self.field;
        if [&p.x0, &p.x1, &p.x2, &p.x3].iter().all(|c| c.is_zero()) {
            return false;
        }
        let x0sq = f.raw_mul(p.x0.value(), p.x0.value());
        let x1sq = f.raw_mul(p.x1.value(), p.x1.value());
        let x2sq = f.raw_mul(p.x2.value(), p.x2.value());
        let x3sq = f.raw_mul(p.x3.value(), p.x3.value());
        let lhs = f.raw_add(&x0sq, &f.raw_mul(self.d.value(), &x3sq));
        let rhs = f.raw_add(&x1sq, &x2sq);
        lhs == rhs
            && f.raw_mul(p.x0.value(), p.x3.value()) == f.raw_mul(p.x1.value(), p.x2.value())
    }

    /// Complete Edwards addition in extended coordinates.
    ///
    /// With the labels (X:Y:Z:T) = (x1:x2:x0:x3) this is the a = 1 case of
    /// the Hisil-Wong-Carter-Dawson addition; completeness (d non-square)
    /// guarantees the output is a valid projective point.
    pub fn add(&self, p: &EdwardsPoint, q: &EdwardsPoint) -> Result<EdwardsPoint> {
        if !self.complete {
            return Err(Error::IncompleteCurve);
        }
        let a = &p.x1 * &q.x1;
        let b = &p.x2 * &q.x2;
        let c = self.mul_by_d(&(&p.x3 * &q.x3));
        let lam = &p.x0 * &q.x0;
        let e = (&p.x1 + &p.x2) * (&q.x1 + &q.x2) - &a - &b;
        let f = &lam - &c;
        let g = &lam + &c;
        let h = &b - &a;
        let out = EdwardsPoint {
            x0: &f * &g,
            x1: &e * &f,
            x2: &g * &h,
            x3: &e * &h,
        };
        debug_assert!(self.contains(&out));
        Ok(out)
    }

    pub fn double(&self, p: &EdwardsPoint) -> Result<EdwardsPoint> {
        self.add(p, p)
    }

    /// Reference scalar multiple by repeated doubling and addition.
    pub fn scalar_mul(&self, n: &BigUint, p: &EdwardsPoint) -> Result<EdwardsPoint> {
        let mut acc = self.identity();
        for i in (0..n.bits()).rev() {
            acc = self.add(&acc, &acc)?;
            if n.bit(i) {
                acc = self.add(&acc, p)?;
            }
        }
        Ok(acc)
    }

    /// Solves x^2 = (1 - y^2) / (1 - d y^2) for the y-coordinate given as a
    /// point (y0:y1) of P^1 (affine y = y1/y0) and picks the lift whose
    /// affine x-coordinate has the requested parity.
    pub fn lift_from_y(&self, y: &K1Point, odd_x: bool) -> Result<EdwardsPoint> {
        let (y0, y1) = y.coords();
        let y0sq = y0.square();
        let y1sq = y1.square();
        let num = &y0sq - &y1sq;
        let den = &y0sq - &self.mul_by_d(&y1sq);
        let x2 = &num * &den.inv()?;
        let mut x = x2.sqrt()?;
        if odd_x && !x.is_zero() {
            x = -&x;
        }
        let out = EdwardsPoint {
            x0: y0.clone(),
            x1: &x * y0,
            x2: y1.clone(),
            x3: &x * y1,
        };
        debug_assert!(self.contains(&out));
        Ok(out)
    }

    /// A uniformly-seeded curve point: sample y until it lifts, with a random
    /// sign. Deterministic for a fixed RNG state.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> EdwardsPoint {
        loop {
            let y = K1Point::new(self.field.one(), self.field.random_element(rng))
                .expect("(1:y) is never the zero vector");
            let odd = rng.gen::<bool>();
            if let Ok(p) = self.lift_from_y(&y, odd) {
                return p;
            }
        }
    }
}

impl PartialEq for CurveParams {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.d == other.d
    }
}

impl fmt::Debug for CurveParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CurveParams(p = {}, d = {})",
            self.field.modulus(),
            self.d
        )
    }
}

/// A point (X0:X1:X2:X3) of the Edwards model in P^3.
#[derive(Clone)]
pub struct EdwardsPoint {
    x0: FieldElement,
    x1: FieldElement,
    x2: FieldElement,
    x3: FieldElement,
}

impl EdwardsPoint {
    pub fn new(
        params: &CurveParams,
        x0: FieldElement,
        x1: FieldElement,
        x2: FieldElement,
        x3: FieldElement,
    ) -> Result<EdwardsPoint> {
        let p = EdwardsPoint { x0, x1, x2, x3 };
        if !params.contains(&p) {
            return Err(Error::NotOnCurve);
        }
        Ok(p)
    }

    pub fn coords(&self) -> [&FieldElement; 4] {
        [&self.x0, &self.x1, &self.x2, &self.x3]
    }

    pub fn x0(&self) -> &FieldElement {
        &self.x0
    }

    pub fn x1(&self) -> &FieldElement {
        &self.x1
    }

    pub fn x2(&self) -> &FieldElement {
        &self.x2
    }

    pub fn x3(&self) -> &FieldElement {
        &self.x3
    }

    /// Negation (X0:-X1:X2:-X3); the fixed points are the 2-torsion.
    pub fn negate(&self) -> EdwardsPoint {
        EdwardsPoint {
            x0: self.x0.clone(),
            x1: -&self.x1,
            x2: self.x2.clone(),
            x3: -&self.x3,
        }
    }

    pub fn is_identity(&self) -> bool {
        // (1:0:1:0) up to scale.
        self.x1.is_zero() && self.x3.is_zero() && self.x0 == self.x2 && !self.x0.is_zero()
    }

    /// Parses "X0:X1:X2:X3" (lowercase hex fields) and validates membership.
    pub fn parse(params: &CurveParams, s: &str) -> Result<EdwardsPoint> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::InvalidParameter(format!(
                "expected X0:X1:X2:X3, got {s:?}"
            )));
        }
        let f = params.field();
        EdwardsPoint::new(
            params,
            f.from_hex(parts[0])?,
            f.from_hex(parts[1])?,
            f.from_hex(parts[2])?,
            f.from_hex(parts[3])?,
        )
    }

    pub(crate) fn in_field(&self, field: &Field) -> EdwardsPoint {
        EdwardsPoint {
            x0: self.x0.in_field(field),
            x1: self.x1.in_field(field),
            x2: self.x2.in_field(field),
            x3: self.x3.in_field(field),
        }
    }
}

impl PartialEq for EdwardsPoint {
    fn eq(&self, other: &Self) -> bool {
        projective_eq(&self.coords(), &other.coords())
    }
}

impl fmt::Display for EdwardsPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.x0, self.x1, self.x2, self.x3)
    }
}

impl fmt::Debug for EdwardsPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}
