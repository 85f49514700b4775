//! Prime-field arithmetic over a runtime modulus.
//!
//! A [`Field`] is a shared context holding an odd prime p > 3. Elements keep
//! a handle to their context; mixing elements from different primes in one
//! operation is a programming error and panics. Contexts compare equal when
//! their moduli are equal, so elements re-homed into an instrumented context
//! (see [`Field::instrumented`]) interoperate with plain ones.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Field-operation tallies grouped the way curve formulas are costed.
///
/// Multiplication by the curve constant d is its own class so formula costs
/// can be quoted as "8M + 4S + 2D" style figures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCount {
    pub mul: u64,
    pub sqr: u64,
    pub add_sub: u64,
    pub mul_by_d: u64,
    pub inv: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.mul + self.sqr + self.add_sub + self.mul_by_d + self.inv
    }
}

impl Add for OpCount {
    type Output = OpCount;
    fn add(self, rhs: OpCount) -> OpCount {
        OpCount {
            mul: self.mul + rhs.mul,
            sqr: self.sqr + rhs.sqr,
            add_sub: self.add_sub + rhs.add_sub,
            mul_by_d: self.mul_by_d + rhs.mul_by_d,
            inv: self.inv + rhs.inv,
        }
    }
}

impl fmt::Display for OpCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mul={} sqr={} add_sub={} mul_by_d={} inv={}",
            self.mul, self.sqr, self.add_sub, self.mul_by_d, self.inv
        )
    }
}

#[derive(Debug, Default)]
struct Counters {
    mul: AtomicU64,
    sqr: AtomicU64,
    add_sub: AtomicU64,
    mul_by_d: AtomicU64,
    inv: AtomicU64,
}

/// Handle to the tallies of an instrumented field context.
#[derive(Clone)]
pub struct OpCounter {
    cells: Arc<Counters>,
}

impl OpCounter {
    pub fn snapshot(&self) -> OpCount {
        OpCount {
            mul: self.cells.mul.load(Ordering::Relaxed),
            sqr: self.cells.sqr.load(Ordering::Relaxed),
            add_sub: self.cells.add_sub.load(Ordering::Relaxed),
            mul_by_d: self.cells.mul_by_d.load(Ordering::Relaxed),
            inv: self.cells.inv.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.cells.mul.store(0, Ordering::Relaxed);
        self.cells.sqr.store(0, Ordering::Relaxed);
        self.cells.add_sub.store(0, Ordering::Relaxed);
        self.cells.mul_by_d.store(0, Ordering::Relaxed);
        self.cells.inv.store(0, Ordering::Relaxed);
    }
}

#[derive(Clone, Copy)]
pub(crate) enum Op {
    Mul,
    Sqr,
    AddSub,
    MulByD,
    Inv,
}

enum SqrtPrecomp {
    /// p = 3 (mod 4): a^((p+1)/4) is a root of any square a.
    ThreeMod4 { exp: BigUint },
    /// General Tonelli-Shanks data: p - 1 = q * 2^s with q odd, z a fixed
    /// non-residue (smallest, so the choice is deterministic).
    Tonelli { q: BigUint, s: u64, z: BigUint },
}

struct FieldInner {
    p: BigUint,
    /// (p - 1) / 2, the Euler-criterion exponent.
    legendre_exp: BigUint,
    sqrt: SqrtPrecomp,
    counter: Option<OpCounter>,
}

/// Shared context for arithmetic modulo a fixed odd prime p > 3.
#[derive(Clone)]
pub struct Field {
    inner: Arc<FieldInner>,
}

impl Field {
    /// Builds a context after checking that p is an odd prime greater than 3.
    pub fn new(p: BigUint) -> Result<Field> {
        if p <= BigUint::from(3u32) {
            return Err(Error::InvalidParameter(format!(
                "modulus must exceed 3, got {p}"
            )));
        }
        if !p.bit(0) {
            return Err(Error::InvalidParameter(format!("modulus {p} is even")));
        }
        if !is_prime(&p) {
            return Err(Error::InvalidParameter(format!("modulus {p} is not prime")));
        }
        let one = BigUint::one();
        let legendre_exp = (&p - &one) >> 1;
        let sqrt = if (&p & BigUint::from(3u32)) == BigUint::from(3u32) {
            SqrtPrecomp::ThreeMod4 {
                exp: (&p + &one) >> 2,
            }
        } else {
            let mut q = &p - &one;
            let mut s = 0u64;
            while !q.bit(0) {
                q >>= 1;
                s += 1;
            }
            // Smallest quadratic non-residue, found by Euler's criterion.
            let mut z = BigUint::from(2u32);
            while z.modpow(&legendre_exp, &p).is_one() {
                z += 1u32;
            }
            SqrtPrecomp::Tonelli { q, s, z }
        };
        Ok(Field {
            inner: Arc::new(FieldInner {
                p,
                legendre_exp,
                sqrt,
                counter: None,
            }),
        })
    }

    /// A context with the same modulus whose element operations tally into
    /// the returned counter. Counters are per-context, never global.
    pub fn instrumented(&self) -> (Field, OpCounter) {
        let counter = OpCounter {
            cells: Arc::new(Counters::default()),
        };
        let sqrt = match &self.inner.sqrt {
            SqrtPrecomp::ThreeMod4 { exp } => SqrtPrecomp::ThreeMod4 { exp: exp.clone() },
            SqrtPrecomp::Tonelli { q, s, z } => SqrtPrecomp::Tonelli {
                q: q.clone(),
                s: *s,
                z: z.clone(),
            },
        };
        let field = Field {
            inner: Arc::new(FieldInner {
                p: self.inner.p.clone(),
                legendre_exp: self.inner.legendre_exp.clone(),
                sqrt,
                counter: Some(counter.clone()),
            }),
        };
        (field, counter)
    }

    pub fn modulus(&self) -> &BigUint {
        &self.inner.p
    }

    pub fn element(&self, value: BigUint) -> FieldElement {
        FieldElement {
            value: value % &self.inner.p,
            field: self.clone(),
        }
    }

    pub fn element_u64(&self, value: u64) -> FieldElement {
        self.element(BigUint::from(value))
    }

    /// Parses a lowercase/uppercase hex string (no 0x prefix, no padding
    /// requirement) and reduces it mod p.
    pub fn from_hex(&self, s: &str) -> Result<FieldElement> {
        let digits = BigUint::parse_bytes(s.as_bytes(), 16)
            .ok_or_else(|| Error::InvalidParameter(format!("invalid hex element {s:?}")))?;
        Ok(self.element(digits))
    }

    pub fn zero(&self) -> FieldElement {
        self.element(BigUint::zero())
    }

    pub fn one(&self) -> FieldElement {
        self.element(BigUint::one())
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement {
            value: rng.gen_biguint_below(&self.inner.p),
            field: self.clone(),
        }
    }

    pub(crate) fn tick(&self, op: Op) {
        if let Some(counter) = &self.inner.counter {
            let cell = match op {
                Op::Mul => &counter.cells.mul,
                Op::Sqr => &counter.cells.sqr,
                Op::AddSub => &counter.cells.add_sub,
                Op::MulByD => &counter.cells.mul_by_d,
                Op::Inv => &counter.cells.inv,
            };
            cell.fetch_add(1, Ordering::Relaxed);
        }
    }

    // Raw modular helpers for structural predicates (equality, on-curve and
    // on-surface checks). These never tick counters: validation is not part
    // of any formula's cost.
    pub(crate) fn raw_mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.inner.p
    }

    pub(crate) fn raw_add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let mut v = a + b;
        if v >= self.inner.p {
            v -= &self.inner.p;
        }
        v
    }

    pub(crate) fn raw_sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.inner.p - b + a
        }
    }

    fn assert_same(&self, other: &Field) {
        assert_eq!(
            self.inner.p, other.inner.p,
            "field context mismatch: operands belong to different primes"
        );
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.inner.p == other.inner.p
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field(p = {})", self.inner.p)
    }
}

/// An element of a [`Field`], stored as the canonical residue in [0, p).
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    value: BigUint,
}

impl FieldElement {
    fn raw(field: Field, value: BigUint) -> FieldElement {
        FieldElement { field, value }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.value.is_one()
    }

    /// Parity of the canonical residue; used to pick canonical square roots
    /// and lift signs.
    pub fn is_even(&self) -> bool {
        !self.value.bit(0)
    }

    pub fn square(&self) -> FieldElement {
        self.field.tick(Op::Sqr);
        FieldElement::raw(
            self.field.clone(),
            (&self.value * &self.value) % self.field.modulus(),
        )
    }

    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.field.tick(Op::Inv);
        let p = self.field.modulus();
        let exp = p - BigUint::from(2u32);
        Ok(FieldElement::raw(
            self.field.clone(),
            self.value.modpow(&exp, p),
        ))
    }

    /// Legendre symbol: +1 for nonzero squares, -1 for non-squares, 0 for 0.
    pub fn legendre(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        let e = self
            .value
            .modpow(&self.field.inner.legendre_exp, self.field.modulus());
        if e.is_one() {
            1
        } else {
            -1
        }
    }

    /// The square root whose canonical residue is even (the two roots of a
    /// nonzero square have opposite parity since p is odd).
    pub fn sqrt(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Ok(self.field.zero());
        }
        if self.legendre() != 1 {
            return Err(Error::NonSquare);
        }
        let p = self.field.modulus();
        let mut r = match &self.field.inner.sqrt {
            SqrtPrecomp::ThreeMod4 { exp } => self.value.modpow(exp, p),
            SqrtPrecomp::Tonelli { q, s, z } => tonelli_shanks(&self.value, p, q, *s, z),
        };
        debug_assert_eq!((&r * &r) % p, self.value);
        if r.bit(0) {
            r = p - r;
        }
        Ok(FieldElement::raw(self.field.clone(), r))
    }

    pub fn to_hex(&self) -> String {
        self.value.to_str_radix(16)
    }

    /// The same residue in another context with the same modulus. Used when
    /// re-homing inputs into an instrumented context.
    pub(crate) fn in_field(&self, field: &Field) -> FieldElement {
        self.field.assert_same(field);
        FieldElement::raw(field.clone(), self.value.clone())
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.value == other.value
    }
}

impl Eq for FieldElement {}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_hex())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_hex())
    }
}

fn add_impl(a: &FieldElement, b: &FieldElement) -> FieldElement {
    a.field.assert_same(&b.field);
    a.field.tick(Op::AddSub);
    FieldElement::raw(a.field.clone(), a.field.raw_add(&a.value, &b.value))
}

fn sub_impl(a: &FieldElement, b: &FieldElement) -> FieldElement {
    a.field.assert_same(&b.field);
    a.field.tick(Op::AddSub);
    FieldElement::raw(a.field.clone(), a.field.raw_sub(&a.value, &b.value))
}

fn mul_impl(a: &FieldElement, b: &FieldElement) -> FieldElement {
    a.field.assert_same(&b.field);
    a.field.tick(Op::Mul);
    FieldElement::raw(a.field.clone(), a.field.raw_mul(&a.value, &b.value))
}

fn neg_impl(a: &FieldElement) -> FieldElement {
    a.field.tick(Op::AddSub);
    let v = if a.value.is_zero() {
        BigUint::zero()
    } else {
        a.field.modulus() - &a.value
    };
    FieldElement::raw(a.field.clone(), v)
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl $trait<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                $impl_fn(self, rhs)
            }
        }
        impl $trait<FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                $impl_fn(self, &rhs)
            }
        }
        impl $trait<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                $impl_fn(&self, rhs)
            }
        }
        impl $trait<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                $impl_fn(&self, &rhs)
            }
        }
    };
}

impl_binop!(Add, add, add_impl);
impl_binop!(Sub, sub, sub_impl);
impl_binop!(Mul, mul, mul_impl);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        neg_impl(self)
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        neg_impl(&self)
    }
}

/// Projective equality: all 2x2 minors of the coordinate pair vanish.
/// All-zero vectors are not points and compare unequal to everything.
pub(crate) fn projective_eq(a: &[&FieldElement], b: &[&FieldElement]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    if a.iter().all(|x| x.is_zero()) || b.iter().all(|x| x.is_zero()) {
        return false;
    }
    let f = a[0].field();
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            if f.raw_mul(a[i].value(), b[j].value()) != f.raw_mul(a[j].value(), b[i].value()) {
                return false;
            }
        }
    }
    true
}

/// Parses "0x"-prefixed hex or plain decimal into an unsigned integer.
pub fn parse_uint(s: &str) -> Result<BigUint> {
    let parsed = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        BigUint::parse_bytes(hex.as_bytes(), 16)
    } else {
        BigUint::parse_bytes(s.as_bytes(), 10)
    };
    parsed.ok_or_else(|| Error::InvalidParameter(format!("invalid integer literal {s:?}")))
}

fn tonelli_shanks(a: &BigUint, p: &BigUint, q: &BigUint, s: u64, z: &BigUint) -> BigUint {
    let one = BigUint::one();
    let mut m = s;
    let mut c = z.modpow(q, p);
    let mut t = a.modpow(q, p);
    let mut r = a.modpow(&((q + &one) >> 1), p);
    while t != one {
        let mut i = 0u64;
        let mut t2i = t.clone();
        while t2i != one {
            t2i = (&t2i * &t2i) % p;
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = (&b * &b) % p;
        }
        m = i;
        c = (&b * &b) % p;
        t = (&t * &c) % p;
        r = (&r * &b) % p;
    }
    r
}

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Miller-Rabin with the fixed witness set {2..37} (deterministic below
/// 3.3 * 10^24) extended by the remaining primes below 100 for larger inputs.
fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for q in SMALL_PRIMES {
        let q = BigUint::from(q);
        if *n == q {
            return true;
        }
        if (n % &q).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - BigUint::one();
    let mut d = n_minus_1.clone();
    let mut s = 0u64;
    while !d.bit(0) {
        d >>= 1;
        s += 1;
    }
    'witness: for a in SMALL_PRIMES {
        let a = BigUint::from(a);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 0..s.saturating_sub(1) {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f13() -> Field {
        Field::new(BigUint::from(13u32)).unwrap()
    }

    #[test]
    fn rejects_bad_moduli() {
        for bad in [0u32, 1, 2, 3, 4, 9, 15, 8192] {
            assert!(Field::new(BigUint::from(bad)).is_err(), "accepted {bad}");
        }
        for good in [5u64, 13, 101, 8191, 2305843009213693951] {
            assert!(Field::new(BigUint::from(good)).is_ok(), "rejected {good}");
        }
        // secp256k1 prime: 2^256 - 2^32 - 977
        let p256 = (BigUint::one() << 256u32) - (BigUint::one() << 32u32) - BigUint::from(977u32);
        assert!(Field::new(p256).is_ok());
    }

    #[test]
    fn arithmetic_mod_13() {
        let f = f13();
        assert_eq!(f.element_u64(7) + f.element_u64(9), f.element_u64(3));
        assert_eq!(f.element_u64(5) * f.element_u64(8), f.element_u64(1));
        assert_eq!(f.element_u64(3) - f.element_u64(7), f.element_u64(9));
        assert_eq!(-f.element_u64(5), f.element_u64(8));
        assert_eq!(-f.zero(), f.zero());
        assert_eq!(f.element_u64(5).inv().unwrap(), f.element_u64(8));
        assert_eq!(f.element_u64(6).square(), f.element_u64(10));
        assert_eq!(f.zero().inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn legendre_and_sqrt_match_enumeration() {
        // Enumerated squares are the oracle; legendre and sqrt must agree
        // with them, and sqrt must return the even root of the pair.
        for p in [13u64, 17, 101] {
            let f = Field::new(BigUint::from(p)).unwrap();
            let squares: std::collections::HashSet<u64> =
                (1..p).map(|a| a * a % p).collect();
            for a in 0..p {
                let e = f.element_u64(a);
                let expected = if a == 0 {
                    0
                } else if squares.contains(&a) {
                    1
                } else {
                    -1
                };
                assert_eq!(e.legendre(), expected, "legendre({a}) mod {p}");
                match e.sqrt() {
                    Ok(r) => {
                        assert!(expected >= 0);
                        assert_eq!(r.square(), e);
                        assert!(r.is_even(), "sqrt({a}) = {r} mod {p} is odd");
                    }
                    Err(Error::NonSquare) => assert_eq!(expected, -1),
                    Err(e) => panic!("unexpected error {e:?}"),
                }
            }
        }
    }

    #[test]
    fn sqrt_examples_mod_13() {
        let f = f13();
        assert_eq!(f.element_u64(3).sqrt().unwrap(), f.element_u64(4));
        assert_eq!(f.element_u64(12).sqrt().unwrap(), f.element_u64(8));
        assert_eq!(f.element_u64(1).sqrt().unwrap(), f.element_u64(12));
        assert_eq!(f.element_u64(0).sqrt().unwrap(), f.zero());
        assert_eq!(f.element_u64(7).sqrt(), Err(Error::NonSquare));
    }

    #[test]
    fn sqrt_on_one_mod_four_prime() {
        // 2^61 - 1 is 3 mod 4; 101 and 17 take the Tonelli-Shanks path.
        let f = Field::new(BigUint::from(101u32)).unwrap();
        for a in 0..101u64 {
            let e = f.element_u64(a);
            if e.legendre() >= 0 {
                let r = e.sqrt().unwrap();
                assert_eq!(r.square(), e);
            }
        }
        let m61 = Field::new(BigUint::from((1u64 << 61) - 1)).unwrap();
        let e = m61.element_u64(1234567890123456789);
        if e.legendre() == 1 {
            assert_eq!(e.sqrt().unwrap().square(), e);
        } else {
            assert_eq!((-&e).legendre(), 1, "p = 3 mod 4 makes -1 a non-square");
            assert_eq!((-&e).sqrt().unwrap().square(), -&e);
        }
    }

    #[test]
    #[should_panic(expected = "field context mismatch")]
    fn mixing_fields_panics() {
        let a = f13().element_u64(1);
        let b = Field::new(BigUint::from(17u32)).unwrap().element_u64(1);
        let _ = a + b;
    }

    #[test]
    fn elements_of_different_fields_are_unequal() {
        let a = f13().element_u64(5);
        let b = Field::new(BigUint::from(17u32)).unwrap().element_u64(5);
        assert_ne!(a, b);
    }

    #[test]
    fn instrumented_context_counts_by_class() {
        let f = f13();
        let (fi, counter) = f.instrumented();
        let a = fi.element_u64(5);
        let b = fi.element_u64(7);
        let _ = &a + &b;
        let _ = &a - &b;
        let _ = -&a;
        let _ = &a * &b;
        let _ = a.square();
        let _ = b.inv().unwrap();
        assert_eq!(
            counter.snapshot(),
            OpCount {
                mul: 1,
                sqr: 1,
                add_sub: 3,
                mul_by_d: 0,
                inv: 1
            }
        );
        counter.reset();
        assert_eq!(counter.snapshot(), OpCount::default());
        // Plain contexts never tick anything, and the two contexts compare
        // equal because equality is by modulus.
        assert_eq!(f, fi);
        let _ = f.element_u64(3) * fi.element_u64(4);
    }

    #[test]
    fn hex_roundtrip_and_parse() {
        let f = f13();
        let e = f.element_u64(12);
        assert_eq!(e.to_hex(), "c");
        assert_eq!(f.from_hex("c").unwrap(), e);
        assert_eq!(f.from_hex("19").unwrap(), f.element_u64(12)); // reduced mod 13
        assert!(f.from_hex("zz").is_err());
        assert_eq!(parse_uint("13").unwrap(), BigUint::from(13u32));
        assert_eq!(parse_uint("0xd").unwrap(), BigUint::from(13u32));
        assert!(parse_uint("thirteen").is_err());
    }

    #[test]
    fn projective_eq_basics() {
        let f = f13();
        let a = [&f.element_u64(2), &f.element_u64(6)];
        let b = [&f.element_u64(5), &f.element_u64(2)]; // (2:6) = (5:2)? 2*2=4, 6*5=30=4 yes
        assert!(projective_eq(&a, &b));
        let c = [&f.element_u64(1), &f.element_u64(0)];
        assert!(!projective_eq(&a, &c));
        let z = [&f.zero(), &f.zero()];
        assert!(!projective_eq(&z, &z));
    }
}
