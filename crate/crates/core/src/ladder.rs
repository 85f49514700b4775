//! Montgomery ladder on the split Kummer surface: y-coordinate-only scalar
//! multiplication.
//!
//! The state after consuming the leading bits of n (with value m so far) is
//! pi(mP, (m+1)P), stored as a [`K2Point`]. A 0-bit applies phi0
//! (-> pi(2mP, (2m+1)P)) and a 1-bit applies phi1 (-> pi((2m+1)P, (2m+2)P)).
//! The initial state pi(O, P) = ((1:1), y(P), (1:0)) depends only on the
//! Kummer line coordinate y(P), so the ladder computes y(nP) from y(P)
//! without ever seeing a curve point — inputs on the quadratic twist are
//! handled by the same code path.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::edwards::CurveParams;
use crate::error::{Error, Result};
use crate::kummer1::K1Point;
use crate::kummer2::{
    p3p1_to_triple, phi0, phi0_via_lift, phi1, phi1_via_lift, triple_to_p3p1, K2Point,
    K2PointTriple,
};

/// The ladder state pi(O, P) for a point with Kummer coordinate y.
/// Valid for every y in P^1 (the surface relation degenerates to 0 = 0 on
/// this slice), including twist points.
pub fn ladder_init(params: &CurveParams, y: &K1Point) -> K2Point {
    let f = params.field();
    let x = K1Point::from_parts(f.one(), f.one());
    let triple = K2PointTriple::from_parts(params, x, y.clone(), (f.one(), f.zero()));
    triple_to_p3p1(params, &triple)
}

/// One ladder step: phi0 for a 0-bit, phi1 for a 1-bit. If the polynomial
/// representatives hit a common zero (possible only for square d) the step
/// retries through the curve lift; if that also fails, the original
/// exceptional-point error is returned.
pub fn ladder_step(params: &CurveParams, state: &K2Point, bit: bool) -> Result<K2Point> {
    let direct = if bit {
        phi1(params, state)
    } else {
        phi0(params, state)
    };
    match direct {
        Ok(v) => Ok(v),
        Err(err @ Error::ExceptionalPoint { .. }) => {
            let via = if bit {
                phi1_via_lift(params, state)
            } else {
                phi0_via_lift(params, state)
            };
            via.map_err(|_| err)
        }
        Err(e) => Err(e),
    }
}

/// A ladder in progress: the current surface point plus how many steps have
/// been taken, so failures can say where they happened.
#[derive(Clone)]
pub struct LadderState {
    v: K2Point,
    step: usize,
}

impl LadderState {
    pub fn new(start: K2Point) -> LadderState {
        LadderState { v: start, step: 0 }
    }

    pub fn value(&self) -> &K2Point {
        &self.v
    }

    /// Number of steps taken so far.
    pub fn position(&self) -> usize {
        self.step
    }

    pub fn advance(&mut self, params: &CurveParams, bit: bool) -> Result<()> {
        let next = ladder_step(params, &self.v, bit).map_err(|e| Error::LadderStep {
            step: self.step,
            source: Box::new(e),
        })?;
        self.v = next;
        self.step += 1;
        Ok(())
    }
}

/// y(nP) from y(P): runs the ladder over the bits of n, most significant
/// first. n = 0 is rejected (y(O) would not depend on the input, and the
/// all-zero bit string has no ladder encoding).
pub fn scalar_mul_ladder(params: &CurveParams, n: &BigUint, y: &K1Point) -> Result<K1Point> {
    if n.is_zero() {
        return Err(Error::ZeroScalar);
    }
    let mut state = LadderState::new(ladder_init(params, y));
    for i in (0..n.bits()).rev() {
        state.advance(params, n.bit(i))?;
    }
    Ok(p3p1_to_triple(params, state.value()).x().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::kummer1::{duplicate, project};

    fn params_13_5() -> CurveParams {
        let f = Field::new(13u32.into()).unwrap();
        let d = f.element_u64(5);
        CurveParams::new(f, d).unwrap()
    }

    fn k1(params: &CurveParams, x0: u64, x1: u64) -> K1Point {
        let f = params.field();
        K1Point::new(f.element_u64(x0), f.element_u64(x1)).unwrap()
    }

    #[test]
    fn init_state_is_the_base_pair() {
        let params = params_13_5();
        let v = ladder_init(&params, &k1(&params, 1, 0));
        let expect = K2Point::parse(&params, "1:1:0:0;1:0").unwrap();
        assert_eq!(v, expect);
    }

    #[test]
    fn one_is_the_identity_map_even_on_the_twist() {
        let params = params_13_5();
        // y = 2 does not lift to the curve mod 13 (d = 5); the ladder must
        // still return it unchanged.
        for (a, b) in [(1u64, 0u64), (1, 2), (1, 4), (1, 7), (0, 1)] {
            let y = k1(&params, a, b);
            let got = scalar_mul_ladder(&params, &1u32.into(), &y).unwrap();
            assert_eq!(got, y, "1 * ({a}:{b})");
        }
    }

    #[test]
    fn doubling_a_four_torsion_coordinate() {
        let params = params_13_5();
        // P = (1, 0) has order 4; y(2P) = -1.
        let got = scalar_mul_ladder(&params, &2u32.into(), &k1(&params, 1, 0)).unwrap();
        assert_eq!(got, k1(&params, 1, 12));
        // 4P = O so y(4P) = 1, and the order-16 multiple wraps too.
        let got = scalar_mul_ladder(&params, &4u32.into(), &k1(&params, 1, 0)).unwrap();
        assert_eq!(got, k1(&params, 1, 1));
        let got = scalar_mul_ladder(&params, &16u32.into(), &k1(&params, 1, 0)).unwrap();
        assert_eq!(got, k1(&params, 1, 1));
    }

    #[test]
    fn matches_the_double_and_add_oracle() {
        let params = params_13_5();
        let p = params
            .lift_from_y(&k1(&params, 1, 3), false)
            .unwrap();
        for n in 1u64..=20 {
            let want = project(&params.scalar_mul(&n.into(), &p).unwrap());
            let got = scalar_mul_ladder(&params, &n.into(), &project(&p)).unwrap();
            assert_eq!(got, want, "n = {n}");
        }
    }

    #[test]
    fn twist_scalars_satisfy_the_doubling_identity() {
        let params = params_13_5();
        let y = k1(&params, 1, 2); // non-liftable
        for n in 1u64..=6 {
            let once = scalar_mul_ladder(&params, &n.into(), &y).unwrap();
            let twice = scalar_mul_ladder(&params, &(2 * n).into(), &y).unwrap();
            assert_eq!(twice, duplicate(&params, &once).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn zero_scalar_is_rejected() {
        let params = params_13_5();
        let err = scalar_mul_ladder(&params, &0u32.into(), &k1(&params, 1, 0));
        assert!(matches!(err, Err(Error::ZeroScalar)));
    }

    #[test]
    fn exceptional_step_reports_its_position() {
        // Square d = 3: the representative system for rho has common zeros.
        // At U = (4:2:2:1), Z = (1:3) the second projection of rho vanishes,
        // and the lift detour dies on the incomplete addition law, so the
        // original error must surface, wrapped with the step index.
        let f = Field::new(13u32.into()).unwrap();
        let d = f.element_u64(3);
        let params = CurveParams::new(f, d).unwrap();
        let k = K2Point::parse(&params, "4:2:2:1;1:3").unwrap();

        let direct = ladder_step(&params, &k, false);
        assert!(
            matches!(direct, Err(Error::ExceptionalPoint { map: "rho.pi2" })),
            "got {direct:?}"
        );

        let mut state = LadderState::new(k);
        let err = state.advance(&params, false).unwrap_err();
        match err {
            Error::LadderStep { step, source } => {
                assert_eq!(step, 0);
                assert!(matches!(
                    *source,
                    Error::ExceptionalPoint { map: "rho.pi2" }
                ));
            }
            other => panic!("expected LadderStep, got {other:?}"),
        }
    }
}
