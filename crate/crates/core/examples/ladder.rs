//! Minimal end-to-end use: y-coordinate scalar multiplication at a 61-bit
//! prime. Mirrors the README example.

use num_bigint::BigUint;
use splitkummer::{scalar_mul_ladder, CurveParams, Field, K1Point, Result};

fn main() -> Result<()> {
    let field = Field::new(BigUint::from(2305843009213693951u64))?; // 2^61 - 1
    let d = field.element_u64(3); // non-square: the addition law is complete
    let params = CurveParams::new(field, d)?;

    let y = K1Point::parse(params.field(), "1:7")?;
    let n = BigUint::from(0xfedcba9876543210u64);
    let y_np = scalar_mul_ladder(&params, &n, &y)?;
    println!("y(nP) = {y_np}");
    Ok(())
}
