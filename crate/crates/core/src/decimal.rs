//! Working precision for every non-integer quantity.
//!
//! All decimal results are rounded to [`PRECISION`] significant digits
//! (half-even). Additions of already-rounded values are left exact.

use std::str::FromStr;
use std::sync::OnceLock;

use bigdecimal::{BigDecimal, Context, RoundingMode};
use num_bigint::{BigInt, BigUint};

use crate::error::{Error, Result};

pub const PRECISION: u64 = 50;

pub fn ctx() -> &'static Context {
    static CTX: OnceLock<Context> = OnceLock::new();
    CTX.get_or_init(|| {
        Context::default()
            .with_prec(PRECISION)
            .expect("non-zero precision")
            .with_rounding_mode(RoundingMode::HalfEven)
    })
}

#[inline]
pub fn round(x: BigDecimal) -> BigDecimal {
    ctx().round_decimal(x)
}

#[inline]
pub fn mul(a: &BigDecimal, b: &BigDecimal) -> BigDecimal {
    a.mul_with_context(b, ctx())
}

/// `a / b` at working precision. Panics on division by zero; callers check.
pub fn div(a: &BigDecimal, b: &BigDecimal) -> BigDecimal {
    assert!(!is_zero(b), "division by zero");
    a.mul_with_context(&b.inverse_with_context(ctx()), ctx())
}

pub fn exp(x: &BigDecimal) -> BigDecimal {
    if is_zero(x) {
        return BigDecimal::from(1);
    }
    x.exp_with_context(ctx())
}

#[inline]
pub fn is_zero(x: &BigDecimal) -> bool {
    x.sign() == num_bigint::Sign::NoSign
}

#[inline]
pub fn is_positive(x: &BigDecimal) -> bool {
    x.sign() == num_bigint::Sign::Plus
}

#[inline]
pub fn is_negative(x: &BigDecimal) -> bool {
    x.sign() == num_bigint::Sign::Minus
}

pub fn from_biguint(x: &BigUint) -> BigDecimal {
    BigDecimal::from(BigInt::from(x.clone()))
}

pub fn from_bigint(x: &BigInt) -> BigDecimal {
    BigDecimal::from(x.clone())
}

pub fn parse(s: &str) -> Result<BigDecimal> {
    BigDecimal::from_str(s.trim())
        .map_err(|e| Error::InvalidArgument(format!("not a decimal number {s:?}: {e}")))
}

/// Deterministic textual form used in CSV/JSON outputs.
pub fn fmt(x: &BigDecimal) -> String {
    if is_zero(x) {
        return "0".to_string();
    }
    round(x.clone()).normalized().to_string()
}

/// Lossy conversion for plotting and rank statistics only.
pub fn to_f64(x: &BigDecimal) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}
