//! Exact rational scalars and the rounding / root helpers built on them.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_bigint(v: BigInt) -> Rational {
    Rational::from_integer(v)
}

/// Parses `p/q` or a bare integer.
pub fn parse_rational(token: &str) -> Result<Rational> {
    let bad = || Error::InvalidParameter(format!("not a rational: {token:?}"));
    let token = token.trim();
    match token.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::InvalidParameter(format!("zero denominator in {token:?}")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(token.parse().map_err(|_| bad())?)),
    }
}

/// Canonical text form: `p/q`, or `p` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn floor(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn ceil(r: &Rational) -> BigInt {
    r.numer().div_ceil(r.denom())
}

/// Nearest integer, halves rounded toward +infinity.
pub fn round_half_up(r: &Rational) -> BigInt {
    floor(&(r + ratio(1, 2)))
}

/// Smallest integer `c` with `c^k >= x` for `x >= 0`.
pub fn ceil_root(x: &BigInt, k: u32) -> BigInt {
    debug_assert!(!x.is_negative());
    let f = x.nth_root(k);
    if &num_traits::pow(f.clone(), k as usize) == x {
        f
    } else {
        f + 1
    }
}

/// Rational upper enclosure of `sqrt(r)` for `r >= 0`; exact whenever
/// `r` is the square of a rational.
pub fn sqrt_upper(r: &Rational) -> Rational {
    debug_assert!(!r.is_negative());
    let (n, d) = (r.numer(), r.denom());
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        return Rational::new(rn, rd);
    }
    // sqrt(n/d) = sqrt(n*d*4^32) / (d*2^32)
    let scaled: BigInt = (n * d) << 64u32;
    Rational::new(ceil_root(&scaled, 2), d.clone() << 32u32)
}

/// Number of bits of `|x|`, counting zero as one bit.
pub fn bit_len(x: &BigInt) -> u64 {
    x.bits().max(1)
}

/// Bits used to store a rational as a numerator/denominator pair.
pub fn rational_bits(r: &Rational) -> u64 {
    bit_len(r.numer()) + bit_len(r.denom())
}

/// `r <= 2^exp`, decided exactly.
pub fn le_pow2(r: &Rational, exp: u64) -> bool {
    if r.numer().sign() != Sign::Plus {
        return true;
    }
    let bound = r.denom() << (exp as usize);
    r.numer() <= &bound
}

pub fn is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}
