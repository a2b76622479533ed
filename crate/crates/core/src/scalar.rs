//! Exact rational-complex scalars and conversions.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt::Write;

pub type Rational = BigRational;

/// Exact complex number with rational real and imaginary parts.
pub type Scalar = Complex<BigRational>;

pub fn rat(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    BigRational::from_integer(BigInt::from(p))
}

pub fn real(r: Rational) -> Scalar {
    Complex::new(r, Rational::zero())
}

pub fn imag(r: Rational) -> Scalar {
    Complex::new(Rational::zero(), r)
}

pub fn sc(re: i64, im: i64) -> Scalar {
    Complex::new(int(re), int(im))
}

pub fn sc_zero() -> Scalar {
    Complex::new(Rational::zero(), Rational::zero())
}

pub fn sc_one() -> Scalar {
    Complex::new(Rational::one(), Rational::zero())
}

pub fn sc_i() -> Scalar {
    Complex::new(Rational::zero(), Rational::one())
}

/// Exact rational value of a finite `f64` (every finite double is a dyadic rational).
///
/// Non-finite input maps to zero; callers validate their inputs before converting.
pub fn exact_f64(x: f64) -> Rational {
    BigRational::from_float(x).unwrap_or_else(Rational::zero)
}

pub fn exact_c64(z: Complex64) -> Scalar {
    Complex::new(exact_f64(z.re), exact_f64(z.im))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // ratio of huge integers: shift both down before dividing
        let n = r.numer();
        let d = r.denom();
        let shift = n.bits().max(d.bits()).saturating_sub(1000);
        let n = n >> shift;
        let d = d >> shift;
        n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0)
    })
}

pub fn to_c64(z: &Scalar) -> Complex64 {
    Complex64::new(to_f64(&z.re), to_f64(&z.im))
}

pub fn is_zero(z: &Scalar) -> bool {
    z.re.is_zero() && z.im.is_zero()
}

/// `p/q` textual form (denominator omitted when it is one).
pub fn format_rational(r: &Rational) -> String {
    let mut s = String::new();
    if r.denom().is_one() {
        let _ = write!(s, "{}", r.numer());
    } else {
        let _ = write!(s, "{}/{}", r.numer(), r.denom());
    }
    s
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() || s.len() > 4096 {
        return None;
    }
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(BigRational::new(p, q))
            }
        }
        None => {
            let p: BigInt = s.parse().ok()?;
            Some(BigRational::from_integer(p))
        }
    }
}

pub fn factorial(n: u32) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    BigRational::from_integer(acc)
}

/// Largest absolute value among real and imaginary parts, as `f64`.
pub fn magnitude(z: &Scalar) -> f64 {
    to_f64(&z.re.abs()).max(to_f64(&z.im.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_conversion_roundtrips() {
        for x in [0.0, 1.0, -0.5, 0.1, 1e-300, 123456.789] {
            assert_eq!(to_f64(&exact_f64(x)), x);
        }
    }

    #[test]
    fn rational_text_roundtrip() {
        let r = rat(-7, 12);
        assert_eq!(format_rational(&r), "-7/12");
        assert_eq!(parse_rational("-7/12"), Some(r));
        assert_eq!(parse_rational("3"), Some(int(3)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }
}
