//! Exact scalars: arbitrary-precision rationals and complex rationals.

use num::bigint::BigInt;
use num::complex::Complex;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

/// Complex number with exact rational real and imaginary parts.
pub type CRat = Complex<BigRational>;

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn crat(re: i64, im: i64) -> CRat {
    Complex::new(rat(re), rat(im))
}

pub fn czero() -> CRat {
    Complex::new(BigRational::zero(), BigRational::zero())
}

pub fn cone() -> CRat {
    Complex::new(BigRational::one(), BigRational::zero())
}

pub fn conj(z: &CRat) -> CRat {
    Complex::new(z.re.clone(), -z.im.clone())
}

pub fn cabs2(z: &CRat) -> BigRational {
    &z.re * &z.re + &z.im * &z.im
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn crat_to_f64(z: &CRat) -> (f64, f64) {
    (rat_to_f64(&z.re), rat_to_f64(&z.im))
}

/// |z| as an f64, adequate for error-bound bookkeeping.
pub fn cabs_f64(z: &CRat) -> f64 {
    let (re, im) = crat_to_f64(z);
    re.hypot(im)
}

/// Exact n^e for a positive integer base and an integer-valued rational
/// exponent. Returns `None` when e is not an integer (n^e is then
/// irrational for n > 1) or does not fit in an i32.
pub fn exact_pow(n: u64, e: &BigRational) -> Option<BigRational> {
    if !e.is_integer() {
        return None;
    }
    let exp = e.to_integer().to_i32()?;
    let base = BigRational::from_integer(BigInt::from(n));
    if base.is_zero() && exp < 0 {
        return None;
    }
    Some(num::pow::Pow::pow(base, exp))
}

/// Canonical display form for a rational: "p/q", or "p" when q = 1.
pub fn fmt_rat(r: &BigRational) -> String {
    r.to_string()
}

/// Canonical display form for a complex rational: "re" / "re+im*i".
pub fn fmt_crat(z: &CRat) -> String {
    if z.im.is_zero() {
        fmt_rat(&z.re)
    } else if z.im.is_negative() {
        format!("{}-{}i", fmt_rat(&z.re), fmt_rat(&(-z.im.clone())))
    } else {
        format!("{}+{}i", fmt_rat(&z.re), fmt_rat(&z.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_pow_integer_exponents() {
        assert_eq!(exact_pow(3, &rat(2)), Some(rat(9)));
        assert_eq!(exact_pow(2, &rat(-3)), Some(ratio(1, 8)));
        assert_eq!(exact_pow(5, &rat(0)), Some(rat(1)));
        assert_eq!(exact_pow(2, &ratio(1, 2)), None);
    }

    #[test]
    fn rational_round_trip() {
        let r: BigRational = "-7/3".parse().unwrap();
        assert_eq!(fmt_rat(&r), "-7/3");
        assert_eq!(fmt_rat(&rat(4)), "4");
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(fmt_crat(&crat(1, 0)), "1");
        assert_eq!(fmt_crat(&crat(0, -2)), "0-2i");
        assert_eq!(
            fmt_crat(&Complex::new(ratio(1, 2), ratio(3, 4))),
            "1/2+3/4i"
        );
    }
}
