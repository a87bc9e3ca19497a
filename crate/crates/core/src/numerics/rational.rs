use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Parses `"num/den"`, a plain integer, or a finite decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid rational `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let mut n: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

/// Always `num/den`, with `den >= 1`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Twelve significant digits, trailing zeros trimmed.
pub fn format_decimal(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.11e}", x);
    let v: f64 = s.parse().unwrap_or(x);
    let mag = v.abs().log10().floor() as i32;
    if (-5..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        let out = format!("{:.*}", decimals, v);
        if out.contains('.') {
            out.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            out
        }
    } else {
        s
    }
}

/// Simplest rational within `tol` of `x` with denominator at most `max_den`,
/// found by walking the continued-fraction convergents and semiconvergents.
pub fn approximate_rational(x: f64, tol: f64, max_den: u64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let ax = x.abs();
    let (mut p0, mut q0, mut p1, mut q1): (u128, u128, u128, u128) = (0, 1, 1, 0);
    let mut frac = ax;
    for _ in 0..64 {
        let a = frac.floor();
        if a > 1e18 {
            break;
        }
        let a = a as u128;
        // semiconvergents between the previous and the next convergent
        let lo = if q1 == 0 { a } else { a.div_ceil(2).max(1) };
        for k in lo..=a {
            let p = k * p1 + p0;
            let q = k * q1 + q0;
            if q == 0 || q > max_den as u128 {
                break;
            }
            if (ax - p as f64 / q as f64).abs() <= tol {
                let r = Rational::new(BigInt::from(p), BigInt::from(q));
                return Some(if neg { -r } else { r });
            }
        }
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > max_den as u128 {
            return None;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let rem = frac - frac.floor();
        if rem < 1e-300 {
            break;
        }
        frac = 1.0 / rem;
    }
    if q1 != 0 && (ax - p1 as f64 / q1 as f64).abs() <= tol {
        let r = Rational::new(BigInt::from(p1), BigInt::from(q1));
        return Some(if neg { -r } else { r });
    }
    None
}

/// Nearest dyadic `k / 2^e` with `e <= max_exp` and error at most `tol`,
/// preferring the smallest exponent.
pub fn dyadic_rational(x: f64, tol: f64, max_exp: u32) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    for e in 0..=max_exp {
        let scale = (1u64 << e) as f64;
        let k = (x * scale).round();
        if (x - k / scale).abs() <= tol {
            let num = BigInt::from(k as i64);
            let den = BigInt::one() << e;
            return Some(Rational::new(num, den));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/4").unwrap(), r(3, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), r(-3, 4));
        assert_eq!(parse_rational("5").unwrap(), r(5, 1));
        assert_eq!(parse_rational("0.125").unwrap(), r(1, 8));
        assert_eq!(parse_rational("-.5").unwrap(), r(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn format_round_trip() {
        for q in [r(0, 1), r(7, 3), r(-1, 8), r(12, 1)] {
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
        assert_eq!(format_rational(&r(2, 4)), "1/2");
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(0.75), "0.75");
        assert_eq!(format_decimal(2f64.sqrt() - 1.0), "0.414213562373");
        assert_eq!(format_decimal(0.0), "0");
        assert_eq!(format_decimal(23.0 / 25.0), "0.92");
    }

    #[test]
    fn approximation_finds_simple_fractions() {
        assert_eq!(approximate_rational(0.333333333333, 1e-9, 1 << 20), Some(r(1, 3)));
        assert_eq!(approximate_rational(-0.4285714285714, 1e-9, 1000), Some(r(-3, 7)));
        assert_eq!(approximate_rational(1e-13, 1e-9, 1000), Some(r(0, 1)));
        assert_eq!(approximate_rational(std::f64::consts::PI, 1e-12, 100), None);
        let sq = approximate_rational(2f64.sqrt(), 1e-9, 1 << 40).unwrap();
        assert!((rational_to_f64(&sq) - 2f64.sqrt()).abs() <= 1e-9);
    }

    #[test]
    fn dyadic_snapping() {
        assert_eq!(dyadic_rational(0.1875 + 1e-12, 1e-9, 10), Some(r(3, 16)));
        assert_eq!(dyadic_rational(1.0 / 3.0, 1e-9, 10), None);
        assert_eq!(dyadic_rational(-0.5, 1e-9, 10), Some(r(-1, 2)));
    }
}
