//! Exact rational arithmetic used for probabilities, rewards and values.
//!
//! Values are `Ratio<i128>`; every quantity produced by the constructed
//! families has a denominator of the form `2^a * 3^b` with small exponents,
//! so the 128-bit representation is ample for the instance sizes the oracle
//! is meant for.

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serializer};

pub type Rational = Ratio<i128>;

pub fn rat(numer: i128, denom: i128) -> Rational {
    Rational::new(numer, denom)
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn half() -> Rational {
    rat(1, 2)
}

/// Renders as `p/q`, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i128 = p.trim().parse().ok()?;
            let q: i128 = q.trim().parse().ok()?;
            (q != 0).then(|| rat(p, q))
        }
        None => s.parse::<i128>().ok().map(Rational::from_integer),
    }
}

/// Exact conversion of a finite `f64` into a rational. Every `f64` is a
/// dyadic rational, so this is lossless as long as the exponent fits.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(zero());
    }
    let bits = x.to_bits();
    let sign: i128 = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i128;
    let (mantissa, exp) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1i128 << 52), exp - 1075)
    };
    if exp >= 0 {
        if exp > 70 {
            return None;
        }
        Some(Rational::from_integer(sign * (mantissa << exp)))
    } else {
        let shift = -exp;
        // strip common factors of two before building the denominator
        let tz = mantissa.trailing_zeros().min(shift as u32) as i32;
        let (m, s) = (mantissa >> tz, shift - tz);
        if s > 120 {
            return None;
        }
        Some(rat(sign * m, 1i128 << s))
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_always_has_denominator() {
        assert_eq!(format_rational(&one()), "1/1");
        assert_eq!(format_rational(&rat(2, 4)), "1/2");
        assert_eq!(parse_rational("3/4"), Some(rat(3, 4)));
        assert_eq!(parse_rational("2"), Some(rat(2, 1)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn f64_conversion_is_exact_for_dyadics() {
        assert_eq!(rational_from_f64(0.5), Some(half()));
        assert_eq!(rational_from_f64(-3.25), Some(rat(-13, 4)));
        assert_eq!(rational_from_f64(7.0), Some(rat(7, 1)));
        assert_eq!(rational_from_f64(f64::NAN), None);
    }
}
