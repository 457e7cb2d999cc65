//! Exact surds, binomial confidence intervals and number formatting.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `coef * sqrt(radicand)` with `coef >= 0` and square-free-ish radicand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surd {
    coef: BigRational,
    radicand: u64,
}

impl Surd {
    pub fn new(coef: BigRational, radicand: u64) -> Self {
        assert!(!coef.is_negative(), "surd coefficient must be nonnegative");
        if radicand == 0 || coef.is_zero() {
            return Surd::zero();
        }
        let root = radicand.sqrt();
        if root * root == radicand {
            return Surd {
                coef: coef * BigRational::from_integer(root.into()),
                radicand: 1,
            };
        }
        // pull out small square factors
        let mut rad = radicand;
        let mut out = BigInt::one();
        let mut p = 2u64;
        while p * p <= rad && p < 1_000 {
            while rad.is_multiple_of(p * p) {
                rad /= p * p;
                out *= p;
            }
            p += 1;
        }
        Surd {
            coef: coef * BigRational::from_integer(out),
            radicand: rad,
        }
    }

    pub fn zero() -> Self {
        Surd {
            coef: BigRational::zero(),
            radicand: 1,
        }
    }

    pub fn rational(q: BigRational) -> Self {
        Surd::new(q, 1)
    }

    pub fn coef(&self) -> &BigRational {
        &self.coef
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_zero()
    }

    /// `coef^2 * radicand`.
    pub fn square(&self) -> BigRational {
        &self.coef * &self.coef * BigRational::from_integer(self.radicand.into())
    }

    pub fn to_f64(&self) -> f64 {
        self.coef.to_f64().unwrap_or(f64::NAN) * (self.radicand as f64).sqrt()
    }

    pub fn cmp_rational(&self, q: &BigRational) -> Ordering {
        if q.is_negative() {
            return Ordering::Greater;
        }
        self.square().cmp(&(q * q))
    }

    pub fn le_integer(&self, n: u64) -> bool {
        self.cmp_rational(&BigRational::from_integer(n.into())) != Ordering::Greater
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        self.square().cmp(&other.square())
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand == 1 {
            write!(f, "{}", self.coef)
        } else if self.coef.is_one() {
            write!(f, "sqrt({})", self.radicand)
        } else {
            write!(f, "{}*sqrt({})", self.coef, self.radicand)
        }
    }
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// Parses `3`, `-2/5` or a finite decimal like `0.25` exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        return (!q.is_zero()).then(|| BigRational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(digits, den);
    Some(if neg { -v } else { v })
}

/// `floor(sqrt(q))` for `q >= 0`.
pub fn floor_sqrt(q: &BigRational) -> u64 {
    if !q.is_positive() {
        return 0;
    }
    let fl = q.floor().to_integer();
    fl.to_biguint()
        .map(|u| u.sqrt())
        .and_then(|u| u.to_u64())
        .unwrap_or(u64::MAX)
}

/// Natural log of a positive big integer.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().expect("fits").max(1) as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(p / q)` for positive big integers.
pub fn ln_ratio(p: &BigUint, q: &BigUint) -> f64 {
    big_ln(p) - big_ln(q)
}

/// Wilson score interval for `k` successes in `n` trials at `z` sigmas.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    let lo = if k == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if k >= n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// C-style `%.12g`.
pub fn fmt_g12(x: f64) -> String {
    fmt_g(x, 12)
}

pub fn fmt_g(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surd_simplifies_and_compares() {
        let s = Surd::new(ratio(1, 8), 256);
        assert_eq!(s, Surd::rational(ratio(2, 1)));
        let t = Surd::new(ratio(1, 16), 100);
        assert_eq!(t.to_f64(), 0.625);
        let u = Surd::new(ratio(1, 1), 12);
        assert_eq!((u.coef().clone(), u.radicand()), (ratio(2, 1), 3));
        assert!(Surd::new(ratio(1, 1), 2).le_integer(2));
        assert!(!Surd::new(ratio(3, 1), 2).le_integer(4));
    }

    #[test]
    fn g12_matches_printf() {
        assert_eq!(fmt_g12(0.625), "0.625");
        assert_eq!(fmt_g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g12(2.0), "2");
        assert_eq!(fmt_g12(1e-7), "1e-07");
        assert_eq!(fmt_g12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_g12(-0.0001), "-0.0001");
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("0.2"), Some(ratio(1, 5)));
        assert_eq!(parse_rational("-3/6"), Some(ratio(-1, 2)));
        assert_eq!(parse_rational("3"), Some(ratio(3, 1)));
        assert_eq!(parse_rational("x"), None);
        assert_eq!(floor_sqrt(&ratio(400, 25)), 4);
        assert_eq!(floor_sqrt(&ratio(399, 25)), 3);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(30, 100, 3.0);
        assert!(lo < 0.3 && 0.3 < hi);
        assert_eq!(wilson_interval(0, 10, 3.0).0, 0.0);
    }

    #[test]
    fn logs_of_big_numbers() {
        let x = BigUint::from(3u32).pow(200);
        assert!((big_ln(&x) - 200.0 * 3f64.ln()).abs() < 1e-9);
    }
}
