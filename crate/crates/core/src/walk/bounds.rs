//! Lower bounds on the covering function derived from random walks.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Signed, Zero};

use super::WalkStats;
use crate::error::{Error, Result};
use crate::numeric::{wilson_interval, Surd};

/// A nondecreasing function on `start..start + values.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneTable<T> {
    start: usize,
    values: Vec<T>,
}

impl<T: Ord + Clone> MonotoneTable<T> {
    pub fn new(start: usize, values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::invalid(format!(
                "table decreases between k={} and k={}",
                start + i,
                start + i + 1
            )));
        }
        Ok(MonotoneTable { start, values })
    }

    /// The running maximum of `values`.
    pub fn running_max(start: usize, values: Vec<T>) -> Self {
        let mut out: Vec<T> = Vec::with_capacity(values.len());
        for v in values {
            let v = match out.last() {
                Some(prev) if *prev > v => prev.clone(),
                _ => v,
            };
            out.push(v);
        }
        MonotoneTable { start, values: out }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Last `k` of the domain; `None` when empty.
    pub fn end(&self) -> Option<usize> {
        (!self.values.is_empty()).then(|| self.start + self.values.len() - 1)
    }

    pub fn get(&self, k: usize) -> Option<&T> {
        k.checked_sub(self.start).and_then(|i| self.values.get(i))
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `f*(n) = max { k : f(k) <= n }`; `None` when `f(start) > n`.
    pub fn f_star(&self, n: &T) -> Option<usize> {
        let cnt = self.values.partition_point(|v| v <= n);
        (cnt > 0).then(|| self.start + cnt - 1)
    }
}

impl MonotoneTable<u64> {
    pub fn from_fn(start: usize, end: usize, f: impl Fn(usize) -> u64) -> Result<Self> {
        MonotoneTable::new(start, (start..=end).map(f).collect())
    }
}

/// `sqrt(r) / (4|S|)`.
pub fn thm_a_bound(r: u64, s_size: usize) -> Surd {
    assert!(s_size >= 1, "generating set must be nonempty");
    Surd::new(BigRational::new(1.into(), BigInt::from(4 * s_size)), r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificationRow {
    pub n: usize,
    pub radius: u64,
    pub inside: u64,
    pub trials: u64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub holds: bool,
}

/// Empirical check of `P[Z_n in B_f(n)] > c` at the sampled checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Certification {
    pub c: BigRational,
    pub z: f64,
    pub rows: Vec<CertificationRow>,
    pub certified: bool,
}

impl Certification {
    /// First and last sampled `n`.
    pub fn window(&self) -> Option<(usize, usize)> {
        Some((self.rows.first()?.n, self.rows.last()?.n))
    }
}

/// Uses every checkpoint of `stats` inside the domain of `f`; a row holds
/// when the lower Wilson limit at `z` sigmas exceeds `c`.
pub fn certify_ball_probability(
    stats: &WalkStats,
    f: &MonotoneTable<u64>,
    c: &BigRational,
    z: f64,
) -> Certification {
    let c_f = num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN);
    let rows: Vec<CertificationRow> = stats
        .checkpoints
        .iter()
        .filter_map(|cp| {
            let radius = *f.get(cp.n)?;
            let inside = cp.within(radius);
            let (lo, hi) = wilson_interval(inside, stats.trials, z);
            Some(CertificationRow {
                n: cp.n,
                radius,
                inside,
                trials: stats.trials,
                wilson_lo: lo,
                wilson_hi: hi,
                holds: lo > c_f,
            })
        })
        .collect();
    let certified = !rows.is_empty() && rows.iter().all(|r| r.holds);
    Certification {
        c: c.clone(),
        z,
        rows,
        certified,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TSpeedBound {
    pub value: Surd,
    pub f_star: Option<usize>,
    /// `None` when no certification was supplied
    pub certified: Option<bool>,
    pub window: Option<(usize, usize)>,
}

impl TSpeedBound {
    pub fn flag(&self) -> String {
        match (self.certified, self.window) {
            (Some(true), Some((a, b))) => format!("certified n={a}..{b}"),
            (Some(false), _) => "uncertified hypothesis (failed)".into(),
            _ => "uncertified hypothesis".into(),
        }
    }
}

/// `(c min mu / 4) sqrt(f*(r))`, zero when `f*(r)` is empty.
pub fn t_speed_bound(
    f: &MonotoneTable<u64>,
    c: &BigRational,
    min_mu: Rational64,
    r: u64,
    certification: Option<&Certification>,
) -> TSpeedBound {
    let fs = f.f_star(&r);
    let mu = BigRational::new((*min_mu.numer()).into(), (*min_mu.denom()).into());
    let coef = c.abs() * mu / BigRational::from_integer(4.into());
    TSpeedBound {
        value: match fs {
            Some(k) => Surd::new(coef, k as u64),
            None => Surd::zero(),
        },
        f_star: fs,
        certified: certification.map(|c| c.certified),
        window: certification.and_then(Certification::window),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CSpeedBound {
    pub value: Surd,
    pub l_star: Option<usize>,
    /// `L*` hit the end of the measured domain, so the value is a
    /// conservative truncation
    pub capped: bool,
}

/// `sqrt(L*(floor(r/2))) / (8|S|)` from a smoothed speed table.
pub fn c_speed_bound(l: &MonotoneTable<BigRational>, r: u64, s_size: usize) -> CSpeedBound {
    let m = BigRational::from_integer((r / 2).into());
    let ls = l.f_star(&m);
    let coef = BigRational::new(1.into(), BigInt::from(8 * s_size));
    CSpeedBound {
        value: match ls {
            Some(k) if !coef.is_zero() => Surd::new(coef, k as u64),
            _ => Surd::zero(),
        },
        l_star: ls,
        capped: ls.is_some() && ls == l.end(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;

    #[test]
    fn f_star_examples() {
        let sq = MonotoneTable::from_fn(0, 20, |k| (k * k) as u64).unwrap();
        assert_eq!(sq.f_star(&10), Some(3));
        let id = MonotoneTable::from_fn(0, 20, |k| k as u64).unwrap();
        assert_eq!(id.f_star(&7), Some(7));
        let shifted = MonotoneTable::from_fn(3, 9, |k| k as u64).unwrap();
        assert_eq!(shifted.f_star(&2), None);
        assert!(MonotoneTable::new(0, vec![1u64, 3, 2]).is_err());
    }

    #[test]
    fn thm_a_values() {
        assert_eq!(thm_a_bound(256, 2), Surd::rational(ratio(2, 1)));
        assert_eq!(thm_a_bound(100, 4).to_f64(), 0.625);
        assert!(thm_a_bound(0, 3).is_zero());
    }

    #[test]
    fn c_speed_on_synthetic_table() {
        let l = MonotoneTable::new(0, (0..=64).map(|k| ratio(k, 1)).collect()).unwrap();
        let b = c_speed_bound(&l, 32, 2);
        assert_eq!(b.value, Surd::rational(ratio(1, 4)));
        assert!(c_speed_bound(&l, 0, 2).value.is_zero());
    }

    #[test]
    fn t_speed_with_identity_radius_matches_thm_a_shape() {
        // f(n) = n, c = 1, uniform mu on |S| = 4: (1/16) sqrt(r)
        let f = MonotoneTable::from_fn(0, 400, |k| k as u64).unwrap();
        let b = t_speed_bound(&f, &ratio(1, 1), Rational64::new(1, 4), 256, None);
        assert_eq!(b.value, Surd::rational(ratio(1, 1)));
        assert_eq!(b.flag(), "uncertified hypothesis");
        let late = MonotoneTable::from_fn(5, 400, |k| k as u64).unwrap();
        assert!(
            t_speed_bound(&late, &ratio(1, 1), Rational64::new(1, 4), 3, None)
                .value
                .is_zero()
        );
    }
}
