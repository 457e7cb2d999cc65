//! Exact fractional set cover.
//!
//! The covering LP `min 1.x, A^T x >= 1, x >= 0` is solved through its
//! dual packing LP `max 1.y, A y <= 1, y >= 0`, whose slack basis is
//! feasible. The tableau is kept fraction-free: every entry is an integer
//! over the common denominator `d`, the determinant of the current basis,
//! and each pivot divides exactly by the previous `d`. Pivots follow the
//! most negative reduced cost until a long degenerate run, after which
//! Bland's rule takes over for good and rules out cycling. Both optimal solutions are read off the final tableau and
//! verified in rational arithmetic before a value is returned.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{CoverInstance, CoverKind, CoverResult, SetSystem, SolverTrace};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalCertificate {
    pub value: BigRational,
    /// covering weights, one per set
    pub primal: Vec<BigRational>,
    /// packing weights, one per universe element
    pub dual: Vec<BigRational>,
    pub pivots: u64,
}

impl FractionalCertificate {
    /// Re-checks feasibility of both solutions and equality of objectives.
    pub fn verify(&self, sys: &SetSystem) -> Result<()> {
        let one = BigRational::one();
        if self
            .primal
            .iter()
            .chain(&self.dual)
            .any(|v| v.is_negative())
        {
            return Err(Error::invalid("negative LP weight"));
        }
        let mut cover = vec![BigRational::zero(); sys.universe];
        for (s, set) in sys.sets.iter().enumerate() {
            let mut load = BigRational::zero();
            for &e in set {
                cover[e as usize] += &self.primal[s];
                load += &self.dual[e as usize];
            }
            if load > one {
                return Err(Error::invalid(format!("packing constraint {s} violated")));
            }
        }
        if let Some(e) = cover.iter().position(|c| *c < one) {
            return Err(Error::invalid(format!(
                "element {e} fractionally uncovered"
            )));
        }
        let p: BigRational = self.primal.iter().sum();
        let d: BigRational = self.dual.iter().sum();
        if p != self.value || d != self.value {
            return Err(Error::invalid("primal and dual objectives differ"));
        }
        Ok(())
    }
}

/// Tableau entries: `i128` with overflow detection, or `BigInt`.
trait Entry: Clone + Ord + Sized {
    fn from_i64(v: i64) -> Self;
    /// `(p x - f y) / d`, exact; `None` on overflow.
    fn pivot_combine(p: &Self, x: &Self, f: &Self, y: &Self, d: &Self) -> Option<Self>;
    fn mul(a: &Self, b: &Self) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn sign(&self) -> i8;
}

impl Entry for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }

    fn pivot_combine(p: &Self, x: &Self, f: &Self, y: &Self, d: &Self) -> Option<Self> {
        if *f == 0 || *y == 0 {
            return p.checked_mul(*x).map(|v| v / d);
        }
        let v = p.checked_mul(*x)?.checked_sub(f.checked_mul(*y)?)?;
        Some(v / d)
    }

    fn mul(a: &Self, b: &Self) -> Option<Self> {
        a.checked_mul(*b)
    }

    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }

    fn sign(&self) -> i8 {
        self.signum() as i8
    }
}

impl Entry for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }

    fn pivot_combine(p: &Self, x: &Self, f: &Self, y: &Self, d: &Self) -> Option<Self> {
        if x.is_zero() && (f.is_zero() || y.is_zero()) {
            return Some(BigInt::zero());
        }
        Some((p * x - f * y) / d)
    }

    fn mul(a: &Self, b: &Self) -> Option<Self> {
        Some(a * b)
    }

    fn to_big(&self) -> BigInt {
        self.clone()
    }

    fn sign(&self) -> i8 {
        if self.is_negative() {
            -1
        } else if self.is_zero() {
            0
        } else {
            1
        }
    }
}

struct Tableau<T> {
    t: Vec<Vec<T>>,
    basis: Vec<usize>,
    d: T,
    pivots: u64,
}

/// Runs Bland's-rule simplex to optimality; `None` on overflow.
fn simplex<T: Entry>(sys: &SetSystem) -> Option<Tableau<T>> {
    let n = sys.universe;
    let m = sys.sets.len();
    let cols = n + m + 1;
    let rhs = n + m;
    let zero = T::from_i64(0);
    let mut t: Vec<Vec<T>> = vec![vec![zero.clone(); cols]; m + 1];
    for (s, set) in sys.sets.iter().enumerate() {
        for &e in set {
            t[s][e as usize] = T::from_i64(1);
        }
        t[s][n + s] = T::from_i64(1);
        t[s][rhs] = T::from_i64(1);
    }
    for x in t[m].iter_mut().take(n) {
        *x = T::from_i64(-1);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut d = T::from_i64(1);
    let mut pivots = 0u64;
    let mut degenerate_run = 0usize;
    let mut bland = false;
    loop {
        let entering = if bland {
            (0..n + m).find(|&j| t[m][j].sign() < 0)
        } else {
            (0..n + m)
                .filter(|&j| t[m][j].sign() < 0)
                .min_by(|&a, &b| t[m][a].cmp(&t[m][b]).then(a.cmp(&b)))
        };
        let Some(c) = entering else {
            break;
        };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][c].sign() <= 0 {
                continue;
            }
            leave = Some(match leave {
                None => i,
                Some(k) => {
                    // compare rhs_i / t_ic with rhs_k / t_kc
                    let a = T::mul(&t[i][rhs], &t[k][c])?;
                    let b = T::mul(&t[k][rhs], &t[i][c])?;
                    if a < b || (a == b && basis[i] < basis[k]) {
                        i
                    } else {
                        k
                    }
                }
            });
        }
        // bounded: y_e <= 1 through any set containing e
        let r = leave.expect("packing LP is bounded");
        if t[r][rhs].sign() == 0 {
            degenerate_run += 1;
            // a long degenerate stretch may cycle: Bland's rule from here on
            bland |= degenerate_run > m;
        } else {
            degenerate_run = 0;
        }
        let p = t[r][c].clone();
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = T::pivot_combine(&p, x, &f, y, &d)?;
            }
        }
        d = p;
        basis[r] = c;
        pivots += 1;
    }
    Some(Tableau {
        t,
        basis,
        d,
        pivots,
    })
}

fn certificate<T: Entry>(sys: &SetSystem, tab: Tableau<T>) -> FractionalCertificate {
    let n = sys.universe;
    let m = sys.sets.len();
    let rhs = n + m;
    let d = tab.d.to_big();
    let q = |v: &T| BigRational::new(v.to_big(), d.clone());
    let value = q(&tab.t[m][rhs]);
    let primal = (0..m).map(|s| q(&tab.t[m][n + s])).collect();
    let mut dual = vec![BigRational::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            dual[b] = q(&tab.t[i][rhs]);
        }
    }
    FractionalCertificate {
        value,
        primal,
        dual,
        pivots: tab.pivots,
    }
}

/// Optimum of the fractional covering relaxation, with certificates.
pub fn solve_fractional(sys: &SetSystem) -> Result<FractionalCertificate> {
    let m = sys.sets.len();
    if sys.universe == 0 {
        return Ok(FractionalCertificate {
            value: BigRational::zero(),
            primal: vec![BigRational::zero(); m],
            dual: Vec::new(),
            pivots: 0,
        });
    }
    if let Some(e) = sys.uncovered().first() {
        return Err(Error::infeasible(format!(
            "element {e} lies in no candidate; the covering LP is infeasible"
        )));
    }
    let cert = match simplex::<i128>(sys) {
        Some(tab) => certificate(sys, tab),
        None => certificate(sys, simplex::<BigInt>(sys).expect("BigInt never overflows")),
    };
    cert.verify(sys)?;
    Ok(cert)
}

/// The fractional optimum of the roster-restricted cover.
pub fn fractional_cover(inst: &CoverInstance) -> Result<(CoverResult, FractionalCertificate)> {
    let cert = solve_fractional(inst.system())?;
    let ceil = cert.value.ceil().to_integer();
    let result = CoverResult {
        kind: CoverKind::FractionalLower,
        value: cert.value.clone(),
        chosen: Vec::new(),
        cosets: Vec::new(),
        trace: SolverTrace {
            nodes: cert.pivots,
            proven_optimal: true,
            lower_bound: u64::try_from(ceil).unwrap_or(0),
            note: "exact LP relaxation, roster-restricted".into(),
        },
    };
    Ok((result, cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn triangle_has_value_three_halves() {
        // edges of a triangle covering its three vertices
        let sys = SetSystem::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let cert = solve_fractional(&sys).unwrap();
        assert_eq!(cert.value, q(3, 2));
    }

    #[test]
    fn disjoint_singletons_are_integral() {
        let sys = SetSystem::new(5, (0..5).map(|i| vec![i]).collect()).unwrap();
        assert_eq!(solve_fractional(&sys).unwrap().value, q(5, 1));
    }

    #[test]
    fn fano_plane_value() {
        // lines of the Fano plane: fractional cover 7/3, integer cover 3
        let lines = [
            [0, 1, 2],
            [0, 3, 4],
            [0, 5, 6],
            [1, 3, 5],
            [1, 4, 6],
            [2, 3, 6],
            [2, 4, 5],
        ];
        let sys = SetSystem::new(7, lines.iter().map(|l| l.to_vec()).collect()).unwrap();
        assert_eq!(solve_fractional(&sys).unwrap().value, q(7, 3));
    }
}
