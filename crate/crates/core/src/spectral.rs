//! ℓ² decay of coset distributions under the Markov operator.
//!
//! The fitted rates are empirical: they say how fast `‖f_n‖₂` fell on the
//! computed window and certify nothing about spectral gaps.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::group::{Element, MarkedGroup};
use crate::numeric::{big_ln, Surd};
use crate::subgroup::{CosetKey, IndexEvidence, SubgroupOracle};
use crate::walk::{
    lyons_bound, lyons_holds, ChainMode, CosetChain, WalkMeasure, DEFAULT_CHAIN_BUDGET,
};

/// A finitely supported function on the cosets of `H`, keyed canonically.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CosetFunction {
    /// key -> (representative, value)
    pub values: BTreeMap<CosetKey, (Element, BigRational)>,
}

impl CosetFunction {
    pub fn delta(h: &SubgroupOracle, g: &Element) -> Result<Self> {
        let mut values = BTreeMap::new();
        values.insert(h.coset_key(g)?, (g.clone(), BigRational::one()));
        Ok(CosetFunction { values })
    }

    pub fn get(&self, h: &SubgroupOracle, g: &Element) -> Result<BigRational> {
        Ok(self
            .values
            .get(&h.coset_key(g)?)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(BigRational::zero))
    }

    pub fn l1(&self) -> BigRational {
        self.values.values().map(|(_, v)| v.clone()).sum()
    }

    pub fn l2_squared(&self) -> BigRational {
        self.values.values().map(|(_, v)| v * v).sum()
    }
}

/// `[Pf](Hg) = sum_s mu(s) f(Hg s)`, evaluated by pushing each coset's
/// value along the support; the two agree because `mu` is symmetric.
pub fn markov_apply(
    mu: &WalkMeasure,
    h: &SubgroupOracle,
    f: &CosetFunction,
) -> Result<CosetFunction> {
    let family = h.family();
    let mut out: BTreeMap<CosetKey, (Element, BigRational)> = BTreeMap::new();
    for (rep, v) in f.values.values() {
        if v.is_zero() {
            continue;
        }
        for (s, p) in mu.support() {
            let g = family.multiply(rep, s);
            let w = v * BigRational::new((*p.numer()).into(), (*p.denom()).into());
            let key = h.coset_key(&g)?;
            match out.get_mut(&key) {
                Some((_, acc)) => *acc += w,
                None => {
                    out.insert(key, (g, w));
                }
            }
        }
    }
    Ok(CosetFunction { values: out })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    pub n: usize,
    pub l2_squared: BigRational,
    pub linf: BigRational,
    /// `4/(min mu sqrt n)`; absent at `n = 0` and for finite index
    pub lyons_bound: Option<Surd>,
    pub lyons_ok: Option<bool>,
}

impl DecayRow {
    /// `-ln ‖f_n‖₂`.
    pub fn neg_log_norm(&self) -> f64 {
        let num = self.l2_squared.numer().magnitude();
        let den = self.l2_squared.denom().magnitude();
        -0.5 * (big_ln(num) - big_ln(den))
    }
}

/// Least-squares slope of `-ln ‖f_n‖₂` against `n` on `window`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub epsilon: f64,
    pub window: (usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayTrace {
    pub group: String,
    pub subgroup: String,
    pub measure: String,
    pub includes_identity: bool,
    pub evidence: IndexEvidence,
    pub lumped: bool,
    pub states: usize,
    pub rows: Vec<DecayRow>,
    /// fit on the last half of the computed `n`
    pub tail_fit: Option<DecayFit>,
    pub full_fit: Option<DecayFit>,
    /// `‖f_n‖₂` nonincreasing; checked when the identity is in the support
    pub monotone: Option<bool>,
}

fn fit(rows: &[DecayRow]) -> Option<DecayFit> {
    if rows.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(DecayRow::neg_log_norm).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(DecayFit {
        epsilon: sxy / sxx,
        window: (rows[0].n, rows[rows.len() - 1].n),
    })
}

/// Decay under the lazy measure (uniform on `S ∪ {e}`) or the uniform one.
pub fn decay_trace(
    group: &MarkedGroup,
    h: &SubgroupOracle,
    n_max: usize,
    include_identity: bool,
) -> Result<DecayTrace> {
    let mu = if include_identity {
        WalkMeasure::lazy(group)?
    } else {
        WalkMeasure::uniform(group)?
    };
    decay_trace_with(group, &mu, h, n_max, DEFAULT_CHAIN_BUDGET)
}

pub fn decay_trace_with(
    group: &MarkedGroup,
    mu: &WalkMeasure,
    h: &SubgroupOracle,
    n_max: usize,
    budget: usize,
) -> Result<DecayTrace> {
    let mut h = h.clone();
    let evidence = match h.evidence() {
        Some(e) => e.clone(),
        None => h.certify(group).clone(),
    };
    let chain = CosetChain::build(group, mu, &h, n_max, ChainMode::Auto, budget)?;
    let min_mu = {
        let m = mu.min_mu();
        BigRational::new((*m.numer()).into(), (*m.denom()).into())
    };
    let infinite = evidence.claims_infinite();
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut f = chain.initial();
    loop {
        let (linf, _) = f.linf();
        let n = f.step as u64;
        let (lyons_bound, lyons_ok) = if infinite {
            (
                lyons_bound(&min_mu, n),
                Some(lyons_holds(&linf, &min_mu, n)),
            )
        } else {
            (None, None)
        };
        rows.push(DecayRow {
            n: f.step,
            l2_squared: f.l2_squared(),
            linf,
            lyons_bound,
            lyons_ok,
        });
        if f.step == n_max {
            break;
        }
        f = chain.advance(&f);
    }
    let includes_identity = mu.includes_identity(group);
    let monotone =
        includes_identity.then(|| rows.windows(2).all(|w| w[1].l2_squared <= w[0].l2_squared));
    let tail_fit = fit(&rows[rows.len() / 2..]);
    let full_fit = fit(&rows);
    if monotone == Some(false) {
        return Err(Error::invalid(format!(
            "‖f_n‖₂ increased under a measure holding at e on {}",
            h.name()
        )));
    }
    Ok(DecayTrace {
        group: group.name(),
        subgroup: h.name().to_string(),
        measure: mu.id().to_string(),
        includes_identity,
        evidence,
        lumped: chain.is_lumped(),
        states: chain.states(),
        rows,
        tail_fit,
        full_fit,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;
    use crate::walk::exact_coset_distribution;

    #[test]
    fn one_step_on_z() {
        let z = MarkedGroup::from_registry("Z").unwrap();
        let mu = WalkMeasure::uniform(&z).unwrap();
        let h = SubgroupOracle::parse(z.family(), "trivial").unwrap();
        let f = markov_apply(&mu, &h, &CosetFunction::delta(&h, &z.identity()).unwrap()).unwrap();
        assert_eq!(f.get(&h, &Element::Vector(vec![1])).unwrap(), ratio(1, 2));
        assert_eq!(f.get(&h, &Element::Vector(vec![-1])).unwrap(), ratio(1, 2));
        assert_eq!(f.l1(), ratio(1, 1));
    }

    #[test]
    fn markov_apply_matches_chain() {
        for (g, s) in [
            ("Z^2", "lattice:[[0,1]]"),
            ("free:2", "freegens:[a]"),
            ("heisenberg", "kernel:heisenberg->Z:[1,0]"),
        ] {
            let group = MarkedGroup::from_registry(g).unwrap();
            let h = SubgroupOracle::parse(group.family(), s).unwrap();
            let mu = WalkMeasure::lazy(&group).unwrap();
            let mut f = CosetFunction::delta(&h, &group.identity()).unwrap();
            for n in 1..=8 {
                f = markov_apply(&mu, &h, &f).unwrap();
                let (chain, d) = exact_coset_distribution(&group, &mu, &h, n).unwrap();
                assert_eq!(f.l2_squared(), d.l2_squared(), "{g} n={n}");
                assert_eq!(f.l1(), ratio(1, 1));
                for (rep, v) in f.values.values() {
                    let st = chain.state_of(rep).unwrap().unwrap();
                    assert_eq!(*v, d.coset_mass(st));
                }
            }
        }
    }

    #[test]
    fn lazy_trace_is_monotone_and_starts_at_one() {
        let z = MarkedGroup::from_registry("Z").unwrap();
        let h = SubgroupOracle::parse(z.family(), "trivial").unwrap();
        let t = decay_trace(&z, &h, 16, true).unwrap();
        assert_eq!(t.rows[0].l2_squared, ratio(1, 1));
        assert_eq!(t.monotone, Some(true));
        assert!(t.rows.iter().all(|r| r.lyons_ok != Some(false)));
    }
}
