//! Lyons-bound checks, speed tables and cautiousness probes.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::bounds::MonotoneTable;
use super::chain::{ChainMode, CosetChain, DEFAULT_CHAIN_BUDGET};
use super::simulate::{simulate_walk, WalkConfig};
use super::WalkMeasure;
use crate::error::{Error, Result};
use crate::group::{Element, MarkedGroup};
use crate::numeric::{floor_sqrt, wilson_interval, Surd};
use crate::subgroup::{Coset, IndexEvidence, SubgroupOracle};

/// Sigmas used for Monte Carlo intervals.
pub const Z_SIGMAS: f64 = 3.0;

/// `4 / (min mu sqrt(n))`, undefined at `n = 0`.
pub fn lyons_bound(min_mu: &BigRational, n: u64) -> Option<Surd> {
    (n > 0).then(|| {
        let coef =
            BigRational::from_integer(4.into()) / (min_mu * BigRational::from_integer(n.into()));
        Surd::new(coef, n)
    })
}

/// `p <= 4 / (min mu sqrt(n))`, decided exactly as `p^2 min_mu^2 n <= 16`.
pub fn lyons_holds(p: &BigRational, min_mu: &BigRational, n: u64) -> bool {
    n == 0
        || p * p * min_mu * min_mu * BigRational::from_integer(n.into())
            <= BigRational::from_integer(16.into())
}

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub hits: u64,
    pub trials: u64,
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
}

impl McEstimate {
    pub fn new(hits: u64, trials: u64) -> Self {
        let (lo, hi) = wilson_interval(hits, trials, Z_SIGMAS);
        McEstimate {
            hits,
            trials,
            p: hits as f64 / trials as f64,
            lo,
            hi,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyonsRow {
    pub n: usize,
    pub exact: Option<BigRational>,
    pub estimate: Option<McEstimate>,
    pub bound: Option<Surd>,
    /// bound minus probability (point estimate in Monte Carlo mode)
    pub slack: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LyonsTable {
    pub subgroup: String,
    pub rep: Element,
    pub evidence: IndexEvidence,
    pub min_mu: BigRational,
    pub exact: bool,
    pub rows: Vec<LyonsRow>,
}

impl LyonsTable {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Compares `P[Z_n in Hg]` with `4/(min mu sqrt n)` for each `n`.
///
/// Probabilities are exact when the coset chain fits its budget; otherwise
/// `fallback = (trials, seed)` selects Monte Carlo, where a row fails only
/// if the lower 3 sigma limit exceeds the bound.
pub fn lyons_check(
    group: &MarkedGroup,
    mu: &WalkMeasure,
    h: &SubgroupOracle,
    g: &Element,
    n_list: &[usize],
    fallback: Option<(u64, u64)>,
) -> Result<LyonsTable> {
    let mut h = h.clone();
    let evidence = match h.evidence() {
        Some(e) => e.clone(),
        None => h.certify(group).clone(),
    };
    if !evidence.claims_infinite() {
        return Err(Error::infeasible(format!(
            "{} has {evidence}; the bound needs infinite index",
            h.name()
        )));
    }
    group.check_element(g)?;
    let min_mu = {
        let m = mu.min_mu();
        BigRational::new((*m.numer()).into(), (*m.denom()).into())
    };
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let mut sorted: Vec<usize> = n_list.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let chain = CosetChain::build(group, mu, &h, n_max, ChainMode::Auto, DEFAULT_CHAIN_BUDGET);
    let rows = match chain {
        Ok(chain) => {
            let state = chain.state_of(g)?;
            let mut f = chain.initial();
            let mut rows = Vec::new();
            for &n in &sorted {
                while f.step < n {
                    f = chain.advance(&f);
                }
                let p = state
                    .map(|s| f.coset_mass(s))
                    .unwrap_or_else(BigRational::zero);
                let bound = lyons_bound(&min_mu, n as u64);
                let slack = bound
                    .as_ref()
                    .map_or(f64::INFINITY, |b| b.to_f64() - p.to_f64().unwrap_or(0.0));
                rows.push(LyonsRow {
                    n,
                    holds: lyons_holds(&p, &min_mu, n as u64),
                    exact: Some(p),
                    estimate: None,
                    bound,
                    slack,
                });
            }
            rows
        }
        Err(Error::Budget { .. }) if fallback.is_some() => {
            let (trials, seed) = fallback.expect("checked");
            let mut cfg = WalkConfig::new(n_max, trials, seed);
            cfg.extra_checkpoints = sorted.clone();
            cfg.tracked.push(Coset::new(Arc::new(h.clone()), g.clone()));
            let stats = simulate_walk(group, mu, &cfg)?;
            sorted
                .iter()
                .map(|&n| {
                    let cp = stats.at(n).expect("checkpoint requested");
                    let est = McEstimate::new(cp.hits[0], trials);
                    let bound = lyons_bound(&min_mu, n as u64);
                    let (slack, holds) = match &bound {
                        Some(b) => (b.to_f64() - est.p, est.lo <= b.to_f64()),
                        None => (f64::INFINITY, true),
                    };
                    LyonsRow {
                        n,
                        exact: None,
                        estimate: Some(est),
                        bound,
                        slack,
                        holds,
                    }
                })
                .collect()
        }
        Err(e) => return Err(e),
    };
    Ok(LyonsTable {
        subgroup: h.name().to_string(),
        rep: g.clone(),
        exact: rows.iter().all(|r| r.exact.is_some()),
        evidence,
        min_mu,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedRow {
    pub n: usize,
    pub mean: BigRational,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeedTable {
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<SpeedRow>,
    /// running maximum of the means, used for `L*`
    pub smoothed: MonotoneTable<BigRational>,
}

/// `L̂_S(n)` for every `n <= n_max`.
pub fn speed_table(
    group: &MarkedGroup,
    mu: &WalkMeasure,
    n_max: usize,
    trials: u64,
    seed: u64,
) -> Result<SpeedTable> {
    let mut cfg = WalkConfig::new(n_max, trials, seed);
    cfg.dense = true;
    let stats = simulate_walk(group, mu, &cfg)?;
    let rows: Vec<SpeedRow> = (0..=n_max)
        .map(|n| SpeedRow {
            n,
            mean: stats.speed(n).expect("dense"),
            std_error: stats.std_error(n).expect("dense"),
        })
        .collect();
    let smoothed = MonotoneTable::running_max(0, rows.iter().map(|r| r.mean.clone()).collect());
    Ok(SpeedTable {
        trials,
        seed,
        rows,
        smoothed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CautiousRow {
    pub n: usize,
    pub radius: u64,
    pub estimate: McEstimate,
    pub running_min: f64,
}

/// Empirical `P[Z_n in B_{eps sqrt n}]` over a finite window of `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CautiousProbe {
    pub epsilon: BigRational,
    pub rows: Vec<CautiousRow>,
}

impl CautiousProbe {
    pub fn minimum(&self) -> Option<f64> {
        self.rows.last().map(|r| r.running_min)
    }
}

pub fn cautiousness_probe(
    group: &MarkedGroup,
    mu: &WalkMeasure,
    epsilon: &BigRational,
    n_list: &[usize],
    trials: u64,
    seed: u64,
) -> Result<CautiousProbe> {
    if *epsilon <= BigRational::zero() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let n_max = ns.last().copied().unwrap_or(0);
    let mut cfg = WalkConfig::new(n_max, trials, seed);
    cfg.extra_checkpoints = ns.clone();
    let stats = simulate_walk(group, mu, &cfg)?;
    let mut running = f64::INFINITY;
    let rows = ns
        .iter()
        .map(|&n| {
            let radius =
                floor_sqrt(&(epsilon * epsilon * BigRational::from_integer(BigInt::from(n))));
            let cp = stats.at(n).expect("checkpoint requested");
            let estimate = McEstimate::new(cp.within(radius), trials);
            running = running.min(estimate.p);
            CautiousRow {
                n,
                radius,
                estimate,
                running_min: running,
            }
        })
        .collect();
    Ok(CautiousProbe {
        epsilon: epsilon.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;

    #[test]
    fn exact_lyons_on_z() {
        let g = MarkedGroup::from_registry("Z").unwrap();
        let mu = WalkMeasure::uniform(&g).unwrap();
        let h = SubgroupOracle::parse(g.family(), "trivial").unwrap();
        let t = lyons_check(&g, &mu, &h, &g.identity(), &[3, 4, 16], None).unwrap();
        assert!(t.exact && t.holds());
        assert_eq!(t.rows[0].exact, Some(BigRational::zero()));
        assert_eq!(t.rows[1].exact, Some(ratio(6, 16)));
        assert_eq!(t.rows[1].bound.as_ref().unwrap().to_f64(), 4.0);
    }

    #[test]
    fn finite_index_is_rejected() {
        let g = MarkedGroup::from_registry("Z").unwrap();
        let mu = WalkMeasure::uniform(&g).unwrap();
        let h = SubgroupOracle::parse(g.family(), "lattice:[[2]]").unwrap();
        assert!(matches!(
            lyons_check(&g, &mu, &h, &g.identity(), &[4], None),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn single_step_probe_is_exact_mass() {
        let g = MarkedGroup::from_registry("Z^2").unwrap();
        let mu = WalkMeasure::uniform(&g).unwrap();
        let p = cautiousness_probe(&g, &mu, &ratio(1, 1), &[1], 1000, 3).unwrap();
        assert_eq!(p.rows[0].estimate.p, 1.0);
        assert_eq!(p.minimum(), Some(1.0));
    }

    #[test]
    fn speed_table_starts_at_zero() {
        let g = MarkedGroup::from_registry("Z").unwrap();
        let mu = WalkMeasure::uniform(&g).unwrap();
        let t = speed_table(&g, &mu, 10, 2000, 1).unwrap();
        assert_eq!(t.rows[0].mean, BigRational::zero());
        assert_eq!(t.rows[1].mean, ratio(1, 1));
        assert_eq!(t.smoothed.end(), Some(10));
    }
}
