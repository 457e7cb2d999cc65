//! Exact evolution of `f_n(Hg) = P[H Z_n = Hg]`.
//!
//! Masses are kept as integers over `D^n`, `D` the common denominator of
//! the measure, so every value is exact at every step. Two state spaces
//! are used:
//!
//! * explicit: the cosets within `n` steps of `He`, found by BFS along the
//!   support of the measure;
//! * lumped: for a finitely generated subgroup of a free group and a
//!   measure uniform on the standard letters (with optional holding), the
//!   Schreier graph is the folded graph with a `(2k-1)`-ary tree hanging
//!   off every missing edge. All tree cosets at one depth below one missing
//!   edge carry equal mass, so one state stands for `(2k-1)^(j-1)` cosets.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;

use super::WalkMeasure;
use crate::error::{Error, Result};
use crate::group::{Element, Family, MarkedGroup};
use crate::stallings::{letter_of, slot_of};
use crate::subgroup::{CosetKey, OracleKind, SubgroupOracle};

pub const DEFAULT_CHAIN_BUDGET: usize = 400_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ChainMode {
    /// lumped when available, explicit otherwise
    #[default]
    Auto,
    Explicit,
}

#[derive(Clone, Debug)]
enum Locator {
    Explicit(FxHashMap<CosetKey, usize>),
    Lumped {
        /// state of depth 1 below the missing edge `(vertex, slot)`
        base: FxHashMap<(usize, usize), usize>,
    },
}

/// The coset chain of a measure on a Schreier graph, truncated at a radius.
#[derive(Clone, Debug)]
pub struct CosetChain {
    oracle: SubgroupOracle,
    radius: usize,
    denominator: u64,
    start: usize,
    multiplicity: Vec<BigUint>,
    /// outgoing `(target, weight)`, weights summing to `denominator` except
    /// where an edge leaves the radius
    transitions: Vec<Vec<(u32, u64)>>,
    labels: Vec<String>,
    locator: Locator,
}

impl CosetChain {
    pub fn build(
        group: &MarkedGroup,
        mu: &WalkMeasure,
        h: &SubgroupOracle,
        radius: usize,
        mode: ChainMode,
        budget: usize,
    ) -> Result<Self> {
        if h.family() != group.family() {
            return Err(Error::unsupported(format!(
                "subgroup {} is not in {}",
                h.name(),
                group.family()
            )));
        }
        if mode == ChainMode::Auto {
            if let Some(chain) = lumped_free(group, mu, h, radius) {
                return Ok(chain);
            }
        }
        explicit(group, mu, h, radius, budget)
    }

    pub fn is_lumped(&self) -> bool {
        matches!(self.locator, Locator::Lumped { .. })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn states(&self) -> usize {
        self.transitions.len()
    }

    pub fn subgroup(&self) -> &SubgroupOracle {
        &self.oracle
    }

    pub fn label(&self, state: usize) -> &str {
        &self.labels[state]
    }

    pub fn multiplicity(&self, state: usize) -> &BigUint {
        &self.multiplicity[state]
    }

    /// State holding the coset `Hg`, if it lies within the radius.
    pub fn state_of(&self, g: &Element) -> Result<Option<usize>> {
        let key = self.oracle.coset_key(g)?;
        Ok(match &self.locator {
            Locator::Explicit(index) => index.get(&key).copied(),
            Locator::Lumped { base } => match key {
                CosetKey::Stallings { vertex, tail } if tail.is_empty() => Some(vertex),
                CosetKey::Stallings { vertex, tail } => {
                    if tail.len() > self.radius {
                        None
                    } else {
                        base.get(&(vertex, slot_of(tail[0])))
                            .map(|b| b + tail.len() - 1)
                    }
                }
                _ => None,
            },
        })
    }

    pub fn initial(&self) -> CosetDistribution {
        let mut num = vec![BigUint::zero(); self.states()];
        num[self.start] = BigUint::one();
        CosetDistribution {
            step: 0,
            denominator: BigUint::one(),
            numerators: num,
            multiplicity: self.multiplicity.clone(),
        }
    }

    /// One step `f -> Pf`. Valid while `f.step < radius`.
    pub fn advance(&self, f: &CosetDistribution) -> CosetDistribution {
        let mut next = vec![BigUint::zero(); self.states()];
        for (s, x) in f.numerators.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for &(t, w) in &self.transitions[s] {
                next[t as usize] += x * w;
            }
        }
        CosetDistribution {
            step: f.step + 1,
            denominator: &f.denominator * self.denominator,
            numerators: next,
            multiplicity: f.multiplicity.clone(),
        }
    }

    /// `f_0, ..., f_n`.
    pub fn trace(&self, n: usize) -> Result<Vec<CosetDistribution>> {
        if n > self.radius {
            return Err(Error::invalid(format!(
                "chain of radius {} cannot reach step {n}",
                self.radius
            )));
        }
        let mut out = vec![self.initial()];
        for _ in 0..n {
            let f = self.advance(out.last().expect("nonempty"));
            out.push(f);
        }
        Ok(out)
    }
}

/// `f_n` on the states of a [`CosetChain`]: state `i` stands for
/// `multiplicity[i]` cosets, each of mass `numerators[i] / (multiplicity[i]
/// * denominator)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetDistribution {
    pub step: usize,
    pub denominator: BigUint,
    pub numerators: Vec<BigUint>,
    pub multiplicity: Vec<BigUint>,
}

impl CosetDistribution {
    /// Mass of a single coset in state `i`.
    pub fn coset_mass(&self, i: usize) -> BigRational {
        BigRational::new(
            self.numerators[i].clone().into(),
            (&self.denominator * &self.multiplicity[i]).into(),
        )
    }

    pub fn total_mass(&self) -> BigRational {
        let s: BigUint = self.numerators.iter().sum();
        BigRational::new(s.into(), self.denominator.clone().into())
    }

    /// `sum over cosets of f(Hg)^2`.
    pub fn l2_squared(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (x, m) in self.numerators.iter().zip(&self.multiplicity) {
            if !x.is_zero() {
                acc += BigRational::new((x * x).into(), m.clone().into());
            }
        }
        acc / BigRational::from_integer((&self.denominator * &self.denominator).into())
    }

    /// Largest single-coset mass and its state.
    pub fn linf(&self) -> (BigRational, usize) {
        let mut best = (BigRational::zero(), 0);
        for i in 0..self.numerators.len() {
            if self.numerators[i].is_zero() {
                continue;
            }
            let v = self.coset_mass(i);
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    }
}

fn explicit(
    group: &MarkedGroup,
    mu: &WalkMeasure,
    h: &SubgroupOracle,
    radius: usize,
    budget: usize,
) -> Result<CosetChain> {
    let family = group.family();
    let steps: Vec<&Element> = mu.support().iter().map(|(g, _)| g).collect();
    let mut index: FxHashMap<CosetKey, usize> = FxHashMap::default();
    let mut reps = vec![group.identity()];
    let mut depth = vec![0usize];
    index.insert(h.coset_key(&reps[0])?, 0);
    let mut transitions: Vec<Vec<(u32, u64)>> = Vec::new();
    let mut v = 0;
    while v < reps.len() {
        let mut out: Vec<(u32, u64)> = Vec::with_capacity(steps.len());
        for (s, &w) in steps.iter().zip(mu.weights()) {
            let g = family.multiply(&reps[v], s);
            let key = h.coset_key(&g)?;
            let t = match index.get(&key) {
                Some(&t) => Some(t),
                None if depth[v] < radius => {
                    if reps.len() >= budget {
                        return Err(Error::Budget {
                            what: "coset chain states",
                            reached: reps.len() + 1,
                            limit: budget,
                            depth: depth[v] + 1,
                        });
                    }
                    index.insert(key, reps.len());
                    reps.push(g);
                    depth.push(depth[v] + 1);
                    Some(reps.len() - 1)
                }
                None => None,
            };
            if let Some(t) = t {
                match out.iter_mut().find(|(x, _)| *x as usize == t) {
                    Some((_, acc)) => *acc += w,
                    None => out.push((t as u32, w)),
                }
            }
        }
        transitions.push(out);
        v += 1;
    }
    let n = reps.len();
    Ok(CosetChain {
        oracle: h.clone(),
        radius,
        denominator: mu.denominator(),
        start: 0,
        multiplicity: vec![BigUint::one(); n],
        transitions,
        labels: reps.iter().map(|g| g.to_string()).collect(),
        locator: Locator::Explicit(index),
    })
}

fn lumped_free(
    group: &MarkedGroup,
    mu: &WalkMeasure,
    h: &SubgroupOracle,
    radius: usize,
) -> Option<CosetChain> {
    let Family::Free { rank } = group.family() else {
        return None;
    };
    let OracleKind::Free { graph, .. } = h.kind() else {
        return None;
    };
    if !group.is_standard() {
        return None;
    }
    let (p, hold) = mu.generator_uniform(group)?;
    let d = mu.denominator() as i64;
    let w = (p * d).to_integer() as u64;
    let w_hold = (hold * d).to_integer() as u64;
    let branching = 2 * rank as u64 - 1;
    let nv = graph.vertex_count();
    let mut base: FxHashMap<(usize, usize), usize> = FxHashMap::default();
    let mut labels: Vec<String> = (0..nv).map(|v| format!("v{v}")).collect();
    let mut multiplicity = vec![BigUint::one(); nv];
    let mut next = nv;
    if radius > 0 {
        for v in 0..nv {
            for (slot, e) in graph.slots(v).iter().enumerate() {
                if e.is_none() {
                    base.insert((v, slot), next);
                    for j in 1..=radius {
                        labels.push(format!("v{v}/{}/{j}", Element::Word(vec![letter_of(slot)])));
                        multiplicity.push(BigUint::from(branching).pow(j as u32 - 1));
                    }
                    next += radius;
                }
            }
        }
    }
    let mut transitions: Vec<Vec<(u32, u64)>> = vec![Vec::new(); next];
    let push = |from: usize, to: usize, wt: u64, tr: &mut Vec<Vec<(u32, u64)>>| {
        if wt == 0 {
            return;
        }
        match tr[from].iter_mut().find(|(x, _)| *x as usize == to) {
            Some((_, acc)) => *acc += wt,
            None => tr[from].push((to as u32, wt)),
        }
    };
    for v in 0..nv {
        push(v, v, w_hold, &mut transitions);
        for (slot, e) in graph.slots(v).iter().enumerate() {
            match e {
                Some(t) => push(v, *t, w, &mut transitions),
                None => {
                    if let Some(&b) = base.get(&(v, slot)) {
                        push(v, b, w, &mut transitions);
                    }
                }
            }
        }
    }
    for (&(v, _), &b) in &base {
        for j in 1..=radius {
            let s = b + j - 1;
            push(s, s, w_hold, &mut transitions);
            push(s, if j == 1 { v } else { s - 1 }, w, &mut transitions);
            if j < radius {
                push(s, s + 1, branching * w, &mut transitions);
            }
        }
    }
    Some(CosetChain {
        oracle: h.clone(),
        radius,
        denominator: mu.denominator(),
        start: crate::stallings::BASE,
        multiplicity,
        transitions,
        labels,
        locator: Locator::Lumped { base },
    })
}

/// `f_n` for the `mu`-walk on the cosets of `h`.
pub fn exact_coset_distribution(
    group: &MarkedGroup,
    mu: &WalkMeasure,
    h: &SubgroupOracle,
    n: usize,
) -> Result<(CosetChain, CosetDistribution)> {
    let chain = CosetChain::build(group, mu, h, n, ChainMode::Auto, DEFAULT_CHAIN_BUDGET)?;
    let mut f = chain.initial();
    for _ in 0..n {
        f = chain.advance(&f);
    }
    Ok((chain, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;

    fn setup(g: &str, h: &str) -> (MarkedGroup, WalkMeasure, SubgroupOracle) {
        let group = MarkedGroup::from_registry(g).unwrap();
        let mu = WalkMeasure::uniform(&group).unwrap();
        let h = SubgroupOracle::parse(group.family(), h).unwrap();
        (group, mu, h)
    }

    #[test]
    fn binomial_return_probability() {
        let (g, mu, h) = setup("Z", "trivial");
        let (chain, f) = exact_coset_distribution(&g, &mu, &h, 4).unwrap();
        let s = chain.state_of(&g.identity()).unwrap().unwrap();
        assert_eq!(f.coset_mass(s), ratio(6, 16));
        assert_eq!(f.total_mass(), ratio(1, 1));
    }

    #[test]
    fn vertical_line_projects_to_lazy_walk() {
        let (g, mu, h) = setup("Z^2", "lattice:[[0,1]]");
        let (chain, f) = exact_coset_distribution(&g, &mu, &h, 2).unwrap();
        let s = chain
            .state_of(&Element::Vector(vec![1, 0]))
            .unwrap()
            .unwrap();
        assert_eq!(f.coset_mass(s), ratio(1, 4));
    }

    #[test]
    fn lumped_agrees_with_explicit() {
        for (grp, sub) in [
            ("free:2", "freegens:[a]"),
            ("free:2", "freegens:[ab,ba^-1]"),
            ("free:3", "trivial"),
        ] {
            let group = MarkedGroup::from_registry(grp).unwrap();
            let h = SubgroupOracle::parse(group.family(), sub).unwrap();
            for mu in [
                WalkMeasure::uniform(&group).unwrap(),
                WalkMeasure::lazy(&group).unwrap(),
            ] {
                let n = 6;
                let lumped =
                    CosetChain::build(&group, &mu, &h, n, ChainMode::Auto, 1 << 20).unwrap();
                let plain =
                    CosetChain::build(&group, &mu, &h, n, ChainMode::Explicit, 1 << 20).unwrap();
                if sub != "trivial" {
                    assert!(lumped.is_lumped());
                }
                let (a, b) = (lumped.trace(n).unwrap(), plain.trace(n).unwrap());
                let ball = crate::group::ball(&group, 3).unwrap();
                for k in 0..=n {
                    assert_eq!(a[k].l2_squared(), b[k].l2_squared(), "{grp} {sub} step {k}");
                    for x in ball.elements() {
                        let (sa, sb) = (lumped.state_of(x).unwrap(), plain.state_of(x).unwrap());
                        let ma = sa.map(|s| a[k].coset_mass(s)).unwrap_or_default();
                        let mb = sb.map(|s| b[k].coset_mass(s)).unwrap_or_default();
                        assert_eq!(ma, mb, "{grp} {sub} step {k} at {x}");
                    }
                }
            }
        }
    }
}
