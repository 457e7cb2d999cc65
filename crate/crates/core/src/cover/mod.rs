//! Set-cover instances whose universe is a ball and whose candidates are
//! cosets of roster subgroups, with certified upper and lower bounds.
//!
//! Every value here is roster-restricted: covers are genuine upper bounds
//! on the covering number, but exact and fractional optima only bound the
//! best cover using the given subgroups.

mod exchange;
mod lift;
mod lp;
mod solve;

pub use exchange::{export_instance, parse_exchange};
pub use lift::{
    finite_index_sandwich_report, lift_cover, quasi_isometry_constant, LiftedCover, SandwichReport,
    SandwichRow,
};
pub use lp::{fractional_cover, solve_fractional, FractionalCertificate};
pub use solve::{
    exact_cover, greedy_cover, independent_set_lower_bound, solve_exact, solve_greedy, ExactLimits,
    DEFAULT_NODE_BUDGET,
};

use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::group::{Ball, MarkedGroup};
use crate::subgroup::{
    infinite_index_evidence, Coset, CosetKey, Dedup, IndexEvidence, SubgroupOracle,
    DEFAULT_EVIDENCE_THRESHOLD,
};

/// A plain set system over `0..universe`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetSystem {
    pub universe: usize,
    pub sets: Vec<Vec<u32>>,
}

impl SetSystem {
    pub fn new(universe: usize, sets: Vec<Vec<u32>>) -> Result<Self> {
        for s in &sets {
            if let Some(&bad) = s.iter().find(|&&i| i as usize >= universe) {
                return Err(Error::invalid(format!(
                    "set element {bad} outside universe of size {universe}"
                )));
            }
        }
        Ok(SetSystem { universe, sets })
    }

    pub fn bitsets(&self) -> Vec<FixedBitSet> {
        self.sets
            .iter()
            .map(|s| {
                let mut b = FixedBitSet::with_capacity(self.universe);
                for &i in s {
                    b.insert(i as usize);
                }
                b
            })
            .collect()
    }

    /// Elements of the universe no set contains.
    pub fn uncovered(&self) -> Vec<usize> {
        let mut seen = FixedBitSet::with_capacity(self.universe);
        for s in &self.sets {
            for &i in s {
                seen.insert(i as usize);
            }
        }
        seen.toggle_range(..);
        seen.ones().collect()
    }

    pub fn covers(&self, chosen: &[usize]) -> bool {
        let mut seen = FixedBitSet::with_capacity(self.universe);
        for &c in chosen {
            for &i in &self.sets[c] {
                seen.insert(i as usize);
            }
        }
        seen.count_ones(..) == self.universe
    }
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub roster_index: usize,
    pub coset: Coset,
    /// Ball indices lying in the coset, increasing.
    pub members: Vec<u32>,
    pub trace: FixedBitSet,
}

/// Candidates with one common trace on the ball, solved as a single set.
#[derive(Clone, Debug)]
pub struct TraceClass {
    /// Candidate indices, the first one represents the class.
    pub candidates: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct RosterEntry {
    pub oracle: Arc<SubgroupOracle>,
    pub evidence: IndexEvidence,
}

#[derive(Clone, Debug)]
pub struct CoverInstance {
    group: MarkedGroup,
    ball: Ball,
    roster: Vec<RosterEntry>,
    candidates: Vec<Candidate>,
    classes: Vec<TraceClass>,
    system: SetSystem,
}

pub fn build_instance(
    group: &MarkedGroup,
    ball: Ball,
    roster: &[SubgroupOracle],
) -> Result<CoverInstance> {
    build_instance_with(group, ball, roster, Dedup::Canonical)
}

/// Partitions the ball into cosets of every roster subgroup.
///
/// Fails if a roster subgroup turns out to have finite index.
pub fn build_instance_with(
    group: &MarkedGroup,
    ball: Ball,
    roster: &[SubgroupOracle],
    dedup: Dedup,
) -> Result<CoverInstance> {
    if roster.is_empty() {
        return Err(Error::invalid("empty subgroup roster"));
    }
    let mut entries = Vec::with_capacity(roster.len());
    for h in roster {
        if h.family() != group.family() {
            return Err(Error::unsupported(format!(
                "roster subgroup {} lives in {}, not {}",
                h.name(),
                h.family(),
                group.family()
            )));
        }
        let evidence = match h.evidence() {
            Some(ev) => ev.clone(),
            None => infinite_index_evidence(group, h, DEFAULT_EVIDENCE_THRESHOLD),
        };
        if !evidence.claims_infinite() {
            return Err(Error::infeasible(format!(
                "roster subgroup {} has {}; covers must use infinite-index cosets",
                h.name(),
                evidence.tag()
            )));
        }
        entries.push(RosterEntry {
            oracle: Arc::new(h.clone().with_evidence(evidence.clone())),
            evidence,
        });
    }
    let n = ball.len();
    let mut candidates = Vec::new();
    for (ri, entry) in entries.iter().enumerate() {
        let h = &entry.oracle;
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        match dedup {
            Dedup::Canonical => {
                let mut by_key: FxHashMap<CosetKey, usize> = FxHashMap::default();
                for (i, g) in ball.elements().iter().enumerate() {
                    let k = h.coset_key(g)?;
                    let next = blocks.len();
                    let b = *by_key.entry(k).or_insert(next);
                    if b == next {
                        blocks.push(Vec::new());
                    }
                    blocks[b].push(i as u32);
                }
            }
            Dedup::Pairwise => {
                for (i, g) in ball.elements().iter().enumerate() {
                    let mut found = None;
                    for (b, block) in blocks.iter().enumerate() {
                        if h.same_coset(g, &ball.elements()[block[0] as usize])? {
                            found = Some(b);
                            break;
                        }
                    }
                    match found {
                        Some(b) => blocks[b].push(i as u32),
                        None => blocks.push(vec![i as u32]),
                    }
                }
            }
        }
        for members in blocks {
            let mut trace = FixedBitSet::with_capacity(n);
            for &i in &members {
                trace.insert(i as usize);
            }
            // ball order is BFS-canonical, so the first member is the least
            let rep = ball.elements()[members[0] as usize].clone();
            candidates.push(Candidate {
                roster_index: ri,
                coset: Coset::new(Arc::clone(h), rep),
                members,
                trace,
            });
        }
    }
    let mut classes: Vec<TraceClass> = Vec::new();
    let mut by_trace: FxHashMap<&[u32], usize> = FxHashMap::default();
    for (ci, c) in candidates.iter().enumerate() {
        match by_trace.get(c.members.as_slice()) {
            Some(&k) => classes[k].candidates.push(ci),
            None => {
                by_trace.insert(&c.members, classes.len());
                classes.push(TraceClass {
                    candidates: vec![ci],
                });
            }
        }
    }
    let sets = classes
        .iter()
        .map(|cl| candidates[cl.candidates[0]].members.clone())
        .collect();
    let system = SetSystem { universe: n, sets };
    Ok(CoverInstance {
        group: group.clone(),
        ball,
        roster: entries,
        candidates,
        classes,
        system,
    })
}

impl CoverInstance {
    pub fn group(&self) -> &MarkedGroup {
        &self.group
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn roster(&self) -> &[RosterEntry] {
        &self.roster
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn classes(&self) -> &[TraceClass] {
        &self.classes
    }

    /// The merged set system handed to the solvers, one set per trace class.
    pub fn system(&self) -> &SetSystem {
        &self.system
    }

    /// Number of candidates sharing a trace with some other candidate.
    pub fn trace_duplicates(&self) -> usize {
        self.classes
            .iter()
            .filter(|c| c.candidates.len() > 1)
            .map(|c| c.candidates.len())
            .sum()
    }

    pub fn evidence_tags(&self) -> Vec<String> {
        self.roster.iter().map(|e| e.evidence.tag()).collect()
    }

    /// Membership re-check of every `stride`-th ball element against every
    /// candidate trace.
    pub fn verify_traces(&self, stride: usize) -> Result<()> {
        let stride = stride.max(1);
        for (ci, c) in self.candidates.iter().enumerate() {
            for i in (0..self.ball.len()).step_by(stride) {
                let member = c.coset.contains(&self.ball.elements()[i])?;
                if member != c.trace.contains(i) {
                    return Err(Error::invalid(format!(
                        "candidate {ci} ({}) has a wrong trace at {}",
                        c.coset,
                        self.ball.elements()[i]
                    )));
                }
            }
        }
        Ok(())
    }

    fn result_from_classes(
        &self,
        kind: CoverKind,
        classes: Vec<usize>,
        trace: SolverTrace,
    ) -> Result<CoverResult> {
        if !self.system.covers(&classes) {
            return Err(Error::invalid(format!(
                "{kind} result does not cover the ball"
            )));
        }
        let chosen = classes
            .iter()
            .map(|&k| self.classes[k].candidates[0])
            .collect::<Vec<_>>();
        Ok(CoverResult {
            kind,
            value: BigRational::from_integer(BigInt::from(chosen.len())),
            cosets: chosen
                .iter()
                .map(|&c| self.candidates[c].coset.clone())
                .collect(),
            chosen,
            trace,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoverKind {
    GreedyUpper,
    ExactOptimal,
    FractionalLower,
    IndependentSetLower,
}

impl CoverKind {
    pub fn is_upper(&self) -> bool {
        matches!(self, CoverKind::GreedyUpper | CoverKind::ExactOptimal)
    }
}

impl fmt::Display for CoverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoverKind::GreedyUpper => "GreedyUpper",
            CoverKind::ExactOptimal => "ExactOptimal",
            CoverKind::FractionalLower => "FractionalLower",
            CoverKind::IndependentSetLower => "IndependentSetLower",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolverTrace {
    pub nodes: u64,
    pub proven_optimal: bool,
    /// best lower bound known when the solver stopped
    pub lower_bound: u64,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct CoverResult {
    pub kind: CoverKind,
    pub value: BigRational,
    /// Candidate indices of the cover (upper kinds only).
    pub chosen: Vec<usize>,
    pub cosets: Vec<Coset>,
    pub trace: SolverTrace,
}

impl CoverResult {
    /// The value when it is an integer.
    pub fn integer(&self) -> Option<u64> {
        if self.value.is_integer() {
            u64::try_from(self.value.to_integer()).ok()
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::ball;

    fn instance(name: &str, r: usize, roster: &[&str]) -> CoverInstance {
        let g = MarkedGroup::from_registry(name).unwrap();
        let b = ball(&g, r).unwrap();
        let roster: Vec<_> = roster
            .iter()
            .map(|d| SubgroupOracle::parse(g.family(), d).unwrap())
            .collect();
        build_instance(&g, b, &roster).unwrap()
    }

    #[test]
    fn build_examples() {
        assert_eq!(instance("Z", 2, &["trivial"]).candidates().len(), 5);
        let lines = instance("Z^2", 1, &["lattice:[[1,0]]", "lattice:[[0,1]]"]);
        assert_eq!(lines.candidates().len(), 6);
        let mut sizes: Vec<usize> = lines.candidates().iter().map(|c| c.members.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 1, 1, 3, 3]);
        assert_eq!(lines.trace_duplicates(), 0);
        let with_trivial = instance("Z^2", 1, &["lattice:[[1,0]]", "trivial"]);
        // {(0,1)} and {(0,-1)} are traces of a row and of a singleton
        assert_eq!(with_trivial.trace_duplicates(), 4);
        assert_eq!(
            instance("free:2", 1, &["freegens:[a]"]).candidates().len(),
            3
        );
        lines.verify_traces(1).unwrap();
    }

    #[test]
    fn finite_index_roster_rejected() {
        let g = MarkedGroup::from_registry("Z").unwrap();
        let b = ball(&g, 2).unwrap();
        let h = SubgroupOracle::parse(g.family(), "lattice:[[2]]").unwrap();
        assert!(matches!(
            build_instance(&g, b, &[h]),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn pairwise_dedup_matches_canonical() {
        let g = MarkedGroup::from_registry("heisenberg").unwrap();
        let roster = [
            SubgroupOracle::parse(g.family(), "kernel:heisenberg->Z:[1,1]").unwrap(),
            SubgroupOracle::parse(g.family(), "trivial").unwrap(),
        ];
        let a = build_instance(&g, ball(&g, 2).unwrap(), &roster).unwrap();
        let b = build_instance_with(&g, ball(&g, 2).unwrap(), &roster, Dedup::Pairwise).unwrap();
        let ma: Vec<_> = a.candidates().iter().map(|c| c.members.clone()).collect();
        let mb: Vec<_> = b.candidates().iter().map(|c| c.members.clone()).collect();
        assert_eq!(ma, mb);
    }
}
