use rustc_hash::{FxHashMap, FxHashSet};

use super::{
    infinite_index_evidence, CosetKey, IndexEvidence, SubgroupOracle, DEFAULT_EVIDENCE_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::group::{Element, MarkedGroup};

pub const DEFAULT_SCHREIER_BUDGET: usize = 2_000_000;

/// How newly discovered cosets are matched against known ones.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Dedup {
    /// Hash the oracle's canonical coset key.
    #[default]
    Canonical,
    /// Test `same_coset` against every known representative.
    Pairwise,
}

#[derive(Clone, Copy, Debug)]
pub struct SchreierOptions {
    pub dedup: Dedup,
    pub budget: usize,
}

impl Default for SchreierOptions {
    fn default() -> Self {
        SchreierOptions {
            dedup: Dedup::Canonical,
            budget: DEFAULT_SCHREIER_BUDGET,
        }
    }
}

/// Radius-`r` ball around `He` in the Schreier graph of `G/H`.
#[derive(Clone, Debug)]
pub struct SchreierBall {
    subgroup: String,
    radius: usize,
    reps: Vec<Element>,
    level_offsets: Vec<usize>,
    /// `adjacency[v][j]`: the vertex `H rep_v s_j`, `None` outside the ball.
    adjacency: Vec<Vec<Option<usize>>>,
    closed: bool,
}

impl SchreierBall {
    pub fn subgroup(&self) -> &str {
        &self.subgroup
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn reps(&self) -> &[Element] {
        &self.reps
    }

    pub fn level_offsets(&self) -> &[usize] {
        &self.level_offsets
    }

    /// Distance of vertex `v` from `He`.
    pub fn depth_of(&self, v: usize) -> usize {
        self.level_offsets.partition_point(|&o| o <= v) - 1
    }

    pub fn size_up_to(&self, k: usize) -> usize {
        self.level_offsets
            .get(k + 1)
            .copied()
            .unwrap_or(self.reps.len())
    }

    pub fn adjacency(&self) -> &[Vec<Option<usize>>] {
        &self.adjacency
    }

    pub fn neighbor(&self, v: usize, generator: usize) -> Option<usize> {
        self.adjacency[v][generator]
    }

    /// No edge leaves the ball: the whole Schreier graph is contained in
    /// it and the index equals [`Self::len`].
    pub fn is_closed(&self) -> bool {
        self.closed
    }
}

struct Registry<'a> {
    h: &'a SubgroupOracle,
    dedup: Dedup,
    keys: FxHashMap<CosetKey, usize>,
    reps: Vec<Element>,
}

impl Registry<'_> {
    fn lookup(&self, g: &Element) -> Result<Option<usize>> {
        match self.dedup {
            Dedup::Canonical => Ok(self.keys.get(&self.h.key_unchecked(g)).copied()),
            Dedup::Pairwise => {
                for (i, rep) in self.reps.iter().enumerate() {
                    if self.h.same_coset(g, rep)? {
                        return Ok(Some(i));
                    }
                }
                Ok(None)
            }
        }
    }

    fn push(&mut self, g: Element) {
        if self.dedup == Dedup::Canonical {
            self.keys.insert(self.h.key_unchecked(&g), self.reps.len());
        }
        self.reps.push(g);
    }
}

pub fn schreier_ball(group: &MarkedGroup, h: &SubgroupOracle, r: usize) -> Result<SchreierBall> {
    schreier_ball_with(group, h, r, SchreierOptions::default())
}

pub fn schreier_ball_with(
    group: &MarkedGroup,
    h: &SubgroupOracle,
    r: usize,
    opts: SchreierOptions,
) -> Result<SchreierBall> {
    check_pairing(group, h)?;
    let family = group.family();
    let mut reg = Registry {
        h,
        dedup: opts.dedup,
        keys: FxHashMap::default(),
        reps: Vec::new(),
    };
    reg.push(group.identity());
    let mut level_offsets = vec![0usize];
    let mut prev = 0..1;
    for k in 1..=r {
        // new cosets of level k, each with its least discovered element
        let mut fresh: Vec<Element> = Vec::new();
        let mut fresh_keys: FxHashMap<CosetKey, usize> = FxHashMap::default();
        for v in prev.clone() {
            for s in group.generators() {
                let g = family.multiply(&reg.reps[v], s);
                if reg.lookup(&g)?.is_some() {
                    continue;
                }
                let slot = match opts.dedup {
                    Dedup::Canonical => fresh_keys.get(&h.key_unchecked(&g)).copied(),
                    Dedup::Pairwise => {
                        let mut found = None;
                        for (i, f) in fresh.iter().enumerate() {
                            if h.same_coset(&g, f)? {
                                found = Some(i);
                                break;
                            }
                        }
                        found
                    }
                };
                match slot {
                    Some(i) => {
                        if g < fresh[i] {
                            fresh[i] = g;
                        }
                    }
                    None => {
                        if opts.dedup == Dedup::Canonical {
                            fresh_keys.insert(h.key_unchecked(&g), fresh.len());
                        }
                        fresh.push(g);
                    }
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        if reg.reps.len() + fresh.len() > opts.budget {
            return Err(Error::Budget {
                what: "Schreier vertices",
                reached: reg.reps.len() + fresh.len(),
                limit: opts.budget,
                depth: k,
            });
        }
        fresh.sort_unstable();
        let start = reg.reps.len();
        level_offsets.push(start);
        for g in fresh {
            reg.push(g);
        }
        prev = start..reg.reps.len();
    }
    let mut adjacency = Vec::with_capacity(reg.reps.len());
    for rep in &reg.reps {
        let mut row = Vec::with_capacity(group.size_of_generating_set());
        for s in group.generators() {
            row.push(reg.lookup(&family.multiply(rep, s))?);
        }
        adjacency.push(row);
    }
    let closed = adjacency.iter().all(|row| row.iter().all(Option::is_some));
    Ok(SchreierBall {
        subgroup: h.name().to_string(),
        radius: r,
        reps: reg.reps,
        level_offsets,
        adjacency,
        closed,
    })
}

fn check_pairing(group: &MarkedGroup, h: &SubgroupOracle) -> Result<()> {
    if group.family() != h.family() {
        return Err(Error::unsupported(format!(
            "subgroup {} of {} used in {}",
            h.name(),
            h.family(),
            group.family()
        )));
    }
    Ok(())
}

/// Unbounded Schreier BFS that stops once it closes or has discovered
/// `max_cosets` cosets.
pub(super) fn bfs_evidence(
    group: &MarkedGroup,
    h: &SubgroupOracle,
    max_cosets: usize,
) -> IndexEvidence {
    if check_pairing(group, h).is_err() {
        return IndexEvidence::Depth {
            depth: 0,
            cosets: 0,
        };
    }
    let family = group.family();
    let mut seen: FxHashSet<CosetKey> = FxHashSet::default();
    seen.insert(h.key_unchecked(&group.identity()));
    let mut frontier = vec![group.identity()];
    let mut depth = 0;
    while !frontier.is_empty() {
        if seen.len() >= max_cosets {
            return IndexEvidence::Depth {
                depth,
                cosets: seen.len(),
            };
        }
        depth += 1;
        let mut next = Vec::new();
        for g in &frontier {
            for s in group.generators() {
                let x = family.multiply(g, s);
                if seen.insert(h.key_unchecked(&x)) {
                    next.push(x);
                }
            }
        }
        frontier = next;
    }
    IndexEvidence::FiniteIndex(seen.len() as u64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DFunctionUpper {
    pub radius: usize,
    /// Smallest roster Schreier ball: an upper bound on the true value.
    pub value: usize,
    pub argmin: usize,
    pub argmin_name: String,
    /// `r + 1`, valid for every infinite-index subgroup.
    pub trivial_lower: usize,
    pub sizes: Vec<usize>,
    pub evidence: Vec<String>,
}

/// Minimum Schreier ball size over a roster of infinite-index subgroups.
///
/// Roster members without stored evidence are certified first; a member
/// whose BFS closes (finite index) is rejected.
pub fn d_function_upper(
    group: &MarkedGroup,
    roster: &[SubgroupOracle],
    r: usize,
) -> Result<DFunctionUpper> {
    if roster.is_empty() {
        return Err(Error::invalid("empty subgroup roster"));
    }
    let mut sizes = Vec::with_capacity(roster.len());
    let mut evidence = Vec::with_capacity(roster.len());
    for h in roster {
        let ev = match h.evidence() {
            Some(ev) => ev.clone(),
            None => infinite_index_evidence(group, h, DEFAULT_EVIDENCE_THRESHOLD),
        };
        if !ev.claims_infinite() {
            return Err(Error::invalid(format!(
                "roster subgroup {} has {}",
                h.name(),
                ev.tag()
            )));
        }
        evidence.push(ev.tag());
        sizes.push(schreier_ball(group, h, r)?.len());
    }
    let (argmin, &value) = sizes
        .iter()
        .enumerate()
        .min_by_key(|&(i, s)| (*s, i))
        .expect("nonempty roster");
    Ok(DFunctionUpper {
        radius: r,
        value,
        argmin,
        argmin_name: roster[argmin].name().to_string(),
        trivial_lower: r + 1,
        sizes,
        evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Family;

    fn oracle(g: &MarkedGroup, d: &str) -> SubgroupOracle {
        SubgroupOracle::parse(g.family(), d).unwrap()
    }

    #[test]
    fn schreier_ball_examples() {
        let f2 = MarkedGroup::from_registry("free:2").unwrap();
        let a = oracle(&f2, "freegens:[a]");
        let b = schreier_ball(&f2, &a, 1).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.neighbor(0, 0), Some(0));
        let z2 = MarkedGroup::from_registry("Z^2").unwrap();
        assert_eq!(
            schreier_ball(&z2, &oracle(&z2, "lattice:[[0,1]]"), 2)
                .unwrap()
                .len(),
            5
        );
        let z = MarkedGroup::from_registry("Z").unwrap();
        assert_eq!(
            schreier_ball(&z, &oracle(&z, "trivial"), 3).unwrap().len(),
            7
        );
    }

    #[test]
    fn pairwise_and_canonical_agree() {
        let f2 = MarkedGroup::from_registry("free:2").unwrap();
        let h = oracle(&f2, "freegens:[a,bab^-1]");
        let opts = SchreierOptions {
            dedup: Dedup::Pairwise,
            ..Default::default()
        };
        let slow = schreier_ball_with(&f2, &h, 4, opts).unwrap();
        let fast = schreier_ball(&f2, &h, 4).unwrap();
        assert_eq!(slow.reps(), fast.reps());
        assert_eq!(slow.adjacency(), fast.adjacency());
    }

    #[test]
    fn closed_ball_for_finite_index() {
        let z = MarkedGroup::from_registry("Z").unwrap();
        let b = schreier_ball(&z, &oracle(&z, "lattice:[[3]]"), 5).unwrap();
        assert!(b.is_closed());
        assert_eq!(b.len(), 3);
    }

    #[test]
    fn d_function_examples() {
        let z2 = MarkedGroup::from_registry("Z^2").unwrap();
        let roster = vec![
            oracle(&z2, "lattice:[[1,0]]"),
            oracle(&z2, "lattice:[[0,1]]"),
        ];
        assert_eq!(d_function_upper(&z2, &roster, 1).unwrap().value, 3);
        let z = MarkedGroup::standard(Family::FreeAbelian { rank: 1 }).unwrap();
        let d = d_function_upper(&z, &[oracle(&z, "trivial")], 4).unwrap();
        assert_eq!((d.value, d.trivial_lower), (9, 5));
        assert!(d_function_upper(&z, &[], 1).is_err());
        assert!(d_function_upper(&z, &[oracle(&z, "lattice:[[2]]")], 1).is_err());
    }
}
