use std::cmp::Reverse;
use std::collections::BinaryHeap;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;

use super::{CoverInstance, CoverKind, CoverResult, SetSystem, SolverTrace};
use crate::error::{Error, Result};

pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

#[derive(Clone, Copy, Debug)]
pub struct ExactLimits {
    pub node_budget: u64,
    pub max_universe: usize,
    pub max_sets: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits {
            node_budget: DEFAULT_NODE_BUDGET,
            max_universe: 2_000,
            max_sets: 20_000,
        }
    }
}

fn check_feasible(sys: &SetSystem) -> Result<()> {
    let missing = sys.uncovered();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::infeasible(format!(
            "roster cannot cover {} element(s), first index {}",
            missing.len(),
            missing[0]
        )))
    }
}

/// Greedy set cover: repeatedly take the set covering most uncovered
/// elements, ties going to the lower index.
///
/// Stale gains live in a max-heap; since gains only shrink, a popped set
/// whose refreshed key still beats the heap top is the eager choice.
pub fn solve_greedy(sys: &SetSystem) -> Result<Vec<usize>> {
    check_feasible(sys)?;
    let mut covered = FixedBitSet::with_capacity(sys.universe);
    let mut left = sys.universe;
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = sys
        .sets
        .iter()
        .enumerate()
        .map(|(i, s)| (s.len(), Reverse(i)))
        .collect();
    let mut chosen = Vec::new();
    while left > 0 {
        let (_, Reverse(i)) = heap.pop().expect("feasible system");
        let gain = sys.sets[i]
            .iter()
            .filter(|&&e| !covered.contains(e as usize))
            .count();
        if gain == 0 {
            continue;
        }
        match heap.peek() {
            Some(&top) if (gain, Reverse(i)) < top => heap.push((gain, Reverse(i))),
            _ => {
                for &e in &sys.sets[i] {
                    covered.insert(e as usize);
                }
                left -= gain;
                chosen.push(i);
            }
        }
    }
    Ok(chosen)
}

pub fn greedy_cover(inst: &CoverInstance) -> Result<CoverResult> {
    let chosen = solve_greedy(inst.system())?;
    inst.result_from_classes(
        CoverKind::GreedyUpper,
        chosen,
        SolverTrace {
            note: "greedy".into(),
            ..Default::default()
        },
    )
}

/// Lower bound from elements no two of which share a set.
fn packing_bound(sys: &SetSystem) -> Vec<usize> {
    let mut degree = vec![0usize; sys.universe];
    let mut element_sets: Vec<Vec<usize>> = vec![Vec::new(); sys.universe];
    for (s, set) in sys.sets.iter().enumerate() {
        for &e in set {
            degree[e as usize] += 1;
            element_sets[e as usize].push(s);
        }
    }
    let mut order: Vec<usize> = (0..sys.universe).collect();
    order.sort_by_key(|&e| (degree[e], e));
    let mut used = FixedBitSet::with_capacity(sys.sets.len());
    let mut picked = Vec::new();
    for e in order {
        if element_sets[e].iter().all(|&s| !used.contains(s)) {
            for &s in &element_sets[e] {
                used.insert(s);
            }
            picked.push(e);
        }
    }
    picked
}

/// Elements pairwise not sharing a candidate: any cover needs one set per
/// element.
pub fn independent_set_lower_bound(inst: &CoverInstance) -> CoverResult {
    let picked = packing_bound(inst.system());
    CoverResult {
        kind: CoverKind::IndependentSetLower,
        value: BigRational::from_integer(BigInt::from(picked.len())),
        chosen: Vec::new(),
        cosets: Vec::new(),
        trace: SolverTrace {
            lower_bound: picked.len() as u64,
            note: format!("{} pairwise independent elements", picked.len()),
            ..Default::default()
        },
    }
}

struct Search<'a> {
    sets: &'a [FixedBitSet],
    element_sets: Vec<Vec<usize>>,
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl Search<'_> {
    fn lower_bound(&self, uncovered: &FixedBitSet, excluded: &FixedBitSet) -> Option<usize> {
        let left = uncovered.count_ones(..);
        let max_gain = (0..self.sets.len())
            .filter(|&s| !excluded.contains(s))
            .map(|s| self.sets[s].intersection_count(uncovered))
            .max()
            .unwrap_or(0);
        if max_gain == 0 {
            return None;
        }
        let by_gain = left.div_ceil(max_gain);
        // independent uncovered elements, fewest options first
        let mut els: Vec<(usize, usize)> = uncovered
            .ones()
            .map(|e| {
                let d = self.element_sets[e]
                    .iter()
                    .filter(|&&s| !excluded.contains(s))
                    .count();
                (d, e)
            })
            .collect();
        if els.iter().any(|&(d, _)| d == 0) {
            return None;
        }
        els.sort_unstable();
        let mut used = FixedBitSet::with_capacity(self.sets.len());
        let mut packed = 0;
        for &(_, e) in &els {
            let avail = || {
                self.element_sets[e]
                    .iter()
                    .filter(|&&s| !excluded.contains(s))
            };
            if avail().all(|&s| !used.contains(s)) {
                for &s in avail() {
                    used.insert(s);
                }
                packed += 1;
            }
        }
        Some(by_gain.max(packed))
    }

    fn run(&mut self, uncovered: &FixedBitSet, excluded: &FixedBitSet, chosen: &mut Vec<usize>) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        if uncovered.is_clear() {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        let Some(lb) = self.lower_bound(uncovered, excluded) else {
            return;
        };
        if chosen.len() + lb >= self.best.len() {
            return;
        }
        // branch on the uncovered element with the fewest available sets
        let e = uncovered
            .ones()
            .min_by_key(|&e| {
                let d = self.element_sets[e]
                    .iter()
                    .filter(|&&s| !excluded.contains(s))
                    .count();
                (d, e)
            })
            .expect("nonempty");
        let mut options: Vec<(usize, usize)> = self.element_sets[e]
            .iter()
            .filter(|&&s| !excluded.contains(s))
            .map(|&s| (self.sets[s].intersection_count(uncovered), s))
            .collect();
        options.sort_by_key(|&(g, s)| (Reverse(g), s));
        let mut excl = excluded.clone();
        for &(_, s) in &options {
            let mut rest = uncovered.clone();
            rest.difference_with(&self.sets[s]);
            chosen.push(s);
            self.run(&rest, &excl, chosen);
            chosen.pop();
            if self.aborted {
                return;
            }
            // later branches never use s: covers containing it were explored
            excl.insert(s);
        }
    }
}

/// Branch and bound from the greedy incumbent. Returns the cover, whether
/// optimality was proven, the node count and the root lower bound.
pub fn solve_exact(sys: &SetSystem, limits: ExactLimits) -> Result<(Vec<usize>, bool, u64, usize)> {
    let greedy = solve_greedy(sys)?;
    let root_packing = packing_bound(sys).len();
    if sys.universe > limits.max_universe || sys.sets.len() > limits.max_sets {
        let proven = greedy.len() <= root_packing;
        return Ok((greedy, proven, 0, root_packing));
    }
    if greedy.len() <= root_packing {
        return Ok((greedy, true, 0, root_packing));
    }
    let sets = sys.bitsets();
    let mut element_sets = vec![Vec::new(); sys.universe];
    for (s, set) in sys.sets.iter().enumerate() {
        for &e in set {
            element_sets[e as usize].push(s);
        }
    }
    let mut search = Search {
        sets: &sets,
        element_sets,
        best: greedy,
        nodes: 0,
        budget: limits.node_budget,
        aborted: false,
    };
    let mut all = FixedBitSet::with_capacity(sys.universe);
    all.insert_range(..);
    let none = FixedBitSet::with_capacity(sys.sets.len());
    let root = search
        .lower_bound(&all, &none)
        .unwrap_or(0)
        .max(root_packing);
    search.run(&all, &none, &mut Vec::new());
    let proven = !search.aborted;
    let mut best = search.best;
    best.sort_unstable();
    Ok((best, proven, search.nodes, root))
}

/// Roster-restricted minimum cover. When the node budget or size limits
/// stop the search, the incumbent comes back as [`CoverKind::GreedyUpper`]
/// with `proven_optimal = false`.
pub fn exact_cover(inst: &CoverInstance, limits: ExactLimits) -> Result<CoverResult> {
    let (chosen, proven, nodes, root) = solve_exact(inst.system(), limits)?;
    let (kind, note) = if proven {
        (
            CoverKind::ExactOptimal,
            "branch and bound, optimal".to_string(),
        )
    } else {
        (
            CoverKind::GreedyUpper,
            format!("not proven optimal: stopped after {nodes} nodes"),
        )
    };
    inst.result_from_classes(
        kind,
        chosen,
        SolverTrace {
            nodes,
            proven_optimal: proven,
            lower_bound: root as u64,
            note,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(n: usize, sets: &[&[u32]]) -> SetSystem {
        SetSystem::new(n, sets.iter().map(|s| s.to_vec()).collect()).unwrap()
    }

    #[test]
    fn greedy_takes_largest_then_lowest_index() {
        let s = sys(4, &[&[0, 1], &[2, 3], &[0, 1, 2]]);
        assert_eq!(solve_greedy(&s).unwrap(), vec![2, 1]);
        let tie = sys(2, &[&[0], &[1], &[0]]);
        assert_eq!(solve_greedy(&tie).unwrap(), vec![0, 1]);
    }

    #[test]
    fn infeasible_reports_missing_element() {
        let s = sys(3, &[&[0], &[1]]);
        let err = solve_greedy(&s).unwrap_err();
        assert!(err.to_string().contains("first index 2"), "{err}");
    }

    #[test]
    fn exact_beats_greedy_on_classic_trap() {
        // greedy picks the 4-element middle set, optimum is the two halves
        let s = sys(6, &[&[0, 1, 2], &[3, 4, 5], &[1, 2, 3, 4], &[0], &[5]]);
        assert_eq!(solve_greedy(&s).unwrap().len(), 3);
        let (best, proven, _, _) = solve_exact(&s, ExactLimits::default()).unwrap();
        assert!(proven);
        assert_eq!(best, vec![0, 1]);
    }

    #[test]
    fn node_budget_downgrades() {
        let s = sys(6, &[&[0, 1, 2], &[3, 4, 5], &[1, 2, 3, 4], &[0], &[5]]);
        let limits = ExactLimits {
            node_budget: 1,
            ..Default::default()
        };
        let (best, proven, _, _) = solve_exact(&s, limits).unwrap();
        assert!(!proven);
        assert!(s.covers(&best));
    }
}
