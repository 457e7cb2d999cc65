use rustc_hash::FxHashMap;

use super::{Element, Family, MarkedGroup};
use crate::error::{Error, Result};

/// Default cap on the number of ball elements held in memory.
pub const DEFAULT_BALL_BUDGET: usize = 5_000_000;

/// The ball `B_r(G, S)`, sphere by sphere.
///
/// Elements of sphere `k` occupy `elements[sphere_offsets[k]..sphere_offsets[k + 1]]`
/// (the last sphere runs to the end) and are sorted by canonical form.
#[derive(Clone, Debug)]
pub struct Ball {
    radius: usize,
    elements: Vec<Element>,
    sphere_offsets: Vec<usize>,
    index: FxHashMap<Element, usize>,
}

impl Ball {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn sphere_offsets(&self) -> &[usize] {
        &self.sphere_offsets
    }

    pub fn sphere(&self, k: usize) -> &[Element] {
        if k > self.radius {
            return &[];
        }
        let end = self
            .sphere_offsets
            .get(k + 1)
            .copied()
            .unwrap_or(self.elements.len());
        &self.elements[self.sphere_offsets[k]..end]
    }

    /// `|B_k|` for `k <= radius`.
    pub fn size_up_to(&self, k: usize) -> usize {
        if k >= self.radius {
            self.elements.len()
        } else {
            self.sphere_offsets[k + 1]
        }
    }

    pub fn index_of(&self, g: &Element) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &Element) -> bool {
        self.index.contains_key(g)
    }

    /// Word length of the element stored at index `i`.
    pub fn length_at(&self, i: usize) -> usize {
        self.sphere_offsets.partition_point(|&o| o <= i) - 1
    }

    pub fn length_of(&self, g: &Element) -> Option<usize> {
        self.index_of(g).map(|i| self.length_at(i))
    }

    /// The sub-ball of radius `k <= radius`, sharing element order.
    pub fn truncate(&self, k: usize) -> Ball {
        let k = k.min(self.radius);
        let n = self.size_up_to(k);
        let elements = self.elements[..n].to_vec();
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i))
            .collect();
        Ball {
            radius: k,
            elements,
            sphere_offsets: self.sphere_offsets[..=k].to_vec(),
            index,
        }
    }
}

pub fn ball(group: &MarkedGroup, r: usize) -> Result<Ball> {
    ball_with_budget(group, r, DEFAULT_BALL_BUDGET)
}

/// Breadth-first enumeration of `B_r`; fails with [`Error::Budget`] naming
/// the sphere at which the element count passed `budget`.
pub fn ball_with_budget(group: &MarkedGroup, r: usize, budget: usize) -> Result<Ball> {
    let family = group.family();
    let e = group.identity();
    let mut index = FxHashMap::default();
    index.insert(e.clone(), 0usize);
    let mut elements = vec![e];
    let mut sphere_offsets = vec![0usize];
    let mut prev = 0..1;
    for k in 1..=r {
        let mut fresh: Vec<Element> = Vec::new();
        for i in prev.clone() {
            for s in group.generators() {
                let g = family.multiply(&elements[i], s);
                if !index.contains_key(&g) {
                    fresh.push(g);
                }
            }
        }
        fresh.sort_unstable();
        fresh.dedup();
        if elements.len() + fresh.len() > budget {
            return Err(Error::Budget {
                what: "ball elements",
                reached: elements.len() + fresh.len(),
                limit: budget,
                depth: k,
            });
        }
        let start = elements.len();
        sphere_offsets.push(start);
        for g in fresh {
            index.insert(g.clone(), elements.len());
            elements.push(g);
        }
        prev = start..elements.len();
    }
    Ok(Ball {
        radius: r,
        elements,
        sphere_offsets,
        index,
    })
}

/// `|B_0|, ..., |B_{r_max}|`.
pub fn growth_function(group: &MarkedGroup, r_max: usize) -> Result<Vec<usize>> {
    let b = ball(group, r_max)?;
    Ok((0..=r_max).map(|k| b.size_up_to(k)).collect())
}

pub fn word_length(group: &MarkedGroup, g: &Element) -> Result<usize> {
    word_length_with_budget(group, g, DEFAULT_BALL_BUDGET)
}

/// `|g|_S`. Closed forms are used for standard markings of `Z^d`, free and
/// lamplighter groups; otherwise a BFS runs until `g` is discovered.
pub fn word_length_with_budget(group: &MarkedGroup, g: &Element, budget: usize) -> Result<usize> {
    group.check_element(g)?;
    if let Some(len) = closed_form_length(group, g) {
        return Ok(len as usize);
    }
    let family = group.family();
    let mut seen = rustc_hash::FxHashSet::default();
    let e = group.identity();
    if *g == e {
        return Ok(0);
    }
    seen.insert(e.clone());
    let mut frontier = vec![e];
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for h in &frontier {
            for s in group.generators() {
                let x = family.multiply(h, s);
                if x == *g {
                    return Ok(depth);
                }
                if seen.insert(x.clone()) {
                    next.push(x);
                }
            }
        }
        if seen.len() > budget {
            return Err(Error::Budget {
                what: "word-length search",
                reached: seen.len(),
                limit: budget,
                depth,
            });
        }
        frontier = next;
    }
    Err(Error::infeasible(format!(
        "{g} unreachable from the generators"
    )))
}

fn closed_form_length(group: &MarkedGroup, g: &Element) -> Option<u64> {
    if !group.is_standard() {
        return None;
    }
    match (group.family(), g) {
        (Family::FreeAbelian { .. }, Element::Vector(v)) => {
            Some(v.iter().map(|x| x.unsigned_abs()).sum())
        }
        (Family::Free { .. }, Element::Word(w)) => Some(w.len() as u64),
        (Family::Lamplighter { base }, Element::Lamp(l)) => {
            let lamp_cost: u64 = l.lamps.iter().map(|&(_, v)| v.min(base - v) as u64).sum();
            let x = l.cursor;
            let travel = match (l.lamps.first(), l.lamps.last()) {
                (Some(&(lo, _)), Some(&(hi, _))) => {
                    let left_first = lo.abs_diff(0) + hi.abs_diff(lo) + x.abs_diff(hi);
                    let right_first = hi.abs_diff(0) + hi.abs_diff(lo) + x.abs_diff(lo);
                    left_first.min(right_first)
                }
                _ => x.unsigned_abs(),
            };
            Some(lamp_cost + travel)
        }
        _ => None,
    }
}

/// Word-length evaluator used by walk statistics: a closed form where one
/// exists, otherwise a precomputed distance table over a ball.
#[derive(Clone, Debug)]
pub enum WordMetric {
    Closed(MarkedGroup),
    Table {
        radius: usize,
        lengths: FxHashMap<Element, u32>,
    },
}

impl WordMetric {
    /// A metric able to measure every element of `B_radius`.
    pub fn new(group: &MarkedGroup, radius: usize, budget: usize) -> Result<Self> {
        if closed_form_length(group, &group.identity()).is_some() {
            return Ok(WordMetric::Closed(group.clone()));
        }
        let b = ball_with_budget(group, radius, budget)?;
        let lengths = b
            .elements()
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), b.length_at(i) as u32))
            .collect();
        Ok(WordMetric::Table { radius, lengths })
    }

    pub fn distance(&self, g: &Element) -> Option<u64> {
        match self {
            WordMetric::Closed(group) => closed_form_length(group, g),
            WordMetric::Table { lengths, .. } => lengths.get(g).map(|&l| l as u64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupSpec, MarkedGroup};

    fn z(d: usize) -> MarkedGroup {
        MarkedGroup::standard(Family::FreeAbelian { rank: d }).unwrap()
    }

    #[test]
    fn small_balls() {
        assert_eq!(ball(&z(1), 3).unwrap().len(), 7);
        assert_eq!(ball(&z(2), 2).unwrap().len(), 13);
        let f2 = MarkedGroup::standard(Family::Free { rank: 2 }).unwrap();
        assert_eq!(ball(&f2, 2).unwrap().len(), 17);
        assert_eq!(ball(&f2, 0).unwrap().elements(), &[f2.identity()]);
    }

    #[test]
    fn growth_of_z() {
        assert_eq!(growth_function(&z(1), 4).unwrap(), vec![1, 3, 5, 7, 9]);
    }

    #[test]
    fn budget_reports_sphere() {
        let f2 = MarkedGroup::standard(Family::Free { rank: 2 }).unwrap();
        match ball_with_budget(&f2, 10, 100) {
            Err(Error::Budget { depth, .. }) => assert_eq!(depth, 4),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn word_lengths() {
        let f2 = MarkedGroup::standard(Family::Free { rank: 2 }).unwrap();
        let g = f2.family().parse_element("aba^-1").unwrap();
        assert_eq!(word_length(&f2, &g).unwrap(), 3);
        assert_eq!(word_length(&z(1), &Element::Vector(vec![5])).unwrap(), 5);
        assert_eq!(
            word_length(&z(2), &Element::Vector(vec![2, -1])).unwrap(),
            3
        );
        // BFS path on a custom marking
        let custom = crate::group::make_group(&GroupSpec::custom(
            Family::FreeAbelian { rank: 1 },
            vec![
                Element::Vector(vec![1]),
                Element::Vector(vec![-1]),
                Element::Vector(vec![2]),
                Element::Vector(vec![-2]),
            ],
        ))
        .unwrap();
        assert_eq!(word_length(&custom, &Element::Vector(vec![5])).unwrap(), 3);
    }

    #[test]
    fn sphere_lengths_agree_with_index() {
        let b = ball(&z(2), 3).unwrap();
        for k in 0..=3 {
            for g in b.sphere(k) {
                assert_eq!(b.length_of(g), Some(k));
            }
        }
        assert_eq!(b.truncate(1).len(), 5);
    }
}
