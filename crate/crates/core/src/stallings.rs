//! Stallings folding of finitely generated subgroups of free groups.
//!
//! The folded graph is a deterministic labelled graph with a base vertex;
//! a reduced word lies in the subgroup iff reading it from the base
//! returns to the base. Reading a word as far as possible from the base
//! also gives a canonical name for its right coset: the Schreier graph of
//! the subgroup is the folded graph with regular trees hanging off every
//! missing edge slot.

use crate::group::{reduce_word, Letter};

pub const BASE: usize = 0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldedGraph {
    rank: usize,
    /// `edges[v][slot]`: target of the edge leaving `v` with label `slot`.
    edges: Vec<Vec<Option<usize>>>,
}

#[inline]
pub(crate) fn slot_of(letter: Letter) -> usize {
    let i = (letter.unsigned_abs() - 1) as usize;
    2 * i + usize::from(letter < 0)
}

#[inline]
pub(crate) fn letter_of(slot: usize) -> Letter {
    let g = (slot / 2 + 1) as Letter;
    if slot % 2 == 1 {
        -g
    } else {
        g
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
}

impl FoldedGraph {
    /// Folds the bouquet of loops spelled by `generators` at the base.
    pub fn new(rank: usize, generators: &[Vec<Letter>]) -> Self {
        // raw edge list (u, letter, v); inverse edges are implicit
        let mut n = 1usize;
        let mut raw: Vec<(usize, Letter, usize)> = Vec::new();
        for g in generators {
            let w = reduce_word(g.iter().copied());
            if w.is_empty() {
                continue;
            }
            let mut cur = BASE;
            for (i, &l) in w.iter().enumerate() {
                let next = if i + 1 == w.len() {
                    BASE
                } else {
                    n += 1;
                    n - 1
                };
                raw.push((cur, l, next));
                cur = next;
            }
        }
        let mut uf = UnionFind((0..n).collect());
        // fold until every (vertex, slot) has at most one target
        loop {
            let mut table: Vec<Vec<Option<usize>>> = vec![vec![None; 2 * rank]; n];
            let mut merge = None;
            'scan: for &(u, l, v) in &raw {
                let (u, v) = (uf.find(u), uf.find(v));
                for (a, lab, b) in [(u, l, v), (v, -l, u)] {
                    match table[a][slot_of(lab)] {
                        None => table[a][slot_of(lab)] = Some(b),
                        Some(t) if t != b => {
                            merge = Some((t, b));
                            break 'scan;
                        }
                        _ => {}
                    }
                }
            }
            match merge {
                Some((a, b)) => {
                    let (ra, rb) = (uf.find(a), uf.find(b));
                    // the smaller id survives, so the base stays a root
                    uf.0[ra.max(rb)] = ra.min(rb);
                }
                None => break,
            }
        }
        // compact vertex ids, base first
        let mut id = vec![usize::MAX; n];
        let mut next = 0;
        for v in 0..n {
            let r = uf.find(v);
            if id[r] == usize::MAX {
                id[r] = next;
                next += 1;
            }
        }
        debug_assert_eq!(id[uf.find(BASE)], BASE);
        let mut edges = vec![vec![None; 2 * rank]; next];
        for &(u, l, v) in &raw {
            let (u, v) = (id[uf.find(u)], id[uf.find(v)]);
            edges[u][slot_of(l)] = Some(v);
            edges[v][slot_of(-l)] = Some(u);
        }
        FoldedGraph { rank, edges }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertex_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, v: usize, letter: Letter) -> Option<usize> {
        self.edges[v][slot_of(letter)]
    }

    pub fn slots(&self, v: usize) -> &[Option<usize>] {
        &self.edges[v]
    }

    /// Reads as much of the reduced word `w` from the base as the graph
    /// allows; returns the vertex reached and the unread suffix.
    pub fn read(&self, w: &[Letter]) -> (usize, Vec<Letter>) {
        let mut v = BASE;
        for (i, &l) in w.iter().enumerate() {
            match self.edge(v, l) {
                Some(t) => v = t,
                None => return (v, w[i..].to_vec()),
            }
        }
        (v, Vec::new())
    }

    pub fn accepts(&self, w: &[Letter]) -> bool {
        matches!(self.read(w), (BASE, ref rest) if rest.is_empty())
    }

    /// Every vertex has all `2k` edges, i.e. the subgroup has finite index
    /// equal to the vertex count.
    pub fn is_complete(&self) -> bool {
        self.edges.iter().all(|s| s.iter().all(Option::is_some))
    }
}
