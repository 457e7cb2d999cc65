//! Subgroup membership oracles, right-coset identity and Schreier graphs.
//!
//! Cosets are right cosets `Hg` throughout: `Hg1 = Hg2` iff `g1 g2^-1` lies
//! in `H`. Every oracle also produces a canonical [`CosetKey`] for `Hg`.

mod descriptor;
mod schreier;

pub use schreier::{
    d_function_upper, schreier_ball, schreier_ball_with, DFunctionUpper, Dedup, SchreierBall,
    SchreierOptions, DEFAULT_SCHREIER_BUDGET,
};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{Element, Family, Letter, MarkedGroup};
use crate::hom::{AbelianHom, GroupHom};
use crate::lattice::IntLattice;
use crate::stallings::FoldedGraph;

/// A Schreier BFS that discovers this many cosets without closing is taken
/// as evidence of infinite index.
pub const DEFAULT_EVIDENCE_THRESHOLD: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatrixShape {
    UpperTriangular,
    LowerTriangular,
}

impl MatrixShape {
    fn holds(&self, m: &[[i64; 3]; 3]) -> bool {
        match self {
            MatrixShape::UpperTriangular => m[1][0] == 0 && m[2][0] == 0 && m[2][1] == 0,
            MatrixShape::LowerTriangular => m[0][1] == 0 && m[0][2] == 0 && m[1][2] == 0,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            MatrixShape::UpperTriangular => "upper-triangular",
            MatrixShape::LowerTriangular => "lower-triangular",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Trivial,
    Lattice(IntLattice),
    Free {
        generators: Vec<Vec<Letter>>,
        graph: FoldedGraph,
    },
    Kernel(AbelianHom),
    Shape(MatrixShape),
    /// `phi^-1(K)` for a subgroup `K` of the target of `phi`.
    Pullback {
        hom: GroupHom,
        inner: Box<SubgroupOracle>,
    },
}

/// How strongly infinite index is established.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IndexEvidence {
    /// Decided exactly; the string records the argument.
    Exact(String),
    /// Schreier BFS discovered `cosets` cosets up to `depth` without closing.
    Depth { depth: usize, cosets: usize },
    /// Schreier BFS closed: the index is finite.
    FiniteIndex(u64),
}

impl IndexEvidence {
    pub fn claims_infinite(&self) -> bool {
        !matches!(self, IndexEvidence::FiniteIndex(_))
    }

    pub fn tag(&self) -> String {
        match self {
            IndexEvidence::Exact(_) => "exact".into(),
            IndexEvidence::Depth { depth, .. } => format!("depth-{depth}"),
            IndexEvidence::FiniteIndex(n) => format!("finite-index({n})"),
        }
    }
}

impl fmt::Display for IndexEvidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexEvidence::Exact(why) => write!(f, "exact ({why})"),
            other => f.write_str(&other.tag()),
        }
    }
}

/// Canonical name of a right coset `Hg`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CosetKey {
    Element(Element),
    Residue(Vec<i64>),
    Image(Vec<i64>),
    /// Vertex of the folded graph reached by reading `g`, plus the unread
    /// suffix (a vertex of a hanging tree).
    Stallings {
        vertex: usize,
        tail: Vec<Letter>,
    },
    /// Canonical third and second rows of `g` modulo the triangular group.
    Flag([i64; 6]),
    Pulled(Box<CosetKey>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupOracle {
    name: String,
    family: Family,
    kind: OracleKind,
    evidence: Option<IndexEvidence>,
}

impl SubgroupOracle {
    pub fn trivial(family: Family) -> Self {
        SubgroupOracle {
            name: "trivial".into(),
            family,
            kind: OracleKind::Trivial,
            evidence: None,
        }
    }

    pub fn lattice(family: Family, basis: Vec<Vec<i64>>) -> Result<Self> {
        let Family::FreeAbelian { rank } = family else {
            return Err(Error::unsupported(format!(
                "lattice subgroups need a Z^d family, got {family}"
            )));
        };
        let lat = IntLattice::from_generators(rank, &basis)?;
        let name = format!(
            "lattice:[{}]",
            basis
                .iter()
                .map(|v| format!(
                    "[{}]",
                    v.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                ))
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(SubgroupOracle {
            name,
            family,
            kind: OracleKind::Lattice(lat),
            evidence: None,
        })
    }

    pub fn free_subgroup(family: Family, generators: Vec<Vec<Letter>>) -> Result<Self> {
        let Family::Free { rank } = family else {
            return Err(Error::unsupported(format!(
                "free subgroups need a free family, got {family}"
            )));
        };
        for w in &generators {
            if !family.contains(&Element::Word(crate::group::reduce_word(w.iter().copied()))) {
                return Err(Error::invalid(format!("word {w:?} is not in {family}")));
            }
        }
        let graph = FoldedGraph::new(rank, &generators);
        let name = format!(
            "freegens:[{}]",
            generators
                .iter()
                .map(|w| Element::Word(w.clone()).to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(SubgroupOracle {
            name,
            family,
            kind: OracleKind::Free { generators, graph },
            evidence: None,
        })
    }

    pub fn kernel(hom: AbelianHom) -> Self {
        let rows: Vec<String> = hom
            .matrix()
            .iter()
            .map(|r| {
                format!(
                    "[{}]",
                    r.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
            .collect();
        let name = format!(
            "kernel:{}->{}:{}",
            hom.source(),
            hom.target(),
            if rows.len() == 1 {
                rows[0].clone()
            } else {
                format!("[{}]", rows.join(","))
            }
        );
        SubgroupOracle {
            name,
            family: hom.source(),
            kind: OracleKind::Kernel(hom),
            evidence: None,
        }
    }

    pub fn shape(shape: MatrixShape) -> Self {
        SubgroupOracle {
            name: format!("shape:{}", shape.name()),
            family: Family::Sl3z,
            kind: OracleKind::Shape(shape),
            evidence: None,
        }
    }

    pub fn pullback(hom: GroupHom, inner: SubgroupOracle) -> Result<Self> {
        if hom.target() != inner.family {
            return Err(Error::invalid(format!(
                "cannot pull back a subgroup of {} along a map into {}",
                inner.family,
                hom.target()
            )));
        }
        Ok(SubgroupOracle {
            name: format!("pullback({})", inner.name),
            family: hom.source(),
            kind: OracleKind::Pullback {
                hom,
                inner: Box::new(inner),
            },
            evidence: None,
        })
    }

    /// Parses a descriptor: `trivial`, `lattice:[[1,1]]`,
    /// `freegens:[a,bab^-1]`, `kernel:Z2->Z:[1,-1]`, `shape:upper-triangular`.
    pub fn parse(family: Family, descriptor: &str) -> Result<Self> {
        descriptor::parse_descriptor(family, descriptor)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn kind(&self) -> &OracleKind {
        &self.kind
    }

    pub fn evidence(&self) -> Option<&IndexEvidence> {
        self.evidence.as_ref()
    }

    pub fn with_evidence(mut self, evidence: IndexEvidence) -> Self {
        self.evidence = Some(evidence);
        self
    }

    /// Computes and stores infinite-index evidence relative to `group`.
    pub fn certify(&mut self, group: &MarkedGroup) -> &IndexEvidence {
        let ev = infinite_index_evidence(group, self, DEFAULT_EVIDENCE_THRESHOLD);
        self.evidence.insert(ev)
    }

    fn check_family(&self, g: &Element) -> Result<()> {
        if self.family.contains(g) {
            Ok(())
        } else {
            Err(Error::unsupported(format!(
                "oracle {} on {} cannot test {g}",
                self.name, self.family
            )))
        }
    }

    pub fn is_member(&self, g: &Element) -> Result<bool> {
        self.check_family(g)?;
        Ok(self.member_unchecked(g))
    }

    fn member_unchecked(&self, g: &Element) -> bool {
        match (&self.kind, g) {
            (OracleKind::Trivial, g) => *g == self.family.identity(),
            (OracleKind::Lattice(l), Element::Vector(v)) => l.contains(v),
            (OracleKind::Free { graph, .. }, Element::Word(w)) => graph.accepts(w),
            (OracleKind::Kernel(h), g) => h.apply(g).iter().all(|&x| x == 0),
            (OracleKind::Shape(s), Element::Matrix(m)) => s.holds(m),
            (OracleKind::Pullback { hom, inner }, g) => inner.member_unchecked(&hom.apply(g)),
            _ => false,
        }
    }

    /// `Hg1 = Hg2`, decided as `g1 g2^-1 in H`.
    pub fn same_coset(&self, g1: &Element, g2: &Element) -> Result<bool> {
        self.check_family(g1)?;
        self.check_family(g2)?;
        let f = self.family;
        Ok(self.member_unchecked(&f.multiply(g1, &f.invert(g2))))
    }

    pub fn coset_key(&self, g: &Element) -> Result<CosetKey> {
        self.check_family(g)?;
        Ok(self.key_unchecked(g))
    }

    pub(crate) fn key_unchecked(&self, g: &Element) -> CosetKey {
        match (&self.kind, g) {
            (OracleKind::Trivial, g) => CosetKey::Element(g.clone()),
            (OracleKind::Lattice(l), Element::Vector(v)) => CosetKey::Residue(l.residue(v)),
            (OracleKind::Free { graph, .. }, Element::Word(w)) => {
                let (vertex, tail) = graph.read(w);
                CosetKey::Stallings { vertex, tail }
            }
            (OracleKind::Kernel(h), g) => CosetKey::Image(h.apply(g)),
            (OracleKind::Shape(s), Element::Matrix(m)) => CosetKey::Flag(flag_key(*s, m)),
            (OracleKind::Pullback { hom, inner }, g) => {
                CosetKey::Pulled(Box::new(inner.key_unchecked(&hom.apply(g))))
            }
            (kind, g) => unreachable!("oracle {kind:?} given foreign element {g}"),
        }
    }
}

impl fmt::Display for SubgroupOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A right coset `Hg`, named by a representative.
#[derive(Clone, Debug)]
pub struct Coset {
    pub subgroup: Arc<SubgroupOracle>,
    pub rep: Element,
}

impl Coset {
    pub fn new(subgroup: Arc<SubgroupOracle>, rep: Element) -> Self {
        Coset { subgroup, rep }
    }

    pub fn contains(&self, g: &Element) -> Result<bool> {
        self.subgroup.same_coset(g, &self.rep)
    }

    pub fn key(&self) -> Result<CosetKey> {
        self.subgroup.coset_key(&self.rep)
    }
}

impl PartialEq for Coset {
    fn eq(&self, other: &Self) -> bool {
        *self.subgroup == *other.subgroup
            && self
                .subgroup
                .same_coset(&self.rep, &other.rep)
                .unwrap_or(false)
    }
}

impl fmt::Display for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*{}", self.subgroup.name(), self.rep)
    }
}

/// Canonical data of `Bg` for the triangular subgroup `B` of `SL(3,Z)`.
///
/// Left multiplication by an upper triangular `h` rescales row 3 by `±1`,
/// replaces row 2 by `±row2 + k row3` and row 1 by a combination of all
/// three rows. Rows 2 and 3 normalized under those moves determine the
/// coset, since `det = 1` fixes row 1 modulo their span.
fn flag_key(shape: MatrixShape, m: &[[i64; 3]; 3]) -> [i64; 6] {
    let (r_last, r_mid) = match shape {
        MatrixShape::UpperTriangular => (m[2], m[1]),
        // for lower triangular h the roles of rows 1 and 3 swap
        MatrixShape::LowerTriangular => (m[0], m[1]),
    };
    let last = sign_normalize(r_last);
    let p = last
        .iter()
        .position(|&x| x != 0)
        .expect("row of an invertible matrix");
    let reduce = |row: [i64; 3]| {
        let k = row[p].div_euclid(last[p]);
        [
            row[0] - k * last[0],
            row[1] - k * last[1],
            row[2] - k * last[2],
        ]
    };
    let a = reduce(r_mid);
    let b = reduce([-r_mid[0], -r_mid[1], -r_mid[2]]);
    let mid = a.min(b);
    [last[0], last[1], last[2], mid[0], mid[1], mid[2]]
}

fn sign_normalize(row: [i64; 3]) -> [i64; 3] {
    match row.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => [-row[0], -row[1], -row[2]],
        _ => row,
    }
}

/// Certifies (or refutes) infinite index of `h` in the marked group.
///
/// Exact arguments: trivial subgroups of these infinite groups, lattices of
/// deficient rank, kernels of maps with infinite image. Otherwise a Schreier
/// BFS runs until it closes (finite index, exact count) or passes
/// `max_cosets` discovered cosets (`depth-d` evidence).
pub fn infinite_index_evidence(
    group: &MarkedGroup,
    h: &SubgroupOracle,
    max_cosets: usize,
) -> IndexEvidence {
    match &h.kind {
        OracleKind::Trivial => {
            return IndexEvidence::Exact(format!("trivial subgroup of infinite {}", h.family));
        }
        OracleKind::Lattice(l) if l.rank() < l.dim() => {
            return IndexEvidence::Exact(format!("lattice rank {} < {}", l.rank(), l.dim()));
        }
        OracleKind::Kernel(hom) if hom.has_infinite_image() => {
            return IndexEvidence::Exact(format!(
                "kernel of a map onto infinite image in {}",
                hom.target()
            ));
        }
        _ => {}
    }
    schreier::bfs_evidence(group, h, max_cosets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> Family {
        Family::FreeAbelian { rank: 2 }
    }

    #[test]
    fn membership_examples() {
        let diag = SubgroupOracle::parse(z2(), "lattice:[[1,1]]").unwrap();
        assert!(diag.is_member(&Element::Vector(vec![3, 3])).unwrap());
        let f2 = Family::Free { rank: 2 };
        let a = SubgroupOracle::parse(f2, "freegens:[a]").unwrap();
        assert!(!a.is_member(&f2.parse_element("bab^-1").unwrap()).unwrap());
        let up = SubgroupOracle::parse(Family::Sl3z, "shape:upper-triangular").unwrap();
        assert!(up.is_member(&Family::Sl3z.identity()).unwrap());
    }

    #[test]
    fn same_coset_examples() {
        let vert = SubgroupOracle::parse(z2(), "lattice:[[0,1]]").unwrap();
        let v = |x: i64, y: i64| Element::Vector(vec![x, y]);
        assert!(vert.same_coset(&v(2, 5), &v(2, -1)).unwrap());
        assert!(!vert.same_coset(&v(2, 0), &v(3, 0)).unwrap());
        let f2 = Family::Free { rank: 2 };
        let a = SubgroupOracle::parse(f2, "freegens:[a]").unwrap();
        let b = f2.parse_element("b").unwrap();
        let ab = f2.parse_element("ab").unwrap();
        assert!(a.same_coset(&b, &ab).unwrap());
    }

    #[test]
    fn foreign_elements_are_rejected() {
        let vert = SubgroupOracle::parse(z2(), "lattice:[[0,1]]").unwrap();
        assert!(matches!(
            vert.is_member(&Element::Word(vec![1])),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn evidence_examples() {
        let z2g = MarkedGroup::standard(z2()).unwrap();
        let line = SubgroupOracle::parse(z2(), "lattice:[[2,0]]").unwrap();
        assert_eq!(infinite_index_evidence(&z2g, &line, 10_000).tag(), "exact");
        let z = MarkedGroup::from_registry("Z").unwrap();
        let two = SubgroupOracle::parse(z.family(), "lattice:[[2]]").unwrap();
        assert_eq!(
            infinite_index_evidence(&z, &two, 10_000),
            IndexEvidence::FiniteIndex(2)
        );
        let f2 = MarkedGroup::from_registry("free:2").unwrap();
        let h = SubgroupOracle::parse(f2.family(), "freegens:[a,bab^-1]").unwrap();
        for budget in [100, 1000] {
            let ev = infinite_index_evidence(&f2, &h, budget);
            assert!(matches!(ev, IndexEvidence::Depth { .. }), "{ev}");
        }
    }

    #[test]
    fn flag_key_matches_membership_on_products() {
        let sl = MarkedGroup::from_registry("sl3z").unwrap();
        let ball = crate::group::ball(&sl, 3).unwrap();
        for shape in ["shape:upper-triangular", "shape:lower-triangular"] {
            let h = SubgroupOracle::parse(Family::Sl3z, shape).unwrap();
            let els = ball.elements();
            for (i, g1) in els.iter().enumerate().step_by(7) {
                for g2 in els.iter().skip(i % 5).step_by(11) {
                    assert_eq!(
                        h.same_coset(g1, g2).unwrap(),
                        h.coset_key(g1).unwrap() == h.coset_key(g2).unwrap(),
                        "{shape}: {g1} vs {g2}"
                    );
                }
            }
        }
    }
}
