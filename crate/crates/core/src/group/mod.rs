//! Marked groups: a group family together with a finite symmetric generating
//! set, plus word-metric balls and growth.

mod ball;
mod element;
mod parse;

pub use ball::{
    ball, ball_with_budget, growth_function, word_length, word_length_with_budget, Ball,
    WordMetric, DEFAULT_BALL_BUDGET,
};
pub(crate) use element::{invert_word, push_letter, reduce_word, GENERATOR_LETTERS};
pub use element::{Element, LampConfig, Letter};

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::IntLattice;
use element::{
    elementary, lamp_inverse, lamp_product, matrix_det, matrix_inverse_unimodular, matrix_product,
};

pub const MAX_FREE_ABELIAN_RANK: usize = 6;
pub const MAX_FREE_RANK: usize = 4;
pub const MAX_LAMP_BASE: u8 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    FreeAbelian { rank: usize },
    Heisenberg,
    Free { rank: usize },
    Lamplighter { base: u8 },
    Sl3z,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorChoice {
    Standard,
    Custom(Vec<Element>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    pub family: Family,
    pub generators: GeneratorChoice,
}

impl GroupSpec {
    pub fn standard(family: Family) -> Self {
        GroupSpec {
            family,
            generators: GeneratorChoice::Standard,
        }
    }

    pub fn custom(family: Family, generators: Vec<Element>) -> Self {
        GroupSpec {
            family,
            generators: GeneratorChoice::Custom(generators),
        }
    }
}

impl Family {
    /// Parses a registry name: `Z^d`, `heisenberg`, `free:k`,
    /// `lamplighter:m` or `sl3z`.
    pub fn parse(name: &str) -> Result<Family> {
        parse::parse_family(name)
    }

    pub fn registry_name(&self) -> String {
        match self {
            Family::FreeAbelian { rank } => format!("Z^{rank}"),
            Family::Heisenberg => "heisenberg".into(),
            Family::Free { rank } => format!("free:{rank}"),
            Family::Lamplighter { base } => format!("lamplighter:{base}"),
            Family::Sl3z => "sl3z".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::FreeAbelian { rank } if !(1..=MAX_FREE_ABELIAN_RANK).contains(&rank) => {
                Err(Error::invalid(format!(
                    "Z^d needs 1 <= d <= {MAX_FREE_ABELIAN_RANK}, got {rank}"
                )))
            }
            Family::Free { rank } if !(2..=MAX_FREE_RANK).contains(&rank) => Err(Error::invalid(
                format!("free:k needs 2 <= k <= {MAX_FREE_RANK}, got {rank}"),
            )),
            Family::Lamplighter { base } if !(2..=MAX_LAMP_BASE).contains(&base) => {
                Err(Error::invalid(format!(
                    "lamplighter:m needs 2 <= m <= {MAX_LAMP_BASE}, got {base}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn identity(&self) -> Element {
        match *self {
            Family::FreeAbelian { rank } => Element::Vector(vec![0; rank]),
            Family::Heisenberg => Element::Heisenberg([0; 3]),
            Family::Free { .. } => Element::Word(Vec::new()),
            Family::Lamplighter { .. } => Element::Lamp(LampConfig {
                lamps: Vec::new(),
                cursor: 0,
            }),
            Family::Sl3z => Element::Matrix(elementary(0, 0, 1)),
        }
    }

    /// Whether `g` is a well-formed canonical element of this family.
    pub fn contains(&self, g: &Element) -> bool {
        match (*self, g) {
            (Family::FreeAbelian { rank }, Element::Vector(v)) => v.len() == rank,
            (Family::Heisenberg, Element::Heisenberg(_)) => true,
            (Family::Free { rank }, Element::Word(w)) => {
                w.iter()
                    .all(|&l| l != 0 && (l.unsigned_abs() as usize) <= rank)
                    && w.windows(2).all(|p| p[0] != -p[1])
            }
            (Family::Lamplighter { base }, Element::Lamp(l)) => {
                l.lamps.iter().all(|&(_, v)| v > 0 && v < base)
                    && l.lamps.windows(2).all(|p| p[0].0 < p[1].0)
            }
            (Family::Sl3z, Element::Matrix(m)) => matrix_det(m) == 1,
            _ => false,
        }
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Element {
        let mut out = a.clone();
        self.mul_assign(&mut out, b);
        out
    }

    /// `a <- a * b`.
    pub fn mul_assign(&self, a: &mut Element, b: &Element) {
        match (self, a, b) {
            (Family::FreeAbelian { .. }, Element::Vector(x), Element::Vector(y)) => {
                for (xi, yi) in x.iter_mut().zip(y) {
                    *xi += yi;
                }
            }
            (Family::Heisenberg, Element::Heisenberg(x), Element::Heisenberg(y)) => {
                // (a,b,c)(a',b',c') = (a+a', b+b', c+c' - a'b)
                x[2] += y[2] - y[0] * x[1];
                x[0] += y[0];
                x[1] += y[1];
            }
            (Family::Free { .. }, Element::Word(x), Element::Word(y)) => {
                for &l in y {
                    push_letter(x, l);
                }
            }
            (Family::Lamplighter { base }, Element::Lamp(x), Element::Lamp(y)) => {
                *x = lamp_product(x, y, *base);
            }
            (Family::Sl3z, Element::Matrix(x), Element::Matrix(y)) => {
                *x = matrix_product(x, y);
            }
            (f, a, b) => panic!("element family mismatch: {f:?} applied to {a} and {b}"),
        }
    }

    pub fn invert(&self, a: &Element) -> Element {
        match (self, a) {
            (Family::FreeAbelian { .. }, Element::Vector(x)) => {
                Element::Vector(x.iter().map(|v| -v).collect())
            }
            (Family::Heisenberg, Element::Heisenberg([a, b, c])) => {
                Element::Heisenberg([-a, -b, -c - a * b])
            }
            (Family::Free { .. }, Element::Word(w)) => Element::Word(invert_word(w)),
            (Family::Lamplighter { base }, Element::Lamp(l)) => {
                Element::Lamp(lamp_inverse(l, *base))
            }
            (Family::Sl3z, Element::Matrix(m)) => Element::Matrix(matrix_inverse_unimodular(m)),
            (f, a) => panic!("element family mismatch: {f:?} applied to {a}"),
        }
    }

    pub fn pow(&self, g: &Element, exp: i64) -> Element {
        let mut base = if exp < 0 { self.invert(g) } else { g.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                self.mul_assign(&mut acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.multiply(&base, &base);
            }
        }
        acc
    }

    /// The basic generators from which every element is written in normal
    /// form (`e_i`, free letters, `x, y`, `t, a`, transvections).
    pub fn basic_generators(&self) -> Vec<(String, Element)> {
        match *self {
            Family::FreeAbelian { rank } => (0..rank)
                .map(|i| {
                    let mut v = vec![0; rank];
                    v[i] = 1;
                    (format!("e{}", i + 1), Element::Vector(v))
                })
                .collect(),
            Family::Heisenberg => vec![
                ("x".into(), Element::Heisenberg([1, 0, 0])),
                ("y".into(), Element::Heisenberg([0, 1, 0])),
            ],
            Family::Free { rank } => (1..=rank)
                .map(|i| {
                    (
                        element::GENERATOR_LETTERS[i - 1].to_string(),
                        Element::Word(vec![i as Letter]),
                    )
                })
                .collect(),
            Family::Lamplighter { .. } => vec![
                (
                    "t".into(),
                    Element::Lamp(LampConfig {
                        lamps: vec![],
                        cursor: 1,
                    }),
                ),
                (
                    "a".into(),
                    Element::Lamp(LampConfig {
                        lamps: vec![(0, 1)],
                        cursor: 0,
                    }),
                ),
            ],
            // e12, e23, e31 generate SL(3,Z): their commutators give the
            // remaining elementary matrices.
            Family::Sl3z => vec![
                ("e12".into(), Element::Matrix(elementary(0, 1, 1))),
                ("e23".into(), Element::Matrix(elementary(1, 2, 1))),
                ("e31".into(), Element::Matrix(elementary(2, 0, 1))),
            ],
        }
    }

    /// Coordinates of the abelianization map used by kernel oracles and
    /// generation checks: `Z^d` itself, exponent sums for free groups,
    /// `(a, b)` for Heisenberg and `(cursor, lamp sum)` for lamplighters.
    pub fn abelian_coordinates(&self, g: &Element) -> Vec<i64> {
        match (self, g) {
            (Family::FreeAbelian { .. }, Element::Vector(v)) => v.clone(),
            (Family::Free { rank }, Element::Word(w)) => {
                let mut out = vec![0; *rank];
                for &l in w {
                    out[(l.unsigned_abs() - 1) as usize] += l.signum() as i64;
                }
                out
            }
            (Family::Heisenberg, Element::Heisenberg([a, b, _])) => vec![*a, *b],
            (Family::Lamplighter { .. }, Element::Lamp(l)) => {
                vec![l.cursor, l.lamps.iter().map(|&(_, v)| v as i64).sum()]
            }
            (Family::Sl3z, Element::Matrix(_)) => vec![],
            (f, a) => panic!("element family mismatch: {f:?} applied to {a}"),
        }
    }

    /// Parses an element literal for this family. Accepts tuples for
    /// `Z^d` and Heisenberg (`(1,-2)`, `[a,b,c]`), words over the basic
    /// generator names (`bab^-1`, `xyx^-1`, `t^2a`), lamp literals
    /// `{p:v,...}@x` and matrices `[[..],[..],[..]]`.
    pub fn parse_element(&self, input: &str) -> Result<Element> {
        parse::parse_element(self, input)
    }

    fn standard_generators(&self) -> Vec<(String, Element)> {
        let mut out = Vec::new();
        for (name, g) in self.basic_generators() {
            let inv = self.invert(&g);
            if inv == g {
                out.push((name, g));
            } else {
                out.push((name.clone(), g));
                out.push((format!("{name}^-1"), inv));
            }
        }
        out
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.registry_name())
    }
}

/// A group family with a fixed finite symmetric generating set `S`.
///
/// A custom `S` marks the subgroup it generates inside the family's ambient
/// group; the rank checks in [`make_group`] ensure it has full abelian rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedGroup {
    family: Family,
    generators: Vec<Element>,
    labels: Vec<String>,
    standard: bool,
}

pub fn make_group(spec: &GroupSpec) -> Result<MarkedGroup> {
    spec.family.validate()?;
    match &spec.generators {
        GeneratorChoice::Standard => {
            let (labels, generators) = spec.family.standard_generators().into_iter().unzip();
            Ok(MarkedGroup {
                family: spec.family,
                generators,
                labels,
                standard: true,
            })
        }
        GeneratorChoice::Custom(gens) => MarkedGroup::with_generators(spec.family, gens.clone()),
    }
}

impl MarkedGroup {
    pub fn standard(family: Family) -> Result<Self> {
        make_group(&GroupSpec::standard(family))
    }

    /// Parses `name` from the registry and marks it with its standard set.
    pub fn from_registry(name: &str) -> Result<Self> {
        Self::standard(Family::parse(name)?)
    }

    pub fn with_generators(family: Family, gens: Vec<Element>) -> Result<Self> {
        family.validate()?;
        if gens.is_empty() {
            return Err(Error::invalid("generating set is empty"));
        }
        let mut generators: Vec<Element> = Vec::with_capacity(gens.len());
        for g in gens {
            if !family.contains(&g) {
                return Err(Error::invalid(format!(
                    "{g} is not a canonical element of {family}"
                )));
            }
            if !generators.contains(&g) {
                generators.push(g);
            }
        }
        for g in &generators {
            let inv = family.invert(g);
            if !generators.contains(&inv) {
                return Err(Error::invalid(format!(
                    "generating set is not symmetric: {g} present but {inv} missing"
                )));
            }
        }
        check_generates(family, &generators)?;
        let labels = generators.iter().map(|g| g.to_string()).collect();
        let standard_set: Vec<Element> = family
            .standard_generators()
            .into_iter()
            .map(|(_, g)| g)
            .collect();
        let standard = standard_set == generators;
        Ok(MarkedGroup {
            family,
            generators,
            labels,
            standard,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `|S|`.
    pub fn size_of_generating_set(&self) -> usize {
        self.generators.len()
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    pub fn name(&self) -> String {
        if self.standard {
            self.family.registry_name()
        } else {
            let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
            format!("{}{{{}}}", self.family.registry_name(), gens.join(";"))
        }
    }

    pub fn identity(&self) -> Element {
        self.family.identity()
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Element {
        self.family.multiply(a, b)
    }

    pub fn invert(&self, a: &Element) -> Element {
        self.family.invert(a)
    }

    pub fn check_element(&self, g: &Element) -> Result<()> {
        if self.family.contains(g) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{g} is not a canonical element of {}",
                self.family
            )))
        }
    }
}

fn check_generates(family: Family, gens: &[Element]) -> Result<()> {
    let coords: Vec<Vec<i64>> = gens.iter().map(|g| family.abelian_coordinates(g)).collect();
    match family {
        Family::FreeAbelian { rank } | Family::Free { rank } => {
            let lat = IntLattice::from_generators(rank, &coords)?;
            if lat.rank() < rank {
                return Err(Error::invalid(format!(
                    "generating set does not generate: abelian rank {} < {rank}",
                    lat.rank()
                )));
            }
        }
        Family::Heisenberg => {
            let lat = IntLattice::from_generators(2, &coords)?;
            if lat.rank() < 2 {
                return Err(Error::invalid(
                    "generating set does not generate: abelianized rank < 2",
                ));
            }
        }
        Family::Lamplighter { base } => {
            let cursor = coords.iter().any(|c| c[0] != 0);
            let lamp_gcd = coords.iter().fold(base as i64, |g, c| {
                num_integer::gcd(g, c[1].rem_euclid(base as i64))
            });
            if !cursor || lamp_gcd != 1 {
                return Err(Error::invalid(
                    "generating set does not generate: needs cursor moves and lamp sums generating Z_m",
                ));
            }
        }
        Family::Sl3z => {}
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_markings() {
        let z = MarkedGroup::from_registry("Z^1").unwrap();
        assert_eq!(
            z.generators(),
            &[Element::Vector(vec![1]), Element::Vector(vec![-1])]
        );
        let f2 = MarkedGroup::from_registry("free:2").unwrap();
        assert_eq!(
            f2.generators(),
            &[
                Element::Word(vec![1]),
                Element::Word(vec![-1]),
                Element::Word(vec![2]),
                Element::Word(vec![-2])
            ]
        );
        let l2 = MarkedGroup::from_registry("lamplighter:2").unwrap();
        assert_eq!(l2.size_of_generating_set(), 3);
        let sl = MarkedGroup::from_registry("sl3z").unwrap();
        assert_eq!(sl.size_of_generating_set(), 6);
    }

    #[test]
    fn rank_check_rejects_degenerate_set() {
        let spec = GroupSpec::custom(
            Family::FreeAbelian { rank: 2 },
            vec![Element::Vector(vec![1, 0]), Element::Vector(vec![-1, 0])],
        );
        let err = make_group(&spec).unwrap_err();
        assert!(err.to_string().contains("does not generate"), "{err}");
    }

    #[test]
    fn asymmetric_and_out_of_range_rejected() {
        let spec = GroupSpec::custom(
            Family::FreeAbelian { rank: 1 },
            vec![Element::Vector(vec![1])],
        );
        assert!(make_group(&spec)
            .unwrap_err()
            .to_string()
            .contains("symmetric"));
        assert!(make_group(&GroupSpec::standard(Family::FreeAbelian { rank: 7 })).is_err());
        assert!(make_group(&GroupSpec::standard(Family::Free { rank: 1 })).is_err());
        assert!(make_group(&GroupSpec::standard(Family::Lamplighter { base: 5 })).is_err());
        assert!(MarkedGroup::with_generators(Family::FreeAbelian { rank: 1 }, vec![]).is_err());
    }

    #[test]
    fn heisenberg_relations() {
        let h = Family::Heisenberg;
        let x = Element::Heisenberg([1, 0, 0]);
        let y = Element::Heisenberg([0, 1, 0]);
        let comm = h.multiply(
            &h.multiply(&h.multiply(&x, &y), &h.invert(&x)),
            &h.invert(&y),
        );
        assert_eq!(comm, Element::Heisenberg([0, 0, 1]));
        let z = comm;
        assert_eq!(h.multiply(&z, &x), h.multiply(&x, &z));
        assert_eq!(h.multiply(&z, &y), h.multiply(&y, &z));
    }

    #[test]
    fn pow_matches_repeated_product() {
        let f = Family::Lamplighter { base: 3 };
        let g = f.parse_element("ta").unwrap();
        let mut acc = f.identity();
        for _ in 0..5 {
            acc = f.multiply(&acc, &g);
        }
        assert_eq!(f.pow(&g, 5), acc);
        assert_eq!(f.pow(&g, -5), f.invert(&acc));
    }
}
