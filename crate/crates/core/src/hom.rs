//! Group homomorphisms between marked groups.
//!
//! A [`GroupHom`] is determined by the images of the source family's basic
//! generators and evaluates elements through their normal form. An
//! [`AbelianHom`] is a linear map from the abelianization coordinates of a
//! family into `Z^m (+) Z/n_1 (+) ...`; kernel oracles are built from it.

use std::fmt;

use crate::error::{Error, Result};
use crate::group::{Element, Family, MarkedGroup};

/// Number of conjugates `t^i a t^-i` checked for commuting with `a` when
/// validating a homomorphism out of a lamplighter group.
const LAMP_RELATION_SPAN: i64 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    source: Family,
    target: Family,
    images: Vec<Element>,
}

impl GroupHom {
    pub fn new(source: Family, target: Family, images: Vec<Element>) -> Result<Self> {
        let basic = source.basic_generators();
        if images.len() != basic.len() {
            return Err(Error::invalid(format!(
                "homomorphism out of {source} needs {} generator images, got {}",
                basic.len(),
                images.len()
            )));
        }
        if let Some(bad) = images.iter().find(|g| !target.contains(g)) {
            return Err(Error::invalid(format!(
                "{bad} is not an element of {target}"
            )));
        }
        let hom = GroupHom {
            source,
            target,
            images,
        };
        hom.check_relations()?;
        Ok(hom)
    }

    pub fn identity(family: Family) -> Self {
        let images = family
            .basic_generators()
            .into_iter()
            .map(|(_, g)| g)
            .collect();
        GroupHom {
            source: family,
            target: family,
            images,
        }
    }

    /// Abelianization `F_k -> Z^k`, `H -> Z^2`, identity on `Z^d`.
    pub fn abelianization(source: Family) -> Result<Self> {
        let rank = match source {
            Family::FreeAbelian { rank } | Family::Free { rank } => rank,
            Family::Heisenberg => 2,
            _ => {
                return Err(Error::unsupported(format!(
                    "abelianization onto Z^d is not provided for {source}"
                )))
            }
        };
        let target = Family::FreeAbelian { rank };
        let images = (0..rank)
            .map(|i| {
                let mut v = vec![0; rank];
                v[i] = 1;
                Element::Vector(v)
            })
            .collect();
        GroupHom::new(source, target, images)
    }

    pub fn source(&self) -> Family {
        self.source
    }

    pub fn target(&self) -> Family {
        self.target
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    fn check_relations(&self) -> Result<()> {
        let t = self.target;
        let commute = |x: &Element, y: &Element| t.multiply(x, y) == t.multiply(y, x);
        let ok = match self.source {
            Family::Free { .. } => true,
            Family::FreeAbelian { .. } => self
                .images
                .iter()
                .enumerate()
                .all(|(i, x)| self.images[i + 1..].iter().all(|y| commute(x, y))),
            Family::Heisenberg => {
                let (x, y) = (&self.images[0], &self.images[1]);
                let z = commutator(t, x, y);
                commute(&z, x) && commute(&z, y)
            }
            Family::Lamplighter { base } => {
                let (tt, a) = (&self.images[0], &self.images[1]);
                let finite_order = t.pow(a, base as i64) == t.identity();
                finite_order
                    && (1..=LAMP_RELATION_SPAN).all(|i| {
                        let conj = t.multiply(&t.multiply(&t.pow(tt, i), a), &t.pow(tt, -i));
                        commute(&conj, a)
                    })
            }
            Family::Sl3z => {
                return Err(Error::unsupported(
                    "homomorphisms out of sl3z are not supported",
                ))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "generator images do not satisfy the defining relations of {}",
                self.source
            )))
        }
    }

    pub fn apply(&self, g: &Element) -> Element {
        let t = self.target;
        let im = &self.images;
        match (self.source, g) {
            (Family::FreeAbelian { .. }, Element::Vector(v)) => {
                let mut acc = t.identity();
                for (x, &k) in im.iter().zip(v) {
                    if k != 0 {
                        t.mul_assign(&mut acc, &t.pow(x, k));
                    }
                }
                acc
            }
            (Family::Free { .. }, Element::Word(w)) => {
                let inverses: Vec<Element> = im.iter().map(|x| t.invert(x)).collect();
                let mut acc = t.identity();
                for &l in w {
                    let i = (l.unsigned_abs() - 1) as usize;
                    t.mul_assign(&mut acc, if l > 0 { &im[i] } else { &inverses[i] });
                }
                acc
            }
            (Family::Heisenberg, Element::Heisenberg([a, b, c])) => {
                let z = commutator(t, &im[0], &im[1]);
                let mut acc = t.pow(&im[0], *a);
                t.mul_assign(&mut acc, &t.pow(&im[1], *b));
                t.mul_assign(&mut acc, &t.pow(&z, *c));
                acc
            }
            (Family::Lamplighter { .. }, Element::Lamp(l)) => {
                let mut acc = t.identity();
                for &(p, v) in &l.lamps {
                    t.mul_assign(&mut acc, &t.pow(&im[0], p));
                    t.mul_assign(&mut acc, &t.pow(&im[1], v as i64));
                    t.mul_assign(&mut acc, &t.pow(&im[0], -p));
                }
                t.mul_assign(&mut acc, &t.pow(&im[0], l.cursor));
                acc
            }
            (f, g) => panic!("element family mismatch: {f:?} applied to {g}"),
        }
    }

    /// The target marked by `phi(S)`, with the identity and repeats removed.
    pub fn image_marking(&self, source: &MarkedGroup) -> Result<MarkedGroup> {
        if source.family() != self.source {
            return Err(Error::invalid(format!(
                "homomorphism source {} does not match {}",
                self.source,
                source.family()
            )));
        }
        let e = self.target.identity();
        let gens: Vec<Element> = source
            .generators()
            .iter()
            .map(|s| self.apply(s))
            .filter(|x| *x != e)
            .collect();
        MarkedGroup::with_generators(self.target, gens)
    }
}

fn commutator(t: Family, x: &Element, y: &Element) -> Element {
    let xy = t.multiply(x, y);
    let xyx = t.multiply(&xy, &t.invert(x));
    t.multiply(&xyx, &t.invert(y))
}

/// `Z^free_rank (+) Z/torsion[0] (+) ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbelianTarget {
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianTarget {
    pub fn integers() -> Self {
        AbelianTarget {
            free_rank: 1,
            torsion: vec![],
        }
    }

    pub fn dim(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }
}

impl fmt::Display for AbelianTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            n => parts.push(format!("Z^{n}")),
        }
        parts.extend(self.torsion.iter().map(|n| format!("Z/{n}")));
        if parts.is_empty() {
            parts.push("0".into());
        }
        f.write_str(&parts.join("+"))
    }
}

/// Linear map from [`Family::abelian_coordinates`] into an abelian target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianHom {
    source: Family,
    target: AbelianTarget,
    /// one row per target coordinate
    matrix: Vec<Vec<i64>>,
}

impl AbelianHom {
    pub fn new(source: Family, target: AbelianTarget, matrix: Vec<Vec<i64>>) -> Result<Self> {
        let cols = source.abelian_coordinates(&source.identity()).len();
        if matrix.len() != target.dim() {
            return Err(Error::invalid(format!(
                "map into {target} needs {} rows, got {}",
                target.dim(),
                matrix.len()
            )));
        }
        if let Some(row) = matrix.iter().find(|r| r.len() != cols) {
            return Err(Error::invalid(format!(
                "{source} has {cols} abelian coordinates but a row has {}",
                row.len()
            )));
        }
        if target.torsion.contains(&0) {
            return Err(Error::invalid("torsion orders must be positive"));
        }
        if let Family::Lamplighter { base } = source {
            // the lamp-sum coordinate is only defined mod `base`
            for (i, row) in matrix.iter().enumerate() {
                let ok = if i < target.free_rank {
                    row[1] == 0
                } else {
                    let n = target.torsion[i - target.free_rank] as i64;
                    (row[1] * base as i64).rem_euclid(n) == 0
                };
                if !ok {
                    return Err(Error::invalid(format!(
                        "lamp column entry {} is not compatible with Z/{base}",
                        row[1]
                    )));
                }
            }
        }
        Ok(AbelianHom {
            source,
            target,
            matrix,
        })
    }

    pub fn source(&self) -> Family {
        self.source
    }

    pub fn target(&self) -> &AbelianTarget {
        &self.target
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn apply(&self, g: &Element) -> Vec<i64> {
        let x = self.source.abelian_coordinates(g);
        self.matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let v: i64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
                if i < self.target.free_rank {
                    v
                } else {
                    v.rem_euclid(self.target.torsion[i - self.target.free_rank] as i64)
                }
            })
            .collect()
    }

    /// Whether the image is infinite, which makes the kernel an
    /// infinite-index subgroup.
    pub fn has_infinite_image(&self) -> bool {
        self.matrix[..self.target.free_rank]
            .iter()
            .any(|row| row.iter().any(|&x| x != 0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abelianization_of_free_group() {
        let f2 = Family::Free { rank: 2 };
        let ab = GroupHom::abelianization(f2).unwrap();
        let g = f2.parse_element("aba^-1b").unwrap();
        assert_eq!(ab.apply(&g), Element::Vector(vec![0, 2]));
    }

    #[test]
    fn heisenberg_to_itself_respects_products() {
        let h = Family::Heisenberg;
        // x -> x y, y -> y is an automorphism
        let hom = GroupHom::new(
            h,
            h,
            vec![
                Element::Heisenberg([1, 1, 0]),
                Element::Heisenberg([0, 1, 0]),
            ],
        )
        .unwrap();
        let g1 = h.parse_element("[2,-1,3]").unwrap();
        let g2 = h.parse_element("[-1,4,0]").unwrap();
        assert_eq!(
            hom.apply(&h.multiply(&g1, &g2)),
            h.multiply(&hom.apply(&g1), &hom.apply(&g2))
        );
    }

    #[test]
    fn bad_relations_rejected() {
        // Z^2 -> F2 sending e1 -> a, e2 -> b does not respect commutation
        let err = GroupHom::new(
            Family::FreeAbelian { rank: 2 },
            Family::Free { rank: 2 },
            vec![Element::Word(vec![1]), Element::Word(vec![2])],
        )
        .unwrap_err();
        assert!(err.to_string().contains("relations"));
    }

    #[test]
    fn lamplighter_cursor_hom() {
        let l = Family::Lamplighter { base: 2 };
        let hom = AbelianHom::new(l, AbelianTarget::integers(), vec![vec![1, 0]]).unwrap();
        assert_eq!(hom.apply(&l.parse_element("tat^2").unwrap()), vec![3]);
        assert!(AbelianHom::new(l, AbelianTarget::integers(), vec![vec![1, 1]]).is_err());
    }
}
