//! Doubling constants and the linear bounds they give.
//!
//! Under `|B_2r| <= L |B_r|` every coset of an infinite-index subgroup meets
//! `B_r` in at most `(L/r)|B_r|` points, so `r/L` cosets are needed. In the
//! other direction a surjection onto `Z` covers `B_r` by the kernel cosets
//! at levels `|j| <= K r`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::group::{ball, Ball, Element, MarkedGroup};
use crate::hom::{AbelianHom, AbelianTarget};
use crate::subgroup::{schreier_ball, Coset, SubgroupOracle};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoublingRow {
    pub r: usize,
    pub ball: usize,
    pub double: usize,
    pub ratio: BigRational,
    /// running maximum of `ratio` from `r0 + 1` to `r`
    pub l_so_far: BigRational,
}

/// `L = max |B_2r|/|B_r|` over `r0 < r <= r_max`; measured on that finite
/// range only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoublingReport {
    pub r0: usize,
    pub r_max: usize,
    pub rows: Vec<DoublingRow>,
    pub l: BigRational,
}

impl DoublingReport {
    pub fn in_range(&self, r: usize) -> bool {
        r > self.r0 && r <= self.r_max
    }

    /// `r / L` with a flag telling whether `r` is inside the measured range.
    pub fn bound(&self, r: usize) -> (BigRational, bool) {
        (doubling_lower_bound(r as u64, &self.l), self.in_range(r))
    }
}

/// `growth[k] = |B_k|`; needs `k` up to `2 r_max`.
pub fn doubling_constant(growth: &[usize], r0: usize, r_max: usize) -> Result<DoublingReport> {
    if r_max <= r0 {
        return Err(Error::invalid(format!(
            "empty doubling range ({r0}, {r_max}]"
        )));
    }
    if growth.len() <= 2 * r_max {
        return Err(Error::invalid(format!(
            "growth table reaches radius {} but doubling up to {r_max} needs {}",
            growth.len().saturating_sub(1),
            2 * r_max
        )));
    }
    let mut rows = Vec::new();
    let mut l = BigRational::zero();
    for r in r0 + 1..=r_max {
        let ratio = BigRational::new(growth[2 * r].into(), growth[r].into());
        if ratio > l {
            l = ratio.clone();
        }
        rows.push(DoublingRow {
            r,
            ball: growth[r],
            double: growth[2 * r],
            ratio,
            l_so_far: l.clone(),
        });
    }
    Ok(DoublingReport { r0, r_max, rows, l })
}

/// `r / L`.
pub fn doubling_lower_bound(r: u64, l: &BigRational) -> BigRational {
    assert!(
        *l > BigRational::zero(),
        "doubling constant must be positive"
    );
    BigRational::from_integer(r.into()) / l
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionCheck {
    pub r: usize,
    pub count: usize,
    pub ball: usize,
    /// `(L/r) |B_r|`
    pub bound: BigRational,
    pub holds: bool,
}

/// Counts `|B_r ∩ C|` by membership and compares it with `(L/r)|B_r|`.
pub fn coset_fraction_check(b: &Ball, coset: &Coset, l: &BigRational) -> Result<FractionCheck> {
    let r = b.radius();
    if r == 0 {
        return Err(Error::invalid("the fraction bound needs r >= 1"));
    }
    match coset.subgroup.evidence() {
        Some(e) if e.claims_infinite() => {}
        Some(e) => {
            return Err(Error::infeasible(format!(
                "{} has {e}",
                coset.subgroup.name()
            )));
        }
        None => {
            return Err(Error::invalid(format!(
                "{} carries no infinite-index evidence",
                coset.subgroup.name()
            )))
        }
    }
    let mut count = 0;
    for g in b.elements() {
        if coset.contains(g)? {
            count += 1;
        }
    }
    let bound = l * BigRational::new(b.len().into(), r.into());
    Ok(FractionCheck {
        r,
        count,
        ball: b.len(),
        holds: BigRational::from_integer(count.into()) <= bound,
        bound,
    })
}

/// `g_1, ..., g_r` with `H, Hg_1, ..., Hg_r` pairwise distinct and
/// `g_k = s_{i_1} ... s_{i_k}`.
///
/// Walks the Schreier ball outward one level per step, trying the previous
/// generator first and then the generators in order, backtracking out of
/// dead ends.
pub fn schreier_path(group: &MarkedGroup, h: &SubgroupOracle, r: usize) -> Result<Vec<Element>> {
    if r == 0 {
        return Ok(Vec::new());
    }
    let sb = schreier_ball(group, h, r)?;
    if sb.is_closed() && sb.depth_of(sb.len() - 1) < r {
        return Err(Error::infeasible(format!(
            "Schreier graph of {} closes at depth {} < {r}: the index is finite",
            h.name(),
            sb.depth_of(sb.len() - 1)
        )));
    }
    let gens = group.generators();
    // stack of (vertex, generator used to reach it, next choice to try)
    let mut path: Vec<(usize, Option<usize>, usize)> = vec![(0, None, 0)];
    while path.len() <= r {
        let depth = path.len() - 1;
        let (v, last, next) = *path.last().expect("nonempty");
        let order: Vec<usize> = last
            .into_iter()
            .chain((0..gens.len()).filter(|&i| Some(i) != last))
            .collect();
        let found = order.iter().enumerate().skip(next).find_map(|(k, &i)| {
            sb.neighbor(v, i)
                .filter(|&t| sb.depth_of(t) == depth + 1)
                .map(|t| (k, i, t))
        });
        match found {
            Some((k, i, t)) => {
                path.last_mut().expect("nonempty").2 = k + 1;
                path.push((t, Some(i), 0));
            }
            None => {
                path.pop();
                if path.is_empty() {
                    return Err(Error::infeasible(format!(
                        "no outward path of length {r} in the Schreier graph of {}",
                        h.name()
                    )));
                }
            }
        }
    }
    let family = group.family();
    let mut g = group.identity();
    let mut out = Vec::with_capacity(r);
    for &(_, s, _) in &path[1..] {
        family.mul_assign(&mut g, &gens[s.expect("edge")]);
        out.push(g.clone());
    }
    let e = group.identity();
    let all: Vec<&Element> = std::iter::once(&e).chain(out.iter()).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if h.same_coset(all[i], all[j])? {
                return Err(Error::invalid(format!("path cosets {i} and {j} coincide")));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct HomCover {
    pub r: usize,
    /// `K = max |phi(s)|` over the generating set
    pub k: u64,
    /// levels `j` of the cosets `phi^-1(j)`, ascending
    pub levels: Vec<i64>,
    pub cosets: Vec<Coset>,
    pub verified: bool,
}

impl HomCover {
    /// `2 K r + 1`.
    pub fn size_bound(&self) -> u64 {
        2 * self.k * self.r as u64 + 1
    }
}

/// Covers `B_r` by kernel cosets of `phi: G -> Z`, `phi` given as a row on
/// the abelian coordinates of the family.
pub fn hom_to_z_cover(group: &MarkedGroup, row: &[i64], r: usize) -> Result<HomCover> {
    let family = group.family();
    let hom = AbelianHom::new(family, AbelianTarget::integers(), vec![row.to_vec()])?;
    let images: Vec<i64> = group.generators().iter().map(|s| hom.apply(s)[0]).collect();
    let g = images.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if g == 0 {
        return Err(Error::invalid("zero homomorphism"));
    }
    if g != 1 {
        return Err(Error::invalid(format!(
            "homomorphism is not onto Z: generator images have gcd {g}"
        )));
    }
    let k = images
        .iter()
        .map(|x| x.unsigned_abs())
        .max()
        .expect("nonempty");
    let kernel = Arc::new(SubgroupOracle::kernel(hom.clone()));
    let b = ball(group, r)?;
    let mut reps: BTreeMap<i64, Element> = BTreeMap::new();
    for x in b.elements() {
        reps.entry(hom.apply(x)[0]).or_insert_with(|| x.clone());
    }
    let levels: Vec<i64> = reps.keys().copied().collect();
    let cosets: Vec<Coset> = reps
        .into_values()
        .map(|rep| Coset::new(kernel.clone(), rep))
        .collect();
    let mut verified = true;
    for x in b.elements() {
        let mut hit = false;
        for c in &cosets {
            if c.contains(x)? {
                hit = true;
                break;
            }
        }
        verified &= hit;
    }
    Ok(HomCover {
        r,
        k,
        levels,
        cosets,
        verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::growth_function;
    use crate::numeric::ratio;

    #[test]
    fn doubling_of_z_and_z2() {
        let z = MarkedGroup::from_registry("Z").unwrap();
        let d = doubling_constant(&growth_function(&z, 20).unwrap(), 0, 10).unwrap();
        assert!(d.l < ratio(2, 1));
        assert_eq!(d.rows[0].ratio, ratio(5, 3));
        let z2 = MarkedGroup::from_registry("Z^2").unwrap();
        let d2 = doubling_constant(&growth_function(&z2, 16).unwrap(), 0, 8).unwrap();
        assert!(d2.l < ratio(4, 1));
        assert!(doubling_constant(&[1, 3, 5], 0, 2).is_err());
    }

    #[test]
    fn free_group_ratio_blows_up() {
        let f2 = MarkedGroup::from_registry("free:2").unwrap();
        let d = doubling_constant(&growth_function(&f2, 6).unwrap(), 2, 3).unwrap();
        assert_eq!(d.l, ratio(2 * 729 - 1, 2 * 27 - 1));
    }

    #[test]
    fn doubling_bound_values() {
        assert_eq!(doubling_lower_bound(8, &ratio(4, 1)), ratio(2, 1));
        assert_eq!(doubling_lower_bound(0, &ratio(3, 1)), ratio(0, 1));
    }

    #[test]
    fn axis_fraction() {
        let z2 = MarkedGroup::from_registry("Z^2").unwrap();
        let mut h = SubgroupOracle::parse(z2.family(), "lattice:[[1,0]]").unwrap();
        h.certify(&z2);
        let c = Coset::new(Arc::new(h), z2.identity());
        let fc = coset_fraction_check(&ball(&z2, 4).unwrap(), &c, &ratio(4, 1)).unwrap();
        assert_eq!((fc.count, fc.ball, fc.holds), (9, 41, true));
    }

    #[test]
    fn paths() {
        let z2 = MarkedGroup::from_registry("Z^2").unwrap();
        let h = SubgroupOracle::parse(z2.family(), "lattice:[[0,1]]").unwrap();
        let p = schreier_path(&z2, &h, 3).unwrap();
        let want: Vec<Element> = (1..=3).map(|k| Element::Vector(vec![k, 0])).collect();
        assert_eq!(p, want);
        let f2 = MarkedGroup::from_registry("free:2").unwrap();
        let a = SubgroupOracle::parse(f2.family(), "freegens:[a]").unwrap();
        let p = schreier_path(&f2, &a, 2).unwrap();
        assert_eq!(p, vec![Element::Word(vec![2]), Element::Word(vec![2, 2])]);
        assert!(schreier_path(&f2, &a, 0).unwrap().is_empty());
        let z = MarkedGroup::from_registry("Z").unwrap();
        let even = SubgroupOracle::parse(z.family(), "lattice:[[2]]").unwrap();
        assert!(schreier_path(&z, &even, 3).is_err());
    }

    #[test]
    fn hom_covers() {
        let z2 = MarkedGroup::from_registry("Z^2").unwrap();
        let c = hom_to_z_cover(&z2, &[1, 0], 3).unwrap();
        assert_eq!((c.cosets.len(), c.verified), (7, true));
        let f2 = MarkedGroup::from_registry("free:2").unwrap();
        let c = hom_to_z_cover(&f2, &[1, 0], 2).unwrap();
        assert_eq!((c.cosets.len(), c.verified), (5, true));
        let z = MarkedGroup::from_registry("Z").unwrap();
        assert_eq!(hom_to_z_cover(&z, &[1], 4).unwrap().cosets.len(), 9);
        assert!(hom_to_z_cover(&z2, &[0, 0], 2).is_err());
    }
}
