use std::sync::Arc;

use rustc_hash::FxHashMap;

use super::{build_instance, exact_cover, CoverKind, ExactLimits};
use crate::error::{Error, Result};
use crate::group::{ball, ball_with_budget, Element, MarkedGroup, DEFAULT_BALL_BUDGET};
use crate::hom::GroupHom;
use crate::subgroup::{
    infinite_index_evidence, schreier_ball, Coset, IndexEvidence, SubgroupOracle,
    DEFAULT_EVIDENCE_THRESHOLD,
};

#[derive(Clone, Debug)]
pub struct LiftedCover {
    pub radius: usize,
    pub cosets: Vec<Coset>,
    /// every element of `B_r(G, S)` was checked against the lifted cosets
    pub verified: bool,
}

/// Pulls a cover of `B_r(Q, phi(S))` back to a cover of `B_r(G, S)` by the
/// preimage cosets `phi^-1(K q)`, one for each input coset.
pub fn lift_cover(
    phi: &GroupHom,
    source: &MarkedGroup,
    quotient_cover: &[Coset],
    r: usize,
) -> Result<LiftedCover> {
    let quotient = phi.image_marking(source)?;
    let b = ball(source, r)?;
    let images: Vec<Element> = b.elements().iter().map(|g| phi.apply(g)).collect();
    let mut cosets = Vec::with_capacity(quotient_cover.len());
    for c in quotient_cover {
        let k = &c.subgroup;
        if k.family() != phi.target() {
            return Err(Error::invalid(format!(
                "coset {c} is not in the target {}",
                phi.target()
            )));
        }
        let ev = match k.evidence() {
            Some(ev) => ev.clone(),
            None => infinite_index_evidence(&quotient, k, DEFAULT_EVIDENCE_THRESHOLD),
        };
        if !ev.claims_infinite() {
            return Err(Error::infeasible(format!(
                "quotient coset {c} has {}; lifting needs infinite index",
                ev.tag()
            )));
        }
        let pulled = SubgroupOracle::pullback(phi.clone(), (**k).clone())?.with_evidence(ev);
        let mut rep = None;
        for (g, x) in b.elements().iter().zip(&images) {
            if k.same_coset(x, &c.rep)? {
                rep = Some(g.clone());
                break;
            }
        }
        let rep = match rep {
            Some(g) => g,
            None => find_preimage_in_coset(phi, source, c, r)?,
        };
        cosets.push(Coset::new(Arc::new(pulled), rep));
    }
    for g in b.elements() {
        let mut hit = false;
        for c in &cosets {
            if c.contains(g)? {
                hit = true;
                break;
            }
        }
        if !hit {
            return Err(Error::infeasible(format!(
                "lifted cosets miss {g}: the quotient cosets do not cover B_{r}(Q)"
            )));
        }
    }
    Ok(LiftedCover {
        radius: r,
        cosets,
        verified: true,
    })
}

fn find_preimage_in_coset(
    phi: &GroupHom,
    source: &MarkedGroup,
    c: &Coset,
    r: usize,
) -> Result<Element> {
    let mut radius = 2 * r + 2;
    loop {
        let b = ball_with_budget(source, radius, DEFAULT_BALL_BUDGET)?;
        for g in b.elements() {
            if c.subgroup.same_coset(&phi.apply(g), &c.rep)? {
                return Ok(g.clone());
            }
        }
        radius *= 2;
    }
}

/// Smallest integer `C >= 1` with `|h|_S <= C(|h|_T + 1)` for every `h` in
/// `H` with `|h|_T <= range`.
pub fn quasi_isometry_constant(
    g: &MarkedGroup,
    h: &MarkedGroup,
    h_in_g: &SubgroupOracle,
    range: usize,
) -> Result<u64> {
    let bg = ball(g, range)?;
    let members: Vec<(usize, &Element)> = bg
        .elements()
        .iter()
        .enumerate()
        .filter_map(|(i, x)| match h_in_g.is_member(x) {
            Ok(true) => Some(Ok((bg.length_at(i), x))),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<_>>()?;
    let mut radius = range.max(1);
    let lengths: FxHashMap<Element, usize> = loop {
        let bh = ball(h, radius)?;
        if members.iter().all(|(_, x)| bh.contains(x)) {
            break bh
                .elements()
                .iter()
                .enumerate()
                .map(|(i, x)| (x.clone(), bh.length_at(i)))
                .collect();
        }
        if radius > 64 * range.max(1) {
            return Err(Error::invalid(format!(
                "{} contains elements of {} not reached by its generators",
                h_in_g.name(),
                g.name()
            )));
        }
        radius *= 2;
    };
    let mut c = 1u64;
    for (t_len, x) in members {
        let s_len = lengths[x] as u64;
        c = c.max(s_len.div_ceil(t_len as u64 + 1));
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SandwichRow {
    pub r: usize,
    pub lower: u64,
    pub middle: u64,
    pub scaled_radius: usize,
    pub upper: u64,
    /// all three covers proven optimal within the roster
    pub exact: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SandwichReport {
    pub index: u64,
    pub c: u64,
    pub k: usize,
    pub d: u64,
    /// `C` was measured on `|h|_T <= qi_range`
    pub qi_range: usize,
    pub rows: Vec<SandwichRow>,
    pub holds: bool,
}

/// Checks `c_{H,S}(r) <= c_{G,T}(r) <= [G:H] c_{H,S}(Cr + D)` for
/// `r <= r_max` with roster-restricted exact covers on both groups.
///
/// `g` is marked by `T`, `h` by `S`, and `h_in_g` decides membership in
/// `H` inside `G`. `C` is measured on `|h|_T <= r_max`, `k` is the largest
/// length of a coset representative and `D = C(k + 1)`.
pub fn finite_index_sandwich_report(
    g: &MarkedGroup,
    h: &MarkedGroup,
    h_in_g: &SubgroupOracle,
    roster: &[SubgroupOracle],
    r_max: usize,
    limits: ExactLimits,
) -> Result<SandwichReport> {
    if g.family() != h.family() || h_in_g.family() != g.family() {
        return Err(Error::invalid("G, H and the oracle must share a family"));
    }
    if let Some(s) = h.generators().iter().find(|s| !g.generators().contains(s)) {
        return Err(Error::invalid(format!("generator {s} of H is not in T")));
    }
    for s in h.generators() {
        if !h_in_g.is_member(s)? {
            return Err(Error::invalid(format!("{s} is not in {}", h_in_g.name())));
        }
    }
    let index = match infinite_index_evidence(g, h_in_g, DEFAULT_EVIDENCE_THRESHOLD) {
        IndexEvidence::FiniteIndex(n) => n,
        other => {
            return Err(Error::invalid(format!(
                "{} is not of finite index ({})",
                h_in_g.name(),
                other.tag()
            )))
        }
    };
    let sb = schreier_ball(g, h_in_g, DEFAULT_EVIDENCE_THRESHOLD)?;
    let k = sb.depth_of(sb.len() - 1);
    let c = quasi_isometry_constant(g, h, h_in_g, r_max)?;
    let d = c * (k as u64 + 1);
    let mut cache: FxHashMap<(bool, usize), (u64, bool)> = FxHashMap::default();
    let mut value = |on_h: bool, r: usize| -> Result<(u64, bool)> {
        if let Some(&v) = cache.get(&(on_h, r)) {
            return Ok(v);
        }
        let group = if on_h { h } else { g };
        let inst = build_instance(group, ball(group, r)?, roster)?;
        let res = exact_cover(&inst, limits)?;
        let v = (res.chosen.len() as u64, res.kind == CoverKind::ExactOptimal);
        cache.insert((on_h, r), v);
        Ok(v)
    };
    let mut rows = Vec::new();
    for r in 0..=r_max {
        let (lower, e1) = value(true, r)?;
        let (middle, e2) = value(false, r)?;
        let scaled_radius = (c * r as u64 + d) as usize;
        let (scaled, e3) = value(true, scaled_radius)?;
        let upper = index * scaled;
        rows.push(SandwichRow {
            r,
            lower,
            middle,
            scaled_radius,
            upper,
            exact: e1 && e2 && e3,
            holds: lower <= middle && middle <= upper,
        });
    }
    let holds = rows.iter().all(|row| row.holds);
    Ok(SandwichReport {
        index,
        c,
        k,
        d,
        qi_range: r_max,
        rows,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::greedy_cover;
    use crate::group::{Family, GroupSpec};
    use crate::make_group;

    fn z_with(gens: &[i64]) -> MarkedGroup {
        make_group(&GroupSpec::custom(
            Family::FreeAbelian { rank: 1 },
            gens.iter().map(|&x| Element::Vector(vec![x])).collect(),
        ))
        .unwrap()
    }

    #[test]
    fn quasi_isometry_for_even_integers() {
        let g = z_with(&[1, -1, 2, -2]);
        let h = z_with(&[2, -2]);
        let two = SubgroupOracle::parse(g.family(), "lattice:[[2]]").unwrap();
        assert_eq!(quasi_isometry_constant(&g, &h, &two, 6).unwrap(), 1);
    }

    #[test]
    fn lift_along_projection() {
        let z2 = MarkedGroup::from_registry("Z^2").unwrap();
        let z = Family::FreeAbelian { rank: 1 };
        let phi = GroupHom::new(
            z2.family(),
            z,
            vec![Element::Vector(vec![1]), Element::Vector(vec![0])],
        )
        .unwrap();
        let q = phi.image_marking(&z2).unwrap();
        let roster = [SubgroupOracle::trivial(z)];
        let inst = build_instance(&q, ball(&q, 2).unwrap(), &roster).unwrap();
        let cover = greedy_cover(&inst).unwrap();
        let lifted = lift_cover(&phi, &z2, &cover.cosets, 2).unwrap();
        assert_eq!(lifted.cosets.len(), 5);
        assert!(lifted.verified);
    }

    #[test]
    fn lifting_a_finite_index_coset_fails() {
        let z = MarkedGroup::from_registry("Z").unwrap();
        let phi = GroupHom::identity(z.family());
        let two = Arc::new(SubgroupOracle::parse(z.family(), "lattice:[[2]]").unwrap());
        let cover = [
            Coset::new(Arc::clone(&two), Element::Vector(vec![0])),
            Coset::new(two, Element::Vector(vec![1])),
        ];
        assert!(matches!(
            lift_cover(&phi, &z, &cover, 2),
            Err(Error::Infeasible(_))
        ));
    }
}
