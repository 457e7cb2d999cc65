use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::group::{Element, MarkedGroup};
use crate::presets::split_top_level;

/// A finitely supported symmetric probability measure with exact masses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkMeasure {
    id: String,
    support: Vec<(Element, Rational64)>,
    min_mu: Rational64,
    /// common denominator of all masses
    denominator: u64,
    /// `mass * denominator`, aligned with `support`
    weights: Vec<u64>,
}

impl WalkMeasure {
    /// Validates positivity, total mass 1, symmetry and that the support
    /// generates the marked group's family.
    pub fn new(group: &MarkedGroup, id: &str, support: Vec<(Element, Rational64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("empty walk support"));
        }
        let family = group.family();
        let mut merged: Vec<(Element, Rational64)> = Vec::new();
        for (g, p) in support {
            group.check_element(&g)?;
            if p <= Rational64::zero() {
                return Err(Error::invalid(format!("mass of {g} is not positive")));
            }
            match merged.iter_mut().find(|(h, _)| *h == g) {
                Some((_, q)) => *q += p,
                None => merged.push((g, p)),
            }
        }
        let total: Rational64 = merged.iter().map(|(_, p)| *p).sum();
        if total != Rational64::one() {
            return Err(Error::invalid(format!("walk masses sum to {total}, not 1")));
        }
        for (g, p) in &merged {
            let inv = family.invert(g);
            let q = merged.iter().find(|(h, _)| *h == inv).map(|(_, q)| *q);
            if q != Some(*p) {
                return Err(Error::invalid(format!(
                    "measure is not symmetric: mu({g}) = {p} but mu({inv}) = {}",
                    q.unwrap_or_else(Rational64::zero)
                )));
            }
        }
        let steps: Vec<Element> = merged
            .iter()
            .map(|(g, _)| g.clone())
            .filter(|g| *g != family.identity())
            .collect();
        MarkedGroup::with_generators(family, steps)
            .map_err(|e| Error::invalid(format!("walk support is degenerate: {e}")))?;
        let denominator = merged.iter().fold(1i64, |acc, (_, p)| acc.lcm(p.denom())) as u64;
        let weights = merged
            .iter()
            .map(|(_, p)| (p.numer() * (denominator as i64 / p.denom())) as u64)
            .collect();
        let min_mu = merged.iter().map(|(_, p)| *p).min().expect("nonempty");
        Ok(WalkMeasure {
            id: id.to_string(),
            support: merged,
            min_mu,
            denominator,
            weights,
        })
    }

    /// Uniform on the generating set.
    pub fn uniform(group: &MarkedGroup) -> Result<Self> {
        let k = group.size_of_generating_set() as i64;
        let support = group
            .generators()
            .iter()
            .map(|s| (s.clone(), Rational64::new(1, k)))
            .collect();
        WalkMeasure::new(group, "uniform", support)
    }

    /// Uniform on the generating set together with the identity.
    pub fn lazy(group: &MarkedGroup) -> Result<Self> {
        let k = group.size_of_generating_set() as i64 + 1;
        let mut support: Vec<(Element, Rational64)> =
            vec![(group.identity(), Rational64::new(1, k))];
        support.extend(
            group
                .generators()
                .iter()
                .map(|s| (s.clone(), Rational64::new(1, k))),
        );
        WalkMeasure::new(group, "lazy", support)
    }

    /// Holds with probability 1/2, otherwise a uniform generator step.
    pub fn half_lazy(group: &MarkedGroup) -> Result<Self> {
        let k = group.size_of_generating_set() as i64;
        let mut support: Vec<(Element, Rational64)> =
            vec![(group.identity(), Rational64::new(1, 2))];
        support.extend(
            group
                .generators()
                .iter()
                .map(|s| (s.clone(), Rational64::new(1, 2 * k))),
        );
        WalkMeasure::new(group, "half-lazy", support)
    }

    /// `uniform`, `lazy`, `half-lazy`, or `custom:g=p;g=p;...` with masses
    /// written as fractions or decimals.
    pub fn parse(group: &MarkedGroup, spec: &str) -> Result<Self> {
        let spec = spec.trim();
        match spec {
            "uniform" => return WalkMeasure::uniform(group),
            "lazy" => return WalkMeasure::lazy(group),
            "half-lazy" => return WalkMeasure::half_lazy(group),
            _ => {}
        }
        let Some(body) = spec.strip_prefix("custom:") else {
            return Err(Error::parse(
                "walk measure",
                spec,
                "expected uniform, lazy, half-lazy or custom:g=p;...",
            ));
        };
        let mut support = Vec::new();
        for item in body.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (g, p) = item
                .rsplit_once('=')
                .ok_or_else(|| Error::parse("walk measure", item, "expected element=mass"))?;
            let p = crate::numeric::parse_rational(p)
                .and_then(|q| {
                    let n = i64::try_from(q.numer()).ok()?;
                    let d = i64::try_from(q.denom()).ok()?;
                    Some(Rational64::new(n, d))
                })
                .ok_or_else(|| Error::parse("walk measure", p, "bad mass"))?;
            let parts = split_top_level(g);
            if parts.len() != 1 {
                return Err(Error::parse("walk measure", item, "one element per entry"));
            }
            support.push((group.family().parse_element(parts[0])?, p));
        }
        WalkMeasure::new(group, spec, support)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn support(&self) -> &[(Element, Rational64)] {
        &self.support
    }

    pub fn min_mu(&self) -> Rational64 {
        self.min_mu
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn mass_of(&self, g: &Element) -> Rational64 {
        self.support
            .iter()
            .find(|(h, _)| h == g)
            .map(|(_, p)| *p)
            .unwrap_or_else(Rational64::zero)
    }

    pub fn includes_identity(&self, group: &MarkedGroup) -> bool {
        self.mass_of(&group.identity()) > Rational64::zero()
    }

    /// `(mass per generator, mass at e)` when the measure is uniform on the
    /// generating set apart from an optional holding mass.
    pub fn generator_uniform(&self, group: &MarkedGroup) -> Option<(Rational64, Rational64)> {
        let e = group.identity();
        let hold = self.mass_of(&e);
        let rest: Vec<_> = self.support.iter().filter(|(g, _)| *g != e).collect();
        if rest.len() != group.size_of_generating_set() {
            return None;
        }
        let p = rest[0].1;
        let ok = rest
            .iter()
            .all(|(g, q)| *q == p && group.generators().contains(g));
        ok.then_some((p, hold))
    }
}

impl fmt::Display for WalkMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_measures() {
        let z = MarkedGroup::from_registry("Z").unwrap();
        let mu = WalkMeasure::uniform(&z).unwrap();
        assert_eq!(mu.min_mu(), Rational64::new(1, 2));
        assert_eq!(mu.denominator(), 2);
        let lazy = WalkMeasure::lazy(&z).unwrap();
        assert_eq!(lazy.min_mu(), Rational64::new(1, 3));
        assert!(lazy.includes_identity(&z));
        let half = WalkMeasure::half_lazy(&z).unwrap();
        assert_eq!((half.denominator(), half.weights()), (4, &[2u64, 1, 1][..]));
        assert!(half.generator_uniform(&z).is_some());
    }

    #[test]
    fn validation() {
        let z2 = MarkedGroup::from_registry("Z^2").unwrap();
        let asym = WalkMeasure::parse(&z2, "custom:(1,0)=1/2;(-1,0)=1/4;(0,1)=1/8;(0,-1)=1/8");
        assert!(asym.unwrap_err().to_string().contains("symmetric"));
        let degenerate = WalkMeasure::parse(&z2, "custom:(1,0)=1/2;(-1,0)=1/2");
        assert!(degenerate.unwrap_err().to_string().contains("degenerate"));
        let short = WalkMeasure::parse(&z2, "custom:(1,0)=0.25;(-1,0)=0.25");
        assert!(short.is_err());
        let ok =
            WalkMeasure::parse(&z2, "custom:(1,0)=0.3;(-1,0)=0.3;(0,1)=0.2;(0,-1)=0.2").unwrap();
        assert_eq!(ok.min_mu(), Rational64::new(1, 5));
    }
}
