//! Library results against independently computed values.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use cosetcov_core::lattice::IntLattice;
use cosetcov_core::walk::{exact_coset_distribution, simulate_walk};
use cosetcov_core::{
    ball, growth_function, Element, MarkedGroup, SubgroupOracle, WalkConfig, WalkMeasure,
};

/// `|B_r(Z^d)| = sum_k 2^k C(d,k) C(r,k)`.
fn z_d_ball(d: u64, r: u64) -> u64 {
    let c = |n: u64, k: u64| -> u64 { (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1)) };
    (0..=d.min(r)).map(|k| (1 << k) * c(d, k) * c(r, k)).sum()
}

#[test]
fn growth_closed_forms() {
    for d in 1..=4u64 {
        let g = MarkedGroup::from_registry(&format!("Z^{d}")).unwrap();
        let got = growth_function(&g, 6).unwrap();
        for r in 0..=6u64 {
            assert_eq!(got[r as usize] as u64, z_d_ball(d, r), "Z^{d} r={r}");
        }
    }
    for k in 2..=3u64 {
        let g = MarkedGroup::from_registry(&format!("free:{k}")).unwrap();
        let got = growth_function(&g, 6).unwrap();
        for r in 0..=6u32 {
            // 1 + 2k sum_{j<r} (2k-1)^j
            let want = 1 + (0..r).map(|j| 2 * k * (2 * k - 1).pow(j)).sum::<u64>();
            assert_eq!(got[r as usize] as u64, want, "F_{k} r={r}");
        }
    }
}

/// `|Z_n|` on `F_2` is a birth-death chain: from 0 it moves to 1, from
/// `d > 0` up with probability 3/4 and down with 1/4.
fn f2_expected_distance(n: usize) -> f64 {
    let mut p = vec![0.0f64; n + 2];
    p[0] = 1.0;
    for _ in 0..n {
        let mut q = vec![0.0f64; n + 2];
        for d in 0..=n {
            if p[d] == 0.0 {
                continue;
            }
            if d == 0 {
                q[1] += p[0];
            } else {
                q[d + 1] += 0.75 * p[d];
                q[d - 1] += 0.25 * p[d];
            }
        }
        p = q;
    }
    p.iter().enumerate().map(|(d, x)| d as f64 * x).sum()
}

#[test]
fn free_group_speed_matches_birth_death_chain() {
    let g = MarkedGroup::from_registry("free:2").unwrap();
    let mu = WalkMeasure::uniform(&g).unwrap();
    let mut cfg = WalkConfig::new(64, 50_000, 21);
    cfg.extra_checkpoints = vec![10, 30, 64];
    let stats = simulate_walk(&g, &mu, &cfg).unwrap();
    for n in [10usize, 30, 64] {
        let want = f2_expected_distance(n);
        let got = stats.speed(n).unwrap().to_f64().unwrap();
        let se = stats.std_error(n).unwrap();
        assert!(
            (got - want).abs() <= 4.0 * se,
            "n={n}: {got} vs {want} (se {se})"
        );
    }
}

#[test]
fn free_group_trivial_coset_chain_matches_distance_law() {
    // mass at the identity of the lumped chain equals the birth-death return probability
    let g = MarkedGroup::from_registry("free:2").unwrap();
    let mu = WalkMeasure::uniform(&g).unwrap();
    let h = SubgroupOracle::trivial(g.family());
    for n in [2usize, 6, 10] {
        let (chain, dist) = exact_coset_distribution(&g, &mu, &h, n).unwrap();
        let st = chain.state_of(&g.identity()).unwrap().unwrap();
        let mut p = vec![0.0f64; n + 2];
        p[0] = 1.0;
        for _ in 0..n {
            let mut q = vec![0.0f64; n + 2];
            for d in 0..=n {
                if d == 0 {
                    q[1] += p[0];
                } else {
                    q[d + 1] += 0.75 * p[d];
                    q[d - 1] += 0.25 * p[d];
                }
            }
            p = q;
        }
        let got = dist.coset_mass(st).to_f64().unwrap();
        assert!((got - p[0]).abs() < 1e-12, "n={n}: {got} vs {}", p[0]);
        assert_eq!(dist.total_mass(), BigRational::from_integer(1.into()));
    }
}

fn brute_span(gens: &[Vec<i64>], box_r: i64) -> BTreeSet<Vec<i64>> {
    // all small integer combinations, clipped to the box
    let mut out = BTreeSet::new();
    let k = gens.len();
    let range: Vec<i64> = (-6..=6).collect();
    let mut idx = vec![0usize; k];
    loop {
        let mut v = vec![0i64; gens[0].len()];
        for (g, &i) in gens.iter().zip(&idx) {
            for (x, y) in v.iter_mut().zip(g) {
                *x += range[i] * y;
            }
        }
        if v.iter().all(|x| x.abs() <= box_r) {
            out.insert(v);
        }
        let mut j = 0;
        while j < k {
            idx[j] += 1;
            if idx[j] < range.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == k {
            return out;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lattice_membership_matches_enumeration(
        gens in prop::collection::vec(prop::collection::vec(-2i64..=2, 2), 1..=2)
    ) {
        let lat = IntLattice::from_generators(2, &gens).unwrap();
        let span = brute_span(&gens, 2);
        for x in -2i64..=2 {
            for y in -2i64..=2 {
                let v = vec![x, y];
                if span.contains(&v) {
                    prop_assert!(lat.contains(&v), "{v:?} in span of {gens:?}");
                }
                if lat.contains(&v) {
                    let o = SubgroupOracle::lattice(cosetcov_core::Family::FreeAbelian { rank: 2 }, gens.clone()).unwrap();
                    prop_assert!(o.is_member(&Element::Vector(v.clone())).unwrap());
                }
            }
        }
    }

    #[test]
    fn balls_are_symmetric(name in prop::sample::select(vec!["Z^2", "free:2", "heisenberg", "lamplighter:2", "sl3z"]), r in 0usize..=3) {
        let g = MarkedGroup::from_registry(name).unwrap();
        let b = ball(&g, r).unwrap();
        for x in b.elements() {
            prop_assert!(b.contains(&g.invert(x)));
        }
    }
}
