//! Integer lattices in `Z^d` kept in row Hermite normal form.
//!
//! Membership and coset residues reduce a vector against the HNF rows; two
//! vectors lie in the same coset iff their residues coincide.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntLattice {
    dim: usize,
    /// Nonzero HNF rows, pivots strictly increasing, pivot entries positive,
    /// entries above each pivot reduced into `[0, pivot)`.
    rows: Vec<Vec<i64>>,
    pivots: Vec<usize>,
}

impl IntLattice {
    pub fn from_generators(dim: usize, gens: &[Vec<i64>]) -> Result<Self> {
        if let Some(bad) = gens.iter().find(|g| g.len() != dim) {
            return Err(Error::invalid(format!(
                "lattice generator {bad:?} does not live in Z^{dim}"
            )));
        }
        let mut m: Vec<Vec<i128>> = gens
            .iter()
            .map(|g| g.iter().map(|&x| x as i128).collect())
            .filter(|r: &Vec<i128>| r.iter().any(|&x| x != 0))
            .collect();
        let mut rows = Vec::new();
        let mut pivots = Vec::new();
        let mut top = 0;
        for col in 0..dim {
            // Euclid on column `col` among rows top.. until one nonzero remains.
            loop {
                let nonzero: Vec<usize> = (top..m.len()).filter(|&i| m[i][col] != 0).collect();
                if nonzero.len() <= 1 {
                    break;
                }
                let piv = *nonzero
                    .iter()
                    .min_by_key(|&&i| m[i][col].unsigned_abs())
                    .unwrap();
                for &i in &nonzero {
                    if i != piv {
                        let q = m[i][col].div_euclid(m[piv][col]);
                        let (src, dst) = (m[piv].clone(), &mut m[i]);
                        for (d, s) in dst.iter_mut().zip(&src) {
                            *d -= q * s;
                        }
                    }
                }
            }
            if let Some(i) = (top..m.len()).find(|&i| m[i][col] != 0) {
                m.swap(top, i);
                if m[top][col] < 0 {
                    for x in m[top].iter_mut() {
                        *x = -*x;
                    }
                }
                pivots.push(col);
                top += 1;
            }
        }
        m.truncate(top);
        // reduce entries above pivots
        for i in 0..m.len() {
            let col = pivots[i];
            let p = m[i][col];
            for k in 0..i {
                let q = m[k][col].div_euclid(p);
                if q != 0 {
                    let src = m[i].clone();
                    for (d, s) in m[k].iter_mut().zip(&src) {
                        *d -= q * s;
                    }
                }
            }
        }
        for r in m {
            let row: Result<Vec<i64>> = r
                .into_iter()
                .map(|x| {
                    i64::try_from(x).map_err(|_| Error::invalid("lattice entry overflows i64"))
                })
                .collect();
            rows.push(row?);
        }
        Ok(IntLattice { dim, rows, pivots })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn hnf_rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    /// `[Z^d : L]` when `L` has full rank, `None` (infinite) otherwise.
    pub fn index(&self) -> Option<u64> {
        if self.rank() < self.dim {
            return None;
        }
        Some(
            self.rows
                .iter()
                .zip(&self.pivots)
                .map(|(r, &c)| r[c] as u64)
                .product(),
        )
    }

    /// Canonical representative of `v + L`.
    pub fn residue(&self, v: &[i64]) -> Vec<i64> {
        debug_assert_eq!(v.len(), self.dim);
        let mut out = v.to_vec();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let q = out[c].div_euclid(row[c]);
            if q != 0 {
                for (o, r) in out.iter_mut().zip(row) {
                    *o -= q * r;
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.residue(v).iter().all(|&x| x == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diagonal_line_membership() {
        let l = IntLattice::from_generators(2, &[vec![1, 1]]).unwrap();
        assert!(l.contains(&[3, 3]));
        assert!(!l.contains(&[3, 2]));
        assert_eq!(l.rank(), 1);
        assert_eq!(l.index(), None);
    }

    #[test]
    fn full_rank_index_is_determinant() {
        let l = IntLattice::from_generators(2, &[vec![2, 1], vec![0, 3], vec![4, 2]]).unwrap();
        assert_eq!(l.index(), Some(6));
        let two = IntLattice::from_generators(1, &[vec![2], vec![-2]]).unwrap();
        assert_eq!(two.index(), Some(2));
        assert_eq!(two.residue(&[7]), vec![1]);
    }

    proptest! {
        #[test]
        fn residue_is_a_coset_invariant(
            gens in prop::collection::vec(prop::collection::vec(-4i64..5, 3), 0..4),
            v in prop::collection::vec(-20i64..21, 3),
            coeffs in prop::collection::vec(-3i64..4, 4),
        ) {
            let l = IntLattice::from_generators(3, &gens).unwrap();
            let mut w = v.clone();
            for (g, c) in gens.iter().zip(&coeffs) {
                for (wi, gi) in w.iter_mut().zip(g) {
                    *wi += c * gi;
                }
            }
            prop_assert_eq!(l.residue(&v), l.residue(&w));
            let r = l.residue(&v);
            // v - residue lies in the lattice
            let diff: Vec<i64> = v.iter().zip(&r).map(|(a, b)| a - b).collect();
            prop_assert!(l.contains(&diff));
        }
    }
}
