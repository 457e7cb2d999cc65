//! Canonical element forms for every supported group family.
//!
//! Each family stores elements in a normal form so that structural equality
//! is group equality: integer vectors for `Z^d`, Mal'cev triples
//! `x^a y^b z^c` for the Heisenberg group, freely reduced words for free
//! groups, (finitely supported lamp map, cursor) for lamplighters and
//! determinant-one integer matrices for `SL(3,Z)`.

use std::fmt;

/// A letter of a free group word: `+i` is the `i`-th free generator
/// (1-based), `-i` its inverse.
pub type Letter = i8;

/// Lamp configuration of a lamplighter group `Z_m wr Z`.
///
/// `lamps` is sorted by position and only stores nonzero lamp values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LampConfig {
    pub lamps: Vec<(i64, u8)>,
    pub cursor: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Vector(Vec<i64>),
    /// Mal'cev coordinates `(a, b, c)` of `x^a y^b z^c` with `z = [x, y]`.
    Heisenberg([i64; 3]),
    Word(Vec<Letter>),
    Lamp(LampConfig),
    Matrix([[i64; 3]; 3]),
}

pub(crate) const GENERATOR_LETTERS: [char; 4] = ['a', 'b', 'c', 'd'];

impl Element {
    pub fn as_vector(&self) -> Option<&[i64]> {
        match self {
            Element::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_word(&self) -> Option<&[Letter]> {
        match self {
            Element::Word(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&[[i64; 3]; 3]> {
        match self {
            Element::Matrix(m) => Some(m),
            _ => None,
        }
    }
}

/// Appends `letter` to a freely reduced word, cancelling if needed.
#[inline]
pub(crate) fn push_letter(word: &mut Vec<Letter>, letter: Letter) {
    if word.last() == Some(&-letter) {
        word.pop();
    } else {
        word.push(letter);
    }
}

pub(crate) fn reduce_word(letters: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
    let mut out = Vec::new();
    for l in letters {
        push_letter(&mut out, l);
    }
    out
}

pub(crate) fn invert_word(word: &[Letter]) -> Vec<Letter> {
    word.iter().rev().map(|l| -l).collect()
}

pub(crate) fn lamp_product(a: &LampConfig, b: &LampConfig, base: u8) -> LampConfig {
    // (f, x)(g, y) = (f + g(. - x), x + y)
    let m = base as u16;
    let mut lamps = Vec::with_capacity(a.lamps.len() + b.lamps.len());
    let (mut i, mut j) = (0, 0);
    while i < a.lamps.len() || j < b.lamps.len() {
        let pa = a.lamps.get(i).map(|l| l.0);
        let pb = b.lamps.get(j).map(|l| l.0 + a.cursor);
        match (pa, pb) {
            (Some(p), Some(q)) if p == q => {
                let v = ((a.lamps[i].1 as u16 + b.lamps[j].1 as u16) % m) as u8;
                if v != 0 {
                    lamps.push((p, v));
                }
                i += 1;
                j += 1;
            }
            (Some(p), Some(q)) if p < q => {
                lamps.push(a.lamps[i]);
                i += 1;
            }
            (Some(_), None) => {
                lamps.push(a.lamps[i]);
                i += 1;
            }
            (_, Some(q)) => {
                lamps.push((q, b.lamps[j].1));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    LampConfig {
        lamps,
        cursor: a.cursor + b.cursor,
    }
}

pub(crate) fn lamp_inverse(a: &LampConfig, base: u8) -> LampConfig {
    LampConfig {
        lamps: a
            .lamps
            .iter()
            .map(|&(p, v)| (p - a.cursor, base - v))
            .collect(),
        cursor: -a.cursor,
    }
}

pub(crate) fn matrix_product(a: &[[i64; 3]; 3], b: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut out = [[0i64; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub(crate) fn matrix_det(a: &[[i64; 3]; 3]) -> i64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inverse of a determinant-one matrix (its adjugate).
pub(crate) fn matrix_inverse_unimodular(a: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut out = [[0i64; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            // cofactor C_{ji}
            let (r0, r1) = others(j);
            let (c0, c1) = others(i);
            let minor = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
            *cell = if (i + j) % 2 == 0 { minor } else { -minor };
        }
    }
    out
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

pub(crate) fn elementary(i: usize, j: usize, v: i64) -> [[i64; 3]; 3] {
    let mut m = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    m[i][j] = v;
    m
}

fn fmt_word(f: &mut fmt::Formatter<'_>, w: &[Letter]) -> fmt::Result {
    if w.is_empty() {
        return write!(f, "e");
    }
    let mut i = 0;
    while i < w.len() {
        let l = w[i];
        let mut run = 1;
        while i + run < w.len() && w[i + run] == l {
            run += 1;
        }
        let c = GENERATOR_LETTERS[(l.unsigned_abs() - 1) as usize];
        let exp = if l < 0 { -(run as i64) } else { run as i64 };
        if exp == 1 {
            write!(f, "{c}")?;
        } else {
            write!(f, "{c}^{exp}")?;
        }
        i += run;
    }
    Ok(())
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Element::Heisenberg([a, b, c]) => write!(f, "[{a},{b},{c}]"),
            Element::Word(w) => fmt_word(f, w),
            Element::Lamp(l) => {
                write!(f, "{{")?;
                for (i, (p, v)) in l.lamps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}:{v}")?;
                }
                write!(f, "}}@{}", l.cursor)
            }
            Element::Matrix(m) => write!(
                f,
                "[[{},{},{}],[{},{},{}],[{},{},{}]]",
                m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_display_compresses_runs() {
        let w = Element::Word(vec![1, 1, 2, -1]);
        assert_eq!(w.to_string(), "a^2ba^-1");
        assert_eq!(Element::Word(vec![]).to_string(), "e");
    }

    #[test]
    fn unimodular_inverse() {
        let a = matrix_product(&elementary(0, 1, 3), &elementary(2, 0, -2));
        let inv = matrix_inverse_unimodular(&a);
        assert_eq!(matrix_product(&a, &inv), elementary(0, 0, 1));
        assert_eq!(matrix_det(&a), 1);
    }

    #[test]
    fn lamp_product_cancels_to_zero() {
        let a = LampConfig {
            lamps: vec![(0, 1), (2, 1)],
            cursor: 1,
        };
        let inv = lamp_inverse(&a, 2);
        let e = lamp_product(&a, &inv, 2);
        assert!(e.lamps.is_empty());
        assert_eq!(e.cursor, 0);
    }
}
