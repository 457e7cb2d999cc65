use super::{MatrixShape, SubgroupOracle};
use crate::error::{Error, Result};
use crate::group::{Element, Family};
use crate::hom::{AbelianHom, AbelianTarget};

pub(super) fn parse_descriptor(family: Family, input: &str) -> Result<SubgroupOracle> {
    let s = input.trim();
    let bad = |reason: String| Error::parse("subgroup descriptor", s, reason);
    if s == "trivial" {
        return Ok(SubgroupOracle::trivial(family));
    }
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| bad("expected kind:payload or trivial".into()))?;
    match kind {
        "lattice" => {
            let basis = parse_int_rows(rest).map_err(bad)?;
            SubgroupOracle::lattice(family, basis)
        }
        "freegens" => {
            let inner = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| bad("generator list must be bracketed".into()))?;
            let mut words = Vec::new();
            for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                match family.parse_element(tok)? {
                    Element::Word(w) => words.push(w),
                    _ => return Err(bad(format!("freegens needs a free family, got {family}"))),
                }
            }
            SubgroupOracle::free_subgroup(family, words)
        }
        "kernel" => {
            let (src, rest) = rest
                .split_once("->")
                .ok_or_else(|| bad("expected SOURCE->TARGET:[matrix]".into()))?;
            let source = Family::parse(src.trim())?;
            if source != family {
                return Err(bad(format!("source {source} does not match {family}")));
            }
            let (tgt, mat) = rest
                .split_once(":[")
                .ok_or_else(|| bad("missing :[matrix]".into()))?;
            let target = parse_target(tgt.trim()).map_err(bad)?;
            let matrix = parse_int_rows(&format!("[{mat}")).map_err(bad)?;
            Ok(SubgroupOracle::kernel(AbelianHom::new(
                source, target, matrix,
            )?))
        }
        "shape" => {
            if family != Family::Sl3z {
                return Err(Error::unsupported(format!(
                    "shape oracles are defined on sl3z, not {family}"
                )));
            }
            let shape = match rest.trim() {
                "upper-triangular" => MatrixShape::UpperTriangular,
                "lower-triangular" => MatrixShape::LowerTriangular,
                other => return Err(bad(format!("unknown shape {other:?}"))),
            };
            Ok(SubgroupOracle::shape(shape))
        }
        other => Err(bad(format!("unknown subgroup kind {other:?}"))),
    }
}

/// `[1,-1]` is a single row, `[[1,0],[0,2]]` a list of rows.
fn parse_int_rows(s: &str) -> std::result::Result<Vec<Vec<i64>>, String> {
    let s = s.trim();
    if let Ok(rows) = serde_json::from_str::<Vec<Vec<i64>>>(s) {
        return Ok(rows);
    }
    serde_json::from_str::<Vec<i64>>(s)
        .map(|row| vec![row])
        .map_err(|e| format!("bad integer matrix {s:?}: {e}"))
}

/// `Z`, `Z^2`, `Z2`, `Z/6`, `Z+Z/2`, `Z^2+Z/3+Z/3`.
fn parse_target(s: &str) -> std::result::Result<AbelianTarget, String> {
    let mut target = AbelianTarget {
        free_rank: 0,
        torsion: vec![],
    };
    for part in s.split('+').map(str::trim) {
        if let Some(n) = part.strip_prefix("Z/") {
            let n: u64 = n
                .parse()
                .map_err(|_| format!("bad torsion order in {part:?}"))?;
            if n == 0 {
                return Err("torsion order must be positive".into());
            }
            target.torsion.push(n);
        } else if let Some(rest) = part.strip_prefix('Z') {
            let k = match rest.trim_start_matches('^') {
                "" => 1,
                digits => digits
                    .parse::<usize>()
                    .map_err(|_| format!("bad free rank in {part:?}"))?,
            };
            if !target.torsion.is_empty() {
                return Err("free summands must come before torsion".into());
            }
            target.free_rank += k;
        } else {
            return Err(format!("unknown target summand {part:?}"));
        }
    }
    Ok(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subgroup::OracleKind;

    #[test]
    fn all_descriptor_kinds() {
        let z2 = Family::FreeAbelian { rank: 2 };
        let f2 = Family::Free { rank: 2 };
        assert!(matches!(
            parse_descriptor(z2, "lattice:[[1,1]]").unwrap().kind(),
            OracleKind::Lattice(_)
        ));
        let fg = parse_descriptor(f2, "freegens:[a,bab^-1]").unwrap();
        assert_eq!(fg.name(), "freegens:[a,bab^-1]");
        let k = parse_descriptor(z2, "kernel:Z2->Z:[1,-1]").unwrap();
        assert!(k.is_member(&Element::Vector(vec![4, 4])).unwrap());
        assert!(parse_descriptor(Family::Sl3z, "shape:upper-triangular").is_ok());
        assert!(parse_descriptor(z2, "trivial").is_ok());
    }

    #[test]
    fn kernel_into_torsion_and_compound_family_names() {
        let l = Family::Lamplighter { base: 2 };
        let k = parse_descriptor(l, "kernel:lamplighter:2->Z/3:[[1,0]]").unwrap();
        assert!(k.is_member(&l.parse_element("t^3").unwrap()).unwrap());
        assert!(!k.is_member(&l.parse_element("t").unwrap()).unwrap());
        assert_eq!(
            parse_target("Z^2+Z/3").unwrap(),
            AbelianTarget {
                free_rank: 2,
                torsion: vec![3]
            }
        );
    }

    #[test]
    fn malformed_descriptors() {
        let z2 = Family::FreeAbelian { rank: 2 };
        for d in [
            "lattice:[[1,x]]",
            "circle:[1]",
            "kernel:Z3->Z:[1,0,0]",
            "shape:upper-triangular",
        ] {
            assert!(parse_descriptor(z2, d).is_err(), "{d}");
        }
    }
}
