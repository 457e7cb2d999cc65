use super::{Element, Family, LampConfig};
use crate::error::{Error, Result};

pub(super) fn parse_family(name: &str) -> Result<Family> {
    let s = name.trim();
    let bad = |reason: &str| Error::parse("group name", name, reason);
    let number = |t: &str| -> Result<usize> {
        t.trim()
            .parse::<usize>()
            .map_err(|_| bad("expected a positive integer parameter"))
    };
    let family = if s == "Z" {
        Family::FreeAbelian { rank: 1 }
    } else if let Some(rest) = s.strip_prefix("Z^") {
        Family::FreeAbelian {
            rank: number(rest)?,
        }
    } else if let Some(rest) = s.strip_prefix('Z').filter(|r| !r.is_empty()) {
        Family::FreeAbelian {
            rank: number(rest)?,
        }
    } else if s.eq_ignore_ascii_case("heisenberg") || s == "H3" {
        Family::Heisenberg
    } else if let Some(rest) = s.strip_prefix("free:") {
        Family::Free {
            rank: number(rest)?,
        }
    } else if let Some(rest) = s.strip_prefix('F').filter(|r| !r.is_empty()) {
        Family::Free {
            rank: number(rest)?,
        }
    } else if let Some(rest) = s.strip_prefix("lamplighter:") {
        let m = number(rest)?;
        Family::Lamplighter {
            base: u8::try_from(m).map_err(|_| bad("lamp base too large"))?,
        }
    } else if s.eq_ignore_ascii_case("sl3z") {
        Family::Sl3z
    } else {
        return Err(bad(
            "expected one of Z^d, heisenberg, free:k, lamplighter:m, sl3z",
        ));
    };
    family.validate()?;
    Ok(family)
}

fn parse_ints(input: &str, what: &'static str) -> Result<Vec<i64>> {
    let inner = input
        .trim()
        .trim_start_matches(['(', '['])
        .trim_end_matches([')', ']']);
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::parse(what, input, format!("`{}` is not an integer", t.trim())))
        })
        .collect()
}

/// Parses `name^exp` tokens over a fixed alphabet of generator names.
fn parse_word_tokens(input: &str, names: &[&str]) -> Result<Vec<(usize, i64)>> {
    let mut out = Vec::new();
    let s = input.trim();
    let mut rest = s;
    while !rest.is_empty() {
        let (idx, name) = names
            .iter()
            .enumerate()
            .filter(|(_, n)| rest.starts_with(**n))
            .max_by_key(|(_, n)| n.len())
            .ok_or_else(|| {
                Error::parse(
                    "word",
                    input,
                    format!("unknown generator at `{rest}` (known: {})", names.join(",")),
                )
            })?;
        rest = &rest[name.len()..];
        let mut exp = 1i64;
        if let Some(after) = rest.strip_prefix('^') {
            let end = after
                .char_indices()
                .find(|&(i, c)| !(c.is_ascii_digit() || (i == 0 && c == '-')))
                .map(|(i, _)| i)
                .unwrap_or(after.len());
            exp = after[..end]
                .parse()
                .map_err(|_| Error::parse("word", input, "bad exponent"))?;
            rest = &after[end..];
        }
        out.push((idx, exp));
    }
    Ok(out)
}

fn eval_word(family: &Family, input: &str, names: &[&str], gens: &[Element]) -> Result<Element> {
    let tokens = parse_word_tokens(input, names)?;
    let mut acc = family.identity();
    for (idx, exp) in tokens {
        let p = family.pow(&gens[idx], exp);
        family.mul_assign(&mut acc, &p);
    }
    Ok(acc)
}

pub(super) fn parse_element(family: &Family, input: &str) -> Result<Element> {
    let s = input.trim();
    if s == "e" || s == "1" && !matches!(family, Family::FreeAbelian { .. }) {
        return Ok(family.identity());
    }
    let basic = family.basic_generators();
    let mut names: Vec<&str> = basic.iter().map(|(n, _)| n.as_str()).collect();
    let mut gens: Vec<Element> = basic.iter().map(|(_, g)| g.clone()).collect();
    let g = match family {
        Family::FreeAbelian { rank } => {
            let v = parse_ints(s, "vector")?;
            if v.len() != *rank {
                return Err(Error::parse(
                    "vector",
                    input,
                    format!("expected {rank} coordinates, got {}", v.len()),
                ));
            }
            Element::Vector(v)
        }
        Family::Heisenberg if s.starts_with(['(', '[']) => {
            let v = parse_ints(s, "Heisenberg triple")?;
            let t: [i64; 3] = v
                .try_into()
                .map_err(|_| Error::parse("Heisenberg triple", input, "expected [a,b,c]"))?;
            Element::Heisenberg(t)
        }
        Family::Heisenberg => {
            names.push("z");
            gens.push(Element::Heisenberg([0, 0, 1]));
            eval_word(family, s, &names, &gens)?
        }
        Family::Lamplighter { base } if s.starts_with('{') => {
            let (lamps_part, cursor_part) = s
                .split_once('@')
                .ok_or_else(|| Error::parse("lamp state", input, "expected {p:v,...}@x"))?;
            let cursor = cursor_part
                .trim()
                .parse::<i64>()
                .map_err(|_| Error::parse("lamp state", input, "bad cursor"))?;
            let inner = lamps_part
                .trim()
                .trim_start_matches('{')
                .trim_end_matches('}');
            let mut lamps = Vec::new();
            for item in inner.split(',').filter(|t| !t.trim().is_empty()) {
                let (p, v) = item
                    .split_once(':')
                    .ok_or_else(|| Error::parse("lamp state", input, "expected p:v"))?;
                let p: i64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse("lamp state", input, "bad position"))?;
                let v: i64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse("lamp state", input, "bad value"))?;
                let v = v.rem_euclid(*base as i64) as u8;
                if v != 0 {
                    lamps.push((p, v));
                }
            }
            lamps.sort();
            if lamps.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::parse("lamp state", input, "repeated position"));
            }
            Element::Lamp(LampConfig { lamps, cursor })
        }
        Family::Sl3z if s.starts_with('[') => {
            let rows: Vec<&str> = s
                .trim_start_matches('[')
                .trim_end_matches(']')
                .split("],")
                .collect();
            if rows.len() != 3 {
                return Err(Error::parse("matrix", input, "expected three rows"));
            }
            let mut m = [[0i64; 3]; 3];
            for (i, row) in rows.iter().enumerate() {
                let v = parse_ints(row, "matrix")?;
                m[i] = v
                    .try_into()
                    .map_err(|_| Error::parse("matrix", input, "rows need three entries"))?;
            }
            Element::Matrix(m)
        }
        _ => eval_word(family, s, &names, &gens)?,
    };
    if !family.contains(&g) {
        return Err(Error::parse(
            "element",
            input,
            format!("not a canonical element of {family}"),
        ));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names() {
        assert_eq!(
            parse_family("Z^2").unwrap(),
            Family::FreeAbelian { rank: 2 }
        );
        assert_eq!(parse_family("Z").unwrap(), Family::FreeAbelian { rank: 1 });
        assert_eq!(parse_family("free:3").unwrap(), Family::Free { rank: 3 });
        assert_eq!(parse_family("heisenberg").unwrap(), Family::Heisenberg);
        assert_eq!(
            parse_family("lamplighter:2").unwrap(),
            Family::Lamplighter { base: 2 }
        );
        assert_eq!(parse_family("sl3z").unwrap(), Family::Sl3z);
        assert!(parse_family("free:9").is_err());
        assert!(parse_family("grigorchuk").is_err());
    }

    #[test]
    fn element_literals() {
        let f2 = Family::Free { rank: 2 };
        assert_eq!(
            parse_element(&f2, "bab^-1").unwrap(),
            Element::Word(vec![2, 1, -2])
        );
        assert_eq!(
            parse_element(&f2, "aa^-1b").unwrap(),
            Element::Word(vec![2])
        );
        let z2 = Family::FreeAbelian { rank: 2 };
        assert_eq!(
            parse_element(&z2, "(2,-1)").unwrap(),
            Element::Vector(vec![2, -1])
        );
        assert!(parse_element(&z2, "(2)").is_err());
        let h = Family::Heisenberg;
        assert_eq!(
            parse_element(&h, "xyx^-1y^-1").unwrap(),
            Element::Heisenberg([0, 0, 1])
        );
        let l = Family::Lamplighter { base: 2 };
        assert_eq!(
            parse_element(&l, "ata").unwrap(),
            parse_element(&l, "{0:1,1:1}@1").unwrap()
        );
        let sl = Family::Sl3z;
        assert_eq!(
            parse_element(&sl, "e12^2").unwrap(),
            parse_element(&sl, "[[1,2,0],[0,1,0],[0,0,1]]").unwrap()
        );
        assert!(parse_element(&sl, "[[2,0,0],[0,1,0],[0,0,1]]").is_err());
    }
}
