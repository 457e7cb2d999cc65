//! Named subgroup rosters.
//!
//! | name      | groups      | members                                               |
//! |-----------|-------------|-------------------------------------------------------|
//! | `trivial` | all         | the trivial subgroup                                  |
//! | `lines2`  | `Z^2`       | lines along (1,0), (0,1), (1,1), (1,-1), plus trivial |
//! | `axes`    | `Z^d`       | kernels of the coordinate projections, plus trivial   |
//! | `cyclic`  | `F_k`       | `<x>` for generators and products `xy^±1`, plus trivial |
//! | `kernels` | Heisenberg, lamplighter | kernels of small maps to `Z`, plus trivial |
//! | `shapes`  | `SL(3,Z)`   | upper and lower triangular, plus trivial              |
//! | `default` | all         | the family's preset from the rows above               |

use crate::error::{Error, Result};
use crate::group::{Element, Family, GENERATOR_LETTERS};
use crate::subgroup::SubgroupOracle;

pub const ROSTER_PRESETS: [&str; 7] = [
    "trivial", "lines2", "axes", "cyclic", "kernels", "shapes", "default",
];

/// Descriptors of a named roster, in roster order.
pub fn roster_descriptors(family: Family, name: &str) -> Result<Vec<String>> {
    let unsupported = || {
        Error::unsupported(format!(
            "roster preset {name:?} is not defined for {family}"
        ))
    };
    let mut out: Vec<String> = match (name, family) {
        ("trivial", _) => vec![],
        ("lines2", Family::FreeAbelian { rank: 2 }) => {
            ["[[1,0]]", "[[0,1]]", "[[1,1]]", "[[1,-1]]"]
                .iter()
                .map(|b| format!("lattice:{b}"))
                .collect()
        }
        ("axes", Family::FreeAbelian { rank }) => (0..rank)
            .map(|i| {
                let row: Vec<String> = (0..rank)
                    .map(|j| if i == j { "1" } else { "0" }.to_string())
                    .collect();
                format!("kernel:Z^{rank}->Z:[{}]", row.join(","))
            })
            .collect(),
        ("cyclic", Family::Free { rank }) => {
            let letters = &GENERATOR_LETTERS[..rank];
            let mut v: Vec<String> = letters.iter().map(|x| format!("freegens:[{x}]")).collect();
            for (i, x) in letters.iter().enumerate() {
                for y in &letters[i + 1..] {
                    v.push(format!("freegens:[{x}{y}]"));
                    v.push(format!("freegens:[{x}{y}^-1]"));
                }
            }
            v
        }
        ("kernels", Family::Heisenberg) => ["[1,0]", "[0,1]", "[1,1]", "[1,-1]"]
            .iter()
            .map(|m| format!("kernel:heisenberg->Z:{m}"))
            .collect(),
        ("kernels", Family::Lamplighter { base }) => {
            vec![format!("kernel:lamplighter:{base}->Z:[1,0]")]
        }
        ("shapes", Family::Sl3z) => vec![
            "shape:upper-triangular".to_string(),
            "shape:lower-triangular".to_string(),
        ],
        ("default", f) => {
            let preset = match f {
                Family::FreeAbelian { rank: 2 } => "lines2",
                Family::FreeAbelian { .. } => "axes",
                Family::Free { .. } => "cyclic",
                Family::Heisenberg | Family::Lamplighter { .. } => "kernels",
                Family::Sl3z => "shapes",
            };
            return roster_descriptors(f, preset);
        }
        _ => return Err(unsupported()),
    };
    out.push("trivial".into());
    // Z^1 lines through the origin have finite index; only trivial remains
    if family == (Family::FreeAbelian { rank: 1 }) {
        out.retain(|d| d == "trivial");
    }
    Ok(out)
}

/// Parses a roster given as a preset name or as descriptors separated by `;`.
pub fn parse_roster(family: Family, spec: &str) -> Result<Vec<SubgroupOracle>> {
    let spec = spec.trim();
    let descriptors = if ROSTER_PRESETS.contains(&spec) {
        roster_descriptors(family, spec)?
    } else {
        spec.split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    };
    if descriptors.is_empty() {
        return Err(Error::invalid("empty subgroup roster"));
    }
    descriptors
        .iter()
        .map(|d| SubgroupOracle::parse(family, d))
        .collect()
}

/// Parses a measure-free step list like `a,a^-1,b,b^-1`, used by custom
/// markings on the command line.
pub fn parse_element_list(family: Family, spec: &str) -> Result<Vec<Element>> {
    split_top_level(spec)
        .into_iter()
        .map(|tok| family.parse_element(tok))
        .collect()
}

/// Splits on commas that are not nested inside brackets or parentheses.
pub fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out.retain(|t| !t.is_empty());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_for_their_families() {
        let cases = [
            ("Z", "default", 1),
            ("Z^2", "lines2", 5),
            ("Z^3", "default", 4),
            ("free:2", "cyclic", 5),
            ("free:3", "cyclic", 10),
            ("heisenberg", "default", 5),
            ("lamplighter:2", "kernels", 2),
            ("sl3z", "default", 3),
        ];
        for (g, preset, n) in cases {
            let f = Family::parse(g).unwrap();
            assert_eq!(parse_roster(f, preset).unwrap().len(), n, "{g} {preset}");
        }
        assert!(parse_roster(Family::Heisenberg, "lines2").is_err());
    }

    #[test]
    fn descriptor_lists() {
        let f = Family::FreeAbelian { rank: 2 };
        let r = parse_roster(f, "lattice:[[1,2]]; trivial").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(split_top_level("(1,0),(-1,0)"), vec!["(1,0)", "(-1,0)"]);
    }
}
