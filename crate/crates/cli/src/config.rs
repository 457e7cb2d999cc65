//! INI experiment files and flag/file merging.
//!
//! Keys live in sections, e.g. `[walk] seed = 7`, and are addressed as
//! `walk.seed`. Flags on the command line win over the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Every accepted `section.key` with a short description.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    (
        "group.spec",
        "registry name, e.g. Z^2, free:2, heisenberg, lamplighter:2, sl3z",
    ),
    (
        "group.gens",
        "custom symmetric generating set, comma separated",
    ),
    (
        "roster.subgroups",
        "preset name or subgroup descriptors separated by ';'",
    ),
    ("radius.r", "radius, range a..b or list a,b,c"),
    (
        "subgroup.descriptor",
        "subgroup descriptor for schreier, lyons, decay, sandwich",
    ),
    ("subgroup.element", "coset representative for lyons"),
    (
        "subgroup.gens",
        "generating set of the subgroup for sandwich",
    ),
    ("walk.measure", "uniform, lazy, half-lazy or custom:g=p;..."),
    ("walk.n_max", "walk length"),
    ("walk.n_list", "step counts, comma separated"),
    ("walk.trials", "Monte Carlo trials"),
    ("walk.seed", "seed for every stochastic command"),
    ("walk.epsilon", "cautiousness probe radius factor"),
    ("solver.mode", "greedy, exact, lp or all"),
    ("solver.node_budget", "branch-and-bound node budget"),
    (
        "solver.chain_budget",
        "state budget of exact walk distributions",
    ),
    ("solver.dedup", "canonical or pairwise coset deduplication"),
    (
        "bounds.f",
        "radius function for the t-speed bound: linear or sqrt:K",
    ),
    ("bounds.c", "probability threshold for the t-speed bound"),
    ("bounds.speed_n", "length of the speed table"),
    ("output.dir", "artifact directory"),
];

#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let ini =
            ini::Ini::load_from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        let mut values = BTreeMap::new();
        for (section, props) in ini.iter() {
            for (k, v) in props.iter() {
                let key = match section {
                    Some(s) => format!("{s}.{k}"),
                    None => k.to_string(),
                };
                if !KNOWN_KEYS.iter().any(|(name, _)| *name == key) {
                    return Err(CliError::Usage(format!("config: unknown field `{key}`")));
                }
                values.insert(key, v.trim().to_string());
            }
        }
        Ok(Settings { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        debug_assert!(
            KNOWN_KEYS.iter().any(|(k, _)| *k == key),
            "unregistered key {key}"
        );
        self.values.get(key).map(String::as_str)
    }

    /// Flag value, else file value, else `None`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config field `{key}`: {e}"))),
            None => Ok(None),
        }
    }

    pub fn require<T: FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        flag_name: &str,
    ) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.pick(flag, key)?
            .ok_or_else(|| CliError::Usage(format!("missing {flag_name} (config field `{key}`)")))
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

/// `5`, `1..16` (inclusive), `0..=4` or `1,2,4`. A range with `a > b` is empty.
pub fn parse_radii(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim();
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad radius `{t}`: {e}"))
    };
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        return Ok((a..=b).collect());
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(num)
        .collect()
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad count `{t}`: {e}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_become_dotted_keys() {
        let s = Settings::parse("[group]\nspec = Z^2\n[walk]\nseed = 7\n").unwrap();
        assert_eq!(s.get("group.spec"), Some("Z^2"));
        assert_eq!(s.pick::<u64>(None, "walk.seed").unwrap(), Some(7));
        assert_eq!(s.pick(Some(9u64), "walk.seed").unwrap(), Some(9));
    }

    #[test]
    fn unknown_and_malformed_fields_are_named() {
        let e = Settings::parse("[walk]\nsede = 7\n").unwrap_err();
        assert!(e.to_string().contains("walk.sede"));
        let s = Settings::parse("[walk]\ntrials = many\n").unwrap();
        let e = s.pick::<u64>(None, "walk.trials").unwrap_err();
        assert!(e.to_string().contains("walk.trials"));
    }

    #[test]
    fn radii() {
        assert_eq!(parse_radii("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_radii("0..=2").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_radii("3").unwrap(), vec![3]);
        assert!(parse_radii("5..4").unwrap().is_empty());
        assert_eq!(parse_radii("1,4").unwrap(), vec![1, 4]);
    }
}
