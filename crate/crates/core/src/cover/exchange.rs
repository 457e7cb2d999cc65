//! Plain-text set-cover exchange format.
//!
//! The first line holds the universe size; every further line lists the
//! universe indices covered by one candidate, separated by spaces. Lines
//! starting with `#` are comments.

use std::fmt::Write;

use super::{CoverInstance, SetSystem};
use crate::error::{Error, Result};

pub fn export_instance(inst: &CoverInstance) -> String {
    let mut out = String::new();
    writeln!(out, "{}", inst.ball().len()).unwrap();
    for c in inst.candidates() {
        let line: Vec<String> = c.members.iter().map(u32::to_string).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

pub fn parse_exchange(text: &str) -> Result<SetSystem> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.starts_with('#'));
    let head = lines
        .by_ref()
        .find(|l| !l.is_empty())
        .ok_or_else(|| Error::parse("set-cover exchange", text, "missing universe size"))?;
    let universe: usize = head.parse().map_err(|_| {
        Error::parse(
            "set-cover exchange",
            head,
            "universe size is not an integer",
        )
    })?;
    let mut sets = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let set: std::result::Result<Vec<u32>, _> =
            line.split_whitespace().map(str::parse::<u32>).collect();
        let mut set = set.map_err(|_| Error::parse("set-cover exchange", line, "bad index"))?;
        set.sort_unstable();
        set.dedup();
        sets.push(set);
    }
    SetSystem::new(universe, sets)
}
