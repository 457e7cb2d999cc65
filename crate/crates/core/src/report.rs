//! Consolidated per-radius bound reports and plain tables for artifacts.

use num_rational::{BigRational, Rational64};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::doubling::DoublingReport;
use crate::error::{Error, Result};
use crate::numeric::{fmt_g12, Surd};
use crate::walk::{
    c_speed_bound, t_speed_bound, thm_a_bound, CSpeedBound, Certification, MonotoneTable,
    SpeedTable, TSpeedBound,
};

/// Ingredients of the t-speed bound.
#[derive(Clone, Debug)]
pub struct TSpeedInput {
    pub f: MonotoneTable<u64>,
    pub f_label: String,
    pub c: BigRational,
    pub min_mu: Rational64,
    pub certification: Certification,
}

#[derive(Clone, Debug, Default)]
pub struct BoundInputs {
    pub s_size: usize,
    /// `(r, value, how)` from explicit roster covers
    pub roster_upper: Option<Vec<(usize, u64, String)>>,
    /// `(r, size)` of kernel-coset covers from a map onto `Z`
    pub hom_upper: Option<Vec<(usize, u64)>>,
    pub doubling: Option<DoublingReport>,
    pub speed: Option<SpeedTable>,
    pub t_speed: Option<TSpeedInput>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub r: usize,
    pub thm_a: Surd,
    pub t_speed: TSpeedBound,
    pub c_speed: CSpeedBound,
    pub doubling: BigRational,
    pub doubling_in_range: bool,
    pub roster_upper: Option<u64>,
    pub hom_upper: Option<u64>,
    pub flags: Vec<String>,
}

impl BoundRow {
    pub fn upper(&self) -> Option<u64> {
        self.roster_upper.into_iter().chain(self.hom_upper).min()
    }

    /// The t-speed value when its hypothesis was certified, else zero.
    fn t_speed_counted(&self) -> Surd {
        if self.t_speed.certified == Some(true) {
            self.t_speed.value.clone()
        } else {
            Surd::zero()
        }
    }

    /// Largest lower bound; an uncertified t-speed value is left out.
    pub fn lower(&self) -> f64 {
        [
            self.thm_a.to_f64(),
            self.t_speed_counted().to_f64(),
            self.c_speed.value.to_f64(),
            self.doubling.to_f64().unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Every lower bound is at most every upper bound, decided exactly.
    pub fn consistent(&self) -> bool {
        let Some(u) = self.upper() else {
            return true;
        };
        self.thm_a.le_integer(u)
            && self.t_speed_counted().le_integer(u)
            && self.c_speed.value.le_integer(u)
            && self.doubling <= BigRational::from_integer(u.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeSummary {
    /// least-squares slope against `r`
    pub lower_slope: f64,
    pub upper_slope: f64,
    /// least-squares slope of `log value` against `log r`, over `r >= 1`
    pub lower_exponent: f64,
    pub upper_exponent: f64,
    /// both exponents within `LINEAR_TOLERANCE` of 1
    pub both_linear: bool,
}

pub const LINEAR_TOLERANCE: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub group: String,
    pub rows: Vec<BoundRow>,
    pub summary: Option<EnvelopeSummary>,
}

impl BoundReport {
    pub fn consistent(&self) -> bool {
        self.rows.iter().all(BoundRow::consistent)
    }
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

fn summarize(rows: &[BoundRow]) -> Option<EnvelopeSummary> {
    let pts: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter_map(|row| Some((row.r as f64, row.lower(), row.upper()? as f64)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let lin = |sel: fn(&(f64, f64, f64)) -> f64| {
        slope(&pts.iter().map(|p| (p.0, sel(p))).collect::<Vec<_>>())
    };
    let exp = |sel: fn(&(f64, f64, f64)) -> f64| {
        let v: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| p.0 >= 1.0 && sel(p) > 0.0)
            .map(|p| (p.0.ln(), sel(p).ln()))
            .collect();
        if v.len() < 2 {
            f64::NAN
        } else {
            slope(&v)
        }
    };
    let lower_exponent = exp(|p| p.1);
    let upper_exponent = exp(|p| p.2);
    Some(EnvelopeSummary {
        lower_slope: lin(|p| p.1),
        upper_slope: lin(|p| p.2),
        lower_exponent,
        upper_exponent,
        both_linear: (lower_exponent - 1.0).abs() <= LINEAR_TOLERANCE
            && (upper_exponent - 1.0).abs() <= LINEAR_TOLERANCE,
    })
}

/// One row per `r`, with a check that no lower bound exceeds an upper one.
pub fn assemble_bound_report(
    group: &str,
    radii: &[usize],
    inputs: &BoundInputs,
) -> Result<BoundReport> {
    if radii.is_empty() {
        return Ok(BoundReport {
            group: group.to_string(),
            rows: Vec::new(),
            summary: None,
        });
    }
    let mut missing = Vec::new();
    if inputs.roster_upper.is_none() && inputs.hom_upper.is_none() {
        missing.push("upper (roster or hom)");
    }
    if inputs.doubling.is_none() {
        missing.push("doubling");
    }
    if inputs.speed.is_none() {
        missing.push("speed");
    }
    if inputs.t_speed.is_none() {
        missing.push("t_speed");
    }
    if inputs.s_size == 0 {
        missing.push("s_size");
    }
    if !missing.is_empty() {
        return Err(Error::invalid(format!(
            "missing component tables: {}",
            missing.join(", ")
        )));
    }
    let doubling = inputs.doubling.as_ref().expect("checked");
    let speed = inputs.speed.as_ref().expect("checked");
    let ts = inputs.t_speed.as_ref().expect("checked");
    let lookup = |r: usize| {
        inputs
            .roster_upper
            .as_ref()
            .and_then(|v| v.iter().find(|x| x.0 == r).map(|x| x.1))
    };
    let hom = |r: usize| {
        inputs
            .hom_upper
            .as_ref()
            .and_then(|v| v.iter().find(|x| x.0 == r).map(|x| x.1))
    };
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let t_speed = t_speed_bound(&ts.f, &ts.c, ts.min_mu, r as u64, Some(&ts.certification));
        let c_speed = c_speed_bound(&speed.smoothed, r as u64, inputs.s_size);
        let (d, in_range) = doubling.bound(r);
        let mut flags = vec![t_speed.flag()];
        if !in_range {
            flags.push(format!(
                "doubling outside ({}, {}]",
                doubling.r0, doubling.r_max
            ));
        }
        if c_speed.capped {
            flags.push("c-speed capped by speed table".into());
        }
        let row = BoundRow {
            r,
            thm_a: thm_a_bound(r as u64, inputs.s_size),
            t_speed,
            c_speed,
            doubling: d,
            doubling_in_range: in_range,
            roster_upper: lookup(r),
            hom_upper: hom(r),
            flags,
        };
        if !row.consistent() {
            return Err(Error::BoundViolation {
                r: r as u64,
                lower: fmt_g12(row.lower()),
                upper: row.upper().map(|u| u.to_string()).unwrap_or_default(),
            });
        }
        rows.push(row);
    }
    let summary = summarize(&rows);
    Ok(BoundReport {
        group: group.to_string(),
        rows,
        summary,
    })
}

/// A rectangular table of preformatted cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width for table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8 cells")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "table": self.name,
            "columns": self.columns,
            "rows": self.rows,
        })
    }

    /// Fixed-width rendering for terminals.
    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = line(&self.columns);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_range_is_empty_report() {
        let r = assemble_bound_report("Z", &[], &BoundInputs::default()).unwrap();
        assert!(r.rows.is_empty());
    }

    #[test]
    fn missing_tables_are_named() {
        let e = assemble_bound_report("Z", &[1], &BoundInputs::default()).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("doubling") && msg.contains("speed") && msg.contains("upper"));
    }

    #[test]
    fn csv_quotes_cells_with_commas() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec!["(1,0)".into(), "1/2".into()]);
        assert_eq!(t.to_csv(), "a,b\n\"(1,0)\",1/2\n");
        assert_eq!(t.to_json()["rows"][0][1], "1/2");
    }

    #[test]
    fn slopes() {
        let pts: Vec<(f64, f64)> = (1..5).map(|x| (x as f64, 2.0 * x as f64 + 1.0)).collect();
        assert!((slope(&pts) - 2.0).abs() < 1e-12);
    }
}
