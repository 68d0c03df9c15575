//! CSV output. Numbers are written in scientific notation with six
//! significant digits; undefined rates are left blank.

use std::io::Write;

use crate::manufactured::EocTable;
use crate::Result;

pub const CONVERGENCE_HEADER: &str =
    "level,h,err_u,rate_u,err_phi,rate_phi,err_q,rate_q,err_p,rate_p";
pub const SERIES_HEADER: &str = "t,min_u,max_u,gummel_iterations";

/// `1.23457e-03` style formatting.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.5e}");
    let (m, e) = s.split_once('e').expect("exponent");
    let e: i32 = e.parse().expect("exponent digits");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{m}e{sign}{:02}", e.abs())
}

fn opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

pub fn write_convergence(table: &EocTable, mut w: impl Write) -> Result<()> {
    writeln!(w, "{CONVERGENCE_HEADER}")?;
    for (r, rate) in table.rows.iter().zip(&table.rates) {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.level,
            sci(r.h),
            sci(r.err_u),
            opt(rate[0]),
            sci(r.err_phi),
            opt(rate[1]),
            sci(r.err_q),
            opt(rate[2]),
            sci(r.err_p),
            opt(rate[3])
        )?;
    }
    Ok(())
}

/// One row of the simulation time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub gummel_iterations: usize,
}

pub fn write_series(rows: &[SeriesRow], mut w: impl Write) -> Result<()> {
    writeln!(w, "{SERIES_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            sci(r.t),
            sci(r.min_u),
            sci(r.max_u),
            r.gummel_iterations
        )?;
    }
    Ok(())
}

/// Generic table with an integer level column followed by value/rate pairs.
pub fn write_level_table(
    header: &[&str],
    rows: &[(usize, f64, Vec<f64>)],
    rates: &[Vec<Option<f64>>],
    mut w: impl Write,
) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for ((level, h, errs), rate) in rows.iter().zip(rates) {
        let mut line = format!("{level},{}", sci(*h));
        for (e, r) in errs.iter().zip(rate) {
            line.push_str(&format!(",{},{}", sci(*e), opt(*r)));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
