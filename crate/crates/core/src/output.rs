//! Comma-separated tables for trajectories and experiment aggregates.
//!
//! Reals are written with six significant digits and integers verbatim, so
//! equal inputs always give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cascade::CascadeResult;
use crate::error::{Error, Result};
use crate::experiments::{ButterflyStats, PhaseGrid, Summary, SweepResult};

/// Formats a real with six significant digits in positional notation, or in
/// exponent notation when the magnitude is below 1e-5 or at least 1e15.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-5..15).contains(&exp) {
        return sci;
    }
    let rounded: f64 = sci.parse().unwrap();
    let decimals = (5 - exp).max(0) as usize;
    format!("{rounded:.decimals$}")
}

fn summary_cols(out: &mut String, s: &Summary) {
    write!(out, ",{},{}", fmt_real(s.mean), fmt_real(s.std)).unwrap();
}

/// Long-format table of an aggregate, one row per point, cell or bin.
pub trait Table {
    fn to_table(&self) -> String;
}

pub fn timeseries_table(result: &CascadeResult) -> String {
    let mut out = String::from("step,market_index,active_investors,liquidations\n");
    for (t, (idx, active)) in result
        .index_trajectory
        .iter()
        .zip(&result.active_trajectory)
        .enumerate()
    {
        let liquidations = if t >= 2 {
            result.steps[t - 2].liquidated.len()
        } else {
            0
        };
        writeln!(out, "{t},{},{active},{liquidations}", fmt_real(*idx)).unwrap();
    }
    out
}

impl Table for SweepResult {
    fn to_table(&self) -> String {
        let mut out = format!(
            "{},replicas,tau_mean,tau_std,p_inf_mean,p_inf_std,n_inf_mean,n_inf_std\n",
            self.axis.name()
        );
        for p in &self.points {
            write!(out, "{},{}", fmt_real(p.value), p.runs.len()).unwrap();
            summary_cols(&mut out, &p.tau);
            summary_cols(&mut out, &p.p_inf);
            summary_cols(&mut out, &p.n_inf);
            out.push('\n');
        }
        out
    }
}

impl Table for PhaseGrid {
    fn to_table(&self) -> String {
        let mut out = format!(
            "{},{},replicas,tau_mean,tau_std,p_inf_mean,p_inf_std,n_inf_mean,n_inf_std,shocked_index_mean,shocked_index_std\n",
            self.axis1.name(),
            self.axis2.name()
        );
        for (i1, x) in self.values1.iter().enumerate() {
            for (i2, y) in self.values2.iter().enumerate() {
                let c = self.cell(i1, i2);
                write!(out, "{},{},{}", fmt_real(*x), fmt_real(*y), self.replicas).unwrap();
                summary_cols(&mut out, &c.tau);
                summary_cols(&mut out, &c.p_inf);
                summary_cols(&mut out, &c.n_inf);
                summary_cols(&mut out, &c.shocked_index);
                out.push('\n');
            }
        }
        out
    }
}

impl Table for ButterflyStats {
    fn to_table(&self) -> String {
        let mut out = String::from("margin_times,shares,decline_mean,decline_std\n");
        for b in &self.bins {
            write!(out, "{},{}", b.margin_times, b.shares).unwrap();
            summary_cols(&mut out, &b.decline);
            out.push('\n');
        }
        out
    }
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_timeseries(result: &CascadeResult, path: &Path) -> Result<()> {
    write_text(path, &timeseries_table(result))
}

pub fn write_grid<T: Table + ?Sized>(grid: &T, path: &Path) -> Result<()> {
    write_text(path, &grid.to_table())
}
