//! Delimited and JSON output of residual scans. Exact integers and reals are
//! written as decimal strings carrying every significant digit, so reading a
//! file back at the scan's precision reproduces the records exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{ResidualScan, ScanRecord};
use crate::error::Result;
use crate::precision::PrecReal;

/// One record as text, in column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub x: u64,
    pub exact: String,
    pub main: String,
    pub second: String,
    pub two_term: String,
    pub residual_two: String,
    pub residual_main_only: String,
}

impl From<&ScanRecord> for ScanRow {
    fn from(r: &ScanRecord) -> Self {
        Self {
            x: r.x,
            exact: r.exact.to_string(),
            main: r.main.to_decimal(),
            second: r.second.to_decimal(),
            two_term: r.two_term.to_decimal(),
            residual_two: r.residual_two.to_decimal(),
            residual_main_only: r.residual_main_only.to_decimal(),
        }
    }
}

impl ScanRow {
    pub fn parse(&self, precision: usize) -> Result<ScanRecord> {
        let real = |s: &str| PrecReal::parse(s, precision);
        Ok(ScanRecord {
            x: self.x,
            exact: self.exact.parse()?,
            main: real(&self.main)?,
            second: real(&self.second)?,
            two_term: real(&self.two_term)?,
            residual_two: real(&self.residual_two)?,
            residual_main_only: real(&self.residual_main_only)?,
        })
    }
}

fn write_delimited<W: Write>(scan: &ResidualScan, w: W, delimiter: u8) -> Result<()> {
    let mut out = csv::WriterBuilder::new().delimiter(delimiter).from_writer(w);
    for r in &scan.records {
        out.serialize(ScanRow::from(r))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv<W: Write>(scan: &ResidualScan, w: W) -> Result<()> {
    write_delimited(scan, w, b',')
}

pub fn write_tsv<W: Write>(scan: &ResidualScan, w: W) -> Result<()> {
    write_delimited(scan, w, b'\t')
}

pub fn write_json<W: Write>(scan: &ResidualScan, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, scan)?;
    Ok(())
}

/// Records from CSV written by [`write_csv`], reals parsed at `precision` bits.
pub fn read_csv<R: Read>(r: R, precision: usize) -> Result<Vec<ScanRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize::<ScanRow>().map(|row| row?.parse(precision)).collect()
}
