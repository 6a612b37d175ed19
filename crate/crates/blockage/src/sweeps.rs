//! CSV output for the analytic sweeps.

use std::fmt::Write as _;

use blockage_core::sweep::{SweepGeometry, SweepRow};

use crate::error::{Error, Result};
use crate::spec::ModelSpec;

fn header(first: &[&str], models: &[ModelSpec]) -> String {
    let mut h = first.join(",");
    h.push_str(",blocked");
    for m in models {
        let _ = write!(h, ",loss_db_{}", m.column());
    }
    h.push('\n');
    h
}

fn rows(out: &mut String, prefix: &str, rows: &[SweepRow]) {
    for r in rows {
        let _ = write!(out, "{prefix}{:.6},{}", r.coordinate, u8::from(r.blocked));
        for l in &r.losses {
            let _ = write!(out, ",{l:.6}");
        }
        out.push('\n');
    }
}

fn kinds(models: &[ModelSpec]) -> Vec<blockage_core::diffraction::LossModelKind> {
    models.iter().map(|m| m.0).collect()
}

/// `offset_m,blocked,loss_db_<model>...`
pub fn crossing_csv(g: &SweepGeometry, models: &[ModelSpec], offsets: &[f64]) -> Result<String> {
    let r = g.crossing(&kinds(models), offsets).map_err(Error::config)?;
    let mut out = header(&["offset_m"], models);
    rows(&mut out, "", &r);
    Ok(out)
}

/// `distance_m,blocked,loss_db_<model>...`
pub fn position_csv(g: &SweepGeometry, models: &[ModelSpec], distances: &[f64]) -> Result<String> {
    let r = g.position(&kinds(models), distances).map_err(Error::config)?;
    let mut out = header(&["distance_m"], models);
    rows(&mut out, "", &r);
    Ok(out)
}

/// `frequency_hz,offset_m,blocked,loss_db_<model>...`
pub fn frequency_csv(g: &SweepGeometry, models: &[ModelSpec], frequencies: &[f64], offsets: &[f64]) -> Result<String> {
    let r = g.frequency(&kinds(models), frequencies, offsets).map_err(Error::config)?;
    let mut out = header(&["frequency_hz", "offset_m"], models);
    for (f, rs) in r {
        rows(&mut out, &format!("{f},"), &rs);
    }
    Ok(out)
}
