//! Text emission: CSV tables and `key=value` report lines.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hystcmp_core::analyses::{SweepCurve, Waveform};

use crate::error::CliError;

/// CSV number format: 13 significant digits, scientific.
pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn sweep_csv(curve: &SweepCurve, direction_column: bool, header: bool, out: &mut String) {
    if header {
        if direction_column {
            out.push_str("direction,");
        }
        out.push_str("stimulus");
        for n in &curve.nodes {
            let _ = write!(out, ",{n}");
        }
        out.push('\n');
    }
    let dir = match curve.direction {
        hystcmp_core::analyses::Direction::Up => "up",
        hystcmp_core::analyses::Direction::Down => "down",
    };
    for s in &curve.samples {
        if direction_column {
            let _ = write!(out, "{dir},");
        }
        out.push_str(&num(s.stimulus));
        for n in &curve.nodes {
            let v = s.solution.voltage(n).unwrap_or(f64::NAN);
            let _ = write!(out, ",{}", num(v));
        }
        out.push('\n');
    }
}

pub fn waveform_csv(w: &Waveform, out: &mut String) {
    out.push_str("time");
    for n in &w.nodes {
        let _ = write!(out, ",{n}");
    }
    out.push('\n');
    for (t, row) in w.times.iter().zip(&w.samples) {
        out.push_str(&num(*t));
        for v in row {
            let _ = write!(out, ",{}", num(*v));
        }
        out.push('\n');
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// SI-suffixed value rounded to 6 significant digits, for human-readable lines.
pub fn si(x: f64) -> String {
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    hystcmp_core::units::format_value(rounded)
}
