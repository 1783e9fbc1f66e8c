use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::AnalysisError;
use crate::mna::{dc_solve, Solution, SolverOptions};
use crate::netlist::{Netlist, SourceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub stimulus: f64,
    pub solution: Solution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCurve {
    pub source: String,
    pub direction: Direction,
    /// Non-ground node names in netlist order.
    pub nodes: Vec<String>,
    pub samples: Vec<SweepPoint>,
}

impl SweepCurve {
    pub fn stimulus(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.stimulus).collect()
    }

    pub fn trace(&self, node: &str) -> Option<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| s.solution.voltage(node))
            .collect()
    }
}

/// A copy of the netlist with independent source `source` set to DC `value`.
pub fn with_source(netlist: &Netlist, source: &str, value: f64) -> Option<Netlist> {
    let mut nl = netlist.clone();
    *nl.source_mut(source)? = SourceSpec::Dc(value);
    Some(nl)
}

pub(crate) fn solve_at(
    netlist: &Netlist,
    source: &str,
    value: f64,
    options: &SolverOptions,
    guess: Option<&BTreeMap<String, f64>>,
) -> Result<Solution, AnalysisError> {
    let nl = with_source(netlist, source, value)
        .ok_or_else(|| AnalysisError::UnknownSource(source.to_string()))?;
    dc_solve(&nl, options, guess).map_err(|error| AnalysisError::SolveAt {
        stimulus: value,
        error,
    })
}

/// Sweep the DC value of `source` from `from` to `to` in steps of `step`.
/// Each point is warm-started from the previous one; the first is solved cold.
pub fn dc_sweep(
    netlist: &Netlist,
    source: &str,
    from: f64,
    to: f64,
    step: f64,
    options: &SolverOptions,
) -> Result<SweepCurve, AnalysisError> {
    if !(step > 0.0) || !from.is_finite() || !to.is_finite() {
        return Err(AnalysisError::InvalidArgument("sweep step must be positive"));
    }
    match netlist.source(source) {
        Some(SourceSpec::Dc(_)) => {}
        _ => return Err(AnalysisError::UnknownSource(source.to_string())),
    }
    let (direction, sign) = if to >= from {
        (Direction::Up, 1.0)
    } else {
        (Direction::Down, -1.0)
    };
    let n = libm::floor((to - from).abs() / step + 1e-9) as usize;

    let mut samples: Vec<SweepPoint> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let value = from + sign * k as f64 * step;
        let guess = samples.last().map(|p| &p.solution.node_voltages);
        let sol = solve_at(netlist, source, value, options, guess)?;
        samples.push(SweepPoint {
            stimulus: value,
            solution: sol,
        });
    }
    Ok(SweepCurve {
        source: source.to_string(),
        direction,
        nodes: netlist.node_names()[1..].to_vec(),
        samples,
    })
}
