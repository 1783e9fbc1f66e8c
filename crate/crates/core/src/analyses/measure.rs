//! Hysteresis transitions from bidirectional sweeps, and propagation delay
//! from transient traces.

use alloc::vec::Vec;

use super::sweep::{solve_at, Direction, SweepCurve};
use super::transient::Trace;
use super::AnalysisError;
use crate::mna::{Solution, SolverOptions};
use crate::netlist::Netlist;

/// `max(1 nA, step / 100)`.
pub fn default_resolution(step: f64) -> f64 {
    (step / 100.0).max(1e-9)
}

/// One located output transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Midpoint of the final bracket.
    pub stimulus: f64,
    /// Final bracket, `lo` on the pre-transition side.
    pub lo: f64,
    pub hi: f64,
    /// Operating point at `lo`, still on the originating branch.
    pub before: Solution,
    /// Operating point at `hi`, after the output has switched.
    pub after: Solution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisReport {
    /// Up-sweep transition.
    pub i_t1: f64,
    /// Down-sweep transition.
    pub i_t2: f64,
    pub i_hy: f64,
    pub resolution: f64,
    pub threshold: f64,
    pub up: Transition,
    pub down: Transition,
}

fn crossings(curve: &SweepCurve, node: &str, threshold: f64) -> Result<Vec<usize>, AnalysisError> {
    let v = curve
        .trace(node)
        .ok_or_else(|| AnalysisError::UnknownNode(node.into()))?;
    Ok((0..v.len().saturating_sub(1))
        .filter(|&k| (v[k] >= threshold) != (v[k + 1] >= threshold))
        .collect())
}

/// Locate the single threshold crossing of `curve` by bisection between the
/// bracketing sweep samples, each probe warm-started from the pre-transition
/// side, until the bracket is no wider than `refine_to`.
pub fn locate_transition(
    curve: &SweepCurve,
    output_node: &str,
    threshold: f64,
    refine_to: f64,
    netlist: &Netlist,
    options: &SolverOptions,
) -> Result<Transition, AnalysisError> {
    if !(refine_to > 0.0) {
        return Err(AnalysisError::InvalidArgument("refinement resolution must be positive"));
    }
    let found = crossings(curve, output_node, threshold)?;
    if found.len() != 1 {
        return Err(AnalysisError::Crossings {
            direction: curve.direction,
            count: found.len(),
        });
    }
    let k = found[0];
    let src = curve.source.as_str();
    let (a, b) = (&curve.samples[k], &curve.samples[k + 1]);
    let out = |s: &Solution| {
        s.voltage(output_node)
            .ok_or_else(|| AnalysisError::UnknownNode(output_node.into()))
    };
    let side = out(&a.solution)? >= threshold;

    let mut before = solve_at(netlist, src, a.stimulus, options, Some(&a.solution.node_voltages))?;
    let mut after = solve_at(netlist, src, b.stimulus, options, Some(&b.solution.node_voltages))?;
    let (mut lo, mut hi) = (a.stimulus, b.stimulus);
    while (hi - lo).abs() > refine_to {
        let mid = 0.5 * (lo + hi);
        let sol = solve_at(netlist, src, mid, options, Some(&before.node_voltages))?;
        if (out(&sol)? >= threshold) == side {
            lo = mid;
            before = sol;
        } else {
            hi = mid;
            after = sol;
        }
    }
    Ok(Transition {
        stimulus: 0.5 * (lo + hi),
        lo,
        hi,
        before,
        after,
    })
}

/// Transition currents of an up and a down sweep and their difference.
pub fn measure_hysteresis(
    up: &SweepCurve,
    down: &SweepCurve,
    output_node: &str,
    threshold: f64,
    refine_to: f64,
    netlist: &Netlist,
    options: &SolverOptions,
) -> Result<HysteresisReport, AnalysisError> {
    if up.direction != Direction::Up || down.direction != Direction::Down {
        return Err(AnalysisError::InvalidArgument("expected an up and a down sweep"));
    }
    let t_up = locate_transition(up, output_node, threshold, refine_to, netlist, options)?;
    let t_down = locate_transition(down, output_node, threshold, refine_to, netlist, options)?;
    Ok(HysteresisReport {
        i_t1: t_up.stimulus,
        i_t2: t_down.stimulus,
        i_hy: (t_up.stimulus - t_down.stimulus).abs(),
        resolution: refine_to,
        threshold,
        up: t_up,
        down: t_down,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayReport {
    /// Mean delay to output rising crossings.
    pub t_plh: f64,
    /// Mean delay to output falling crossings.
    pub t_phl: f64,
    pub average: f64,
}

// Linear-interpolated crossings of `level`: (time, rising).
fn level_crossings(trace: &Trace, level: f64) -> Vec<(f64, bool)> {
    let (t, v) = (&trace.times, &trace.values);
    (0..v.len().saturating_sub(1))
        .filter(|&k| (v[k] >= level) != (v[k + 1] >= level))
        .map(|k| {
            let frac = (level - v[k]) / (v[k + 1] - v[k]);
            (t[k] + frac * (t[k + 1] - t[k]), v[k + 1] > v[k])
        })
        .collect()
}

/// Propagation delay from the 50% edges of `input` to the `vdd / 2`
/// crossings of `output`. The input 50% level is the midpoint of its range.
pub fn measure_delay(input: &Trace, output: &Trace, vdd: f64) -> Result<DelayReport, AnalysisError> {
    let (lo, hi) = input
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !(hi > lo) {
        return Err(AnalysisError::NoEdges);
    }
    let edges = level_crossings(input, 0.5 * (lo + hi));
    let outs = level_crossings(output, 0.5 * vdd);

    let (mut rise, mut fall) = (Vec::new(), Vec::new());
    for (i, &(te, _)) in edges.iter().enumerate() {
        let next = edges.get(i + 1).map_or(f64::INFINITY, |e| e.0);
        let Some(&(to, rising)) = outs.iter().find(|(to, _)| *to >= te && *to < next) else {
            return Err(AnalysisError::MissingOutputCrossing { edge_time: te });
        };
        if rising {
            rise.push(to - te);
        } else {
            fall.push(to - te);
        }
    }
    if rise.is_empty() || fall.is_empty() {
        return Err(AnalysisError::NoEdges);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (t_plh, t_phl) = (mean(&rise), mean(&fall));
    Ok(DelayReport {
        t_plh,
        t_phl,
        average: 0.5 * (t_plh + t_phl),
    })
}
