use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::AnalysisError;
use crate::mna::{Bias, Cap, Companion, NewtonFailure, SolveError, SolverOptions, System};
use crate::netlist::Netlist;

/// Shunt capacitance from every node to ground during transient, F.
pub const CMIN: f64 = 1e-15;

/// Uniformly sampled node voltages over time.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    /// Non-ground node names in netlist order; columns of `samples`.
    pub nodes: Vec<String>,
    pub dt: f64,
    pub times: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
}

/// One signal against time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Waveform {
    pub fn trace(&self, node: &str) -> Option<Trace> {
        let col = self.nodes.iter().position(|n| n == node)?;
        Some(Trace {
            times: self.times.clone(),
            values: self.samples.iter().map(|row| row[col]).collect(),
        })
    }

    pub fn voltages_at(&self, k: usize) -> BTreeMap<String, f64> {
        self.nodes
            .iter()
            .cloned()
            .zip(self.samples[k].iter().copied())
            .collect()
    }
}

/// The value of an independent source at each sample time of `waveform`.
pub fn stimulus_trace(
    netlist: &Netlist,
    source: &str,
    waveform: &Waveform,
) -> Result<Trace, AnalysisError> {
    let spec = netlist
        .source(source)
        .ok_or_else(|| AnalysisError::UnknownSource(source.to_string()))?;
    Ok(Trace {
        times: waveform.times.clone(),
        values: waveform.times.iter().map(|t| spec.value_at(*t)).collect(),
    })
}

/// Fixed-step trapezoidal transient from the `t = 0` operating point.
pub fn transient(
    netlist: &Netlist,
    dt: f64,
    tstop: f64,
    options: &SolverOptions,
) -> Result<Waveform, AnalysisError> {
    if !(dt > 0.0) || !(tstop >= dt) {
        return Err(AnalysisError::InvalidArgument("need dt > 0 and tstop >= dt"));
    }
    let mut sys = System::compile(netlist).map_err(AnalysisError::Setup)?;
    for k in 0..sys.n_nodes {
        sys.caps.push(Cap {
            p: Some(k),
            n: None,
            c: CMIN,
        });
    }
    let (mut x, _) = sys
        .solve_dc(0.0, options, None)
        .map_err(|error| AnalysisError::TransientAt { time: 0.0, error })?;

    let cap_v = |x: &[f64], c: &Cap| {
        c.p.map_or(0.0, |i| x[i]) - c.n.map_or(0.0, |i| x[i])
    };
    let mut v_prev: Vec<f64> = sys.caps.iter().map(|c| cap_v(&x, c)).collect();
    let mut i_prev = vec![0.0; sys.caps.len()];

    let steps = libm::ceil(tstop / dt - 1e-9) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut samples = Vec::with_capacity(steps + 1);
    times.push(0.0);
    samples.push(x[..sys.n_nodes].to_vec());

    for k in 1..=steps {
        let time = k as f64 * dt;
        let bias = Bias {
            time,
            source_scale: 1.0,
            gmin: options.gmin,
        };
        let companion = Companion {
            rate: 2.0 / dt,
            v_prev: &v_prev,
            i_prev: &i_prev,
        };
        if let Err(e) = sys.newton(&mut x, &bias, Some(&companion), options) {
            let error = match e {
                NewtonFailure::Singular(j) => sys.singular_error(j),
                NewtonFailure::NoConvergence { residual } => SolveError::Convergence {
                    stage: crate::mna::Stage::WarmStart,
                    residual,
                },
            };
            return Err(AnalysisError::TransientAt { time, error });
        }
        let i_new: Vec<f64> = sys
            .caps
            .iter()
            .enumerate()
            .map(|(j, c)| companion.current(j, c, cap_v(&x, c)))
            .collect();
        i_prev = i_new;
        v_prev = sys.caps.iter().map(|c| cap_v(&x, c)).collect();
        times.push(time);
        samples.push(x[..sys.n_nodes].to_vec());
    }

    Ok(Waveform {
        nodes: netlist.node_names()[1..].to_vec(),
        dt,
        times,
        samples,
    })
}
