//! Swept DC, transient, and the measurements built on them.

use alloc::string::String;
use core::fmt;

use crate::mna::SolveError;

mod measure;
mod sweep;
mod transient;

pub use measure::{
    default_resolution, locate_transition, measure_delay, measure_hysteresis, DelayReport,
    HysteresisReport, Transition,
};
pub use sweep::{dc_sweep, with_source, Direction, SweepCurve, SweepPoint};
pub use transient::{stimulus_trace, transient, Trace, Waveform, CMIN};

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    /// Named source is missing or is not an independent source.
    UnknownSource(String),
    UnknownNode(String),
    InvalidArgument(&'static str),
    /// DC solve failed at a sweep or bisection point.
    SolveAt { stimulus: f64, error: SolveError },
    /// Newton failed at a transient time point.
    TransientAt { time: f64, error: SolveError },
    /// A sweep curve did not cross the threshold exactly once.
    Crossings { direction: Direction, count: usize },
    /// No output threshold crossing between an input edge and the next one.
    MissingOutputCrossing { edge_time: f64 },
    /// The stimulus has no usable 50% edges of the required kind.
    NoEdges,
    Setup(SolveError),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::UnknownSource(s) => write!(f, "no independent source named {s}"),
            AnalysisError::UnknownNode(n) => write!(f, "no node named {n}"),
            AnalysisError::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            AnalysisError::SolveAt { stimulus, error } => {
                write!(f, "at stimulus {stimulus:.6e}: {error}")
            }
            AnalysisError::TransientAt { time, error } => {
                write!(f, "at t={time:.6e} s: {error}")
            }
            AnalysisError::Crossings { direction, count } => write!(
                f,
                "{direction:?} sweep crosses the threshold {count} times, expected exactly 1"
            ),
            AnalysisError::MissingOutputCrossing { edge_time } => write!(
                f,
                "output does not cross the threshold after the input edge at t={edge_time:.6e} s"
            ),
            AnalysisError::NoEdges => write!(f, "stimulus has no rising and falling 50% edges"),
            AnalysisError::Setup(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for AnalysisError {}
