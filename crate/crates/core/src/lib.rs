//! Desk-scale analog circuit simulation for current comparators.
//!
//! The crate is `no_std` (with `alloc`) and contains everything that does not
//! touch the filesystem or a terminal:
//!
//! - [`device`]: level-1 (square-law) MOSFET evaluation
//! - [`netlist`]: a SPICE-like netlist subset, parser and writer
//! - [`mna`]: nonlinear DC operating point by modified nodal analysis
//! - [`analyses`]: swept DC, transient, hysteresis and delay measurement
//! - [`comparator`]: netlist generators for the latch-based current comparator
//! - [`analytics`]: closed-form latch and transition-current expressions
//! - [`audit`]: independent KCL re-summation of a solved circuit
//!
//! ```
//! use hystcmp_core::{mna, netlist};
//!
//! let nl = netlist::parse_netlist("divider\nV1 1 0 DC 3\nR1 1 2 1k\nR2 2 0 1k\n").unwrap();
//! let sol = mna::dc_solve(&nl, &mna::SolverOptions::default(), None).unwrap();
//! assert!((sol.voltage("2").unwrap() - 1.5).abs() < 1e-9);
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analyses;
pub mod analytics;
pub mod audit;
pub mod comparator;
pub mod device;
mod linalg;
pub mod mna;
pub mod netlist;
pub mod units;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
