//! Nonlinear DC operating point by modified nodal analysis.
//!
//! Unknowns are the non-ground node voltages followed by one branch current
//! per voltage source. Newton steps are damped by clamping each node update to
//! `max_step`. A `gmin` conductance from every node to ground stays attached
//! in all stages. When a plain Newton solve fails, the solver falls back to a
//! gmin ladder and then to source stepping.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::device::{mos_eval, DeviceEval, MosGeometry, MosModel};
use crate::linalg::Dense;
use crate::netlist::{ElementKind, Netlist, NetlistError, NodeId, SourceSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Absolute KCL tolerance, A.
    pub abstol: f64,
    pub reltol: f64,
    /// Absolute voltage update tolerance, V.
    pub vntol: f64,
    pub max_newton_iters: usize,
    /// Largest node-voltage change applied in one Newton step, V.
    pub max_step: f64,
    /// Shunt conductance to ground kept on every node, S.
    pub gmin: f64,
    /// First rung of the gmin ladder, S. Rungs descend by decades to `gmin`.
    pub gmin_start: f64,
    pub source_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            abstol: 1e-12,
            reltol: 1e-4,
            vntol: 1e-6,
            max_newton_iters: 100,
            max_step: 0.5,
            gmin: 1e-12,
            gmin_start: 1e-2,
            source_steps: 10,
        }
    }
}

/// Homotopy stage a solve had reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stage {
    WarmStart,
    Direct,
    GminStepping { gmin: f64 },
    SourceStepping { factor: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    Convergence { stage: Stage, residual: f64 },
    /// The Jacobian could not be factored; names the node or source branch.
    Singular { unknown: String },
    Netlist(NetlistError),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Convergence { stage, residual } => write!(
                f,
                "Newton iteration did not converge (stage {stage:?}, residual {residual:.3e} A)"
            ),
            SolveError::Singular { unknown } => {
                write!(f, "singular circuit matrix at {unknown}")
            }
            SolveError::Netlist(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SolveError {}

impl From<NetlistError> for SolveError {
    fn from(e: NetlistError) -> Self {
        SolveError::Netlist(e)
    }
}

/// A converged DC operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Every node including ground (`"0"`).
    pub node_voltages: BTreeMap<String, f64>,
    /// Current through each voltage source, flowing from its `+` node
    /// through the source to its `-` node.
    pub branch_currents: BTreeMap<String, f64>,
    pub device_evals: BTreeMap<String, DeviceEval>,
    pub iterations: usize,
    pub gmin_used: f64,
}

impl Solution {
    pub fn voltage(&self, node: &str) -> Option<f64> {
        self.node_voltages.get(node).copied()
    }

    pub fn device(&self, name: &str) -> Option<&DeviceEval> {
        self.device_evals.get(name)
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Comp {
    Conductance {
        p: Option<usize>,
        n: Option<usize>,
        g: f64,
    },
    VSource {
        p: Option<usize>,
        n: Option<usize>,
        spec: SourceSpec,
        row: usize,
    },
    ISource {
        p: Option<usize>,
        n: Option<usize>,
        spec: SourceSpec,
    },
    Mos {
        d: Option<usize>,
        g: Option<usize>,
        s: Option<usize>,
        model: MosModel,
        geom: MosGeometry,
    },
}

/// A two-terminal capacitance, used by transient analysis only.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cap {
    pub p: Option<usize>,
    pub n: Option<usize>,
    pub c: f64,
}

/// Netlist compiled to unknown indices.
#[derive(Debug, Clone)]
pub(crate) struct System {
    pub n_nodes: usize,
    pub n_unknowns: usize,
    pub unknown_names: Vec<String>,
    pub comps: Vec<Comp>,
    pub comp_names: Vec<String>,
    pub caps: Vec<Cap>,
}

/// Source values and homotopy parameters for one Newton solve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bias {
    pub time: f64,
    pub source_scale: f64,
    pub gmin: f64,
}

/// Trapezoidal companion state for the capacitors.
pub(crate) struct Companion<'a> {
    /// `2 / dt`.
    pub rate: f64,
    pub v_prev: &'a [f64],
    pub i_prev: &'a [f64],
}

impl Companion<'_> {
    pub fn current(&self, k: usize, cap: &Cap, v: f64) -> f64 {
        self.rate * cap.c * (v - self.v_prev[k]) - self.i_prev[k]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum NewtonFailure {
    Singular(usize),
    NoConvergence { residual: f64 },
}

fn idx(id: NodeId) -> Option<usize> {
    if id.is_ground() {
        None
    } else {
        Some(id.0 - 1)
    }
}

#[inline]
fn at(x: &[f64], i: Option<usize>) -> f64 {
    i.map_or(0.0, |i| x[i])
}

impl System {
    pub fn compile(netlist: &Netlist) -> Result<Self, SolveError> {
        netlist.validate()?;
        let n_nodes = netlist.node_count() - 1;
        let mut unknown_names: Vec<String> = netlist.node_names()[1..].to_vec();
        let mut comps = Vec::with_capacity(netlist.elements.len());
        let mut comp_names = Vec::with_capacity(netlist.elements.len());
        let mut caps = Vec::new();
        for e in &netlist.elements {
            let comp = match &e.kind {
                ElementKind::Resistor { p, n, ohms } => Comp::Conductance {
                    p: idx(*p),
                    n: idx(*n),
                    g: 1.0 / ohms,
                },
                ElementKind::Capacitor { p, n, farads } => {
                    caps.push(Cap {
                        p: idx(*p),
                        n: idx(*n),
                        c: *farads,
                    });
                    continue;
                }
                ElementKind::VSource { p, n, spec } => {
                    let row = unknown_names.len();
                    unknown_names.push(e.name.clone());
                    Comp::VSource {
                        p: idx(*p),
                        n: idx(*n),
                        spec: *spec,
                        row,
                    }
                }
                ElementKind::ISource { p, n, spec } => Comp::ISource {
                    p: idx(*p),
                    n: idx(*n),
                    spec: *spec,
                },
                ElementKind::Mosfet {
                    d,
                    g,
                    s,
                    model,
                    geom,
                    ..
                } => {
                    let model = *netlist
                        .model(model)
                        .expect("validated netlist resolves every model");
                    for (other, c) in [(*s, model.cgs), (*d, model.cgd)] {
                        if c > 0.0 {
                            caps.push(Cap {
                                p: idx(*g),
                                n: idx(other),
                                c,
                            });
                        }
                    }
                    Comp::Mos {
                        d: idx(*d),
                        g: idx(*g),
                        s: idx(*s),
                        model,
                        geom: *geom,
                    }
                }
            };
            comps.push(comp);
            comp_names.push(e.name.clone());
        }
        Ok(System {
            n_nodes,
            n_unknowns: unknown_names.len(),
            unknown_names,
            comps,
            comp_names,
            caps,
        })
    }

    /// Evaluate the residual `f` (net current leaving each node; constraint
    /// error for source rows), the per-node current scale, and optionally the
    /// Jacobian.
    pub fn assemble(
        &self,
        x: &[f64],
        bias: &Bias,
        companion: Option<&Companion<'_>>,
        mut jac: Option<&mut Dense>,
        f: &mut [f64],
        scale: &mut [f64],
    ) {
        f.iter_mut().for_each(|v| *v = 0.0);
        scale.iter_mut().for_each(|v| *v = 0.0);

        macro_rules! flow {
            ($node:expr, $i:expr) => {
                if let Some(k) = $node {
                    f[k] += $i;
                    scale[k] = scale[k].max(($i as f64).abs());
                }
            };
        }
        macro_rules! stamp {
            ($r:expr, $c:expr, $v:expr) => {
                if let (Some(j), Some(r), Some(c)) = (jac.as_deref_mut(), $r, $c) {
                    j.add(r, c, $v);
                }
            };
        }

        for k in 0..self.n_nodes {
            let i = bias.gmin * x[k];
            flow!(Some(k), i);
            stamp!(Some(k), Some(k), bias.gmin);
        }

        for comp in &self.comps {
            match *comp {
                Comp::Conductance { p, n, g } => {
                    let i = g * (at(x, p) - at(x, n));
                    flow!(p, i);
                    flow!(n, -i);
                    stamp!(p, p, g);
                    stamp!(n, n, g);
                    stamp!(p, n, -g);
                    stamp!(n, p, -g);
                }
                Comp::VSource { p, n, spec, row } => {
                    let j = x[row];
                    flow!(p, j);
                    flow!(n, -j);
                    stamp!(p, Some(row), 1.0);
                    stamp!(n, Some(row), -1.0);
                    let v = bias.source_scale * spec.value_at(bias.time);
                    f[row] = at(x, p) - at(x, n) - v;
                    scale[row] = v.abs();
                    stamp!(Some(row), p, 1.0);
                    stamp!(Some(row), n, -1.0);
                }
                Comp::ISource { p, n, spec } => {
                    let i = bias.source_scale * spec.value_at(bias.time);
                    flow!(p, i);
                    flow!(n, -i);
                }
                Comp::Mos {
                    d,
                    g,
                    s,
                    ref model,
                    ref geom,
                } => {
                    let vs = at(x, s);
                    let e = mos_eval(model, geom, at(x, g) - vs, at(x, d) - vs);
                    flow!(d, e.id);
                    flow!(s, -e.id);
                    let gss = -(e.gm + e.gds);
                    stamp!(d, d, e.gds);
                    stamp!(d, g, e.gm);
                    stamp!(d, s, gss);
                    stamp!(s, d, -e.gds);
                    stamp!(s, g, -e.gm);
                    stamp!(s, s, -gss);
                }
            }
        }

        if let Some(cmp) = companion {
            for (k, cap) in self.caps.iter().enumerate() {
                let i = cmp.current(k, cap, at(x, cap.p) - at(x, cap.n));
                let geq = cmp.rate * cap.c;
                flow!(cap.p, i);
                flow!(cap.n, -i);
                stamp!(cap.p, cap.p, geq);
                stamp!(cap.n, cap.n, geq);
                stamp!(cap.p, cap.n, -geq);
                stamp!(cap.n, cap.p, -geq);
            }
        }
    }

    fn residual_ok(&self, f: &[f64], scale: &[f64], opts: &SolverOptions) -> bool {
        (0..self.n_unknowns).all(|k| {
            let tol = if k < self.n_nodes {
                opts.abstol + opts.reltol * scale[k]
            } else {
                opts.vntol + opts.reltol * scale[k]
            };
            f[k].abs() <= tol
        })
    }

    fn max_node_residual(&self, f: &[f64]) -> f64 {
        f[..self.n_nodes].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Damped Newton from `x`. On success `x` holds the solution and the
    /// iteration count is returned.
    pub fn newton(
        &self,
        x: &mut [f64],
        bias: &Bias,
        companion: Option<&Companion<'_>>,
        opts: &SolverOptions,
    ) -> Result<usize, NewtonFailure> {
        let n = self.n_unknowns;
        let mut f = vec![0.0; n];
        let mut scale = vec![0.0; n];
        let mut polish = 0;
        let mut converged = false;
        for it in 1..=opts.max_newton_iters {
            let mut jac = Dense::zeros(n);
            self.assemble(x, bias, companion, Some(&mut jac), &mut f, &mut scale);
            let mut dx: Vec<f64> = f.iter().map(|v| -v).collect();
            jac.solve(&mut dx).map_err(NewtonFailure::Singular)?;

            let mut clamped = false;
            let mut small = true;
            for k in 0..n {
                let mut d = dx[k];
                if k < self.n_nodes && d.abs() > opts.max_step {
                    d = opts.max_step.copysign(d);
                    clamped = true;
                }
                let tol = if k < self.n_nodes {
                    opts.vntol + opts.reltol * x[k].abs()
                } else {
                    opts.abstol + opts.reltol * x[k].abs()
                };
                if d.abs() >= tol {
                    small = false;
                }
                x[k] += d;
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(NewtonFailure::NoConvergence {
                    residual: f64::INFINITY,
                });
            }

            if converged {
                polish += 1;
            } else if !clamped && small {
                self.assemble(x, bias, companion, None, &mut f, &mut scale);
                converged = self.residual_ok(&f, &scale, opts);
            }
            if converged {
                self.assemble(x, bias, companion, None, &mut f, &mut scale);
                // Tighten KCL to the absolute tolerance with a few extra steps.
                if self.max_node_residual(&f) <= opts.abstol || polish >= 3 {
                    return Ok(it);
                }
            }
        }
        self.assemble(x, bias, companion, None, &mut f, &mut scale);
        if converged {
            return Ok(opts.max_newton_iters);
        }
        Err(NewtonFailure::NoConvergence {
            residual: self.max_node_residual(&f),
        })
    }

    pub fn singular_error(&self, k: usize) -> SolveError {
        SolveError::Singular {
            unknown: self.unknown_names[k].to_string(),
        }
    }

    pub fn device_evals(&self, x: &[f64]) -> BTreeMap<String, DeviceEval> {
        self.comps
            .iter()
            .zip(&self.comp_names)
            .filter_map(|(c, name)| match c {
                Comp::Mos {
                    d,
                    g,
                    s,
                    model,
                    geom,
                } => {
                    let vs = at(x, *s);
                    let e = mos_eval(model, geom, at(x, *g) - vs, at(x, *d) - vs);
                    Some((name.clone(), e))
                }
                _ => None,
            })
            .collect()
    }

    pub fn solution(&self, x: &[f64], iterations: usize, gmin: f64) -> Solution {
        let mut node_voltages: BTreeMap<String, f64> = self.unknown_names[..self.n_nodes]
            .iter()
            .cloned()
            .zip(x.iter().copied())
            .collect();
        node_voltages.insert("0".to_string(), 0.0);
        let branch_currents = self.unknown_names[self.n_nodes..]
            .iter()
            .cloned()
            .zip(x[self.n_nodes..].iter().copied())
            .collect();
        Solution {
            node_voltages,
            branch_currents,
            device_evals: self.device_evals(x),
            iterations,
            gmin_used: gmin,
        }
    }

    pub fn guess_vector(&self, guess: &BTreeMap<String, f64>) -> Vec<f64> {
        let mut x = vec![0.0; self.n_unknowns];
        for (k, name) in self.unknown_names[..self.n_nodes].iter().enumerate() {
            if let Some(v) = guess.get(name) {
                x[k] = *v;
            }
        }
        x
    }

    /// Full homotopy sequence at a given time point. Returns the solution
    /// vector and total Newton iterations.
    pub fn solve_dc(
        &self,
        time: f64,
        opts: &SolverOptions,
        guess: Option<&[f64]>,
    ) -> Result<(Vec<f64>, usize), SolveError> {
        let base = Bias {
            time,
            source_scale: 1.0,
            gmin: opts.gmin,
        };
        let mut total = 0;
        let fail = |e: NewtonFailure, stage: Stage| match e {
            NewtonFailure::Singular(k) => Err(self.singular_error(k)),
            NewtonFailure::NoConvergence { residual } => {
                Err(SolveError::Convergence { stage, residual })
            }
        };

        if let Some(g) = guess {
            let mut x = g.to_vec();
            match self.newton(&mut x, &base, None, opts) {
                Ok(it) => return Ok((x, it)),
                Err(NewtonFailure::Singular(k)) => return Err(self.singular_error(k)),
                Err(_) => total += opts.max_newton_iters,
            }
        }

        let mut x = vec![0.0; self.n_unknowns];
        match self.newton(&mut x, &base, None, opts) {
            Ok(it) => return Ok((x, total + it)),
            Err(NewtonFailure::Singular(k)) => return Err(self.singular_error(k)),
            Err(_) => total += opts.max_newton_iters,
        }

        let mut x = vec![0.0; self.n_unknowns];
        let mut gmin = opts.gmin_start;
        let mut ladder_ok = true;
        while gmin > opts.gmin * 1.5 {
            let bias = Bias { gmin, ..base };
            match self.newton(&mut x, &bias, None, opts) {
                Ok(it) => total += it,
                Err(NewtonFailure::Singular(k)) => return Err(self.singular_error(k)),
                Err(_) => {
                    ladder_ok = false;
                    break;
                }
            }
            gmin /= 10.0;
        }
        if ladder_ok {
            match self.newton(&mut x, &base, None, opts) {
                Ok(it) => return Ok((x, total + it)),
                Err(NewtonFailure::Singular(k)) => return Err(self.singular_error(k)),
                Err(_) => total += opts.max_newton_iters,
            }
        }

        let mut x = vec![0.0; self.n_unknowns];
        let steps = opts.source_steps.max(1);
        for k in 1..=steps {
            let factor = k as f64 / steps as f64;
            let bias = Bias {
                source_scale: factor,
                ..base
            };
            match self.newton(&mut x, &bias, None, opts) {
                Ok(it) => total += it,
                Err(e) => return fail(e, Stage::SourceStepping { factor }),
            }
        }
        Ok((x, total))
    }
}

/// Solve the DC operating point. `initial_guess` maps node names to starting
/// voltages; missing nodes start at 0 V.
pub fn dc_solve(
    netlist: &Netlist,
    options: &SolverOptions,
    initial_guess: Option<&BTreeMap<String, f64>>,
) -> Result<Solution, SolveError> {
    let sys = System::compile(netlist)?;
    let guess = initial_guess.map(|g| sys.guess_vector(g));
    let (x, iterations) = sys.solve_dc(0.0, options, guess.as_deref())?;
    Ok(sys.solution(&x, iterations, options.gmin))
}
