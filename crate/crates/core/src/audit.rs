//! KCL audit of a DC solution, recomputed from the netlist and the node
//! voltages alone (device currents come straight from [`mos_eval`]).

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::device::mos_eval;
use crate::mna::Solution;
use crate::netlist::{ElementKind, Netlist, NodeId};

/// Net current leaving one node and the largest single branch current there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeBalance {
    pub residual: f64,
    pub scale: f64,
}

impl NodeBalance {
    /// `|residual| <= abstol + reltol * scale`.
    pub fn within(&self, abstol: f64, reltol: f64) -> bool {
        self.residual.abs() <= abstol + reltol * self.scale
    }
}

/// Per-node KCL balance for every non-ground node. Voltage-source branch
/// currents are taken from the solution; everything else is recomputed.
pub fn kcl_audit(netlist: &Netlist, solution: &Solution) -> BTreeMap<String, NodeBalance> {
    let v = |id: NodeId| -> f64 {
        solution
            .node_voltages
            .get(netlist.node_name(id))
            .copied()
            .unwrap_or(0.0)
    };
    let mut out: BTreeMap<String, NodeBalance> = netlist.node_names()[1..]
        .iter()
        .map(|n| {
            let i = solution.gmin_used * solution.node_voltages.get(n).copied().unwrap_or(0.0);
            (
                n.clone(),
                NodeBalance {
                    residual: i,
                    scale: i.abs(),
                },
            )
        })
        .collect();
    let mut leave = |id: NodeId, i: f64| {
        if id.is_ground() {
            return;
        }
        let b = out.get_mut(netlist.node_name(id)).expect("node listed");
        b.residual += i;
        b.scale = b.scale.max(i.abs());
    };
    for e in &netlist.elements {
        match &e.kind {
            ElementKind::Resistor { p, n, ohms } => {
                let i = (v(*p) - v(*n)) / ohms;
                leave(*p, i);
                leave(*n, -i);
            }
            ElementKind::Capacitor { .. } => {}
            ElementKind::VSource { p, n, .. } => {
                let i = solution.branch_currents.get(&e.name).copied().unwrap_or(0.0);
                leave(*p, i);
                leave(*n, -i);
            }
            ElementKind::ISource { p, n, spec } => {
                let i = spec.dc_value();
                leave(*p, i);
                leave(*n, -i);
            }
            ElementKind::Mosfet {
                d, g, s, model, geom, ..
            } => {
                let model = netlist.model(model).expect("model resolves");
                let id = mos_eval(model, geom, v(*g) - v(*s), v(*d) - v(*s)).id;
                leave(*d, id);
                leave(*s, -id);
            }
        }
    }
    out
}
