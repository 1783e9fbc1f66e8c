//! Netlist generators for the latch-based current comparator and extraction of
//! the latch operating point from a solved comparator.
//!
//! Reference topology (nodes `A B C D OUT VDD 0`):
//!
//! ```text
//! M1  NMOS  d=A g=B s=0     input-side mirror of M2
//! M2  NMOS  d=B g=B s=0     diode
//! M3  PMOS  d=A g=A s=VDD   diode
//! M4  PMOS  d=B g=B s=VDD   diode
//! M5  PMOS  d=C g=A s=VDD   mirrors M3 into the latch (I_1)
//! M6  PMOS  d=D g=B s=VDD   mirrors M4 into the latch (I_2)
//! M7  NMOS  d=C g=C s=0     latch diode
//! M8  NMOS  d=C g=D s=0     latch cross
//! M9  NMOS  d=D g=C s=0     latch cross
//! M10 NMOS  d=D g=D s=0     latch diode
//! MPI/MNI   inverter C -> OUT
//! IIN injects into A, IREF into B
//! ```
//!
//! Device names are part of the contract: extraction looks devices up by name.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use core::fmt;

use crate::analytics::{LatchDevices, TriodeCross};
use crate::device::{k_factor, MosGeometry, MosModel, Region};
use crate::mna::Solution;
use crate::netlist::{ElementKind, Netlist, NetlistError, NodeId, SourceSpec};

/// Canonical device names, in netlist order.
pub const DEVICES: [&str; 12] = [
    "M1", "M2", "M3", "M4", "M5", "M6", "M7", "M8", "M9", "M10", "MPI", "MNI",
];

pub const NMOS_MODEL: &str = "nm";
pub const PMOS_MODEL: &str = "pm";
pub const INPUT_SOURCE: &str = "IIN";
pub const REFERENCE_SOURCE: &str = "IREF";
pub const SUPPLY_SOURCE: &str = "VDD";
pub const OUTPUT_NODE: &str = "OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Strong positive feedback in the latch.
    Hysteresis,
    /// Near-balanced latch, little or no hysteresis.
    Plain,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Hysteresis => "hysteresis",
            Variant::Plain => "plain",
        }
    }
}

/// Default W/L per device.
pub fn default_sizing(variant: Variant) -> BTreeMap<String, MosGeometry> {
    let g = |w: f64, l: f64| MosGeometry { w, l };
    let rows: [(&[&str], MosGeometry); 7] = match variant {
        Variant::Hysteresis => [
            (&["M1", "M2"], g(0.18e-6, 0.72e-6)),
            (&["M3", "M4"], g(0.54e-6, 0.72e-6)),
            (&["M5", "M6"], g(1.08e-6, 0.18e-6)),
            (&["M8", "M9"], g(0.36e-6, 0.18e-6)),
            (&["M7", "M10"], g(0.27e-6, 0.18e-6)),
            (&["MPI"], g(0.54e-6, 0.18e-6)),
            (&["MNI"], g(0.18e-6, 0.18e-6)),
        ],
        Variant::Plain => [
            (&["M1", "M2"], g(0.18e-6, 0.72e-6)),
            (&["M3", "M4"], g(0.18e-6, 0.72e-6)),
            (&["M5", "M6"], g(1.19e-6, 0.18e-6)),
            (&["M8", "M9"], g(0.34e-6, 0.18e-6)),
            (&["M7", "M10"], g(0.21e-6, 0.18e-6)),
            (&["MPI"], g(0.54e-6, 0.18e-6)),
            (&["MNI"], g(0.18e-6, 0.18e-6)),
        ],
    };
    rows.iter()
        .flat_map(|(names, geom)| names.iter().map(move |n| (n.to_string(), *geom)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorConfig {
    pub variant: Variant,
    pub vdd: f64,
    pub nmos: MosModel,
    pub pmos: MosModel,
    pub sizing: BTreeMap<String, MosGeometry>,
    pub i_ref: f64,
    pub i_in: SourceSpec,
}

impl ComparatorConfig {
    /// 3 V supply, default model cards, default sizing, `I_ref = 0`.
    pub fn new(variant: Variant) -> Self {
        ComparatorConfig {
            variant,
            vdd: 3.0,
            nmos: MosModel::default_nmos(),
            pmos: MosModel::default_pmos(),
            sizing: default_sizing(variant),
            i_ref: 0.0,
            i_in: SourceSpec::Dc(0.0),
        }
    }

    /// Same configuration with channel-length modulation set on both models.
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.nmos.lambda = lambda;
        self.pmos.lambda = lambda;
        self
    }

    pub fn resize(&mut self, devices: &[&str], geom: MosGeometry) {
        for d in devices {
            self.sizing.insert(d.to_string(), geom);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BuildError {
    MissingSizing(String),
    InvalidSupply(f64),
    Netlist(NetlistError),
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::MissingSizing(d) => write!(f, "no sizing entry for device {d}"),
            BuildError::InvalidSupply(v) => write!(f, "supply must be positive, got {v}"),
            BuildError::Netlist(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for BuildError {}

impl From<NetlistError> for BuildError {
    fn from(e: NetlistError) -> Self {
        BuildError::Netlist(e)
    }
}

fn mos(
    nl: &mut Netlist,
    name: &str,
    [d, g, s, b]: [NodeId; 4],
    model: &str,
    geom: MosGeometry,
) -> Result<(), BuildError> {
    MosGeometry::new(geom.w, geom.l)
        .map_err(|e| BuildError::Netlist(NetlistError { line: 0, kind: crate::netlist::NetlistErrorKind::BadModel(e) }))?;
    nl.add_element(
        name,
        ElementKind::Mosfet {
            d,
            g,
            s,
            b,
            model: model.to_string(),
            geom,
        },
    )?;
    Ok(())
}

/// Generate the comparator netlist for `config`.
pub fn build_comparator(config: &ComparatorConfig) -> Result<Netlist, BuildError> {
    if !(config.vdd > 0.0) {
        return Err(BuildError::InvalidSupply(config.vdd));
    }
    let size = |d: &str| {
        config
            .sizing
            .get(d)
            .copied()
            .ok_or_else(|| BuildError::MissingSizing(d.to_string()))
    };
    let mut nl = Netlist::new(&alloc::format!(
        "latch current comparator ({} variant)",
        config.variant.name()
    ));
    let [vdd, a, b, c, d, out] = ["VDD", "A", "B", "C", "D", OUTPUT_NODE].map(|n| nl.node(n));
    let gnd = NodeId::GROUND;

    nl.add_element(
        SUPPLY_SOURCE,
        ElementKind::VSource {
            p: vdd,
            n: gnd,
            spec: SourceSpec::Dc(config.vdd),
        },
    )?;
    nl.add_element(
        INPUT_SOURCE,
        ElementKind::ISource {
            p: gnd,
            n: a,
            spec: config.i_in,
        },
    )?;
    nl.add_element(
        REFERENCE_SOURCE,
        ElementKind::ISource {
            p: gnd,
            n: b,
            spec: SourceSpec::Dc(config.i_ref),
        },
    )?;

    let (nm, pm) = (NMOS_MODEL, PMOS_MODEL);
    let wiring: [(&str, [NodeId; 4], &str); 12] = [
        ("M1", [a, b, gnd, gnd], nm),
        ("M2", [b, b, gnd, gnd], nm),
        ("M3", [a, a, vdd, vdd], pm),
        ("M4", [b, b, vdd, vdd], pm),
        ("M5", [c, a, vdd, vdd], pm),
        ("M6", [d, b, vdd, vdd], pm),
        ("M7", [c, c, gnd, gnd], nm),
        ("M8", [c, d, gnd, gnd], nm),
        ("M9", [d, c, gnd, gnd], nm),
        ("M10", [d, d, gnd, gnd], nm),
        ("MPI", [out, c, vdd, vdd], pm),
        ("MNI", [out, c, gnd, gnd], nm),
    ];
    for (name, nodes, model) in wiring {
        mos(&mut nl, name, nodes, model, size(name)?)?;
    }
    nl.add_model(nm, config.nmos)?;
    nl.add_model(pm, config.pmos)?;
    Ok(nl)
}

/// The four latch devices alone, driven by ideal currents `i_1` into C and
/// `i_2` into D from the supply. M7/M10 use `k7_geom`, M8/M9 use `k9_geom`.
pub fn build_latch_testbench(
    k7_geom: MosGeometry,
    k9_geom: MosGeometry,
    nmos: MosModel,
    i_1: f64,
    i_2: f64,
    vdd: f64,
) -> Result<Netlist, BuildError> {
    if !(vdd > 0.0) {
        return Err(BuildError::InvalidSupply(vdd));
    }
    let mut nl = Netlist::new("positive feedback latch");
    let [vdd_n, c, d] = ["VDD", "C", "D"].map(|n| nl.node(n));
    let gnd = NodeId::GROUND;
    nl.add_element(
        SUPPLY_SOURCE,
        ElementKind::VSource {
            p: vdd_n,
            n: gnd,
            spec: SourceSpec::Dc(vdd),
        },
    )?;
    for (name, node, i) in [("I1", c, i_1), ("I2", d, i_2)] {
        nl.add_element(
            name,
            ElementKind::ISource {
                p: vdd_n,
                n: node,
                spec: SourceSpec::Dc(i),
            },
        )?;
    }
    let nm = NMOS_MODEL;
    mos(&mut nl, "M7", [c, c, gnd, gnd], nm, k7_geom)?;
    mos(&mut nl, "M8", [c, d, gnd, gnd], nm, k9_geom)?;
    mos(&mut nl, "M9", [d, c, gnd, gnd], nm, k9_geom)?;
    mos(&mut nl, "M10", [d, d, gnd, gnd], nm, k7_geom)?;
    nl.add_model(nm, nmos)?;
    Ok(nl)
}

/// Symbols of the latch and input-stage analysis at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatchOperatingPoint {
    pub k_n7: f64,
    pub k_n9: f64,
    pub k_p3: f64,
    pub k_p5: f64,
    pub v_th: f64,
    pub i_d1: f64,
    pub i_d2: f64,
    pub i_ref: f64,
    pub v_c: f64,
    pub v_d: f64,
    /// Current of M5 into node C.
    pub i_1: f64,
    /// Current of M6 into node D.
    pub i_2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExtractError {
    MissingDevice(String),
    MissingNode(String),
    MissingSource(String),
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractError::MissingDevice(d) => write!(f, "netlist has no device {d}"),
            ExtractError::MissingNode(n) => write!(f, "solution has no node {n}"),
            ExtractError::MissingSource(s) => write!(f, "netlist has no source {s}"),
        }
    }
}

impl core::error::Error for ExtractError {}

fn device<'a>(
    netlist: &'a Netlist,
    name: &str,
) -> Result<(&'a MosModel, MosGeometry), ExtractError> {
    let missing = || ExtractError::MissingDevice(name.to_string());
    match &netlist.element(name).ok_or_else(missing)?.kind {
        ElementKind::Mosfet { model, geom, .. } => {
            Ok((netlist.model(model).ok_or_else(missing)?, *geom))
        }
        _ => Err(missing()),
    }
}

/// Models and geometries of M7–M10.
pub fn latch_devices(netlist: &Netlist) -> Result<LatchDevices, ExtractError> {
    let (model, m7) = device(netlist, "M7")?;
    Ok(LatchDevices {
        model: *model,
        m7,
        m8: device(netlist, "M8")?.1,
        m9: device(netlist, "M9")?.1,
        m10: device(netlist, "M10")?.1,
    })
}

/// The cross-coupled device in triode, if exactly one of M8/M9 is.
pub fn triode_cross(solution: &Solution) -> Option<TriodeCross> {
    let triode = |d: &str| solution.device(d).map(|e| e.region == Region::Triode);
    match (triode("M8")?, triode("M9")?) {
        (true, false) => Some(TriodeCross::M8),
        (false, true) => Some(TriodeCross::M9),
        _ => None,
    }
}

/// Read the latch symbols off a solved comparator.
pub fn extract_operating_point(
    netlist: &Netlist,
    solution: &Solution,
) -> Result<LatchOperatingPoint, ExtractError> {
    let k = |name: &str| device(netlist, name).map(|(m, g)| k_factor(m, &g));
    let id = |name: &str| {
        solution
            .device(name)
            .map(|e| e.id.abs())
            .ok_or_else(|| ExtractError::MissingDevice(name.to_string()))
    };
    let v = |node: &str| {
        solution
            .voltage(node)
            .ok_or_else(|| ExtractError::MissingNode(node.to_string()))
    };
    let i_ref = netlist
        .source(REFERENCE_SOURCE)
        .ok_or_else(|| ExtractError::MissingSource(REFERENCE_SOURCE.to_string()))?
        .dc_value();
    Ok(LatchOperatingPoint {
        k_n7: k("M7")?,
        k_n9: k("M9")?,
        k_p3: k("M3")?,
        k_p5: k("M5")?,
        v_th: device(netlist, "M7")?.0.vth(),
        i_d1: id("M1")?,
        i_d2: id("M2")?,
        i_ref,
        v_c: v("C")?,
        v_d: v("D")?,
        i_1: id("M5")?,
        i_2: id("M6")?,
    })
}
