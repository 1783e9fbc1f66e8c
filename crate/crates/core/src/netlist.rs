//! SPICE-like netlist subset.
//!
//! ```text
//! title line
//! * comment
//! R<name> n+ n- value
//! C<name> n+ n- value
//! V<name> n+ n- DC v | PULSE(v1 v2 td tr tf pw per)
//! I<name> n+ n- DC i | PULSE(...)
//! M<name> nd ng ns nb model W=value L=value
//! .model <name> NMOS|PMOS (KP=.. VTO=.. LAMBDA=.. CGS=.. CGD=..)
//! .op
//! .dc <source> <start> <stop> <step>
//! .tran <dt> <tstop>
//! .end
//! ```
//!
//! Node names are arbitrary identifiers; `0` and `gnd` are ground. A current
//! source `I n+ n- DC x` drives `x` amperes from `n+` through the source into
//! `n-`. Element and model names are case-insensitive.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::device::{ModelError, MosGeometry, MosModel, Polarity};
use crate::units::{format_value, format_with_exponent, parse_value, ValueError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const GROUND: NodeId = NodeId(0);

    pub fn is_ground(self) -> bool {
        self.0 == 0
    }
}

/// SPICE `PULSE(v1 v2 td tr tf pw per)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub v1: f64,
    pub v2: f64,
    pub delay: f64,
    pub rise: f64,
    pub fall: f64,
    pub width: f64,
    /// Zero means a single pulse.
    pub period: f64,
}

impl Pulse {
    pub fn value_at(&self, t: f64) -> f64 {
        if t < self.delay {
            return self.v1;
        }
        let mut tt = t - self.delay;
        if self.period > 0.0 {
            tt %= self.period;
        }
        if tt < self.rise {
            self.v1 + (self.v2 - self.v1) * tt / self.rise
        } else if tt < self.rise + self.width {
            self.v2
        } else if tt < self.rise + self.width + self.fall {
            self.v2 + (self.v1 - self.v2) * (tt - self.rise - self.width) / self.fall
        } else {
            self.v1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSpec {
    Dc(f64),
    Pulse(Pulse),
}

impl SourceSpec {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            SourceSpec::Dc(v) => *v,
            SourceSpec::Pulse(p) => p.value_at(t),
        }
    }

    /// Value used by DC analyses: the `t = 0` value.
    pub fn dc_value(&self) -> f64 {
        self.value_at(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    Resistor {
        p: NodeId,
        n: NodeId,
        ohms: f64,
    },
    Capacitor {
        p: NodeId,
        n: NodeId,
        farads: f64,
    },
    VSource {
        p: NodeId,
        n: NodeId,
        spec: SourceSpec,
    },
    ISource {
        p: NodeId,
        n: NodeId,
        spec: SourceSpec,
    },
    Mosfet {
        d: NodeId,
        g: NodeId,
        s: NodeId,
        b: NodeId,
        /// Lower-cased model name, resolvable in [`Netlist::models`].
        model: String,
        geom: MosGeometry,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
}

impl Element {
    pub fn nodes(&self) -> Vec<NodeId> {
        match &self.kind {
            ElementKind::Resistor { p, n, .. }
            | ElementKind::Capacitor { p, n, .. }
            | ElementKind::VSource { p, n, .. }
            | ElementKind::ISource { p, n, .. } => alloc::vec![*p, *n],
            ElementKind::Mosfet { d, g, s, b, .. } => alloc::vec![*d, *g, *s, *b],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Op,
    Dc {
        source: String,
        start: f64,
        stop: f64,
        step: f64,
    },
    Tran {
        dt: f64,
        tstop: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub title: String,
    /// Node names by id; index 0 is ground and is named `"0"`.
    nodes: Vec<String>,
    pub elements: Vec<Element>,
    /// Model cards keyed by lower-cased name.
    pub models: BTreeMap<String, MosModel>,
    pub directives: Vec<Directive>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetlistError {
    /// 1-based source line, 0 when the netlist was built programmatically.
    pub line: usize,
    pub kind: NetlistErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetlistErrorKind {
    DuplicateElement(String),
    DuplicateModel(String),
    UndeclaredModel(String),
    WrongArity {
        element: String,
        expected: usize,
        found: usize,
    },
    BadValue {
        token: String,
        source: ValueError,
    },
    UnknownElement(String),
    UnknownDirective(String),
    UnknownParameter(String),
    MissingParameter(String),
    InvalidValue(String),
    BadModel(ModelError),
}

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: ", self.line)?;
        }
        match &self.kind {
            NetlistErrorKind::DuplicateElement(n) => write!(f, "duplicate element name {n}"),
            NetlistErrorKind::DuplicateModel(n) => write!(f, "duplicate model name {n}"),
            NetlistErrorKind::UndeclaredModel(n) => write!(f, "reference to undeclared model {n}"),
            NetlistErrorKind::WrongArity {
                element,
                expected,
                found,
            } => write!(
                f,
                "{element}: expected {expected} fields, found {found}"
            ),
            NetlistErrorKind::BadValue { token, source } => {
                write!(f, "bad value {token:?}: {source}")
            }
            NetlistErrorKind::UnknownElement(t) => write!(f, "unknown element type {t}"),
            NetlistErrorKind::UnknownDirective(t) => write!(f, "unknown directive {t}"),
            NetlistErrorKind::UnknownParameter(t) => write!(f, "unknown parameter {t}"),
            NetlistErrorKind::MissingParameter(t) => write!(f, "missing parameter {t}"),
            NetlistErrorKind::InvalidValue(t) => write!(f, "invalid value: {t}"),
            NetlistErrorKind::BadModel(e) => write!(f, "bad model: {e}"),
        }
    }
}

impl core::error::Error for NetlistError {}

fn err(line: usize, kind: NetlistErrorKind) -> NetlistError {
    NetlistError { line, kind }
}

fn is_ground_name(name: &str) -> bool {
    name == "0" || name.eq_ignore_ascii_case("gnd")
}

impl Netlist {
    pub fn new(title: &str) -> Self {
        Netlist {
            title: title.to_string(),
            nodes: alloc::vec!["0".to_string()],
            elements: Vec::new(),
            models: BTreeMap::new(),
            directives: Vec::new(),
        }
    }

    /// Intern a node name, returning its id.
    pub fn node(&mut self, name: &str) -> NodeId {
        if is_ground_name(name) {
            return NodeId::GROUND;
        }
        match self.nodes.iter().position(|n| n == name) {
            Some(i) => NodeId(i),
            None => {
                self.nodes.push(name.to_string());
                NodeId(self.nodes.len() - 1)
            }
        }
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        if is_ground_name(name) {
            return Some(NodeId::GROUND);
        }
        self.nodes.iter().position(|n| n == name).map(NodeId)
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.0]
    }

    /// All node names, ground first.
    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(name))
    }

    pub fn element_mut(&mut self, name: &str) -> Option<&mut Element> {
        self.elements
            .iter_mut()
            .find(|e| e.name.eq_ignore_ascii_case(name))
    }

    pub fn model(&self, name: &str) -> Option<&MosModel> {
        self.models.get(&name.to_ascii_lowercase())
    }

    pub fn add_model(&mut self, name: &str, model: MosModel) -> Result<(), NetlistError> {
        model
            .validate()
            .map_err(|e| err(0, NetlistErrorKind::BadModel(e)))?;
        let key = name.to_ascii_lowercase();
        if self.models.contains_key(&key) {
            return Err(err(0, NetlistErrorKind::DuplicateModel(key)));
        }
        self.models.insert(key, model);
        Ok(())
    }

    /// Append an element after checking name uniqueness and element values.
    /// Model references are checked by [`Netlist::validate`].
    pub fn add_element(&mut self, name: &str, kind: ElementKind) -> Result<(), NetlistError> {
        if self.element(name).is_some() {
            return Err(err(0, NetlistErrorKind::DuplicateElement(name.to_string())));
        }
        check_kind(&kind).map_err(|k| err(0, k))?;
        self.elements.push(Element {
            name: name.to_string(),
            kind,
        });
        Ok(())
    }

    /// Check cross references: every MOSFET model resolves.
    pub fn validate(&self) -> Result<(), NetlistError> {
        for e in &self.elements {
            if let ElementKind::Mosfet { model, .. } = &e.kind {
                if !self.models.contains_key(model) {
                    return Err(err(0, NetlistErrorKind::UndeclaredModel(model.clone())));
                }
            }
        }
        Ok(())
    }

    /// The source spec of a V or I element.
    pub fn source(&self, name: &str) -> Option<&SourceSpec> {
        match &self.element(name)?.kind {
            ElementKind::VSource { spec, .. } | ElementKind::ISource { spec, .. } => Some(spec),
            _ => None,
        }
    }

    pub fn source_mut(&mut self, name: &str) -> Option<&mut SourceSpec> {
        match &mut self.element_mut(name)?.kind {
            ElementKind::VSource { spec, .. } | ElementKind::ISource { spec, .. } => Some(spec),
            _ => None,
        }
    }

    /// Render as netlist text accepted by [`parse_netlist`].
    pub fn to_text(&self) -> String {
        alloc::format!("{self}")
    }
}

fn check_kind(kind: &ElementKind) -> Result<(), NetlistErrorKind> {
    let bad = |s: &str| Err(NetlistErrorKind::InvalidValue(s.to_string()));
    match kind {
        ElementKind::Resistor { ohms, .. } if !(*ohms > 0.0) => bad("resistance must be positive"),
        ElementKind::Capacitor { farads, .. } if !(*farads >= 0.0) => {
            bad("capacitance must be non-negative")
        }
        ElementKind::VSource { spec, .. } | ElementKind::ISource { spec, .. } => match spec {
            SourceSpec::Dc(v) if !v.is_finite() => bad("source value must be finite"),
            SourceSpec::Pulse(p) => {
                if !(p.rise > 0.0 && p.fall > 0.0) {
                    bad("pulse rise and fall must be positive")
                } else if !(p.width >= 0.0 && p.delay >= 0.0) {
                    bad("pulse width and delay must be non-negative")
                } else if p.period > 0.0 && p.period < p.rise + p.fall + p.width {
                    bad("pulse period shorter than rise+width+fall")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        },
        ElementKind::Mosfet { geom, .. } => MosGeometry::new(geom.w, geom.l)
            .map(|_| ())
            .map_err(NetlistErrorKind::BadModel),
        _ => Ok(()),
    }
}

fn value(line: usize, token: &str) -> Result<f64, NetlistError> {
    parse_value(token).map_err(|source| {
        err(
            line,
            NetlistErrorKind::BadValue {
                token: token.to_string(),
                source,
            },
        )
    })
}

// Split on whitespace, parentheses and commas; glue `KEY = VALUE` into one token.
fn tokenize(line: &str) -> Vec<String> {
    let spaced: String = line
        .chars()
        .map(|c| if matches!(c, '(' | ')' | ',') { ' ' } else { c })
        .collect();
    let mut out: Vec<String> = Vec::new();
    let mut glue = false;
    for raw in spaced.split_whitespace() {
        if glue {
            if let Some(last) = out.last_mut() {
                last.push_str(raw);
            }
            glue = raw.ends_with('=');
            continue;
        }
        if raw.starts_with('=') {
            if let Some(last) = out.last_mut() {
                last.push_str(raw);
                glue = raw.ends_with('=');
                continue;
            }
        }
        glue = raw.ends_with('=');
        out.push(raw.to_string());
    }
    out
}

fn parse_source(line: usize, name: &str, toks: &[String]) -> Result<SourceSpec, NetlistError> {
    let arity = |expected| {
        err(
            line,
            NetlistErrorKind::WrongArity {
                element: name.to_string(),
                expected,
                found: toks.len() + 3,
            },
        )
    };
    let Some(first) = toks.first() else {
        return Err(arity(4));
    };
    match first.to_ascii_uppercase().as_str() {
        "DC" => {
            if toks.len() != 2 {
                return Err(arity(5));
            }
            Ok(SourceSpec::Dc(value(line, &toks[1])?))
        }
        "PULSE" => {
            if toks.len() != 8 {
                return Err(arity(11));
            }
            let v: Vec<f64> = toks[1..]
                .iter()
                .map(|t| value(line, t))
                .collect::<Result<_, _>>()?;
            Ok(SourceSpec::Pulse(Pulse {
                v1: v[0],
                v2: v[1],
                delay: v[2],
                rise: v[3],
                fall: v[4],
                width: v[5],
                period: v[6],
            }))
        }
        _ if toks.len() == 1 => Ok(SourceSpec::Dc(value(line, first)?)),
        _ => Err(arity(5)),
    }
}

fn parse_model(line: usize, toks: &[String]) -> Result<(String, MosModel), NetlistError> {
    if toks.len() < 3 {
        return Err(err(
            line,
            NetlistErrorKind::WrongArity {
                element: ".model".to_string(),
                expected: 3,
                found: toks.len(),
            },
        ));
    }
    let name = toks[1].to_ascii_lowercase();
    let mut model = match toks[2].to_ascii_uppercase().as_str() {
        "NMOS" => MosModel {
            polarity: Polarity::N,
            kp: f64::NAN,
            vto: f64::NAN,
            lambda: 0.0,
            cgs: 0.0,
            cgd: 0.0,
        },
        "PMOS" => MosModel {
            polarity: Polarity::P,
            kp: f64::NAN,
            vto: f64::NAN,
            lambda: 0.0,
            cgs: 0.0,
            cgd: 0.0,
        },
        other => return Err(err(line, NetlistErrorKind::UnknownParameter(other.to_string()))),
    };
    for t in &toks[3..] {
        let Some((k, v)) = t.split_once('=') else {
            return Err(err(line, NetlistErrorKind::UnknownParameter(t.clone())));
        };
        let v = value(line, v)?;
        match k.to_ascii_uppercase().as_str() {
            "KP" => model.kp = v,
            "VTO" => model.vto = v,
            "LAMBDA" => model.lambda = v,
            "CGS" => model.cgs = v,
            "CGD" => model.cgd = v,
            _ => return Err(err(line, NetlistErrorKind::UnknownParameter(k.to_string()))),
        }
    }
    for (p, v) in [("KP", model.kp), ("VTO", model.vto)] {
        if v.is_nan() {
            return Err(err(line, NetlistErrorKind::MissingParameter(p.to_string())));
        }
    }
    model
        .validate()
        .map_err(|e| err(line, NetlistErrorKind::BadModel(e)))?;
    Ok((name, model))
}

/// Parse netlist text. The first line is always the title.
pub fn parse_netlist(text: &str) -> Result<Netlist, NetlistError> {
    let mut lines = text.lines();
    let title = lines.next().unwrap_or("").trim_end_matches('\r').trim();
    let mut nl = Netlist::new(title);
    let mut element_lines: Vec<usize> = Vec::new();

    for (idx, raw) in lines.enumerate() {
        let line = idx + 2;
        let text = raw.trim_end_matches('\r').trim();
        if text.is_empty() || text.starts_with('*') {
            continue;
        }
        let toks = tokenize(text);
        let head = toks[0].as_str();

        if let Some(dir) = head.strip_prefix('.') {
            match dir.to_ascii_lowercase().as_str() {
                "end" => break,
                "op" => nl.directives.push(Directive::Op),
                "dc" => {
                    if toks.len() != 5 {
                        return Err(err(
                            line,
                            NetlistErrorKind::WrongArity {
                                element: ".dc".to_string(),
                                expected: 5,
                                found: toks.len(),
                            },
                        ));
                    }
                    let step = value(line, &toks[4])?;
                    if !(step > 0.0) {
                        return Err(err(
                            line,
                            NetlistErrorKind::InvalidValue("sweep step must be positive".into()),
                        ));
                    }
                    nl.directives.push(Directive::Dc {
                        source: toks[1].clone(),
                        start: value(line, &toks[2])?,
                        stop: value(line, &toks[3])?,
                        step,
                    });
                }
                "tran" => {
                    if toks.len() != 3 {
                        return Err(err(
                            line,
                            NetlistErrorKind::WrongArity {
                                element: ".tran".to_string(),
                                expected: 3,
                                found: toks.len(),
                            },
                        ));
                    }
                    nl.directives.push(Directive::Tran {
                        dt: value(line, &toks[1])?,
                        tstop: value(line, &toks[2])?,
                    });
                }
                "model" => {
                    let (name, model) = parse_model(line, &toks)?;
                    if nl.models.contains_key(&name) {
                        return Err(err(line, NetlistErrorKind::DuplicateModel(name)));
                    }
                    nl.models.insert(name, model);
                }
                _ => return Err(err(line, NetlistErrorKind::UnknownDirective(head.to_string()))),
            }
            continue;
        }

        let name = head;
        let arity = |expected: usize| {
            err(
                line,
                NetlistErrorKind::WrongArity {
                    element: name.to_string(),
                    expected,
                    found: toks.len(),
                },
            )
        };
        let kind = match name.as_bytes()[0].to_ascii_uppercase() {
            b'R' | b'C' => {
                if toks.len() != 4 {
                    return Err(arity(4));
                }
                let (p, n) = (nl.node(&toks[1]), nl.node(&toks[2]));
                let v = value(line, &toks[3])?;
                if name.as_bytes()[0].eq_ignore_ascii_case(&b'R') {
                    ElementKind::Resistor { p, n, ohms: v }
                } else {
                    ElementKind::Capacitor { p, n, farads: v }
                }
            }
            b'V' | b'I' => {
                if toks.len() < 4 {
                    return Err(arity(5));
                }
                let spec = parse_source(line, name, &toks[3..])?;
                let (p, n) = (nl.node(&toks[1]), nl.node(&toks[2]));
                if name.as_bytes()[0].eq_ignore_ascii_case(&b'V') {
                    ElementKind::VSource { p, n, spec }
                } else {
                    ElementKind::ISource { p, n, spec }
                }
            }
            b'M' => {
                if toks.len() != 8 {
                    return Err(arity(8));
                }
                let mut w = None;
                let mut l = None;
                for t in &toks[6..] {
                    let Some((k, v)) = t.split_once('=') else {
                        return Err(err(line, NetlistErrorKind::UnknownParameter(t.clone())));
                    };
                    match k.to_ascii_uppercase().as_str() {
                        "W" => w = Some(value(line, v)?),
                        "L" => l = Some(value(line, v)?),
                        _ => {
                            return Err(err(line, NetlistErrorKind::UnknownParameter(k.to_string())))
                        }
                    }
                }
                let (Some(w), Some(l)) = (w, l) else {
                    let missing = if w.is_none() { "W" } else { "L" };
                    return Err(err(line, NetlistErrorKind::MissingParameter(missing.into())));
                };
                ElementKind::Mosfet {
                    d: nl.node(&toks[1]),
                    g: nl.node(&toks[2]),
                    s: nl.node(&toks[3]),
                    b: nl.node(&toks[4]),
                    model: toks[5].to_ascii_lowercase(),
                    geom: MosGeometry { w, l },
                }
            }
            _ => return Err(err(line, NetlistErrorKind::UnknownElement(name.to_string()))),
        };
        nl.add_element(name, kind).map_err(|e| NetlistError { line, ..e })?;
        element_lines.push(line);
    }

    for (e, &line) in nl.elements.iter().zip(&element_lines) {
        if let ElementKind::Mosfet { model, .. } = &e.kind {
            if !nl.models.contains_key(model) {
                return Err(err(line, NetlistErrorKind::UndeclaredModel(model.clone())));
            }
        }
    }
    Ok(nl)
}

fn fmt_source(f: &mut fmt::Formatter<'_>, spec: &SourceSpec) -> fmt::Result {
    match spec {
        SourceSpec::Dc(v) => write!(f, "DC {}", format_value(*v)),
        SourceSpec::Pulse(p) => write!(
            f,
            "PULSE({} {} {} {} {} {} {})",
            format_value(p.v1),
            format_value(p.v2),
            format_value(p.delay),
            format_value(p.rise),
            format_value(p.fall),
            format_value(p.width),
            format_value(p.period)
        ),
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        let n = |id: &NodeId| self.node_name(*id);
        for e in &self.elements {
            match &e.kind {
                ElementKind::Resistor { p, n: m, ohms } => {
                    writeln!(f, "{} {} {} {}", e.name, n(p), n(m), format_value(*ohms))?
                }
                ElementKind::Capacitor { p, n: m, farads } => {
                    writeln!(f, "{} {} {} {}", e.name, n(p), n(m), format_value(*farads))?
                }
                ElementKind::VSource { p, n: m, spec } | ElementKind::ISource { p, n: m, spec } => {
                    write!(f, "{} {} {} ", e.name, n(p), n(m))?;
                    fmt_source(f, spec)?;
                    writeln!(f)?;
                }
                ElementKind::Mosfet {
                    d,
                    g,
                    s,
                    b,
                    model,
                    geom,
                } => writeln!(
                    f,
                    "{} {} {} {} {} {} W={} L={}",
                    e.name,
                    n(d),
                    n(g),
                    n(s),
                    n(b),
                    model,
                    format_with_exponent(geom.w, -6),
                    format_with_exponent(geom.l, -6)
                )?,
            }
        }
        for (name, m) in &self.models {
            let kind = match m.polarity {
                Polarity::N => "NMOS",
                Polarity::P => "PMOS",
            };
            write!(
                f,
                ".model {} {} (KP={} VTO={} LAMBDA={}",
                name,
                kind,
                format_value(m.kp),
                format_value(m.vto),
                format_value(m.lambda)
            )?;
            if m.cgs != 0.0 || m.cgd != 0.0 {
                write!(f, " CGS={} CGD={}", format_value(m.cgs), format_value(m.cgd))?;
            }
            writeln!(f, ")")?;
        }
        for d in &self.directives {
            match d {
                Directive::Op => writeln!(f, ".op")?,
                Directive::Dc {
                    source,
                    start,
                    stop,
                    step,
                } => writeln!(
                    f,
                    ".dc {} {} {} {}",
                    source,
                    format_value(*start),
                    format_value(*stop),
                    format_value(*step)
                )?,
                Directive::Tran { dt, tstop } => {
                    writeln!(f, ".tran {} {}", format_value(*dt), format_value(*tstop))?
                }
            }
        }
        writeln!(f, ".end")
    }
}
