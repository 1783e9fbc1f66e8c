//! Level-1 (square-law) MOSFET model.
//!
//! Current coefficient convention: `K = (kp / 2) * (W / L)`, so that
//!
//! ```text
//! saturation:  Id = K * Vov^2 * (1 + lambda * Vds)
//! triode:      Id = K * (2 * Vov * Vds - Vds^2) * (1 + lambda * Vds)
//! ```
//!
//! with `Vov = Vgs - Vto`. The device is source/drain symmetric: a negative
//! `Vds` swaps the roles of the two terminals. P-channel devices are evaluated
//! by mirroring every voltage into the N-channel frame. Body effect is not
//! modelled.

use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    N,
    P,
}

impl Polarity {
    /// `+1.0` for N, `-1.0` for P.
    pub fn sign(self) -> f64 {
        match self {
            Polarity::N => 1.0,
            Polarity::P => -1.0,
        }
    }
}

/// Process parameters of one model card.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosModel {
    pub polarity: Polarity,
    /// Transconductance parameter `mu * Cox`, A/V^2.
    pub kp: f64,
    /// Threshold voltage, V. Negative for P-channel devices.
    pub vto: f64,
    /// Channel-length modulation, 1/V.
    pub lambda: f64,
    /// Fixed gate-source capacitance, F.
    pub cgs: f64,
    /// Fixed gate-drain capacitance, F.
    pub cgd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelError {
    NonPositiveKp(f64),
    NegativeLambda(f64),
    NegativeCapacitance(f64),
    ThresholdSign { polarity: Polarity, vto: f64 },
    NonPositiveGeometry { w: f64, l: f64 },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NonPositiveKp(kp) => write!(f, "KP must be positive, got {kp}"),
            ModelError::NegativeLambda(l) => write!(f, "LAMBDA must be non-negative, got {l}"),
            ModelError::NegativeCapacitance(c) => {
                write!(f, "capacitance must be non-negative, got {c}")
            }
            ModelError::ThresholdSign { polarity, vto } => {
                write!(f, "VTO={vto} has the wrong sign for a {polarity:?}-channel model")
            }
            ModelError::NonPositiveGeometry { w, l } => {
                write!(f, "W and L must be positive, got W={w} L={l}")
            }
        }
    }
}

impl core::error::Error for ModelError {}

impl MosModel {
    /// 180 nm-class NMOS stand-in: `KP=170u VTO=0.5 LAMBDA=0.05`.
    pub fn default_nmos() -> Self {
        MosModel {
            polarity: Polarity::N,
            kp: 170e-6,
            vto: 0.5,
            lambda: 0.05,
            cgs: 0.0,
            cgd: 0.0,
        }
    }

    /// 180 nm-class PMOS stand-in: `KP=60u VTO=-0.5 LAMBDA=0.05`.
    pub fn default_pmos() -> Self {
        MosModel {
            polarity: Polarity::P,
            kp: 60e-6,
            vto: -0.5,
            lambda: 0.05,
            cgs: 0.0,
            cgd: 0.0,
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        MosModel { lambda, ..self }
    }

    pub fn with_caps(self, cgs: f64, cgd: f64) -> Self {
        MosModel { cgs, cgd, ..self }
    }

    /// Threshold magnitude in the N-channel frame.
    pub fn vth(&self) -> f64 {
        self.polarity.sign() * self.vto
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.kp > 0.0) {
            return Err(ModelError::NonPositiveKp(self.kp));
        }
        if !(self.lambda >= 0.0) {
            return Err(ModelError::NegativeLambda(self.lambda));
        }
        for c in [self.cgs, self.cgd] {
            if !(c >= 0.0) {
                return Err(ModelError::NegativeCapacitance(c));
            }
        }
        if self.vth() < 0.0 {
            return Err(ModelError::ThresholdSign {
                polarity: self.polarity,
                vto: self.vto,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosGeometry {
    /// Channel width, m.
    pub w: f64,
    /// Channel length, m.
    pub l: f64,
}

impl MosGeometry {
    pub fn new(w: f64, l: f64) -> Result<Self, ModelError> {
        if w > 0.0 && l > 0.0 {
            Ok(MosGeometry { w, l })
        } else {
            Err(ModelError::NonPositiveGeometry { w, l })
        }
    }

    /// Shorthand for sizes given in micrometres.
    pub fn um(w: f64, l: f64) -> Self {
        MosGeometry {
            w: w * 1e-6,
            l: l * 1e-6,
        }
    }

    pub fn aspect(&self) -> f64 {
        self.w / self.l
    }
}

/// `K = (kp / 2) * (W / L)`, in A/V^2.
pub fn k_factor(model: &MosModel, geom: &MosGeometry) -> f64 {
    0.5 * model.kp * geom.aspect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Cutoff,
    Triode,
    Saturation,
}

/// Drain current and its partial derivatives at one bias point.
///
/// `id` is the current flowing into the drain terminal; it is negative for a
/// conducting P-channel device. `gm` and `gds` are the partials of `id` with
/// respect to the `vgs` and `vds` passed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceEval {
    pub id: f64,
    pub region: Region,
    pub gm: f64,
    pub gds: f64,
}

impl DeviceEval {
    const OFF: DeviceEval = DeviceEval {
        id: 0.0,
        region: Region::Cutoff,
        gm: 0.0,
        gds: 0.0,
    };
}

// Forward-mode N-channel branch, vds >= 0.
fn forward(k: f64, vth: f64, lambda: f64, vgs: f64, vds: f64) -> DeviceEval {
    let vov = vgs - vth;
    if vov <= 0.0 {
        return DeviceEval::OFF;
    }
    if vds >= vov {
        branch(k, lambda, vov, vds, Region::Saturation)
    } else {
        branch(k, lambda, vov, vds, Region::Triode)
    }
}

fn branch(k: f64, lambda: f64, vov: f64, vds: f64, region: Region) -> DeviceEval {
    let clm = 1.0 + lambda * vds;
    match region {
        Region::Cutoff => DeviceEval::OFF,
        Region::Saturation => {
            let sq = vov * vov;
            DeviceEval {
                id: k * sq * clm,
                region,
                gm: 2.0 * k * vov * clm,
                gds: k * sq * lambda,
            }
        }
        Region::Triode => {
            let core = (2.0 * vov - vds) * vds;
            DeviceEval {
                id: k * core * clm,
                region,
                gm: 2.0 * k * vds * clm,
                gds: 2.0 * k * (vov - vds) * clm + k * core * lambda,
            }
        }
    }
}

/// Evaluate the device at terminal voltages `vgs`, `vds` (gate and drain
/// relative to source).
pub fn mos_eval(model: &MosModel, geom: &MosGeometry, vgs: f64, vds: f64) -> DeviceEval {
    let k = k_factor(model, geom);
    let s = model.polarity.sign();
    let (a, b) = (s * vgs, s * vds);
    let e = if b >= 0.0 {
        forward(k, model.vth(), model.lambda, a, b)
    } else {
        // Terminals swap: the drain acts as the source.
        let r = forward(k, model.vth(), model.lambda, a - b, -b);
        DeviceEval {
            id: -r.id,
            region: r.region,
            gm: -r.gm,
            gds: r.gm + r.gds,
        }
    };
    // Mirroring both voltages and the current leaves the partials unchanged.
    DeviceEval { id: s * e.id, ..e }
}

/// Evaluate a chosen branch of the square law regardless of the bias, in the
/// N-channel frame and forward mode. Saturation uses `K*(vgs-vth)^2` even when
/// the overdrive is negative.
pub fn mos_eval_in_region(
    model: &MosModel,
    geom: &MosGeometry,
    vgs: f64,
    vds: f64,
    region: Region,
) -> DeviceEval {
    let k = k_factor(model, geom);
    branch(k, model.lambda, vgs - model.vth(), vds, region)
}

/// Fixed gate capacitances `(cgs, cgd)` of the model card.
pub fn mos_charge_caps(model: &MosModel) -> (f64, f64) {
    (model.cgs, model.cgd)
}
