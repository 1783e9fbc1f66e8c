//! Closed-form latch and transition-current expressions.
//!
//! Symbols: `K7`, `K9` are the current coefficients of the latch diode
//! (M7/M10) and cross-coupled (M8/M9) devices, `Kp3`, `Kp5` those of the
//! input-side PMOS diode and its latch mirror. The latch is assumed matched
//! pairwise, `K10 = K7` and `K8 = K9`.

use core::fmt;

use crate::comparator::LatchOperatingPoint;
use crate::device::{mos_eval_in_region, MosGeometry, MosModel, Region};
use crate::sqrt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticsError {
    /// A denominator vanished (typically `K7 == K9` or `gm7 == gm9`).
    Singular,
    /// A square root argument was negative: the assumed operating regions do
    /// not hold.
    NegativeRadicand(f64),
}

impl fmt::Display for AnalyticsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticsError::Singular => write!(f, "singular expression (zero denominator)"),
            AnalyticsError::NegativeRadicand(r) => {
                write!(f, "negative radicand {r:.6e}: operating assumptions violated")
            }
        }
    }
}

impl core::error::Error for AnalyticsError {}

type Result<T> = core::result::Result<T, AnalyticsError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallSignalLatch {
    pub gm7: f64,
    pub gm9: f64,
    pub i1: f64,
    pub i2: f64,
}

/// Small-signal latch node voltages:
///
/// ```text
/// v_a =  gm7 / (gm7^2 - gm9^2) * (i1 - (gm9/gm7) i2)
/// v_b = -gm9 / (gm7^2 - gm9^2) * (i1 - (gm7/gm9) i2)
/// ```
///
/// The products are expanded (`gm7*i1 - gm9*i2`, `gm7*i2 - gm9*i1`) so the
/// one-sided limits `gm9 -> 0` and `gm7 -> 0` stay finite.
pub fn latch_voltages_small_signal(s: &SmallSignalLatch) -> Result<(f64, f64)> {
    let den = s.gm7 * s.gm7 - s.gm9 * s.gm9;
    if den == 0.0 {
        return Err(AnalyticsError::Singular);
    }
    let v_a = (s.gm7 * s.i1 - s.gm9 * s.i2) / den;
    let v_b = (s.gm7 * s.i2 - s.gm9 * s.i1) / den;
    Ok((v_a, v_b))
}

fn root(radicand: f64, magnitude: f64) -> Result<f64> {
    if radicand >= 0.0 {
        Ok(sqrt(radicand))
    } else if radicand >= -1e-12 * magnitude {
        // rounding residue of an exactly zero radicand
        Ok(0.0)
    } else {
        Err(AnalyticsError::NegativeRadicand(radicand))
    }
}

/// Large-signal latch node voltages, the exact solution of
///
/// ```text
/// i1 = K7 (v_a - vth)^2 + K9 (v_b - vth)^2
/// i2 = K9 (v_a - vth)^2 + K7 (v_b - vth)^2
/// ```
///
/// with all four devices saturated:
/// `v_a = vth + sqrt(K7/(K7^2-K9^2) * (i1 - (K9/K7) i2))`, `v_b` likewise with
/// the roles swapped.
pub fn latch_voltages_large_signal(
    k_n7: f64,
    k_n9: f64,
    v_th: f64,
    i1: f64,
    i2: f64,
) -> Result<(f64, f64)> {
    let den = k_n7 * k_n7 - k_n9 * k_n9;
    if den == 0.0 {
        return Err(AnalyticsError::Singular);
    }
    let mag = (k_n7 * i1).abs() + (k_n9 * i2).abs() + (k_n7 * i2).abs() + (k_n9 * i1).abs();
    let mag = mag / den.abs();
    let ra = (k_n7 * i1 - k_n9 * i2) / den;
    let rb = (k_n7 * i2 - k_n9 * i1) / den;
    Ok((v_th + root(ra, mag)?, v_th + root(rb, mag)?))
}

/// Squared overdrives of the latch nodes as functions of the input current:
///
/// ```text
/// (V_C - Vth)^2 = -K7 Kp5 / (Kp3 (K7^2 - K9^2)) * [i_in - i_ref + (K9/K7) I_D2 - I_D1]
/// (V_D - Vth)^2 =  K9 Kp5 / (Kp3 (K7^2 - K9^2)) * [i_in - i_ref + (K7/K9) I_D2 - I_D1]
/// ```
///
/// Negative values are returned unchanged; they mean the saturation
/// assumptions behind the expressions do not hold at that input.
pub fn node_squares(op: &LatchOperatingPoint, i_in: f64) -> Result<(f64, f64)> {
    let den = op.k_p3 * (op.k_n7 * op.k_n7 - op.k_n9 * op.k_n9);
    if den == 0.0 || op.k_n7 == 0.0 || op.k_n9 == 0.0 {
        return Err(AnalyticsError::Singular);
    }
    let base = i_in - op.i_ref - op.i_d1;
    let sq_c = -(op.k_n7 * op.k_p5 / den) * (base + (op.k_n9 / op.k_n7) * op.i_d2);
    let sq_d = (op.k_n9 * op.k_p5 / den) * (base + (op.k_n7 / op.k_n9) * op.i_d2);
    Ok((sq_c, sq_d))
}

/// Which cross-coupled device is in triode at the switching point; the other
/// three latch devices are saturated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriodeCross {
    /// M8 in triode: ratio `P`.
    M8,
    /// M9 in triode: ratio `P'`.
    M9,
}

/// Ratio `I_D5 / I_D6` of the latch supply currents, `P` or `P'`:
///
/// ```text
/// P  = [(vc-vt)^2 + k (2vd - 2vt - vc) vc] / [(vd-vt)^2 + k (vc-vt)^2]
/// P' = [(vc-vt)^2 + k (vd-vt)^2]           / [(vd-vt)^2 + k (2vc - 2vt - vd) vd]
/// ```
///
/// with `k = K9 / K7`.
pub fn current_ratio(
    v_c: f64,
    v_d: f64,
    v_th: f64,
    k_ratio: f64,
    triode: TriodeCross,
) -> Result<f64> {
    let (oc, od) = (v_c - v_th, v_d - v_th);
    let (num, den) = match triode {
        TriodeCross::M8 => (
            oc * oc + k_ratio * (2.0 * v_d - 2.0 * v_th - v_c) * v_c,
            od * od + k_ratio * oc * oc,
        ),
        TriodeCross::M9 => (
            oc * oc + k_ratio * od * od,
            od * od + k_ratio * (2.0 * v_c - 2.0 * v_th - v_d) * v_d,
        ),
    };
    if den == 0.0 {
        return Err(AnalyticsError::Singular);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionResult {
    pub i_t1: f64,
    pub i_t2: f64,
    pub i_a: f64,
    pub i_b: f64,
    pub i_hy: f64,
}

/// `I_t1 = I_ref + I_D1 - P I_D2`, `I_t2 = I_ref - (P' I_D2 - I_D1)`,
/// `I_hy = |I_t1 - I_t2|`.
pub fn transition_currents(i_ref: f64, i_d1: f64, i_d2: f64, p: f64, p_prime: f64) -> TransitionResult {
    let i_a = i_d1 - p * i_d2;
    let i_b = p_prime * i_d2 - i_d1;
    let i_t1 = i_ref + i_a;
    let i_t2 = i_ref - i_b;
    let i_hy = (i_t1 - i_t2).abs();
    debug_assert!(
        (i_hy - (p_prime - p).abs() * i_d2).abs()
            <= 1e-9 * (i_hy.abs() + i_d1.abs() + i_ref.abs() + (p_prime * i_d2).abs()) + 1e-30
    );
    TransitionResult {
        i_t1,
        i_t2,
        i_a,
        i_b,
        i_hy,
    }
}

/// Models and geometries of the four latch devices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatchDevices {
    pub model: MosModel,
    pub m7: MosGeometry,
    pub m8: MosGeometry,
    pub m9: MosGeometry,
    pub m10: MosGeometry,
}

/// `I_D5 / I_D6 = (I_D7 + I_D8) / (I_D10 + I_D9)` summed from device
/// evaluations at the given latch voltages, with the branch combination
/// implied by `triode` forced on each device.
pub fn latch_current_ratio_from_devices(
    v_c: f64,
    v_d: f64,
    latch: &LatchDevices,
    triode: TriodeCross,
) -> f64 {
    let (r8, r9) = match triode {
        TriodeCross::M8 => (Region::Triode, Region::Saturation),
        TriodeCross::M9 => (Region::Saturation, Region::Triode),
    };
    let m = &latch.model;
    let i7 = mos_eval_in_region(m, &latch.m7, v_c, v_c, Region::Saturation).id;
    let i8 = mos_eval_in_region(m, &latch.m8, v_d, v_c, r8).id;
    let i9 = mos_eval_in_region(m, &latch.m9, v_c, v_d, r9).id;
    let i10 = mos_eval_in_region(m, &latch.m10, v_d, v_d, Region::Saturation).id;
    (i7 + i8) / (i10 + i9)
}
