//! Magnetization-state measures.
//!
//! Two are material-level (volume averages of `B` or `J` along the
//! magnetization direction, normalized by `Br` or `Jr`) and two are
//! motor-level (ratios of interval-4 to interval-2 fundamentals of flux
//! linkage or back-EMF, corrected by `cos δ`).

use serde::Serialize;

use crate::protocol::AMPLITUDE_FLOOR;
use crate::{Error, Result};

/// One element's contribution to a volume integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementSample {
    /// Field component along the element's own axis, T.
    pub value: f64,
    /// Sign of the magnetization direction relative to that axis.
    pub sign: f64,
    /// Element volume, m³.
    pub volume: f64,
}

impl ElementSample {
    pub fn aligned(value: f64, volume: f64) -> Self {
        ElementSample {
            value,
            sign: 1.0,
            volume,
        }
    }
}

fn volume_average(samples: &[ElementSample], reference: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Input("no elements to integrate".into()));
    }
    if !(reference > 0.0) {
        return Err(Error::Input(format!(
            "reference must be positive, got {reference}"
        )));
    }
    if samples.iter().any(|s| !(s.volume > 0.0)) {
        return Err(Error::Input("element volumes must be positive".into()));
    }
    let total: f64 = samples.iter().map(|s| s.volume).sum();
    let integral: f64 = samples.iter().map(|s| s.value * s.sign * s.volume).sum();
    Ok(integral / (total * reference))
}

/// MS(B): `∫ B·n̂ dV / (V·Br)`.
pub fn ms_b(samples: &[ElementSample], br: f64) -> Result<f64> {
    volume_average(samples, br)
}

/// MS(J): `∫ J·n̂ dV / (V·Jr)`.
pub fn ms_j(samples: &[ElementSample], jr: f64) -> Result<f64> {
    volume_average(samples, jr)
}

fn fundamental_ratio(amp_4: f64, amp_2: f64, delta: f64) -> Result<f64> {
    if !(amp_2 > AMPLITUDE_FLOOR) {
        return Err(Error::DegenerateReference { amplitude: amp_2 });
    }
    Ok(delta.cos() * amp_4 / amp_2)
}

/// MS(Φ): `cos δ · Φ⁽⁴⁾ / Φ⁽²⁾`.
pub fn ms_flux(psi_fund_4: f64, psi_fund_2: f64, delta: f64) -> Result<f64> {
    fundamental_ratio(psi_fund_4, psi_fund_2, delta)
}

/// MS(E): `cos δ · E⁽⁴⁾ / E⁽²⁾`.
pub fn ms_emf(e_fund_4: f64, e_fund_2: f64, delta: f64) -> Result<f64> {
    fundamental_ratio(e_fund_4, e_fund_2, delta)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MsReport {
    /// MS(B) for magnet 2 and magnet 3.
    pub ms_b: [f64; 2],
    /// MS(J) for magnet 2 and magnet 3.
    pub ms_j: [f64; 2],
    pub ms_b_total: f64,
    pub ms_j_total: f64,
    pub ms_flux: f64,
    pub ms_emf: f64,
}
