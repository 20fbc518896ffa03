//! Load lines and operating-point solving.

use crate::{Error, Result, MU_0};

/// Residual tolerance on `B` at the operating point, T.
pub const FLUX_TOLERANCE: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 200;
/// Half-width of the initial bracket in units of the curve's field scale.
const BRACKET_SCALE: f64 = 10.0;
const BRACKET_DOUBLINGS: usize = 4;

/// A magnet `B(H)` curve. Must be non-decreasing in `H`.
pub trait Characteristic {
    fn flux_density(&self, h: f64) -> f64;

    /// Typical field magnitude of the curve, used to size the search bracket.
    fn field_scale(&self) -> f64;
}

/// A straight recoil line `B = Br + μ0·μrec·H` with no knee.
#[derive(Clone, Copy, Debug)]
pub struct LinearMagnet {
    pub br: f64,
    pub mu_rec: f64,
}

impl Characteristic for LinearMagnet {
    fn flux_density(&self, h: f64) -> f64 {
        self.br + MU_0 * self.mu_rec * h
    }

    fn field_scale(&self) -> f64 {
        (self.br / (MU_0 * self.mu_rec)).abs().max(1.0)
    }
}

/// `(l_m·A_g)/(l_g·A_m)`.
pub fn permeance_coefficient(
    magnet_length: f64,
    gap_length: f64,
    magnet_area: f64,
    gap_area: f64,
) -> Result<f64> {
    let args = [magnet_length, gap_length, magnet_area, gap_area];
    if args.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Domain(format!(
            "permeance coefficient needs positive lengths and areas, got {args:?}"
        )));
    }
    Ok((magnet_length * gap_area) / (gap_length * magnet_area))
}

/// External-circuit constraint `B = −μ0·PC·(H − shift)`.
///
/// `shift` is the armature MMF expressed as an equivalent field in the magnet,
/// `N·i_d/l_m`. With zero shift this is the open-circuit line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoadLine {
    pc: f64,
    shift: f64,
}

impl LoadLine {
    pub fn new(pc: f64, shift: f64) -> Result<Self> {
        if !(pc.is_finite() && pc > 0.0) {
            return Err(Error::Domain(format!(
                "permeance coefficient must be positive, got {pc}"
            )));
        }
        if !shift.is_finite() {
            return Err(Error::Domain(format!(
                "load-line shift must be finite, got {shift}"
            )));
        }
        Ok(LoadLine { pc, shift })
    }

    pub fn open_circuit(pc: f64) -> Result<Self> {
        Self::new(pc, 0.0)
    }

    pub fn pc(&self) -> f64 {
        self.pc
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn flux_density(&self, h: f64) -> f64 {
        -MU_0 * self.pc * (h - self.shift)
    }
}

/// Solved magnet operating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatingPoint {
    pub h: f64,
    pub b: f64,
}

/// Intersect a non-decreasing magnet curve with a load line by bisection.
///
/// The bracket starts at `shift ± 10·field_scale` and is doubled up to four
/// times when the curves do not cross inside it. Bisection runs until the
/// bracket collapses to floating-point resolution; the result must then meet
/// [`FLUX_TOLERANCE`].
pub fn solve_operating_point<C: Characteristic + ?Sized>(
    magnet: &C,
    line: &LoadLine,
) -> Result<OperatingPoint> {
    let residual = |h: f64| magnet.flux_density(h) - line.flux_density(h);

    let mut half_width = BRACKET_SCALE * magnet.field_scale();
    let (mut lo, mut hi) = (line.shift - half_width, line.shift + half_width);
    let mut attempts = 0;
    while !(residual(lo) <= 0.0 && residual(hi) >= 0.0) {
        if attempts == BRACKET_DOUBLINGS {
            return Err(Error::Bracket { lo, hi });
        }
        attempts += 1;
        half_width *= 2.0;
        lo = line.shift - half_width;
        hi = line.shift + half_width;
    }

    let mut iterations = 0;
    let mut mid = 0.5 * (lo + hi);
    while iterations < MAX_ITERATIONS {
        mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = residual(mid);
        if r == 0.0 {
            break;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    let r = residual(mid);
    if r.abs() >= FLUX_TOLERANCE || !r.is_finite() {
        return Err(Error::NoConvergence {
            iterations,
            residual: r,
        });
    }
    Ok(OperatingPoint {
        h: mid,
        b: magnet.flux_density(mid),
    })
}
