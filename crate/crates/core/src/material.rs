//! Semi-hard and hard magnet material model.
//!
//! The major loop is built in the `J`–`H` plane from two asymptotes:
//!
//! * the recoil line `L1(H) = Jr + μ0(μrec − 1)·H` through the remanence, and
//! * the droop line `L2(H) = μ0(μg − 1)·(H + iHc)` anchored at `J(−iHc) = 0`.
//!
//! The descending branch follows the hyperbolic smooth minimum of the two
//! lines, floored by the reverse-saturation recoil line
//! `L3(H) = −Jr + μ0(μrec − 1)·H`. The ascending branch is its point mirror.
//! A magnet element remembers one scalar, the `H = 0` intercept of its active
//! recoil line, which moves only when the operating point is pushed onto the
//! major loop.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, MU_0};

/// Immutable material parameters of one magnet grade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnetSpec {
    pub name: String,
    /// Remanence, T.
    pub br: f64,
    /// Intrinsic coercivity, A/m.
    pub ihc: f64,
    /// Recoil relative permeability.
    pub mu_rec: f64,
    /// Drooping relative permeability below the knee.
    pub mu_g: f64,
    /// Knee round radius, A/m.
    pub round_radius: f64,
}

impl MagnetSpec {
    pub fn new(
        name: impl Into<String>,
        br: f64,
        ihc: f64,
        mu_rec: f64,
        mu_g: f64,
        round_radius: f64,
    ) -> Result<Self> {
        let spec = MagnetSpec {
            name: name.into(),
            br,
            ihc,
            mu_rec,
            mu_g,
            round_radius,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidSpec {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        let all_finite = [self.br, self.ihc, self.mu_rec, self.mu_g, self.round_radius]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return fail("all parameters must be finite");
        }
        if self.br <= 0.0 {
            return fail("Br must be positive");
        }
        if self.ihc <= 0.0 {
            return fail("iHc must be positive");
        }
        if self.mu_rec < 1.0 {
            return fail("mu_rec must be at least 1");
        }
        if self.mu_g <= self.mu_rec {
            return fail("mu_g must exceed mu_rec");
        }
        if self.round_radius < 0.0 {
            return fail("round radius must be non-negative");
        }
        // Br is the remanence only if the droop line reaches it before H = 0.
        if MU_0 * (self.mu_g - 1.0) * self.ihc <= self.br {
            return fail("knee must lie at negative field: need mu0*(mu_g - 1)*iHc > Br");
        }
        Ok(())
    }

    /// Remanent polarization. At `H = 0`, `J = B`, so this is `Br`.
    pub fn jr(&self) -> f64 {
        self.br
    }

    pub fn with_round_radius(&self, round_radius: f64) -> Self {
        MagnetSpec {
            round_radius,
            ..self.clone()
        }
    }

    pub fn major_loop(&self) -> MajorLoop {
        MajorLoop::new(self)
    }
}

/// Derived major-loop parameters of a [`MagnetSpec`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MajorLoop {
    jr: f64,
    ihc: f64,
    recoil_slope: f64,
    droop_slope: f64,
    blend: f64,
}

impl MajorLoop {
    pub fn new(spec: &MagnetSpec) -> Self {
        MajorLoop {
            jr: spec.jr(),
            ihc: spec.ihc,
            recoil_slope: MU_0 * (spec.mu_rec - 1.0),
            droop_slope: MU_0 * (spec.mu_g - 1.0),
            blend: knee_blend_offset(spec.mu_rec, spec.mu_g, spec.round_radius),
        }
    }

    pub fn jr(&self) -> f64 {
        self.jr
    }

    pub fn ihc(&self) -> f64 {
        self.ihc
    }

    /// Slope of the recoil asymptote in the `J`–`H` plane, T/(A/m).
    pub fn recoil_slope(&self) -> f64 {
        self.recoil_slope
    }

    /// Slope of the droop asymptote in the `J`–`H` plane, T/(A/m).
    pub fn droop_slope(&self) -> f64 {
        self.droop_slope
    }

    /// Vertical distance between the smoothed branch and the asymptote
    /// crossing, T. Zero for a sharp knee.
    pub fn blend_offset(&self) -> f64 {
        self.blend
    }

    /// Field at which the two asymptotes cross.
    pub fn knee_field(&self) -> f64 {
        (self.jr - self.droop_slope * self.ihc) / (self.droop_slope - self.recoil_slope)
    }

    pub fn recoil_asymptote(&self, h: f64) -> f64 {
        self.jr + self.recoil_slope * h
    }

    pub fn droop_asymptote(&self, h: f64) -> f64 {
        self.droop_slope * (h + self.ihc)
    }

    fn raw_descending(&self, h: f64) -> f64 {
        let l1 = self.recoil_asymptote(h);
        let l2 = self.droop_asymptote(h);
        let knee = if self.blend == 0.0 {
            l1.min(l2)
        } else {
            let half_diff = 0.5 * (l1 - l2);
            0.5 * (l1 + l2) - (half_diff * half_diff + self.blend * self.blend).sqrt()
        };
        knee.max(-self.jr + self.recoil_slope * h)
    }

    /// Polarization on the descending (upper) branch of the major loop.
    pub fn descending_j(&self, h: f64) -> f64 {
        self.raw_descending(h).max(-self.raw_descending(-h))
    }

    /// Polarization on the ascending (lower) branch, `−J_desc(−H)`.
    pub fn ascending_j(&self, h: f64) -> f64 {
        -self.descending_j(-h)
    }

    pub fn descending_b(&self, h: f64) -> f64 {
        self.descending_j(h) + MU_0 * h
    }

    pub fn ascending_b(&self, h: f64) -> f64 {
        self.ascending_j(h) + MU_0 * h
    }
}

/// Offset of the hyperbolic blend at the asymptote crossing.
///
/// Equals the gap between the corner and a circular arc of radius `μ0·R`
/// tangent to both asymptotes in the `(μ0·H, J)` plane.
fn knee_blend_offset(mu_rec: f64, mu_g: f64, round_radius: f64) -> f64 {
    if round_radius == 0.0 {
        return 0.0;
    }
    let m1 = mu_rec - 1.0;
    let m2 = mu_g - 1.0;
    let n1 = (1.0 + m1 * m1).sqrt();
    let n2 = (1.0 + m2 * m2).sqrt();
    let reach = (n2 - n1) / (m2 - m1);
    let depth = (m2 * n1 - m1 * n2) / (m2 - m1);
    MU_0 * round_radius * (depth - (1.0 - reach * reach).max(0.0).sqrt())
}

/// Hysteresis memory of one magnet element: the `H = 0` intercept of its
/// active recoil line (signed, tesla).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagnetState {
    pub remanence: f64,
}

impl MagnetState {
    pub fn demagnetized() -> Self {
        MagnetState { remanence: 0.0 }
    }

    pub fn saturated(major: &MajorLoop) -> Self {
        MagnetState {
            remanence: major.jr(),
        }
    }

    /// Polarization on the active recoil line, clamped into the major loop.
    pub fn recoil_j(&self, major: &MajorLoop, h: f64) -> f64 {
        let on_line = self.remanence + major.recoil_slope() * h;
        on_line.clamp(major.ascending_j(h), major.descending_j(h))
    }

    pub fn recoil_b(&self, major: &MajorLoop, h: f64) -> f64 {
        self.recoil_j(major, h) + MU_0 * h
    }

    /// State after the operating point visits `h`.
    ///
    /// The recoil line is dragged along the major loop when it would leave
    /// it; inside the loop the state is unchanged.
    pub fn updated(&self, major: &MajorLoop, h: f64) -> MagnetState {
        let on_line = self.remanence + major.recoil_slope() * h;
        let upper = major.descending_j(h);
        let lower = major.ascending_j(h);
        let remanence = if on_line > upper {
            upper - major.recoil_slope() * h
        } else if on_line < lower {
            lower - major.recoil_slope() * h
        } else {
            return *self;
        };
        MagnetState {
            remanence: remanence.clamp(-major.jr(), major.jr()),
        }
    }

    pub fn curve<'a>(&self, major: &'a MajorLoop) -> RecoilCurve<'a> {
        RecoilCurve {
            major,
            state: *self,
        }
    }
}

/// The `B(H)` characteristic of one element: its recoil line clamped into
/// the major loop.
#[derive(Clone, Copy, Debug)]
pub struct RecoilCurve<'a> {
    major: &'a MajorLoop,
    state: MagnetState,
}

impl crate::circuit::Characteristic for RecoilCurve<'_> {
    fn flux_density(&self, h: f64) -> f64 {
        self.state.recoil_b(self.major, h)
    }

    fn field_scale(&self) -> f64 {
        self.major.ihc()
    }
}

/// A catalog entry: material parameters plus free-text metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    #[serde(flatten)]
    pub spec: MagnetSpec,
    pub family: String,
    pub temperature_sensitivity: String,
}

pub const PRESET_NAMES: [&str; 7] = [
    "studied-LCF",
    "NdFeB-1.2T",
    "AlNiCo",
    "MnBi",
    "MnAl",
    "FeCrCo",
    "FeN",
];

// Droop permeabilities for qualitative catalog labels.
const DROOP_HIGH: f64 = 100.0;
const DROOP_LOW: f64 = 30.0;
const DROOP_NEGLIGIBLE: f64 = 5.0;

fn midpoint(lo: f64, hi: f64) -> f64 {
    0.5 * (lo + hi)
}

/// Look up a catalog preset by name.
pub fn preset(name: &str) -> Result<MagnetSpec> {
    preset_entry(name).map(|p| p.spec)
}

pub fn preset_entry(name: &str) -> Result<Preset> {
    let entry = |spec: MagnetSpec, family: &str, temp: &str| Preset {
        spec,
        family: family.to_string(),
        temperature_sensitivity: temp.to_string(),
    };
    let spec = |br: f64, ihc: f64, mu_rec: f64, mu_g: f64, r: f64| MagnetSpec {
        name: name.to_string(),
        br,
        ihc,
        mu_rec,
        mu_g,
        round_radius: r,
    };
    let p = match name {
        "studied-LCF" => entry(spec(1.0, 110e3, 1.1, 100.0, 100e3), "LCF", "Low"),
        "NdFeB-1.2T" => entry(
            spec(1.2, midpoint(800e3, 1000e3), 1.05, DROOP_NEGLIGIBLE, 0.0),
            "HCF",
            "Moderate-negative",
        ),
        "AlNiCo" => entry(
            spec(
                midpoint(0.6, 1.35),
                midpoint(40e3, 130e3),
                midpoint(3.0, 5.0),
                DROOP_HIGH,
                0.0,
            ),
            "LCF",
            "Very low",
        ),
        "MnBi" => entry(
            spec(
                midpoint(0.4, 0.6),
                midpoint(100e3, 300e3),
                midpoint(1.1, 1.3),
                DROOP_NEGLIGIBLE,
                0.0,
            ),
            "LCF",
            "Positive coefficient of coercivity",
        ),
        "MnAl" => entry(
            spec(
                midpoint(0.5, 0.8),
                midpoint(60e3, 120e3),
                midpoint(1.2, 1.4),
                DROOP_LOW,
                0.0,
            ),
            "LCF",
            "Moderate",
        ),
        "FeCrCo" => entry(
            spec(
                midpoint(1.0, 1.4),
                midpoint(20e3, 60e3),
                midpoint(3.0, 5.0),
                DROOP_LOW,
                0.0,
            ),
            "LCF",
            "Low",
        ),
        // Only bounds are known: iHc < 240 kA/m, Br > 1.0 T.
        "FeN" => entry(
            spec(1.1, midpoint(0.0, 240e3), 1.1, DROOP_HIGH, 0.0),
            "LCF",
            "Very low",
        ),
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESET_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(p)
}

pub fn catalog() -> Vec<Preset> {
    PRESET_NAMES
        .iter()
        .map(|n| preset_entry(n).expect("catalog names are valid"))
        .collect()
}

#[derive(Serialize)]
struct CatalogFile<'a> {
    material: &'a [Preset],
}

/// Serialize presets as TOML, one `[[material]]` record each.
pub fn catalog_to_toml(presets: &[Preset]) -> String {
    toml::to_string(&CatalogFile { material: presets }).expect("presets serialize")
}

/// Read a single magnet spec from TOML, either a bare table or the first
/// `[[material]]` record of an exported catalog.
pub fn spec_from_toml(text: &str) -> Result<MagnetSpec> {
    #[derive(Deserialize)]
    struct Catalog {
        material: Vec<Preset>,
    }
    let spec = match toml::from_str::<MagnetSpec>(text) {
        Ok(spec) => spec,
        Err(bare_err) => {
            let catalog: Catalog = toml::from_str(text)
                .map_err(|_| Error::Config(format!("material file: {bare_err}")))?;
            catalog
                .material
                .into_iter()
                .next()
                .ok_or_else(|| Error::Config("material file has no records".into()))?
                .spec
        }
    };
    spec.validate()?;
    Ok(spec)
}
