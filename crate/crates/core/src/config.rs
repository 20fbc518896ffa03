//! Run configuration.
//!
//! The shipped `config/default.toml` holds every default. User files are
//! merged over it key by key before deserialization, so partial files work
//! and unknown keys fail.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::material::{preset, MagnetSpec, MagnetState};
use crate::motor::{MagnetInstance, MagnetLayout, PoleAssembly};
use crate::protocol::{IntervalPlan, ProtocolSetup};
use crate::sweep::SweepGrid;
use crate::{Error, Result};

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub materials: MaterialsConfig,
    pub motor: MotorConfig,
    pub protocol: ProtocolConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialsConfig {
    pub lcf: MaterialChoice,
    pub hcf: MaterialChoice,
}

/// A catalog preset with optional per-field overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialChoice {
    pub preset: String,
    pub name: Option<String>,
    pub br: Option<f64>,
    pub ihc: Option<f64>,
    pub mu_rec: Option<f64>,
    pub mu_g: Option<f64>,
    pub round_radius: Option<f64>,
}

impl MaterialChoice {
    pub fn resolve(&self) -> Result<MagnetSpec> {
        let mut spec = preset(&self.preset)?;
        if let Some(name) = &self.name {
            spec.name = name.clone();
        }
        spec.br = self.br.unwrap_or(spec.br);
        spec.ihc = self.ihc.unwrap_or(spec.ihc);
        spec.mu_rec = self.mu_rec.unwrap_or(spec.mu_rec);
        spec.mu_g = self.mu_g.unwrap_or(spec.mu_g);
        spec.round_radius = self.round_radius.unwrap_or(spec.round_radius);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorConfig {
    pub turns_per_pole: f64,
    pub pole_pairs: u32,
    pub rated_speed_rpm: f64,
    pub phase_turns: f64,
    pub harmonic_3: f64,
    pub elements_per_magnet: usize,
    pub pc_spread: f64,
    pub lcf: LcfGeometry,
    pub hcf: HcfGeometry,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcfGeometry {
    pub length_m: f64,
    pub area_m2: f64,
    pub pc: f64,
    pub k_d: f64,
    pub k_q: f64,
    pub gamma_deg: f64,
    pub leakage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HcfGeometry {
    pub length_m: f64,
    pub area_m2: f64,
    pub pc: f64,
    pub k_d: f64,
    pub leakage: f64,
    pub enabled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub pulse_current_a: f64,
    pub initial_periods: f64,
    pub pulse_periods: f64,
    pub no_load_periods: f64,
    pub load_periods: f64,
    pub final_periods: f64,
    pub samples_per_period: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub theta_steps: usize,
    pub current_min_a: f64,
    pub current_max_a: f64,
    pub current_steps: usize,
    pub parallelism: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for Config {
    fn default() -> Self {
        let config: Config = toml::from_str(DEFAULT_CONFIG).expect("shipped default config parses");
        config.validate().expect("shipped default config is valid");
        config
    }
}

fn merge(base: &mut toml::Value, overlay: toml::Value) {
    match (base, overlay) {
        (toml::Value::Table(base), toml::Value::Table(overlay)) => {
            for (key, value) in overlay {
                match base.get_mut(&key) {
                    Some(slot) => merge(slot, value),
                    None => {
                        base.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

impl Config {
    /// Parse a user config, filling omitted keys from the shipped defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut base: toml::Value =
            toml::from_str(DEFAULT_CONFIG).expect("shipped default config parses");
        let overlay: toml::Value =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut base, overlay);
        let config: Config = base
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Check every section by building the objects it describes.
    pub fn validate(&self) -> Result<()> {
        self.assembly()?;
        self.plan()?;
        self.grid()?;
        if self.protocol.samples_per_period < crate::motor::MIN_SAMPLES_PER_PERIOD {
            return Err(Error::Config(format!(
                "samples_per_period must be at least {}",
                crate::motor::MIN_SAMPLES_PER_PERIOD
            )));
        }
        Ok(())
    }

    /// A fresh pole: LCF elements demagnetized, HCF elements saturated.
    pub fn assembly(&self) -> Result<PoleAssembly> {
        let m = &self.motor;
        let lcf_spec = self.materials.lcf.resolve()?;
        let hcf_spec = self.materials.hcf.resolve()?;
        let gamma = m.lcf.gamma_deg.to_radians();
        if m.lcf.k_q < 0.0 {
            return Err(Error::Config(
                "motor.lcf.k_q is a magnitude and must be >= 0".into(),
            ));
        }
        let lcf_layout = |k_q: f64, alpha: f64| MagnetLayout {
            length: m.lcf.length_m,
            area: m.lcf.area_m2,
            pc: m.lcf.pc,
            pc_spread: m.pc_spread,
            elements: m.elements_per_magnet,
            k_d: m.lcf.k_d,
            k_q,
            alpha,
            leakage: m.lcf.leakage,
            enabled: true,
        };
        let hcf_layout = MagnetLayout {
            length: m.hcf.length_m,
            area: m.hcf.area_m2,
            pc: m.hcf.pc,
            pc_spread: m.pc_spread,
            elements: m.elements_per_magnet,
            k_d: m.hcf.k_d,
            k_q: 0.0,
            alpha: 0.0,
            leakage: m.hcf.leakage,
            enabled: m.hcf.enabled,
        };
        let hcf_full = MagnetState::saturated(&hcf_spec.major_loop());
        PoleAssembly::new(
            [
                MagnetInstance::new(hcf_spec, hcf_layout, hcf_full)?,
                MagnetInstance::new(
                    lcf_spec.clone(),
                    lcf_layout(-m.lcf.k_q, gamma),
                    MagnetState::demagnetized(),
                )?,
                MagnetInstance::new(
                    lcf_spec,
                    lcf_layout(m.lcf.k_q, -gamma),
                    MagnetState::demagnetized(),
                )?,
            ],
            m.turns_per_pole,
            m.pole_pairs,
            m.rated_speed_rpm,
            m.phase_turns,
            m.harmonic_3,
        )
    }

    pub fn plan(&self) -> Result<IntervalPlan> {
        let p = &self.protocol;
        IntervalPlan::with_durations(
            p.pulse_current_a,
            [
                p.initial_periods,
                p.pulse_periods,
                p.no_load_periods,
                p.load_periods,
                p.final_periods,
            ],
        )
    }

    pub fn grid(&self) -> Result<SweepGrid> {
        let s = &self.sweep;
        SweepGrid::new(
            (s.theta_min_deg, s.theta_max_deg),
            s.theta_steps,
            (s.current_min_a, s.current_max_a),
            s.current_steps,
        )
    }

    pub fn setup(&self) -> Result<ProtocolSetup> {
        let grid = self.grid()?;
        Ok(ProtocolSetup {
            assembly: self.assembly()?,
            plan: self.plan()?,
            samples_per_period: self.protocol.samples_per_period,
            current_limit: grid.current_limit(),
        })
    }
}
