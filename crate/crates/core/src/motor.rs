//! Lumped pole assembly: one equivalent HCF magnet and two LCF magnets.
//!
//! Each magnet is split into elements with their own permeance coefficient.
//! Elements see the armature MMF as a shift of their load line and do not
//! interact with one another. Phase-A flux linkage is the phasor sum of the
//! magnet fluxes, each tilted by its flux-phasor angle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{solve_operating_point, LoadLine, OperatingPoint};
use crate::material::{MagnetSpec, MagnetState, MajorLoop};
use crate::protocol::Waveform;
use crate::{Error, Result, MU_0};

pub const MIN_SAMPLES_PER_PERIOD: usize = 64;

/// Position of a magnet in the pole.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum MagnetRole {
    /// Magnet 1, high coercive force.
    Hcf,
    /// Magnet 2, demagnetized by positive `i_q`.
    Lcf2,
    /// Magnet 3, magnetized by positive `i_q`.
    Lcf3,
}

impl MagnetRole {
    pub const ALL: [MagnetRole; 3] = [MagnetRole::Hcf, MagnetRole::Lcf2, MagnetRole::Lcf3];

    pub fn index(self) -> usize {
        match self {
            MagnetRole::Hcf => 0,
            MagnetRole::Lcf2 => 1,
            MagnetRole::Lcf3 => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MagnetRole::Hcf => "magnet-1 (HCF)",
            MagnetRole::Lcf2 => "magnet-2 (LCF)",
            MagnetRole::Lcf3 => "magnet-3 (LCF)",
        }
    }
}

/// Geometry and coupling of one magnet instance.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnetLayout {
    /// Magnet length along magnetization, m.
    pub length: f64,
    /// Cross-section, m².
    pub area: f64,
    /// Nominal permeance coefficient.
    pub pc: f64,
    /// Relative spread of element permeance coefficients around `pc`.
    pub pc_spread: f64,
    pub elements: usize,
    pub k_d: f64,
    pub k_q: f64,
    /// Flux-phasor angle, electrical rad.
    pub alpha: f64,
    /// Leakage factor σ in (0, 1].
    pub leakage: f64,
    pub enabled: bool,
}

impl MagnetLayout {
    /// Element permeance coefficients, evenly spread over `pc·(1 ± spread)`.
    pub fn element_pcs(&self) -> Vec<f64> {
        let n = self.elements;
        if n == 1 {
            return vec![self.pc];
        }
        (0..n)
            .map(|i| {
                let u = 2.0 * i as f64 / (n - 1) as f64 - 1.0;
                self.pc * (1.0 + self.pc_spread * u)
            })
            .collect()
    }
}

/// Field state of one element at its last operating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ElementField {
    pub h: f64,
    pub b: f64,
    pub j: f64,
    pub remanence: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub pc: f64,
    pub state: MagnetState,
    pub field: ElementField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MagnetInstance {
    pub spec: MagnetSpec,
    major: MajorLoop,
    pub layout: MagnetLayout,
    pub elements: Vec<Element>,
}

impl MagnetInstance {
    pub fn new(spec: MagnetSpec, layout: MagnetLayout, initial: MagnetState) -> Result<Self> {
        spec.validate()?;
        let bad = |what: &str| Err(Error::Config(format!("magnet `{}`: {what}", spec.name)));
        if layout.elements == 0 {
            return bad("needs at least one element");
        }
        if !(layout.length > 0.0 && layout.area > 0.0) {
            return bad("length and area must be positive");
        }
        if !(layout.leakage > 0.0 && layout.leakage <= 1.0) {
            return bad("leakage factor must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&layout.pc_spread) {
            return bad("pc spread must lie in [0, 1)");
        }
        let pcs = layout.element_pcs();
        if pcs.iter().any(|pc| !(pc.is_finite() && *pc > 0.0)) {
            return bad("element permeance coefficients must be positive");
        }
        if initial.remanence.abs() > spec.jr() {
            return bad("initial remanence exceeds Jr");
        }
        let field = ElementField {
            h: 0.0,
            b: initial.remanence,
            j: initial.remanence,
            remanence: initial.remanence,
        };
        let elements = pcs
            .into_iter()
            .map(|pc| Element {
                pc,
                state: initial,
                field,
            })
            .collect();
        Ok(MagnetInstance {
            major: spec.major_loop(),
            spec,
            layout,
            elements,
        })
    }

    pub fn major_loop(&self) -> &MajorLoop {
        &self.major
    }

    /// Volume of one element, m³.
    pub fn element_volume(&self) -> f64 {
        self.layout.area * self.layout.length / self.elements.len() as f64
    }

    pub fn mean_flux_density(&self) -> f64 {
        self.elements.iter().map(|e| e.field.b).sum::<f64>() / self.elements.len() as f64
    }

    pub fn mean_remanence(&self) -> f64 {
        self.elements.iter().map(|e| e.state.remanence).sum::<f64>() / self.elements.len() as f64
    }

    /// Solve one element against a load line shifted by `shift` and advance
    /// its hysteresis state.
    pub fn solve_element(&mut self, index: usize, shift: f64) -> Result<ElementField> {
        let major = self.major;
        let element = &mut self.elements[index];
        let line = LoadLine::new(element.pc, shift)?;
        let OperatingPoint { h, b } = solve_operating_point(&element.state.curve(&major), &line)?;
        element.state = element.state.updated(&major, h);
        element.field = ElementField {
            h,
            b,
            j: b - MU_0 * h,
            remanence: element.state.remanence,
        };
        Ok(element.field)
    }
}

/// Armature field offset seen by a magnet: `(N/l_m)·(k_d·i_d + k_q·i_q)`.
pub fn applied_field(inst: &MagnetInstance, turns_per_pole: f64, i_d: f64, i_q: f64) -> f64 {
    (turns_per_pole / inst.layout.length) * (inst.layout.k_d * i_d + inst.layout.k_q * i_q)
}

/// Per-magnet element fields after one solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSnapshot {
    pub magnets: [Vec<ElementField>; 3],
}

impl FieldSnapshot {
    pub fn magnet(&self, role: MagnetRole) -> &[ElementField] {
        &self.magnets[role.index()]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoleAssembly {
    magnets: [MagnetInstance; 3],
    pub turns_per_pole: f64,
    pub pole_pairs: u32,
    pub rated_speed_rpm: f64,
    pub phase_turns: f64,
    pub harmonic_3: f64,
}

impl PoleAssembly {
    pub fn new(
        magnets: [MagnetInstance; 3],
        turns_per_pole: f64,
        pole_pairs: u32,
        rated_speed_rpm: f64,
        phase_turns: f64,
        harmonic_3: f64,
    ) -> Result<Self> {
        let [hcf, lcf2, lcf3] = &magnets;
        if hcf.layout.k_q != 0.0 {
            return Err(Error::Config("HCF magnet must have k_q = 0".into()));
        }
        if lcf2.layout.k_q > 0.0 || lcf2.layout.k_q != -lcf3.layout.k_q {
            return Err(Error::Config(
                "LCF magnets need k_q of equal magnitude, magnet 2 non-positive".into(),
            ));
        }
        if !(turns_per_pole > 0.0 && phase_turns > 0.0 && rated_speed_rpm > 0.0) {
            return Err(Error::Config(
                "turns and rated speed must be positive".into(),
            ));
        }
        if pole_pairs == 0 {
            return Err(Error::Config("pole_pairs must be at least 1".into()));
        }
        if !harmonic_3.is_finite() {
            return Err(Error::Config("harmonic_3 must be finite".into()));
        }
        Ok(PoleAssembly {
            magnets,
            turns_per_pole,
            pole_pairs,
            rated_speed_rpm,
            phase_turns,
            harmonic_3,
        })
    }

    pub fn magnet(&self, role: MagnetRole) -> &MagnetInstance {
        &self.magnets[role.index()]
    }

    pub fn magnet_mut(&mut self, role: MagnetRole) -> &mut MagnetInstance {
        &mut self.magnets[role.index()]
    }

    pub fn magnets(&self) -> &[MagnetInstance; 3] {
        &self.magnets
    }

    /// Electrical frequency at `speed_rpm`, Hz.
    pub fn electrical_frequency(&self, speed_rpm: f64) -> f64 {
        self.pole_pairs as f64 * speed_rpm / 60.0
    }

    /// Solve every element at the given rotor-frame currents.
    pub fn solve(&mut self, i_d: f64, i_q: f64) -> Result<FieldSnapshot> {
        let turns = self.turns_per_pole;
        let mut fields: [Vec<ElementField>; 3] = Default::default();
        for role in MagnetRole::ALL {
            let inst = &mut self.magnets[role.index()];
            let shift = applied_field(inst, turns, i_d, i_q);
            for k in 0..inst.elements.len() {
                let field = inst.solve_element(k, shift).map_err(|e| Error::Element {
                    magnet: role.label(),
                    element: k,
                    source: Box::new(e),
                })?;
                fields[role.index()].push(field);
            }
        }
        Ok(FieldSnapshot { magnets: fields })
    }

    /// Phase-A flux-linkage phasor, Wb.
    pub fn flux_phasor(&self) -> Complex64 {
        let sum: Complex64 = self
            .magnets
            .iter()
            .filter(|m| m.layout.enabled)
            .map(|m| {
                let flux = m.layout.leakage * m.mean_flux_density() * m.layout.area;
                Complex64::from_polar(flux, m.layout.alpha)
            })
            .sum();
        sum * self.phase_turns
    }

    /// Phase-A flux linkage and back-EMF over one electrical period.
    pub fn synth_waveforms(
        &self,
        samples_per_period: usize,
        speed_rpm: f64,
    ) -> Result<PhaseWaveforms> {
        if samples_per_period < MIN_SAMPLES_PER_PERIOD {
            return Err(Error::Config(format!(
                "samples_per_period must be at least {MIN_SAMPLES_PER_PERIOD}, got {samples_per_period}"
            )));
        }
        if !(speed_rpm.is_finite() && speed_rpm > 0.0) {
            return Err(Error::Config(format!(
                "speed must be positive, got {speed_rpm}"
            )));
        }
        let psi = self.flux_phasor();
        let (amp, angle) = (psi.norm(), psi.arg());
        let n = samples_per_period;
        let dt = 1.0 / (self.electrical_frequency(speed_rpm) * n as f64);
        let flux: Vec<f64> = (0..n)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / n as f64;
                amp * (theta + angle).cos()
                    + self.harmonic_3 * amp * (3.0 * theta + 3.0 * angle).cos()
            })
            .collect();
        let emf: Vec<f64> = (0..n)
            .map(|k| {
                let next = flux[(k + 1) % n];
                let prev = flux[(k + n - 1) % n];
                -(next - prev) / (2.0 * dt)
            })
            .collect();
        Ok(PhaseWaveforms {
            flux: Waveform::uniform(dt, flux)?,
            emf: Waveform::uniform(dt, emf)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseWaveforms {
    pub flux: Waveform,
    pub emf: Waveform,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::material::preset;
    use crate::protocol::fundamental;

    fn layout(k_q: f64, alpha: f64) -> MagnetLayout {
        MagnetLayout {
            length: 4e-3,
            area: 1.8e-3,
            pc: 4.7,
            pc_spread: 0.2,
            elements: 5,
            k_d: 1.0,
            k_q,
            alpha,
            leakage: 0.9,
            enabled: true,
        }
    }

    fn assembly(lcf_state: MagnetState) -> PoleAssembly {
        let lcf = preset("studied-LCF").unwrap();
        let hcf = preset("NdFeB-1.2T").unwrap();
        let full = MagnetState::saturated(&hcf.major_loop());
        PoleAssembly::new(
            [
                MagnetInstance::new(hcf, layout(0.0, 0.0), full).unwrap(),
                MagnetInstance::new(lcf.clone(), layout(-0.3, PI / 6.0), lcf_state).unwrap(),
                MagnetInstance::new(lcf, layout(0.3, -PI / 6.0), lcf_state).unwrap(),
            ],
            60.0,
            3,
            3000.0,
            20.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn element_pcs_spread() {
        let pcs = layout(0.0, 0.0).element_pcs();
        let expected = [3.76, 4.23, 4.7, 5.17, 5.64];
        for (a, b) in pcs.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn applied_field_values() {
        let asm = assembly(MagnetState::demagnetized());
        let lcf2 = asm.magnet(MagnetRole::Lcf2);
        let lcf3 = asm.magnet(MagnetRole::Lcf3);
        assert_eq!(applied_field(lcf2, 60.0, 0.0, 0.0), 0.0);
        let pulse = applied_field(lcf2, 60.0, 1000.0, 0.0);
        assert!((pulse - 1.5e7).abs() < 1e-3);
        let q2 = applied_field(lcf2, 60.0, 0.0, 60.0);
        let q3 = applied_field(lcf3, 60.0, 0.0, 60.0);
        assert!(q2 < 0.0 && q3 > 0.0);
        assert_eq!(q2, -q3);
        assert_eq!(
            applied_field(asm.magnet(MagnetRole::Hcf), 60.0, 0.0, 60.0),
            0.0
        );
    }

    #[test]
    fn demagnetized_lcf_sits_at_origin_hcf_on_recoil_line() {
        let mut asm = assembly(MagnetState::demagnetized());
        let snap = asm.solve(0.0, 0.0).unwrap();
        for role in [MagnetRole::Lcf2, MagnetRole::Lcf3] {
            for f in snap.magnet(role) {
                assert!(f.h.abs() < 1e-3 && f.b.abs() < 1e-9);
            }
        }
        let pcs = asm.magnet(MagnetRole::Hcf).layout.element_pcs();
        for (f, pc) in snap.magnet(MagnetRole::Hcf).iter().zip(pcs) {
            let closed = pc * 1.2 / (1.05 + pc);
            assert!((f.b - closed).abs() < 1e-9);
            assert!((f.j - (f.b - MU_0 * f.h)).abs() < 1e-15);
        }
    }

    #[test]
    fn saturated_lcf_settles_on_open_circuit_point() {
        // Sharp knee and high pc keep the open-circuit point on the recoil line.
        let mut asm = assembly(MagnetState { remanence: 1.0 });
        for role in [MagnetRole::Lcf2, MagnetRole::Lcf3] {
            let m = asm.magnet_mut(role);
            m.spec = m.spec.with_round_radius(0.0);
            *m = MagnetInstance::new(
                m.spec.clone(),
                MagnetLayout {
                    pc: 20.0,
                    ..m.layout.clone()
                },
                MagnetState { remanence: 1.0 },
            )
            .unwrap();
        }
        let snap = asm.solve(0.0, 0.0).unwrap();
        let pcs = asm.magnet(MagnetRole::Lcf2).layout.element_pcs();
        for (f, pc) in snap.magnet(MagnetRole::Lcf2).iter().zip(pcs) {
            let closed = pc / (1.1 + pc);
            assert!(((f.b - closed) / closed).abs() < 0.02);
        }
    }

    #[test]
    fn strong_negative_d_current_reverses_lcf() {
        let mut asm = assembly(MagnetState { remanence: 1.0 });
        let snap = asm.solve(-60.0, 0.0).unwrap();
        for role in [MagnetRole::Lcf2, MagnetRole::Lcf3] {
            assert!(snap.magnet(role).iter().all(|f| f.j < 0.0));
        }
        asm.solve(0.0, 0.0).unwrap();
        for role in [MagnetRole::Lcf2, MagnetRole::Lcf3] {
            assert!(asm
                .magnet(role)
                .elements
                .iter()
                .all(|e| e.state.remanence < 0.0));
        }
    }

    #[test]
    fn phasor_geometry() {
        let mut asm = assembly(MagnetState::demagnetized());
        asm.solve(0.0, 0.0).unwrap();
        // Both LCF empty: only the on-axis HCF remains.
        assert!(asm.flux_phasor().arg().abs() < 1e-15);

        let mut asm = assembly(MagnetState { remanence: 0.8 });
        asm.solve(0.0, 0.0).unwrap();
        assert!(asm.flux_phasor().arg().abs() < 1e-12);

        asm.magnet_mut(MagnetRole::Hcf).layout.enabled = false;
        for e in &mut asm.magnet_mut(MagnetRole::Lcf2).elements {
            e.field.b = 0.0;
        }
        let angle = asm.flux_phasor().arg();
        assert!((angle + PI / 6.0).abs() < 1e-12);

        let mut asm = assembly(MagnetState::demagnetized());
        asm.solve(0.0, 0.0).unwrap();
        asm.magnet_mut(MagnetRole::Hcf).layout.enabled = false;
        assert_eq!(asm.flux_phasor().norm(), 0.0);
    }

    #[test]
    fn emf_fundamental_is_omega_times_flux() {
        let asm = assembly(MagnetState::demagnetized());
        // Force a 0.1 Wb phasor through the HCF instance alone.
        let mut asm = asm;
        let hcf = asm.magnet_mut(MagnetRole::Hcf);
        let per_b = 0.9 * 1.8e-3 * 20.0;
        for e in &mut hcf.elements {
            e.field.b = 0.1 / per_b;
        }
        for role in [MagnetRole::Lcf2, MagnetRole::Lcf3] {
            for e in &mut asm.magnet_mut(role).elements {
                e.field.b = 0.0;
            }
        }
        assert!((asm.flux_phasor().norm() - 0.1).abs() < 1e-12);
        assert!((asm.electrical_frequency(3000.0) - 150.0).abs() < 1e-12);
        for samples in [256, 360] {
            let w = asm.synth_waveforms(samples, 3000.0).unwrap();
            let e = fundamental(&w.emf).unwrap();
            let expected = 2.0 * PI * 150.0 * 0.1;
            assert!(((e.amplitude - expected) / expected).abs() < 1e-3);
            assert!((expected - 94.25).abs() < 0.01);
        }
    }

    #[test]
    fn emf_of_reversed_phasor_is_negated() {
        let mut asm = assembly(MagnetState { remanence: 0.7 });
        asm.solve(0.0, 0.0).unwrap();
        let w = asm.synth_waveforms(128, 3000.0).unwrap();
        for m in asm.magnets.iter_mut() {
            for e in &mut m.elements {
                e.field.b = -e.field.b;
            }
        }
        let neg = asm.synth_waveforms(128, 3000.0).unwrap();
        for (a, b) in w.emf.values().iter().zip(neg.emf.values()) {
            assert!((a + b).abs() < 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn zero_flux_gives_zero_emf() {
        let mut asm = assembly(MagnetState::demagnetized());
        asm.solve(0.0, 0.0).unwrap();
        asm.magnet_mut(MagnetRole::Hcf).layout.enabled = false;
        let w = asm.synth_waveforms(64, 3000.0).unwrap();
        assert!(w.emf.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn too_few_samples_rejected() {
        let asm = assembly(MagnetState::demagnetized());
        assert!(matches!(
            asm.synth_waveforms(63, 3000.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn element_order_does_not_matter() {
        let base = Config::default().assembly().unwrap();
        let mut forward = base.clone();
        forward.solve(1000.0, 0.0).unwrap();
        forward.solve(-40.0, 25.0).unwrap();

        let mut reverse = base;
        for (i_d, i_q) in [(1000.0, 0.0), (-40.0, 25.0)] {
            for role in MagnetRole::ALL.into_iter().rev() {
                let turns = reverse.turns_per_pole;
                let inst = reverse.magnet_mut(role);
                let shift = applied_field(inst, turns, i_d, i_q);
                for k in (0..inst.elements.len()).rev() {
                    inst.solve_element(k, shift).unwrap();
                }
            }
        }
        assert_eq!(forward, reverse);
    }

    #[test]
    fn invariants_enforced() {
        let lcf = preset("studied-LCF").unwrap();
        let empty = MagnetLayout {
            elements: 0,
            ..layout(0.0, 0.0)
        };
        assert!(MagnetInstance::new(lcf.clone(), empty, MagnetState::demagnetized()).is_err());
        let leaky = MagnetLayout {
            leakage: 0.0,
            ..layout(0.0, 0.0)
        };
        assert!(MagnetInstance::new(lcf.clone(), leaky, MagnetState::demagnetized()).is_err());

        let asm = assembly(MagnetState::demagnetized());
        let mut magnets = asm.magnets.clone();
        magnets[2].layout.k_q = 0.2;
        assert!(PoleAssembly::new(magnets, 60.0, 3, 3000.0, 20.0, 0.0).is_err());
    }
}
