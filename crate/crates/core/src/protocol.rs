//! Five-interval magnetization protocol and fundamental extraction.
//!
//! | interval | purpose       | current                    |
//! |----------|---------------|----------------------------|
//! | 0        | initial state | zero                       |
//! | 1        | pulse         | `i_d = +pulse`, `i_q = 0`  |
//! | 2        | no-load       | zero                       |
//! | 3        | on-load       | the sweep point `(i_d, i_q)` |
//! | 4        | no-load       | zero                       |
//!
//! Currents are constant in the rotor frame within an interval and the
//! lumped model is quasi-static, so each interval is settled by one solve.
//! Durations only set the reported time base.

use std::f64::consts::PI;

use serde::Serialize;

use crate::metrics::{self, ElementSample, MsReport};
use crate::motor::{FieldSnapshot, MagnetRole, PhaseWaveforms, PoleAssembly};
use crate::{Error, Result};

pub const MIN_FUNDAMENTAL_SAMPLES: usize = 64;
/// Smallest interval-2 amplitude accepted as a reference.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

/// One uniformly sampled period of a signal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Waveform {
    time: Vec<f64>,
    values: Vec<f64>,
}

impl Waveform {
    pub fn new(time: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if time.len() != values.len() {
            return Err(Error::Input(format!(
                "{} time stamps for {} samples",
                time.len(),
                values.len()
            )));
        }
        Ok(Waveform { time, values })
    }

    pub fn uniform(dt: f64, values: Vec<f64>) -> Result<Self> {
        let time = (0..values.len()).map(|k| k as f64 * dt).collect();
        Self::new(time, values)
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Amplitude and phase of `a·cos(θ + φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fundamental {
    pub amplitude: f64,
    pub phase: f64,
}

/// First Fourier coefficient of one sampled period.
pub fn fundamental(waveform: &Waveform) -> Result<Fundamental> {
    let n = waveform.values.len();
    if n < MIN_FUNDAMENTAL_SAMPLES {
        return Err(Error::Input(format!(
            "need at least {MIN_FUNDAMENTAL_SAMPLES} samples, got {n}"
        )));
    }
    if waveform.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("waveform contains non-finite samples".into()));
    }
    let t = &waveform.time;
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::Input("time stamps must increase".into()));
    }
    let uniform = t
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt);
    if !uniform {
        return Err(Error::Input("waveform is not uniformly sampled".into()));
    }

    let (mut re, mut im) = (0.0, 0.0);
    for (k, v) in waveform.values.iter().enumerate() {
        let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
        re += v * c;
        im -= v * s;
    }
    let scale = 2.0 / n as f64;
    let (re, im) = (re * scale, im * scale);
    Ok(Fundamental {
        amplitude: re.hypot(im),
        phase: im.atan2(re),
    })
}

/// Wrap an angle into (−π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Phase of interval 4 relative to interval 2, in (−π, π].
///
/// A vanishing interval-4 amplitude has no defined phase; it is reported as
/// zero shift.
pub fn phase_shift(fund_4: &Fundamental, fund_2: &Fundamental) -> Result<f64> {
    if !(fund_2.amplitude > AMPLITUDE_FLOOR) {
        return Err(Error::DegenerateReference {
            amplitude: fund_2.amplitude,
        });
    }
    if fund_4.amplitude <= AMPLITUDE_FLOOR * fund_2.amplitude {
        return Ok(0.0);
    }
    Ok(wrap_angle(fund_4.phase - fund_2.phase))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum IntervalCurrent {
    Fixed {
        i_d: f64,
        i_q: f64,
    },
    /// Replaced by the run's load point.
    Load,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub label: String,
    /// Duration in electrical periods.
    pub periods: f64,
    pub current: IntervalCurrent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalPlan {
    intervals: Vec<Interval>,
}

pub const PULSE_INTERVAL: usize = 1;
pub const REFERENCE_INTERVAL: usize = 2;
pub const LOAD_INTERVAL: usize = 3;
pub const FINAL_INTERVAL: usize = 4;

impl IntervalPlan {
    /// The default sequence: T/6 idle, T/6 pulse, then one period each of
    /// no-load, load and no-load.
    pub fn standard(pulse_current: f64) -> Result<Self> {
        Self::with_durations(pulse_current, [1.0 / 6.0, 1.0 / 6.0, 1.0, 1.0, 1.0])
    }

    pub fn with_durations(pulse_current: f64, periods: [f64; 5]) -> Result<Self> {
        let zero = IntervalCurrent::Fixed { i_d: 0.0, i_q: 0.0 };
        let currents = [
            zero,
            IntervalCurrent::Fixed {
                i_d: pulse_current,
                i_q: 0.0,
            },
            zero,
            IntervalCurrent::Load,
            zero,
        ];
        let labels = ["initial", "pulse", "no-load", "on-load", "no-load"];
        let intervals = labels
            .iter()
            .zip(periods)
            .zip(currents)
            .map(|((label, periods), current)| Interval {
                label: label.to_string(),
                periods,
                current,
            })
            .collect();
        Self::new(intervals)
    }

    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        let plan = IntervalPlan { intervals };
        plan.validate()?;
        Ok(plan)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("interval plan: {msg}")));
        if self.intervals.len() != 5 {
            return bad(format!(
                "expected 5 intervals, got {}",
                self.intervals.len()
            ));
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            if !(iv.periods.is_finite() && iv.periods > 0.0) {
                return bad(format!("interval {k} needs a positive duration"));
            }
            let is_load = matches!(iv.current, IntervalCurrent::Load);
            if is_load != (k == LOAD_INTERVAL) {
                return bad(format!(
                    "only interval {LOAD_INTERVAL} carries the load point"
                ));
            }
            if let IntervalCurrent::Fixed { i_d, i_q } = iv.current {
                if !(i_d.is_finite() && i_q.is_finite()) {
                    return bad(format!("interval {k} current must be finite"));
                }
                if [0, REFERENCE_INTERVAL, FINAL_INTERVAL].contains(&k)
                    && (i_d != 0.0 || i_q != 0.0)
                {
                    return bad(format!("interval {k} must carry zero current"));
                }
                if k == PULSE_INTERVAL && i_q != 0.0 {
                    return bad("the pulse must be d-axis only".into());
                }
            }
        }
        Ok(())
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    fn currents(&self, k: usize, load: (f64, f64)) -> (f64, f64) {
        match self.intervals[k].current {
            IntervalCurrent::Fixed { i_d, i_q } => (i_d, i_q),
            IntervalCurrent::Load => load,
        }
    }
}

/// Everything a protocol run needs; cloned fresh for every run.
#[derive(Clone, Debug)]
pub struct ProtocolSetup {
    pub assembly: PoleAssembly,
    pub plan: IntervalPlan,
    pub samples_per_period: usize,
    /// Largest accepted |i_d| or |i_q| during the load interval, A.
    pub current_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub i_d_load: f64,
    pub i_q_load: f64,
    /// Electrical period at rated speed, s.
    pub period: f64,
    pub flux_2: Fundamental,
    pub flux_4: Fundamental,
    pub emf_2: Fundamental,
    pub emf_4: Fundamental,
    /// Phase shift of the flux fundamental, interval 4 against interval 2.
    pub delta: f64,
    /// Phase shift of the back-EMF fundamental.
    pub delta_emf: f64,
    pub waveforms_2: PhaseWaveforms,
    pub waveforms_4: PhaseWaveforms,
    /// Element fields at the end of each interval.
    pub snapshots: Vec<FieldSnapshot>,
    /// Mean element remanence per magnet after interval 4, T.
    pub remanence: [f64; 3],
    pub ms: MsReport,
}

impl RunResult {
    pub fn load_snapshot(&self) -> &FieldSnapshot {
        &self.snapshots[LOAD_INTERVAL]
    }

    pub fn pulse_snapshot(&self) -> &FieldSnapshot {
        &self.snapshots[PULSE_INTERVAL]
    }

    pub fn remanence_of(&self, role: MagnetRole) -> f64 {
        self.remanence[role.index()]
    }
}

/// MS(B) and MS(J) of both LCF magnets in one snapshot.
pub fn material_states(
    assembly: &PoleAssembly,
    snapshot: &FieldSnapshot,
) -> Result<MaterialStates> {
    let mut b = [0.0; 2];
    let mut j = [0.0; 2];
    let mut b_all = Vec::new();
    let mut j_all = Vec::new();
    for (slot, role) in [MagnetRole::Lcf2, MagnetRole::Lcf3].into_iter().enumerate() {
        let inst = assembly.magnet(role);
        let volume = inst.element_volume();
        let fields = snapshot.magnet(role);
        let bs: Vec<ElementSample> = fields
            .iter()
            .map(|f| ElementSample::aligned(f.b, volume))
            .collect();
        let js: Vec<ElementSample> = fields
            .iter()
            .map(|f| ElementSample::aligned(f.j, volume))
            .collect();
        b[slot] = metrics::ms_b(&bs, inst.spec.br)?;
        j[slot] = metrics::ms_j(&js, inst.spec.jr())?;
        // Both LCF magnets share a grade by construction, so one normalizer fits.
        b_all.extend(bs.iter().map(|s| ElementSample {
            value: s.value / inst.spec.br,
            ..*s
        }));
        j_all.extend(js.iter().map(|s| ElementSample {
            value: s.value / inst.spec.jr(),
            ..*s
        }));
    }
    Ok(MaterialStates {
        ms_b: b,
        ms_j: j,
        ms_b_total: metrics::ms_b(&b_all, 1.0)?,
        ms_j_total: metrics::ms_j(&j_all, 1.0)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaterialStates {
    /// MS(B) of magnets 2 and 3.
    pub ms_b: [f64; 2],
    pub ms_j: [f64; 2],
    /// Volume-weighted over both LCF magnets.
    pub ms_b_total: f64,
    pub ms_j_total: f64,
}

/// Run the five intervals on a fresh copy of the setup's assembly.
pub fn run_protocol(setup: &ProtocolSetup, i_d_load: f64, i_q_load: f64) -> Result<RunResult> {
    let limit = setup.current_limit;
    if !(i_d_load.is_finite() && i_q_load.is_finite())
        || i_d_load.abs() > limit
        || i_q_load.abs() > limit
    {
        return Err(Error::Input(format!(
            "load point ({i_d_load}, {i_q_load}) A outside the ±{limit} A limit"
        )));
    }
    let mut assembly = setup.assembly.clone();
    let speed = assembly.rated_speed_rpm;
    let period = 1.0 / assembly.electrical_frequency(speed);

    let mut snapshots = Vec::with_capacity(5);
    let mut waveforms = Vec::with_capacity(2);
    for k in 0..setup.plan.intervals().len() {
        let (i_d, i_q) = setup.plan.currents(k, (i_d_load, i_q_load));
        let wrap = |e: Error| Error::Interval {
            interval: k,
            i_d,
            i_q,
            source: Box::new(e),
        };
        snapshots.push(assembly.solve(i_d, i_q).map_err(wrap)?);
        if k == REFERENCE_INTERVAL || k == FINAL_INTERVAL {
            waveforms.push(
                assembly
                    .synth_waveforms(setup.samples_per_period, speed)
                    .map_err(wrap)?,
            );
        }
    }
    let waveforms_4 = waveforms.pop().expect("interval 4 recorded");
    let waveforms_2 = waveforms.pop().expect("interval 2 recorded");

    let flux_2 = fundamental(&waveforms_2.flux)?;
    let flux_4 = fundamental(&waveforms_4.flux)?;
    let emf_2 = fundamental(&waveforms_2.emf)?;
    let emf_4 = fundamental(&waveforms_4.emf)?;
    let delta = phase_shift(&flux_4, &flux_2)?;
    let delta_emf = phase_shift(&emf_4, &emf_2)?;

    let material = material_states(&assembly, &snapshots[LOAD_INTERVAL])?;
    let ms = MsReport {
        ms_b: material.ms_b,
        ms_j: material.ms_j,
        ms_b_total: material.ms_b_total,
        ms_j_total: material.ms_j_total,
        ms_flux: metrics::ms_flux(flux_4.amplitude, flux_2.amplitude, delta)?,
        ms_emf: metrics::ms_emf(emf_4.amplitude, emf_2.amplitude, delta_emf)?,
    };

    let remanence = MagnetRole::ALL.map(|r| assembly.magnet(r).mean_remanence());
    Ok(RunResult {
        i_d_load,
        i_q_load,
        period,
        flux_2,
        flux_4,
        emf_2,
        emf_4,
        delta,
        delta_emf,
        waveforms_2,
        waveforms_4,
        snapshots,
        remanence,
        ms,
    })
}
