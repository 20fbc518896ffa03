use memflux::config::Config;
use memflux::motor::MagnetRole;
use memflux::protocol::{run_protocol, ProtocolSetup, RunResult, REFERENCE_INTERVAL};
use memflux::Error;

fn setup() -> ProtocolSetup {
    Config::default().setup().unwrap()
}

fn run(d: f64, q: f64) -> RunResult {
    run_protocol(&setup(), d, q).unwrap()
}

#[test]
fn runs_are_deterministic() {
    let s = setup();
    for (d, q) in [(0.0, 0.0), (-60.0, 0.0), (-25.0, 40.0)] {
        assert_eq!(
            run_protocol(&s, d, q).unwrap(),
            run_protocol(&s, d, q).unwrap()
        );
    }
}

#[test]
fn reference_interval_ignores_load_point() {
    let base = run(0.0, 0.0);
    for (d, q) in [(-60.0, 0.0), (30.0, 50.0), (-10.0, -60.0)] {
        let r = run(d, q);
        assert_eq!(r.flux_2, base.flux_2);
        assert_eq!(r.emf_2, base.emf_2);
        assert_eq!(
            r.snapshots[REFERENCE_INTERVAL],
            base.snapshots[REFERENCE_INTERVAL]
        );
    }
}

#[test]
fn pulse_fully_magnetizes_lcf() {
    let r = run(0.0, 0.0);
    let s = setup();
    for role in [MagnetRole::Lcf2, MagnetRole::Lcf3] {
        let jr = s.assembly.magnet(role).spec.jr();
        for f in r.pulse_snapshot().magnet(role) {
            assert!(f.remanence >= 0.98 * jr, "{role:?}: {}", f.remanence);
        }
    }
}

#[test]
fn hcf_is_not_disturbed() {
    let s = setup();
    let jr = s.assembly.magnet(MagnetRole::Hcf).spec.jr();
    for (d, q) in [(-60.0, 0.0), (0.0, 60.0), (-42.0, -42.0)] {
        let r = run_protocol(&s, d, q).unwrap();
        assert!((r.remanence_of(MagnetRole::Hcf) - jr).abs() < 1e-6);
    }
}

#[test]
fn zero_load_leaves_flux_unchanged() {
    let r = run(0.0, 0.0);
    assert!((r.ms.ms_flux - 1.0).abs() < 1e-12);
    assert!((r.ms.ms_emf - 1.0).abs() < 1e-12);
    assert_eq!(r.delta, 0.0);
    // Interval 3 at zero current settles where interval 2 did.
    for role in MagnetRole::ALL {
        let again = r.snapshots[3].magnet(role).iter();
        for (a, b) in again.zip(r.snapshots[REFERENCE_INTERVAL].magnet(role)) {
            assert!((a.b - b.b).abs() < 1e-9 && (a.remanence - b.remanence).abs() < 1e-9);
        }
    }
}

#[test]
fn open_circuit_self_demagnetizes_lcf() {
    let r = run(0.0, 0.0);
    for m in 0..2 {
        assert!(r.ms.ms_b[m] > 0.5 && r.ms.ms_b[m] < 0.7, "{:?}", r.ms);
        assert!(r.ms.ms_j[m] > r.ms.ms_b[m]);
    }
    // No-load flux-linkage calibration.
    assert!(
        (r.flux_2.amplitude - 0.1).abs() < 0.005,
        "{}",
        r.flux_2.amplitude
    );
}

#[test]
fn q_axis_mirror() {
    for (d, q) in [(0.0, 60.0), (-30.0, 45.0), (15.0, 5.0)] {
        let up = run(d, q);
        let down = run(d, -q);
        assert!((up.ms.ms_b[0] - down.ms.ms_b[1]).abs() < 1e-9);
        assert!((up.ms.ms_b[1] - down.ms.ms_b[0]).abs() < 1e-9);
        assert!((up.ms.ms_flux - down.ms.ms_flux).abs() < 1e-9);
        assert!((up.delta + down.delta).abs() < 1e-9);
        assert!(up.ms.ms_b[1] >= up.ms.ms_b[0] - 1e-9);
    }
}

#[test]
fn moderate_demagnetization() {
    let r = run(-60.0, 0.0);
    assert!(r.ms.ms_flux > 0.0 && r.ms.ms_flux < 1.0, "{}", r.ms.ms_flux);
    assert!(r.remanence[1] > 0.0 && r.remanence[1] < 0.755);
}

#[test]
fn ms_j_stays_bounded() {
    let s = setup();
    for d in [-60.0, -30.0, 0.0, 30.0, 60.0] {
        for q in [-60.0, 0.0, 60.0] {
            let r = run_protocol(&s, d, q).unwrap();
            for v in r.ms.ms_j {
                assert!(v.abs() <= 1.0 + 1e-9, "({d}, {q}): {v}");
            }
        }
    }
}

#[test]
fn out_of_range_load_rejected() {
    let s = setup();
    assert!(matches!(run_protocol(&s, -61.0, 0.0), Err(Error::Input(_))));
    assert!(matches!(
        run_protocol(&s, 0.0, f64::NAN),
        Err(Error::Input(_))
    ));
}

#[test]
fn degenerate_reference_reported() {
    // Disabling the HCF and weakening the LCF to nothing leaves no flux at
    // interval 2.
    let mut s = setup();
    s.assembly.magnet_mut(MagnetRole::Hcf).layout.enabled = false;
    for role in [MagnetRole::Lcf2, MagnetRole::Lcf3] {
        s.assembly.magnet_mut(role).layout.enabled = false;
    }
    assert!(matches!(
        run_protocol(&s, 0.0, 0.0),
        Err(Error::DegenerateReference { .. })
    ));
}

#[test]
fn waveforms_are_one_period() {
    let r = run(-20.0, 10.0);
    let n = Config::default().protocol.samples_per_period;
    assert_eq!(r.waveforms_2.flux.values().len(), n);
    assert_eq!(r.waveforms_4.emf.values().len(), n);
    let t = r.waveforms_2.flux.time();
    assert!((t[1] - t[0] - r.period / n as f64).abs() < 1e-15);
    assert!((1.0 / r.period - 150.0).abs() < 1e-9);
    // EMF fundamental is ω times the flux fundamental, to difference accuracy.
    let w = 2.0 * std::f64::consts::PI / r.period;
    assert!((r.emf_2.amplitude / (w * r.flux_2.amplitude) - 1.0).abs() < 1e-4);
}
