use memflux::material::{preset, MagnetSpec, MagnetState, PRESET_NAMES};
use memflux::MU_0;
use proptest::prelude::*;

fn arb_spec() -> impl Strategy<Value = MagnetSpec> {
    (
        0.3..1.5f64,
        20e3..900e3f64,
        1.0..2.0f64,
        3.0..200.0f64,
        0.0..200e3f64,
    )
        .prop_map(|(br, ihc, mu_rec, mu_g_extra, r)| MagnetSpec {
            name: "arb".into(),
            br,
            ihc,
            mu_rec,
            mu_g: mu_rec + mu_g_extra,
            round_radius: r,
        })
        .prop_filter("knee at negative field", |s| s.validate().is_ok())
}

proptest! {
    #[test]
    fn branches_are_monotone(spec in arb_spec(), a in -3.0..3.0f64, step in 1e-3..0.5f64) {
        let major = spec.major_loop();
        let (h0, h1) = (a * spec.ihc, (a + step) * spec.ihc);
        prop_assert!(major.descending_b(h1) >= major.descending_b(h0) - 1e-12);
        prop_assert!(major.ascending_b(h1) >= major.ascending_b(h0) - 1e-12);
    }

    #[test]
    fn loop_is_point_symmetric(spec in arb_spec(), a in -4.0..4.0f64) {
        let major = spec.major_loop();
        let h = a * spec.ihc;
        prop_assert_eq!(major.ascending_j(h), -major.descending_j(-h));
        prop_assert!(major.descending_j(h) >= major.ascending_j(h));
    }

    #[test]
    fn polarization_saturates(spec in arb_spec(), a in -4.0..4.0f64) {
        let major = spec.major_loop();
        let h = a * spec.ihc;
        let s1 = MU_0 * (spec.mu_rec - 1.0);
        let bound = spec.br + s1 * h.abs() + 1e-12;
        prop_assert!(major.descending_j(h).abs() <= bound);
        prop_assert!(major.ascending_j(h).abs() <= bound);
    }

    #[test]
    fn negative_excursion_never_raises_remanence(
        spec in arb_spec(),
        start in -1.0..1.0f64,
        a in -4.0..0.0f64,
    ) {
        let major = spec.major_loop();
        let state = MagnetState { remanence: start * spec.br };
        let next = state.updated(&major, a * spec.ihc);
        prop_assert!(next.remanence <= state.remanence + 1e-12);
        prop_assert!(next.remanence.abs() <= spec.br);
    }

    #[test]
    fn positive_excursion_never_lowers_remanence(
        spec in arb_spec(),
        start in -1.0..1.0f64,
        a in 0.0..4.0f64,
    ) {
        let major = spec.major_loop();
        let state = MagnetState { remanence: start * spec.br };
        let next = state.updated(&major, a * spec.ihc);
        prop_assert!(next.remanence >= state.remanence - 1e-12);
    }

    #[test]
    fn recoil_stays_inside_loop(spec in arb_spec(), start in -1.0..1.0f64, a in -4.0..4.0f64) {
        let major = spec.major_loop();
        let h = a * spec.ihc;
        let j = MagnetState { remanence: start * spec.br }.recoil_j(&major, h);
        prop_assert!(j <= major.descending_j(h) && j >= major.ascending_j(h));
    }

    #[test]
    fn updated_state_is_on_its_curve(spec in arb_spec(), a in -4.0..4.0f64) {
        // After an update the recoil line passes through the loop point.
        let major = spec.major_loop();
        let h = a * spec.ihc;
        let next = MagnetState::saturated(&major).updated(&major, h);
        let j = next.recoil_j(&major, h);
        prop_assert!(j <= major.descending_j(h) + 1e-12);
        prop_assert_eq!(next.updated(&major, h), next);
    }
}

#[test]
fn strong_reverse_field_fully_reverses() {
    for name in PRESET_NAMES {
        let major = preset(name).unwrap().major_loop();
        let state = MagnetState::saturated(&major).updated(&major, -10.0 * major.ihc());
        // A rounded knee only approaches its asymptotes.
        assert!(
            (state.remanence + major.jr()).abs() < 1e-3 * major.jr(),
            "{name}"
        );
        let back = state.updated(&major, 10.0 * major.ihc());
        assert!(
            (back.remanence - major.jr()).abs() < 1e-3 * major.jr(),
            "{name}"
        );
    }
}

#[test]
fn coercivity_zeroes_polarization_on_sharp_loop() {
    for name in PRESET_NAMES {
        let spec = preset(name).unwrap().with_round_radius(0.0);
        let major = spec.major_loop();
        let j = major.descending_j(-spec.ihc);
        // Either the droop line reaches zero at -iHc, or the knee lies beyond it.
        assert!(
            j.abs() < 1e-12 || major.knee_field() < -spec.ihc,
            "{name}: {j}"
        );
    }
}
