use memflux::circuit::{solve_operating_point, Characteristic, LoadLine};
use memflux::material::{preset, MagnetState};
use proptest::prelude::*;

/// Sign change of B_magnet − B_line located on a dense uniform grid.
fn dense_scan<C: Characteristic>(curve: &C, line: &LoadLine, lo: f64, hi: f64) -> f64 {
    let n = 1_000_000;
    let step = (hi - lo) / n as f64;
    let r = |h: f64| curve.flux_density(h) - line.flux_density(h);
    let mut prev = r(lo);
    for k in 1..=n {
        let h = lo + step * k as f64;
        let cur = r(h);
        if prev <= 0.0 && cur >= 0.0 {
            // Linear interpolation inside the cell.
            return h - step * cur / (cur - prev).max(f64::MIN_POSITIVE);
        }
        prev = cur;
    }
    panic!("no crossing in [{lo}, {hi}]");
}

#[test]
fn matches_dense_scan_on_rounded_loop() {
    let major = preset("studied-LCF").unwrap().major_loop();
    for remanence in [1.0, 0.7, 0.2, -0.5] {
        for (pc, shift) in [(1.1, 0.0), (4.7, -40e3), (4.7, 30e3), (20.0, -90e3)] {
            let state = MagnetState { remanence };
            let curve = state.curve(&major);
            let line = LoadLine::new(pc, shift).unwrap();
            let p = solve_operating_point(&curve, &line).unwrap();
            let h = dense_scan(&curve, &line, -600e3, 600e3);
            assert!(
                (p.h - h).abs() < 2.0,
                "rem {remanence} pc {pc}: {} vs {h}",
                p.h
            );
            assert!((p.b - line.flux_density(p.h)).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn residual_within_tolerance(
        remanence in -1.0..1.0f64,
        pc in 0.3..30.0f64,
        shift in -400e3..400e3f64,
    ) {
        let major = preset("studied-LCF").unwrap().major_loop();
        let state = MagnetState { remanence };
        let curve = state.curve(&major);
        let line = LoadLine::new(pc, shift).unwrap();
        let p = solve_operating_point(&curve, &line).unwrap();
        prop_assert!((curve.flux_density(p.h) - line.flux_density(p.h)).abs() < 1e-9);
    }

    #[test]
    fn operating_point_moves_with_shift(
        pc in 0.5..10.0f64,
        shift in -100e3..100e3f64,
        extra in 1e3..50e3f64,
    ) {
        // A larger shift pushes the line up, so B never falls.
        let major = preset("NdFeB-1.2T").unwrap().major_loop();
        let curve = MagnetState::saturated(&major).curve(&major);
        let a = solve_operating_point(&curve, &LoadLine::new(pc, shift).unwrap()).unwrap();
        let b = solve_operating_point(&curve, &LoadLine::new(pc, shift + extra).unwrap()).unwrap();
        prop_assert!(b.b >= a.b - 1e-9);
    }
}
