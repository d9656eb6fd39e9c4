// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use hodet::cavity::*;
use hodet::config::ScenarioKind;
use hodet::linalg::{asymmetry, max_abs_c};
use hodet::scenario::{integration_window, sweep_points};
use proptest::prelude::*;

fn scenario_systems() -> Vec<(String, System<f64>, (f64, f64))> {
    let mut out = Vec::new();
    for kind in [
        ScenarioKind::SwitchingNoise,
        ScenarioKind::Causality,
        ScenarioKind::Unruh,
        ScenarioKind::Harvesting,
    ] {
        let cfg = builtin(kind);
        for (delta, accel) in sweep_points(&cfg).unwrap() {
            let system = cfg.system_with(cfg.cavity.modes, delta, accel).unwrap();
            let window = integration_window(&cfg, delta).unwrap();
            out.push((format!("{} {delta:?} {accel:?}", kind.name()), system, window));
        }
    }
    out
}

#[test]
fn couplings_are_hermitian_and_symmetric_on_every_scenario_window() {
    for (name, system, (a, b)) in scenario_systems() {
        for i in 0..=60 {
            let tau = a + (b - a) * i as f64 / 60.0;
            let c = system.coupling_matrices(tau).unwrap();
            let scale = max_abs_c(&c.w).max(1.0);
            assert!(max_abs_c(&(&c.w - c.w.adjoint())) == 0.0, "{name}: w not hermitian at {tau}");
            assert!(max_abs_c(&(&c.g - c.g.transpose())) == 0.0, "{name}: g not symmetric at {tau}");
            let f = system.f_sym(tau).unwrap();
            assert!(asymmetry(&f) <= 1e-12 * scale, "{name}: F_sym asymmetric at {tau}");
        }
    }
}

#[test]
fn resonances_match_the_scenario_gaps() {
    let cases = [
        (ScenarioKind::SwitchingNoise, vec![9]),
        (ScenarioKind::Causality, vec![9]),
        (ScenarioKind::Unruh, vec![-8, 8]),
        (ScenarioKind::Harvesting, vec![18]),
    ];
    for (kind, want) in cases {
        let cfg = builtin(kind);
        let cavity = cfg.cavity_config(cfg.cavity.modes).unwrap();
        let gap = cfg.detector(0).unwrap().gap;
        let mut got = cavity.resonant_modes(gap);
        got.sort();
        assert_eq!(got, want, "{}", kind.name());
        for n in want {
            assert_eq!(cavity.mode_frequency(n).unwrap(), gap);
        }
    }
}

#[test]
fn accelerated_worldline_stays_on_its_hyperbola() {
    let strategy = (0.05..3.0f64, -6.0..6.0f64);
    runner(256)
        .run(&strategy, |(a, tau)| {
            let w = Worldline::accelerated(a, 0.0).unwrap();
            let (t, x) = w.eval(tau).unwrap();
            let lhs = (a * t).powi(2) - (a * x + 1.0).powi(2);
            let scale = (a * t).powi(2).max(1.0);
            prop_assert!((lhs + 1.0).abs() <= 1e-12 * scale, "{lhs}");
            Ok(())
        })
        .unwrap();
}

#[test]
fn redshift_is_the_derivative_of_coordinate_time() {
    let strategy = (0.05..2.0f64, -3.0..3.0f64);
    runner(256)
        .run(&strategy, |(a, tau)| {
            let w = Worldline::accelerated(a, 0.0).unwrap();
            let h = 1e-5;
            let (tp, _) = w.eval(tau + h).unwrap();
            let (tm, _) = w.eval(tau - h).unwrap();
            let fd = (tp - tm) / (2.0 * h);
            let z = w.redshift(tau);
            prop_assert!((fd - z).abs() <= 1e-6 * z, "{fd} vs {z}");
            Ok(())
        })
        .unwrap();
}

#[test]
fn zero_mode_stays_out_of_periodic_sets() {
    let cfg = builtin(ScenarioKind::Unruh);
    let cavity = cfg.cavity_config(5).unwrap();
    assert_eq!(cavity.modes(), &[-5, -4, -3, -2, -1, 1, 2, 3, 4, 5]);
}
