// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use hodet::cavity::{Picture, SwitchingProfile, System};
use hodet::config::ScenarioKind;
use hodet::evolver::*;
use hodet::gaussian::*;
use hodet::scenario::integration_window;

fn sharp_single(n: usize, picture: Picture) -> System<f64> {
    let cfg = builtin(ScenarioKind::SwitchingNoise);
    let base = cfg.system(n).unwrap();
    let mut d = base.detectors()[0].clone();
    d.switching = SwitchingProfile::Sharp { lambda: d.switching.strength() };
    System::new(base.cavity().clone(), vec![d], picture).unwrap()
}

/// Each scenario on the path its driver takes: the matrix exponential for
/// static systems, rk45 otherwise.
#[test]
fn drift_stays_below_ceiling_on_every_scenario() {
    let icfg = IntegratorConfig::adaptive(1e-9, 1e-12);
    for kind in [
        ScenarioKind::SwitchingNoise,
        ScenarioKind::Causality,
        ScenarioKind::Unruh,
        ScenarioKind::Harvesting,
    ] {
        let cfg = builtin(kind);
        let system = cfg.system(cfg.cavity.modes).unwrap();
        let delta = cfg.detector(0).unwrap().delta;
        let (a, b) = integration_window(&cfg, delta).unwrap();
        let drift = if system.is_static() && a == 0.0 {
            static_trajectory(&system, &[0.0, b]).unwrap().max_drift()
        } else {
            evolve_with(&system, (a, b), &icfg, &[], |_, _| Ok(())).unwrap().final_drift
        };
        assert!(drift <= 1e-8, "{}: drift {drift:e}", kind.name());
    }
}

/// rk45 on a full-picture system accumulates drift roughly as steps × rtol.
#[test]
fn full_picture_rk45_drift_tracks_tolerance() {
    let cfg = builtin(ScenarioKind::Causality);
    let system = cfg.system(16).unwrap();
    let (_, end) = integration_window(&cfg, None).unwrap();
    let drift = |rtol: f64| {
        let mut icfg = IntegratorConfig::adaptive(rtol, 1e-13);
        icfg.drift_ceiling = 1.0;
        evolve_with(&system, (0.0, end), &icfg, &[], |_, _| Ok(())).unwrap().final_drift
    };
    let (loose, tight) = (drift(1e-9), drift(1e-11));
    assert!(tight <= 1e-8, "{tight:e}");
    assert!(loose > 10.0 * tight, "{loose:e} vs {tight:e}");
}

#[test]
fn pure_starts_stay_pure() {
    let cfg = builtin(ScenarioKind::Causality);
    let system = cfg.system(16).unwrap();
    let sigma0 = system.initial_covariance();
    let samples: Vec<f64> = (1..=40).map(|i| i as f64 * 0.15).collect();
    let icfg = IntegratorConfig::adaptive(1e-9, 1e-12);
    let mut worst = 0.0f64;
    evolve_with(&system, (0.0, 6.0), &icfg, &samples, |_, s| {
        let sigma = evolve_covariance(s, &sigma0)?;
        worst = worst.max((sigma.det() - 1.0).abs());
        Ok(())
    })
    .unwrap();
    assert!(worst <= 1e-6, "det error {worst:e}");
}

#[test]
fn rk4_is_fourth_order_on_the_static_case() {
    let system = sharp_single(10, Picture::Full);
    let tau = 1.0;
    let exact = evolve_static(&system.f_sym(0.5).unwrap(), tau).unwrap();
    let err = |dt: f64| {
        let mut icfg = IntegratorConfig::fixed(dt);
        icfg.drift_ceiling = 1.0;
        let s = evolve(&system, (0.0, tau), &icfg, &[]).unwrap();
        max_abs(&(s.final_state().matrix() - exact.matrix()))
    };
    let (e1, e2, e3) = (err(0.02), err(0.01), err(0.005));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((12.0..20.0).contains(&ratio), "error ratio {ratio} ({e1:e}, {e2:e}, {e3:e})");
    }
}

#[test]
fn evolutions_compose() {
    let cfg = builtin(ScenarioKind::Unruh);
    let system = cfg.system(8).unwrap();
    let icfg = IntegratorConfig::adaptive(1e-11, 1e-13);
    let (a, b) = integration_window(&cfg, cfg.detector(0).unwrap().delta).unwrap();
    let m = 0.3 * a + 0.7 * b;
    let whole = evolve(&system, (a, b), &icfg, &[]).unwrap();
    let first = evolve(&system, (a, m), &icfg, &[]).unwrap();
    let second = evolve(&system, (m, b), &icfg, &[]).unwrap();
    let joined = first.final_state().compose(second.final_state()).unwrap();
    let diff = max_abs(&(joined.matrix() - whole.final_state().matrix()));
    assert!(diff <= 1e-8, "composition mismatch {diff:e}");
}

#[test]
fn pictures_agree_on_detector_observables() {
    let full = sharp_single(20, Picture::Full);
    let inter = sharp_single(20, Picture::Interaction);
    let samples: Vec<f64> = (1..=12).map(|i| i as f64 * 0.5).collect();
    let icfg = IntegratorConfig::adaptive(1e-11, 1e-13);
    let observe = |system: &System<f64>| {
        let sigma0 = system.initial_covariance();
        let traj = evolve(system, (0.0, 6.0), &icfg, &samples).unwrap();
        traj.states
            .iter()
            .map(|s| {
                let d = reduce_state(&evolve_covariance(s, &sigma0).unwrap(), &[0]).unwrap();
                (nu_minus_one(&d).unwrap(), ground_probability(&d).unwrap())
            })
            .collect::<Vec<_>>()
    };
    let (a, b) = (observe(&full), observe(&inter));
    assert_eq!(a.len(), b.len());
    for ((n1, p1), (n2, p2)) in a.iter().zip(&b) {
        assert!((n1 - n2).abs() <= 1e-6, "nu - 1: {n1:e} vs {n2:e}");
        assert!((p1 - p2).abs() <= 1e-6, "p0: {p1} vs {p2}");
    }
}

#[test]
fn static_path_matches_integration() {
    let system = sharp_single(20, Picture::Full);
    let times = [0.0, 1.0, 2.5, 4.0];
    let exact = static_trajectory(&system, &times).unwrap();
    let icfg = IntegratorConfig::adaptive(1e-11, 1e-13);
    let num = evolve(&system, (0.0, 4.0), &icfg, &times[1..]).unwrap();
    let diff = max_abs(&(exact.final_state().matrix() - num.final_state().matrix()));
    assert!(diff <= 1e-8, "{diff:e}");
}
