// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use hodet::config::{parse_config_str, ScenarioConfig, ScenarioKind};
use hodet::gaussian::{symplectic_form, CovarianceMatrix, SymplecticMatrix};
use nalgebra::DMatrix;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub fn builtin(kind: ScenarioKind) -> ScenarioConfig {
    parse_config_str(kind.builtin()).unwrap()
}

/// Seed carried by the checked-in cross-validation manifest.
pub fn manifest_seed() -> u64 {
    builtin(ScenarioKind::CrossValidation).seed.expect("cross_validation.cfg sets a seed")
}

/// Property runner seeded from [`manifest_seed`].
pub fn runner(cases: u32) -> TestRunner {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&manifest_seed().to_le_bytes());
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &seed))
}

pub fn omega(k: usize) -> DMatrix<f64> {
    symplectic_form::<f64>(k).unwrap().matrix().clone()
}

/// `exp(Ω H)` with `H` the symmetric matrix built from `entries`.
pub fn random_symplectic(k: usize, entries: &[f64]) -> SymplecticMatrix<f64> {
    let n = 2 * k;
    let mut h = DMatrix::zeros(n, n);
    let mut it = entries.iter().cycle();
    for i in 0..n {
        for j in i..n {
            let v = *it.next().unwrap();
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    SymplecticMatrix::new((omega(k) * h).exp()).unwrap()
}

/// `S diag(ν, ν) Sᵀ` in `qq…pp` order.
pub fn physical_state(nus: &[f64], s: &SymplecticMatrix<f64>) -> CovarianceMatrix<f64> {
    let k = nus.len();
    let mut d = DMatrix::zeros(2 * k, 2 * k);
    for (i, &nu) in nus.iter().enumerate() {
        d[(i, i)] = nu;
        d[(k + i, k + i)] = nu;
    }
    let m = s.matrix() * d * s.matrix().transpose();
    CovarianceMatrix::new((&m + m.transpose()) * 0.5).unwrap()
}

/// Rotation by `theta` of mode `i` out of `k`.
pub fn local_rotation(k: usize, i: usize, theta: f64) -> DMatrix<f64> {
    let mut r = DMatrix::identity(2 * k, 2 * k);
    let (s, c) = theta.sin_cos();
    r[(i, i)] = c;
    r[(i, k + i)] = -s;
    r[(k + i, i)] = s;
    r[(k + i, k + i)] = c;
    r
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}
