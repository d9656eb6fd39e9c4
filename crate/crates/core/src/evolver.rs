// SPDX-License-Identifier: Apache-2.0

//! Integration of `dS/dτ = Ω F_sym(τ) S`, `S(τ_i) = I`.
//!
//! The integrated variable is `Δ = S − I`. The ODE is unchanged, but the
//! per-component error control then sees the small detector-field entries on
//! their own scale instead of next to the unit diagonal.

use nalgebra::DMatrix;

use crate::cavity::{System, Triplets};
use crate::gaussian::{omega_matrix, SymplecticMatrix};
use crate::linalg::max_abs;
use crate::ode::{dopri5, rk4, AdaptiveOptions, Stats, StepHook};
use crate::{lit, to_f64, Error, Real, Result};

/// Fraction of the fastest local period used as the step ceiling.
pub const STEP_CEILING_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method<T: Real> {
    Rk4Fixed { dt: T },
    Rk45Adaptive { rtol: T, atol: T },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IntegratorConfig<T: Real> {
    pub method: Method<T>,
    /// Project back onto the symplectic group every this many accepted
    /// steps; `0` disables it.
    pub resymplectify_every: usize,
    /// Abort when `‖SΩSᵀ − Ω‖∞` exceeds this at a sample.
    pub drift_ceiling: T,
    /// Multiplies `2π/ω_local(τ)` to give the step ceiling of the adaptive
    /// method.
    pub step_ceiling_fraction: T,
    pub max_steps: usize,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            method: Method::Rk45Adaptive {
                rtol: lit(1e-9),
                atol: lit(1e-12),
            },
            resymplectify_every: 0,
            drift_ceiling: lit(1e-6),
            step_ceiling_fraction: lit(STEP_CEILING_FRACTION),
            max_steps: 50_000_000,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    pub fn adaptive(rtol: T, atol: T) -> Self {
        Self {
            method: Method::Rk45Adaptive { rtol, atol },
            ..Self::default()
        }
    }

    pub fn fixed(dt: T) -> Self {
        Self {
            method: Method::Rk4Fixed { dt },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.method {
            Method::Rk4Fixed { dt } => dt > T::zero(),
            Method::Rk45Adaptive { rtol, atol } => rtol > T::zero() && atol > T::zero(),
        };
        if !ok || self.drift_ceiling <= T::zero() || self.step_ceiling_fraction <= T::zero() {
            return Err(Error::InvalidArgument("integrator steps and tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// `S(τ_k)` on a sample grid with the drift at each sample.
#[derive(Debug, Clone)]
pub struct EvolutionTrajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<SymplecticMatrix<T>>,
    pub drift: Vec<T>,
    pub stats: Stats,
}

impl<T: Real> EvolutionTrajectory<T> {
    pub fn final_state(&self) -> &SymplecticMatrix<T> {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn max_drift(&self) -> T {
        self.drift.iter().fold(T::zero(), |a, &b| a.max(b))
    }
}

/// Result of [`evolve_with`]: the final matrix plus bookkeeping.
#[derive(Debug, Clone)]
pub struct EvolutionSummary<T: Real> {
    pub final_state: SymplecticMatrix<T>,
    pub final_drift: T,
    pub max_drift: T,
    pub stats: Stats,
}

/// `‖SΩSᵀ − Ω‖∞`.
pub fn check_symplectic<T: Real>(s: &SymplecticMatrix<T>) -> T {
    s.drift()
}

/// Pulls `S` back onto the symplectic group by iterating
/// `S ← (I + ½ E Ω) S` with `E = SΩSᵀ − Ω`, which cancels `E` to first order.
pub fn resymplectify<T: Real>(s: &SymplecticMatrix<T>) -> Result<SymplecticMatrix<T>> {
    let k = s.modes();
    let omega = omega_matrix::<T>(k);
    let mut m = s.matrix().clone();
    let id = DMatrix::<T>::identity(2 * k, 2 * k);
    let start = s.drift();
    if start > lit::<T>(0.1) {
        return Err(Error::Unphysical(format!(
            "matrix too far from symplectic to project (drift {:e})",
            to_f64(start)
        )));
    }
    let target = lit::<T>(1e-13) * max_abs(&m).max(T::one()).powi(2);
    for _ in 0..60 {
        let e = &m * &omega * m.transpose() - &omega;
        if max_abs(&e) <= target {
            break;
        }
        m = (&id + e * &omega * lit::<T>(0.5)) * m;
    }
    SymplecticMatrix::new(m)
}

/// `exp(Ω F_sym t)` by Padé scaling and squaring.
pub fn evolve_static<T: Real>(f_sym: &DMatrix<T>, duration: T) -> Result<SymplecticMatrix<T>> {
    let n = f_sym.nrows();
    if f_sym.ncols() != n || n % 2 != 0 || n == 0 {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f_sym.ncols(),
        });
    }
    let gen = omega_matrix::<T>(n / 2) * f_sym * duration;
    SymplecticMatrix::new(gen.exp())
}

/// `S(τ)` of a static system on a grid of times measured from switch-on.
/// Uses one exponential per distinct spacing and composes.
pub fn static_trajectory<T: Real>(system: &System<T>, times: &[T]) -> Result<EvolutionTrajectory<T>> {
    let mut out = EvolutionTrajectory {
        times: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        drift: Vec::with_capacity(times.len()),
        stats: Stats::default(),
    };
    static_evolve_with(system, times, |t, s| {
        out.drift.push(s.drift());
        out.times.push(t);
        out.states.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Streaming form of [`static_trajectory`]; returns the largest drift seen.
pub fn static_evolve_with<T, O>(system: &System<T>, times: &[T], mut observer: O) -> Result<T>
where
    T: Real,
    O: FnMut(T, &SymplecticMatrix<T>) -> Result<()>,
{
    if !system.is_static() {
        return Err(Error::InvalidArgument(
            "static evolution needs full picture, sharp switching and inertial detectors".into(),
        ));
    }
    let f = system.f_sym(T::zero())?;
    let k = system.modes();
    let mut s = DMatrix::<T>::identity(2 * k, 2 * k);
    let mut prev = T::zero();
    let mut step_cache: Option<(T, DMatrix<T>)> = None;
    let mut worst = T::zero();
    let tol = lit::<T>(1e-12);
    for &t in times {
        if t < prev {
            return Err(Error::InvalidArgument("static grid must be sorted and non-negative".into()));
        }
        let h = t - prev;
        if h > T::zero() {
            let reuse = step_cache.as_ref().is_some_and(|(hc, _)| (*hc - h).abs() <= tol * h);
            if !reuse {
                step_cache = Some((h, evolve_static(&f, h)?.into_matrix()));
            }
            let e = &step_cache.as_ref().expect("cache filled above").1;
            s = e * s;
        }
        prev = t;
        let sm = SymplecticMatrix::new(s.clone())?;
        worst = worst.max(sm.drift());
        observer(t, &sm)?;
    }
    Ok(worst)
}

struct Rhs<'a, T: Real> {
    system: &'a System<T>,
    trip: Triplets<T>,
    k: usize,
    // right end of the current segment; a stage landing on it takes the
    // switching limit from inside the segment
    seg_end: T,
}

impl<T: Real> Rhs<'_, T> {
    fn eval(&mut self, tau: T, y: &[T], dy: &mut [T]) -> Result<()> {
        self.system.f_sym_triplets_from(tau, tau < self.seg_end, &mut self.trip)?;
        let n2 = 2 * self.k;
        dy.iter_mut().for_each(|v| *v = T::zero());
        for &(i, j, v) in &self.trip {
            // (Ω Y)_{q_r} = Y_{p_r}, (Ω Y)_{p_r} = −Y_{q_r}
            let (target, coef) = if i >= self.k { (i - self.k, v) } else { (i + self.k, -v) };
            let src = &y[j * n2..(j + 1) * n2];
            let dst = &mut dy[target * n2..(target + 1) * n2];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += coef * *s;
            }
            dst[j] += coef;
        }
        Ok(())
    }
}

fn to_symplectic<T: Real>(k: usize, delta: &[T]) -> Result<SymplecticMatrix<T>> {
    let n2 = 2 * k;
    let mut m = DMatrix::from_row_slice(n2, n2, delta);
    for i in 0..n2 {
        m[(i, i)] += T::one();
    }
    SymplecticMatrix::new(m)
}

struct Resymplectify<T> {
    k: usize,
    every: usize,
    count: usize,
    _t: std::marker::PhantomData<T>,
}

impl<T: Real> StepHook<T> for Resymplectify<T> {
    fn after_step(&mut self, _t: T, y: &mut [T]) -> Result<bool> {
        if self.every == 0 {
            return Ok(false);
        }
        self.count += 1;
        if self.count % self.every != 0 {
            return Ok(false);
        }
        let fixed = resymplectify(&to_symplectic(self.k, y)?)?;
        let n2 = 2 * self.k;
        let m = fixed.matrix();
        for i in 0..n2 {
            for j in 0..n2 {
                y[i * n2 + j] = m[(i, j)] - if i == j { T::one() } else { T::zero() };
            }
        }
        Ok(true)
    }
}

/// Integrates over `window`, calling `observer` at `τ_i`, at each entry of
/// `samples` and at `τ_f` (once, even if listed). Samples must be sorted and
/// inside the window.
pub fn evolve_with<T, O>(
    system: &System<T>,
    window: (T, T),
    cfg: &IntegratorConfig<T>,
    samples: &[T],
    mut observer: O,
) -> Result<EvolutionSummary<T>>
where
    T: Real,
    O: FnMut(T, &SymplecticMatrix<T>) -> Result<()>,
{
    cfg.validate()?;
    let (tau_i, tau_f) = window;
    if tau_f <= tau_i {
        return Err(Error::InvalidArgument(format!(
            "evolution window must be increasing: [{}, {}]",
            to_f64(tau_i),
            to_f64(tau_f)
        )));
    }
    let k = system.modes();
    let n2 = 2 * k;
    let mut y = vec![T::zero(); n2 * n2];
    let mut rhs = Rhs {
        system,
        trip: Vec::new(),
        k,
        seg_end: tau_f,
    };
    let mut hook = Resymplectify {
        k,
        every: cfg.resymplectify_every,
        count: 0,
        _t: std::marker::PhantomData,
    };

    let mut cuts: Vec<T> = system
        .discontinuities()
        .into_iter()
        .filter(|&c| c > tau_i && c < tau_f)
        .collect();
    cuts.push(tau_f);

    let mut max_drift = T::zero();
    let ceiling_drift = cfg.drift_ceiling;
    let mut emit = |tau: T, delta: &[T], observer: &mut O| -> Result<()> {
        let s = to_symplectic(k, delta)?;
        let d = s.drift();
        max_drift = max_drift.max(d);
        if d > ceiling_drift {
            return Err(Error::DriftExceeded {
                drift: to_f64(d),
                ceiling: to_f64(ceiling_drift),
                tau: to_f64(tau),
            });
        }
        observer(tau, &s)
    };

    emit(tau_i, &y, &mut observer)?;
    let mut stats = Stats::default();
    let mut start = tau_i;
    let mut next = 0;
    for cut in cuts {
        let mut seg_samples = Vec::new();
        while next < samples.len() && samples[next] <= cut {
            if samples[next] > start && samples[next] < tau_f {
                seg_samples.push(samples[next]);
            } else if samples[next] < tau_i || samples[next] > tau_f {
                return Err(Error::InvalidArgument("sample outside evolution window".into()));
            }
            next += 1;
        }
        rhs.seg_end = cut;
        let on_sample = |tau: T, state: &[T]| emit(tau, state, &mut observer);
        let seg = match cfg.method {
            Method::Rk4Fixed { dt } => rk4(|t, y, dy| rhs.eval(t, y, dy), start, cut, &mut y, dt, &seg_samples, on_sample)?,
            Method::Rk45Adaptive { rtol, atol } => {
                let opts = AdaptiveOptions {
                    rtol,
                    atol,
                    max_steps: cfg.max_steps,
                };
                let frac = cfg.step_ceiling_fraction;
                let ceiling = |tau: T| frac * T::two_pi() / system.local_frequency(tau);
                dopri5(|t, y, dy| rhs.eval(t, y, dy), start, cut, &mut y, &opts, ceiling, &seg_samples, on_sample, &mut hook)?
            }
        };
        stats.merge(seg);
        start = cut;
    }
    while next < samples.len() {
        if samples[next] > tau_f {
            return Err(Error::InvalidArgument("sample outside evolution window".into()));
        }
        next += 1;
    }
    let final_state = to_symplectic(k, &y)?;
    let final_drift = final_state.drift();
    max_drift = max_drift.max(final_drift);
    if final_drift > cfg.drift_ceiling {
        return Err(Error::DriftExceeded {
            drift: to_f64(final_drift),
            ceiling: to_f64(cfg.drift_ceiling),
            tau: to_f64(tau_f),
        });
    }
    observer(tau_f, &final_state)?;
    Ok(EvolutionSummary {
        final_state,
        final_drift,
        max_drift,
        stats,
    })
}

/// [`evolve_with`] collecting every sampled `S`.
pub fn evolve<T: Real>(
    system: &System<T>,
    window: (T, T),
    cfg: &IntegratorConfig<T>,
    samples: &[T],
) -> Result<EvolutionTrajectory<T>> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let summary = evolve_with(system, window, cfg, samples, |t, s| {
        times.push(t);
        states.push(s.clone());
        Ok(())
    })?;
    let drift = states.iter().map(|s| s.drift()).collect();
    Ok(EvolutionTrajectory {
        times,
        states,
        drift,
        stats: summary.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{Boundary, CavityConfig, DetectorConfig, Picture, SwitchingProfile, Worldline};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn one_detector(n_modes: usize, picture: Picture, switching: SwitchingProfile<f64>) -> System<f64> {
        let cav = CavityConfig::with_mode_count(2.0 * PI, Boundary::Dirichlet, n_modes, false).unwrap();
        let det = DetectorConfig::new(4.5, switching, Worldline::inertial(PI));
        System::new(cav, vec![det], picture).unwrap()
    }

    fn tight() -> IntegratorConfig<f64> {
        IntegratorConfig::adaptive(1e-12, 1e-14)
    }

    #[test]
    fn zero_coupling_gives_identity() {
        let sys = one_detector(3, Picture::Interaction, SwitchingProfile::Sharp { lambda: 0.0 });
        let traj = evolve(&sys, (0.0, 2.0), &tight(), &[0.5, 1.0]).unwrap();
        assert_eq!(traj.times, vec![0.0, 0.5, 1.0, 2.0]);
        assert_eq!(traj.final_state().matrix(), &DMatrix::identity(8, 8));
    }

    #[test]
    fn free_mode_rotation() {
        // detector with λ = 0 in the full picture is a free oscillator
        let sys = one_detector(1, Picture::Full, SwitchingProfile::Sharp { lambda: 0.0 });
        let t = 2.3;
        let s = evolve(&sys, (0.0, t), &tight(), &[]).unwrap();
        let m = s.final_state().matrix();
        let w = 4.5;
        assert_relative_eq!(m[(0, 0)], (w * t).cos(), epsilon = 1e-9);
        assert_relative_eq!(m[(0, 2)], (w * t).sin(), epsilon = 1e-9);
        assert_relative_eq!(m[(2, 0)], -(w * t).sin(), epsilon = 1e-9);
        // field mode n = 1 has ω = 1/2
        assert_relative_eq!(m[(1, 3)], (0.5 * t).sin(), epsilon = 1e-9);
    }

    #[test]
    fn static_matches_integrated() {
        let sys = one_detector(2, Picture::Full, SwitchingProfile::Sharp { lambda: 0.05 });
        let f = sys.f_sym(0.0).unwrap();
        let exact = evolve_static(&f, 3.0).unwrap();
        let num = evolve(&sys, (0.0, 3.0), &tight(), &[]).unwrap();
        assert!(max_abs(&(exact.matrix() - num.final_state().matrix())) < 1e-9);
        let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
        let st = static_trajectory(&sys, &grid).unwrap();
        assert!(max_abs(&(st.final_state().matrix() - exact.matrix())) < 1e-12);
        assert!(st.max_drift() < 1e-12);
    }

    #[test]
    fn evolve_static_examples() {
        let f = DMatrix::<f64>::from_diagonal_element(2, 2, 1.7);
        assert_eq!(evolve_static(&f, 0.0).unwrap().matrix(), &DMatrix::identity(2, 2));
        let r = evolve_static(&f, 0.9).unwrap();
        assert_relative_eq!(r.matrix()[(0, 1)], (1.7f64 * 0.9).sin(), epsilon = 1e-14);
        assert!(check_symplectic(&r) < 1e-12);
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let sys = one_detector(2, Picture::Full, SwitchingProfile::Sharp { lambda: 0.05 });
        let exact = evolve_static(&sys.f_sym(0.0).unwrap(), 2.0).unwrap();
        let err = |dt: f64| {
            let mut cfg = IntegratorConfig::fixed(dt);
            cfg.drift_ceiling = 1.0;
            let s = evolve(&sys, (0.0, 2.0), &cfg, &[]).unwrap();
            max_abs(&(s.final_state().matrix() - exact.matrix()))
        };
        let (e1, e2) = (err(0.04), err(0.02));
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn composition_over_split_window() {
        let sys = one_detector(3, Picture::Interaction, SwitchingProfile::Gaussian { lambda: 0.03, delta: 0.6 });
        let full = evolve(&sys, (-2.0, 2.0), &tight(), &[]).unwrap();
        let a = evolve(&sys, (-2.0, 0.3), &tight(), &[]).unwrap();
        let b = evolve(&sys, (0.3, 2.0), &tight(), &[]).unwrap();
        let composed = a.final_state().compose(b.final_state()).unwrap();
        assert!(max_abs(&(composed.matrix() - full.final_state().matrix())) < 1e-9);
    }

    #[test]
    fn dense_samples_match_direct_runs() {
        let sys = one_detector(3, Picture::Interaction, SwitchingProfile::Gaussian { lambda: 0.03, delta: 0.6 });
        let traj = evolve(&sys, (-2.0, 2.0), &tight(), &[-0.7, 0.0, 1.1]).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states).skip(1).take(3) {
            let direct = evolve(&sys, (-2.0, *t), &tight(), &[]).unwrap();
            assert!(max_abs(&(direct.final_state().matrix() - s.matrix())) < 1e-9);
        }
    }

    #[test]
    fn resymplectify_projects() {
        let sys = one_detector(2, Picture::Full, SwitchingProfile::Sharp { lambda: 0.1 });
        let s = evolve_static(&sys.f_sym(0.0).unwrap(), 1.3).unwrap();
        let same = resymplectify(&s).unwrap();
        assert!(max_abs(&(same.matrix() - s.matrix())) < 1e-12);

        let noise = DMatrix::from_fn(6, 6, |i, j| 1e-6 * ((i * 7 + j * 3) as f64).sin());
        let noisy = SymplecticMatrix::new(s.matrix() + noise).unwrap();
        assert!(noisy.drift() > 1e-8);
        let fixed = resymplectify(&noisy).unwrap();
        assert!(fixed.drift() < 1e-10);
        assert!(max_abs(&(fixed.matrix() - noisy.matrix())) < 1e-5);

        let sym = DMatrix::from_fn(4, 4, |i, j| 1e-4 * ((i + j) as f64).cos());
        let near = SymplecticMatrix::new(DMatrix::identity(4, 4) + sym).unwrap();
        let p = resymplectify(&near).unwrap();
        assert!(p.drift() < 1e-12);
        assert!(max_abs(&(p.matrix() - near.matrix())) < 1e-3);

        let wild = SymplecticMatrix::new(DMatrix::from_element(2, 2, 3.0)).unwrap();
        assert!(resymplectify(&wild).is_err());
    }

    #[test]
    fn resymplectify_hook_keeps_drift_low() {
        let sys = one_detector(3, Picture::Interaction, SwitchingProfile::Gaussian { lambda: 0.05, delta: 0.5 });
        let mut cfg = IntegratorConfig::adaptive(1e-6, 1e-8);
        cfg.resymplectify_every = 5;
        let s = evolve(&sys, (-2.0, 2.0), &cfg, &[]).unwrap();
        assert!(s.final_state().drift() < 1e-10);
    }

    #[test]
    fn drift_ceiling_aborts() {
        let sys = one_detector(2, Picture::Full, SwitchingProfile::Sharp { lambda: 0.1 });
        let mut cfg = IntegratorConfig::fixed(0.5);
        cfg.drift_ceiling = 1e-12;
        let r = evolve(&sys, (0.0, 5.0), &cfg, &[]);
        assert!(matches!(r, Err(Error::DriftExceeded { .. })));
    }

    #[test]
    fn sharp_switch_split_at_zero() {
        let sys = one_detector(2, Picture::Interaction, SwitchingProfile::Sharp { lambda: 0.05 });
        let before = evolve(&sys, (-1.0, 0.0), &tight(), &[]).unwrap();
        assert_eq!(before.final_state().matrix(), &DMatrix::identity(6, 6));
        let across = evolve(&sys, (-1.0, 1.0), &tight(), &[]).unwrap();
        let after = evolve(&sys, (0.0, 1.0), &tight(), &[]).unwrap();
        assert!(max_abs(&(across.final_state().matrix() - after.final_state().matrix())) < 1e-10);
    }

    #[test]
    fn evolves_in_f32() {
        let cav = CavityConfig::<f32>::with_mode_count(2.0 * std::f32::consts::PI, Boundary::Dirichlet, 2, false).unwrap();
        let det = DetectorConfig::new(1.0f32, SwitchingProfile::Sharp { lambda: 0.05 }, Worldline::inertial(1.0));
        let sys = System::new(cav, vec![det], Picture::Full).unwrap();
        let mut cfg = IntegratorConfig::<f32>::adaptive(1e-5, 1e-6);
        cfg.drift_ceiling = 1e-3;
        let s = evolve(&sys, (0.0, 1.0), &cfg, &[]).unwrap();
        assert!(s.final_state().drift() < 1e-4);
    }
}
