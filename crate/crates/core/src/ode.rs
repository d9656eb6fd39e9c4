// SPDX-License-Identifier: Apache-2.0

//! Explicit Runge-Kutta integrators for `y' = f(t, y)` on flat slices.
//!
//! Both integrators report the state at caller-chosen sample times. The
//! adaptive Dormand-Prince 5(4) pair uses its free fourth-order continuous
//! extension for samples that fall inside a step, so the sample grid never
//! constrains step-size control.

use crate::{lit, to_f64, Error, Real, Result};

/// Step tolerances for [`dopri5`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions<T: Real> {
    pub rtol: T,
    pub atol: T,
    /// Accepted + rejected step budget.
    pub max_steps: usize,
}

impl<T: Real> Default for AdaptiveOptions<T> {
    fn default() -> Self {
        Self {
            rtol: lit(1e-9),
            atol: lit(1e-12),
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl Stats {
    pub fn merge(&mut self, other: Stats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.evaluations += other.evaluations;
    }
}

/// Called after each accepted step with the new time and state. Returning
/// `true` signals that the state was modified in place.
pub trait StepHook<T> {
    fn after_step(&mut self, t: T, y: &mut [T]) -> Result<bool>;
}

/// A hook that does nothing.
pub struct NoHook;

impl<T> StepHook<T> for NoHook {
    fn after_step(&mut self, _t: T, _y: &mut [T]) -> Result<bool> {
        Ok(false)
    }
}

fn check_samples<T: Real>(t0: T, t1: T, samples: &[T]) -> Result<()> {
    if t1 <= t0 {
        return Err(Error::InvalidArgument(format!(
            "integration window must be increasing: [{}, {}]",
            to_f64(t0),
            to_f64(t1)
        )));
    }
    let mut prev = t0;
    for &s in samples {
        if s < prev || s > t1 {
            return Err(Error::InvalidArgument(format!(
                "sample time {} outside window or unsorted",
                to_f64(s)
            )));
        }
        prev = s;
    }
    Ok(())
}

fn axpy<T: Real>(out: &mut [T], base: &[T], h: T, terms: &[(T, &[T])]) {
    for i in 0..out.len() {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc += *c * k[i];
        }
        out[i] = base[i] + h * acc;
    }
}

/// Classical fourth-order Runge-Kutta with at most `dt` per step.
///
/// Each interval between consecutive sample times is split into equal steps.
pub fn rk4<T, F, S>(mut f: F, t0: T, t1: T, y: &mut [T], dt: T, samples: &[T], mut on_sample: S) -> Result<Stats>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    S: FnMut(T, &[T]) -> Result<()>,
{
    check_samples(t0, t1, samples)?;
    if dt <= T::zero() {
        return Err(Error::InvalidArgument("rk4 step must be positive".into()));
    }
    let n = y.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let half = lit::<T>(0.5);
    let sixth = lit::<T>(1.0 / 6.0);
    let mut stats = Stats::default();
    let mut t = t0;
    let mut stops: Vec<T> = samples.to_vec();
    stops.push(t1);
    for (si, &stop) in stops.iter().enumerate() {
        let span = stop - t;
        if span > T::zero() {
            let steps = (to_f64(span) / to_f64(dt)).ceil().max(1.0) as usize;
            let h = span / lit::<T>(steps as f64);
            for s in 0..steps {
                let ts = t + h * lit::<T>(s as f64);
                f(ts, y, &mut k1)?;
                axpy(&mut tmp, y, h * half, &[(T::one(), &k1)]);
                f(ts + h * half, &tmp, &mut k2)?;
                axpy(&mut tmp, y, h * half, &[(T::one(), &k2)]);
                f(ts + h * half, &tmp, &mut k3)?;
                axpy(&mut tmp, y, h, &[(T::one(), &k3)]);
                f(ts + h, &tmp, &mut k4)?;
                for i in 0..n {
                    y[i] += h * sixth * (k1[i] + (k2[i] + k3[i]) * lit::<T>(2.0) + k4[i]);
                }
                stats.accepted += 1;
                stats.evaluations += 4;
            }
            t = stop;
        }
        if si < samples.len() {
            on_sample(stop, y)?;
        }
    }
    Ok(stats)
}

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Adaptive Dormand-Prince 5(4) with dense output.
///
/// `ceiling(t)` caps the step that starts at `t`. `on_sample` receives the
/// interpolated state at every entry of `samples`; `hook` runs after every
/// accepted step.
#[allow(clippy::too_many_arguments)]
pub fn dopri5<T, F, C, S, H>(
    mut f: F,
    t0: T,
    t1: T,
    y: &mut [T],
    opts: &AdaptiveOptions<T>,
    ceiling: C,
    samples: &[T],
    mut on_sample: S,
    hook: &mut H,
) -> Result<Stats>
where
    T: Real,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    C: Fn(T) -> T,
    S: FnMut(T, &[T]) -> Result<()>,
    H: StepHook<T>,
{
    check_samples(t0, t1, samples)?;
    if opts.rtol <= T::zero() || opts.atol <= T::zero() {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let n = y.len();
    let z = || vec![T::zero(); n];
    let (mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (z(), z(), z(), z(), z(), z(), z());
    let (mut tmp, mut ynew, mut dense) = (z(), z(), z());
    let l = |x: f64| lit::<T>(x);
    let mut stats = Stats::default();

    let mut t = t0;
    let mut next_sample = 0;
    while next_sample < samples.len() && samples[next_sample] <= t0 {
        on_sample(t0, y)?;
        next_sample += 1;
    }

    f(t, y, &mut k1)?;
    stats.evaluations += 1;
    let span = t1 - t0;
    let mut h = (span * l(0.01)).min(ceiling(t0)).max(span * l(1e-12));
    let safety = l(0.9);
    let uround = T::default_epsilon();

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepBudget(opts.max_steps));
        }
        let cap = ceiling(t);
        if h > cap {
            h = cap;
        }
        let last = t + h >= t1 - span * l(1e-14);
        if last {
            h = t1 - t;
        }
        if h <= uround * l(10.0) * t.abs().max(span) {
            return Err(Error::StepUnderflow {
                tau: to_f64(t),
                step: to_f64(h),
            });
        }

        axpy(&mut tmp, y, h, &[(l(A21), &k1)]);
        f(t + h * l(C2), &tmp, &mut k2)?;
        axpy(&mut tmp, y, h, &[(l(A31), &k1), (l(A32), &k2)]);
        f(t + h * l(C3), &tmp, &mut k3)?;
        axpy(&mut tmp, y, h, &[(l(A41), &k1), (l(A42), &k2), (l(A43), &k3)]);
        f(t + h * l(C4), &tmp, &mut k4)?;
        axpy(&mut tmp, y, h, &[(l(A51), &k1), (l(A52), &k2), (l(A53), &k3), (l(A54), &k4)]);
        f(t + h * l(C5), &tmp, &mut k5)?;
        axpy(&mut tmp, y, h, &[(l(A61), &k1), (l(A62), &k2), (l(A63), &k3), (l(A64), &k4), (l(A65), &k5)]);
        let tnew = if last { t1 } else { t + h };
        f(tnew, &tmp, &mut k6)?;
        axpy(&mut ynew, y, h, &[(l(A71), &k1), (l(A73), &k3), (l(A74), &k4), (l(A75), &k5), (l(A76), &k6)]);
        f(tnew, &ynew, &mut k7)?;
        stats.evaluations += 6;

        let mut err_sq = T::zero();
        for i in 0..n {
            let e = h * (l(E1) * k1[i] + l(E3) * k3[i] + l(E4) * k4[i] + l(E5) * k5[i] + l(E6) * k6[i] + l(E7) * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            let r = e / sc;
            err_sq += r * r;
        }
        let err = (err_sq / l(n.max(1) as f64)).sqrt();
        if !err.is_finite() {
            stats.rejected += 1;
            h *= l(0.2);
            continue;
        }

        if err <= T::one() {
            stats.accepted += 1;
            // continuous extension coefficients, stored in tmp/dense
            if next_sample < samples.len() && samples[next_sample] <= tnew {
                for i in 0..n {
                    dense[i] = h * (l(D1) * k1[i] + l(D3) * k3[i] + l(D4) * k4[i] + l(D5) * k5[i] + l(D6) * k6[i] + l(D7) * k7[i]);
                }
                while next_sample < samples.len() && samples[next_sample] <= tnew {
                    let theta = (samples[next_sample] - t) / h;
                    let th1 = T::one() - theta;
                    for i in 0..n {
                        let r2 = ynew[i] - y[i];
                        let r3 = h * k1[i] - r2;
                        let r4 = r2 - h * k7[i] - r3;
                        tmp[i] = y[i] + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * dense[i])));
                    }
                    on_sample(samples[next_sample], &tmp)?;
                    next_sample += 1;
                }
            }
            y.copy_from_slice(&ynew);
            std::mem::swap(&mut k1, &mut k7);
            t = tnew;
            if hook.after_step(t, y)? {
                f(t, y, &mut k1)?;
                stats.evaluations += 1;
            }
            if last {
                break;
            }
            let fac = if err == T::zero() { l(5.0) } else { (safety * err.powf(l(-0.2))).min(l(5.0)).max(l(0.2)) };
            h *= fac;
        } else {
            stats.rejected += 1;
            h *= (safety * err.powf(l(-0.2))).max(l(0.2));
        }
    }
    Ok(stats)
}
