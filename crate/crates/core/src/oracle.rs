// SPDX-License-Identifier: Apache-2.0

//! Independent evolution through the normal-ordered squeezing generators.
//!
//! The propagator of a quadratic Hamiltonian is written in normal-ordered
//! form with a symmetric pair-creation matrix `C` and a rotation-like `D`:
//!
//! ```text
//! i dC/dτ = 4 C_s gᴴ C_s + 2 w C_s + g
//! i dD/dτ = (4 C_s gᴴ + w)(D + I),        C(τ_i) = D(τ_i) = 0
//! ```
//!
//! with `C_s = (C + Cᵀ)/2`. Identifying `C_s = ½ tanh(r) e^{iθ}` and
//! `D + I = sech(r) e^{iφ}` yields the squeezing parameters, and from them the
//! covariance matrix of the evolved vacuum. Along an exact solution
//! `I − 4 C_s C̄_s = (D + I)(D + I)ᴴ`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cavity::{Boundary, CavityConfig, DetectorConfig, InitialState, Picture, SwitchingProfile, System, Worldline};
use crate::evolver::{evolve_with, IntegratorConfig, Method};
use crate::gaussian::{evolve_covariance, CovarianceMatrix, SymplecticMatrix};
use crate::linalg::{conj, hermitian_fn, imag_part, max_abs, max_abs_c, real_part, takagi};
use crate::ode::{dopri5, rk4, AdaptiveOptions, Stats, StepHook};
use crate::{lit, to_f64, Cplx, Error, Real, Result};

/// Default abort threshold on the consistency-relation residual.
pub const CONSISTENCY_CEILING: f64 = 1e-6;

/// Largest admissible singular value of `2 C_s`.
pub const SQUEEZE_LIMIT: f64 = 1.0 - 1e-12;

/// `C` and `D` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeState<T: Real> {
    pub c: DMatrix<Cplx<T>>,
    pub d: DMatrix<Cplx<T>>,
}

impl<T: Real> SqueezeState<T> {
    pub fn zero(k: usize) -> Self {
        Self {
            c: DMatrix::zeros(k, k),
            d: DMatrix::zeros(k, k),
        }
    }

    pub fn modes(&self) -> usize {
        self.c.nrows()
    }

    pub fn c_s(&self) -> DMatrix<Cplx<T>> {
        (&self.c + self.c.transpose()) * Cplx::new(lit::<T>(0.5), T::zero())
    }

    /// Largest entry of `I − 4 C_s C̄_s − (D + I)(D + I)ᴴ`.
    pub fn consistency_residual(&self) -> T {
        let k = self.modes();
        let cs = self.c_s();
        let id = DMatrix::<Cplx<T>>::identity(k, k);
        let dp = &self.d + &id;
        let four = Cplx::new(lit::<T>(4.0), T::zero());
        let lhs = &id - &cs * conj(&cs) * four;
        max_abs_c(&(lhs - &dp * dp.adjoint()))
    }

    /// Largest singular value of `2 C_s`.
    pub fn squeeze_norm(&self) -> T {
        let two_cs = self.c_s() * Cplx::new(lit::<T>(2.0), T::zero());
        let gram = &two_cs * two_cs.adjoint();
        SymmetricEigen::new(gram)
            .eigenvalues
            .iter()
            .fold(T::zero(), |a, &b| a.max(b))
            .max(T::zero())
            .sqrt()
    }

    fn pack(&self, y: &mut [T]) {
        let k2 = self.modes() * self.modes();
        for (i, z) in self.c.iter().enumerate() {
            y[i] = z.re;
            y[k2 + i] = z.im;
        }
        for (i, z) in self.d.iter().enumerate() {
            y[2 * k2 + i] = z.re;
            y[3 * k2 + i] = z.im;
        }
    }

    fn unpack(k: usize, y: &[T]) -> Self {
        let k2 = k * k;
        let c = DMatrix::from_fn(k, k, |i, j| Cplx::new(y[i + j * k], y[k2 + i + j * k]));
        let d = DMatrix::from_fn(k, k, |i, j| Cplx::new(y[2 * k2 + i + j * k], y[3 * k2 + i + j * k]));
        Self { c, d }
    }
}

/// Final `C`, `D` plus the worst consistency residual seen.
#[derive(Debug, Clone)]
pub struct CdSolution<T: Real> {
    pub state: SqueezeState<T>,
    pub max_residual: T,
    pub stats: Stats,
}

fn cd_rhs<T: Real>(system: &System<T>, k: usize, tau: T, from_above: bool, y: &[T], dy: &mut [T]) -> Result<()> {
    let c = if from_above {
        system.coupling_matrices(tau)?
    } else {
        left_limit_couplings(system, tau)?
    };
    let st = SqueezeState::unpack(k, y);
    let cs = st.c_s();
    let id = DMatrix::<Cplx<T>>::identity(k, k);
    let four = Cplx::new(lit::<T>(4.0), T::zero());
    let two = Cplx::new(lit::<T>(2.0), T::zero());
    let minus_i = Cplx::new(T::zero(), -T::one());
    let cs_gh = &cs * c.g.adjoint() * four;
    let dc = (&cs_gh * &cs + &c.w * &cs * two + &c.g) * minus_i;
    let dd = ((&cs_gh + &c.w) * (&st.d + &id)) * minus_i;
    SqueezeState { c: dc, d: dd }.pack(dy);
    Ok(())
}

/// Couplings at `τ` with switching jumps taken from below.
fn left_limit_couplings<T: Real>(system: &System<T>, tau: T) -> Result<crate::cavity::CouplingMatrices<T>> {
    let mut full = system.coupling_matrices(tau)?;
    let m = system.detector_count();
    for (d, det) in system.detectors().iter().enumerate() {
        if det.switching.eval_limit(tau, false) == det.switching.eval(tau) {
            continue;
        }
        for j in m..system.modes() {
            full.w[(d, j)] = Cplx::new(T::zero(), T::zero());
            full.w[(j, d)] = Cplx::new(T::zero(), T::zero());
            full.g[(d, j)] = Cplx::new(T::zero(), T::zero());
            full.g[(j, d)] = Cplx::new(T::zero(), T::zero());
        }
    }
    Ok(full)
}

struct Monitor<T> {
    k: usize,
    ceiling: T,
    worst: T,
}

impl<T: Real> Monitor<T> {
    fn check(&mut self, y: &[T]) -> Result<()> {
        let st = SqueezeState::unpack(self.k, y);
        let res = st.consistency_residual();
        self.worst = self.worst.max(res);
        if res > self.ceiling {
            return Err(Error::Consistency {
                residual: to_f64(res),
                ceiling: to_f64(self.ceiling),
            });
        }
        let norm = st.squeeze_norm();
        if norm >= lit::<T>(SQUEEZE_LIMIT) {
            return Err(Error::SqueezingDomain(format!(
                "largest singular value of 2C_s reached {}",
                to_f64(norm)
            )));
        }
        Ok(())
    }
}

impl<T: Real> StepHook<T> for Monitor<T> {
    fn after_step(&mut self, _t: T, y: &mut [T]) -> Result<bool> {
        self.check(y)?;
        Ok(false)
    }
}

/// Integrates the `C`/`D` equations over `window` from `C = D = 0`.
pub fn evolve_cd<T: Real>(system: &System<T>, window: (T, T), cfg: &IntegratorConfig<T>) -> Result<CdSolution<T>> {
    evolve_cd_with_ceiling(system, window, cfg, lit(CONSISTENCY_CEILING))
}

/// [`evolve_cd`] with an explicit consistency ceiling.
pub fn evolve_cd_with_ceiling<T: Real>(
    system: &System<T>,
    window: (T, T),
    cfg: &IntegratorConfig<T>,
    ceiling: T,
) -> Result<CdSolution<T>> {
    cfg.validate()?;
    let (tau_i, tau_f) = window;
    if tau_f <= tau_i {
        return Err(Error::InvalidArgument("evolution window must be increasing".into()));
    }
    let k = system.modes();
    let mut y = vec![T::zero(); 4 * k * k];
    let mut monitor = Monitor {
        k,
        ceiling,
        worst: T::zero(),
    };
    let mut cuts: Vec<T> = system
        .discontinuities()
        .into_iter()
        .filter(|&c| c > tau_i && c < tau_f)
        .collect();
    cuts.push(tau_f);
    let mut stats = Stats::default();
    let mut start = tau_i;
    for cut in cuts {
        let rhs = |t: T, y: &[T], dy: &mut [T]| cd_rhs(system, k, t, t < cut, y, dy);
        let seg = match cfg.method {
            Method::Rk4Fixed { dt } => {
                let s = rk4(rhs, start, cut, &mut y, dt, &[], |_, _| Ok(()))?;
                monitor.check(&y)?;
                s
            }
            Method::Rk45Adaptive { rtol, atol } => {
                let opts = AdaptiveOptions {
                    rtol,
                    atol,
                    max_steps: cfg.max_steps,
                };
                let frac = cfg.step_ceiling_fraction;
                let ceiling = |tau: T| frac * T::two_pi() / system.local_frequency(tau);
                dopri5(rhs, start, cut, &mut y, &opts, ceiling, &[], |_, _| Ok(()), &mut monitor)?
            }
        };
        stats.merge(seg);
        start = cut;
    }
    Ok(CdSolution {
        state: SqueezeState::unpack(k, &y),
        max_residual: monitor.worst,
        stats,
    })
}

/// `z = r e^{iθ}` with `r ⪰ 0` Hermitian, `θ` real symmetric, and the
/// rotation `φ` Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingDecomposition<T: Real> {
    pub r: DMatrix<Cplx<T>>,
    pub theta: DMatrix<T>,
    pub phi: DMatrix<Cplx<T>>,
    pub z: DMatrix<Cplx<T>>,
}

/// Unitary `e^{iθ}` for real symmetric `θ`.
pub fn exp_i_theta<T: Real>(theta: &DMatrix<T>) -> DMatrix<Cplx<T>> {
    hermitian_fn(&crate::linalg::to_complex(theta), |x| Cplx::new(x.cos(), x.sin()))
}

/// Real symmetric `θ` with `e^{iθ} = u` for a symmetric unitary `u`.
///
/// `Re u` and `Im u` commute, so the eigenbasis of a generic combination
/// `Re u + c Im u` diagonalises both.
fn symmetric_unitary_log<T: Real>(u: &DMatrix<Cplx<T>>) -> DMatrix<T> {
    let a = real_part(u);
    let b = imag_part(u);
    let mix = &a + &b * lit::<T>(std::f64::consts::FRAC_1_SQRT_2 * 1.1);
    let eig = SymmetricEigen::new(crate::linalg::symmetrize(&mix));
    let o = &eig.eigenvectors;
    let n = u.nrows();
    let mut out = DMatrix::<T>::zeros(n, n);
    for k in 0..n {
        let v = o.column(k);
        let ca = v.dot(&(&a * v));
        let sb = v.dot(&(&b * v));
        let alpha = sb.atan2(ca);
        out += v * v.transpose() * alpha;
    }
    out
}

/// Hermitian `φ` with `e^{iφ} = u` for a unitary `u`. The Hermitian parts
/// `(u + uᴴ)/2` and `(u − uᴴ)/2i` commute, so as above one eigenbasis serves
/// both.
fn unitary_log<T: Real>(u: &DMatrix<Cplx<T>>) -> Result<DMatrix<Cplx<T>>> {
    let n = u.nrows();
    let id = DMatrix::<Cplx<T>>::identity(n, n);
    let defect = max_abs_c(&(u.adjoint() * u - &id));
    if defect > lit::<T>(1e-8) {
        return Err(Error::Factorisation(format!(
            "rotation factor is not unitary (defect {:e})",
            to_f64(defect)
        )));
    }
    let half = Cplx::new(lit::<T>(0.5), T::zero());
    let a = (u + u.adjoint()) * half;
    let b = (u - u.adjoint()) * Cplx::new(T::zero(), -lit::<T>(0.5));
    let mix = &a + &b * Cplx::new(lit::<T>(std::f64::consts::FRAC_1_SQRT_2 * 1.1), T::zero());
    let eig = SymmetricEigen::new((&mix + mix.adjoint()) * half);
    let mut out = DMatrix::<Cplx<T>>::zeros(n, n);
    for k in 0..n {
        let v = eig.eigenvectors.column(k);
        let ca = v.dotc(&(&a * v)).re;
        let sb = v.dotc(&(&b * v)).re;
        let alpha = Cplx::new(sb.atan2(ca), T::zero());
        out += v * v.adjoint() * alpha;
    }
    let back = hermitian_fn(&out, |x| Cplx::new(x.cos(), x.sin()));
    let err = max_abs_c(&(back - u));
    if err > lit::<T>(1e-8) {
        return Err(Error::Factorisation(format!(
            "rotation logarithm does not reproduce the factor (error {:e})",
            to_f64(err)
        )));
    }
    Ok(out)
}

/// Extracts `r`, `θ`, `φ` from `C_s` and `D`.
pub fn squeezing_from_c<T: Real>(s: &SqueezeState<T>) -> Result<SqueezingDecomposition<T>> {
    let k = s.modes();
    let two_cs = s.c_s() * Cplx::new(lit::<T>(2.0), T::zero());
    let tk = takagi(&two_cs)?;
    if let Some(&t) = tk.values.iter().find(|&&t| t >= lit::<T>(SQUEEZE_LIMIT)) {
        return Err(Error::SqueezingDomain(format!("singular value {} of 2C_s is not below 1", to_f64(t))));
    }
    let v = &tk.unitary;
    let rho: Vec<T> = tk.values.iter().map(|&t| t.atanh()).collect();
    let scaled = |f: &dyn Fn(T) -> T| {
        let mut m = v.clone();
        for (c, &p) in rho.iter().enumerate() {
            let fc = Cplx::new(f(p), T::zero());
            m.column_mut(c).iter_mut().for_each(|z| *z *= fc);
        }
        m
    };
    let z = scaled(&|p| p) * v.transpose();
    let r = scaled(&|p| p) * v.adjoint();
    let theta = symmetric_unitary_log(&(v * v.transpose()));
    let cosh_r = scaled(&|p| p.cosh()) * v.adjoint();
    let phi = unitary_log(&(cosh_r * (&s.d + DMatrix::<Cplx<T>>::identity(k, k))))?;

    // round trip: ½ tanh(r) e^{iθ} = C_s
    let tanh_r = hermitian_fn(&r, |x| Cplx::new(x.tanh(), T::zero()));
    let back = tanh_r * exp_i_theta(&theta) * Cplx::new(lit::<T>(0.5), T::zero());
    let err = max_abs_c(&(back - s.c_s()));
    if err > lit::<T>(1e-8) {
        return Err(Error::Factorisation(format!(
            "squeezing decomposition does not reproduce C_s (error {:e})",
            to_f64(err)
        )));
    }
    Ok(SqueezingDecomposition { r, theta, phi, z })
}

/// Covariance of `U|0⟩` from `r` and `θ`:
/// `σ_qq = Re(Ch + Sh)`, `σ_pp = Re(Ch − Sh)`, `σ_qp = Im(Sh − Ch)` with
/// `Ch = cosh 2r` and `Sh = sinh 2r · e^{iθ}`.
pub fn covariance_from_squeezing<T: Real>(d: &SqueezingDecomposition<T>) -> Result<CovarianceMatrix<T>> {
    let k = d.r.nrows();
    let two = lit::<T>(2.0);
    let ch = hermitian_fn(&d.r, |x| Cplx::new((two * x).cosh(), T::zero()));
    let sh = hermitian_fn(&d.r, |x| Cplx::new((two * x).sinh(), T::zero())) * exp_i_theta(&d.theta);
    let tol = lit::<T>(1e-10) * max_abs_c(&ch).max(T::one());
    let residue = max_abs_c(&(&sh - sh.transpose())).max(max_abs_c(&(&ch - ch.adjoint())));
    if residue > tol {
        return Err(Error::SqueezingDomain(format!(
            "inconsistent r and theta: block symmetry residue {:e}",
            to_f64(residue)
        )));
    }
    let qq = real_part(&(&ch + &sh));
    let pp = real_part(&(&ch - &sh));
    let qp = imag_part(&(&sh - &ch));
    let mut m = DMatrix::<T>::zeros(2 * k, 2 * k);
    m.view_mut((0, 0), (k, k)).copy_from(&qq);
    m.view_mut((k, k), (k, k)).copy_from(&pp);
    m.view_mut((0, k), (k, k)).copy_from(&qp);
    m.view_mut((k, 0), (k, k)).copy_from(&qp.transpose());
    CovarianceMatrix::new(crate::linalg::symmetrize(&m))
}

/// Heisenberg map `a ↦ αa + βa†` with `α = cosh(r) e^{iφ}` and
/// `β = sinh(r) e^{iθ} conj(e^{iφ})`, written in quadratures.
pub fn symplectic_from_squeezing<T: Real>(d: &SqueezingDecomposition<T>) -> Result<SymplecticMatrix<T>> {
    let k = d.r.nrows();
    let cosh_r = hermitian_fn(&d.r, |x| Cplx::new(x.cosh(), T::zero()));
    let sinh_r = hermitian_fn(&d.r, |x| Cplx::new(x.sinh(), T::zero()));
    let rot = hermitian_fn(&d.phi, |x| Cplx::new(x.cos(), x.sin()));
    let alpha = cosh_r * &rot;
    let beta = sinh_r * exp_i_theta(&d.theta) * conj(&rot);
    let sum = &alpha + &beta;
    let diff = &alpha - &beta;
    let mut m = DMatrix::<T>::zeros(2 * k, 2 * k);
    m.view_mut((0, 0), (k, k)).copy_from(&real_part(&sum));
    m.view_mut((0, k), (k, k)).copy_from(&(-imag_part(&diff)));
    m.view_mut((k, 0), (k, k)).copy_from(&imag_part(&sum));
    m.view_mut((k, k), (k, k)).copy_from(&real_part(&diff));
    SymplecticMatrix::new(m)
}

/// Integrator settings for a cross-validation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossValidationConfig<T: Real> {
    pub symplectic: IntegratorConfig<T>,
    pub oracle: IntegratorConfig<T>,
}

impl<T: Real> Default for CrossValidationConfig<T> {
    fn default() -> Self {
        Self {
            symplectic: IntegratorConfig::adaptive(lit(1e-11), lit(1e-13)),
            oracle: IntegratorConfig::adaptive(lit(1e-11), lit(1e-13)),
        }
    }
}

/// Both covariance matrices and their largest entrywise difference.
#[derive(Debug, Clone)]
pub struct CrossValidation<T: Real> {
    pub symplectic: CovarianceMatrix<T>,
    pub oracle: CovarianceMatrix<T>,
    pub discrepancy: T,
    pub max_residual: T,
}

/// Evolves the total vacuum by both methods and compares the covariances.
pub fn cross_validate<T: Real>(
    system: &System<T>,
    window: (T, T),
    cfgs: &CrossValidationConfig<T>,
) -> Result<CrossValidation<T>> {
    if system
        .detectors()
        .iter()
        .any(|d| d.initial_state != InitialState::Vacuum)
    {
        return Err(Error::InvalidArgument(
            "covariance cross-validation needs a vacuum start; use symplectic_from_squeezing".into(),
        ));
    }
    let summary = evolve_with(system, window, &cfgs.symplectic, &[], |_, _| Ok(()))?;
    let sigma_s = evolve_covariance(&summary.final_state, &system.initial_covariance())?;
    let cd = evolve_cd(system, window, &cfgs.oracle)?;
    let sigma_o = covariance_from_squeezing(&squeezing_from_c(&cd.state)?)?;
    let discrepancy = max_abs(&(sigma_s.matrix() - sigma_o.matrix()));
    Ok(CrossValidation {
        symplectic: sigma_s,
        oracle: sigma_o,
        discrepancy,
        max_residual: cd.max_residual,
    })
}

/// Randomised small system for the dual-method check: `M ∈ {1, 2}`,
/// `N ∈ 1..=5`, `λ ∈ (0, 0.05]`, Gaussian switching, stationary detectors in
/// a Dirichlet cavity of length `2π`. Returns the system and its window
/// `[−4δ, 4δ]`.
pub fn random_system(rng: &mut ChaCha8Rng) -> Result<(System<f64>, (f64, f64))> {
    let length = 2.0 * std::f64::consts::PI;
    let m = rng.random_range(1..=2usize);
    let n = rng.random_range(1..=5usize);
    let delta = rng.random_range(0.2..1.0);
    let cavity = CavityConfig::with_mode_count(length, Boundary::Dirichlet, n, false)?;
    let detectors = (0..m)
        .map(|_| {
            let lambda = 0.05 * (1.0 - rng.random::<f64>());
            let gap = rng.random_range(0.3..3.0);
            let x = rng.random_range(0.05..0.95) * length;
            DetectorConfig::new(gap, SwitchingProfile::Gaussian { lambda, delta }, Worldline::inertial(x))
        })
        .collect();
    let system = System::new(cavity, detectors, Picture::Interaction)?;
    Ok((system, (-4.0 * delta, 4.0 * delta)))
}

/// One line of [`random_suite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteCase {
    pub detectors: usize,
    pub modes: usize,
    pub discrepancy: f64,
    pub max_residual: f64,
}

/// Runs [`cross_validate`] on `count` random systems drawn from `seed`.
pub fn random_suite(seed: u64, count: usize, cfgs: &CrossValidationConfig<f64>) -> Result<Vec<SuiteCase>> {
    use rayon::prelude::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let systems = (0..count).map(|_| random_system(&mut rng)).collect::<Result<Vec<_>>>()?;
    systems
        .par_iter()
        .map(|(sys, window)| {
            let cv = cross_validate(sys, *window, cfgs)?;
            Ok(SuiteCase {
                detectors: sys.detector_count(),
                modes: sys.field_count(),
                discrepancy: cv.discrepancy,
                max_residual: cv.max_residual,
            })
        })
        .collect()
}
