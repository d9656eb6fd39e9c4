// SPDX-License-Identifier: Apache-2.0

//! Cavity modes, detector worldlines and switching, and assembly of the
//! quadratic-Hamiltonian matrices `w(τ)`, `g(τ)` and `F(τ)`.
//!
//! The mode register holds the `M` detectors first, then the `N` field modes
//! in the order of [`CavityConfig::modes`].

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::gaussian::CovarianceMatrix;
use crate::linalg::{imag_part, max_abs_c, real_part};
use crate::{lit, to_f64, Cplx, Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Periodic => "periodic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Interaction,
    Full,
}

/// One-dimensional cavity of length `L` with a chosen set of field modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityConfig<T: Real> {
    length: T,
    boundary: Boundary,
    modes: Vec<i64>,
    normalize: bool,
}

impl<T: Real> CavityConfig<T> {
    pub fn new(length: T, boundary: Boundary, modes: Vec<i64>, normalize: bool) -> Result<Self> {
        if length <= T::zero() || !length.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cavity length must be positive, got {}",
                to_f64(length)
            )));
        }
        if modes.is_empty() {
            return Err(Error::InvalidArgument("cavity needs at least one field mode".into()));
        }
        for (pos, &n) in modes.iter().enumerate() {
            if boundary == Boundary::Dirichlet && n <= 0 {
                return Err(Error::InvalidMode {
                    index: n,
                    boundary: boundary.name(),
                });
            }
            if modes[..pos].contains(&n) {
                return Err(Error::InvalidArgument(format!("mode index {n} repeated")));
            }
            if normalize && n == 0 {
                return Err(Error::InvalidArgument(
                    "the zero mode cannot be normalised by 1/sqrt(omega L)".into(),
                ));
            }
        }
        Ok(Self {
            length,
            boundary,
            modes,
            normalize,
        })
    }

    /// Dirichlet `1..=N`, or periodic `-N..=-1, 1..=N` (plus `0` if asked).
    pub fn with_mode_count(length: T, boundary: Boundary, n: usize, include_zero: bool) -> Result<Self> {
        Self::new(length, boundary, default_modes(boundary, n, include_zero)?, false)
    }

    pub fn with_normalization(mut self, normalize: bool) -> Result<Self> {
        self.normalize = normalize;
        Self::new(self.length, self.boundary, self.modes, normalize)
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn modes(&self) -> &[i64] {
        &self.modes
    }

    pub fn normalized(&self) -> bool {
        self.normalize
    }

    pub fn wavenumber(&self, n: i64) -> Result<T> {
        let nn = lit::<T>(n as f64);
        match self.boundary {
            Boundary::Dirichlet if n <= 0 => Err(Error::InvalidMode {
                index: n,
                boundary: self.boundary.name(),
            }),
            Boundary::Dirichlet => Ok(nn * T::pi() / self.length),
            Boundary::Periodic => Ok(nn * T::two_pi() / self.length),
        }
    }

    /// `ω_n = |k_n|`.
    pub fn mode_frequency(&self, n: i64) -> Result<T> {
        Ok(self.wavenumber(n)?.abs())
    }

    /// Highest frequency among the included modes.
    pub fn max_frequency(&self) -> T {
        self.modes
            .iter()
            .filter_map(|&n| self.mode_frequency(n).ok())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Spatial profile `sin(k x)` or `e^{ikx}`, optionally scaled by `1/√(ωL)`.
    pub fn spatial_profile(&self, n: i64, x: T) -> Result<Cplx<T>> {
        let k = self.wavenumber(n)?;
        let mut v = match self.boundary {
            Boundary::Dirichlet => Cplx::new((k * x).sin(), T::zero()),
            Boundary::Periodic => Cplx::new((k * x).cos(), (k * x).sin()),
        };
        if self.normalize {
            v = v.unscale((k.abs() * self.length).sqrt());
        }
        Ok(v)
    }

    /// `u_n(x, t) = e^{−iω_n t} × spatial profile`.
    pub fn mode_function(&self, n: i64, x: T, t: T) -> Result<Cplx<T>> {
        let omega = self.mode_frequency(n)?;
        let phase = Cplx::new((omega * t).cos(), -(omega * t).sin());
        Ok(self.spatial_profile(n, x)? * phase)
    }

    /// Mode indices whose frequency matches `gap` to a relative `1e-9`.
    pub fn resonant_modes(&self, gap: T) -> Vec<i64> {
        let tol = lit::<T>(1e-9) * gap.abs().max(T::one());
        self.modes
            .iter()
            .copied()
            .filter(|&n| self.mode_frequency(n).is_ok_and(|w| (w - gap).abs() <= tol))
            .collect()
    }
}

/// Default mode list for `n` modes per sign.
pub fn default_modes(boundary: Boundary, n: usize, include_zero: bool) -> Result<Vec<i64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("mode count must be positive".into()));
    }
    let n = n as i64;
    Ok(match boundary {
        Boundary::Dirichlet => {
            if include_zero {
                return Err(Error::InvalidMode {
                    index: 0,
                    boundary: boundary.name(),
                });
            }
            (1..=n).collect()
        }
        Boundary::Periodic => {
            let mut v: Vec<i64> = (-n..=-1).collect();
            if include_zero {
                v.push(0);
            }
            v.extend(1..=n);
            v
        }
    })
}

type Curve<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Detector trajectory parametrised by proper time.
#[derive(Clone)]
pub enum Worldline<T: Real> {
    Inertial { x0: T },
    /// Starts at rest at `x0` when `τ = 0` and accelerates towards `+x`.
    UniformAcceleration { a: T, x0: T },
    Custom { t: Curve<T>, x: Curve<T> },
}

impl<T: Real> fmt::Debug for Worldline<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Worldline::Inertial { x0 } => write!(f, "Inertial {{ x0: {} }}", to_f64(*x0)),
            Worldline::UniformAcceleration { a, x0 } => {
                write!(f, "UniformAcceleration {{ a: {}, x0: {} }}", to_f64(*a), to_f64(*x0))
            }
            Worldline::Custom { .. } => f.write_str("Custom { .. }"),
        }
    }
}

impl<T: Real> PartialEq for Worldline<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Worldline::Inertial { x0: a }, Worldline::Inertial { x0: b }) => a == b,
            (
                Worldline::UniformAcceleration { a: a1, x0: x1 },
                Worldline::UniformAcceleration { a: a2, x0: x2 },
            ) => a1 == a2 && x1 == x2,
            (Worldline::Custom { t: t1, x: x1 }, Worldline::Custom { t: t2, x: x2 }) => {
                Arc::ptr_eq(t1, t2) && Arc::ptr_eq(x1, x2)
            }
            _ => false,
        }
    }
}

/// `sinh(z)/z`, exact at `z = 0`.
fn sinhc<T: Real>(z: T) -> T {
    if z.abs() < lit::<T>(1e-4) {
        let z2 = z * z;
        T::one() + z2 / lit::<T>(6.0) * (T::one() + z2 / lit::<T>(20.0))
    } else {
        z.sinh() / z
    }
}

fn finite_diff<T: Real>(f: &Curve<T>, tau: T) -> T {
    let h = lit::<T>(1e-5) * tau.abs().max(T::one());
    (f(tau + h) - f(tau - h)) / (h + h)
}

impl<T: Real> Worldline<T> {
    pub fn inertial(x0: T) -> Self {
        Worldline::Inertial { x0 }
    }

    pub fn accelerated(a: T, x0: T) -> Result<Self> {
        if a < T::zero() || !a.is_finite() {
            return Err(Error::Worldline(format!(
                "proper acceleration must be non-negative, got {}",
                to_f64(a)
            )));
        }
        Ok(Worldline::UniformAcceleration { a, x0 })
    }

    pub fn custom<FT, FX>(t: FT, x: FX) -> Self
    where
        FT: Fn(T) -> T + Send + Sync + 'static,
        FX: Fn(T) -> T + Send + Sync + 'static,
    {
        Worldline::Custom {
            t: Arc::new(t),
            x: Arc::new(x),
        }
    }

    pub fn is_inertial(&self) -> bool {
        match self {
            Worldline::Inertial { .. } => true,
            Worldline::UniformAcceleration { a, .. } => *a == T::zero(),
            Worldline::Custom { .. } => false,
        }
    }

    /// `(t(τ), x(τ))`.
    pub fn eval(&self, tau: T) -> Result<(T, T)> {
        match self {
            Worldline::Inertial { x0 } => Ok((tau, *x0)),
            Worldline::UniformAcceleration { a, x0 } => {
                let z = *a * tau;
                let half = lit::<T>(0.5);
                let t = tau * sinhc(z);
                let s = sinhc(z * half);
                // (cosh z − 1)/a = (a τ²/2) sinhc(z/2)²
                let x = *x0 + *a * tau * tau * half * s * s;
                Ok((t, x))
            }
            Worldline::Custom { t, x } => {
                if finite_diff(t, tau) <= T::zero() {
                    return Err(Error::Worldline(format!(
                        "custom worldline has non-increasing t(tau) at tau = {}",
                        to_f64(tau)
                    )));
                }
                Ok((t(tau), x(tau)))
            }
        }
    }

    /// `dt/dτ`.
    pub fn redshift(&self, tau: T) -> T {
        match self {
            Worldline::Inertial { .. } => T::one(),
            Worldline::UniformAcceleration { a, .. } => (*a * tau).cosh(),
            Worldline::Custom { t, .. } => finite_diff(t, tau),
        }
    }

    /// `dx/dτ`.
    pub fn velocity(&self, tau: T) -> T {
        match self {
            Worldline::Inertial { .. } => T::zero(),
            Worldline::UniformAcceleration { a, .. } => (*a * tau).sinh(),
            Worldline::Custom { x, .. } => finite_diff(x, tau),
        }
    }
}

/// Time profile `λ(τ)` of the coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwitchingProfile<T: Real> {
    /// `λ` for `τ ≥ 0`, zero before.
    Sharp { lambda: T },
    /// `λ exp(−τ²/2δ²)`.
    Gaussian { lambda: T, delta: T },
}

impl<T: Real> SwitchingProfile<T> {
    pub fn eval(&self, tau: T) -> T {
        match *self {
            SwitchingProfile::Sharp { lambda } => {
                if tau >= T::zero() {
                    lambda
                } else {
                    T::zero()
                }
            }
            SwitchingProfile::Gaussian { lambda, delta } => {
                let u = tau / delta;
                lambda * (-u * u * lit::<T>(0.5)).exp()
            }
        }
    }

    /// One-sided limit of `λ` at `τ`; differs from [`SwitchingProfile::eval`]
    /// only at a jump.
    pub fn eval_limit(&self, tau: T, from_above: bool) -> T {
        match *self {
            SwitchingProfile::Sharp { lambda } if tau == T::zero() => {
                if from_above {
                    lambda
                } else {
                    T::zero()
                }
            }
            _ => self.eval(tau),
        }
    }

    pub fn strength(&self) -> T {
        match *self {
            SwitchingProfile::Sharp { lambda } | SwitchingProfile::Gaussian { lambda, .. } => lambda,
        }
    }

    pub fn is_sharp(&self) -> bool {
        matches!(self, SwitchingProfile::Sharp { .. })
    }

    fn validate(&self) -> Result<()> {
        let lambda = self.strength();
        if lambda < T::zero() || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "coupling strength must be non-negative, got {}",
                to_f64(lambda)
            )));
        }
        if let SwitchingProfile::Gaussian { delta, .. } = *self {
            if delta <= T::zero() || !delta.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "gaussian width must be positive, got {}",
                    to_f64(delta)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState<T: Real> {
    Vacuum,
    /// Covariance `diag(e^{2r}, e^{−2r})`.
    Squeezed { r: T },
}

impl<T: Real> InitialState<T> {
    pub fn covariance(&self) -> CovarianceMatrix<T> {
        match *self {
            InitialState::Vacuum => CovarianceMatrix::vacuum(1),
            InitialState::Squeezed { r } => CovarianceMatrix::squeezed(r),
        }
    }
}

/// A single oscillator detector.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig<T: Real> {
    pub gap: T,
    pub switching: SwitchingProfile<T>,
    pub worldline: Worldline<T>,
    pub initial_state: InitialState<T>,
    /// Per-mode weights `λ_n`, aligned with the cavity mode list. `None`
    /// means all ones.
    pub mode_weights: Option<Vec<T>>,
}

impl<T: Real> DetectorConfig<T> {
    pub fn new(gap: T, switching: SwitchingProfile<T>, worldline: Worldline<T>) -> Self {
        Self {
            gap,
            switching,
            worldline,
            initial_state: InitialState::Vacuum,
            mode_weights: None,
        }
    }

    pub fn with_initial_state(mut self, state: InitialState<T>) -> Self {
        self.initial_state = state;
        self
    }

    fn weight(&self, idx: usize) -> T {
        self.mode_weights.as_ref().map_or(T::one(), |w| w[idx])
    }
}

/// `w` Hermitian and `g` symmetric, both `(M+N)×(M+N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices<T: Real> {
    pub w: DMatrix<Cplx<T>>,
    pub g: DMatrix<Cplx<T>>,
}

/// `F = [[A, X], [Xᴴ, B]]` together with the real symmetric `F + Fᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FMatrix<T: Real> {
    pub f: DMatrix<Cplx<T>>,
    pub f_sym: DMatrix<T>,
}

/// Maximum imaginary residue tolerated in `F + Fᵀ`.
pub const F_SYM_IMAG_TOL: f64 = 1e-10;

/// Builds `F` and `F + Fᵀ` from `w` and `g`.
pub fn f_matrix<T: Real>(c: &CouplingMatrices<T>) -> Result<FMatrix<T>> {
    let k = c.w.nrows();
    if c.w.ncols() != k || c.g.nrows() != k || c.g.ncols() != k {
        return Err(Error::MalformedCoupling("w and g must be square and the same size".into()));
    }
    let scale = max_abs_c(&c.w).max(max_abs_c(&c.g)).max(T::one());
    let tol = lit::<T>(F_SYM_IMAG_TOL) * scale;
    if max_abs_c(&(&c.w - c.w.adjoint())) > tol {
        return Err(Error::MalformedCoupling("w is not Hermitian".into()));
    }
    if max_abs_c(&(&c.g - c.g.transpose())) > tol {
        return Err(Error::MalformedCoupling("g is not symmetric".into()));
    }
    let half = Cplx::new(lit::<T>(0.5), T::zero());
    let i_half = Cplx::new(T::zero(), lit::<T>(0.5));
    let gh = c.g.adjoint();
    let a = (&c.w + &c.g + &gh) * half;
    let b = (&c.w - &c.g - &gh) * half;
    let x = (&c.w - &c.g + &gh) * i_half;
    let mut f = DMatrix::<Cplx<T>>::zeros(2 * k, 2 * k);
    f.view_mut((0, 0), (k, k)).copy_from(&a);
    f.view_mut((0, k), (k, k)).copy_from(&x);
    f.view_mut((k, 0), (k, k)).copy_from(&x.adjoint());
    f.view_mut((k, k), (k, k)).copy_from(&b);
    let sum = &f + f.transpose();
    let imag = imag_part(&sum);
    let residue = imag.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if residue > tol {
        return Err(Error::MalformedCoupling(format!(
            "F + F^T has imaginary residue {:e}",
            to_f64(residue)
        )));
    }
    Ok(FMatrix {
        f,
        f_sym: real_part(&sum),
    })
}

/// Nonzero entries of `F + Fᵀ`, as `(row, col, value)` with both triangles.
pub type Triplets<T> = Vec<(usize, usize, T)>;

/// Detectors, cavity and picture, validated together.
#[derive(Debug, Clone, PartialEq)]
pub struct System<T: Real> {
    cavity: CavityConfig<T>,
    detectors: Vec<DetectorConfig<T>>,
    picture: Picture,
    frequencies: Vec<T>,
}

impl<T: Real> System<T> {
    pub fn new(cavity: CavityConfig<T>, detectors: Vec<DetectorConfig<T>>, picture: Picture) -> Result<Self> {
        if detectors.is_empty() {
            return Err(Error::InvalidArgument("at least one detector is required".into()));
        }
        for (j, d) in detectors.iter().enumerate() {
            if d.gap <= T::zero() || !d.gap.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "detector {j}: gap must be positive, got {}",
                    to_f64(d.gap)
                )));
            }
            d.switching.validate()?;
            if let Some(w) = &d.mode_weights {
                if w.len() != cavity.modes().len() {
                    return Err(Error::DimensionMismatch {
                        expected: cavity.modes().len(),
                        found: w.len(),
                    });
                }
            }
            if let InitialState::Squeezed { r } = d.initial_state {
                if !r.is_finite() {
                    return Err(Error::InvalidArgument(format!("detector {j}: squeezing must be finite")));
                }
            }
        }
        let first = &detectors[0].worldline;
        let all_identical = detectors.iter().all(|d| &d.worldline == first);
        let all_inertial = detectors.iter().all(|d| d.worldline.is_inertial());
        if !all_identical && !all_inertial {
            return Err(Error::AmbiguousTime(
                "detectors on distinct non-inertial worldlines do not share a proper time".into(),
            ));
        }
        let frequencies = cavity
            .modes()
            .iter()
            .map(|&n| cavity.mode_frequency(n))
            .collect::<Result<Vec<T>>>()?;
        Ok(Self {
            cavity,
            detectors,
            picture,
            frequencies,
        })
    }

    pub fn cavity(&self) -> &CavityConfig<T> {
        &self.cavity
    }

    pub fn detectors(&self) -> &[DetectorConfig<T>] {
        &self.detectors
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn with_picture(&self, picture: Picture) -> Self {
        Self {
            picture,
            ..self.clone()
        }
    }

    pub fn detector_count(&self) -> usize {
        self.detectors.len()
    }

    pub fn field_count(&self) -> usize {
        self.frequencies.len()
    }

    /// `M + N`.
    pub fn modes(&self) -> usize {
        self.detectors.len() + self.frequencies.len()
    }

    /// Detector initial states followed by field vacuum.
    pub fn initial_covariance(&self) -> CovarianceMatrix<T> {
        let mut parts: Vec<CovarianceMatrix<T>> = self.detectors.iter().map(|d| d.initial_state.covariance()).collect();
        parts.push(CovarianceMatrix::vacuum(self.field_count()));
        CovarianceMatrix::direct_sum(&parts)
    }

    /// Proper times where some switching function jumps.
    pub fn discontinuities(&self) -> Vec<T> {
        if self.detectors.iter().any(|d| d.switching.is_sharp()) {
            vec![T::zero()]
        } else {
            Vec::new()
        }
    }

    /// True when `F` does not depend on `τ` for `τ > 0`: full picture,
    /// sharp switching and inertial detectors.
    pub fn is_static(&self) -> bool {
        self.picture == Picture::Full
            && self
                .detectors
                .iter()
                .all(|d| d.switching.is_sharp() && d.worldline.is_inertial())
    }

    /// Bound on the fastest phase rotation in the generator at `τ`.
    pub fn local_frequency(&self, tau: T) -> T {
        let wmax = self.cavity.max_frequency();
        let mut out = T::zero();
        for d in &self.detectors {
            let doppler = d.worldline.redshift(tau) + d.worldline.velocity(tau).abs();
            out = out.max(d.gap + wmax * doppler);
        }
        out
    }

    /// Largest value of [`System::local_frequency`] on a sampled window.
    pub fn max_frequency_on(&self, tau_i: T, tau_f: T) -> T {
        let samples = 64;
        (0..=samples)
            .map(|s| {
                let u = lit::<T>(s as f64 / samples as f64);
                self.local_frequency(tau_i + (tau_f - tau_i) * u)
            })
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Detector-field coefficient `c` such that `w_dn = c` and `g_dn = c̄/2`
    /// up to the picture-dependent phase, returned as `(w_dn, g_dn)`.
    fn pair_coupling(&self, d: usize, idx: usize, tau: T, lambda: T, t: T, x: T) -> Result<(Cplx<T>, Cplx<T>)> {
        let det = &self.detectors[d];
        let strength = lambda * det.weight(idx);
        let n = self.cavity.modes()[idx];
        let half = lit::<T>(0.5);
        Ok(match self.picture {
            Picture::Interaction => {
                let u = self.cavity.mode_function(n, x, t)?;
                let rot = Cplx::new((det.gap * tau).cos(), (det.gap * tau).sin());
                let w = rot * u * strength;
                let g = rot * u.conj() * (strength * half);
                (w, g)
            }
            Picture::Full => {
                let v = self.cavity.spatial_profile(n, x)?;
                (v * strength, v.conj() * (strength * half))
            }
        })
    }

    /// `w(τ)` and `g(τ)`.
    pub fn coupling_matrices(&self, tau: T) -> Result<CouplingMatrices<T>> {
        let m = self.detector_count();
        let k = self.modes();
        let mut w = DMatrix::<Cplx<T>>::zeros(k, k);
        let mut g = DMatrix::<Cplx<T>>::zeros(k, k);
        for (d, det) in self.detectors.iter().enumerate() {
            let (t, x) = det.worldline.eval(tau)?;
            if self.picture == Picture::Full {
                w[(d, d)] = Cplx::new(det.gap, T::zero());
            }
            for idx in 0..self.field_count() {
                let (wdn, gdn) = self.pair_coupling(d, idx, tau, det.switching.eval(tau), t, x)?;
                let j = m + idx;
                w[(d, j)] = wdn;
                w[(j, d)] = wdn.conj();
                g[(d, j)] = gdn;
                g[(j, d)] = gdn;
            }
        }
        if self.picture == Picture::Full {
            let z = self.detectors[0].worldline.redshift(tau);
            for (idx, &om) in self.frequencies.iter().enumerate() {
                w[(m + idx, m + idx)] = Cplx::new(z * om, T::zero());
            }
        }
        Ok(CouplingMatrices { w, g })
    }

    /// `F + Fᵀ` at `τ` as a dense matrix.
    pub fn f_sym(&self, tau: T) -> Result<DMatrix<T>> {
        let mut trip = Vec::new();
        self.f_sym_triplets(tau, &mut trip)?;
        let k2 = 2 * self.modes();
        let mut out = DMatrix::zeros(k2, k2);
        for (i, j, v) in trip {
            out[(i, j)] += v;
        }
        Ok(out)
    }

    /// Writes the nonzero entries of `F + Fᵀ` at `τ` into `out`.
    ///
    /// For `i ≠ j` the blocks are `qq = Re w + 2 Re g`, `pp = Re w − 2 Re g`,
    /// `qp = −Im w + 2 Im g` and `pq = Im w + 2 Im g`; the diagonal of the
    /// full picture contributes `w_ii` to both `qq` and `pp`.
    pub fn f_sym_triplets(&self, tau: T, out: &mut Triplets<T>) -> Result<()> {
        self.f_sym_triplets_from(tau, true, out)
    }

    /// As [`System::f_sym_triplets`], taking one-sided limits of the
    /// switching functions at a jump: from above when `from_above`.
    pub fn f_sym_triplets_from(&self, tau: T, from_above: bool, out: &mut Triplets<T>) -> Result<()> {
        out.clear();
        let m = self.detector_count();
        let k = self.modes();
        let two = lit::<T>(2.0);
        for (d, det) in self.detectors.iter().enumerate() {
            let (t, x) = det.worldline.eval(tau)?;
            let lambda = det.switching.eval_limit(tau, from_above);
            if lambda != T::zero() {
                for idx in 0..self.field_count() {
                    let (w, g) = self.pair_coupling(d, idx, tau, lambda, t, x)?;
                    let j = m + idx;
                    let qq = w.re + two * g.re;
                    let pp = w.re - two * g.re;
                    // (i, j) entries; (j, i) follow from F_sym symmetry
                    let qp = -w.im + two * g.im;
                    let pq = w.im + two * g.im;
                    out.push((d, j, qq));
                    out.push((j, d, qq));
                    out.push((k + d, k + j, pp));
                    out.push((k + j, k + d, pp));
                    out.push((d, k + j, qp));
                    out.push((k + j, d, qp));
                    out.push((k + d, j, pq));
                    out.push((j, k + d, pq));
                }
            }
            if self.picture == Picture::Full {
                out.push((d, d, det.gap));
                out.push((k + d, k + d, det.gap));
            }
        }
        if self.picture == Picture::Full {
            let z = self.detectors[0].worldline.redshift(tau);
            for (idx, &om) in self.frequencies.iter().enumerate() {
                let j = m + idx;
                out.push((j, j, z * om));
                out.push((k + j, k + j, z * om));
            }
        }
        Ok(())
    }
}
