// SPDX-License-Identifier: Apache-2.0

//! Zero-mean Gaussian states in the `(q_1..q_K, p_1..p_K)` quadrature ordering
//! with vacuum covariance equal to the identity.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::linalg::{asymmetry, max_abs, symmetrize};
use crate::{lit, to_f64, Cplx, Error, Real, Result};

/// Relative tolerance for the `±ν` pairing of the spectrum of `iΩσ`.
pub const PAIRING_TOL: f64 = 1e-9;

/// Slack below 1 tolerated on symplectic eigenvalues and determinants.
pub const PHYSICAL_TOL: f64 = 1e-8;

/// Logarithm base used by [`log_negativity`].
pub const LOG_NEGATIVITY_BASE: f64 = std::f64::consts::E;

fn symmetry_tol<T: Real>(m: &DMatrix<T>) -> T {
    let eps = T::default_epsilon();
    max_abs(m).max(T::one()) * eps * lit::<T>(1e4)
}

/// The `2K×2K` block form `[[0, I], [-I, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm<T: Real> {
    modes: usize,
    matrix: DMatrix<T>,
}

impl<T: Real> SymplecticForm<T> {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }
}

/// Builds Ω for `k` modes.
pub fn symplectic_form<T: Real>(k: usize) -> Result<SymplecticForm<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("symplectic form needs at least one mode".into()));
    }
    Ok(SymplecticForm {
        modes: k,
        matrix: omega_matrix(k),
    })
}

pub(crate) fn omega_matrix<T: Real>(k: usize) -> DMatrix<T> {
    let mut m = DMatrix::<T>::zeros(2 * k, 2 * k);
    for i in 0..k {
        m[(i, i + k)] = T::one();
        m[(i + k, i)] = -T::one();
    }
    m
}

/// Symmetric `2K×2K` covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T: Real> {
    matrix: DMatrix<T>,
}

impl<T: Real> CovarianceMatrix<T> {
    /// Wraps `matrix` after checking that it is square, even-sized and
    /// symmetric to storage precision. The stored matrix is re-symmetrized.
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.ncols(),
            });
        }
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "covariance matrix must have even positive size, got {n}"
            )));
        }
        let skew = asymmetry(&matrix);
        if skew > symmetry_tol(&matrix) {
            return Err(Error::NotSymmetric(to_f64(skew)));
        }
        Ok(Self {
            matrix: symmetrize(&matrix),
        })
    }

    pub fn vacuum(k: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * k, 2 * k),
        }
    }

    /// Single-mode thermal state `diag(ν, ν)`.
    pub fn thermal(nu: T) -> Self {
        Self {
            matrix: DMatrix::from_diagonal_element(2, 2, nu),
        }
    }

    /// Single-mode squeezed vacuum `diag(e^{2r}, e^{-2r})`.
    pub fn squeezed(r: T) -> Self {
        let two = lit::<T>(2.0);
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = (two * r).exp();
        m[(1, 1)] = (-two * r).exp();
        Self { matrix: m }
    }

    /// Block-diagonal combination of single-mode states, keeping qq…pp order.
    pub fn direct_sum(parts: &[CovarianceMatrix<T>]) -> Self {
        let k: usize = parts.iter().map(|p| p.modes()).sum();
        let mut m = DMatrix::zeros(2 * k, 2 * k);
        let mut offset = 0;
        for part in parts {
            let kp = part.modes();
            for i in 0..kp {
                for j in 0..kp {
                    m[(offset + i, offset + j)] = part.matrix[(i, j)];
                    m[(offset + i, k + offset + j)] = part.matrix[(i, kp + j)];
                    m[(k + offset + i, offset + j)] = part.matrix[(kp + i, j)];
                    m[(k + offset + i, k + offset + j)] = part.matrix[(kp + i, kp + j)];
                }
            }
            offset += kp;
        }
        Self { matrix: m }
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn det(&self) -> T {
        self.matrix.determinant()
    }

    /// Ratio of largest to smallest eigenvalue.
    pub fn condition_number(&self) -> T {
        let ev = SymmetricEigen::new(self.matrix.clone()).eigenvalues;
        let hi = ev.iter().copied().fold(T::zero(), |a, b| a.max(b.abs()));
        let lo = ev.iter().copied().fold(hi, |a, b| a.min(b.abs()));
        hi / lo
    }

    /// Errors unless every symplectic eigenvalue is at least `1 - PHYSICAL_TOL`.
    pub fn check_physical(&self) -> Result<()> {
        self.check_physical_within(lit(PHYSICAL_TOL))
    }

    /// As [`check_physical`](Self::check_physical) with an explicit slack.
    pub fn check_physical_within(&self, tol: T) -> Result<()> {
        let nus = symplectic_eigenvalues(self)?;
        let min = nus.last().copied().unwrap_or(T::one());
        if min < T::one() - tol {
            return Err(Error::Unphysical(format!(
                "smallest symplectic eigenvalue {} below 1",
                to_f64(min)
            )));
        }
        Ok(())
    }
}

/// Real `2K×2K` matrix meant to preserve Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix<T: Real> {
    matrix: DMatrix<T>,
}

impl<T: Real> SymplecticMatrix<T> {
    /// Wraps a square, even-sized matrix. Symplecticity is measured, not
    /// enforced; see [`SymplecticMatrix::drift`].
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.ncols(),
            });
        }
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "symplectic matrix must have even positive size, got {n}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * k, 2 * k),
        }
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    /// `‖SΩSᵀ − Ω‖∞` as the largest absolute entry.
    pub fn drift(&self) -> T {
        let omega = omega_matrix::<T>(self.modes());
        max_abs(&(&self.matrix * &omega * self.matrix.transpose() - omega))
    }

    pub fn compose(&self, later: &SymplecticMatrix<T>) -> Result<Self> {
        if later.modes() != self.modes() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                found: later.matrix.nrows(),
            });
        }
        Ok(Self {
            matrix: &later.matrix * &self.matrix,
        })
    }
}

/// Symplectic eigenvalues of `σ`, sorted descending.
///
/// With `σ = LLᵀ` the spectrum of `iΩσ` equals that of the Hermitian matrix
/// `i LᵀΩL`, which comes in `±ν` pairs. A failed Cholesky factorisation
/// means `σ` is not positive definite and hence not a physical state.
pub fn symplectic_eigenvalues<T: Real>(sigma: &CovarianceMatrix<T>) -> Result<Vec<T>> {
    let k = sigma.modes();
    if k == 1 {
        let m = sigma.matrix();
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        if det <= T::zero() || m[(0, 0)] <= T::zero() {
            return Err(Error::Unphysical(format!(
                "single-mode covariance with determinant {}",
                to_f64(det)
            )));
        }
        return Ok(vec![det.sqrt()]);
    }
    let chol = Cholesky::new(sigma.matrix().clone())
        .ok_or_else(|| Error::Unphysical("covariance matrix is not positive definite".into()))?;
    let l = chol.l();
    let a = l.transpose() * omega_matrix::<T>(k) * &l;
    let herm = a.map(|x| Cplx::new(T::zero(), x));
    let mut ev: Vec<T> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let n = ev.len();
    let tol = lit::<T>(PAIRING_TOL).max(T::default_epsilon() * lit::<T>(100.0));
    let mut nus = Vec::with_capacity(k);
    for i in 0..k {
        let lo = ev[i];
        let hi = ev[n - 1 - i];
        let scale = hi.abs().max(lo.abs()).max(T::one());
        if (lo + hi).abs() > tol * scale {
            return Err(Error::Unphysical(format!(
                "symplectic spectrum does not pair: {} vs {}",
                to_f64(lo),
                to_f64(hi)
            )));
        }
        nus.push((hi - lo) * lit::<T>(0.5));
    }
    Ok(nus)
}

/// `1 / ∏ ν_k`.
pub fn purity<T: Real>(sigma: &CovarianceMatrix<T>) -> Result<T> {
    let prod = symplectic_eigenvalues(sigma)?
        .into_iter()
        .fold(T::one(), |acc, nu| acc * nu);
    if prod < T::one() - lit::<T>(PHYSICAL_TOL) {
        return Err(Error::Unphysical(format!(
            "determinant {} below 1",
            to_f64(prod * prod)
        )));
    }
    Ok(T::one() / prod)
}

fn single_mode<T: Real>(sigma: &CovarianceMatrix<T>) -> Result<(T, T, T)> {
    if sigma.modes() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: sigma.matrix().nrows(),
        });
    }
    let m = sigma.matrix();
    Ok((m[(0, 0)], m[(0, 1)], m[(1, 1)]))
}

/// `det σ − 1` for a single mode, free of the cancellation in `ad − b² − 1`
/// when `σ` is close to the identity.
fn det_minus_one_t<T: Real>(a: T, b: T, d: T) -> T {
    let (da, dd) = (a - T::one(), d - T::one());
    da + dd + da * dd - b * b
}

/// `p₀ = 2 / √(det σ + Tr σ + 1)` for a single-mode state.
pub fn ground_probability<T: Real>(sigma: &CovarianceMatrix<T>) -> Result<T> {
    let (a, b, d) = single_mode(sigma)?;
    let x = a * d - b * b + a + d + T::one();
    if x <= T::zero() {
        return Err(Error::Unphysical("ground probability argument is not positive".into()));
    }
    Ok(lit::<T>(2.0) / x.sqrt())
}

/// `1 − p₀`, evaluated without subtracting two numbers close to 1.
pub fn excitation_probability<T: Real>(sigma: &CovarianceMatrix<T>) -> Result<T> {
    let (a, b, d) = single_mode(sigma)?;
    let two = lit::<T>(2.0);
    let x_minus_4 = det_minus_one_t(a, b, d) + (a + d - two);
    let x = x_minus_4 + lit::<T>(4.0);
    if x <= T::zero() {
        return Err(Error::Unphysical("ground probability argument is not positive".into()));
    }
    let sx = x.sqrt();
    Ok(x_minus_4 / (sx * (sx + two)))
}

/// `ν − 1` for a single-mode state, accurate when `σ ≈ I`.
pub fn nu_minus_one<T: Real>(sigma: &CovarianceMatrix<T>) -> Result<T> {
    let (a, b, d) = single_mode(sigma)?;
    let dm1 = det_minus_one_t(a, b, d);
    let nu = (dm1 + T::one()).max(T::zero()).sqrt();
    Ok(dm1 / (nu + T::one()))
}

/// Thermal occupation `p_n = (2/(ν+1)) ((ν−1)/(ν+1))ⁿ` for `n = 0..=n_max`.
pub fn thermal_spectrum<T: Real>(nu: T, n_max: usize) -> Result<Vec<T>> {
    if nu < T::one() {
        return Err(Error::InvalidArgument(format!(
            "thermal spectrum needs nu >= 1, got {}",
            to_f64(nu)
        )));
    }
    let p0 = lit::<T>(2.0) / (nu + T::one());
    let ratio = (nu - T::one()) / (nu + T::one());
    let mut out = Vec::with_capacity(n_max + 1);
    let mut p = p0;
    for _ in 0..=n_max {
        out.push(p);
        p *= ratio;
    }
    Ok(out)
}

/// `T = gap / ln(1 + 2/(ν−1))`; zero for `ν ≤ 1`.
pub fn temperature<T: Real>(nu: T, gap: T) -> T {
    temperature_from_excess(nu - T::one(), gap)
}

/// [`temperature`] taking `ν − 1` directly, for states very close to pure.
pub fn temperature_from_excess<T: Real>(nu_minus_one: T, gap: T) -> T {
    if nu_minus_one <= T::zero() {
        return T::zero();
    }
    gap / (lit::<T>(2.0) / nu_minus_one).ln_1p()
}

/// Distance of a single-mode state from the thermal state with the same
/// symplectic eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalityGap<T: Real> {
    pub nu: T,
    pub delta_p0: T,
    pub p1_therm: T,
}

/// `|p₀(σ) − 2/(ν+1)|` together with the thermal first-level occupation.
///
/// Uses `D − D_th = Tr σ − 2ν = ((σ₁₁−σ₂₂)² + 4σ₁₂²) / (Tr σ + 2ν)` so a
/// nearly thermal state does not lose its gap to rounding.
pub fn thermality_gap<T: Real>(sigma: &CovarianceMatrix<T>) -> Result<ThermalityGap<T>> {
    let (a, b, d) = single_mode(sigma)?;
    let two = lit::<T>(2.0);
    let nm1 = nu_minus_one(sigma)?;
    let nu = T::one() + nm1;
    let tr = a + d;
    let det = a * d - b * b;
    let big = det + tr + T::one();
    if big <= T::zero() {
        return Err(Error::Unphysical("ground probability argument is not positive".into()));
    }
    let thermal = (nu + T::one()) * (nu + T::one());
    let diff = ((a - d) * (a - d) + lit::<T>(4.0) * b * b) / (tr + two * nu);
    let (sb, st) = (big.sqrt(), thermal.sqrt());
    let delta_p0 = two * diff / (sb * st * (sb + st));
    let p1_therm = two / (nu + T::one()) * nm1 / (nu + T::one());
    Ok(ThermalityGap {
        nu,
        delta_p0,
        p1_therm,
    })
}

/// `E_N = max(0, −log ν₋)` of a two-mode state, natural logarithm.
pub fn log_negativity<T: Real>(sigma: &CovarianceMatrix<T>) -> Result<T> {
    log_negativity_with_base(sigma, lit::<T>(LOG_NEGATIVITY_BASE))
}

/// [`log_negativity`] with an explicit logarithm base.
pub fn log_negativity_with_base<T: Real>(sigma: &CovarianceMatrix<T>, base: T) -> Result<T> {
    if sigma.modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: sigma.matrix().nrows(),
        });
    }
    let m = sigma.matrix();
    // product states are separable; skip the round-off in the local determinants
    if [(0, 1), (0, 3), (2, 1), (2, 3)].iter().all(|&(i, j)| m[(i, j)] == T::zero()) {
        return Ok(T::zero());
    }
    // qq…pp: mode i has q at i, p at 2 + i
    let block_det = |i: usize, j: usize| {
        m[(i, j)] * m[(2 + i, 2 + j)] - m[(i, 2 + j)] * m[(2 + i, j)]
    };
    let tilde = block_det(0, 0) + block_det(1, 1) - lit::<T>(2.0) * block_det(0, 1);
    let det = m.determinant();
    let disc = tilde * tilde - lit::<T>(4.0) * det;
    let tol = lit::<T>(PHYSICAL_TOL) * tilde.abs().max(T::one()).powi(2);
    if disc < -tol {
        return Err(Error::Unphysical(format!(
            "negative discriminant {} in partial-transpose spectrum",
            to_f64(disc)
        )));
    }
    let nu_sq = (tilde - disc.max(T::zero()).sqrt()) * lit::<T>(0.5);
    if nu_sq <= T::zero() {
        return Err(Error::Unphysical("partially transposed eigenvalue is not positive".into()));
    }
    let nu = nu_sq.sqrt();
    if nu >= T::one() {
        return Ok(T::zero());
    }
    Ok(-nu.ln() / base.ln())
}

/// Keeps the rows and columns of the listed modes, in the order given.
pub fn reduce_state<T: Real>(sigma: &CovarianceMatrix<T>, modes: &[usize]) -> Result<CovarianceMatrix<T>> {
    let k = sigma.modes();
    if modes.is_empty() {
        return Err(Error::InvalidArgument("reduce_state needs at least one mode".into()));
    }
    for (pos, &i) in modes.iter().enumerate() {
        if i >= k {
            return Err(Error::InvalidArgument(format!("mode index {i} out of range for {k} modes")));
        }
        if modes[..pos].contains(&i) {
            return Err(Error::InvalidArgument(format!("mode index {i} repeated")));
        }
    }
    let r = modes.len();
    let idx: Vec<usize> = modes.iter().copied().chain(modes.iter().map(|&i| i + k)).collect();
    let m = sigma.matrix();
    let out = DMatrix::from_fn(2 * r, 2 * r, |i, j| m[(idx[i], idx[j])]);
    Ok(CovarianceMatrix { matrix: out })
}

/// `S σ₀ Sᵀ`, re-symmetrized.
pub fn evolve_covariance<T: Real>(
    s: &SymplecticMatrix<T>,
    sigma0: &CovarianceMatrix<T>,
) -> Result<CovarianceMatrix<T>> {
    if s.modes() != sigma0.modes() {
        return Err(Error::DimensionMismatch {
            expected: s.matrix().nrows(),
            found: sigma0.matrix().nrows(),
        });
    }
    let out = s.matrix() * sigma0.matrix() * s.matrix().transpose();
    Ok(CovarianceMatrix {
        matrix: symmetrize(&out),
    })
}
