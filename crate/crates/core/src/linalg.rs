// SPDX-License-Identifier: Apache-2.0

//! Small dense linear-algebra helpers shared by the state, evolver and oracle
//! modules: Hermitian matrix functions, Takagi factorisation and plain-text
//! matrix serialisation.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::{lit, to_f64, Cplx, Error, Real, Result};

/// Largest absolute entry.
pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs_c<T: Real>(m: &DMatrix<Cplx<T>>) -> T {
    m.iter().fold(T::zero(), |acc, x| acc.max(x.modulus()))
}

/// Largest `|m_ij - m_ji|`.
pub fn asymmetry<T: Real>(m: &DMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// `(m + mᵀ) / 2`.
pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = lit::<T>(0.5);
    (m + m.transpose()) * half
}

pub fn to_complex<T: Real>(m: &DMatrix<T>) -> DMatrix<Cplx<T>> {
    m.map(|x| Cplx::new(x, T::zero()))
}

pub fn real_part<T: Real>(m: &DMatrix<Cplx<T>>) -> DMatrix<T> {
    m.map(|z| z.re)
}

pub fn imag_part<T: Real>(m: &DMatrix<Cplx<T>>) -> DMatrix<T> {
    m.map(|z| z.im)
}

pub fn conj<T: Real>(m: &DMatrix<Cplx<T>>) -> DMatrix<Cplx<T>> {
    m.map(|z| z.conj())
}

/// Applies a scalar function to a Hermitian matrix through its
/// eigendecomposition `h = U diag(λ) Uᴴ`.
pub fn hermitian_fn<T: Real, F>(h: &DMatrix<Cplx<T>>, f: F) -> DMatrix<Cplx<T>>
where
    F: Fn(T) -> Cplx<T>,
{
    let eig = SymmetricEigen::new(h.clone());
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let fk = f(*lambda);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= fk);
    }
    scaled * u.adjoint()
}

/// Takagi factorisation `a = V diag(t) Vᵀ` of a complex symmetric matrix with
/// unitary `V` and `t ≥ 0` sorted descending.
#[derive(Debug, Clone)]
pub struct Takagi<T: Real> {
    pub unitary: DMatrix<Cplx<T>>,
    pub values: DVector<T>,
}

impl<T: Real> Takagi<T> {
    pub fn reconstruct(&self) -> DMatrix<Cplx<T>> {
        let mut scaled = self.unitary.clone();
        for (k, t) in self.values.iter().enumerate() {
            let tk = Cplx::new(*t, T::zero());
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= tk);
        }
        scaled * self.unitary.transpose()
    }
}

/// Takagi factorisation through the real symmetric embedding
/// `M = [[Re a, Im a], [Im a, -Re a]]`.
///
/// `M` has eigenvalues `±t_k`; an eigenvector `[x; y]` for `+t_k` yields the
/// Takagi vector `x + i y`, and `J[x; y] = [-y; x]` spans the `-t_k` partner.
/// Null singular values are completed by a Gram-Schmidt pass that keeps the
/// chosen vectors orthogonal to their `J` images.
pub fn takagi<T: Real>(a: &DMatrix<Cplx<T>>) -> Result<Takagi<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    let scale = max_abs_c(a).max(T::one());
    let sym_residual = max_abs_c(&(a - a.transpose()));
    if sym_residual > lit::<T>(1e-9) * scale {
        return Err(Error::Factorisation(format!(
            "Takagi input is not symmetric (residual {:e})",
            to_f64(sym_residual)
        )));
    }

    let mut embed = DMatrix::<T>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[(i, j)];
            embed[(i, j)] = z.re;
            embed[(i, j + n)] = z.im;
            embed[(i + n, j)] = z.im;
            embed[(i + n, j + n)] = -z.re;
        }
    }
    let eig = SymmetricEigen::new(embed.clone());
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&p, &q| {
        eig.eigenvalues[q]
            .partial_cmp(&eig.eigenvalues[p])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut chosen: Vec<DVector<T>> = Vec::with_capacity(n);
    let accept = lit::<T>(0.5);
    for &k in &order {
        if chosen.len() == n {
            break;
        }
        let mut v: DVector<T> = eig.eigenvectors.column(k).into_owned();
        for u in &chosen {
            let ju = rotate_j(u, n);
            let pu = u.dot(&v);
            v.axpy(-pu, u, T::one());
            let pj = ju.dot(&v);
            v.axpy(-pj, &ju, T::one());
        }
        let norm = v.norm();
        if norm > accept {
            chosen.push(v / norm);
        }
    }
    if chosen.len() != n {
        return Err(Error::Factorisation(format!(
            "Takagi completion produced {} of {} vectors",
            chosen.len(),
            n
        )));
    }

    let mut unitary = DMatrix::<Cplx<T>>::zeros(n, n);
    let mut values = DVector::<T>::zeros(n);
    for (k, v) in chosen.iter().enumerate() {
        let rayleigh = v.dot(&(&embed * v));
        values[k] = rayleigh.max(T::zero());
        for i in 0..n {
            unitary[(i, k)] = Cplx::new(v[i], v[i + n]);
        }
    }

    let out = Takagi { unitary, values };
    let residual = max_abs_c(&(out.reconstruct() - a));
    if residual > lit::<T>(1e-9) * scale {
        return Err(Error::Factorisation(format!(
            "Takagi residual {:e} above tolerance",
            to_f64(residual)
        )));
    }
    Ok(out)
}

fn rotate_j<T: Real>(v: &DVector<T>, n: usize) -> DVector<T> {
    let mut out = DVector::<T>::zeros(2 * n);
    for i in 0..n {
        out[i] = -v[i + n];
        out[i + n] = v[i];
    }
    out
}

/// Writes a matrix as row-major decimal text, one row per line, entries
/// separated by single spaces with 17 significant digits.
pub fn matrix_to_text<T: Real>(m: &DMatrix<T>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.16e}", to_f64(m[(i, j)])))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses the format produced by [`matrix_to_text`]. Blank lines and lines
/// starting with `#` are skipped.
pub fn matrix_from_text<T: Real>(text: &str) -> Result<DMatrix<T>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad matrix entry {tok:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            expected: ncols,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| lit::<T>(rows[i][j])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<Cplx<f64>> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| {
            Cplx::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&m + m.transpose()) * Cplx::new(0.5, 0.0)
    }

    #[test]
    fn takagi_reconstructs_random_symmetric() {
        for seed in 0..10 {
            let a = random_symmetric(5, seed);
            let t = takagi(&a).unwrap();
            assert!(max_abs_c(&(t.reconstruct() - &a)) < 1e-10);
            let id = DMatrix::<Cplx<f64>>::identity(5, 5);
            assert!(max_abs_c(&(t.unitary.adjoint() * &t.unitary - id)) < 1e-10);
            assert!(t.values.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn takagi_of_zero_and_rank_deficient() {
        let zero = DMatrix::<Cplx<f64>>::zeros(3, 3);
        let t = takagi(&zero).unwrap();
        assert!(t.values.iter().all(|&v| v == 0.0));
        let id = DMatrix::<Cplx<f64>>::identity(3, 3);
        assert!(max_abs_c(&(t.unitary.adjoint() * &t.unitary - &id)) < 1e-12);

        // rank one: a = u uᵀ
        let u = DVector::from_vec(vec![
            Cplx::new(0.3, 0.1),
            Cplx::new(-0.2, 0.4),
            Cplx::new(0.0, 0.25),
        ]);
        let a = &u * u.transpose();
        let t = takagi(&a).unwrap();
        assert!(max_abs_c(&(t.reconstruct() - &a)) < 1e-12);
        assert!(max_abs_c(&(t.unitary.adjoint() * &t.unitary - &id)) < 1e-10);
    }

    #[test]
    fn takagi_rejects_non_symmetric() {
        let mut a = DMatrix::<Cplx<f64>>::zeros(2, 2);
        a[(0, 1)] = Cplx::new(1.0, 0.0);
        assert!(takagi(&a).is_err());
    }

    #[test]
    fn hermitian_fn_identity_and_exp() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                Cplx::new(1.0, 0.0),
                Cplx::new(0.0, 0.5),
                Cplx::new(0.0, -0.5),
                Cplx::new(-1.0, 0.0),
            ],
        );
        let same = hermitian_fn(&h, |x| Cplx::new(x, 0.0));
        assert!(max_abs_c(&(same - &h)) < 1e-14);
        let e = hermitian_fn(&h, |x| Cplx::new(x.exp(), 0.0));
        assert!(max_abs_c(&(e - h.exp())) < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -2.5, 1e-17, 3.0, 0.1, std::f64::consts::PI]);
        let back: DMatrix<f64> = matrix_from_text(&matrix_to_text(&m)).unwrap();
        assert_eq!(m, back);
        assert!(matrix_from_text::<f64>("1 2\n3\n").is_err());
    }
}
