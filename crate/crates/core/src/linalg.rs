//! Small dense complex matrices, relay correlation matrices and their
//! Hermitian eigendecomposition (cyclic Jacobi).

use std::collections::BTreeMap;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues above this (negative) value are clamped to zero.
pub const PSD_TOLERANCE: f64 = 1e-10;

const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Diagonal matrix with real entries.
    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    s += self[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.try_mul(rhs).expect("matrix dimensions must agree")
    }
}

/// Relay antenna correlation matrix Σ: Hermitian, unit diagonal, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: CMatrix,
}

impl CorrelationMatrix {
    /// Builds Σ from full rows, checking Hermitian symmetry, unit diagonal
    /// and positive semidefiniteness.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("matrix must be square".into()));
        }
        let entries = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
        for i in 0..n {
            if (entries[(i, i)] - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(Error::InvalidMatrix(format!("diagonal entry {} is not 1", i + 1)));
            }
            for j in 0..i {
                if entries[(i, j)] != entries[(j, i)].conj() {
                    return Err(Error::InvalidMatrix(format!(
                        "entries ({}, {}) and ({}, {}) are not conjugate",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
                let magnitude = entries[(i, j)].norm();
                if magnitude > 1.0 {
                    return Err(Error::InvalidCoefficient { i: j, j: i, magnitude });
                }
            }
        }
        let m = Self { entries };
        eig_hermitian(&m)?;
        Ok(m)
    }

    /// Fully correlated relay, Σ = 1·1ᵀ.
    pub fn full(n_r: usize) -> Self {
        Self {
            entries: CMatrix::from_fn(n_r, n_r, |_, _| Complex64::new(1.0, 0.0)),
        }
    }

    /// Uncorrelated relay, Σ = I.
    pub fn identity(n_r: usize) -> Self {
        Self {
            entries: CMatrix::identity(n_r),
        }
    }

    pub fn n_r(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }
}

/// Builds Σ from pairwise coefficients ρ_ij (0-based, `i < j`). Missing
/// pairs are zero; the lower triangle is filled with conjugates.
pub fn build_correlation(n_r: usize, rho: &BTreeMap<(usize, usize), Complex64>) -> Result<CorrelationMatrix> {
    if n_r == 0 {
        return Err(Error::InvalidMatrix("n_R must be positive".into()));
    }
    let mut m = CMatrix::identity(n_r);
    for (&(i, j), &r) in rho {
        if i >= j || j >= n_r {
            return Err(Error::InvalidMatrix(format!(
                "pair ({}, {}) is not an upper-triangular index of a {n_r}x{n_r} matrix",
                i + 1,
                j + 1
            )));
        }
        let magnitude = r.norm();
        if magnitude > 1.0 {
            return Err(Error::InvalidCoefficient { i, j, magnitude });
        }
        m[(i, j)] = r;
        m[(j, i)] = r.conj();
    }
    let sigma = CorrelationMatrix { entries: m };
    eig_hermitian(&sigma)?;
    Ok(sigma)
}

/// Convenience wrapper for real coefficients given as `(i, j, ρ)`.
pub fn build_real_correlation(n_r: usize, pairs: &[(usize, usize, f64)]) -> Result<CorrelationMatrix> {
    let rho = pairs
        .iter()
        .map(|&(i, j, r)| ((i, j), Complex64::new(r, 0.0)))
        .collect();
    build_correlation(n_r, &rho)
}

/// Eigenvalues (descending, ≥ 0) and a unitary eigenbasis of Σ.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpectrum {
    lambdas: Vec<f64>,
    basis: CMatrix,
}

impl CorrelationSpectrum {
    /// Spectrum given directly by its eigenvalues, with the standard basis.
    pub fn from_eigenvalues(lambdas: &[f64]) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(&bad) = lambdas.iter().find(|&&l| !(l >= 0.0 && l.is_finite())) {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: bad });
        }
        if lambdas.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidMatrix(
                "eigenvalues must be sorted in descending order".into(),
            ));
        }
        Ok(Self {
            lambdas: lambdas.to_vec(),
            basis: CMatrix::identity(lambdas.len()),
        })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Columns are the eigenvectors, in the order of [`Self::lambdas`].
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn n_r(&self) -> usize {
        self.lambdas.len()
    }

    /// `U diag(f(λ)) Uᴴ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d: Vec<f64> = self.lambdas.iter().map(|&l| f(l)).collect();
        let ud = &self.basis * &CMatrix::diagonal(&d);
        &ud * &self.basis.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|l| l)
    }

    /// Σ^{1/2}.
    pub fn sqrt(&self) -> CMatrix {
        self.reconstruct_with(f64::sqrt)
    }
}

/// Cyclic complex Jacobi diagonalization.
pub fn eig_hermitian(m: &CorrelationMatrix) -> Result<CorrelationSpectrum> {
    let (lambdas, basis) = jacobi_hermitian(m.entries())?;
    Ok(CorrelationSpectrum { lambdas, basis })
}

pub(crate) fn jacobi_hermitian(input: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    assert!(input.is_square());
    let n = input.rows();
    let mut a = input.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    let mut sweeps = 0;
    loop {
        let off = a.off_diagonal_norm();
        if off < OFF_DIAGONAL_TOLERANCE * scale {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::ConvergenceFailure { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOLERANCE {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
    }
    let lambdas = order.iter().map(|&i| diag[i].max(0.0)).collect();
    let basis = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((lambdas, basis))
}

/// One Jacobi rotation zeroing `a[p][q]`: `G = D·R` with the phase
/// `D = diag(1, e^{-iφ})` making the pivot real and `R` the real rotation.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let phase = apq / b;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * b);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G columns: col p = (c, -s·conj(phase)) at rows (p, q); col q = (s, c·conj(phase)).
    let gpp = Complex64::new(c, 0.0);
    let gpq = Complex64::new(s, 0.0);
    let gqp = -s * phase.conj();
    let gqq = c * phase.conj();

    let n = a.rows();
    // A ← A·G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * gpp + akq * gqp;
        a[(k, q)] = akp * gpq + akq * gqq;
    }
    // A ← Gᴴ·A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    // V ← V·G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * gpp + vkq * gqp;
        v[(k, q)] = vkp * gpq + vkq * gqq;
    }
}

/// Number of usable eigenmodes: `min(n_R, #{λ_j > 1e-10·λ_1})`.
pub fn kappa(s: &CorrelationSpectrum, n_r: usize) -> usize {
    kappa_of(s.lambdas(), n_r)
}

pub(crate) fn kappa_of(lambdas: &[f64], n_r: usize) -> usize {
    let Some(&first) = lambdas.first() else {
        return 0;
    };
    let threshold = 1e-10 * first;
    lambdas.iter().filter(|&&l| l > threshold).count().min(n_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zero_rho_gives_identity() {
        let s = build_real_correlation(2, &[(0, 1, 0.0)]).unwrap();
        assert_eq!(s.entries(), &CMatrix::identity(2));
    }

    #[test]
    fn two_by_two_rho() {
        let s = build_real_correlation(2, &[(0, 1, 0.3)]).unwrap();
        assert_eq!(s.get(0, 1), c(0.3));
        assert_eq!(s.get(1, 0), c(0.3));
        let spec = eig_hermitian(&s).unwrap();
        assert!((spec.lambdas()[0] - 1.3).abs() < 1e-14);
        assert!((spec.lambdas()[1] - 0.7).abs() < 1e-14);
    }

    #[test]
    fn coefficient_out_of_range() {
        let err = build_real_correlation(2, &[(0, 1, 1.2)]).unwrap_err();
        assert!(matches!(err, Error::InvalidCoefficient { .. }));
    }

    #[test]
    fn indefinite_matrix_rejected() {
        // ρ12 = ρ23 = 0.9, ρ13 = -0.9 is not a valid correlation structure
        let err = build_real_correlation(3, &[(0, 1, 0.9), (1, 2, 0.9), (0, 2, -0.9)]).unwrap_err();
        assert!(matches!(err, Error::NotPositiveSemidefinite { .. }));
    }

    #[test]
    fn full_correlation_spectrum() {
        let spec = eig_hermitian(&CorrelationMatrix::full(2)).unwrap();
        assert!((spec.lambdas()[0] - 2.0).abs() < 1e-14);
        assert!(spec.lambdas()[1].abs() < 1e-14);
        assert_eq!(kappa(&spec, 2), 1);
    }

    #[test]
    fn identity_spectrum() {
        let spec = eig_hermitian(&CorrelationMatrix::identity(3)).unwrap();
        assert_eq!(spec.lambdas(), &[1.0, 1.0, 1.0]);
        assert!(spec.reconstruct().max_abs_diff(&CMatrix::identity(3)) < 1e-14);
        assert_eq!(kappa(&spec, 3), 3);
    }

    #[test]
    fn kappa_counts_nonzero_modes() {
        assert_eq!(kappa_of(&[4.0, 1.0], 2), 2);
        assert_eq!(kappa_of(&[2.0, 1e-12], 2), 1);
        assert_eq!(kappa_of(&[1.0, 1.0, 1.0], 2), 2);
    }

    #[test]
    fn complex_coefficients() {
        let mut rho = BTreeMap::new();
        rho.insert((0, 1), Complex64::new(0.3, 0.4));
        rho.insert((1, 2), Complex64::new(0.0, -0.5));
        let s = build_correlation(3, &rho).unwrap();
        let spec = eig_hermitian(&s).unwrap();
        assert!(spec.reconstruct().max_abs_diff(s.entries()) < 1e-12);
        let u = spec.basis();
        assert!((&u.adjoint() * u).max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let s = build_real_correlation(3, &[(0, 1, 0.7), (1, 2, 0.5), (0, 2, 0.2)]).unwrap();
        let r = eig_hermitian(&s).unwrap().sqrt();
        assert!((&r * &r).max_abs_diff(s.entries()) < 1e-12);
    }

    #[test]
    fn from_rows_checks_structure() {
        let ok = CorrelationMatrix::from_rows(&[vec![c(1.0), c(0.3)], vec![c(0.3), c(1.0)]]);
        assert!(ok.is_ok());
        let asym = CorrelationMatrix::from_rows(&[vec![c(1.0), c(0.3)], vec![c(0.2), c(1.0)]]);
        assert!(matches!(asym, Err(Error::InvalidMatrix(_))));
        let diag = CorrelationMatrix::from_rows(&[vec![c(2.0), c(0.3)], vec![c(0.3), c(1.0)]]);
        assert!(matches!(diag, Err(Error::InvalidMatrix(_))));
    }

    /// A random valid correlation matrix: normalized Gram matrix of random
    /// complex vectors.
    fn gram_correlation(n: usize, entries: &[(f64, f64)]) -> BTreeMap<(usize, usize), Complex64> {
        let vecs: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                let v: Vec<Complex64> = (0..n)
                    .map(|k| Complex64::new(entries[i * n + k].0, entries[i * n + k].1))
                    .collect();
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                v.into_iter().map(|z| z / norm).collect()
            })
            .collect();
        let mut rho = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                let r: Complex64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b.conj()).sum();
                rho.insert((i, j), r);
            }
        }
        rho
    }

    fn random_rho() -> impl Strategy<Value = (usize, BTreeMap<(usize, usize), Complex64>)> {
        (1usize..=8).prop_flat_map(|n| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
                .prop_filter("nonzero vectors", move |e| {
                    (0..n).all(|i| e[i * n..(i + 1) * n].iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
                })
                .prop_map(move |e| (n, gram_correlation(n, &e)))
        })
    }

    proptest! {
        #[test]
        fn reconstruction_and_trace((n, rho) in random_rho()) {
            let s = build_correlation(n, &rho).unwrap();
            let spec = eig_hermitian(&s).unwrap();
            prop_assert!(spec.reconstruct().max_abs_diff(s.entries()) < 1e-8);
            let trace: f64 = spec.lambdas().iter().sum();
            prop_assert!((trace - n as f64).abs() < 1e-8);
            prop_assert!(spec.lambdas().windows(2).all(|w| w[0] >= w[1]));
            let u = spec.basis();
            prop_assert!((&u.adjoint() * u).max_abs_diff(&CMatrix::identity(n)) < 1e-10);
        }

        #[test]
        fn relabeling_preserves_spectrum((n, rho) in random_rho(), shift in 0usize..8) {
            let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            let s = build_correlation(n, &rho).unwrap();
            let mut permuted = BTreeMap::new();
            for i in 0..n {
                for j in i + 1..n {
                    let (a, b) = (perm[i], perm[j]);
                    let v = s.get(i, j);
                    if a < b { permuted.insert((a, b), v); } else { permuted.insert((b, a), v.conj()); }
                }
            }
            let t = build_correlation(n, &permuted).unwrap();
            let l1 = eig_hermitian(&s).unwrap();
            let l2 = eig_hermitian(&t).unwrap();
            for (a, b) in l1.lambdas().iter().zip(l2.lambdas()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
