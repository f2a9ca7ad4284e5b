//! Small dense complex matrices. Row-major; sized for a handful of qubits.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{Float, FloatConst};

use crate::scalar::Scalar;

/// Real scalars usable by the quantum layer.
pub trait Real: Float + FloatConst + Scalar {}

impl<T: Float + FloatConst + Scalar> Real for T {}

pub type CVec<T> = Vec<Complex<T>>;

#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Fails on ragged input.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_real(rows: &[&[T]]) -> Option<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| Complex::new(x, T::zero())).collect())
                .collect(),
        )
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    /// `|v⟩⟨v|`
    pub fn projector(v: &[Complex<T>]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
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

    pub fn to_rows(&self) -> Vec<Vec<Complex<T>>> {
        self.data.chunks(self.cols.max(1)).map(|c| c.to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Positive semidefinite within `tol`: a Cholesky factorization of
    /// `self + tol·I` exists. Assumes Hermitian input.
    pub fn is_psd(&self, tol: T) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let shifted = self.clone() + Self::identity(n).scale(Complex::new(tol, T::zero()));
        let mut l = Self::zeros(n, n);
        for k in 0..n {
            let mut d = shifted[(k, k)].re;
            for j in 0..k {
                d = d - l[(k, j)].norm_sqr();
            }
            if d.is_nan() || d <= T::zero() {
                return false;
            }
            let lkk = d.sqrt();
            l[(k, k)] = Complex::new(lkk, T::zero());
            for i in k + 1..n {
                let mut s = shifted[(i, k)];
                for j in 0..k {
                    s = s - l[(i, j)] * l[(k, j)].conj();
                }
                l[(i, k)] = s / lkk;
            }
        }
        true
    }
}

/// Kronecker product `a ⊗ b`; `a`'s index is the more significant one.
pub fn tensor<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let mut m = CMat::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    m[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    m
}

/// Kronecker product of a sequence; the empty product is the 1×1 identity.
pub fn tensor_all<'a, T: Real, I: IntoIterator<Item = &'a CMat<T>>>(factors: I) -> CMat<T> {
    factors.into_iter().fold(CMat::identity(1), |acc, f| tensor(&acc, f))
}

/// Kronecker product of vectors.
pub fn tensor_vec<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> CVec<T> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

impl<T> Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for CMat<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Real> Sub for CMat<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMat<T> {
    type Output = CMat<T>;
    fn mul(self, rhs: Self) -> CMat<T> {
        assert_eq!(self.cols, rhs.rows, "shape mismatch");
        let mut m = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..rhs.cols {
                    m[(i, j)] = m[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = CMat<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn identity_tensor_identity() {
        assert_eq!(tensor(&M::identity(2), &M::identity(2)), M::identity(4));
    }

    #[test]
    fn basis_projector_tensor_layout() {
        let p0 = M::diagonal(&[1.0, 0.0]);
        let p1 = M::diagonal(&[0.0, 1.0]);
        let t = tensor(&p0, &p1);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (1, 1) { 1.0 } else { 0.0 };
                assert_eq!(t[(i, j)], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn triple_tensor_dimension() {
        let t = tensor_all([&M::identity(2), &M::identity(3), &M::identity(2)]);
        assert_eq!((t.rows(), t.cols()), (12, 12));
    }

    #[test]
    fn mixed_product_property() {
        let a = M::from_rows(vec![vec![c(1.0, 0.5), c(0.0, 2.0)], vec![c(-1.0, 0.0), c(0.3, 0.0)]]).unwrap();
        let b = M::from_rows(vec![vec![c(0.0, 1.0), c(2.0, 0.0)], vec![c(1.0, 1.0), c(0.0, 0.0)]]).unwrap();
        let lhs = &tensor(&a, &b) * &tensor(&b, &a);
        let rhs = tensor(&(&a * &b), &(&b * &a));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn hermitian_and_psd_checks() {
        let h = M::from_rows(vec![vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(1.0, 0.0)]]).unwrap();
        assert!(h.is_hermitian(1e-12));
        assert!(h.is_psd(1e-9)); // eigenvalues 0 and 2
        let not_psd = M::diagonal(&[1.0, -1e-6]);
        assert!(!not_psd.is_psd(1e-9));
        assert!(M::diagonal(&[1.0, -1e-10]).is_psd(1e-9));
        let not_h = M::from_rows(vec![vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        assert!(!not_h.is_hermitian(1e-9));
        assert!(M::zeros(2, 2).is_psd(1e-9));
    }

    #[test]
    fn projector_trace_and_ragged_rows() {
        let v = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let p = M::projector(&v);
        assert!((p.trace() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((&p * &p).max_abs_diff(&p) < 1e-15);
        assert!(M::from_rows(vec![vec![c(1.0, 0.0)], vec![]]).is_none());
    }

    #[test]
    fn tensor_vec_matches_kron_of_projectors() {
        let a = vec![c(0.6, 0.0), c(0.8, 0.0)];
        let b = vec![c(0.0, 1.0), c(0.0, 0.0)];
        let lhs = M::projector(&tensor_vec(&a, &b));
        let rhs = tensor(&M::projector(&a), &M::projector(&b));
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    }
}
