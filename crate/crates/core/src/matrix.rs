//! Dense row-major complex square matrices.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A dense `dim × dim` complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries. Rejects non-square input and
    /// non-finite entries.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(data.len(), dim * dim));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * dim + i] = Complex64::new(v, 0.0);
        }
        m
    }

    /// `|v⟩⟨v|` for a column vector `v`.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = v[i] * v[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut m = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut m = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.data[j * d + i] = self.data[i * d + j];
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let d = self.dim;
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.data[i * d + k] * other.data[k * d + i];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |A − A†|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            let row = &self.data[i * d..(i + 1) * d];
            let out_row = &mut out.data[i * d..(i + 1) * d];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * d..(k + 1) * d];
                for (o, &b) in out_row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · other · self†`.
    pub fn conjugate_by(&self, other: &Self) -> Self {
        self.matmul(other).matmul(&self.adjoint())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut out = Self::zeros(d);
        for i in 0..da {
            for j in 0..da {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        out.data[(i * db + k) * d + (j * db + l)] = a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    /// Column-stacking vectorization: entry `(i, j)` lands at `j·d + i`.
    pub fn vectorize(&self) -> Vec<Complex64> {
        let d = self.dim;
        let mut v = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                v[j * d + i] = self.get(i, j);
            }
        }
        v
    }

    /// Inverse of [`vectorize`](Self::vectorize).
    pub fn unvectorize(dim: usize, v: &[Complex64]) -> Self {
        debug_assert_eq!(v.len(), dim * dim);
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = v[j * dim + i];
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                self.data[i * d..(i + 1) * d]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Matrix exponential by scaling and squaring with a Taylor series
    /// truncated once terms fall below machine precision.
    pub fn expm(&self) -> Self {
        let d = self.dim;
        let norm1 = (0..d)
            .map(|j| (0..d).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut squarings = 0u32;
        if norm1 > 0.5 {
            squarings = (norm1 / 0.5).log2().ceil() as u32;
        }
        let scaled = self.scale_real(0.5f64.powi(squarings as i32));
        let mut result = Self::identity(d);
        let mut term = Self::identity(d);
        for k in 1..=40 {
            term = term.matmul(&scaled).scale_real(1.0 / k as f64);
            result = &result + &term;
            if term.max_abs() < 1e-18 * result.max_abs().max(1.0) {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Single-qubit Pauli matrices `[I, X, Y, Z]`.
pub fn paulis() -> [ComplexMatrix; 4] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::from_row_major(2, vec![ZERO, ONE, ONE, ZERO]).unwrap(),
        ComplexMatrix::from_row_major(2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap(),
        ComplexMatrix::from_row_major(2, vec![ONE, ZERO, ZERO, c(-1.0, 0.0)]).unwrap(),
    ]
}
