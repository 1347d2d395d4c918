//! Hermitian operators with a cached spectral decomposition.
//!
//! The eigensolver is cyclic Jacobi for complex Hermitian matrices. Each
//! rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the real symmetric Jacobi rotation, so the
//! accumulated eigenvector matrix stays exactly unitary up to rounding.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ZERO};

/// Default relative eigenvalue threshold separating zero from positive.
pub const EPS_PD: f64 = 1e-10;

const DEFAULT_MAX_DIM: usize = 4096;
const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-14;

static MAX_DIM: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_DIM);

/// Current cap on operator dimension (default 4096, i.e. 12 qubits).
pub fn max_dim() -> usize {
    MAX_DIM.load(Ordering::Relaxed)
}

/// Overrides the dimension cap process-wide.
pub fn set_max_dim(cap: usize) {
    MAX_DIM.store(cap.max(1), Ordering::Relaxed);
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    let cap = max_dim();
    if d > cap {
        return Err(Error::Capacity { requested: d, cap });
    }
    Ok(())
}

/// Eigenvalues in descending order with the matching unitary whose columns
/// are the eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Spectrum {
    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositivityClass {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

impl PositivityClass {
    /// Classifies a descending spectrum at relative threshold `eps`.
    pub fn of_spectrum(values: &[f64], eps: f64) -> Self {
        let max = values[0];
        let min = *values.last().unwrap();
        if min > eps * max && max > 0.0 {
            PositivityClass::PositiveDefinite
        } else if min >= -eps * max.max(1.0) {
            PositivityClass::PositiveSemidefinite
        } else {
            PositivityClass::Indefinite
        }
    }
}

/// A dense Hermitian operator. The spectrum is computed on first use and
/// cached; the cache is write-once.
#[derive(Debug)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl Clone for HermitianOperator {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Self {
            matrix: self.matrix.clone(),
            spectrum,
        }
    }
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl HermitianOperator {
    /// Validates Hermiticity (`‖A − A†‖_max ≤ 1e−12·‖A‖_max`) and symmetrizes
    /// away the residual so downstream code sees an exactly Hermitian matrix.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_dim(matrix.dim())?;
        if matrix.dim() == 0 {
            return Err(Error::contract("operator dimension must be positive"));
        }
        let defect = matrix.hermiticity_defect();
        if defect > 1e-12 * matrix.max_abs().max(f64::MIN_POSITIVE) && defect > 0.0 {
            return Err(Error::NotHermitian { deviation: defect });
        }
        Ok(Self::from_matrix_unchecked(symmetrize(&matrix)))
    }

    /// Builds from a matrix known to be Hermitian up to rounding; the input
    /// is symmetrized.
    pub(crate) fn from_hermitian_part(matrix: &ComplexMatrix) -> Self {
        Self::from_matrix_unchecked(symmetrize(matrix))
    }

    fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self {
            matrix,
            spectrum: OnceLock::new(),
        }
    }

    /// `U diag(values) U†` with the spectrum cache pre-filled.
    pub fn from_spectrum(values: Vec<f64>, vectors: ComplexMatrix) -> Result<Self> {
        if values.len() != vectors.dim() {
            return Err(Error::DimensionMismatch(values.len(), vectors.dim()));
        }
        check_dim(values.len())?;
        let d = values.len();
        let mut m = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in i..d {
                let mut acc = ZERO;
                for (k, &lam) in values.iter().enumerate() {
                    acc += vectors.get(i, k) * vectors.get(j, k).conj() * lam;
                }
                m.set(i, j, acc);
                m.set(j, i, acc.conj());
            }
            let v = m.get(i, i).re;
            m.set(i, i, Complex64::new(v, 0.0));
        }
        let op = Self::from_matrix_unchecked(m);
        let _ = op.spectrum.set(sorted_spectrum(values, &vectors));
        Ok(op)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(diag))
    }

    pub fn identity(d: usize) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::identity(d))
    }

    pub fn zero(d: usize) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.matrix.get(i, j) == ZERO))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.get(i, i).re).collect()
    }

    /// Spectral decomposition, computed once and cached.
    pub fn eigh(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = jacobi_eigh(&self.matrix)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    pub fn classify(&self, eps: f64) -> Result<PositivityClass> {
        Ok(PositivityClass::of_spectrum(&self.eigh()?.values, eps))
    }

    /// Applies a real function to the spectrum: `U φ(Λ) U†`. No domain
    /// checks; see [`powf`](Self::powf) and [`ln`](Self::ln) for the checked
    /// variants.
    pub fn mat_fun<F: Fn(f64) -> f64>(&self, phi: F) -> Result<Self> {
        let s = self.eigh()?;
        let values: Vec<f64> = s.values.iter().map(|&x| phi(x)).collect();
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(
                "matrix function is not finite on the spectrum",
                s.values[bad],
            ));
        }
        Self::from_spectrum(values, s.vectors.clone())
    }

    /// Spectrum with eigenvalues in `(−ε·max(1, λ_max), ε·λ_max]` clamped to
    /// zero; fails if the operator is not PSD at threshold `ε`.
    pub fn psd_spectrum(&self, eps: f64) -> Result<Vec<f64>> {
        let s = self.eigh()?;
        let max = s.max();
        let min = s.min();
        if min < -eps * max.max(1.0) {
            return Err(Error::domain("operator is not positive semidefinite", min));
        }
        Ok(s.values
            .iter()
            .map(|&x| if x <= eps * max.max(0.0) { 0.0 } else { x })
            .collect())
    }

    /// Fails unless `λ_min > ε·λ_max`.
    pub fn require_pd(&self, eps: f64, what: &str) -> Result<()> {
        let s = self.eigh()?;
        if !(s.min() > eps * s.max() && s.max() > 0.0) {
            return Err(Error::domain(format!("{what}: operator is not positive definite"), s.min()));
        }
        Ok(())
    }

    /// Matrix power `f^p`. Negative powers require positive definiteness;
    /// non-integer or zero powers require positive semidefiniteness, and
    /// near-zero eigenvalues are clamped to zero first.
    pub fn powf(&self, p: f64) -> Result<Self> {
        if p == 1.0 {
            return Ok(self.clone());
        }
        let is_nonneg_int = p >= 0.0 && p.fract() == 0.0 && p > 0.0;
        if is_nonneg_int {
            return self.mat_fun(|x| x.powf(p));
        }
        if p < 0.0 {
            self.require_pd(EPS_PD, "negative matrix power")?;
            return self.mat_fun(|x| x.powf(p));
        }
        let vals = self.psd_spectrum(EPS_PD)?;
        let s = self.eigh()?;
        let values: Vec<f64> = vals
            .iter()
            .map(|&x| if x == 0.0 { if p == 0.0 { 1.0 } else { 0.0 } } else { x.powf(p) })
            .collect();
        Self::from_spectrum(values, s.vectors.clone())
    }

    /// Matrix logarithm; requires positive definiteness.
    pub fn ln(&self) -> Result<Self> {
        self.require_pd(EPS_PD, "matrix logarithm")?;
        self.mat_fun(f64::ln)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let d = self.dim().checked_mul(other.dim()).ok_or(Error::Capacity {
            requested: usize::MAX,
            cap: max_dim(),
        })?;
        check_dim(d)?;
        Ok(Self::from_matrix_unchecked(self.matrix.kron(&other.matrix)))
    }

    /// Normalized trace `τ(A) = tr A / d`.
    pub fn ntrace(&self) -> f64 {
        self.matrix.trace().re / self.dim() as f64
    }

    /// `⟨A, B⟩ = τ(A†B)`, real for Hermitian arguments.
    pub fn hs_inner(&self, other: &Self) -> Result<f64> {
        self.ntrace_product(other)
    }

    /// `τ(A·B)`.
    pub fn ntrace_product(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self.matrix.trace_product(&other.matrix).re / self.dim() as f64)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(Self::from_matrix_unchecked(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(Self::from_matrix_unchecked(&self.matrix - &other.matrix))
    }

    pub fn scale(&self, c: f64) -> Self {
        let op = Self::from_matrix_unchecked(self.matrix.scale_real(c));
        if let Some(s) = self.spectrum.get() {
            let _ = op.spectrum.set(sorted_spectrum(
                s.values.iter().map(|v| v * c).collect(),
                &s.vectors,
            ));
        }
        op
    }

    /// `U A U†` for a unitary `U`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch(u.dim(), self.dim()));
        }
        Ok(Self::from_hermitian_part(&u.conjugate_by(&self.matrix)))
    }
}

fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    let d = m.dim();
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        out.set(i, i, Complex64::new(m.get(i, i).re, 0.0));
        for j in (i + 1)..d {
            let v = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
            out.set(i, j, v);
            out.set(j, i, v.conj());
        }
    }
    out
}

fn sorted_spectrum(values: Vec<f64>, vectors: &ComplexMatrix) -> Spectrum {
    let d = values.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return Spectrum {
            values,
            vectors: vectors.clone(),
        };
    }
    let mut sorted_vecs = ComplexMatrix::zeros(d);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..d {
            sorted_vecs.set(i, new_col, vectors.get(i, old_col));
        }
    }
    Spectrum {
        values: order.iter().map(|&o| values[o]).collect(),
        vectors: sorted_vecs,
    }
}

fn off_diagonal_mass(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                acc += a.get(i, j).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic complex Jacobi. Converged when the off-diagonal Frobenius mass is
/// below `1e−14·‖A‖_F`; gives up after 100 sweeps.
fn jacobi_eigh(input: &ComplexMatrix) -> Result<Spectrum> {
    let d = input.dim();
    let mut a = symmetrize(input);
    let mut v = ComplexMatrix::identity(d);
    let fro = a.frobenius();
    let target = JACOBI_REL_TOL * fro;
    let mut converged = fro == 0.0 || d == 1;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_mass(&a) <= target;
    }
    if !converged {
        return Err(Error::NumericalFailure {
            residual: off_diagonal_mass(&a),
        });
    }
    let values = (0..d).map(|i| a.get(i, i).re).collect();
    Ok(sorted_spectrum(values, &v))
}

/// Zeroes `a[p][q]` with `A ← J†AJ`, `V ← VJ`, where `J = Φ R`,
/// `Φ = diag(1, ē)` removes the pivot phase `e` and `R` is the real rotation.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let e = apq / b;
    let eb = e.conj();
    let theta = (aqq - app) / (2.0 * b);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let d = a.dim();

    // Columns: (AJ)_kp = c A_kp − s ē A_kq ; (AJ)_kq = s A_kp + c ē A_kq
    for k in 0..d {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * c - akq * eb * s);
        a.set(k, q, akp * s + akq * eb * c);
    }
    // Rows: (J†X)_pk = c X_pk − s e X_qk ; (J†X)_qk = s X_pk + c e X_qk
    for k in 0..d {
        let xpk = a.get(p, k);
        let xqk = a.get(q, k);
        a.set(p, k, xpk * c - xqk * e * s);
        a.set(q, k, xpk * s + xqk * e * c);
    }
    a.set(p, q, ZERO);
    a.set(q, p, ZERO);
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    a.set(p, p, Complex64::new(app, 0.0));
    a.set(q, q, Complex64::new(aqq, 0.0));
    for k in 0..d {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * c - vkq * eb * s);
        v.set(k, q, vkp * s + vkq * eb * c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::paulis;
    use crate::random::{random_psd, random_psd_with, rng_from_seed, unitarity_defect};
    use proptest::prelude::*;

    fn reconstruct(s: &Spectrum) -> ComplexMatrix {
        let lam = ComplexMatrix::from_real_diagonal(&s.values);
        s.vectors.matmul(&lam).matmul(&s.vectors.adjoint())
    }

    #[test]
    fn diagonal_and_pauli_spectra() {
        let a = HermitianOperator::from_real_diagonal(&[3.0, 1.0]).unwrap();
        let s = a.eigh().unwrap();
        assert_eq!(s.values, vec![3.0, 1.0]);
        assert!(s.vectors.max_abs_diff(&ComplexMatrix::identity(2)) == 0.0);

        let x = HermitianOperator::new(paulis()[1].clone()).unwrap();
        let s = x.eigh().unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-15 && (s.values[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_and_unitarity() {
        let mut rng = rng_from_seed(3);
        for d in [1, 2, 3, 8, 16] {
            let a = random_psd_with(d, PositivityClass::Indefinite, &mut rng).unwrap();
            let s = a.eigh().unwrap();
            let scale = a.matrix().max_abs().max(1.0);
            assert!(reconstruct(s).max_abs_diff(a.matrix()) <= 1e-10 * scale);
            assert!(unitarity_defect(&s.vectors) <= 1e-10);
            assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let z = HermitianOperator::new(paulis()[3].clone()).unwrap();
        let zz = z.tensor(&z).unwrap();
        let mut rng = rng_from_seed(1);
        let u = crate::random::haar_unitary(4, &mut rng);
        let rotated = zz.conjugate_by(&u).unwrap();
        let s = rotated.eigh().unwrap();
        for (got, want) in s.values.iter().zip([1.0, 1.0, -1.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, Complex64::new(1.0, 0.0));
        assert!(matches!(HermitianOperator::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn matrix_function_examples() {
        let id = HermitianOperator::identity(3);
        for p in [-2.0, -0.5, 0.0, 0.5, 3.0] {
            assert!(id.powf(p).unwrap().matrix().max_abs_diff(id.matrix()) < 1e-15);
        }
        let a = HermitianOperator::from_real_diagonal(&[4.0, 1.0]).unwrap();
        let r = a.powf(0.5).unwrap();
        assert!(r.matrix().max_abs_diff(&ComplexMatrix::from_real_diagonal(&[2.0, 1.0])) < 1e-15);

        for seed in 0..20 {
            let f = random_psd(6, seed, PositivityClass::PositiveDefinite).unwrap();
            let inv = f.powf(-1.0).unwrap();
            let prod = inv.matrix().matmul(f.matrix());
            assert!(prod.max_abs_diff(&ComplexMatrix::identity(6)) < 1e-9);
        }
    }

    #[test]
    fn matrix_function_domain_errors() {
        let singular = HermitianOperator::from_real_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(singular.powf(-0.5), Err(Error::Domain { .. })));
        assert!(matches!(singular.ln(), Err(Error::Domain { .. })));
        let indefinite = HermitianOperator::from_real_diagonal(&[1.0, -0.5]).unwrap();
        assert!(matches!(indefinite.powf(0.5), Err(Error::Domain { eigenvalue, .. }) if eigenvalue == -0.5));
        assert!(indefinite.powf(2.0).is_ok());
    }

    #[test]
    fn tensor_examples() {
        let i4 = HermitianOperator::identity(2).tensor(&HermitianOperator::identity(2)).unwrap();
        assert_eq!(i4.matrix(), &ComplexMatrix::identity(4));
        let a = HermitianOperator::from_real_diagonal(&[2.0, 3.0]).unwrap();
        let b = HermitianOperator::from_real_diagonal(&[5.0, 7.0]).unwrap();
        assert_eq!(a.tensor(&b).unwrap().diagonal(), vec![10.0, 14.0, 15.0, 21.0]);
        let z = HermitianOperator::new(paulis()[3].clone()).unwrap();
        let mut vals = z.tensor(&z).unwrap().eigh().unwrap().values.clone();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn tensor_respects_dimension_cap() {
        let a = HermitianOperator::identity(100);
        let b = HermitianOperator::identity(41);
        assert!(matches!(a.tensor(&b), Err(Error::Capacity { requested: 4100, cap: 4096 })));
    }

    #[test]
    fn trace_and_inner_product_examples() {
        assert_eq!(HermitianOperator::identity(5).ntrace(), 1.0);
        assert_eq!(HermitianOperator::from_real_diagonal(&[2.0, 0.0]).unwrap().ntrace(), 1.0);
        let [_, x, _, z] = paulis();
        let (x, z) = (HermitianOperator::new(x).unwrap(), HermitianOperator::new(z).unwrap());
        assert_eq!(z.ntrace(), 0.0);
        let id = HermitianOperator::identity(2);
        assert_eq!(id.hs_inner(&id).unwrap(), 1.0);
        assert_eq!(z.hs_inner(&x).unwrap(), 0.0);
        assert!(matches!(z.hs_inner(&HermitianOperator::identity(3)), Err(Error::DimensionMismatch(2, 3))));
    }

    #[test]
    fn random_psd_contracts() {
        for seed in 0..20 {
            let f = random_psd(5, seed, PositivityClass::PositiveSemidefinite).unwrap();
            assert_ne!(f.classify(EPS_PD).unwrap(), PositivityClass::Indefinite);
            let g = random_psd(5, seed, PositivityClass::PositiveDefinite).unwrap();
            assert_eq!(g.classify(EPS_PD).unwrap(), PositivityClass::PositiveDefinite);
        }
        let a = random_psd(4, 99, PositivityClass::PositiveDefinite).unwrap();
        let b = random_psd(4, 99, PositivityClass::PositiveDefinite).unwrap();
        assert_eq!(a.matrix().as_slice(), b.matrix().as_slice());
    }

    /// Monte-Carlo check against the Gram-matrix mean `E τ(G†G) = d`.
    #[test]
    fn random_psd_wishart_mean() {
        let mut rng = rng_from_seed(2024);
        let samples = 10_000;
        let mean = (0..samples)
            .map(|_| random_psd_with(2, PositivityClass::PositiveSemidefinite, &mut rng).unwrap().ntrace())
            .sum::<f64>()
            / samples as f64;
        assert!((mean - 2.0).abs() <= 0.05 * 2.0, "mean {mean}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn spectral_idempotence(seed in any::<u64>(), d in 1usize..7) {
            let a = random_psd(d, seed, PositivityClass::Indefinite).unwrap();
            let b = a.mat_fun(|x| x).unwrap();
            let fresh = HermitianOperator::new(b.matrix().clone()).unwrap();
            let (sa, sb) = (a.eigh().unwrap(), fresh.eigh().unwrap());
            for (x, y) in sa.values.iter().zip(&sb.values) {
                prop_assert!((x - y).abs() <= 1e-10 * sa.max().abs().max(1.0));
            }
        }

        #[test]
        fn power_composition(seed in any::<u64>(), d in 1usize..6, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let f = random_psd(d, seed, PositivityClass::PositiveDefinite).unwrap();
            // renormalize so the spectrum sits near 1 and powers stay well scaled
            let f = f.scale(1.0 / f.eigh().unwrap().max());
            let lhs = HermitianOperator::new(f.powf(a).unwrap().matrix().clone()).unwrap().powf(b).unwrap();
            let rhs = f.powf(a * b).unwrap();
            let scale = rhs.matrix().max_abs().max(1.0);
            prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) <= 1e-9 * scale);
        }

        #[test]
        fn trace_is_multiplicative(s1 in any::<u64>(), s2 in any::<u64>(), d1 in 1usize..4, d2 in 1usize..4) {
            let a = random_psd(d1, s1, PositivityClass::Indefinite).unwrap();
            let b = random_psd(d2, s2, PositivityClass::Indefinite).unwrap();
            let t = a.tensor(&b).unwrap().ntrace();
            prop_assert!((t - a.ntrace() * b.ntrace()).abs() <= 1e-12 * (1.0 + t.abs()));
        }

        #[test]
        fn inner_product_spectral_sum(seed in any::<u64>(), d in 1usize..7) {
            let a = random_psd(d, seed, PositivityClass::Indefinite).unwrap();
            let fresh = HermitianOperator::new(a.matrix().clone()).unwrap();
            let sq = fresh.mat_fun(|x| x * x.abs()).unwrap();
            let lhs = fresh.hs_inner(&sq).unwrap();
            let rhs = fresh.eigh().unwrap().values.iter().map(|x| x * x * x.abs()).sum::<f64>() / d as f64;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
            prop_assert!(fresh.hs_inner(&fresh).unwrap() >= 0.0);
        }
    }
}
