//! Deterministic random instances.
//!
//! Every generator is driven by `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha
//! 0.9), a counter-based stream cipher generator. Campaigns derive per-trial
//! seeds as `seed_base + trial_index`, so a single trial can be replayed in
//! isolation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermitian::{check_dim, HermitianOperator, PositivityClass};
use crate::matrix::ComplexMatrix;

pub type DetRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> DetRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian: `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..d * d).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_row_major(d, data).expect("finite gaussian entries")
}

/// `G†G` for Gaussian `G`, plus `10⁻³·λ_max·I` when a positive definite
/// operator is requested. `Indefinite` yields the Hermitian part of `G`.
pub fn random_psd_with<R: Rng + ?Sized>(
    d: usize,
    class: PositivityClass,
    rng: &mut R,
) -> Result<HermitianOperator> {
    check_dim(d)?;
    if d == 0 {
        return Err(Error::contract("dimension must be positive"));
    }
    let g = gaussian_matrix(d, rng);
    match class {
        PositivityClass::Indefinite => Ok(HermitianOperator::from_hermitian_part(&g)),
        PositivityClass::PositiveSemidefinite => {
            Ok(HermitianOperator::from_hermitian_part(&g.adjoint().matmul(&g)))
        }
        PositivityClass::PositiveDefinite => {
            let gram = HermitianOperator::from_hermitian_part(&g.adjoint().matmul(&g));
            let shift = 1e-3 * gram.eigh()?.max();
            gram.add(&HermitianOperator::identity(d).scale(shift))
        }
    }
}

pub fn random_psd(d: usize, seed: u64, class: PositivityClass) -> Result<HermitianOperator> {
    random_psd_with(d, class, &mut rng_from_seed(seed))
}

/// Hermitian part of a Gaussian matrix.
pub fn random_hermitian_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<HermitianOperator> {
    random_psd_with(d, PositivityClass::Indefinite, rng)
}

/// Haar-distributed unitary: Gram–Schmidt on a Gaussian matrix, columns
/// processed left to right.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(d, rng);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        // two passes of modified Gram–Schmidt for orthogonality to rounding
        for _ in 0..2 {
            for u in &cols {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        cols.push(v);
    }
    let mut u = ComplexMatrix::zeros(d);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u.set(i, j, z);
        }
    }
    u
}

/// Uniformly random direction in the space of Hermitian matrices scaled by
/// `scale`, returned as `exp(i·scale·H)`.
pub fn random_unitary_near_identity<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> ComplexMatrix {
    let h = HermitianOperator::from_hermitian_part(&gaussian_matrix(d, rng));
    h.matrix().scale(Complex64::new(0.0, scale)).expm()
}

/// Random diagonal operator with entries drawn by `draw`.
pub fn random_diagonal_with<R: Rng + ?Sized, F: FnMut(&mut R) -> f64>(
    d: usize,
    rng: &mut R,
    mut draw: F,
) -> HermitianOperator {
    let diag: Vec<f64> = (0..d).map(|_| draw(rng)).collect();
    HermitianOperator::from_real_diagonal(&diag).expect("finite diagonal")
}

#[cfg(test)]
pub(crate) fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    u.adjoint()
        .matmul(u)
        .max_abs_diff(&ComplexMatrix::identity(u.dim()))
}

