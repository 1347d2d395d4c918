//! Entropy, Dirichlet forms, the classical transition matrix induced by a
//! channel in an eigenbasis, and a derivative-free lower-bound estimator for
//! the 2-log-Sobolev constant.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::channel::{check_primitive, Channel, KrausChannel, LindbladGenerator, CHANNEL_TOL};
use crate::error::{Error, Result};
use crate::hermitian::{HermitianOperator, EPS_PD};
use crate::matrix::ComplexMatrix;
use crate::random::rng_from_seed;

/// `μ ln μ − μ + 1`, accurate near `μ = 1`.
pub(crate) fn relative_entropy_kernel(mu: f64) -> f64 {
    if mu == 0.0 {
        return 1.0;
    }
    let e = mu - 1.0;
    if e.abs() < 0.5 {
        mu * e.ln_1p() - e
    } else {
        mu * mu.ln() - mu + 1.0
    }
}

/// `Ent` of a nonnegative spectrum, `mean(x ln x) − m ln m` with `0 ln 0 = 0`.
pub(crate) fn entropy_of_values(values: &[f64]) -> f64 {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    let mean_kernel =
        values.iter().map(|&x| relative_entropy_kernel(x / m)).sum::<f64>() / values.len() as f64;
    m * (mean_kernel - relative_entropy_kernel(1.0))
}

/// `Ent(f) = τ(f ln f) − τ(f) ln τ(f)` for positive semidefinite `f`.
pub fn entropy(f: &HermitianOperator) -> Result<f64> {
    let vals = f.psd_spectrum(EPS_PD)?;
    if !(f.ntrace() > 0.0) {
        return Err(Error::domain("entropy needs τ(f) > 0", f.ntrace()));
    }
    Ok(entropy_of_values(&vals))
}

/// `E_L(f, g) = τ(f L(g))`.
pub fn dirichlet_form(l: &LindbladGenerator, f: &HermitianOperator, g: &HermitianOperator) -> Result<f64> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch(f.dim(), g.dim()));
    }
    f.ntrace_product(&l.apply(g)?)
}

/// `E_L(f, g)` evaluated on `f − τ(f)·I` and `g − τ(g)·I`; equal to
/// [`dirichlet_form`] but free of cancellation when either is nearly flat.
pub fn dirichlet_form_centered(
    l: &LindbladGenerator,
    f: &HermitianOperator,
    g: &HermitianOperator,
) -> Result<f64> {
    let id = HermitianOperator::identity(f.dim());
    let fc = f.sub(&id.scale(f.ntrace()))?;
    let gc = g.sub(&id.scale(g.ntrace()))?;
    dirichlet_form(l, &fc, &gc)
}

/// `E_L(f, f)` evaluated on `f − τ(f)·I`, which leaves the value unchanged
/// (`L(I) = 0`, `L` self-adjoint) and avoids cancellation when `f ≈ c·I`.
pub fn dirichlet_energy(l: &LindbladGenerator, f: &HermitianOperator) -> Result<f64> {
    let centered = f.sub(&HermitianOperator::identity(f.dim()).scale(f.ntrace()))?;
    dirichlet_form(l, &centered, &centered)
}

/// `P_ij = Σ_α |⟨i|A_α|j⟩|²` in the eigenbasis `{|i⟩}` of a reference
/// operator. Doubly stochastic for unital channels, symmetric for reversible
/// ones.
#[derive(Debug, Clone)]
pub struct InducedTransitionMatrix {
    dim: usize,
    entries: Vec<f64>,
    basis: ComplexMatrix,
}

impl InducedTransitionMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `(c₀/2d) Σ_ij P_ij (a_i − a_j)(b_i − b_j)`.
    pub fn pairwise_form(&self, c0: f64, a: &[f64], b: &[f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += self.get(i, j) * (a[i] - a[j]) * (b[i] - b[j]);
            }
        }
        c0 * acc / (2.0 * d as f64)
    }
}

pub fn induced_transition_matrix(t: &KrausChannel, g: &HermitianOperator) -> Result<InducedTransitionMatrix> {
    if t.dim() != g.dim() {
        return Err(Error::DimensionMismatch(t.dim(), g.dim()));
    }
    if !t.is_unital() {
        return Err(Error::contract("induced transition matrix needs a unital channel"));
    }
    let s = t.superoperator();
    if s.max_abs_diff(&s.adjoint()) > CHANNEL_TOL {
        return Err(Error::contract("induced transition matrix needs a reversible channel"));
    }
    let u = g.eigh()?.vectors.clone();
    let ud = u.adjoint();
    let d = t.dim();
    let mut entries = vec![0.0; d * d];
    for a in t.ops() {
        let b = ud.matmul(a).matmul(&u);
        for (e, z) in entries.iter_mut().zip(b.as_slice()) {
            *e += z.norm_sqr();
        }
    }
    Ok(InducedTransitionMatrix {
        dim: d,
        entries,
        basis: u,
    })
}

/// `E_L(φ(g), ψ(g))` from the eigenvalues of `g` through
/// [`InducedTransitionMatrix::pairwise_form`]. Every term is a product of
/// eigenvalue differences, so the value keeps its relative accuracy when
/// `φ(g)` and `ψ(g)` span many orders of magnitude, where the matrix form
/// `τ(φ(g) L(ψ(g)))` cancels catastrophically.
pub fn spectral_dirichlet_form(
    l: &LindbladGenerator,
    g: &HermitianOperator,
    phi: impl Fn(f64) -> f64,
    psi: impl Fn(f64) -> f64,
) -> Result<f64> {
    let p = induced_transition_matrix(l.base(), g)?;
    let vals = &g.eigh()?.values;
    let a: Vec<f64> = vals.iter().map(|&x| phi(x)).collect();
    let b: Vec<f64> = vals.iter().map(|&x| psi(x)).collect();
    if let Some(bad) = a.iter().chain(&b).position(|v| !v.is_finite()) {
        return Err(Error::domain("function is not finite on the spectrum", vals[bad % vals.len()]));
    }
    Ok(p.pairwise_form(l.c0(), &a, &b))
}

/// Result of [`estimate_lsi2_constant`].
#[derive(Debug, Clone, Serialize)]
pub struct LsiEstimate {
    /// Largest `Ent(f²)/E(f, f)` found; a lower bound on the optimal constant.
    pub alpha_lower_bound: f64,
    /// Eigenvalues of the best witness `f` (normalized to `τ(f²) = 1`).
    pub witness_eigenvalues: Vec<f64>,
    pub evaluations: usize,
    pub restarts: usize,
}

/// Energies below this are treated as `f ∝ I`, where the ratio is `0/0`.
const LSI_MIN_ENERGY: f64 = 1e-8;
const LSI_EVALS_PER_RESTART: usize = 400;

/// Multi-start random-direction ascent of `Ent(f²)/E(f, f)` over positive
/// definite `f = U diag(e^x) U†`, `U = exp(iH)`. Deterministic given `seed`.
pub fn estimate_lsi2_constant(l: &LindbladGenerator, restarts: usize, seed: u64) -> Result<LsiEstimate> {
    if !check_primitive(l.base())?.primitive {
        return Err(Error::contract(
            "generator is not primitive: the log-Sobolev constant diverges (spectral gap is zero)",
        ));
    }
    let d = l.dim();
    let mut rng = rng_from_seed(seed);
    let mut best = f64::NEG_INFINITY;
    let mut best_vals = vec![1.0; d];
    let mut evaluations = 0;
    let n_params = d + d * d;
    for restart in 0..restarts.max(1) {
        let spread = 0.05 + rng.random::<f64>();
        let mut params: Vec<f64> = (0..n_params)
            .map(|i| {
                let z: f64 = rng.sample(StandardNormal);
                if i < d { spread * z } else { z }
            })
            .collect();
        // first restart probes diagonal witnesses
        if restart == 0 {
            params[d..].iter_mut().for_each(|x| *x = 0.0);
        }
        let mut value = lsi_ratio(l, &params, d)?.unwrap_or(f64::NEG_INFINITY);
        evaluations += 1;
        let mut step = 0.3;
        while evaluations < (restart + 1) * LSI_EVALS_PER_RESTART {
            let dir: Vec<f64> = (0..n_params).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut improved = false;
            for sign in [1.0, -1.0] {
                let trial: Vec<f64> = params
                    .iter()
                    .zip(&dir)
                    .map(|(p, v)| p + sign * step * v / norm)
                    .collect();
                evaluations += 1;
                if let Some(r) = lsi_ratio(l, &trial, d)? {
                    if r > value {
                        params = trial;
                        value = r;
                        improved = true;
                        break;
                    }
                }
            }
            step = if improved { step * 1.5 } else { step * 0.7 };
            if step < 1e-6 {
                step = 0.3;
            }
        }
        if value > best {
            best = value;
            best_vals = lsi_eigenvalues(&params[..d]);
        }
    }
    Ok(LsiEstimate {
        alpha_lower_bound: best,
        witness_eigenvalues: best_vals,
        evaluations,
        restarts: restarts.max(1),
    })
}

/// Eigenvalues `e^{x}` normalized so the mean of their squares is 1.
fn lsi_eigenvalues(x: &[f64]) -> Vec<f64> {
    let shift = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = x.iter().map(|v| (v - shift).exp()).collect();
    let norm = (raw.iter().map(|v| v * v).sum::<f64>() / raw.len() as f64).sqrt();
    raw.iter().map(|v| v / norm).collect()
}

fn hermitian_from_params(h: &[f64], d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d);
    let mut k = 0;
    for i in 0..d {
        m.set(i, i, Complex64::new(h[k], 0.0));
        k += 1;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let z = Complex64::new(h[k], h[k + 1]) * std::f64::consts::FRAC_1_SQRT_2;
            m.set(i, j, z);
            m.set(j, i, z.conj());
            k += 2;
        }
    }
    m
}

/// `Ent(f²)/E(f, f)` for the parameterized `f`, or `None` if `E` is too small
/// to resolve.
fn lsi_ratio(l: &LindbladGenerator, params: &[f64], d: usize) -> Result<Option<f64>> {
    let lam = lsi_eigenvalues(&params[..d]);
    let sq: Vec<f64> = lam.iter().map(|v| v * v).collect();
    let ent = entropy_of_values(&sq);
    let u = hermitian_from_params(&params[d..], d)
        .scale(Complex64::new(0.0, 1.0))
        .expm();
    let mean = lam.iter().sum::<f64>() / d as f64;
    let centered: Vec<f64> = lam.iter().map(|v| v - mean).collect();
    let fc = HermitianOperator::from_spectrum(centered, u)?;
    let energy = dirichlet_form(l, &fc, &fc)?;
    if energy < LSI_MIN_ENERGY {
        return Ok(None);
    }
    Ok(Some(ent / energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::DepolarizingFamily;
    use crate::hermitian::PositivityClass;
    use crate::matrix::paulis;
    use crate::random::{random_psd, random_psd_with};

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&HermitianOperator::identity(3)).unwrap(), 0.0);
        let f = HermitianOperator::from_real_diagonal(&[2.0, 0.0]).unwrap();
        assert!((entropy(&f).unwrap() - 2f64.ln()).abs() < 1e-15);
        let mut rng = rng_from_seed(6);
        for _ in 0..20 {
            let f = random_psd_with(4, PositivityClass::PositiveSemidefinite, &mut rng).unwrap();
            let e = entropy(&f).unwrap();
            assert!(e >= 0.0);
            let scaled = entropy(&f.scale(3.7)).unwrap();
            assert!((scaled - 3.7 * e).abs() <= 1e-10 * scaled.max(1.0));
        }
    }

    #[test]
    fn entropy_domain_errors() {
        let indefinite = HermitianOperator::from_real_diagonal(&[1.0, -1.0]).unwrap();
        assert!(entropy(&indefinite).is_err());
        assert!(entropy(&HermitianOperator::zero(2)).is_err());
    }

    #[test]
    fn dirichlet_examples() {
        let l = LindbladGenerator::depolarizing_site_sum(1).unwrap();
        let z = HermitianOperator::new(paulis()[3].clone()).unwrap();
        assert!((dirichlet_form(&l, &z, &z).unwrap() - 1.0).abs() < 1e-15);
        let f = random_psd(2, 1, PositivityClass::Indefinite).unwrap();
        assert!(dirichlet_form(&l, &f, &HermitianOperator::identity(2)).unwrap().abs() < 1e-15);
        assert!(dirichlet_form(&l, &f, &HermitianOperator::identity(4)).is_err());
    }

    #[test]
    fn dirichlet_symmetric_and_nonnegative() {
        for n in 1..=3 {
            let l = LindbladGenerator::depolarizing_site_sum(n).unwrap();
            let mut rng = rng_from_seed(n as u64);
            for _ in 0..20 {
                let f = random_psd_with(1 << n, PositivityClass::Indefinite, &mut rng).unwrap();
                let g = random_psd_with(1 << n, PositivityClass::Indefinite, &mut rng).unwrap();
                let a = dirichlet_form(&l, &f, &g).unwrap();
                let b = dirichlet_form(&l, &g, &f).unwrap();
                assert!((a - b).abs() < 1e-10);
                assert!(dirichlet_form(&l, &f, &f).unwrap() >= -1e-10);
                let e = dirichlet_energy(&l, &f).unwrap();
                assert!((e - dirichlet_form(&l, &f, &f).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn transition_matrix_examples() {
        let g = random_psd(3, 2, PositivityClass::PositiveDefinite).unwrap();
        let id = induced_transition_matrix(&KrausChannel::identity(3).unwrap(), &g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id.get(i, j) - want).abs() < 1e-12);
            }
        }
        let gamma = 0.3;
        let dep = DepolarizingFamily::new(1, gamma).unwrap().to_kraus().unwrap();
        for seed in 0..5 {
            let g = random_psd(2, seed, PositivityClass::Indefinite).unwrap();
            let p = induced_transition_matrix(&dep, &g).unwrap();
            assert!((p.get(0, 0) - (1.0 + gamma) / 2.0).abs() < 1e-12);
            assert!((p.get(0, 1) - (1.0 - gamma) / 2.0).abs() < 1e-12);
            assert!((p.get(1, 1) - (1.0 + gamma) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transition_matrix_is_doubly_stochastic_and_symmetric() {
        for n in 1..=3 {
            let t = KrausChannel::site_averaged_depolarizer(n).unwrap();
            let g = random_psd(1 << n, 10 + n as u64, PositivityClass::Indefinite).unwrap();
            let p = induced_transition_matrix(&t, &g).unwrap();
            for s in p.row_sums().into_iter().chain(p.column_sums()) {
                assert!((s - 1.0).abs() < 1e-12);
            }
            assert!(p.asymmetry() < 1e-10);
        }
    }

    #[test]
    fn transition_matrix_rejects_irreversible() {
        let u = paulis()[2].scale(Complex64::new(0.0, 0.3)).expm();
        let rot = KrausChannel::unitary(u).unwrap();
        let g = HermitianOperator::identity(2);
        assert!(matches!(induced_transition_matrix(&rot, &g), Err(Error::Contract(_))));
    }

    #[test]
    fn pairwise_form_matches_operator_form() {
        for n in 1..=2 {
            let l = LindbladGenerator::depolarizing_site_sum(n).unwrap();
            for seed in 0..10 {
                let g = random_psd(1 << n, seed, PositivityClass::PositiveDefinite).unwrap();
                let p = induced_transition_matrix(l.base(), &g).unwrap();
                let (a, b) = (0.7, -0.4);
                let ga = g.powf(a).unwrap();
                let gb = g.powf(b).unwrap();
                let direct = dirichlet_form(&l, &ga, &gb).unwrap();
                let vals = &g.eigh().unwrap().values;
                let va: Vec<f64> = vals.iter().map(|x| x.powf(a)).collect();
                let vb: Vec<f64> = vals.iter().map(|x| x.powf(b)).collect();
                let pair = p.pairwise_form(l.c0(), &va, &vb);
                assert!((direct - pair).abs() <= 1e-9 * direct.abs().max(1.0));
            }
        }
    }

    /// Scalar brute force over the diagonal witness family
    /// `f = diag(√(2−x), √x)` for the single-qubit generator.
    fn brute_force_two_point_ratio() -> f64 {
        let l = LindbladGenerator::depolarizing_site_sum(1).unwrap();
        let mut best = 0.0f64;
        for i in 1..2000 {
            let x = i as f64 / 1000.0;
            if (x - 1.0).abs() < 1e-3 {
                continue;
            }
            let f = HermitianOperator::from_real_diagonal(&[(2.0 - x).sqrt(), x.sqrt()]).unwrap();
            let ent = entropy(&f.powf(2.0).unwrap()).unwrap();
            let e = dirichlet_form(&l, &f, &f).unwrap();
            best = best.max(ent / e);
        }
        best
    }

    #[test]
    fn lsi_estimate_single_qubit() {
        let witness = brute_force_two_point_ratio();
        assert!((1.5..=2.0).contains(&witness));
        let l = LindbladGenerator::depolarizing_site_sum(1).unwrap();
        let est = estimate_lsi2_constant(&l, 4, 1).unwrap();
        assert!(est.alpha_lower_bound >= 1.5, "{est:?}");
        assert!(est.alpha_lower_bound <= 2.0 + 1e-8, "{est:?}");
    }

    #[test]
    fn lsi_estimate_rejects_identity_generator() {
        let l = LindbladGenerator::from_channel(KrausChannel::identity(2).unwrap(), 1.0).unwrap();
        assert!(matches!(estimate_lsi2_constant(&l, 1, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn two_lsi_holds_for_site_sum() {
        for n in 1..=3 {
            let l = LindbladGenerator::depolarizing_site_sum(n).unwrap();
            let mut rng = rng_from_seed(100 + n as u64);
            for _ in 0..200 {
                let f = random_psd_with(1 << n, PositivityClass::PositiveSemidefinite, &mut rng).unwrap();
                let ent = entropy(&f.powf(2.0).unwrap()).unwrap();
                let e = dirichlet_form(&l, &f, &f).unwrap();
                assert!(ent <= 2.0 * e + 1e-9);
            }
        }
    }
}
