//! Exact simulation of quantum non-interactive correlation distillation:
//! a state drawn uniformly from an orthonormal basis is sent through
//! depolarizing noise to `k` players who each measure the same balanced
//! two-outcome measurement `{M, I − M}`.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{Channel, DepolarizingFamily};
use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::matrix::{ComplexMatrix, ONE};
use crate::mixing::{mixing_bound_corollary, GAMMA_MAX};
use crate::random::{haar_unitary, rng_from_seed};
use crate::report::VerificationReport;

/// Largest qubit count accepted by the simulation.
pub const MAX_QUBITS: usize = 10;

const INSTANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct NicdInstance {
    n: usize,
    basis: ComplexMatrix,
    measurement: HermitianOperator,
    gamma: f64,
    k: u32,
}

impl NicdInstance {
    /// `basis` holds the states as columns; `measurement` must satisfy
    /// `0 ≤ M ≤ I` and `τ(M) = 1/2`.
    pub fn new(n: usize, basis: ComplexMatrix, measurement: HermitianOperator, gamma: f64, k: u32) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Capacity {
                requested: 1usize << n.min(usize::BITS as usize - 2),
                cap: 1 << MAX_QUBITS,
            });
        }
        let d = 1usize << n;
        if basis.dim() != d || measurement.dim() != d {
            return Err(Error::DimensionMismatch(basis.dim(), d));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::range(format!("gamma = {gamma} outside [0, 1]")));
        }
        if k == 0 {
            return Err(Error::range("player count must be at least 1"));
        }
        let defect = basis.adjoint().matmul(&basis).max_abs_diff(&ComplexMatrix::identity(d));
        if defect > INSTANCE_TOL {
            return Err(Error::contract(format!("basis is not orthonormal (defect {defect:.3e})")));
        }
        let spec = measurement.eigh()?;
        if spec.min() < -INSTANCE_TOL || spec.max() > 1.0 + INSTANCE_TOL {
            return Err(Error::contract("measurement must satisfy 0 ≤ M ≤ I"));
        }
        if (measurement.ntrace() - 0.5).abs() > INSTANCE_TOL {
            return Err(Error::contract(format!("measurement is not balanced: τ(M) = {}", measurement.ntrace())));
        }
        Ok(Self {
            n,
            basis,
            measurement,
            gamma,
            k,
        })
    }

    /// `M = B diag(m) B†`: a measurement diagonal in the instance basis.
    pub fn diagonal_in_basis(n: usize, basis: ComplexMatrix, weights: &[f64], gamma: f64, k: u32) -> Result<Self> {
        let m = HermitianOperator::from_spectrum(weights.to_vec(), basis.clone())?;
        Self::new(n, basis, m, gamma, k)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn measurement(&self) -> &HermitianOperator {
        &self.measurement
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn players(&self) -> u32 {
        self.k
    }

    pub fn with_players(&self, k: u32) -> Result<Self> {
        Self::new(self.n, self.basis.clone(), self.measurement.clone(), self.gamma, k)
    }

    /// The same instance with `M` replaced by `I − M`.
    pub fn complement(&self) -> Result<Self> {
        let m = HermitianOperator::identity(1 << self.n).sub(&self.measurement)?;
        Self::new(self.n, self.basis.clone(), m, self.gamma, self.k)
    }

    /// `tr(M D_γ^{⊗n}(|ψ⟩⟨ψ|))` for every basis state, in basis order.
    ///
    /// The depolarizing map is self-adjoint, so this is `⟨ψ|D(M)|ψ⟩`.
    pub fn per_state(&self) -> Result<Vec<f64>> {
        let dm = DepolarizingFamily::new(self.n, self.gamma)?.apply(&self.measurement)?;
        let dm = dm.matrix();
        let d = 1usize << self.n;
        Ok((0..d)
            .into_par_iter()
            .map(|j| {
                let psi = self.basis.column(j);
                let v = dm.mul_vec(&psi);
                let x: f64 = psi.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum();
                x.clamp(0.0, 1.0)
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NicdResult {
    pub p_all_m: f64,
    pub p_all_not_m: f64,
    pub per_state: Vec<f64>,
}

fn kth_moment(values: &[f64], k: u32) -> f64 {
    values.iter().map(|v| v.powi(k as i32)).sum::<f64>() / values.len() as f64
}

/// Exact probability that all `k` players see `M`, and that all see `I − M`.
pub fn success_probability(inst: &NicdInstance) -> Result<NicdResult> {
    let per_state = inst.per_state()?;
    let complement: Vec<f64> = per_state.iter().map(|v| 1.0 - v).collect();
    Ok(NicdResult {
        p_all_m: kth_moment(&per_state, inst.k),
        p_all_not_m: kth_moment(&complement, inst.k),
        per_state,
    })
}

/// The quantities that bound the game value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NicdBound {
    /// `δ^{1/k}`.
    pub term_a: f64,
    /// `δ^{(1/√ln(1/δ) + γ)²/(1−γ²)}`.
    pub term_b: f64,
    pub combined: f64,
    /// `ν = 1/γ² − 1`.
    pub nu: f64,
    /// `e^{−1/(1−γ²)}`, `e^{−2γ√ln(1/δ)/(1−γ²)}`, `δ^{1/ν}`; their product is `term_b`.
    pub factors: [f64; 3],
}

impl NicdBound {
    pub fn factored(&self) -> f64 {
        self.factors.iter().product()
    }
}

/// Evaluates both bound terms and the three-factor form of the second.
pub fn nicd_bound_rhs(delta: f64, gamma: f64, k: u32) -> Result<NicdBound> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::range(format!("δ = {delta} outside (0, 1)")));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::range(format!("gamma = {gamma} outside [0, 1)")));
    }
    if k == 0 {
        return Err(Error::range("player count must be at least 1"));
    }
    let g2 = 1.0 - gamma * gamma;
    let l = -delta.ln();
    let term_a = delta.powf(1.0 / k as f64);
    let term_b = delta.powf((1.0 / l.sqrt() + gamma).powi(2) / g2);
    let nu = 1.0 / (gamma * gamma) - 1.0;
    let factors = [
        (-1.0 / g2).exp(),
        (-2.0 * gamma * l.sqrt() / g2).exp(),
        (-l * gamma * gamma / g2).exp(),
    ];
    Ok(NicdBound {
        term_a,
        term_b,
        combined: term_a + term_b,
        nu,
        factors,
    })
}

/// `δ = (e^{c√ln k}/k)^ν`, the scale at which the game value is bounded.
pub fn nicd_envelope(c: f64, k: u32, gamma: f64) -> f64 {
    let lk = (k as f64).ln();
    let nu = 1.0 / (gamma * gamma) - 1.0;
    if nu.is_infinite() {
        return if c * lk.sqrt() < lk { 0.0 } else { 1.0 };
    }
    (nu * (c * lk.sqrt() - lk)).exp()
}

/// Checks, at `δ = (e^{c√ln k}/k)^ν`, that the middle factor is at least
/// `e^{−2γ√(ν ln k)/(1−γ²)}` and that
/// `δ^{1/k} ≥ (1/k)^{ν/k} ≥ 1 − ν ln k / k`.
pub fn verify_bound_chain(c: f64, k: u32, gamma: f64) -> Result<Vec<VerificationReport>> {
    if !(c >= 0.0) {
        return Err(Error::range(format!("c = {c} must be nonnegative")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::range(format!("gamma = {gamma} outside (0, 1)")));
    }
    let delta = nicd_envelope(c, k, gamma);
    let b = nicd_bound_rhs(delta, gamma, k)?;
    let lk = (k as f64).ln();
    let g2 = 1.0 - gamma * gamma;
    let proof_factor = (-2.0 * gamma * (b.nu * lk).sqrt() / g2).exp();
    let mid = (-b.nu * lk / k as f64).exp();
    let linear = 1.0 - b.nu * lk / k as f64;
    let tag = |r: VerificationReport| r.with_num("c", c).with_param("k", k).with_num("gamma", gamma).with_num("delta", delta);
    Ok(vec![
        tag(VerificationReport::new("nicd-factor-identity", b.term_b, b.factored(), -(b.term_b - b.factored()).abs())
            .with_relative_tol(1e-12)),
        tag(VerificationReport::new("nicd-factor-bound", b.factors[1], proof_factor, b.factors[1] - proof_factor)),
        tag(VerificationReport::new("nicd-delta-root", b.term_a, mid, b.term_a - mid)),
        tag(VerificationReport::new("nicd-delta-linear", mid, linear, mid - linear)),
    ])
}

/// The ingredients of the contradiction argument on one instance.
#[derive(Debug, Clone, Serialize)]
pub struct NicdContradiction {
    pub p_all_m: f64,
    pub delta: f64,
    /// `dim S / 2^n` for `S = span{ψ : tr(M D(|ψ⟩⟨ψ|))^k ≥ δ}`.
    pub sigma: f64,
    /// `1/log₂(1/σ)`, absent when `σ = 1`.
    pub alpha: Option<f64>,
    /// True when the mixing bound could not be evaluated (`σ = 1`).
    pub mixing_check_skipped: bool,
    /// True when `γ ≥ 1 − 10⁻⁶` and the mixing bound was replaced by its limit 0.
    pub gamma_at_limit: bool,
    pub reports: Vec<VerificationReport>,
}

impl NicdContradiction {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Markov step `σ ≥ δ`, the per-state bound
/// `tr[(I−M)D(ρ_S)] ≤ 1 − δ^{1/k}`, and the mixing lower bound
/// `tr[(I−M)D(ρ_S)] ≥ σ^{(√α+γ)²/(1−γ²)} ≥ δ^{(1/√ln(1/δ)+γ)²/(1−γ²)}`.
pub fn verify_nicd_contradiction(inst: &NicdInstance, delta: f64) -> Result<NicdContradiction> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::range(format!("δ = {delta} outside (0, 1)")));
    }
    let res = success_probability(inst)?;
    if res.p_all_m < 2.0 * delta {
        return Err(Error::contract(format!(
            "inapplicable: all-M probability {} is below 2δ = {}",
            res.p_all_m,
            2.0 * delta
        )));
    }
    let d = 1usize << inst.n;
    let members: Vec<usize> = (0..d)
        .filter(|&j| res.per_state[j].powi(inst.k as i32) >= delta)
        .collect();
    let sigma = members.len() as f64 / d as f64;

    let mut proj = ComplexMatrix::zeros(d);
    for &j in &members {
        proj = &proj + &ComplexMatrix::outer(&inst.basis.column(j));
    }
    let rho_s = HermitianOperator::new(proj.scale_real(1.0 / members.len() as f64))?;
    let not_m = HermitianOperator::identity(d).sub(&inst.measurement)?;
    let noisy = DepolarizingFamily::new(inst.n, inst.gamma)?.apply(&rho_s)?;
    let escape = not_m.ntrace_product(&noisy)? * d as f64;

    let k = inst.k;
    let tag = |r: VerificationReport| {
        r.with_param("qubits", inst.n)
            .with_param("k", k)
            .with_num("gamma", inst.gamma)
            .with_num("delta", delta)
            .with_num("sigma", sigma)
    };
    let term_a = delta.powf(1.0 / k as f64);
    let mut reports = vec![
        tag(VerificationReport::new("nicd-markov", sigma, delta, sigma - delta)),
        tag(VerificationReport::new("nicd-ineq1", escape, 1.0 - term_a, 1.0 - term_a - escape)),
    ];

    let mut alpha = None;
    let mut skipped = false;
    let mut at_limit = false;
    if sigma >= 1.0 {
        skipped = true;
    } else {
        let a = 1.0 / (1.0 / sigma).log2();
        alpha = Some(a);
        let (sigma_bound, delta_bound) = if inst.gamma >= GAMMA_MAX {
            at_limit = true;
            (0.0, 0.0)
        } else {
            let l = -delta.ln();
            let g = inst.gamma;
            (
                mixing_bound_corollary(sigma, a, g)?,
                delta.powf((1.0 / l.sqrt() + g).powi(2) / (1.0 - g * g)),
            )
        };
        reports.push(tag(
            VerificationReport::new("nicd-ineq2", escape, sigma_bound, escape - sigma_bound).with_num("alpha", a),
        ));
        reports.push(tag(VerificationReport::new(
            "nicd-ineq2-delta",
            sigma_bound,
            delta_bound,
            sigma_bound - delta_bound,
        )));
    }
    Ok(NicdContradiction {
        p_all_m: res.p_all_m,
        delta,
        sigma,
        alpha,
        mixing_check_skipped: skipped,
        gamma_at_limit: at_limit,
        reports,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    Product,
    /// The computational basis after a Hadamard on qubit 1 and a CNOT chain
    /// `1→2, 2→3, …`.
    Ghz,
    Haar { seed: u64 },
}

impl BasisFamily {
    pub fn id(&self) -> String {
        match self {
            BasisFamily::Product => "product".into(),
            BasisFamily::Ghz => "ghz".into(),
            BasisFamily::Haar { seed } => format!("haar-{seed}"),
        }
    }

    pub fn build(&self, n: usize) -> Result<ComplexMatrix> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::range(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
        }
        let d = 1usize << n;
        Ok(match self {
            BasisFamily::Product => ComplexMatrix::identity(d),
            BasisFamily::Ghz => ghz_circuit(n),
            BasisFamily::Haar { seed } => haar_unitary(d, &mut rng_from_seed(*seed)),
        })
    }
}

/// `CNOT_{n−1,n} ⋯ CNOT_{1,2} (H ⊗ I)`.
fn ghz_circuit(n: usize) -> ComplexMatrix {
    let d = 1usize << n;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = ComplexMatrix::zeros(d);
    let top = 1usize << (n - 1);
    for x in 0..d {
        // H on the most significant bit.
        let (x0, x1) = (x & !top, x | top);
        let sign = if x & top != 0 { -1.0 } else { 1.0 };
        for (y, amp) in [(x0, h), (x1, sign * h)] {
            let mut z = y;
            for c in 0..n - 1 {
                let cbit = 1usize << (n - 1 - c);
                let tbit = cbit >> 1;
                if z & cbit != 0 {
                    z ^= tbit;
                }
            }
            u.set(z, x, u.get(z, x) + ONE * amp);
        }
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementFamily {
    /// Weight 1 on basis states whose label has a majority of ones, ½ on ties.
    Majority,
    /// Weight 1 when the first label bit is 1.
    Dictator,
    /// A uniformly random half of the basis states.
    RandomDiag { seed: u64 },
}

impl MeasurementFamily {
    pub fn id(&self) -> String {
        match self {
            MeasurementFamily::Majority => "majority".into(),
            MeasurementFamily::Dictator => "dictator".into(),
            MeasurementFamily::RandomDiag { seed } => format!("random-diag-{seed}"),
        }
    }

    /// Diagonal weights in the basis, each in `[0, 1]` and averaging ½.
    pub fn weights(&self, n: usize) -> Vec<f64> {
        let d = 1usize << n;
        match self {
            MeasurementFamily::Majority => (0..d)
                .map(|x| {
                    let ones = 2 * x.count_ones() as usize;
                    if ones > n {
                        1.0
                    } else if ones == n {
                        0.5
                    } else {
                        0.0
                    }
                })
                .collect(),
            MeasurementFamily::Dictator => (0..d).map(|x| if x >> (n - 1) == 1 { 1.0 } else { 0.0 }).collect(),
            MeasurementFamily::RandomDiag { seed } => {
                let mut idx: Vec<usize> = (0..d).collect();
                idx.shuffle(&mut rng_from_seed(*seed));
                let mut w = vec![0.0; d];
                for &i in &idx[..d / 2] {
                    w[i] = 1.0;
                }
                w
            }
        }
    }
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub basis_id: String,
    #[serde(rename = "M_id")]
    pub m_id: String,
    pub n: usize,
    pub k: u32,
    pub gamma: f64,
    #[serde(rename = "p_all_M")]
    pub p_all_m: f64,
    #[serde(rename = "p_all_notM")]
    pub p_all_not_m: f64,
    /// `(e^{c√ln k}/k)^{1/γ²−1}` when a constant was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<f64>,
}

/// Exact success probabilities for every (basis, measurement, k) combination,
/// with `M` diagonal in the chosen basis. Rows come out in argument order.
pub fn entangled_basis_sweep(
    n: usize,
    ks: &[u32],
    gamma: f64,
    bases: &[BasisFamily],
    measurements: &[MeasurementFamily],
    c: Option<f64>,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for basis in bases {
        let b = basis.build(n)?;
        for m in measurements {
            let inst = NicdInstance::diagonal_in_basis(n, b.clone(), &m.weights(n), gamma, 1)?;
            let per_state = inst.per_state()?;
            let complement: Vec<f64> = per_state.iter().map(|v| 1.0 - v).collect();
            for &k in ks {
                if k == 0 {
                    return Err(Error::range("player count must be at least 1"));
                }
                rows.push(SweepRow {
                    basis_id: basis.id(),
                    m_id: m.id(),
                    n,
                    k,
                    gamma,
                    p_all_m: kth_moment(&per_state, k),
                    p_all_not_m: kth_moment(&complement, k),
                    envelope: c.map(|c| nicd_envelope(c, k, gamma)),
                });
            }
        }
    }
    Ok(rows)
}

/// A random balanced diagonal measurement biased toward low-weight labels:
/// weights decrease with Hamming weight, with random jitter, rescaled to
/// average ½.
pub fn random_balanced_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let d = 1usize << n;
    let raw: Vec<f64> = (0..d)
        .map(|x| {
            let w = x.count_ones() as f64 / n as f64;
            ((1.0 - w) + 0.3 * rng.random::<f64>()).clamp(0.0, 1.0)
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / d as f64;
    if mean >= 0.5 {
        raw.iter().map(|v| v * 0.5 / mean).collect()
    } else {
        let beta = 0.5 / (1.0 - mean);
        raw.iter().map(|v| 1.0 - beta * (1.0 - v)).collect()
    }
}
