//! Rapid-mixing bounds: how much weight a noisy state from a small subspace
//! keeps on a measurement, exactly and through the hypercontractive lower
//! bounds.

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::channel::{Channel, DepolarizingFamily};
use crate::error::{Error, Result};
use crate::hermitian::{HermitianOperator, PositivityClass};
use crate::random::{haar_unitary, random_psd_with};
use crate::report::{num, VerificationReport};
use crate::verify::operator_witness;

/// Largest noise accepted by the bound formulas.
pub const GAMMA_MAX: f64 = 1.0 - 1e-6;

const INSTANCE_TOL: f64 = 1e-10;

/// A subspace `S` of `n` qubits, a measurement `0 ≤ M ≤ I` and a noise level.
/// `dim S = e^{−s²/2}·2^n` and `τ(M) = e^{−t²/2}`.
#[derive(Debug, Clone)]
pub struct SubspaceInstance {
    n: usize,
    projector: HermitianOperator,
    dim_s: usize,
    s: f64,
    measurement: HermitianOperator,
    t: f64,
    gamma: f64,
}

impl SubspaceInstance {
    pub fn new(n: usize, projector: HermitianOperator, measurement: HermitianOperator, gamma: f64) -> Result<Self> {
        let d = 1usize << n;
        if projector.dim() != d || measurement.dim() != d {
            return Err(Error::DimensionMismatch(projector.dim(), d));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::range(format!("gamma = {gamma} outside [0, 1]")));
        }
        let sq = projector.matrix().matmul(projector.matrix());
        let idem = sq.max_abs_diff(projector.matrix());
        if idem > INSTANCE_TOL {
            return Err(Error::contract(format!("projector is not idempotent (defect {idem:.3e})")));
        }
        let rank = projector.matrix().trace().re;
        let dim_s = rank.round() as usize;
        if dim_s == 0 || (rank - dim_s as f64).abs() > 1e-8 {
            return Err(Error::contract(format!("projector trace {rank} is not a positive integer")));
        }
        let spec = measurement.eigh()?;
        if spec.min() < -INSTANCE_TOL || spec.max() > 1.0 + INSTANCE_TOL {
            return Err(Error::contract("measurement must satisfy 0 ≤ M ≤ I"));
        }
        let tau = measurement.ntrace();
        if !(tau > 0.0) {
            return Err(Error::contract("measurement must have τ(M) > 0"));
        }
        let s = (-2.0 * (dim_s as f64 / d as f64).ln()).max(0.0).sqrt();
        let t = (-2.0 * tau.ln()).max(0.0).sqrt();
        Ok(Self {
            n,
            projector,
            dim_s,
            s,
            measurement,
            t,
            gamma,
        })
    }

    /// A Haar-random `dim_s`-dimensional subspace and a measurement with
    /// `τ(M) = tau_m`. With `orthogonal`, `M` is supported on `S^⊥`, which
    /// needs `tau_m ≤ 1 − dim_s/2^n`.
    ///
    /// Otherwise `M` starts from a random PSD operator rescaled to spectrum in
    /// `[0, 1]` and is blended with `0` or `I` to hit `tau_m` exactly.
    pub fn random<R: Rng + ?Sized>(
        n: usize,
        dim_s: usize,
        tau_m: f64,
        gamma: f64,
        orthogonal: bool,
        rng: &mut R,
    ) -> Result<Self> {
        let d = 1usize << n;
        if dim_s == 0 || dim_s > d {
            return Err(Error::range(format!("subspace dimension {dim_s} outside 1..={d}")));
        }
        if !(tau_m > 0.0 && tau_m <= 1.0) {
            return Err(Error::range(format!("τ(M) = {tau_m} outside (0, 1]")));
        }
        let u = haar_unitary(d, rng);
        let mut pvals = vec![0.0; d];
        pvals[..dim_s].iter_mut().for_each(|v| *v = 1.0);
        let projector = HermitianOperator::from_spectrum(pvals, u.clone())?;
        let measurement = if orthogonal {
            let free = d - dim_s;
            let target = tau_m * d as f64;
            if free == 0 || target > free as f64 + 1e-12 {
                return Err(Error::range("orthogonal measurement cannot reach the requested τ(M)"));
            }
            let block: Vec<f64> = (0..free).map(|_| rng.random::<f64>()).collect();
            let mut vals = vec![0.0; dim_s];
            vals.extend(blend_to_sum(&block, target));
            HermitianOperator::from_spectrum(vals, u)?
        } else {
            let r = random_psd_with(d, PositivityClass::PositiveSemidefinite, rng)?;
            let spec = r.eigh()?;
            let scaled: Vec<f64> = spec.values.iter().map(|v| (v / spec.max()).clamp(0.0, 1.0)).collect();
            HermitianOperator::from_spectrum(blend_to_sum(&scaled, tau_m * d as f64), spec.vectors.clone())?
        };
        Self::new(n, projector, measurement, gamma)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn projector(&self) -> &HermitianOperator {
        &self.projector
    }

    pub fn measurement(&self) -> &HermitianOperator {
        &self.measurement
    }

    pub fn subspace_dim(&self) -> usize {
        self.dim_s
    }

    /// `σ = dim S / 2^n`.
    pub fn sigma(&self) -> f64 {
        self.dim_s as f64 / (1usize << self.n) as f64
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        Ok(json!({
            "n": self.n,
            "dim_s": self.dim_s,
            "s": num(self.s),
            "t": num(self.t),
            "gamma": num(self.gamma),
            "projector": operator_witness(&self.projector)?,
            "measurement": operator_witness(&self.measurement)?,
        }))
    }
}

/// Maps values in `[0, 1]` affinely toward `0` or `1` so they sum to `target`.
fn blend_to_sum(values: &[f64], target: f64) -> Vec<f64> {
    let m = values.len() as f64;
    let sum: f64 = values.iter().sum();
    if sum >= target {
        let beta = if sum > 0.0 { target / sum } else { 0.0 };
        values.iter().map(|v| beta * v).collect()
    } else {
        let beta = (m - target) / (m - sum);
        values.iter().map(|v| beta * v + (1.0 - beta)).collect()
    }
}

/// `tr(M D_γ^{⊗n}(ρ_S))` with `ρ_S = Π_S / dim S`.
pub fn mixing_lhs(inst: &SubspaceInstance) -> Result<f64> {
    let noisy = DepolarizingFamily::new(inst.n, inst.gamma)?.apply(&inst.projector)?;
    let d = (1usize << inst.n) as f64;
    Ok(inst.measurement.ntrace_product(&noisy)? * d / inst.dim_s as f64)
}

/// The closed-form lower bound and, for `s, t > 0`, the exponents `(p, q)`
/// that produce it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingBound {
    pub bound: f64,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=GAMMA_MAX).contains(&gamma) {
        return Err(Error::range(format!(
            "gamma = {gamma} outside [0, {GAMMA_MAX}]; the bound diverges as γ → 1"
        )));
    }
    Ok(())
}

/// `exp(−½((s² + 2γst + t²)/(1−γ²) − s²))`.
pub fn mixing_bound_theorem(s: f64, t: f64, gamma: f64) -> Result<MixingBound> {
    check_gamma(gamma)?;
    if !(s >= 0.0 && t >= 0.0 && s.is_finite() && t.is_finite()) {
        return Err(Error::range(format!("s = {s}, t = {t} must be finite and nonnegative")));
    }
    let g2 = 1.0 - gamma * gamma;
    let bound = (-0.5 * ((s * s + 2.0 * gamma * s * t + t * t) / g2 - s * s)).exp();
    let (p, q) = if s > 0.0 && t > 0.0 {
        let r = t / s;
        (Some(g2 / (1.0 + gamma * r)), Some(r * g2 / (gamma + r)))
    } else {
        (None, None)
    };
    Ok(MixingBound { bound, p, q })
}

/// `σ^{(√α+γ)²/(1−γ²)}`.
pub fn mixing_bound_corollary(sigma: f64, alpha: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::range(format!("σ = {sigma} outside (0, 1]")));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::range(format!("α = {alpha} must be finite and nonnegative")));
    }
    let e = (alpha.sqrt() + gamma).powi(2) / (1.0 - gamma * gamma);
    Ok(sigma.powf(e))
}

/// Exact value against the theorem bound; `slack = lhs − bound`.
pub fn verify_mixing(inst: &SubspaceInstance) -> Result<VerificationReport> {
    let lhs = mixing_lhs(inst)?;
    let b = mixing_bound_theorem(inst.s, inst.t, inst.gamma)?;
    let mut r = VerificationReport::new("mixing-theorem", lhs, b.bound, lhs - b.bound)
        .with_num("s", inst.s)
        .with_num("t", inst.t)
        .with_num("gamma", inst.gamma)
        .with_param("qubits", inst.n)
        .with_param("dim_s", inst.dim_s);
    if let (Some(p), Some(q)) = (b.p, b.q) {
        r = r.with_num("p_opt", p).with_num("q_opt", q);
    }
    Ok(r)
}
