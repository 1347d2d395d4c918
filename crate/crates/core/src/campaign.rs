//! Randomized campaigns: one seeded trial per index, sampled operators and
//! parameters, one report per trial.
//!
//! Trial `i` draws everything from the generator seeded with `seed + i`, so
//! a campaign is reproducible trial by trial and parallel runs merge in
//! index order.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{DepolarizingFamily, KrausChannel, LindbladGenerator};
use crate::error::{Error, Result};
use crate::hermitian::{HermitianOperator, PositivityClass};
use crate::random::{haar_unitary, random_hermitian_with, random_psd_with, rng_from_seed, DetRng};
use crate::report::VerificationReport;
use crate::verify::{
    forward_hc_gamma_threshold, reverse_hc_gamma_threshold, strong_reverse_holder_gamma_threshold,
    verify_expansivity, verify_forward_hc, verify_gross, verify_plsi, verify_reverse_hc, verify_reverse_holder,
    verify_reverse_minkowski, verify_strong_reverse_holder, verify_stroock_varopoulos, verify_variational, HcNoise,
    InequalityId,
};

/// Shapes of random positive operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// Wishart `G†G` shifted to be definite.
    Wishart,
    /// Haar eigenbasis with log-uniform eigenvalues over `[e^{−5}, e^5]`.
    WideSpectrum,
    /// Haar eigenbasis with at least one zero eigenvalue.
    Singular,
    /// Diagonal with log-uniform entries.
    Diagonal,
}

/// Samples a positive operator; `definite` excludes [`OperatorKind::Singular`].
pub fn sample_positive(d: usize, definite: bool, rng: &mut DetRng) -> Result<HermitianOperator> {
    let kinds: &[OperatorKind] = if definite {
        &[OperatorKind::Wishart, OperatorKind::WideSpectrum, OperatorKind::Diagonal]
    } else {
        &[OperatorKind::Wishart, OperatorKind::WideSpectrum, OperatorKind::Singular, OperatorKind::Diagonal]
    };
    let kind = kinds[rng.random_range(0..kinds.len())];
    sample_kind(d, kind, rng)
}

pub fn sample_kind(d: usize, kind: OperatorKind, rng: &mut DetRng) -> Result<HermitianOperator> {
    let log_uniform = |rng: &mut DetRng| rng.random_range(-5.0f64..5.0).exp();
    match kind {
        OperatorKind::Wishart => random_psd_with(d, PositivityClass::PositiveDefinite, rng),
        OperatorKind::WideSpectrum => {
            let vals: Vec<f64> = (0..d).map(|_| log_uniform(rng)).collect();
            HermitianOperator::from_spectrum(vals, haar_unitary(d, rng))
        }
        OperatorKind::Singular => {
            let mut vals: Vec<f64> = (0..d).map(|_| log_uniform(rng)).collect();
            let zeros = if d > 1 { rng.random_range(1..d) } else { 0 };
            vals.iter_mut().take(zeros).for_each(|v| *v = 0.0);
            HermitianOperator::from_spectrum(vals, haar_unitary(d, rng))
        }
        OperatorKind::Diagonal => {
            let vals: Vec<f64> = (0..d).map(|_| log_uniform(rng)).collect();
            HermitianOperator::from_real_diagonal(&vals)
        }
    }
}

/// Fixed and default parameters of a campaign. Unset exponents are sampled
/// per trial; unset `γ` defaults to the boundary of the hypothesis.
#[derive(Debug, Clone, Serialize)]
pub struct CampaignConfig {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub gamma: Option<f64>,
    pub qubits: usize,
    /// Operator dimension for the inequalities that are not tied to qubits.
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Log-Sobolev constant supplied to the p-LSI check.
    pub alpha: f64,
    /// Relative tolerance override.
    pub rel_tol: Option<f64>,
    /// Sampled feasible points per variational trial.
    pub variational_samples: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            p: None,
            q: None,
            gamma: None,
            qubits: 1,
            dim: 2,
            trials: 100,
            seed: 0,
            alpha: 2.0,
            rel_tol: None,
            variational_samples: 50,
        }
    }
}

/// Reverse-direction pair `q ≤ p ≤ 1`: mostly `p ~ U[−3, 1]`,
/// `q ~ U[−10, p]`, with occasional `p = 1`, `p = 0` and `q = p`.
pub fn sample_reverse_pair(rng: &mut DetRng) -> (f64, f64) {
    let r: f64 = rng.random();
    let p = if r < 0.05 {
        1.0
    } else if r < 0.1 {
        0.0
    } else {
        rng.random_range(-3.0..1.0)
    };
    let q = if rng.random_bool(0.05) { p } else { rng.random_range(-10.0..=p) };
    (p, q)
}

/// `p ~ U[1, 3]`, `q ~ U[p, 6]`.
pub fn sample_forward_pair(rng: &mut DetRng) -> (f64, f64) {
    let p = rng.random_range(1.0..3.0);
    (p, rng.random_range(p..6.0))
}

/// A nonzero exponent in `[lo, hi)`.
fn nonzero(rng: &mut DetRng, lo: f64, hi: f64) -> f64 {
    loop {
        let p = rng.random_range(lo..hi);
        if p.abs() > 1e-3 {
            return p;
        }
    }
}

/// An exponent in `(0, 2] \ {1}` bounded away from 1.
fn lsi_exponent(rng: &mut DetRng) -> f64 {
    loop {
        let p: f64 = rng.random_range(0.05..=2.0);
        if (p - 1.0).abs() > 1e-3 {
            return p;
        }
    }
}

/// The supplied `γ`, or the threshold; a NaN threshold means `p, q` lie
/// outside the inequality's range.
fn boundary_gamma(gamma: Option<f64>, threshold: f64, id: InequalityId, p: f64, q: f64) -> Result<f64> {
    if threshold.is_nan() {
        return Err(Error::contract(format!("`{id}` is undefined for p = {p}, q = {q}")));
    }
    Ok(gamma.unwrap_or(threshold))
}

fn site_generator(qubits: usize) -> Result<LindbladGenerator> {
    LindbladGenerator::depolarizing_site_sum(qubits)
}

/// Runs trial `index` of a campaign for `id`.
pub fn run_trial(id: InequalityId, cfg: &CampaignConfig, generator: Option<&LindbladGenerator>, index: usize) -> Result<VerificationReport> {
    let seed = cfg.seed.wrapping_add(index as u64);
    let mut rng = rng_from_seed(seed);
    let n = cfg.qubits;
    let dq = 1usize << n;
    let d = cfg.dim;
    let report = match id {
        InequalityId::ReverseHc => {
            let (p, q) = match (cfg.p, cfg.q) {
                (Some(p), Some(q)) => (p, q),
                (Some(p), None) => (p, rng.random_range(-10.0..=p.min(1.0))),
                (None, Some(q)) => (rng.random_range(q.min(1.0)..=1.0), q),
                (None, None) => sample_reverse_pair(&mut rng),
            };
            let gamma = boundary_gamma(cfg.gamma, reverse_hc_gamma_threshold(p, q), id, p, q)?;
            let f = sample_positive(dq, p <= 0.0 || q <= 0.0, &mut rng)?;
            verify_reverse_hc(HcNoise::Depolarizing(DepolarizingFamily::new(n, gamma)?), &f, p, q)?
        }
        InequalityId::ForwardHc => {
            let (p, q) = match (cfg.p, cfg.q) {
                (Some(p), Some(q)) => (p, q),
                (Some(p), None) => (p, rng.random_range(p.max(1.0)..6.0f64.max(p + 1.0))),
                (None, Some(q)) => (rng.random_range(1.0..=q.max(1.0)), q),
                (None, None) => sample_forward_pair(&mut rng),
            };
            let gamma = boundary_gamma(cfg.gamma, forward_hc_gamma_threshold(p, q), id, p, q)?;
            let f = random_hermitian_with(dq, &mut rng)?;
            verify_forward_hc(HcNoise::Depolarizing(DepolarizingFamily::new(n, gamma)?), &f, p, q)?
        }
        InequalityId::StrongReverseHolder => {
            let p = cfg.p.unwrap_or_else(|| rng.random_range(-3.0..=1.0));
            let q = cfg.q.unwrap_or_else(|| rng.random_range(-3.0..=1.0));
            let gamma = boundary_gamma(cfg.gamma, strong_reverse_holder_gamma_threshold(p, q), id, p, q)?;
            let f = sample_positive(dq, p <= 0.0, &mut rng)?;
            let g = sample_positive(dq, q <= 0.0, &mut rng)?;
            verify_strong_reverse_holder(DepolarizingFamily::new(n, gamma)?, &f, &g, p, q)?
        }
        InequalityId::ReverseHolder => {
            let p = cfg.p.unwrap_or_else(|| if rng.random_bool(0.05) { 1.0 } else { rng.random_range(1e-3..1.0) });
            let f = sample_positive(d, false, &mut rng)?;
            let g = sample_positive(d, true, &mut rng)?;
            verify_reverse_holder(&f, &g, p)?
        }
        InequalityId::ReverseMinkowski => {
            let p = cfg.p.unwrap_or_else(|| nonzero(&mut rng, -3.0, 1.0));
            let f = sample_positive(d, p < 0.0, &mut rng)?;
            let g = sample_positive(d, p < 0.0, &mut rng)?;
            verify_reverse_minkowski(&f, &g, p)?
        }
        InequalityId::Variational => {
            let p = cfg.p.unwrap_or_else(|| nonzero(&mut rng, -3.0, 1.0));
            let f = sample_positive(d, true, &mut rng)?;
            let sub_seed = rng.random();
            verify_variational(&f, p, cfg.variational_samples, sub_seed)?
        }
        InequalityId::Expansivity => {
            let p = cfg.p.unwrap_or_else(|| rng.random_range(-3.0..1.0));
            let terms = rng.random_range(1..=4);
            let t = KrausChannel::random_unitary_mixture(d, terms, &mut rng)?;
            let f = sample_positive(d, p <= 0.0, &mut rng)?;
            verify_expansivity(&t, &f, p)?
        }
        InequalityId::StroockVaropoulos => {
            let owned;
            let l = match generator {
                Some(l) => l,
                None => {
                    owned = site_generator(n)?;
                    &owned
                }
            };
            let (a, b): (f64, f64) = (rng.random_range(0.05..=2.0), rng.random_range(0.05..=2.0));
            let p = cfg.p.unwrap_or(a.max(b));
            let q = cfg.q.unwrap_or(a.min(b));
            let g = sample_positive(dq, true, &mut rng)?;
            verify_stroock_varopoulos(l, &g, p, q)?
        }
        InequalityId::Gross | InequalityId::Plsi => {
            let owned;
            let l = match generator {
                Some(l) => l,
                None => {
                    owned = site_generator(n)?;
                    &owned
                }
            };
            let p = cfg.p.unwrap_or_else(|| lsi_exponent(&mut rng));
            let f = sample_positive(dq, p < 1.0, &mut rng)?;
            if id == InequalityId::Gross {
                verify_gross(l, &f, p)?
            } else {
                verify_plsi(l, &f, p, cfg.alpha)?
            }
        }
    };
    let report = match cfg.rel_tol {
        Some(t) => report.with_relative_tol(t),
        None => report,
    };
    Ok(report.with_param("trial", index).with_param("seed", seed))
}

/// Runs `cfg.trials` trials in parallel; reports come back in trial order.
pub fn run_campaign(id: InequalityId, cfg: &CampaignConfig) -> Result<Vec<VerificationReport>> {
    if cfg.qubits == 0 || cfg.dim == 0 {
        return Err(Error::range("dimensions must be positive"));
    }
    let generator = match id {
        InequalityId::StroockVaropoulos | InequalityId::Gross | InequalityId::Plsi => Some(site_generator(cfg.qubits)?),
        _ => None,
    };
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(id, cfg, generator.as_ref(), i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_inequality_runs() {
        for id in InequalityId::ALL {
            let cfg = CampaignConfig { trials: 20, qubits: 2, dim: 3, seed: 4, ..Default::default() };
            let reports = run_campaign(id, &cfg).unwrap();
            assert_eq!(reports.len(), 20);
            for r in &reports {
                assert!(r.pass, "{id}: {r:?}");
            }
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = CampaignConfig { trials: 5, seed: 11, ..Default::default() };
        let a = run_campaign(InequalityId::ReverseHc, &cfg).unwrap();
        let b = run_campaign(InequalityId::ReverseHc, &cfg).unwrap();
        assert_eq!(a, b);
        let single = run_trial(InequalityId::ReverseHc, &cfg, None, 3).unwrap();
        assert_eq!(single, a[3]);
    }

    #[test]
    fn out_of_range_parameters_fail() {
        let cfg = CampaignConfig { p: Some(2.0), q: Some(0.5), trials: 1, ..Default::default() };
        assert!(matches!(run_campaign(InequalityId::ReverseHc, &cfg), Err(Error::Contract(_))));
    }

    #[test]
    fn singular_samples_are_singular() {
        let mut rng = rng_from_seed(0);
        let f = sample_kind(4, OperatorKind::Singular, &mut rng).unwrap();
        assert!(f.eigh().unwrap().min().abs() < 1e-12);
    }
}
