//! Adversarial search for small or negative slack.
//!
//! Operators are parameterized as `U diag(λ) U†` with `U = exp(iH)` for a
//! Hermitian generator `H`. Each restart runs a derivative-free random
//! direction descent; the first half of the restarts keep `H = 0` so the
//! diagonal (classical) case is searched first. Inside the hypothesis region
//! slack is evaluated through the checked verifiers; outside it through the
//! unchecked evaluators.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::channel::{Channel, DepolarizingFamily};
use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::matrix::ComplexMatrix;
use crate::pnorm::{pnorm, PExponent};
use crate::random::rng_from_seed;
use crate::report::VerificationReport;
use crate::verify::{
    forward_hc_gamma_threshold, forward_hc_unchecked, reverse_hc_gamma_threshold, reverse_hc_unchecked,
    reverse_holder_unchecked, reverse_minkowski_unchecked, strong_reverse_holder_gamma_threshold,
    strong_reverse_holder_unchecked, verify_expansivity, verify_forward_hc, verify_reverse_hc,
    verify_reverse_holder, verify_reverse_minkowski, verify_strong_reverse_holder, HcNoise, InequalityId,
};
use crate::Complex64;

/// Log-eigenvalues are kept in `[−LOG_RANGE, LOG_RANGE]`.
const LOG_RANGE: f64 = 6.0;

/// Fixed parameters of a search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    /// Operators act on `qubits` qubits (dimension `2^qubits`).
    pub qubits: usize,
}

impl SearchParams {
    fn dim(&self) -> usize {
        1 << self.qubits
    }
}

/// Inequalities the search can drive.
pub const SEARCHABLE: [InequalityId; 6] = [
    InequalityId::ReverseHc,
    InequalityId::ForwardHc,
    InequalityId::StrongReverseHolder,
    InequalityId::ReverseHolder,
    InequalityId::ReverseMinkowski,
    InequalityId::Expansivity,
];

fn operator_count(id: InequalityId) -> Result<usize> {
    match id {
        InequalityId::ReverseHc | InequalityId::ForwardHc | InequalityId::Expansivity => Ok(1),
        InequalityId::StrongReverseHolder | InequalityId::ReverseHolder | InequalityId::ReverseMinkowski => Ok(2),
        other => Err(Error::contract(format!("inequality `{other}` is not registered for search"))),
    }
}

/// Whether the parameters satisfy the hypotheses of the inequality.
pub fn in_hypothesis(id: InequalityId, params: &SearchParams) -> bool {
    let SearchParams { p, q, gamma, .. } = *params;
    let below = |bound: f64| gamma <= bound + 1e-12;
    match id {
        InequalityId::ReverseHc => q <= p && p <= 1.0 && below(reverse_hc_gamma_threshold(p, q)),
        InequalityId::ForwardHc => 1.0 <= p && p <= q && below(forward_hc_gamma_threshold(p, q)),
        InequalityId::StrongReverseHolder => p <= 1.0 && q <= 1.0 && below(strong_reverse_holder_gamma_threshold(p, q)),
        InequalityId::ReverseHolder => p > 0.0 && p <= 1.0,
        InequalityId::ReverseMinkowski => p < 1.0 && p != 0.0,
        InequalityId::Expansivity => p < 1.0,
        _ => false,
    }
}

fn positive_operators(id: InequalityId) -> bool {
    id != InequalityId::ForwardHc
}

/// Evaluates the inequality on explicit operators, through the checked
/// verifier when the parameters are inside the hypotheses.
pub fn evaluate(id: InequalityId, params: &SearchParams, ops: &[HermitianOperator]) -> Result<VerificationReport> {
    let need = operator_count(id)?;
    if ops.len() != need {
        return Err(Error::contract(format!("`{id}` needs {need} operators, got {}", ops.len())));
    }
    let inside = in_hypothesis(id, params);
    let SearchParams { p, q, gamma, qubits } = *params;
    let noise = DepolarizingFamily::new(qubits, gamma)?;
    let r = match (id, inside) {
        (InequalityId::ReverseHc, true) => verify_reverse_hc(HcNoise::Depolarizing(noise), &ops[0], p, q)?,
        (InequalityId::ReverseHc, false) => reverse_hc_unchecked(HcNoise::Depolarizing(noise), &ops[0], p, q)?,
        (InequalityId::ForwardHc, true) => verify_forward_hc(HcNoise::Depolarizing(noise), &ops[0], p, q)?,
        (InequalityId::ForwardHc, false) => forward_hc_unchecked(HcNoise::Depolarizing(noise), &ops[0], p, q)?,
        (InequalityId::StrongReverseHolder, true) => verify_strong_reverse_holder(noise, &ops[0], &ops[1], p, q)?,
        (InequalityId::StrongReverseHolder, false) => strong_reverse_holder_unchecked(noise, &ops[0], &ops[1], p, q)?,
        (InequalityId::ReverseHolder, true) => verify_reverse_holder(&ops[0], &ops[1], p)?,
        (InequalityId::ReverseHolder, false) => reverse_holder_unchecked(&ops[0], &ops[1], p)?,
        (InequalityId::ReverseMinkowski, true) => verify_reverse_minkowski(&ops[0], &ops[1], p)?,
        (InequalityId::ReverseMinkowski, false) => reverse_minkowski_unchecked(&ops[0], &ops[1], p)?,
        (InequalityId::Expansivity, true) => verify_expansivity(&noise, &ops[0], p)?.with_num("gamma", gamma),
        (InequalityId::Expansivity, false) => {
            let e = PExponent::new(p)?;
            let lhs = pnorm(&noise.apply(&ops[0])?, e)?;
            let rhs = pnorm(&ops[0], e)?;
            VerificationReport::new(id.as_str(), lhs, rhs, lhs - rhs).with_num("p", p).with_num("gamma", gamma)
        }
        _ => return Err(Error::contract(format!("inequality `{id}` is not registered for search"))),
    };
    Ok(r.with_param("in_hypothesis", inside))
}

/// The construction data of one operator: `U diag(values) U†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorWitness {
    pub eigenvalues: Vec<f64>,
    /// Columns of `U`, each entry `[re, im]`.
    pub unitary_columns: Vec<Vec<[f64; 2]>>,
}

impl OperatorWitness {
    fn new(values: Vec<f64>, u: &ComplexMatrix) -> Self {
        let d = u.dim();
        Self {
            eigenvalues: values,
            unitary_columns: (0..d).map(|j| u.column(j).iter().map(|z| [z.re, z.im]).collect()).collect(),
        }
    }

    pub fn build(&self) -> Result<HermitianOperator> {
        let d = self.eigenvalues.len();
        if self.unitary_columns.len() != d || self.unitary_columns.iter().any(|c| c.len() != d) {
            return Err(Error::contract("witness unitary has the wrong shape"));
        }
        let mut u = ComplexMatrix::zeros(d);
        for (j, col) in self.unitary_columns.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                u.set(i, j, Complex64::new(z[0], z[1]));
            }
        }
        HermitianOperator::from_spectrum(self.eigenvalues.clone(), u)
    }
}

/// Re-evaluates a serialized witness (`{"operators": [OperatorWitness…]}`).
pub fn replay_witness(id: InequalityId, params: &SearchParams, witness: &Value) -> Result<VerificationReport> {
    let ops: Vec<OperatorWitness> = serde_json::from_value(witness["operators"].clone())
        .map_err(|e| Error::contract(format!("malformed witness: {e}")))?;
    let built = ops.iter().map(OperatorWitness::build).collect::<Result<Vec<_>>>()?;
    evaluate(id, params, &built)
}

struct Layout {
    ops: usize,
    d: usize,
    positive: bool,
    diagonal: bool,
}

impl Layout {
    fn per_op(&self) -> usize {
        if self.diagonal {
            self.d
        } else {
            self.d + self.d * self.d
        }
    }

    fn len(&self) -> usize {
        self.ops * self.per_op()
    }

    fn clamp(&self, x: &mut [f64]) {
        let lim = if self.positive { LOG_RANGE } else { 1.0 };
        for o in 0..self.ops {
            for v in &mut x[o * self.per_op()..o * self.per_op() + self.d] {
                *v = v.clamp(-lim, lim);
            }
        }
    }

    fn decode(&self, x: &[f64]) -> Vec<OperatorWitness> {
        let d = self.d;
        (0..self.ops)
            .map(|o| {
                let chunk = &x[o * self.per_op()..(o + 1) * self.per_op()];
                let raw = &chunk[..d];
                let values: Vec<f64> = if self.positive {
                    raw.iter().map(|v| v.exp()).collect()
                } else {
                    raw.to_vec()
                };
                let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
                let values: Vec<f64> = values.iter().map(|v| v / scale).collect();
                let u = if self.diagonal {
                    ComplexMatrix::identity(d)
                } else {
                    generator_unitary(d, &chunk[d..])
                };
                OperatorWitness::new(values, &u)
            })
            .collect()
    }
}

/// `exp(iH)` for the Hermitian `H` with diagonal `g[..d]` and strictly upper
/// entries taken pairwise (re, im) from the rest.
fn generator_unitary(d: usize, g: &[f64]) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d);
    let mut k = d;
    for i in 0..d {
        h.set(i, i, Complex64::new(0.0, g[i]));
        for j in i + 1..d {
            let z = Complex64::new(g[k], g[k + 1]);
            k += 2;
            // i·H with H_ij = z, H_ji = conj(z).
            h.set(i, j, Complex64::i() * z);
            h.set(j, i, Complex64::i() * z.conj());
        }
    }
    h.expm()
}

/// Outcome of [`minimize_slack`].
#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub inequality_id: String,
    pub params: SearchParams,
    pub in_hypothesis: bool,
    pub best_slack: f64,
    /// The report at the best point, with the witness attached.
    pub report: VerificationReport,
    pub evaluations: usize,
    pub restarts: usize,
}

struct RestartResult {
    slack: f64,
    index: usize,
    report: Option<VerificationReport>,
    witness: Vec<OperatorWitness>,
    evaluations: usize,
}

fn run_restart(id: InequalityId, params: &SearchParams, layout: &Layout, budget: usize, seed: u64, index: usize) -> RestartResult {
    let mut rng = rng_from_seed(seed);
    let n = layout.len();
    let eval = |x: &[f64]| -> (f64, Option<VerificationReport>, Vec<OperatorWitness>) {
        let w = layout.decode(x);
        let built: Result<Vec<HermitianOperator>> = w.iter().map(OperatorWitness::build).collect();
        match built.and_then(|ops| evaluate(id, params, &ops)) {
            Ok(r) if r.slack.is_finite() => (r.slack, Some(r), w),
            _ => (f64::INFINITY, None, w),
        }
    };
    let per = layout.per_op();
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            if i % per < layout.d {
                if layout.positive {
                    rng.random_range(-2.0..2.0)
                } else {
                    rng.random_range(-1.0..1.0)
                }
            } else {
                0.5 * rng.sample::<f64, _>(StandardNormal)
            }
        })
        .collect();
    layout.clamp(&mut x);
    let (mut best, mut report, mut witness) = eval(&x);
    let mut evaluations = 1;
    let mut step = 1.0;
    while evaluations < budget {
        let dir: Vec<f64> = if rng.random_bool(0.5) {
            let mut e = vec![0.0; n];
            e[rng.random_range(0..n)] = 1.0;
            e
        } else {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            g.iter().map(|v| v / norm).collect()
        };
        let mut improved = false;
        for sign in [1.0, -1.0] {
            if evaluations >= budget {
                break;
            }
            let mut y: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + sign * step * b).collect();
            layout.clamp(&mut y);
            let (v, r, w) = eval(&y);
            evaluations += 1;
            if v < best {
                best = v;
                report = r;
                witness = w;
                x = y;
                improved = true;
                break;
            }
        }
        if improved {
            step = (step * 1.5).min(2.0);
        } else {
            step *= 0.5;
            if step < 1e-7 {
                step = 1.0;
            }
        }
    }
    RestartResult {
        slack: best,
        index,
        report,
        witness,
        evaluations,
    }
}

/// Minimizes the slack of `id` over operators with `budget` evaluations split
/// across `restarts` restarts (restart `r` uses seed `seed + r`). Ties are
/// broken by restart index, so the result is deterministic.
pub fn minimize_slack(
    id: InequalityId,
    params: &SearchParams,
    budget: usize,
    restarts: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    let ops = operator_count(id)?;
    if restarts == 0 || budget < restarts {
        return Err(Error::range("search needs at least one evaluation per restart"));
    }
    DepolarizingFamily::new(params.qubits, params.gamma)?;
    let d = params.dim();
    let per = budget / restarts;
    let diagonal_restarts = restarts.div_ceil(2);
    let results: Vec<RestartResult> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let layout = Layout {
                ops,
                d,
                positive: positive_operators(id),
                diagonal: r < diagonal_restarts,
            };
            run_restart(id, params, &layout, per, seed.wrapping_add(r as u64), r)
        })
        .collect();
    let evaluations = results.iter().map(|r| r.evaluations).sum();
    let best = results
        .into_iter()
        .filter(|r| r.report.is_some())
        .min_by(|a, b| a.slack.total_cmp(&b.slack).then(a.index.cmp(&b.index)))
        .ok_or_else(|| Error::contract("no restart produced a finite evaluation"))?;
    let report = best
        .report
        .expect("filtered")
        .with_witness(json!({ "operators": best.witness }));
    Ok(SearchOutcome {
        inequality_id: id.as_str().to_string(),
        params: *params,
        in_hypothesis: in_hypothesis(id, params),
        best_slack: best.slack,
        report,
        evaluations,
        restarts,
    })
}

/// One grid point of a sharpness profile.
#[derive(Debug, Clone, Serialize)]
pub struct ProfilePoint {
    pub gamma: f64,
    pub in_hypothesis: bool,
    pub best_slack: f64,
    pub pass: bool,
    pub report: VerificationReport,
}

/// Minimal slack found at each `γ` of the grid.
#[allow(clippy::too_many_arguments)]
pub fn sharpness_profile(
    id: InequalityId,
    p: f64,
    q: f64,
    qubits: usize,
    gammas: &[f64],
    budget: usize,
    restarts: usize,
    seed: u64,
) -> Result<Vec<ProfilePoint>> {
    gammas
        .iter()
        .map(|&gamma| {
            let params = SearchParams { p, q, gamma, qubits };
            let o = minimize_slack(id, &params, budget, restarts, seed)?;
            Ok(ProfilePoint {
                gamma,
                in_hypothesis: o.in_hypothesis,
                best_slack: o.best_slack,
                pass: o.report.pass,
                report: o.report,
            })
        })
        .collect()
}

/// Smallest grid `γ` at which a violation was found.
pub fn first_violation(profile: &[ProfilePoint]) -> Option<f64> {
    profile.iter().find(|pt| !pt.pass).map(|pt| pt.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_ids_are_rejected() {
        let params = SearchParams { p: 0.5, q: 0.5, gamma: 0.5, qubits: 1 };
        assert!(minimize_slack(InequalityId::Gross, &params, 100, 2, 0).is_err());
    }

    #[test]
    fn generator_gives_unitary() {
        let g: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let u = generator_unitary(4, &g);
        assert!(u.adjoint().matmul(&u).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-13);
    }

    #[test]
    fn finds_violation_outside_region() {
        let params = SearchParams { p: 1.0, q: 0.5, gamma: 1.0, qubits: 1 };
        let f = HermitianOperator::from_real_diagonal(&[1.5, 0.5]).unwrap();
        let r = evaluate(InequalityId::ReverseHc, &params, &[f]).unwrap();
        assert!((r.slack + 0.0669872981077807).abs() < 1e-12);
        let o = minimize_slack(InequalityId::ReverseHc, &params, 2000, 4, 3).unwrap();
        assert!(!o.in_hypothesis && o.best_slack < -0.067);
    }

    #[test]
    fn no_violation_at_boundary() {
        let (p, q) = (0.5, -1.0);
        let params = SearchParams { p, q, gamma: reverse_hc_gamma_threshold(p, q), qubits: 1 };
        let o = minimize_slack(InequalityId::ReverseHc, &params, 2000, 4, 5).unwrap();
        assert!(o.in_hypothesis);
        assert!(o.best_slack >= -1e-8, "{o:?}");
        assert!(o.report.pass);
    }

    #[test]
    fn witness_replays_exactly() {
        let params = SearchParams { p: 0.5, q: 0.2, gamma: 0.9, qubits: 1 };
        let o = minimize_slack(InequalityId::StrongReverseHolder, &params, 400, 2, 1).unwrap();
        let replay = replay_witness(InequalityId::StrongReverseHolder, &params, o.report.witness.as_ref().unwrap()).unwrap();
        assert!((replay.slack - o.best_slack).abs() < 1e-12);
        let text = serde_json::to_string(&o.report).unwrap();
        let back: VerificationReport = serde_json::from_str(&text).unwrap();
        let replay = replay_witness(InequalityId::StrongReverseHolder, &params, back.witness.as_ref().unwrap()).unwrap();
        assert!((replay.slack - o.best_slack).abs() < 1e-12);
    }

    #[test]
    fn deterministic_given_seed() {
        let params = SearchParams { p: 0.5, q: -1.0, gamma: 0.6, qubits: 1 };
        let a = minimize_slack(InequalityId::ReverseHc, &params, 300, 3, 9).unwrap();
        let b = minimize_slack(InequalityId::ReverseHc, &params, 300, 3, 9).unwrap();
        assert_eq!(a.best_slack, b.best_slack);
    }

    #[test]
    fn profile_changes_sign_above_threshold() {
        let grid: Vec<f64> = (0..=8).map(|i| 0.3 + 0.05 * i as f64).collect();
        let profile = sharpness_profile(InequalityId::ReverseHc, 0.5, -1.0, 1, &grid, 2000, 4, 0).unwrap();
        for pt in &profile {
            eprintln!("{} {} {}", pt.gamma, pt.in_hypothesis, pt.best_slack);
            if pt.in_hypothesis {
                assert!(pt.pass);
            }
        }
        let g = first_violation(&profile).unwrap();
        assert!((0.5..=0.7).contains(&g), "{g}");
    }
}
