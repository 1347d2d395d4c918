//! One verifier per inequality. Each returns a [`VerificationReport`] whose
//! slack is positive when the inequality holds.
//!
//! Verifiers enforce the hypotheses of the inequality they check and return
//! [`Error::Contract`] outside them. The `*_unchecked` evaluators skip the
//! parameter hypotheses (but not the domain requirements of the norms) and
//! exist for [`crate::search`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::channel::{Channel, DepolarizingFamily, LindbladGenerator};
use crate::error::{Error, Result};
use crate::functional::{dirichlet_energy, dirichlet_form_centered, entropy, spectral_dirichlet_form};
use crate::hermitian::{HermitianOperator, PositivityClass, EPS_PD};
use crate::pnorm::{pnorm, power_mean, PExponent};
use crate::random::{random_psd_with, random_unitary_near_identity, rng_from_seed};
use crate::report::{num, VerificationReport};

/// Slack allowed on a γ or `t` threshold supplied at the boundary.
const THRESHOLD_EPS: f64 = 1e-12;

/// Names of the registered inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityId {
    ReverseHolder,
    ReverseMinkowski,
    Variational,
    Expansivity,
    #[serde(rename = "sv")]
    StroockVaropoulos,
    Gross,
    Plsi,
    ReverseHc,
    ForwardHc,
    StrongReverseHolder,
}

impl InequalityId {
    pub const ALL: [InequalityId; 10] = [
        InequalityId::ReverseHolder,
        InequalityId::ReverseMinkowski,
        InequalityId::Variational,
        InequalityId::Expansivity,
        InequalityId::StroockVaropoulos,
        InequalityId::Gross,
        InequalityId::Plsi,
        InequalityId::ReverseHc,
        InequalityId::ForwardHc,
        InequalityId::StrongReverseHolder,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::ReverseHolder => "reverse-holder",
            InequalityId::ReverseMinkowski => "reverse-minkowski",
            InequalityId::Variational => "variational",
            InequalityId::Expansivity => "expansivity",
            InequalityId::StroockVaropoulos => "sv",
            InequalityId::Gross => "gross",
            InequalityId::Plsi => "plsi",
            InequalityId::ReverseHc => "reverse-hc",
            InequalityId::ForwardHc => "forward-hc",
            InequalityId::StrongReverseHolder => "strong-reverse-holder",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::contract(format!("unknown inequality id `{s}`")))
    }
}

fn exponent(p: f64) -> Result<PExponent> {
    PExponent::new(p)
}

fn require_psd(f: &HermitianOperator, what: &str) -> Result<()> {
    if f.classify(EPS_PD)? == PositivityClass::Indefinite {
        return Err(Error::domain(format!("{what} must be positive semidefinite"), f.eigh()?.min()));
    }
    Ok(())
}

fn same_dim(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

fn within(value: f64, threshold: f64) -> bool {
    value <= threshold + THRESHOLD_EPS * threshold.abs().max(1.0)
}

/// Reverse threshold `√((1−p)/(1−q))` for `q ≤ p ≤ 1`.
pub fn reverse_hc_gamma_threshold(p: f64, q: f64) -> f64 {
    if p == q {
        1.0
    } else if q == f64::NEG_INFINITY || p == 1.0 {
        0.0
    } else {
        ((1.0 - p) / (1.0 - q)).sqrt()
    }
}

/// Forward threshold `√((p−1)/(q−1))` for `1 ≤ p ≤ q`.
pub fn forward_hc_gamma_threshold(p: f64, q: f64) -> f64 {
    if p == q {
        1.0
    } else if q == f64::INFINITY || p == 1.0 {
        0.0
    } else {
        ((p - 1.0) / (q - 1.0)).sqrt()
    }
}

/// Reverse time threshold `(α/4) ln((1−q)/(1−p))`.
pub fn reverse_hc_time_threshold(alpha: f64, p: f64, q: f64) -> f64 {
    if p == q {
        0.0
    } else if q == f64::NEG_INFINITY || p == 1.0 {
        f64::INFINITY
    } else {
        alpha / 4.0 * ((1.0 - q) / (1.0 - p)).ln()
    }
}

/// Forward time threshold `(α/4) ln((q−1)/(p−1))`.
pub fn forward_hc_time_threshold(alpha: f64, p: f64, q: f64) -> f64 {
    if p == q {
        0.0
    } else if q == f64::INFINITY || p == 1.0 {
        f64::INFINITY
    } else {
        alpha / 4.0 * ((q - 1.0) / (p - 1.0)).ln()
    }
}

/// `√((1−p)(1−q))`, capped at 1 since `γ ≤ 1` anyway.
pub fn strong_reverse_holder_gamma_threshold(p: f64, q: f64) -> f64 {
    ((1.0 - p) * (1.0 - q)).sqrt().min(1.0)
}

// ---------------------------------------------------------------------------
// Section 2 lemmas

/// `τ(fg) ≥ ‖f‖_p ‖g‖_{p′}` for `f ≥ 0`, `g > 0`, `0 < p ≤ 1`. At `p = 1`
/// the conjugate is the left limit `p′ = −∞`.
pub fn verify_reverse_holder(f: &HermitianOperator, g: &HermitianOperator, p: f64) -> Result<VerificationReport> {
    if p == 0.0 {
        return Err(Error::contract("reverse Hölder at p = 0 has no conjugate exponent"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::contract(format!("reverse Hölder needs 0 < p ≤ 1, got {p}")));
    }
    reverse_holder_unchecked(f, g, p)
}

pub fn reverse_holder_unchecked(f: &HermitianOperator, g: &HermitianOperator, p: f64) -> Result<VerificationReport> {
    same_dim(f, g)?;
    require_psd(f, "f")?;
    g.require_pd(EPS_PD, "g")?;
    let conj = if p == 1.0 {
        PExponent::NegInf
    } else {
        exponent(p / (p - 1.0))?
    };
    let lhs = f.ntrace_product(g)?;
    let rhs = pnorm(f, exponent(p)?)? * pnorm(g, conj)?;
    Ok(VerificationReport::new(InequalityId::ReverseHolder.as_str(), lhs, rhs, lhs - rhs)
        .with_num("p", p)
        .with_num("p_conjugate", conj.value())
        .with_param("dim", f.dim()))
}

/// `‖f + g‖_p ≥ ‖f‖_p + ‖g‖_p` for `p < 1`, `p ≠ 0`.
pub fn verify_reverse_minkowski(f: &HermitianOperator, g: &HermitianOperator, p: f64) -> Result<VerificationReport> {
    if !(p < 1.0) || p == 0.0 {
        return Err(Error::contract(format!("reverse Minkowski needs p < 1, p ≠ 0, got {p}")));
    }
    reverse_minkowski_unchecked(f, g, p)
}

pub fn reverse_minkowski_unchecked(f: &HermitianOperator, g: &HermitianOperator, p: f64) -> Result<VerificationReport> {
    same_dim(f, g)?;
    require_psd(f, "f")?;
    require_psd(g, "g")?;
    let e = exponent(p)?;
    let lhs = pnorm(&f.add(g)?, e)?;
    let rhs = pnorm(f, e)? + pnorm(g, e)?;
    Ok(VerificationReport::new(InequalityId::ReverseMinkowski.as_str(), lhs, rhs, lhs - rhs)
        .with_num("p", p)
        .with_param("dim", f.dim()))
}

/// The analytic minimizer `g* = f^{p−1}/‖f^{p−1}‖_{p′}` of the variational
/// formula for `‖f‖_p`.
pub fn variational_minimizer(f: &HermitianOperator, p: f64) -> Result<HermitianOperator> {
    f.require_pd(EPS_PD, "variational formula needs f > 0")?;
    // f^{p−1} is definite even when its condition number exceeds 1/ε_pd, so
    // normalize from f's spectrum rather than a clamped recomputation.
    let spec = f.eigh()?;
    let h: Vec<f64> = spec.values.iter().map(|x| x.powf(p - 1.0)).collect();
    let c = power_mean(&h, p / (p - 1.0));
    HermitianOperator::from_spectrum(h.iter().map(|v| v / c).collect(), spec.vectors.clone())
}

/// Two-sided check of `‖f‖_p = inf{τ(fg) : g > 0, ‖g‖_{p′} ≥ 1}`: sampled
/// feasible `g` never go below `‖f‖_p`, and `g*` attains it.
///
/// `lhs` is the smallest value seen (samples and `g*`), `rhs = ‖f‖_p`, and
/// `slack = min(lhs − rhs, −|τ(fg*) − rhs|)`, so the report passes only if
/// both directions hold to tolerance.
pub fn verify_variational(f: &HermitianOperator, p: f64, samples: usize, seed: u64) -> Result<VerificationReport> {
    if !(p < 1.0) || p == 0.0 {
        return Err(Error::contract(format!("variational formula needs p < 1, p ≠ 0, got {p}")));
    }
    let conj = exponent(p / (p - 1.0))?;
    let norm = pnorm(f, exponent(p)?)?;
    let g_star = variational_minimizer(f, p)?;
    let attained = f.ntrace_product(&g_star)?;
    let d = f.dim();
    let mut rng = rng_from_seed(seed);
    let mut best_sampled = f64::INFINITY;
    for i in 0..samples {
        let g = if i % 2 == 0 {
            random_psd_with(d, PositivityClass::PositiveDefinite, &mut rng)?
        } else {
            let u = random_unitary_near_identity(d, 0.3, &mut rng);
            let spec = g_star.eigh()?;
            let vals: Vec<f64> = spec.values.iter().map(|v| v * rng.random_range(0.5..2.0)).collect();
            let c = power_mean(&vals, p / (p - 1.0));
            let scaled = vals.iter().map(|v| v / c).collect();
            HermitianOperator::from_spectrum(scaled, spec.vectors.clone())?.conjugate_by(&u)?
        };
        let g = if i % 2 == 0 { g.scale(1.0 / pnorm(&g, conj)?) } else { g };
        best_sampled = best_sampled.min(f.ntrace_product(&g)?);
    }
    let lhs = best_sampled.min(attained);
    let slack = (lhs - norm).min(-(attained - norm).abs());
    Ok(VerificationReport::new(InequalityId::Variational.as_str(), lhs, norm, slack)
        .with_num("p", p)
        .with_num("attained", attained)
        .with_num("best_sampled", best_sampled)
        .with_param("samples", samples)
        .with_param("seed", seed)
        .with_param("dim", d)
        .with_witness(json!({ "g_star_eigenvalues": g_star.eigh()?.values })))
}

/// `‖T(f)‖_p ≥ ‖f‖_p` for unital `T` and `p < 1`.
pub fn verify_expansivity<C: Channel + ?Sized>(t: &C, f: &HermitianOperator, p: f64) -> Result<VerificationReport> {
    if !t.is_unital() {
        return Err(Error::contract("expansivity needs a unital channel"));
    }
    if !(p < 1.0) {
        return Err(Error::contract(format!("expansivity needs p < 1, got {p}")));
    }
    require_psd(f, "f")?;
    let e = exponent(p)?;
    let lhs = pnorm(&t.apply(f)?, e)?;
    let rhs = pnorm(f, e)?;
    Ok(VerificationReport::new(InequalityId::Expansivity.as_str(), lhs, rhs, lhs - rhs)
        .with_num("p", p)
        .with_param("dim", f.dim()))
}

// ---------------------------------------------------------------------------
// Section 3 lemmas

fn sv_exponent_ok(p: f64) -> bool {
    p > 0.0 && p <= 2.0
}

/// `pp′(x^{1/p} − y^{1/p})(x^{1/p′} − y^{1/p′})`, with the `p = 1` limit
/// `(x − y)(ln x − ln y)`.
pub fn sv_two_point_value(x: f64, y: f64, p: f64) -> f64 {
    if p == 1.0 {
        if x == y {
            return 0.0;
        }
        return (x - y) * (x.ln() - y.ln());
    }
    let a = 1.0 / p;
    let b = 1.0 - a;
    p * p / (p - 1.0) * (x.powf(a) - y.powf(a)) * (x.powf(b) - y.powf(b))
}

fn check_sv_exponents(p: f64, q: f64) -> Result<()> {
    if !(sv_exponent_ok(p) && sv_exponent_ok(q) && p >= q) {
        return Err(Error::contract(format!(
            "Stroock–Varopoulos needs p, q ∈ (0, 2] with p ≥ q, got p = {p}, q = {q}"
        )));
    }
    Ok(())
}

/// Two-point form of the Stroock–Varopoulos inequality; `slack = h(q) − h(p)`.
pub fn sv_two_point(x: f64, y: f64, p: f64, q: f64) -> Result<VerificationReport> {
    if x < 0.0 || y < 0.0 || !x.is_finite() || !y.is_finite() {
        return Err(Error::domain("two-point inequality needs x, y ≥ 0", x.min(y)));
    }
    check_sv_exponents(p, q)?;
    if q <= 1.0 && (x == 0.0 || y == 0.0) && x != y {
        return Err(Error::domain("negative or logarithmic exponent needs x, y > 0", 0.0));
    }
    let lhs = sv_two_point_value(x, y, p);
    let rhs = sv_two_point_value(x, y, q);
    Ok(VerificationReport::new("sv-two-point", lhs, rhs, rhs - lhs)
        .with_num("x", x)
        .with_num("y", y)
        .with_num("p", p)
        .with_num("q", q))
}

fn require_primitive(l: &LindbladGenerator) -> Result<()> {
    if !l.is_primitive()? {
        return Err(Error::contract("generator must come from a primitive channel"));
    }
    Ok(())
}

/// `pp′ E(g^{1/p′}, g^{1/p})`, or `E(ln g, g)` at `p = 1`, evaluated in the
/// eigenbasis of `g` (see [`spectral_dirichlet_form`]).
pub fn sv_form(l: &LindbladGenerator, g: &HermitianOperator, p: f64) -> Result<f64> {
    if p <= 1.0 {
        g.require_pd(EPS_PD, "logarithm or negative power of g")?;
    }
    if p == 1.0 {
        return spectral_dirichlet_form(l, g, f64::ln, |x| x);
    }
    let a = 1.0 / p;
    let pow = |e: f64| move |x: f64| if x <= 0.0 { 0.0 } else { x.powf(e) };
    let e = spectral_dirichlet_form(l, g, pow(1.0 - a), pow(a))?;
    Ok(p * p / (p - 1.0) * e)
}

/// `pp′E(g^{1/p′}, g^{1/p}) ≤ qq′E(g^{1/q′}, g^{1/q})` for `p ≥ q` in `(0, 2]`.
pub fn verify_stroock_varopoulos(
    l: &LindbladGenerator,
    g: &HermitianOperator,
    p: f64,
    q: f64,
) -> Result<VerificationReport> {
    check_sv_exponents(p, q)?;
    require_primitive(l)?;
    require_psd(g, "g")?;
    let lhs = sv_form(l, g, p)?;
    let rhs = sv_form(l, g, q)?;
    Ok(VerificationReport::new(InequalityId::StroockVaropoulos.as_str(), lhs, rhs, rhs - lhs)
        .with_num("p", p)
        .with_num("q", q)
        .with_param("dim", g.dim()))
}

fn check_lsi_exponent(p: f64) -> Result<()> {
    if !(sv_exponent_ok(p) && p != 1.0) {
        return Err(Error::contract(format!("exponent must lie in (0, 2] \\ {{1}}, got {p}")));
    }
    Ok(())
}

/// `E(f^{p/2}, f^{p/2}) ≤ p²/(4(p−1)) E(f^{p−1}, f)`.
pub fn verify_gross(l: &LindbladGenerator, f: &HermitianOperator, p: f64) -> Result<VerificationReport> {
    check_lsi_exponent(p)?;
    require_primitive(l)?;
    require_psd(f, "f")?;
    let lhs = dirichlet_energy(l, &f.powf(p / 2.0)?)?;
    let rhs = p * p / (4.0 * (p - 1.0)) * dirichlet_form_centered(l, &f.powf(p - 1.0)?, f)?;
    Ok(VerificationReport::new(InequalityId::Gross.as_str(), lhs, rhs, rhs - lhs)
        .with_num("p", p)
        .with_param("dim", f.dim()))
}

/// `Ent(f^p) ≤ αp²/(4(p−1)) E(f^{p−1}, f)`, for a caller-asserted 2-LSI
/// constant `α`.
pub fn verify_plsi(l: &LindbladGenerator, f: &HermitianOperator, p: f64, alpha: f64) -> Result<VerificationReport> {
    check_lsi_exponent(p)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::contract(format!("log-Sobolev constant must be positive, got {alpha}")));
    }
    require_primitive(l)?;
    require_psd(f, "f")?;
    let lhs = entropy(&f.powf(p)?)?;
    let rhs = alpha * p * p / (4.0 * (p - 1.0)) * dirichlet_form_centered(l, &f.powf(p - 1.0)?, f)?;
    Ok(VerificationReport::new(InequalityId::Plsi.as_str(), lhs, rhs, rhs - lhs)
        .with_num("p", p)
        .with_num("alpha", alpha)
        .with_param("dim", f.dim()))
}

/// `p ↦ (t(p), t′(p))`.
pub type TimeMap<'a> = &'a dyn Fn(f64) -> (f64, f64);

/// The reverse-hypercontractive schedule `t(p) = (α/4) ln((1−q₀)/(1−p))`.
pub fn reverse_hc_schedule(alpha: f64, q0: f64) -> impl Fn(f64) -> (f64, f64) {
    move |p| (alpha / 4.0 * ((1.0 - q0) / (1.0 - p)).ln(), alpha / (4.0 * (1.0 - p)))
}

/// Closed form of `d/dp ln‖T_{t(p)} f‖_p`:
/// `(Ent(f_t^p) − p² t′(p) E(f_t^{p−1}, f_t)) / (p² τ(f_t^p))`.
pub fn norm_derivative(l: &LindbladGenerator, f: &HermitianOperator, p: f64, t_func: TimeMap) -> Result<f64> {
    if p == 0.0 || !p.is_finite() {
        return Err(Error::contract(format!("norm derivative needs finite p ≠ 0, got {p}")));
    }
    let (t, dt) = t_func(p);
    let ft = l.semigroup_apply(t, f)?;
    if p < 1.0 {
        ft.require_pd(EPS_PD, "norm derivative with p < 1")?;
    } else {
        require_psd(&ft, "T_t(f)")?;
    }
    let fp = ft.powf(p)?;
    let ent = entropy(&fp)?;
    let energy = if dt == 0.0 {
        0.0
    } else {
        dirichlet_form_centered(l, &ft.powf(p - 1.0)?, &ft)?
    };
    Ok((ent - p * p * dt * energy) / (p * p * fp.ntrace()))
}

/// `ln‖T_{t(p)} f‖_p`.
pub fn log_norm_along(l: &LindbladGenerator, f: &HermitianOperator, p: f64, t_func: TimeMap) -> Result<f64> {
    let (t, _) = t_func(p);
    Ok(pnorm(&l.semigroup_apply(t, f)?, exponent(p)?)?.ln())
}

/// Closed-form derivative against a central difference with step `h`;
/// `lhs` is the closed form, `rhs` the difference quotient, and the report
/// passes when they agree to `rel_tol·max(1, |lhs|, |rhs|)`.
pub fn verify_norm_derivative(
    l: &LindbladGenerator,
    f: &HermitianOperator,
    p: f64,
    t_func: TimeMap,
    h: f64,
    rel_tol: f64,
) -> Result<VerificationReport> {
    let closed = norm_derivative(l, f, p, t_func)?;
    let fd = (log_norm_along(l, f, p + h, t_func)? - log_norm_along(l, f, p - h, t_func)?) / (2.0 * h);
    Ok(
        VerificationReport::new("norm-derivative", closed, fd, -(closed - fd).abs())
            .with_relative_tol(rel_tol)
            .with_num("p", p)
            .with_num("h", h)
            .with_num("t", t_func(p).0)
            .with_param("dim", f.dim()),
    )
}

// ---------------------------------------------------------------------------
// Hypercontractivity

/// The noise applied in a hypercontractivity check.
#[derive(Debug, Clone, Copy)]
pub enum HcNoise<'a> {
    Depolarizing(DepolarizingFamily),
    /// `T_t = e^{−tL}` for a generator with 2-LSI constant `α`.
    Semigroup {
        generator: &'a LindbladGenerator,
        t: f64,
        alpha: f64,
    },
}

impl HcNoise<'_> {
    pub fn apply(&self, f: &HermitianOperator) -> Result<HermitianOperator> {
        match self {
            HcNoise::Depolarizing(d) => d.apply(f),
            HcNoise::Semigroup { generator, t, .. } => generator.semigroup_apply(*t, f),
        }
    }

    fn annotate(&self, r: VerificationReport) -> VerificationReport {
        match self {
            HcNoise::Depolarizing(d) => r.with_num("gamma", d.gamma()).with_param("qubits", d.qubits()),
            HcNoise::Semigroup { t, alpha, generator } => r
                .with_num("t", *t)
                .with_num("alpha", *alpha)
                .with_param("dim", generator.dim()),
        }
    }
}

/// `‖N(f)‖_q ≥ ‖f‖_p` for `q ≤ p ≤ 1` with `γ ≤ √((1−p)/(1−q))`, or
/// `t ≥ (α/4) ln((1−q)/(1−p))` for a semigroup.
pub fn verify_reverse_hc(noise: HcNoise, f: &HermitianOperator, p: f64, q: f64) -> Result<VerificationReport> {
    if p.is_nan() || q.is_nan() || !(q <= p && p <= 1.0) {
        return Err(Error::contract(format!("reverse hypercontractivity needs q ≤ p ≤ 1, got p = {p}, q = {q}")));
    }
    require_psd(f, "f")?;
    if p < 0.0 || q < 0.0 {
        f.require_pd(EPS_PD, "reverse hypercontractivity with a negative exponent")?;
    }
    match noise {
        HcNoise::Depolarizing(d) => {
            let bound = reverse_hc_gamma_threshold(p, q);
            if !within(d.gamma(), bound) {
                return Err(Error::contract(format!(
                    "γ = {} exceeds the threshold {bound} for p = {p}, q = {q}",
                    d.gamma()
                )));
            }
        }
        HcNoise::Semigroup { t, alpha, .. } => {
            let threshold = reverse_hc_time_threshold(alpha, p, q);
            if !(t >= threshold - THRESHOLD_EPS * threshold.abs().max(1.0)) {
                return Err(Error::contract(format!(
                    "t = {t} is below the threshold {threshold} for p = {p}, q = {q}"
                )));
            }
        }
    }
    reverse_hc_unchecked(noise, f, p, q)
}

pub fn reverse_hc_unchecked(noise: HcNoise, f: &HermitianOperator, p: f64, q: f64) -> Result<VerificationReport> {
    let lhs = pnorm(&noise.apply(f)?, exponent(q)?)?;
    let rhs = pnorm(f, exponent(p)?)?;
    let r = VerificationReport::new(InequalityId::ReverseHc.as_str(), lhs, rhs, lhs - rhs)
        .with_num("p", p)
        .with_num("q", q);
    let r = match noise {
        HcNoise::Depolarizing(_) => r.with_num("gamma_threshold", reverse_hc_gamma_threshold(p, q)),
        HcNoise::Semigroup { alpha, .. } => r.with_num("t_threshold", reverse_hc_time_threshold(alpha, p, q)),
    };
    Ok(noise.annotate(r))
}

/// `‖N(f)‖_q ≤ ‖f‖_p` for `1 ≤ p ≤ q ≤ ∞`, Hermitian `f`.
pub fn verify_forward_hc(noise: HcNoise, f: &HermitianOperator, p: f64, q: f64) -> Result<VerificationReport> {
    if p.is_nan() || q.is_nan() || !(1.0 <= p && p <= q) {
        return Err(Error::contract(format!("forward hypercontractivity needs 1 ≤ p ≤ q, got p = {p}, q = {q}")));
    }
    match noise {
        HcNoise::Depolarizing(d) => {
            let bound = forward_hc_gamma_threshold(p, q);
            if !within(d.gamma(), bound) {
                return Err(Error::contract(format!(
                    "γ = {} exceeds the threshold {bound} for p = {p}, q = {q}",
                    d.gamma()
                )));
            }
        }
        HcNoise::Semigroup { t, alpha, .. } => {
            let threshold = forward_hc_time_threshold(alpha, p, q);
            if !(t >= threshold - THRESHOLD_EPS * threshold.abs().max(1.0)) {
                return Err(Error::contract(format!(
                    "t = {t} is below the threshold {threshold} for p = {p}, q = {q}"
                )));
            }
        }
    }
    forward_hc_unchecked(noise, f, p, q)
}

pub fn forward_hc_unchecked(noise: HcNoise, f: &HermitianOperator, p: f64, q: f64) -> Result<VerificationReport> {
    let lhs = pnorm(&noise.apply(f)?, exponent(q)?)?;
    let rhs = pnorm(f, exponent(p)?)?;
    let r = VerificationReport::new(InequalityId::ForwardHc.as_str(), lhs, rhs, rhs - lhs)
        .with_num("p", p)
        .with_num("q", q);
    let r = match noise {
        HcNoise::Depolarizing(_) => r.with_num("gamma_threshold", forward_hc_gamma_threshold(p, q)),
        HcNoise::Semigroup { alpha, .. } => r.with_num("t_threshold", forward_hc_time_threshold(alpha, p, q)),
    };
    Ok(noise.annotate(r))
}

/// `τ(f D_γ^{⊗n}(g)) ≥ ‖f‖_p ‖g‖_q` for `p, q ≤ 1` and `γ ≤ √((1−p)(1−q))`.
pub fn verify_strong_reverse_holder(
    noise: DepolarizingFamily,
    f: &HermitianOperator,
    g: &HermitianOperator,
    p: f64,
    q: f64,
) -> Result<VerificationReport> {
    if p.is_nan() || q.is_nan() || !(p <= 1.0 && q <= 1.0) {
        return Err(Error::contract(format!("strong reverse Hölder needs p, q ≤ 1, got p = {p}, q = {q}")));
    }
    let bound = strong_reverse_holder_gamma_threshold(p, q);
    if !within(noise.gamma(), bound) {
        return Err(Error::contract(format!(
            "γ = {} exceeds the threshold {bound} for p = {p}, q = {q}",
            noise.gamma()
        )));
    }
    strong_reverse_holder_unchecked(noise, f, g, p, q)
}

pub fn strong_reverse_holder_unchecked(
    noise: DepolarizingFamily,
    f: &HermitianOperator,
    g: &HermitianOperator,
    p: f64,
    q: f64,
) -> Result<VerificationReport> {
    same_dim(f, g)?;
    require_psd(f, "f")?;
    require_psd(g, "g")?;
    let lhs = f.ntrace_product(&noise.apply(g)?)?;
    let rhs = pnorm(f, exponent(p)?)? * pnorm(g, exponent(q)?)?;
    Ok(
        VerificationReport::new(InequalityId::StrongReverseHolder.as_str(), lhs, rhs, lhs - rhs)
            .with_num("p", p)
            .with_num("q", q)
            .with_num("gamma", noise.gamma())
            .with_num("gamma_threshold", strong_reverse_holder_gamma_threshold(p, q))
            .with_param("qubits", noise.qubits()),
    )
}

/// The two-stage argument for `q < 0 ≤ p < 1`: with
/// `t₁ = (α/4) ln(1/(1−p))`, checks `‖T_{t₁} f‖₀ ≥ ‖f‖_p`, then
/// `‖T_{t−t₁}(T_{t₁} f)‖_q ≥ ‖T_{t₁} f‖₀`, and that the composed evolution
/// reproduces `T_t f` in `q`-norm.
pub fn verify_reverse_hc_chain(
    l: &LindbladGenerator,
    f: &HermitianOperator,
    p: f64,
    q: f64,
    t: f64,
    alpha: f64,
) -> Result<Vec<VerificationReport>> {
    if !(q < 0.0 && (0.0..1.0).contains(&p)) {
        return Err(Error::contract(format!("chain argument needs q < 0 ≤ p < 1, got p = {p}, q = {q}")));
    }
    let threshold = reverse_hc_time_threshold(alpha, p, q);
    if !(t >= threshold - THRESHOLD_EPS * threshold.abs().max(1.0)) {
        return Err(Error::contract(format!("t = {t} is below the threshold {threshold}")));
    }
    f.require_pd(EPS_PD, "chain argument with q < 0")?;
    let t1 = alpha / 4.0 * (1.0 / (1.0 - p)).ln();
    let mid = l.semigroup_apply(t1, f)?;
    let stage2 = l.semigroup_apply((t - t1).max(0.0), &mid)?;
    let direct = l.semigroup_apply(t, f)?;

    let qe = exponent(q)?;
    let mid0 = pnorm(&mid, PExponent::Zero)?;
    let fp = pnorm(f, exponent(p)?)?;
    let staged = pnorm(&stage2, qe)?;
    let whole = pnorm(&direct, qe)?;

    let annotate = |r: VerificationReport| {
        r.with_num("p", p)
            .with_num("q", q)
            .with_num("t", t)
            .with_num("t1", t1)
            .with_num("alpha", alpha)
    };
    Ok(vec![
        annotate(VerificationReport::new("reverse-hc-chain-first", mid0, fp, mid0 - fp)),
        annotate(VerificationReport::new("reverse-hc-chain-second", staged, mid0, staged - mid0)),
        annotate(VerificationReport::new("reverse-hc-chain-composition", whole, staged, -(whole - staged).abs())),
    ])
}

/// Spectrum and eigenvectors of an operator as JSON, for witness replay.
pub fn operator_witness(f: &HermitianOperator) -> Result<serde_json::Value> {
    let s = f.eigh()?;
    let d = f.dim();
    let columns: Vec<Vec<[f64; 2]>> = (0..d)
        .map(|j| s.vectors.column(j).iter().map(|z| [z.re, z.im]).collect())
        .collect();
    Ok(json!({
        "eigenvalues": s.values.iter().map(|&v| num(v)).collect::<Vec<_>>(),
        "eigenvectors": columns,
    }))
}
