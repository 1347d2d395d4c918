//! Classical boolean-cube oracle: functions on `{0,1}^n` stored as dense
//! tables, the noise operator `T_γ`, normalized `ℓ_p` norms, classical
//! (reverse) hypercontractivity checks and exact majority NICD.
//!
//! Everything here is computed by direct summation and never touches the
//! spectral code, so it serves as an independent cross-check for the
//! commuting (diagonal) case of every quantum routine. Index `x` is read with
//! bit 1 as the most significant bit, matching the qubit order of
//! [`crate::channel`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pnorm::PExponent;
use crate::report::VerificationReport;

/// Largest supported bit count.
pub const MAX_BITS: usize = 15;

/// A real function on `{0,1}^n`, serialized as a JSON array of `2^n` reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CubeFunction {
    n: usize,
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for CubeFunction {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<CubeFunction> for Vec<f64> {
    fn from(f: CubeFunction) -> Vec<f64> {
        f.values
    }
}

impl CubeFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::range(format!("table length {len} is not 2^n with n ≥ 1")));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_BITS {
            return Err(Error::Capacity {
                requested: len,
                cap: 1 << MAX_BITS,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        if n == 0 || n > MAX_BITS {
            return Err(Error::range(format!("bit count {n} outside 1..={MAX_BITS}")));
        }
        Self::new((0..1usize << n).map(f).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    pub fn bits(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `E[f·g]`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.same_size(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
            / self.values.len() as f64)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    fn same_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.values.len(), other.values.len()));
        }
        Ok(())
    }
}

/// `(T_γ f)(x) = E_{y ∼ x}[f(y)]`, each bit of `y` flipped independently with
/// probability `(1−γ)/2`; computed as `n` single-bit averaging passes.
pub fn noise_operator(f: &CubeFunction, gamma: f64) -> Result<CubeFunction> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::range(format!("gamma = {gamma} outside [0, 1]")));
    }
    let keep = (1.0 + gamma) / 2.0;
    let flip = (1.0 - gamma) / 2.0;
    let mut v = f.values.clone();
    for bit in 0..f.n {
        let mask = 1usize << bit;
        for x in 0..v.len() {
            if x & mask == 0 {
                let (a, b) = (v[x], v[x | mask]);
                v[x] = keep * a + flip * b;
                v[x | mask] = flip * a + keep * b;
            }
        }
    }
    Ok(CubeFunction { n: f.n, values: v })
}

/// `‖f‖_p = (E|f|^p)^{1/p}`, with `p = 0` the geometric mean and `p = ±∞` the
/// extreme values. Same positivity requirements as the operator norm.
pub fn lp_norm(f: &CubeFunction, p: PExponent) -> Result<f64> {
    let v = &f.values;
    let len = v.len() as f64;
    let needs_positive = p.needs_pd();
    if needs_positive {
        if let Some(&bad) = v.iter().find(|&&x| !(x > 0.0)) {
            return Err(Error::domain("classical norm needs a strictly positive function", bad));
        }
    } else if p.value() < 1.0 {
        if let Some(&bad) = v.iter().find(|&&x| x < 0.0) {
            return Err(Error::domain("classical norm needs a nonnegative function", bad));
        }
    }
    Ok(match p {
        PExponent::PosInf => v.iter().map(|x| x.abs()).fold(0.0, f64::max),
        PExponent::NegInf => v.iter().cloned().fold(f64::INFINITY, f64::min),
        PExponent::Zero => (v.iter().map(|x| x.ln()).sum::<f64>() / len).exp(),
        PExponent::Finite(p) => {
            let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
            let scale = if p > 0.0 {
                abs.iter().cloned().fold(0.0, f64::max)
            } else {
                abs.iter().cloned().fold(f64::INFINITY, f64::min)
            };
            if scale == 0.0 {
                0.0
            } else {
                let s: f64 = abs.iter().map(|&x| if x == 0.0 { 0.0 } else { (x / scale).powf(p) }).sum();
                scale * (s / len).powf(1.0 / p)
            }
        }
    })
}

/// `E[f ln f] − E f ln E f` for nonnegative `f`.
pub fn entropy(f: &CubeFunction) -> Result<f64> {
    if let Some(&bad) = f.values.iter().find(|&&x| x < 0.0) {
        return Err(Error::domain("entropy needs a nonnegative function", bad));
    }
    let m = f.mean();
    if !(m > 0.0) {
        return Err(Error::domain("entropy needs a positive mean", m));
    }
    let xlogx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    Ok(f.values.iter().map(|&x| xlogx(x)).sum::<f64>() / f.values.len() as f64 - xlogx(m))
}

/// Dirichlet form of the bit-flip generator `(Lf)(x) = Σ_i (f(x) − f(x⊕e_i))/2`,
/// the diagonal restriction of the depolarizing site-sum generator.
pub fn dirichlet_form(f: &CubeFunction, g: &CubeFunction) -> Result<f64> {
    f.same_size(g)?;
    let len = f.values.len();
    let mut acc = 0.0;
    for x in 0..len {
        let mut lg = 0.0;
        for bit in 0..f.n {
            lg += (g.values[x] - g.values[x ^ (1 << bit)]) / 2.0;
        }
        acc += f.values[x] * lg;
    }
    Ok(acc / len as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HcDirection {
    /// `‖T_γ f‖_q ≤ ‖f‖_p` for `1 ≤ p ≤ q`.
    Forward,
    /// `‖T_γ f‖_q ≥ ‖f‖_p` for `q ≤ p ≤ 1`.
    Reverse,
}

/// The classical γ threshold: `√((p−1)/(q−1))` forward, `√((1−p)/(1−q))` reverse.
pub fn hc_gamma_bound(p: f64, q: f64, direction: HcDirection) -> f64 {
    match direction {
        HcDirection::Forward if q.is_infinite() => 0.0,
        HcDirection::Forward if q == 1.0 => 1.0,
        HcDirection::Forward => ((p - 1.0) / (q - 1.0)).sqrt(),
        HcDirection::Reverse if q.is_infinite() => 0.0,
        HcDirection::Reverse if q == 1.0 => 1.0,
        HcDirection::Reverse => ((1.0 - p) / (1.0 - q)).sqrt(),
    }
}

/// Evaluates classical (reverse) hypercontractivity at the given `γ`.
///
/// The ordering of `p`, `q` and the sign conditions on `f` are enforced.
/// `γ` may exceed the theorem's threshold; the report records the threshold
/// as `gamma_bound` and whether `γ` is inside it, so out-of-range evaluations
/// show up as honest failures rather than errors.
pub fn classical_hc_check(
    f: &CubeFunction,
    p: PExponent,
    q: PExponent,
    gamma: f64,
    direction: HcDirection,
) -> Result<VerificationReport> {
    let (pv, qv) = (p.value(), q.value());
    match direction {
        HcDirection::Forward => {
            if !(1.0 <= pv && pv <= qv) {
                return Err(Error::range(format!("forward direction needs 1 ≤ p ≤ q, got p = {p}, q = {q}")));
            }
        }
        HcDirection::Reverse => {
            if !(qv <= pv && pv <= 1.0) {
                return Err(Error::range(format!("reverse direction needs q ≤ p ≤ 1, got p = {p}, q = {q}")));
            }
            if let Some(&bad) = f.values.iter().find(|&&x| x < 0.0) {
                return Err(Error::domain("reverse hypercontractivity needs f ≥ 0", bad));
            }
            if p.needs_pd() {
                if let Some(&bad) = f.values.iter().find(|&&x| x <= 0.0) {
                    return Err(Error::domain("p < 0 needs f > 0", bad));
                }
            }
        }
    }
    let tf = noise_operator(f, gamma)?;
    let noisy = lp_norm(&tf, q)?;
    let plain = lp_norm(f, p)?;
    let bound = hc_gamma_bound(pv, qv, direction);
    let (id, lhs, rhs, slack) = match direction {
        HcDirection::Forward => ("classical-forward-hc", noisy, plain, plain - noisy),
        HcDirection::Reverse => ("classical-reverse-hc", noisy, plain, noisy - plain),
    };
    Ok(VerificationReport::new(id, lhs, rhs, slack)
        .with_num("p", pv)
        .with_num("q", qv)
        .with_num("gamma", gamma)
        .with_num("gamma_bound", bound)
        .with_param("in_hypothesis", gamma <= bound + 1e-15)
        .with_param("n", f.n))
}

/// Binomial probability mass `C(n, k) a^k (1−a)^{n−k}` for all `k`.
fn binomial_pmf(n: usize, a: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = 1.0;
    for step in 0..n {
        for k in (0..=step + 1).rev() {
            let stay = if k <= step { pmf[k] * (1.0 - a) } else { 0.0 };
            let up = if k > 0 { pmf[k - 1] * a } else { 0.0 };
            pmf[k] = stay + up;
        }
    }
    pmf
}

/// Probability that `maj(noisy x) = 1` for an input of Hamming weight `w`.
pub fn majority_one_probability(n: usize, w: usize, gamma: f64) -> f64 {
    let keep = (1.0 + gamma) / 2.0;
    let flip = (1.0 - gamma) / 2.0;
    let ones = binomial_pmf(w, keep);
    let zeros = binomial_pmf(n - w, flip);
    let mut total = 0.0;
    for (a, pa) in ones.iter().enumerate() {
        for (b, pb) in zeros.iter().enumerate() {
            if 2 * (a + b) > n {
                total += pa * pb;
            }
        }
    }
    total
}

/// Exact probability that all `k` players output 1 when each applies majority
/// to an independently noised copy of a uniform `n`-bit string.
pub fn majority_nicd(n: usize, k: u32, gamma: f64) -> Result<f64> {
    if n.is_multiple_of(2) || n > MAX_BITS {
        return Err(Error::range(format!("majority NICD needs odd n ≤ {MAX_BITS}, got {n}")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::range(format!("gamma = {gamma} outside [0, 1]")));
    }
    if k == 0 {
        return Err(Error::range("player count must be at least 1"));
    }
    let mut binom = 1.0f64;
    let mut total = 0.0;
    for w in 0..=n {
        total += binom * majority_one_probability(n, w, gamma).powi(k as i32);
        binom = binom * (n - w) as f64 / (w + 1) as f64;
    }
    Ok(total / (1u64 << n) as f64)
}

/// `E_x[(T_γ 1_A)(x)^k]`: probability that `k` noisy players all land in `A`.
pub fn nicd_probability(indicator: &CubeFunction, k: u32, gamma: f64) -> Result<f64> {
    let t = noise_operator(indicator, gamma)?;
    Ok(t.values.iter().map(|v| v.powi(k as i32)).sum::<f64>() / t.values.len() as f64)
}

/// Majority indicator on `n` bits (odd `n`).
pub fn majority_indicator(n: usize) -> Result<CubeFunction> {
    if n.is_multiple_of(2) {
        return Err(Error::range("majority needs an odd bit count"));
    }
    CubeFunction::from_fn(n, |x| if 2 * x.count_ones() as usize > n { 1.0 } else { 0.0 })
}
