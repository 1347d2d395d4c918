//! Unital quantum channels, Lindblad generators `L = c₀(id − T)` and their
//! semigroups `T_t = e^{−tL}`.
//!
//! Superoperators act on column-stacked vectorizations, so a Kraus channel
//! `f ↦ Σ A f A†` has matrix `Σ conj(A) ⊗ A`.
//!
//! Qubit ordering: qubit 1 is the most significant bit of a basis index.

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{check_dim, HermitianOperator};
use crate::matrix::{paulis, ComplexMatrix};
use crate::random::{haar_unitary, random_hermitian_with, rng_from_seed};

/// Tolerance for trace preservation, unitality and reversibility checks.
pub const CHANNEL_TOL: f64 = 1e-10;
/// Default peripheral-spectrum margin for primitivity.
pub const EPS_PRIM: f64 = 1e-8;

/// A linear map on `d × d` Hermitian operators.
pub trait Channel: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, f: &HermitianOperator) -> Result<HermitianOperator>;
    fn is_unital(&self) -> bool;
}

/// `D_γ^{⊗n}`: the single-qubit map `f ↦ (1−γ)(tr f) I/2 + γ f` on every qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingFamily {
    n: usize,
    gamma: f64,
}

impl DepolarizingFamily {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::range(format!("gamma = {gamma} outside [0, 1]")));
        }
        if n == 0 || n >= usize::BITS as usize - 1 {
            return Err(Error::range(format!("qubit count {n} unsupported")));
        }
        check_dim(1usize << n)?;
        Ok(Self { n, gamma })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Kraus form of the whole tensor power (`4^n` operators).
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let single = depolarizing_kraus_ops(self.gamma);
        let mut ops = single.clone();
        for _ in 1..self.n {
            ops = ops
                .iter()
                .flat_map(|a| single.iter().map(move |b| a.kron(b)))
                .collect();
        }
        KrausChannel::new(ops)
    }
}

impl Channel for DepolarizingFamily {
    fn dim(&self) -> usize {
        1 << self.n
    }

    fn apply(&self, f: &HermitianOperator) -> Result<HermitianOperator> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch(f.dim(), self.dim()));
        }
        let mut m = f.matrix().clone();
        if self.gamma != 1.0 {
            for site in 0..self.n {
                depolarize_site(&mut m, self.n, site, self.gamma);
            }
        }
        Ok(HermitianOperator::from_hermitian_part(&m))
    }

    fn is_unital(&self) -> bool {
        true
    }
}

/// Applies the single-qubit depolarizing map with parameter `gamma` to qubit
/// `site` (0 = most significant) of an `n`-qubit operator, in place.
pub(crate) fn depolarize_site(m: &mut ComplexMatrix, n: usize, site: usize, gamma: f64) {
    let d = m.dim();
    let mask = 1usize << (n - 1 - site);
    let data = m.as_mut_slice();
    for i in 0..d {
        if i & mask != 0 {
            continue;
        }
        let i1 = i | mask;
        for j in 0..d {
            if j & mask != 0 {
                continue;
            }
            let j1 = j | mask;
            let a00 = data[i * d + j];
            let a11 = data[i1 * d + j1];
            let avg = (a00 + a11) * 0.5 * (1.0 - gamma);
            data[i * d + j] = a00 * gamma + avg;
            data[i1 * d + j1] = a11 * gamma + avg;
            data[i * d + j1] *= gamma;
            data[i1 * d + j] *= gamma;
        }
    }
}

/// `√((1+3γ)/4)·I, √((1−γ)/4)·σ_x, √((1−γ)/4)·σ_y, √((1−γ)/4)·σ_z`.
pub fn depolarizing_kraus_ops(gamma: f64) -> Vec<ComplexMatrix> {
    let [i, x, y, z] = paulis();
    let w0 = ((1.0 + 3.0 * gamma) / 4.0).sqrt();
    let w1 = ((1.0 - gamma) / 4.0).max(0.0).sqrt();
    vec![
        i.scale_real(w0),
        x.scale_real(w1),
        y.scale_real(w1),
        z.scale_real(w1),
    ]
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<ComplexMatrix>,
    unital: bool,
    superop: OnceLock<ComplexMatrix>,
}

impl Clone for KrausChannel {
    fn clone(&self) -> Self {
        Self {
            dim: self.dim,
            ops: self.ops.clone(),
            unital: self.unital,
            superop: OnceLock::new(),
        }
    }
}

impl KrausChannel {
    /// Validates `Σ A†A = I` to `1e−10` and records whether `Σ AA† = I`.
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = ops
            .first()
            .map(ComplexMatrix::dim)
            .ok_or_else(|| Error::contract("a Kraus channel needs at least one operator"))?;
        check_dim(dim)?;
        if let Some(bad) = ops.iter().find(|a| a.dim() != dim) {
            return Err(Error::DimensionMismatch(bad.dim(), dim));
        }
        let id = ComplexMatrix::identity(dim);
        let mut tp = ComplexMatrix::zeros(dim);
        let mut un = ComplexMatrix::zeros(dim);
        for a in &ops {
            let ad = a.adjoint();
            tp = &tp + &ad.matmul(a);
            un = &un + &a.matmul(&ad);
        }
        let tp_defect = tp.max_abs_diff(&id);
        if tp_defect > CHANNEL_TOL {
            return Err(Error::contract(format!(
                "Kraus operators are not trace preserving (defect {tp_defect:.3e})"
            )));
        }
        Ok(Self {
            dim,
            unital: un.max_abs_diff(&id) <= CHANNEL_TOL,
            ops,
            superop: OnceLock::new(),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(vec![ComplexMatrix::identity(dim)])
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `Σ_i w_i U_i f U_i†` with Haar-random unitaries and Dirichlet-ish
    /// random weights; always unital.
    pub fn random_unitary_mixture<R: Rng + ?Sized>(dim: usize, terms: usize, rng: &mut R) -> Result<Self> {
        let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let ops = weights
            .iter()
            .map(|w| haar_unitary(dim, rng).scale_real((w / total).sqrt()))
            .collect();
        Self::new(ops)
    }

    /// `(1/n) Σ_k D_0^{(k)}`: full depolarization of one uniformly chosen
    /// qubit. `n·(id − this)` is the site-sum depolarizing generator.
    pub fn site_averaged_depolarizer(n: usize) -> Result<Self> {
        check_dim(1usize << n)?;
        let p = paulis();
        let w = 0.5 / (n as f64).sqrt();
        let mut ops = Vec::with_capacity(4 * n);
        for site in 0..n {
            for sigma in &p {
                let mut op = ComplexMatrix::identity(1);
                for k in 0..n {
                    op = if k == site {
                        op.kron(sigma)
                    } else {
                        op.kron(&ComplexMatrix::identity(2))
                    };
                }
                ops.push(op.scale_real(w));
            }
        }
        Self::new(ops)
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// `d² × d²` matrix `Σ conj(A) ⊗ A` acting on column-stacked operators.
    pub fn superoperator(&self) -> &ComplexMatrix {
        self.superop.get_or_init(|| {
            let d2 = self.dim * self.dim;
            let mut s = ComplexMatrix::zeros(d2);
            for a in &self.ops {
                s = &s + &a.conj().kron(a);
            }
            s
        })
    }

    pub fn to_spec(&self) -> ChannelSpec {
        ChannelSpec::Kraus {
            dim: self.dim,
            ops: self
                .ops
                .iter()
                .map(|a| a.as_slice().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl Channel for KrausChannel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, f: &HermitianOperator) -> Result<HermitianOperator> {
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch(f.dim(), self.dim));
        }
        let mut acc = ComplexMatrix::zeros(self.dim);
        for a in &self.ops {
            acc = &acc + &a.conjugate_by(f.matrix());
        }
        Ok(HermitianOperator::from_hermitian_part(&acc))
    }

    fn is_unital(&self) -> bool {
        self.unital
    }
}

/// JSON description of a channel: `{"type":"depolarizing","n":..,"gamma":..}`
/// or `{"type":"kraus","dim":..,"ops":[[[re,im],..],..]}` with each operator
/// listed row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ChannelSpec {
    Depolarizing { n: usize, gamma: f64 },
    Kraus { dim: usize, ops: Vec<Vec<[f64; 2]>> },
}

/// A channel built from a [`ChannelSpec`].
pub enum AnyChannel {
    Depolarizing(DepolarizingFamily),
    Kraus(KrausChannel),
}

impl ChannelSpec {
    pub fn build(&self) -> Result<AnyChannel> {
        match self {
            ChannelSpec::Depolarizing { n, gamma } => {
                Ok(AnyChannel::Depolarizing(DepolarizingFamily::new(*n, *gamma)?))
            }
            ChannelSpec::Kraus { dim, ops } => {
                let mats = ops
                    .iter()
                    .map(|entries| {
                        ComplexMatrix::from_row_major(
                            *dim,
                            entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyChannel::Kraus(KrausChannel::new(mats)?))
            }
        }
    }
}

impl Channel for AnyChannel {
    fn dim(&self) -> usize {
        match self {
            AnyChannel::Depolarizing(c) => c.dim(),
            AnyChannel::Kraus(c) => c.dim(),
        }
    }
    fn apply(&self, f: &HermitianOperator) -> Result<HermitianOperator> {
        match self {
            AnyChannel::Depolarizing(c) => c.apply(f),
            AnyChannel::Kraus(c) => c.apply(f),
        }
    }
    fn is_unital(&self) -> bool {
        match self {
            AnyChannel::Depolarizing(c) => c.is_unital(),
            AnyChannel::Kraus(c) => c.is_unital(),
        }
    }
}

/// Outcome of [`check_reversible`].
#[derive(Debug, Clone, Serialize)]
pub struct ReversibilityCheck {
    pub reversible: bool,
    /// `max |τ(f T(g)) − τ(T(f) g)|` over the sampled pairs.
    pub max_deviation: f64,
    /// `max |S − S†|` for the superoperator matrix `S`.
    pub superop_defect: f64,
}

/// Tests `τ(f T(g)) = τ(T(f) g)` on `trials` random Hermitian pairs and the
/// equivalent Hermiticity of the superoperator matrix.
pub fn check_reversible(t: &KrausChannel, trials: usize, seed: u64) -> Result<ReversibilityCheck> {
    let mut rng = rng_from_seed(seed);
    let mut max_deviation = 0.0f64;
    for _ in 0..trials {
        let f = random_hermitian_with(t.dim, &mut rng)?;
        let g = random_hermitian_with(t.dim, &mut rng)?;
        let lhs = f.ntrace_product(&t.apply(&g)?)?;
        let rhs = t.apply(&f)?.ntrace_product(&g)?;
        let scale = f.matrix().frobenius() * g.matrix().frobenius() / t.dim as f64;
        max_deviation = max_deviation.max((lhs - rhs).abs() / scale.max(1.0));
    }
    let s = t.superoperator();
    let superop_defect = s.max_abs_diff(&s.adjoint());
    Ok(ReversibilityCheck {
        reversible: max_deviation <= CHANNEL_TOL && superop_defect <= CHANNEL_TOL,
        max_deviation,
        superop_defect,
    })
}

/// Outcome of [`check_primitive`].
#[derive(Debug, Clone, Serialize)]
pub struct PrimitivityCheck {
    pub primitive: bool,
    /// Number of superoperator eigenvalues within `ε_prim` of 1.
    pub unit_multiplicity: usize,
    /// All eigenvalues with modulus `≥ 1 − ε_prim`, as `[re, im]`.
    pub peripheral: Vec<[f64; 2]>,
}

/// Primitive iff the superoperator has eigenvalue 1 with multiplicity one and
/// no other eigenvalue of modulus `≥ 1 − ε_prim`.
pub fn check_primitive(t: &KrausChannel) -> Result<PrimitivityCheck> {
    check_primitive_with(t, EPS_PRIM)
}

pub fn check_primitive_with(t: &KrausChannel, eps_prim: f64) -> Result<PrimitivityCheck> {
    let eig = superoperator_eigenvalues(t.superoperator())?;
    let peripheral: Vec<Complex64> = eig
        .iter()
        .copied()
        .filter(|z| z.norm() >= 1.0 - eps_prim)
        .collect();
    let unit_multiplicity = peripheral
        .iter()
        .filter(|z| (*z - Complex64::new(1.0, 0.0)).norm() < eps_prim)
        .count();
    Ok(PrimitivityCheck {
        primitive: unit_multiplicity == 1 && peripheral.len() == 1,
        unit_multiplicity,
        peripheral: peripheral.iter().map(|z| [z.re, z.im]).collect(),
    })
}

/// General (non-Hermitian) eigenvalues through nalgebra's complex Schur form.
pub fn superoperator_eigenvalues(s: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = s.dim();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| s.get(i, j));
    let schur = m
        .try_schur(1e-14, 10_000)
        .ok_or(Error::NumericalFailure { residual: f64::NAN })?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GeneratorKind {
    Channel,
    DepolarizingSiteSum { n: usize },
}

/// `L = c₀(id − T)` for a unital reversible channel `T`.
///
/// The `n`-qubit depolarizing generator `Σ_k L_k` with
/// `L_k(f) = f − ¼ Σ_α σ_k^α f σ_k^α` is the special case `c₀ = n`,
/// `T = (1/n) Σ_k D_0^{(k)}`; it is built by [`depolarizing_site_sum`] and
/// its semigroup is evaluated in closed form `γ = e^{−t}` per qubit. By
/// contrast [`from_depolarizing_channel`] gives `c₀(id − D_γ^{⊗n})`, a
/// different generator for `n ≥ 2`.
///
/// [`depolarizing_site_sum`]: Self::depolarizing_site_sum
/// [`from_depolarizing_channel`]: Self::from_depolarizing_channel
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    base: KrausChannel,
    c0: f64,
    kind: GeneratorKind,
    matrix: OnceLock<ComplexMatrix>,
    primitive: OnceLock<bool>,
}

impl LindbladGenerator {
    /// Requires `c₀ > 0` and `T` unital and reversible.
    pub fn from_channel(base: KrausChannel, c0: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::range(format!("c0 = {c0} must be positive")));
        }
        if !base.is_unital() {
            return Err(Error::contract("generator base channel must be unital"));
        }
        let s = base.superoperator();
        let defect = s.max_abs_diff(&s.adjoint());
        if defect > CHANNEL_TOL {
            return Err(Error::contract(format!(
                "generator base channel must be reversible (superoperator defect {defect:.3e})"
            )));
        }
        Ok(Self {
            base,
            c0,
            kind: GeneratorKind::Channel,
            matrix: OnceLock::new(),
            primitive: OnceLock::new(),
        })
    }

    pub fn depolarizing_site_sum(n: usize) -> Result<Self> {
        let mut g = Self::from_channel(KrausChannel::site_averaged_depolarizer(n)?, n as f64)?;
        g.kind = GeneratorKind::DepolarizingSiteSum { n };
        Ok(g)
    }

    pub fn from_depolarizing_channel(n: usize, gamma: f64, c0: f64) -> Result<Self> {
        Self::from_channel(DepolarizingFamily::new(n, gamma)?.to_kraus()?, c0)
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn base(&self) -> &KrausChannel {
        &self.base
    }

    /// Number of qubits when this is the site-sum depolarizing generator.
    pub fn depolarizing_qubits(&self) -> Option<usize> {
        match self.kind {
            GeneratorKind::DepolarizingSiteSum { n } => Some(n),
            GeneratorKind::Channel => None,
        }
    }

    /// Primitivity of the base channel; computed once.
    pub fn is_primitive(&self) -> Result<bool> {
        if let Some(&p) = self.primitive.get() {
            return Ok(p);
        }
        let p = check_primitive(&self.base)?.primitive;
        Ok(*self.primitive.get_or_init(|| p))
    }

    /// `L(f) = c₀(f − T(f))`; for the site-sum generator, `Σ_k (f − D_0^{(k)} f)`.
    pub fn apply(&self, f: &HermitianOperator) -> Result<HermitianOperator> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch(f.dim(), self.dim()));
        }
        match self.kind {
            GeneratorKind::DepolarizingSiteSum { n } => {
                let mut acc = ComplexMatrix::zeros(f.dim());
                for site in 0..n {
                    let mut m = f.matrix().clone();
                    depolarize_site(&mut m, n, site, 0.0);
                    acc = &acc + &(f.matrix() - &m);
                }
                Ok(HermitianOperator::from_hermitian_part(&acc))
            }
            GeneratorKind::Channel => self.apply_via_channel(f),
        }
    }

    /// `c₀(f − T(f))` evaluated through the Kraus operators regardless of kind.
    pub fn apply_via_channel(&self, f: &HermitianOperator) -> Result<HermitianOperator> {
        let tf = self.base.apply(f)?;
        Ok(HermitianOperator::from_hermitian_part(
            &(f.matrix() - tf.matrix()).scale_real(self.c0),
        ))
    }

    /// `d² × d²` matrix of `L` on column-stacked operators.
    pub fn superoperator(&self) -> &ComplexMatrix {
        self.matrix.get_or_init(|| {
            let s = self.base.superoperator();
            (&ComplexMatrix::identity(s.dim()) - s).scale_real(self.c0)
        })
    }

    /// `T_t(f) = e^{−tL}(f)`.
    pub fn semigroup_apply(&self, t: f64, f: &HermitianOperator) -> Result<HermitianOperator> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::range(format!("semigroup time t = {t} must be finite and nonnegative")));
        }
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch(f.dim(), self.dim()));
        }
        if t == 0.0 {
            return Ok(f.clone());
        }
        match self.kind {
            GeneratorKind::DepolarizingSiteSum { n } => {
                DepolarizingFamily::new(n, (-t).exp())?.apply(f)
            }
            GeneratorKind::Channel => self.semigroup_apply_via_exponential(t, f),
        }
    }

    /// Semigroup through scaling-and-squaring of the superoperator, ignoring
    /// any closed form.
    pub fn semigroup_apply_via_exponential(&self, t: f64, f: &HermitianOperator) -> Result<HermitianOperator> {
        let e = self.superoperator().scale_real(-t).expm();
        let out = e.mul_vec(&f.matrix().vectorize());
        Ok(HermitianOperator::from_hermitian_part(&ComplexMatrix::unvectorize(
            self.dim(),
            &out,
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::PositivityClass;
    use crate::pnorm::pnorm_f64;
    use crate::random::random_psd;

    fn sigma(k: usize) -> HermitianOperator {
        HermitianOperator::new(paulis()[k].clone()).unwrap()
    }

    #[test]
    fn depolarizing_closed_form_examples() {
        let f = random_psd(2, 1, PositivityClass::PositiveSemidefinite).unwrap();
        let id = DepolarizingFamily::new(1, 1.0).unwrap();
        assert!(id.apply(&f).unwrap().matrix().max_abs_diff(f.matrix()) == 0.0);

        let f2 = HermitianOperator::from_real_diagonal(&[1.5, 0.5]).unwrap();
        let full = DepolarizingFamily::new(1, 0.0).unwrap().apply(&f2).unwrap();
        assert!(full.matrix().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);

        let half = DepolarizingFamily::new(1, 0.5).unwrap().apply(&sigma(3)).unwrap();
        assert!(half.matrix().max_abs_diff(&paulis()[3].scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn single_qubit_formula_exact() {
        let f = random_psd(2, 9, PositivityClass::Indefinite).unwrap();
        let gamma = 0.37;
        let out = DepolarizingFamily::new(1, gamma).unwrap().apply(&f).unwrap();
        let tr = f.matrix().trace();
        let expect = &ComplexMatrix::identity(2).scale(tr * 0.5 * (1.0 - gamma))
            + &f.matrix().scale_real(gamma);
        assert!(out.matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn kraus_form_matches_closed_form() {
        for n in 1..=3 {
            let fam = DepolarizingFamily::new(n, 0.63).unwrap();
            let kraus = fam.to_kraus().unwrap();
            assert!(kraus.is_unital());
            let f = random_psd(1 << n, 3 + n as u64, PositivityClass::Indefinite).unwrap();
            let a = fam.apply(&f).unwrap();
            let b = kraus.apply(&f).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
        }
    }

    #[test]
    fn kraus_preserves_trace_and_identity_channel() {
        let mut rng = rng_from_seed(5);
        let t = KrausChannel::random_unitary_mixture(4, 3, &mut rng).unwrap();
        let f = random_psd(4, 2, PositivityClass::PositiveSemidefinite).unwrap();
        let out = t.apply(&f).unwrap();
        assert!((out.ntrace() - f.ntrace()).abs() < 1e-10);
        let id = KrausChannel::identity(4).unwrap();
        assert!(id.apply(&f).unwrap().matrix().max_abs_diff(f.matrix()) < 1e-15);
    }

    #[test]
    fn unitary_channel_preserves_spectrum() {
        let mut rng = rng_from_seed(8);
        let u = haar_unitary(4, &mut rng);
        let t = KrausChannel::unitary(u).unwrap();
        let f = random_psd(4, 3, PositivityClass::PositiveDefinite).unwrap();
        let a = f.eigh().unwrap().values.clone();
        let b = t.apply(&f).unwrap().eigh().unwrap().values.clone();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let r = KrausChannel::new(vec![ComplexMatrix::identity(2).scale_real(0.9)]);
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn reversibility_examples() {
        let dep = DepolarizingFamily::new(1, 0.4).unwrap().to_kraus().unwrap();
        let r = check_reversible(&dep, 50, 1).unwrap();
        assert!(r.reversible && r.max_deviation <= 1e-12);
        assert!(check_reversible(&KrausChannel::identity(3).unwrap(), 10, 2).unwrap().reversible);

        let u = paulis()[2].scale(Complex64::new(0.0, 0.3)).expm();
        let rot = KrausChannel::unitary(u).unwrap();
        assert!(!check_reversible(&rot, 50, 3).unwrap().reversible);
        // explicit witness f = σ_z, g = σ_x
        let lhs = sigma(3).ntrace_product(&rot.apply(&sigma(1)).unwrap()).unwrap();
        let rhs = rot.apply(&sigma(3)).unwrap().ntrace_product(&sigma(1)).unwrap();
        assert!((lhs - rhs).abs() > 0.1);
    }

    #[test]
    fn primitivity_examples() {
        let dep = DepolarizingFamily::new(1, 0.5).unwrap().to_kraus().unwrap();
        let r = check_primitive(&dep).unwrap();
        assert!(r.primitive);
        let mut eig = superoperator_eigenvalues(dep.superoperator()).unwrap();
        eig.sort_by(|a, b| b.re.total_cmp(&a.re));
        for (z, want) in eig.iter().zip([1.0, 0.5, 0.5, 0.5]) {
            assert!((z - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
        let id = check_primitive(&KrausChannel::identity(2).unwrap()).unwrap();
        assert!(!id.primitive);
        assert_eq!(id.unit_multiplicity, 4);
        let g1 = DepolarizingFamily::new(1, 1.0).unwrap().to_kraus().unwrap();
        assert!(!check_primitive(&g1).unwrap().primitive);
        for n in 1..=3 {
            assert!(check_primitive(&KrausChannel::site_averaged_depolarizer(n).unwrap())
                .unwrap()
                .primitive);
        }
    }

    #[test]
    fn generator_examples() {
        let l1 = LindbladGenerator::depolarizing_site_sum(1).unwrap();
        assert!(l1.apply(&HermitianOperator::identity(2)).unwrap().matrix().max_abs() < 1e-15);
        let lz = l1.apply(&sigma(3)).unwrap();
        assert!(lz.matrix().max_abs_diff(sigma(3).matrix()) < 1e-15);

        let l2 = LindbladGenerator::depolarizing_site_sum(2).unwrap();
        let zz = sigma(3).tensor(&sigma(3)).unwrap();
        let out = l2.apply(&zz).unwrap();
        assert!(out.matrix().max_abs_diff(&zz.matrix().scale_real(2.0)) < 1e-14);
    }

    #[test]
    fn site_sum_closed_form_matches_kraus_route() {
        for n in 1..=3 {
            let l = LindbladGenerator::depolarizing_site_sum(n).unwrap();
            let f = random_psd(1 << n, 40 + n as u64, PositivityClass::Indefinite).unwrap();
            let a = l.apply(&f).unwrap();
            let b = l.apply_via_channel(&f).unwrap();
            assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
            let t = 0.7;
            let c = l.semigroup_apply(t, &f).unwrap();
            let d = l.semigroup_apply_via_exponential(t, &f).unwrap();
            assert!(c.matrix().max_abs_diff(d.matrix()) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn semigroup_examples() {
        let l = LindbladGenerator::depolarizing_site_sum(1).unwrap();
        let f = random_psd(2, 4, PositivityClass::PositiveSemidefinite).unwrap();
        assert_eq!(l.semigroup_apply(0.0, &f).unwrap(), f);
        let a = l.semigroup_apply(2f64.ln(), &f).unwrap();
        let b = DepolarizingFamily::new(1, 0.5).unwrap().apply(&f).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-15);
        assert!(l.semigroup_apply(-1.0, &f).is_err());
    }

    #[test]
    fn generic_semigroup_laws() {
        let mut rng = rng_from_seed(21);
        // reversible: mixture of Hermitian unitaries (random Pauli strings)
        let dep = DepolarizingFamily::new(2, 0.3).unwrap().to_kraus().unwrap();
        let l = LindbladGenerator::from_channel(dep, 1.7).unwrap();
        let f = random_psd_with_rng(&mut rng);
        let (s, t) = (0.3, 0.45);
        let a = l.semigroup_apply(s, &l.semigroup_apply(t, &f).unwrap()).unwrap();
        let b = l.semigroup_apply(s + t, &f).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-9);
        assert!((b.ntrace() - f.ntrace()).abs() < 1e-12);

        // derivative at zero
        let h = 1e-5;
        let fd = f.sub(&l.semigroup_apply(h, &f).unwrap()).unwrap().scale(1.0 / h);
        let lf = l.apply(&f).unwrap();
        assert!(fd.matrix().max_abs_diff(lf.matrix()) <= 1e-3 * lf.matrix().max_abs());
    }

    fn random_psd_with_rng(rng: &mut crate::random::DetRng) -> HermitianOperator {
        crate::random::random_psd_with(4, PositivityClass::PositiveSemidefinite, rng).unwrap()
    }

    #[test]
    fn generator_rejects_irreversible_base() {
        let u = paulis()[2].scale(Complex64::new(0.0, 0.3)).expm();
        let rot = KrausChannel::unitary(u).unwrap();
        assert!(matches!(LindbladGenerator::from_channel(rot, 1.0), Err(Error::Contract(_))));
    }

    #[test]
    fn expansivity_on_random_inputs() {
        let fam = DepolarizingFamily::new(2, 0.4).unwrap();
        for seed in 0..50 {
            let f = random_psd(4, seed, PositivityClass::PositiveSemidefinite).unwrap();
            let out = fam.apply(&f).unwrap();
            for p in [0.2, 0.7] {
                assert!(pnorm_f64(&out, p).unwrap() >= pnorm_f64(&f, p).unwrap() - 1e-10);
            }
        }
    }

    #[test]
    fn channel_spec_json_round_trip() {
        let spec = ChannelSpec::Depolarizing { n: 2, gamma: 0.25 };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"type":"depolarizing","n":2,"gamma":0.25}"#);
        let kraus = DepolarizingFamily::new(1, 0.5).unwrap().to_kraus().unwrap().to_spec();
        let back: ChannelSpec = serde_json::from_str(&serde_json::to_string(&kraus).unwrap()).unwrap();
        let built = back.build().unwrap();
        let f = random_psd(2, 77, PositivityClass::PositiveSemidefinite).unwrap();
        let a = built.apply(&f).unwrap();
        let b = DepolarizingFamily::new(1, 0.5).unwrap().apply(&f).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-12);
    }
}
