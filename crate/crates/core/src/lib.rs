//! Numerical toolkit for reverse hypercontractivity of unital quantum
//! channels.
//!
//! The crate provides dense Hermitian linear algebra ([`hermitian`]),
//! normalized Schatten p-norms for every extended-real `p` ([`pnorm`]),
//! unital channels and Lindblad semigroups ([`channel`]), entropy and
//! Dirichlet-form functionals ([`functional`]), a classical boolean-cube
//! oracle ([`cube`]), one verifier per inequality ([`verify`]), rapid-mixing
//! bounds ([`mixing`]), the quantum correlation-distillation game ([`nicd`])
//! and an adversarial counterexample search ([`search`]).

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod channel;
pub mod cube;
pub mod error;
pub mod functional;
pub mod hermitian;
pub mod matrix;
pub mod mixing;
pub mod nicd;
pub mod pnorm;
pub mod random;
pub mod report;
pub mod search;
pub mod verify;

pub use channel::{Channel, DepolarizingFamily, KrausChannel, LindbladGenerator};
pub use error::{Error, Result};
pub use hermitian::{HermitianOperator, PositivityClass, Spectrum};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use pnorm::{holder_conjugate, pnorm, PExponent};
