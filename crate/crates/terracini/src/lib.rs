//! Exact-arithmetic certificates for dimensions and identifiability of
//! secant varieties of powers of forms, together with the moment calculus
//! for mixtures of centered Gaussians that those certificates speak about.
//!
//! The crate is organized around the dictionary between the two sides:
//!
//! * a centered Gaussian with covariance form `q` contributes `q^d` to the
//!   degree-2d moment form of a mixture ([`gaussmix`]);
//! * sums of d-th powers of degree-k forms sweep out the secant varieties of
//!   the power variety, whose dimensions are governed by tangent-space ranks
//!   via Terracini's lemma ([`secant`]);
//! * an explicit witness tuple with skew tangent spaces and a
//!   zero-dimensional tangential contact locus certifies generic
//!   identifiability in the style of Chiantini-Ottaviani ([`witness`]);
//! * closed-form Hilbert-series bounds (Froberg truncation, the Nenashev
//!   coefficient bound) delimit the parameter ranges where non-defectivity
//!   and identifiability are guaranteed ([`ranges`]).
//!
//! Everything runs over exact fields ([`field`]): arbitrary-precision
//! rationals for certificates, a prime field F_p (p > 2^31) as a fast path
//! that is sound for full-rank claims by specialization.

pub mod exactla;
pub mod field;
pub mod gaussmix;
pub mod polyring;
pub mod ranges;
pub mod secant;
pub mod witness;

pub use exactla::{span, ExactMatrix, SubspaceBasis};
pub use field::{Field, FieldChoice, FieldLabel, PrimeField, Rationals, DEFAULT_WITNESS_PRIME};
pub use gaussmix::{CovarianceForm, MixtureModel, ScaledForm, WeightRecovery};
pub use polyring::{dim_graded_piece, monomials_of_degree, Form, Monomial};
pub use ranges::{RangeRow, TruncatedSeries};
pub use secant::{ProblemParams, TangentReport};
pub use witness::{BinomialSet, CertificateVerdict, ContactReport, Verdict};

/// Errors raised by the exact toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operands live over different coefficient fields.
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    /// Shapes or lengths do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// An argument violates a documented precondition on its value.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A mathematical precondition of the operation does not hold for the
    /// given data (for example, a contact-locus check on a tuple whose
    /// tangent spaces are not skew).
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A linear system that should come from a genuine model is
    /// inconsistent.
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
}
