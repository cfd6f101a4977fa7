//! Exact constructions in finite classical groups under two bi-invariant
//! metrics: the normalized Hamming metric on permutations and the normalized
//! rank and projective rank metrics on matrix groups.
//!
//! Every algorithm works over exact finite-field and rational arithmetic;
//! there is no floating point anywhere, so all outputs are deterministic and
//! replayable. The crate is `no_std` + `alloc`.
//!
//! Module map:
//! - [`field_core`]: GF(p^k) arithmetic and dense matrices.
//! - [`perm_split`]: permutations, Hamming metric, support-splitting factorization.
//! - [`linear_split`]: rank metrics and rank-controlled factorizations in GL/SL.
//! - [`forms`]: bilinear/hermitian/quadratic form spaces, congruence normal
//!   forms, standard bases, isometry patching.
//! - [`classical_decomp`]: block models of symplectic/unitary/orthogonal
//!   groups, their unipotent-times-diagonal factorizations, and geodesic
//!   points inside unipotent and diagonal subgroups.
//! - [`geodesic_builder`]: dyadic midpoint paths and exact deviation scans.
//! - [`rng`]: the documented deterministic generator used by all randomized
//!   searches.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classical_decomp;
pub mod field_core;
pub mod forms;
pub mod geodesic_builder;
pub mod linear_split;
pub mod perm_split;
pub(crate) mod poly;
pub mod rng;

/// Exact rational scalar used for all metric values, path parameters, and
/// rank budgets.
pub type Rational = num_rational::Ratio<i64>;

/// Unified error type for every fallible operation in the crate.
///
/// Each variant doubles as a stable machine-readable code via [`Error::code`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Error {
    /// Characteristic not prime, or p > 97, or degree outside 1..=4.
    UnsupportedField,
    /// Modulus list malformed (length, leading coefficient) or reducible.
    BadModulus,
    /// Operands belong to different fields.
    FieldMismatch,
    /// Matrix or permutation dimensions incompatible with the operation.
    ShapeMismatch,
    /// Field inversion of zero.
    DivisionByZero,
    /// Matrix inversion of a non-invertible matrix.
    SingularMatrix,
    /// Cycle split length outside the open interval (1, cycle length).
    LengthOutOfRange,
    /// Permutation operation requires an even permutation.
    ParityError,
    /// Rank budget outside [0, rk(g - lambda 1)].
    PhiOutOfRange,
    /// Scalar argument must be nonzero.
    ZeroLambda,
    /// Determinant is not 1 where a special linear element is required.
    NotSpecialLinear,
    /// Block element fails its group's defining equations.
    NotInGroup,
    /// Input reached a branch the containing group law rules out.
    ImpossibleCase,
    /// Matrix is not alternating (skew-symmetric with zero diagonal).
    NotAlternating,
    /// Matrix is not symmetric.
    NotSymmetric,
    /// Matrix k fails conj(k)^T = -k.
    NotAntiHermitian,
    /// Matrix fails conj(g)^T = g.
    NotHermitian,
    /// Operation requires a field with a nonidentity involution.
    NoInvolution,
    /// Form space is singular where a non-singular one is required.
    SingularSpace,
    /// Map fails to preserve the form.
    NotIsometry,
    /// Invalid subgroup-factor payload for the requested tag.
    InvalidPayload,
    /// Internal residual-shape check failed; the input exposed a case the
    /// factorization's case analysis does not cover.
    ResidualShape,
    /// A bounded deterministic search ran out of candidates.
    SearchExhausted,
    /// A self-checked bound failed on a constructed output.
    BoundViolation,
}

impl Error {
    /// Stable machine-readable code, used verbatim by the CLI.
    pub fn code(self) -> &'static str {
        match self {
            Error::UnsupportedField => "UnsupportedField",
            Error::BadModulus => "BadModulus",
            Error::FieldMismatch => "FieldMismatch",
            Error::ShapeMismatch => "ShapeMismatch",
            Error::DivisionByZero => "DivisionByZero",
            Error::SingularMatrix => "SingularMatrix",
            Error::LengthOutOfRange => "LengthOutOfRange",
            Error::ParityError => "ParityError",
            Error::PhiOutOfRange => "PhiOutOfRange",
            Error::ZeroLambda => "ZeroLambda",
            Error::NotSpecialLinear => "NotSpecialLinear",
            Error::NotInGroup => "NotInGroup",
            Error::ImpossibleCase => "ImpossibleCase",
            Error::NotAlternating => "NotAlternating",
            Error::NotSymmetric => "NotSymmetric",
            Error::NotAntiHermitian => "NotAntiHermitian",
            Error::NotHermitian => "NotHermitian",
            Error::NoInvolution => "NoInvolution",
            Error::SingularSpace => "SingularSpace",
            Error::NotIsometry => "NotIsometry",
            Error::InvalidPayload => "InvalidPayload",
            Error::ResidualShape => "ResidualShape",
            Error::SearchExhausted => "SearchExhausted",
            Error::BoundViolation => "BoundViolation",
        }
    }
}

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            Error::UnsupportedField => "field outside the supported range (prime p <= 97, degree 1..=4)",
            Error::BadModulus => "modulus is not a monic irreducible of the stated degree",
            Error::FieldMismatch => "operands belong to different fields",
            Error::ShapeMismatch => "incompatible dimensions",
            Error::DivisionByZero => "division by zero",
            Error::SingularMatrix => "matrix is not invertible",
            Error::LengthOutOfRange => "cycle split length out of range",
            Error::ParityError => "permutation must be even",
            Error::PhiOutOfRange => "rank budget out of range",
            Error::ZeroLambda => "scalar must be nonzero",
            Error::NotSpecialLinear => "determinant must be 1",
            Error::NotInGroup => "block element fails its group equations",
            Error::ImpossibleCase => "input reached a branch excluded by the group law",
            Error::NotAlternating => "matrix must be alternating",
            Error::NotSymmetric => "matrix must be symmetric",
            Error::NotAntiHermitian => "matrix must satisfy conj(k)^T = -k",
            Error::NotHermitian => "matrix must satisfy conj(g)^T = g",
            Error::NoInvolution => "field involution must have order 2",
            Error::SingularSpace => "form space must be non-singular",
            Error::NotIsometry => "map does not preserve the form",
            Error::InvalidPayload => "payload does not match its tag",
            Error::ResidualShape => "residual cycle shape outside the handled cases",
            Error::SearchExhausted => "bounded search found no candidate",
            Error::BoundViolation => "constructed output failed its bound re-check",
        };
        f.write_str(msg)
    }
}
