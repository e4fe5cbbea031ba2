//! Numerical toolkit for the absolute almost weighted summability method
//! `|f(N̄_p), u_m|_k`.
//!
//! The crate is organised bottom-up:
//!
//! - [`seqcore`]: weight sequences with cumulative sums, series generators
//!   with cached partial sums, and the truncation window.
//! - [`transform`]: the weighted mean `T_{m,n}`, its first difference
//!   `F_{m,n}`, the unit-weight kernel `ψ_{m,n}`, and term recovery.
//! - [`summability`]: the truncated norm, membership evidence, the
//!   inclusion hypotheses and the almost-convergence tester.
//! - [`matrixclass`]: infinite matrices, the `b(m,n,j)` coefficients and
//!   the class characterisations for `ℓ₁` and `c`.
//! - [`colsum`]: the column-sum functionals `U_p`/`L_p` and their sandwich.
//! - [`oracle`]: slow, literal reference implementations for cross-checks.
//!
//! Every verdict produced by this crate is a statement about a finite,
//! documented window ([`Verdict::PassAtScale`] and friends); nothing here
//! certifies membership in an infinite-dimensional space.

pub mod compensated;
pub mod colsum;
pub mod matrixclass;
pub mod oracle;
pub mod seqcore;
pub mod summability;
pub mod transform;
pub mod verdict;

mod error;
mod par;

pub use error::{Error, Result};
pub use seqcore::{make_bounded_partial_sum_series, PartialSumGenerator, SeriesKind, SeriesView, TruncWindow, WeightKind, WeightSeq};
pub use verdict::Verdict;
