//! Exact computation of the L^2 growth functional
//! `Q_u(n) = E |u(S_n)|^2` for discrete harmonic functions `u` on the
//! two-dimensional integer lattice, where `S_n` is the simple random walk
//! started at the origin.
//!
//! The crate is organized bottom-up:
//!
//! * [`exact`] — arbitrary-precision rationals and certified dyadic interval
//!   arithmetic (square roots, `2^-x`, real powers, three-valued comparison).
//! * [`lattice`] — the discrete harmonic polynomials `Z_k` (and their
//!   normalized variant) on the half-integer lattice, together with discrete
//!   partial derivatives and the lattice Laplacian.
//! * [`walk`] — exact simple-random-walk distributions by dynamic programming,
//!   exact expectations against them, and a seeded Monte Carlo estimator.
//! * [`growth`] — the growth functional `Q_k`, its Newton expansion in
//!   binomial coefficients `C(n, k-j)`, coefficient extraction by two
//!   independent algorithms (forward differences vs. the recursion through the
//!   normalized polynomials), and a persistent coefficient cache.
//! * [`model`] — the comparison family `f_{k,alpha}(n) = C(n + alpha*k, k)`,
//!   Vandermonde head/tail sums, and certified product-form ratio enclosures
//!   that stay cheap for very large `k`.
//! * [`checks`] — a registry of named certified checks (identities, bounds,
//!   log-convexity-type three-circles inequalities) producing serializable
//!   reports, plus the sharpness search over the `(k, n)` grid.
//!
//! All asserted results are exact (rational equality) or certified (interval
//! enclosures with outward rounding); floating point is never used for
//! decisions.

pub mod error;
pub mod exact;
pub mod lattice;
pub mod walk;
pub mod growth;
pub mod model;
pub mod checks;

pub use error::{Error, Result};
pub use exact::{DyadicInterval, Rational, Verdict};
