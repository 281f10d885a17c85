//! Quantale-valued metric machinery for a small simply typed lambda calculus
//! over the reals.
//!
//! The crate is organized around five cooperating subsystems:
//!
//! * [`quantale`] — commutative integral quantales: the extended nonnegative
//!   reals with reversed order, binary products, monotone function spaces,
//!   lifted quantales, and arbitrary finite quantales given by tables.
//! * [`lambda`] — concrete syntax, AST, and type checker for the calculus,
//!   plus the configurable table of primitive real functions.
//! * [`semantics`] — the two interpreters: plain set-theoretic values and
//!   error derivatives, together with primitive moduli of continuity.
//! * [`metrics`] — distances between interpreted values: membership queries,
//!   distance estimation, self-distances, two-term bounds, and the
//!   definable-carrier counterexample replay.
//! * [`workbench`] — a brute-force laboratory for finite quasi-quasi-metric
//!   spaces: axiom checks, relation/predicate translations, and the
//!   product/exponential/weak-coproduct constructions.
//! * [`qet`] — a checker for derivation trees in the quantitative equational
//!   theory whose judgments bound distances between terms.

pub mod lambda;
pub mod metrics;
pub mod qet;
pub mod quantale;
pub mod semantics;
pub mod value;
pub mod verdict;
pub mod workbench;

pub use verdict::Verdict;
