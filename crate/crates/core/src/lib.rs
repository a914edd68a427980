//! Computational laboratory for the coupon collector problem with package
//! drawings: each round delivers a package of `s` distinct coupons out of `n`,
//! and the collector stops once every coupon type has been seen.
//!
//! The crate is organised around three complementary engines plus two layers
//! on top of them:
//!
//! * [`exact`] - closed forms, recursions and bounds for the waiting time
//!   under the uniform, arcs, near-decomposition and rotation schemes, and the
//!   missing-count chain that scales the exact computation to large `n`.
//! * [`engine`] - a subset-lattice dynamic program that evaluates the expected
//!   number of rounds for an *arbitrary* package distribution, in exact
//!   rational or floating point arithmetic.
//! * [`montecarlo`] - seeded, reproducible simulation of the collection
//!   process for any distribution the other engines accept.
//! * [`asymptotics`] - limit laws for the three regimes of package growth
//!   (fixed `s`, proportional `s = cn`, and `s` close to `n`) together with
//!   the Gumbel law for the classical single-coupon collector.
//! * [`optimizer`] - simplex search over package distributions for a fixed
//!   support, with exact certificates that a candidate beats the uniform
//!   distribution.
//!
//! All exact arithmetic uses arbitrary-precision rationals, so equalities in
//! tests and certificates are true identities rather than float comparisons.

pub mod asymptotics;
pub mod comb;
pub mod dist;
pub mod engine;
mod error;
pub mod exact;
pub mod montecarlo;
pub mod optimizer;
pub mod value;

pub use error::{Error, Result};
pub use value::{ExactValue, Mode};
