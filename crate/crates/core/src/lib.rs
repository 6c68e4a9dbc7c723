//! Exact arithmetic for mod-p Kisin modules and predicted Serre weight sets.
//!
//! The crate implements, over small finite fields and at explicit series
//! truncations, the semilinear-algebra and carrying combinatorics attached
//! to two-dimensional mod-p local Galois representations:
//!
//! - [`algebra`]: F_q and F_q\[u\]/(u^{N+1}) with the substitution u -> u^p;
//! - [`rankone`]: rank-one modules, canonical forms, tame inertial characters;
//! - [`combinat`]: base-p carrying, the set P, h(J) fibers and J_max;
//! - [`extension`]: rank-two extensions, normal forms, and an exact
//!   Gaussian-elimination oracle for extension equivalence;
//! - [`ghat`]: descent-datum valuations, uniqueness, and model raising;
//! - [`weights`]: Serre weights, inertial types, niveau-1/2 membership
//!   witnesses, and the rebalancing algorithm for irreducible data;
//! - [`suites`]: the exhaustive verification batteries behind the CLI's
//!   `suite` command and the acceptance tests.
//!
//! Everything is exact: field elements, truncated series, and rational
//! valuations. There is no floating point in any computational path.

pub mod algebra;
pub mod combinat;
mod error;
pub mod extension;
pub mod ghat;
mod linalg;
pub mod rankone;
pub mod suites;
mod util;
pub mod weights;

pub use error::{Error, Result};
