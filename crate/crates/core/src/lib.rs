//! Strategic default with collateral and reputation.
//!
//! Three regimes share the primitives in [`model`]: borrowing against the
//! asset alone ([`collateral`]), against reputation alone ([`reputation`]),
//! and against both ([`combined`]). [`oracle`] re-derives the closed forms
//! numerically and simulates default dynamics.

// `!(v > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collateral;
pub mod combined;
pub mod error;
pub mod model;
pub mod oracle;
pub mod reputation;

#[cfg(test)]
mod invariants;

pub use error::{ModelError, Result};
pub use model::{Contract, ModelParams, PricePath};
