//! Information-theoretic bounds on the moments of the generalization
//! error of randomized learning algorithms.
//!
//! The crate is organised bottom-up:
//!
//! - [`distributions`]: discrete and Gaussian data laws, quantisation,
//!   enumeration and sampling of i.i.d. training sets.
//! - [`divergences`]: KL, Rényi, power and chi-square divergences.
//! - [`information`]: the exact joint law of hypothesis and training set,
//!   and mutual, power and chi-square information computed from it.
//! - [`risk`]: losses, risks, and exact / Monte Carlo moments of the
//!   generalization error.
//! - [`bounds`]: the moment and single-draw bounds with their side
//!   conditions, tightness comparisons and inequality verifiers.
//! - [`experiments`]: the Gaussian mean-estimation sweep, the
//!   verification battery, and CSV / SVG output.

pub mod bounds;
pub mod distributions;
pub mod divergences;
pub mod error;
pub mod experiments;
pub mod information;
pub mod numerics;
pub mod risk;

pub use error::{Error, Result};
