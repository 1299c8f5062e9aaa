//! Hockey-stick (`E_γ`) divergence tools for local differential privacy.
//!
//! The crate computes divergences between finite distributions, contraction
//! coefficients of Markov kernels, exact `(ε, δ)`-LDP audits of finite
//! mechanisms, information measures, and minimax or Bayes risk lower bounds
//! under privacy constraints. The [`oracle`] module holds brute-force
//! reference implementations used to cross-check the closed forms.

pub mod bounds;
pub mod contraction;
pub mod dist;
pub mod error;
pub mod fmt;
pub mod info;
pub mod kernel;
pub mod ldp;
pub mod oracle;

pub use contraction::PrivacyParams;
pub use dist::{Distribution, FGenerator};
pub use error::{Error, Result};
pub use kernel::Kernel;
