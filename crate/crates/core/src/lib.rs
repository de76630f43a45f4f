//! Lens elliptic gamma function and the A_n / BC_n elliptic hypergeometric
//! sum/integrals built from it, with numerical verifiers for the identities
//! they satisfy.
//!
//! - [`kernel`]: special functions (Γ(z,m), θ_1, θ_2, q-Pochhammer, λ)
//! - [`quadrature`]: periodic trapezoidal rules on straight contours
//! - [`sumint`]: the constrained sum/integrals I^m_{A_n} and I^m_{BC_n}
//! - [`identities`]: samplers and both-sides verifiers
//! - [`susy_index`]: SU/Sp SQCD lens indices and Seiberg duality
//! - [`lattice`]: Boltzmann weights and the star-star relation

pub mod error;
pub mod identities;
pub mod kernel;
pub mod lattice;
pub mod quadrature;
pub mod report;
pub mod sumint;
pub mod susy_index;

pub use error::{Error, Result};
pub use kernel::{Kernel, LensArg, ModularParams, NumericsConfig};
pub use num_complex::Complex64;
pub use report::VerificationReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
