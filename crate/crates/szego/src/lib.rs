//! Nonlinear Fourier transform for the cubic Szegő equation.
//!
//! The transform sends a symbol u in the Hardy space to spectral data
//! ((s_r), (Ψ_r)): the singular values of the Hankel pair (H_u, K_u) together
//! with finite Blaschke products. The cubic Szegő flow acts on spectral data
//! by rotating the Blaschke products, which [`flow`] exploits alongside direct
//! integrators used for cross-validation.

pub mod aak;
pub mod blaschke;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod hankel;
pub mod hardy;
pub mod io;
pub mod nlft;
pub mod poly;
pub mod special;

pub use error::{Error, Result};
pub use hardy::{GridValues, HardySymbol, C64};
