//! Bi-parameter multiplier and paraproduct analysis on periodic grids.
//!
//! The crate provides, at desk scale and with exact spectral calculus:
//! multiplier operator evaluation ([`multipliers`]), a paraproduct calculus
//! with homogeneous-derivative commutation identities and fractional Leibniz
//! harnesses ([`paraproducts`]), hybrid maximal/square operators and
//! exceptional sets ([`maximal`]), the dyadic tile model with size/energy
//! stopping-time decompositions, level-set stratification and maximal-rectangle
//! covering diagnostics ([`tiles`]), and quantitative log-divergence
//! certificates for double bilinear Hilbert transforms ([`singular`]).

pub mod bumps;
pub mod error;
pub mod grid;
pub mod io;
pub mod lp;
pub mod maximal;
pub mod multipliers;
pub mod paraproducts;
pub mod singular;
pub mod symbols;
pub mod tiles;

pub use error::{Error, Result};

/// Library version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
