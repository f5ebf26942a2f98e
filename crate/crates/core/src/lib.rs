//! Floquet bands of the Laplacian with periodic point scatterers on the triangular lattice and
//! on the honeycomb lattice.
//!
//! Everything is generic over the scalar type ([`Real`]: `f32` or `f64`); the `*64` aliases at
//! the crate root fix it to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod cone;
pub mod error;
pub mod greens;
pub mod hc_bands;
pub mod lattice;
pub mod roots;
pub mod scalar;
pub mod spectrum;
pub mod tri_bands;

pub use error::{Error, Result};
pub use greens::{FloquetKernel, Greens, GreensEval, PoleData};
pub use lattice::{
    build_lattice, bz_mesh, bz_path, free_eigenvalues, rotation_orbit, DualIndex, FreeLevel,
    LatticeConfig, Momentum, RotationMatrices, Vec2,
};
pub use scalar::Real;

pub type LatticeConfig64 = LatticeConfig<f64>;
pub type Momentum64 = Momentum<f64>;
pub type Vec2f64 = Vec2<f64>;
pub type Greens64 = Greens<f64>;
