//! Deterministic channel model for a line-of-sight MIMO link next to an
//! infinite, smooth planar surface.
//!
//! The wavenumber-domain response of the direct, reflected and transmitted
//! waves ([`spectrum`]) is synthesized into a spatial impulse response by
//! quadrature over the propagating disk ([`quadrature`]), sampled at the
//! antenna positions of two uniform linear arrays ([`mimo`]) and turned into
//! eigenvalues and waterfilling capacities ([`capacity`]). Closed-form
//! spherical-wave and image-source fields live in [`oracle`].

pub mod capacity;
pub mod error;
pub mod gauss;
pub mod linalg;
pub mod materials;
pub mod mimo;
pub mod oracle;
pub mod quadrature;
pub mod special;
pub mod spectrum;

pub use error::{Error, Result};
pub use materials::{material_catalog, Material, MaterialKind, Medium};
pub use num_complex::Complex64;
pub use quadrature::{estimate_nodes, synthesize_impulse, QuadratureSpec, SpatialLag};
pub use spectrum::{FieldComponent, SceneConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
