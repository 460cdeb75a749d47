//! Lorentzian Darboux frames of curves on spacelike hypersurfaces in
//! Minkowski 4-space, their hyperbolic and de Sitter surfaces, and the
//! singularities of those surfaces.

pub mod builtins;
pub mod error;
pub mod frame;
pub mod heights;
pub mod minkowski;
pub mod smoothcurve;
pub mod surfaces;

pub use error::{DomainError, Error, ParseError, Result};
