//! Exact computations in the curve graphs of the five- and six-punctured
//! spheres.
//!
//! Curves are stored as normal coordinates on a fixed fan triangulation and
//! manipulated as cyclic words in the dual trivalent graph. Everything is
//! integer arithmetic; nothing is approximated.

pub mod bundle;
pub mod census;
pub mod curve;
pub mod error;
pub mod intersect;
pub mod io;
pub mod lowpaths;
pub mod mcg;
pub mod medium;
pub mod overlay;
pub mod path;
pub mod pentagon;
pub mod projection;
pub mod suite;
pub mod surface;

pub use curve::Curve;
pub use error::{Error, Result};
pub use surface::{Preset, Surface};
