//! Geodesic nets and multinets in the Euclidean plane.
//!
//! The crate models planar straight-line (multi)nets with pinned boundary
//! vertices, checks the stationarity identities that characterize them,
//! constructs the classical examples (Fermat/Steiner configurations, weighted
//! triangle multinets, rotated double polygons) and builds the seven-fold
//! "star" family with its high-precision suspension-angle derivative
//! sequence.

pub mod bigreal;
pub mod constructions;
pub mod derivseq;
pub mod error;
pub mod geometry;
pub mod netcore;
pub mod relax;
pub mod render;
pub mod report;
pub mod star;

pub use bigreal::{BigReal, Ctx};
pub use error::{GeonetError, Result};
pub use geometry::Point;
pub use netcore::{PlanarNet, Vertex, VertexId, VertexKind};
