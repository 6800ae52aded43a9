//! Quadrature on polygons and edges, and the polynomial bases built on them.

mod basis;
mod gauss;
mod polygon;
mod triangle;

pub use basis::{
    multi_indices, orthonormalize, orthonormalize_samples, poly_dim, ScaledMonomialBasis, VectorDecomposition, VectorSample,
};
pub use gauss::{edge_rule, gauss_legendre, legendre, EdgeQuadrature};
pub use polygon::{ear_clip, polygon_rule, PolygonQuadrature};
pub use triangle::{triangle_rule, BaryPoint, MAX_SYMMETRIC_ORDER};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuadratureError {
    #[error("polygon is degenerate or clockwise")]
    DegeneratePolygon,
    #[error("ear clipping failed; polygon is not simple")]
    Triangulation,
    #[error("Gram matrix is not positive definite (conditioning failure)")]
    Conditioning,
}

/// Default exactness order for a method of order `k`.
#[inline]
pub fn default_order(k: usize) -> usize {
    2 * k + 2
}
