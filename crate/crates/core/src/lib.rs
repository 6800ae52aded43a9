//! Mixed virtual element solver for the first-order acoustic wave equation
//! on polygonal meshes.

pub mod analysis;
pub mod assembly;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod output;
pub mod problem;
pub mod quadrature;
pub mod scenario;
pub mod space;
pub mod testing;
pub mod timestepping;
