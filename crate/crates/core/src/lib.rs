//! High-order Crouzeix-Raviart finite elements on tetrahedral meshes.
//!
//! The crate is organized bottom-up:
//!
//! * [`special`] — scalar kernels: shifted factorials, Jacobi/Legendre
//!   evaluation, terminating hypergeometric coefficient sums.
//! * [`ortho`] — the orthogonal (Proriol) basis `b_{n,k}` on the reference
//!   triangle, edge traces and the edge-to-triangle extension operator.
//! * [`s3`] — decomposition of the degree-n orthogonal polynomials into the
//!   three irreducible components of the vertex-permutation group: totally
//!   symmetric, sign-type and reflection-type bases.
//! * [`star`] — continuous piecewise orthogonal polynomials on triangle stars.
//! * [`mesh`] — 3D simplicial meshes, structured generators, nodal points,
//!   facet pullbacks and plain-text mesh IO.
//! * [`fespace`] — Lagrange bookkeeping, the non-conforming basis functions
//!   supported on one tetrahedron / two adjacent tetrahedra, and the global
//!   degree-of-freedom system.
//! * [`quadrature`] — collapsed-coordinate Gauss rules on triangles and
//!   tetrahedra.
//! * [`solver`] — broken-Galerkin assembly for the Poisson model problem,
//!   linear solvers, error norms and h-convergence studies.

pub mod error;
pub mod fespace;
pub mod mesh;
pub mod ortho;
pub mod poly1d;
pub mod quadrature;
pub mod s3;
pub mod solver;
pub mod special;
pub mod star;

pub use error::{Error, Result};

pub use ortho::{EdgeLabel, OrthoCoeffs, RefTrianglePoint};
pub use poly1d::Poly1;
pub use quadrature::QuadratureRule;
