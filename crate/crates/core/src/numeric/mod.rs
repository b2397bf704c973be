//! Numerical building blocks: root finding, quadrature, Laplace inversion,
//! order-stable statistics.

pub mod laplace;
pub mod quad;
pub mod roots;
pub mod stats;
