//! Quadrature, interpolation and ODE building blocks.

pub mod adaptive;
pub mod chebyshev;
pub mod gauss;
pub mod ode;

pub use adaptive::{integrate_complex, integrate_real, Integral, Tolerance};
pub use chebyshev::ChebyshevTable;
pub use gauss::GaussLegendre;
