//! Numerical building blocks shared by the physics modules.

pub mod cheb;
pub mod dd;
pub mod fit;
pub mod jet;
pub mod ode;
pub mod quad;
