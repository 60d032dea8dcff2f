//! Numerical building blocks: Gauss-Kronrod quadrature, the geometric-panel
//! convergence protocol for improper integrals, monotone root finding,
//! gamma-function ratios and small statistics helpers.

pub mod panels;
pub mod quad;
pub mod roots;
pub mod special;
pub mod stats;

pub use panels::{integrate_panels, run_panels, Convergence, PanelConfig, PanelDirection, PanelIntegral};
pub use quad::{integrate, integrate_geometric, QuadResult};
