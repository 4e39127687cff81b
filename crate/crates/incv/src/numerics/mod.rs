//! Shared numerical primitives: normal distribution functions, adaptive
//! quadrature, and root/system solving. Everything is a pure function; no
//! state is shared between calls.

pub mod normal;
pub mod quad;
pub mod root;

pub use normal::{erfc, normal_cdf, normal_pdf, normal_quantile, normal_sf};
pub use quad::{integrate_1d, integrate_1d_vec, integrate_2d, integrate_2d_vec, QuadratureSpec};
pub use root::{find_root, solve_system};
