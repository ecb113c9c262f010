//! Special functions and quadrature shared by the analytic modules.

mod gamma;
mod gegenbauer;
pub mod polylog;
pub mod quad;

pub use gamma::{beta_fn, c_d_norm, gamma_fn, riemann_zeta};
pub(crate) use gamma::{gamma_real, zeta_real};
pub(crate) use gegenbauer::gamma_table;
pub use gegenbauer::{gegenbauer_gamma, gegenbauer_gamma_deriv, gegenbauer_gamma_integral};
pub use polylog::Polylog;
pub use quad::{
    gauss_legendre, integrate_1d, integrate_1d_vec, integrate_1d_with_breaks, integrate_2d, Integral, QuadratureSpec,
    Rect, Scheme, Upper,
};
