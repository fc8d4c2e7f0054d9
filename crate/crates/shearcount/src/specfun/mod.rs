//! Special functions: gamma/beta, Bessel J, oscillatory integrals, and the
//! 1D smoothed sums they control.

pub mod bessel;
pub mod gamma;
pub mod oscint;
pub mod quad;
pub mod sum2int;

pub use bessel::bessel_j;
pub use gamma::{beta, gamma, unit_moment};
pub use oscint::{osc_integral_i, osc_integral_i_quad, osc_integral_j};
pub use sum2int::{closed_form_k2, closed_form_k2_error, sum2int_1d, Sum2Int};
