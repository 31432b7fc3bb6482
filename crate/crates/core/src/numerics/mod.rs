//! Numerical kernels shared by the policy solver and the analytical model.

mod fourier;
mod lattice;
mod quad;
mod root;

pub use fourier::{
    expm1_over_j, gil_pelaez_cdf, one_minus_pow_j, one_minus_pow_j_series, plancherel_ccdf, ComplexFn,
    InversionResult, PhaseSum,
};
pub use lattice::{lattice_cdf, LatticeMeasure};
pub use num_complex::Complex64;
pub use quad::{
    gauss_legendre, integrate_adaptive, integrate_semi_infinite, Quadrature, GaussRule,
};
pub use root::find_root_monotone;
