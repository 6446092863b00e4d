//! Finite Grassmann algebras with Gaussian integration and the
//! renormalization group map.

mod coeff;
mod element;
mod gaussian;
mod kernels;
mod pfaffian;

pub use coeff::{Coeff, LamPoly};
pub use element::{merge_sign, ExactElement, Grassmann};
pub use gaussian::{
    gaussian_integral, laplacian, omega, omega_with_log_cap, s_empirical, shift_convolve,
    shift_convolve_doubled, wick_order, SEstimate, ORACLE_LIMIT, S_EXHAUSTIVE_LIMIT, S_SAMPLES,
};
pub use kernels::{gr_from_kernel, gr_from_kernel_in, kernel_from_gr, n_functional, unit_rho, GeneratorSet};
pub use pfaffian::{determinant, CovarianceMatrix};

#[cfg(test)]
mod tests;
