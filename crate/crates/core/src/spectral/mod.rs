//! Periodic-box discretization: grids and fields, FFT-based Riesz
//! convolution, spectral derivatives and quadrature.

pub mod dump;
mod fft;
mod grid;
mod ops;
mod riesz;

pub use grid::{Field, FieldPair, Grid};
pub use ops::{grad_norm_sq, inner, integrate, l2_norm_sq, laplacian, pairwise_sum, SpectralOps};
pub use riesz::{
    abs_pow, build_riesz, kernel_sample, lattice_zeta, nonlocal_term, origin_cell_value, riesz_apply,
    OriginRule, RieszOperator, DEFAULT_MEMORY_CAP,
};
